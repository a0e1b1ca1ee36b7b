//! Re-scoring by geodesic distance under a diagonal metric
//! `g_k(y) = 1 − α·exp(−(y_k/σ_k)²)` in decorrelated query-space
//! coordinates. Distances shrink where the positive samples are dense.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::{DMatrix, DVector};

use crate::classic::variance_floor;
use crate::error::{check_len, Error, Result};
use crate::query_space::QuerySpaceMatrix;

pub const DEFAULT_ALPHA: f64 = 0.5;

const FINE_STEP: f64 = 1e-3;
const FINE_END: f64 = 3.0;
const COARSE_STEP: f64 = 0.05;
const COARSE_END: f64 = 8.0;
const FINE_KNOTS: usize = 3000;
const COARSE_KNOTS: usize = 100;

fn integrand(alpha: f64, v: f64) -> f64 {
    (1.0 - alpha * (-v * v).exp()).sqrt()
}

/// Trapezoid refinement with Richardson extrapolation on `[a, b]`.
fn romberg(f: impl Fn(f64) -> f64, a: f64, b: f64, levels: usize) -> f64 {
    let mut prev = vec![0.5 * (b - a) * (f(a) + f(b))];
    for level in 1..levels {
        let n = 1usize << level;
        let h = (b - a) / n as f64;
        let mid: f64 = (0..n / 2).map(|i| f(a + (2 * i + 1) as f64 * h)).sum();
        let mut row = vec![0.5 * prev[0] + h * mid];
        let mut factor = 1.0;
        for j in 1..=level {
            factor *= 4.0;
            row.push(row[j - 1] + (row[j - 1] - prev[j - 1]) / (factor - 1.0));
        }
        prev = row;
    }
    *prev.last().unwrap()
}

/// `Ξ(x) = ∫₀ˣ √(1 − α e^{−v²}) dv`, tabulated on a non-uniform grid and
/// linearly interpolated. Step 0.001 up to 3, step 0.05 up to 8, then
/// linear with the integrand's value at 8 as slope.
#[derive(Debug, Clone, PartialEq)]
pub struct XiTable {
    alpha: f64,
    grid: Vec<f64>,
    values: Vec<f64>,
    tail_slope: f64,
}

type Cache = Mutex<HashMap<u64, Arc<XiTable>>>;

impl XiTable {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&alpha) {
            return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1), got {alpha}")));
        }
        let mut grid = Vec::with_capacity(FINE_KNOTS + COARSE_KNOTS + 1);
        grid.extend((0..=FINE_KNOTS).map(|i| i as f64 * FINE_STEP));
        grid.extend((1..=COARSE_KNOTS).map(|i| FINE_END + i as f64 * COARSE_STEP));
        let f = |v: f64| integrand(alpha, v);
        let mut values = Vec::with_capacity(grid.len());
        values.push(0.0);
        for w in grid.windows(2) {
            let prev = *values.last().unwrap();
            values.push(prev + romberg(f, w[0], w[1], 4));
        }
        Ok(Self {
            alpha,
            tail_slope: f(COARSE_END),
            grid,
            values,
        })
    }

    /// Process-wide cached table for `alpha`.
    pub fn shared(alpha: f64) -> Result<Arc<Self>> {
        static CACHE: OnceLock<Cache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        if let Some(t) = cache.lock().unwrap().get(&alpha.to_bits()) {
            return Ok(t.clone());
        }
        let table = Arc::new(Self::new(alpha)?);
        cache.lock().unwrap().insert(alpha.to_bits(), table.clone());
        Ok(table)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn tail_slope(&self) -> f64 {
        self.tail_slope
    }

    pub fn xi(&self, x: f64) -> f64 {
        if x < 0.0 {
            return -self.xi(-x);
        }
        let k = if x < FINE_END {
            (x / FINE_STEP) as usize
        } else if x < COARSE_END {
            FINE_KNOTS + ((x - FINE_END) / COARSE_STEP) as usize
        } else {
            let last = self.grid.len() - 1;
            return self.values[last] + self.tail_slope * (x - self.grid[last]);
        };
        let k = k.min(self.grid.len() - 2);
        let (x0, x1) = (self.grid[k], self.grid[k + 1]);
        let t = (x - x0) / (x1 - x0);
        self.values[k] + t * (self.values[k + 1] - self.values[k])
    }

    /// `n` evenly spaced `(x, Ξ(x))` pairs over `[from, to]`.
    pub fn sample(&self, from: f64, to: f64, n: usize) -> Vec<(f64, f64)> {
        match n {
            0 => Vec::new(),
            1 => vec![(from, self.xi(from))],
            _ => (0..n)
                .map(|i| {
                    let x = from + (to - from) * i as f64 / (n - 1) as f64;
                    (x, self.xi(x))
                })
                .collect(),
        }
    }
}

/// Mean, rotation and per-axis spread of the positive rows.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianFit {
    pub mu: Vec<f64>,
    /// Columns are the principal axes.
    pub u: DMatrix<f64>,
    /// Standard deviation along each principal axis, descending.
    pub sigma: Vec<f64>,
}

/// Population-convention Gaussian fit via SVD of the scatter matrix.
pub fn fit_gaussian(rows: &[&[f64]]) -> Result<GaussianFit> {
    if rows.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: rows.len(),
        });
    }
    let w = rows[0].len();
    for r in rows {
        check_len(w, r.len())?;
    }
    let n = rows.len() as f64;
    let mut mu = vec![0.0; w];
    for r in rows {
        for (m, v) in mu.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mu.iter_mut().for_each(|m| *m /= n);

    let mut scatter = DMatrix::<f64>::zeros(w, w);
    let mut diff = DVector::<f64>::zeros(w);
    for r in rows {
        for d in 0..w {
            diff[d] = r[d] - mu[d];
        }
        scatter.ger(1.0, &diff, &diff, 1.0);
    }
    let floor = variance_floor(scatter.trace() / n);
    let svd = scatter.svd(true, false);
    let u_raw = svd.u.unwrap();
    let mut order: Vec<usize> = (0..w).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let mut u = DMatrix::<f64>::zeros(w, w);
    let mut sigma = Vec::with_capacity(w);
    for (k, &j) in order.iter().enumerate() {
        u.set_column(k, &u_raw.column(j));
        sigma.push((svd.singular_values[j] / n).max(floor).sqrt());
    }
    Ok(GaussianFit { mu, u, sigma })
}

#[derive(Debug, Clone)]
pub struct RiemannModel {
    pub mu: Vec<f64>,
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub alpha: f64,
    pub xi_table: Arc<XiTable>,
}

impl RiemannModel {
    pub fn from_fit(fit: GaussianFit, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
        }
        Ok(Self {
            mu: fit.mu,
            u: fit.u,
            sigma: fit.sigma,
            alpha,
            xi_table: XiTable::shared(alpha)?,
        })
    }

    /// Centred, rotated coordinates `y = Uᵀ(row − μ)`.
    pub fn rotate(&self, row: &[f64]) -> Result<Vec<f64>> {
        check_len(self.mu.len(), row.len())?;
        let diff: Vec<f64> = row.iter().zip(&self.mu).map(|(a, b)| a - b).collect();
        Ok((0..self.mu.len())
            .map(|k| self.u.column(k).iter().zip(&diff).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// Geodesic distance of one query-space row from the centre.
    pub fn score_row(&self, row: &[f64]) -> Result<f64> {
        let y = self.rotate(row)?;
        riemann_distance(&y, self)
    }
}

/// Fits the Gaussian on positive rows and wraps it with `alpha`.
pub fn riemann_fit(rows: &[&[f64]], alpha: f64) -> Result<RiemannModel> {
    RiemannModel::from_fit(fit_gaussian(rows)?, alpha)
}

/// Per-axis geodesic length `σ/√(1−α) · Ξ(y/σ)`.
pub(crate) fn axis_length(table: &XiTable, sigma: f64, y: f64) -> f64 {
    sigma / (1.0 - table.alpha()).sqrt() * table.xi(y / sigma)
}

/// `D(y) = [Σ_k (σ_k/√(1−α) · Ξ(y_k/σ_k))²]^{1/2}`.
pub fn riemann_distance(y: &[f64], model: &RiemannModel) -> Result<f64> {
    check_len(model.sigma.len(), y.len())?;
    Ok(y
        .iter()
        .zip(&model.sigma)
        .map(|(&yk, &s)| axis_length(&model.xi_table, s, yk).powi(2))
        .sum::<f64>()
        .sqrt())
}

/// Scores every row of a query-space matrix.
pub fn riemann_score(rows: &QuerySpaceMatrix, model: &RiemannModel) -> Result<Vec<f64>> {
    check_len(model.mu.len(), rows.width())?;
    rows.rows().map(|r| model.score_row(r)).collect()
}
