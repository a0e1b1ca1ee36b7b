//! Latent-topic feedback: `K` topics, each with a discrete distribution
//! over the feedback items and a diagonal Gaussian per word space, fitted
//! by EM. Items are scored by the prior-weighted geodesic distances to the
//! topic centres.

use std::fmt::Write as _;
use std::sync::Arc;

use log::warn;
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::feature_store::Item;
use crate::riemann::{axis_length, XiTable, DEFAULT_ALPHA};

const COLLAPSE_MASS: f64 = 1e-12;
const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// One feedback observation: an item identity and its word vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Observation {
    pub id: String,
    pub words: Vec<Vec<f64>>,
}

impl Observation {
    pub fn new(id: impl Into<String>, words: Vec<Vec<f64>>) -> Self {
        Self { id: id.into(), words }
    }

    pub fn from_item(item: &Item) -> Self {
        Self::new(item.id(), item.words().map(<[f64]>::to_vec).collect())
    }

    /// Query-space row: every coordinate is its own one-dimensional word.
    pub fn from_row(id: impl Into<String>, row: &[f64]) -> Self {
        Self::new(id, row.iter().map(|&v| vec![v]).collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmConfig {
    pub topics: usize,
    pub max_iterations: usize,
    pub tolerance: f64,
    pub seed: u64,
    pub variance_floor: f64,
    pub restarts: usize,
    pub alpha: f64,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            topics: 3,
            max_iterations: 100,
            tolerance: 1e-8,
            seed: 0,
            variance_floor: 1e-6,
            restarts: 3,
            alpha: DEFAULT_ALPHA,
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.topics == 0 {
            return Err(Error::InvalidArgument("need at least one topic".into()));
        }
        if !(self.tolerance > 0.0) {
            return Err(Error::InvalidArgument("EM tolerance must be > 0".into()));
        }
        if !(self.variance_floor > 0.0) {
            return Err(Error::InvalidArgument("variance floor must be > 0".into()));
        }
        if self.restarts == 0 {
            return Err(Error::InvalidArgument("need at least one EM run".into()));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Fitted topic model. Indexing: `p_d_given_z[a][b]`, `mean[b][c][d]`.
#[derive(Debug, Clone)]
pub struct LatentModel {
    pub pi: Vec<f64>,
    pub p_d_given_z: Vec<Vec<f64>>,
    pub mean: Vec<Vec<Vec<f64>>>,
    pub var: Vec<Vec<Vec<f64>>>,
    pub alpha: f64,
    xi: Arc<XiTable>,
}

impl LatentModel {
    /// Assembles a model from explicit parameters.
    pub fn new(
        pi: Vec<f64>,
        p_d_given_z: Vec<Vec<f64>>,
        mean: Vec<Vec<Vec<f64>>>,
        var: Vec<Vec<Vec<f64>>>,
        alpha: f64,
    ) -> Result<Self> {
        let k = pi.len();
        if k == 0 {
            return Err(Error::InvalidArgument("need at least one topic".into()));
        }
        check_len(k, mean.len())?;
        check_len(k, var.len())?;
        for row in &p_d_given_z {
            check_len(k, row.len())?;
        }
        for (m, v) in mean.iter().zip(&var) {
            check_len(mean[0].len(), m.len())?;
            check_len(m.len(), v.len())?;
            for (mc, vc) in m.iter().zip(v) {
                check_len(mc.len(), vc.len())?;
                if vc.iter().any(|s| !(*s > 0.0)) {
                    return Err(Error::InvalidArgument("variances must be > 0".into()));
                }
            }
        }
        Ok(Self {
            pi,
            p_d_given_z,
            mean,
            var,
            alpha,
            xi: XiTable::shared(alpha)?,
        })
    }

    pub fn topics(&self) -> usize {
        self.pi.len()
    }

    pub fn word_count(&self) -> usize {
        self.mean[0].len()
    }

    /// Total feature dimension across word spaces.
    pub fn dim(&self) -> usize {
        self.mean[0].iter().map(Vec::len).sum()
    }

    /// Text listing of priors, means and variances per topic and word.
    pub fn dump(&self) -> String {
        let mut s = String::new();
        let fmt = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
        let _ = writeln!(s, "topics\t{}\talpha\t{}", self.topics(), self.alpha);
        for b in 0..self.topics() {
            let _ = writeln!(s, "topic\t{b}\tpi\t{}", self.pi[b]);
            for c in 0..self.word_count() {
                let _ = writeln!(
                    s,
                    "  word\t{c}\tmean\t{}\tvar\t{}",
                    fmt(&self.mean[b][c]),
                    fmt(&self.var[b][c])
                );
            }
        }
        s
    }
}

fn check_observations(x: &[Observation]) -> Result<Vec<usize>> {
    let first = x.first().ok_or(Error::InsufficientSamples { needed: 1, got: 0 })?;
    let dims: Vec<usize> = first.words.iter().map(Vec::len).collect();
    for o in x {
        check_len(dims.len(), o.words.len())?;
        for (w, &d) in o.words.iter().zip(&dims) {
            check_len(d, w.len())?;
        }
    }
    Ok(dims)
}

fn log_normal(x: f64, mu: f64, var: f64) -> f64 {
    -0.5 * (LN_2PI + var.ln() + (x - mu) * (x - mu) / var)
}

/// `ln T_ab` for every observation and topic.
fn log_joint(x: &[Observation], model: &LatentModel) -> Result<Vec<Vec<f64>>> {
    let dims = check_observations(x)?;
    check_len(model.word_count(), dims.len())?;
    for (c, &d) in dims.iter().enumerate() {
        check_len(model.mean[0][c].len(), d)?;
    }
    check_len(x.len(), model.p_d_given_z.len())?;
    Ok(x.iter()
        .enumerate()
        .map(|(a, o)| {
            (0..model.topics())
                .map(|b| {
                    let mut t = model.pi[b].ln() + model.p_d_given_z[a][b].ln();
                    for (c, w) in o.words.iter().enumerate() {
                        for (d, &v) in w.iter().enumerate() {
                            t += log_normal(v, model.mean[b][c][d], model.var[b][c][d]);
                        }
                    }
                    t
                })
                .collect()
        })
        .collect())
}

fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

struct Posterior {
    gamma: Vec<Vec<f64>>,
    mass: Vec<f64>,
    log_likelihood: f64,
}

fn posterior(x: &[Observation], model: &LatentModel) -> Result<Posterior> {
    let t = log_joint(x, model)?;
    let k = model.topics();
    let mut gamma = Vec::with_capacity(x.len());
    let mut mass = vec![0.0; k];
    let mut ll = 0.0;
    for (a, row) in t.iter().enumerate() {
        let z = log_sum_exp(row);
        if !z.is_finite() {
            return Err(Error::NumericDegenerate(format!(
                "observation `{}` has zero probability under every topic",
                x[a].id
            )));
        }
        ll += z;
        let g: Vec<f64> = row.iter().map(|v| (v - z).exp()).collect();
        for (m, v) in mass.iter_mut().zip(&g) {
            *m += v;
        }
        gamma.push(g);
    }
    Ok(Posterior {
        gamma,
        mass,
        log_likelihood: ll,
    })
}

/// Responsibilities `γ_ab` and topic masses `N_b`.
pub fn e_step(x: &[Observation], model: &LatentModel) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let p = posterior(x, model)?;
    Ok((p.gamma, p.mass))
}

/// `L = Σ_a ln Σ_b π_b P(d_a|z_b) Π N(w_a; μ_b, σ²_b)`.
pub fn log_likelihood(x: &[Observation], model: &LatentModel) -> Result<f64> {
    Ok(posterior(x, model)?.log_likelihood)
}

fn pooled_variance(x: &[Observation], dims: &[usize], floor: f64) -> Vec<Vec<f64>> {
    let n = x.len() as f64;
    dims.iter()
        .enumerate()
        .map(|(c, &d)| {
            (0..d)
                .map(|j| {
                    let mean = x.iter().map(|o| o.words[c][j]).sum::<f64>() / n;
                    let var = x.iter().map(|o| (o.words[c][j] - mean).powi(2)).sum::<f64>() / n;
                    var.max(floor)
                })
                .collect()
        })
        .collect()
}

/// M-step updates. Topics whose mass falls below `1e-12` are re-seeded at
/// a random observation with the pooled variance; their indices are
/// returned alongside the model.
pub fn m_step<R: Rng + ?Sized>(
    x: &[Observation],
    gamma: &[Vec<f64>],
    mass: &[f64],
    variance_floor: f64,
    alpha: f64,
    rng: &mut R,
) -> Result<(LatentModel, Vec<usize>)> {
    let dims = check_observations(x)?;
    check_len(x.len(), gamma.len())?;
    let k = mass.len();
    for g in gamma {
        check_len(k, g.len())?;
    }
    let n = x.len() as f64;
    let mut pi = vec![0.0; k];
    let mut p = vec![vec![0.0; k]; x.len()];
    let mut mean = vec![Vec::new(); k];
    let mut var = vec![Vec::new(); k];
    let mut reseeded = Vec::new();
    for b in 0..k {
        let nb = mass[b];
        if nb < COLLAPSE_MASS {
            reseeded.push(b);
            continue;
        }
        pi[b] = nb / n;
        for a in 0..x.len() {
            p[a][b] = gamma[a][b] / nb;
        }
        mean[b] = dims
            .iter()
            .enumerate()
            .map(|(c, &d)| {
                (0..d)
                    .map(|j| x.iter().zip(gamma).map(|(o, g)| g[b] * o.words[c][j]).sum::<f64>() / nb)
                    .collect::<Vec<f64>>()
            })
            .collect();
        var[b] = dims
            .iter()
            .enumerate()
            .map(|(c, &d)| {
                (0..d)
                    .map(|j| {
                        let mu = mean[b][c][j];
                        let s = x
                            .iter()
                            .zip(gamma)
                            .map(|(o, g)| g[b] * (o.words[c][j] - mu).powi(2))
                            .sum::<f64>();
                        (s / nb).max(variance_floor)
                    })
                    .collect::<Vec<f64>>()
            })
            .collect();
    }
    if !reseeded.is_empty() {
        let pooled = pooled_variance(x, &dims, variance_floor);
        for &b in &reseeded {
            warn!("topic {b} collapsed; re-seeding");
            let a = rng.random_range(0..x.len());
            mean[b] = x[a].words.clone();
            var[b] = pooled.clone();
            pi[b] = 1.0 / n;
            for row in p.iter_mut() {
                row[b] = 1.0 / n;
            }
        }
        let total: f64 = pi.iter().sum();
        pi.iter_mut().for_each(|v| *v /= total);
    }
    Ok((LatentModel::new(pi, p, mean, var, alpha)?, reseeded))
}

/// Outcome of [`em_fit`].
#[derive(Debug, Clone)]
pub struct EmFit {
    pub model: LatentModel,
    /// Log-likelihood of each visited parameter set of the winning run.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Number of topic re-seeds across the winning run.
    pub reseeds: usize,
}

fn initial_model(x: &[Observation], config: &EmConfig, rng: &mut ChaCha8Rng) -> Result<LatentModel> {
    let k = config.topics;
    let n = x.len();
    let labels: Vec<usize> = if n >= k {
        let seeds: Vec<&Observation> = index::sample(rng, n, k).into_iter().map(|a| &x[a]).collect();
        x.iter()
            .map(|o| {
                let d2 = |s: &Observation| -> f64 {
                    o.words
                        .iter()
                        .zip(&s.words)
                        .flat_map(|(u, v)| u.iter().zip(v).map(|(a, b)| (a - b).powi(2)))
                        .sum()
                };
                (0..k).min_by(|&a, &b| d2(seeds[a]).total_cmp(&d2(seeds[b]))).unwrap()
            })
            .collect()
    } else {
        let mut l: Vec<usize> = (0..n).map(|a| a % k).collect();
        l.shuffle(rng);
        l
    };
    let gamma: Vec<Vec<f64>> = labels
        .iter()
        .map(|&l| (0..k).map(|b| if b == l { 1.0 } else { 0.0 }).collect())
        .collect();
    let mut mass = vec![0.0; k];
    for &l in &labels {
        mass[l] += 1.0;
    }
    let (mut model, _) = m_step(x, &gamma, &mass, config.variance_floor, config.alpha, rng)?;
    model.pi = vec![1.0 / k as f64; k];
    model.p_d_given_z = vec![vec![1.0 / n as f64; k]; n];
    Ok(model)
}

fn single_run(x: &[Observation], config: &EmConfig, seed: u64) -> Result<EmFit> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut model = initial_model(x, config, &mut rng)?;
    let mut trace: Vec<f64> = Vec::new();
    let mut reseeds = 0;
    let mut converged = false;
    let mut iterations = 0;
    loop {
        let post = posterior(x, &model)?;
        if let Some(&prev) = trace.last() {
            if (post.log_likelihood - prev).abs() < config.tolerance {
                converged = true;
            }
        }
        trace.push(post.log_likelihood);
        if converged || iterations == config.max_iterations {
            break;
        }
        let (next, r) = m_step(x, &post.gamma, &post.mass, config.variance_floor, config.alpha, &mut rng)?;
        reseeds += r.len();
        model = next;
        iterations += 1;
    }
    Ok(EmFit {
        model,
        trace,
        iterations,
        converged,
        reseeds,
    })
}

/// Runs EM `config.restarts` times from seeded random starts and keeps
/// the run with the highest final log-likelihood.
pub fn em_fit(x: &[Observation], config: &EmConfig) -> Result<EmFit> {
    config.validate()?;
    check_observations(x)?;
    if x.len() < config.topics {
        warn!("{} observations for {} topics", x.len(), config.topics);
    }
    let mut best: Option<EmFit> = None;
    for r in 0..config.restarts {
        let seed = config.seed ^ (r as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        let fit = single_run(x, config, seed)?;
        let better = match &best {
            None => true,
            Some(b) => fit.trace.last() > b.trace.last(),
        };
        if better {
            best = Some(fit);
        }
    }
    Ok(best.unwrap())
}

/// `D(w) = Σ_b π_b [Σ_c D_bc²]^{1/2}` with `D_bc` the per-axis geodesic
/// length around `μ_bc`. The input is the concatenation of the word vectors.
pub fn latent_distance(w: &[f64], model: &LatentModel) -> Result<f64> {
    check_len(model.dim(), w.len())?;
    let mut total = 0.0;
    for b in 0..model.topics() {
        let mut sq = 0.0;
        let mut off = 0;
        for (mu, var) in model.mean[b].iter().zip(&model.var[b]) {
            for ((&m, &v), &x) in mu.iter().zip(var).zip(&w[off..off + mu.len()]) {
                sq += axis_length(&model.xi, v.sqrt(), x - m).powi(2);
            }
            off += mu.len();
        }
        total += model.pi[b] * sq.sqrt();
    }
    Ok(total)
}
