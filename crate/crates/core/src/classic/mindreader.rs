use nalgebra::{DMatrix, DVector};

use super::{variance_floor, RANK_TOL};
use crate::error::{check_len, Error, Result};
use crate::feature_store::{Dataset, FeedbackSet};

/// Optimal query and unit-determinant metric for a weighted positive set.
#[derive(Debug, Clone, PartialEq)]
pub struct MindReaderModel {
    pub q: Vec<f64>,
    pub metric: DMatrix<f64>,
    /// Numerical rank of the weighted scatter matrix.
    pub rank: usize,
    pub pseudo_inverse_used: bool,
}

fn weighted_scatter(samples: &[&[f64]], weights: &[f64], q: &[f64]) -> DMatrix<f64> {
    let dim = q.len();
    let mut c = DMatrix::<f64>::zeros(dim, dim);
    let mut diff = DVector::<f64>::zeros(dim);
    for (s, &w) in samples.iter().zip(weights) {
        for d in 0..dim {
            diff[d] = s[d] - q[d];
        }
        c.ger(w, &diff, &diff, 1.0);
    }
    c
}

/// Moore–Penrose inverse via SVD, dropping singular values below
/// `RANK_TOL · σ_max`. Returns the inverse and the numerical rank.
pub fn pseudo_inverse(c: &DMatrix<f64>) -> (DMatrix<f64>, usize) {
    let svd = c.clone().svd(true, true);
    let (u, v_t) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let s_max = svd.singular_values.max();
    let mut inv_s = DVector::<f64>::zeros(svd.singular_values.len());
    let mut rank = 0;
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s_max > 0.0 && s > RANK_TOL * s_max {
            inv_s[i] = 1.0 / s;
            rank += 1;
        }
    }
    let pinv = v_t.transpose() * DMatrix::from_diagonal(&inv_s) * u.transpose();
    (pinv, rank)
}

/// Fits the optimal query `q = Σπw/Σπ` and metric `det(C)^{1/M} C⁻¹`.
///
/// When the scatter `C` is rank deficient the metric becomes `α·C⁺` with
/// `α` the geometric mean of the `R` retained singular values, so their
/// scaled product is one. With rank zero the metric falls back to the
/// identity.
pub fn fit_affine_metric(samples: &[&[f64]], weights: &[f64]) -> Result<MindReaderModel> {
    if samples.is_empty() {
        return Err(Error::InsufficientSamples { needed: 1, got: 0 });
    }
    check_len(samples.len(), weights.len())?;
    let total: f64 = weights.iter().sum();
    if !(total > 0.0) {
        return Err(Error::InvalidArgument("all relevance weights are zero".into()));
    }
    let dim = samples[0].len();
    for s in samples {
        check_len(dim, s.len())?;
    }
    let mut q = vec![0.0; dim];
    for (s, w) in samples.iter().zip(weights) {
        for (qd, v) in q.iter_mut().zip(s.iter()) {
            *qd += w * v;
        }
    }
    q.iter_mut().for_each(|v| *v /= total);

    let c = weighted_scatter(samples, weights, &q);
    let floor = variance_floor(c.trace());
    let svd = c.svd(true, true);
    let (u, v_t) = (svd.u.as_ref().unwrap(), svd.v_t.as_ref().unwrap());
    let s_max = svd.singular_values.max();
    let kept: Vec<usize> = (0..svd.singular_values.len())
        .filter(|&i| s_max > 0.0 && svd.singular_values[i] > RANK_TOL * s_max)
        .collect();
    let rank = kept.len();

    if rank == 0 {
        return Ok(MindReaderModel {
            q,
            metric: DMatrix::identity(dim, dim),
            rank,
            pseudo_inverse_used: true,
        });
    }
    let kept_s: Vec<f64> = kept.iter().map(|&i| svd.singular_values[i].max(floor)).collect();
    let log_geo = kept_s.iter().map(|s| s.ln()).sum::<f64>() / rank as f64;
    let mut scale = DVector::<f64>::zeros(svd.singular_values.len());
    for (&i, s) in kept.iter().zip(&kept_s) {
        scale[i] = (log_geo - s.ln()).exp();
    }
    let m = v_t.transpose() * DMatrix::from_diagonal(&scale) * u.transpose();
    let metric = (&m + m.transpose()) * 0.5;
    Ok(MindReaderModel {
        q,
        metric,
        rank,
        pseudo_inverse_used: rank < dim,
    })
}

/// MindReader on the concatenated feature vectors of the positives.
pub fn mindreader_fit(feedback: &FeedbackSet, dataset: &Dataset) -> Result<MindReaderModel> {
    let resolved = dataset.resolve(feedback)?;
    resolved.require_positives(1)?;
    let weights = resolved.normalized_weights()?;
    let samples: Vec<&[f64]> = resolved
        .positives
        .iter()
        .map(|(i, _)| dataset.item(*i).features())
        .collect();
    fit_affine_metric(&samples, &weights)
}

/// `(x − q)' M (x − q)`, clamped at zero against rounding.
pub fn quadratic_form(metric: &DMatrix<f64>, q: &[f64], x: &[f64]) -> f64 {
    let dim = q.len();
    let diff: Vec<f64> = x.iter().zip(q).map(|(a, b)| a - b).collect();
    let mut acc = 0.0;
    for j in 0..dim {
        let col = metric.column(j);
        let mut inner = 0.0;
        for i in 0..dim {
            inner += col[i] * diff[i];
        }
        acc += inner * diff[j];
    }
    acc.max(0.0)
}

pub fn mindreader_score(item: &[f64], model: &MindReaderModel) -> Result<f64> {
    check_len(model.q.len(), item.len())?;
    Ok(quadratic_form(&model.metric, &model.q, item))
}
