use nalgebra::DMatrix;

use super::mindreader::{fit_affine_metric, quadratic_form};
use super::variance_floor;
use crate::error::{Error, Result};
use crate::feature_store::{Dataset, FeedbackSet, Item};

/// Per-space MindReader metrics combined by a weighted sum of distances.
#[derive(Debug, Clone, PartialEq)]
pub struct RuiHuangModel {
    pub queries: Vec<Vec<f64>>,
    pub metrics: Vec<DMatrix<f64>>,
    pub weights: Vec<f64>,
    /// Spaces whose spread `a^c` hit the floor.
    pub degenerate: Vec<bool>,
    pub ranks: Vec<usize>,
}

/// Optimal space weights `w_c = Σ_j √a^j / √a^c`, so that `Σ 1/w_c = 1`.
/// Non-positive spreads are floored relative to their sum; the returned
/// flags mark the floored entries.
pub fn rui_huang_weights(a: &[f64]) -> Result<(Vec<f64>, Vec<bool>)> {
    if a.is_empty() {
        return Err(Error::InvalidArgument("no feature spaces".into()));
    }
    if a.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::InvalidArgument("spreads must be finite and >= 0".into()));
    }
    let floor = variance_floor(a.iter().sum());
    let degenerate: Vec<bool> = a.iter().map(|&v| v < floor).collect();
    let roots: Vec<f64> = a.iter().map(|&v| v.max(floor).sqrt()).collect();
    let total: f64 = roots.iter().sum();
    Ok((roots.iter().map(|r| total / r).collect(), degenerate))
}

/// Fits one metric per word space on the positives, then the space weights.
pub fn rui_huang_fit(feedback: &FeedbackSet, dataset: &Dataset) -> Result<RuiHuangModel> {
    let resolved = dataset.resolve(feedback)?;
    resolved.require_positives(1)?;
    let pi = resolved.normalized_weights()?;
    let items: Vec<&Item> = resolved.positives.iter().map(|(i, _)| dataset.item(*i)).collect();

    let w_count = dataset.schema().word_count();
    let mut queries = Vec::with_capacity(w_count);
    let mut metrics = Vec::with_capacity(w_count);
    let mut ranks = Vec::with_capacity(w_count);
    let mut spread = Vec::with_capacity(w_count);
    for c in 0..w_count {
        let samples: Vec<&[f64]> = items.iter().map(|it| it.word(c)).collect();
        let fit = fit_affine_metric(&samples, &pi)?;
        let a: f64 = samples
            .iter()
            .zip(&pi)
            .map(|(s, p)| p * quadratic_form(&fit.metric, &fit.q, s))
            .sum();
        spread.push(a);
        ranks.push(fit.rank);
        queries.push(fit.q);
        metrics.push(fit.metric);
    }
    let (weights, degenerate) = rui_huang_weights(&spread)?;
    Ok(RuiHuangModel {
        queries,
        metrics,
        weights,
        degenerate,
        ranks,
    })
}

/// Per-space quadratic forms `g_c` of an item.
pub fn rui_huang_components(item: &Item, model: &RuiHuangModel) -> Result<Vec<f64>> {
    if item.word_count() != model.queries.len() {
        return Err(Error::DimensionMismatch {
            expected: model.queries.len(),
            found: item.word_count(),
        });
    }
    (0..model.queries.len())
        .map(|c| {
            let q = &model.queries[c];
            let x = item.word(c);
            if x.len() != q.len() {
                return Err(Error::DimensionMismatch {
                    expected: q.len(),
                    found: x.len(),
                });
            }
            Ok(quadratic_form(&model.metrics[c], q, x))
        })
        .collect()
}

/// `Σ_c w_c g_c`.
pub fn rui_huang_score(item: &Item, model: &RuiHuangModel) -> Result<f64> {
    let g = rui_huang_components(item, model)?;
    Ok(g.iter().zip(&model.weights).map(|(g, w)| g * w).sum())
}
