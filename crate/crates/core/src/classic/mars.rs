use super::variance_floor;
use crate::error::{check_len, Error, Result};
use crate::feature_store::{Dataset, FeedbackSet};

/// Per-axis variances of the positive samples.
#[derive(Debug, Clone, PartialEq)]
pub struct MarsModel {
    pub sigma: Vec<f64>,
    pub floor: f64,
}

/// Fits MARS on the concatenated feature vectors of the positives.
/// Weights are not used; the variance is the population (1/N) variance.
pub fn mars_fit(feedback: &FeedbackSet, dataset: &Dataset) -> Result<MarsModel> {
    let resolved = dataset.resolve(feedback)?;
    let rows: Vec<&[f64]> = resolved
        .positives
        .iter()
        .map(|(i, _)| dataset.item(*i).features())
        .collect();
    mars_fit_rows(&rows)
}

/// MARS on arbitrary sample rows, e.g. query-space coordinates.
pub fn mars_fit_rows(rows: &[&[f64]]) -> Result<MarsModel> {
    if rows.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: rows.len(),
        });
    }
    let dim = rows[0].len();
    for r in rows {
        check_len(dim, r.len())?;
    }
    let n = rows.len() as f64;
    let mut mean = vec![0.0; dim];
    for r in rows {
        for (m, v) in mean.iter_mut().zip(r.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut sigma = vec![0.0; dim];
    for r in rows {
        for ((s, v), m) in sigma.iter_mut().zip(r.iter()).zip(&mean) {
            *s += (v - m) * (v - m);
        }
    }
    sigma.iter_mut().for_each(|s| *s /= n);

    let floor = variance_floor(sigma.iter().sum());
    sigma.iter_mut().for_each(|s| *s = s.max(floor));
    Ok(MarsModel { sigma, floor })
}

/// Squared MARS distance `(∏σ)^{1/M} · Σ (w_d − q_d)² / σ_d`.
pub fn mars_score(item: &[f64], q: &[f64], model: &MarsModel) -> Result<f64> {
    check_len(model.sigma.len(), item.len())?;
    check_len(model.sigma.len(), q.len())?;
    let m = model.sigma.len() as f64;
    let log_geo: f64 = model.sigma.iter().map(|s| s.ln()).sum::<f64>() / m;
    let sum: f64 = item
        .iter()
        .zip(q)
        .zip(&model.sigma)
        .map(|((w, q), s)| (w - q) * (w - q) / s)
        .sum();
    Ok(log_geo.exp() * sum)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classic::VARIANCE_FLOOR_REL;
    use proptest::prelude::*;

    #[test]
    fn constant_axis_hits_the_floor() {
        let m = mars_fit_rows(&[&[0.0, 0.0], &[2.0, 0.0]]).unwrap();
        assert_eq!(m.sigma[0], 1.0);
        assert_eq!(m.sigma[1], m.floor);
        assert_eq!(m.floor, VARIANCE_FLOOR_REL * 1.0);
    }

    #[test]
    fn identical_positives_floor_everything() {
        let m = mars_fit_rows(&[&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]]).unwrap();
        assert!(m.sigma.iter().all(|&s| s == m.floor));
    }

    #[test]
    fn needs_two_positives() {
        assert!(matches!(
            mars_fit_rows(&[&[1.0]]),
            Err(Error::InsufficientSamples { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn matches_two_pass_variance() {
        let rows = [
            [0.3, -1.2, 4.0],
            [1.7, 0.4, 3.1],
            [-0.6, 2.2, 5.5],
            [2.9, -0.8, 4.4],
            [0.1, 1.0, 2.0],
        ];
        let refs: Vec<&[f64]> = rows.iter().map(|r| &r[..]).collect();
        let m = mars_fit_rows(&refs).unwrap();
        for d in 0..3 {
            let col: Vec<f64> = rows.iter().map(|r| r[d]).collect();
            let mean = col.iter().sum::<f64>() / 5.0;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 5.0;
            assert!((m.sigma[d] - var).abs() < 1e-12);
        }
    }

    #[test]
    fn score_examples() {
        let unit = MarsModel { sigma: vec![1.0, 1.0], floor: 1e-9 };
        assert_eq!(mars_score(&[1.0, 1.0], &[0.0, 0.0], &unit).unwrap(), 2.0);
        assert_eq!(mars_score(&[3.0, 4.0], &[3.0, 4.0], &unit).unwrap(), 0.0);
        let m = MarsModel { sigma: vec![1.0, 4.0], floor: 1e-9 };
        // (1·4)^{1/2} · (1/1 + 1/4) = 2.5
        let d = mars_score(&[1.0, 1.0], &[0.0, 0.0], &m).unwrap();
        assert!((d - 2.5).abs() < 1e-12);
        assert!(mars_score(&[1.0], &[0.0, 0.0], &m).is_err());
    }

    proptest! {
        #[test]
        fn ranking_invariant_under_common_scaling(
            sigma in prop::collection::vec(0.1f64..10.0, 3),
            pts in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 2..20),
            scale in 0.01f64..100.0,
        ) {
            let a = MarsModel { sigma: sigma.clone(), floor: 1e-9 };
            let b = MarsModel { sigma: sigma.iter().map(|s| s * scale).collect(), floor: 1e-9 };
            let q = [0.0; 3];
            let order = |m: &MarsModel| {
                let s: Vec<f64> = pts.iter().map(|p| mars_score(p, &q, m).unwrap()).collect();
                let mut idx: Vec<usize> = (0..pts.len()).collect();
                idx.sort_by(|&i, &j| s[i].total_cmp(&s[j]).then(i.cmp(&j)));
                (idx, s)
            };
            let (ia, sa) = order(&a);
            let (ib, sb) = order(&b);
            // exact ties can flip only through rounding; compare up to relative noise
            for k in 0..pts.len() {
                let (x, y) = (ia[k], ib[k]);
                prop_assert!(x == y || (sa[x] - sa[y]).abs() <= 1e-9 * sa[x].abs().max(1.0)
                    && (sb[x] - sb[y]).abs() <= 1e-9 * sb[x].abs().max(1.0));
            }
        }
    }
}
