use crate::error::{Error, Result};
use crate::feature_store::{Dataset, FeedbackSet, QueryPoint};

/// Weights of the original query, the positive centroid and the negative
/// centroid in a Rocchio update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocchioCoefficients {
    pub alpha_q0: f64,
    pub beta_pos: f64,
    pub gamma_neg: f64,
}

impl Default for RocchioCoefficients {
    /// The classic SMART values.
    fn default() -> Self {
        Self {
            alpha_q0: 1.0,
            beta_pos: 0.75,
            gamma_neg: 0.15,
        }
    }
}

impl RocchioCoefficients {
    /// Positive centroid only; used to build query-space origins.
    pub const POSITIVES_ONLY: Self = Self {
        alpha_q0: 0.0,
        beta_pos: 1.0,
        gamma_neg: 0.0,
    };

    pub fn validate(&self) -> Result<()> {
        let all = [self.alpha_q0, self.beta_pos, self.gamma_neg];
        if all.iter().any(|c| !(c.is_finite() && *c >= 0.0)) {
            return Err(Error::InvalidArgument("Rocchio coefficients must be >= 0".into()));
        }
        if all.iter().all(|&c| c == 0.0) {
            return Err(Error::InvalidArgument("Rocchio coefficients are all zero".into()));
        }
        Ok(())
    }
}

fn centroid(dataset: &Dataset, indices: &[usize], word: usize, dim: usize) -> Vec<f64> {
    let mut acc = vec![0.0; dim];
    for &i in indices {
        for (a, v) in acc.iter_mut().zip(dataset.item(i).word(word)) {
            *a += v;
        }
    }
    let n = indices.len() as f64;
    acc.iter_mut().for_each(|a| *a /= n);
    acc
}

/// Rewrites the query per word space as
/// `alpha·q0 + beta·mean(positives) − gamma·mean(negatives)`.
///
/// A missing side contributes nothing; with no feedback at all the current
/// query `qt` is returned unchanged.
pub fn rocchio_update(
    q0: &QueryPoint,
    qt: &QueryPoint,
    feedback: &FeedbackSet,
    dataset: &Dataset,
    coeffs: &RocchioCoefficients,
) -> Result<QueryPoint> {
    coeffs.validate()?;
    dataset.check_query(q0)?;
    dataset.check_query(qt)?;
    let resolved = dataset.resolve(feedback)?;
    if feedback.is_empty() {
        return Ok(qt.clone());
    }
    let pos: Vec<usize> = resolved.positives.iter().map(|(i, _)| *i).collect();
    let neg = resolved.negatives;
    let schema = dataset.schema();

    let vectors = (0..schema.word_count())
        .map(|c| {
            let dim = schema.dim(c);
            let mut out: Vec<f64> = q0.word(c).iter().map(|v| coeffs.alpha_q0 * v).collect();
            if !pos.is_empty() {
                for (o, m) in out.iter_mut().zip(centroid(dataset, &pos, c, dim)) {
                    *o += coeffs.beta_pos * m;
                }
            }
            if !neg.is_empty() {
                for (o, m) in out.iter_mut().zip(centroid(dataset, &neg, c, dim)) {
                    *o -= coeffs.gamma_neg * m;
                }
            }
            out
        })
        .collect();
    Ok(QueryPoint::new(vectors))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_store::{FeatureSchema, Item};

    fn line(points: &[f64]) -> Dataset {
        let s = FeatureSchema::uniform(1, 1).unwrap();
        let items = points
            .iter()
            .enumerate()
            .map(|(i, &p)| Item::new(format!("p{i}"), "c", vec![vec![p]], &s).unwrap())
            .collect();
        Dataset::new(s, items).unwrap()
    }

    #[test]
    fn empty_feedback_is_stable() {
        let ds = line(&[1.0, 3.0]);
        let q0 = QueryPoint::new(vec![vec![0.0]]);
        let qt = QueryPoint::new(vec![vec![7.5]]);
        let out = rocchio_update(&q0, &qt, &FeedbackSet::default(), &ds, &Default::default()).unwrap();
        assert_eq!(out, qt);
    }

    #[test]
    fn positives_only_gives_the_mean() {
        let ds = line(&[1.0, 3.0]);
        let q = QueryPoint::new(vec![vec![0.0]]);
        let fb = FeedbackSet::uniform(["p0", "p1"]);
        let coeffs = RocchioCoefficients {
            alpha_q0: 0.0,
            beta_pos: 1.0,
            gamma_neg: 0.0,
        };
        let out = rocchio_update(&q, &q, &fb, &ds, &coeffs).unwrap();
        assert_eq!(out.word(0), &[2.0]);
    }

    #[test]
    fn smart_coefficients_in_two_dimensions() {
        let s = FeatureSchema::uniform(1, 2).unwrap();
        let items = vec![
            Item::new("a", "c", vec![vec![1.0, 2.0]], &s).unwrap(),
            Item::new("b", "c", vec![vec![3.0, -2.0]], &s).unwrap(),
            Item::new("n", "c", vec![vec![10.0, 4.0]], &s).unwrap(),
        ];
        let ds = Dataset::new(s, items).unwrap();
        let q0 = QueryPoint::new(vec![vec![0.5, 0.5]]);
        let fb = FeedbackSet::new(
            vec![("a".into(), 1.0), ("b".into(), 1.0)],
            vec!["n".into()],
        )
        .unwrap();
        let out = rocchio_update(&q0, &q0, &fb, &ds, &RocchioCoefficients::default()).unwrap();
        // scalar evaluation: 1·0.5 + 0.75·2 − 0.15·10 = 0.5 ; 1·0.5 + 0.75·0 − 0.15·4 = −0.1
        assert!((out.word(0)[0] - 0.5).abs() < 1e-12);
        assert!((out.word(0)[1] + 0.1).abs() < 1e-12);
    }

    #[test]
    fn unknown_id_is_lookup_error() {
        let ds = line(&[1.0]);
        let q = QueryPoint::new(vec![vec![0.0]]);
        let fb = FeedbackSet::uniform(["nope"]);
        assert!(matches!(
            rocchio_update(&q, &q, &fb, &ds, &Default::default()),
            Err(Error::UnknownId(_))
        ));
    }

    #[test]
    fn coefficients_must_not_all_vanish() {
        let c = RocchioCoefficients {
            alpha_q0: 0.0,
            beta_pos: 0.0,
            gamma_neg: 0.0,
        };
        assert!(c.validate().is_err());
    }
}
