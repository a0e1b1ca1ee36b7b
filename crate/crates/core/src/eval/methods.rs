use std::fmt;
use std::str::FromStr;

use crate::classic::{
    mars_fit, mars_fit_rows, mars_score, mindreader_fit, mindreader_score, rocchio_update,
    rui_huang_fit, rui_huang_score, RocchioCoefficients,
};
use crate::error::{Error, Result};
use crate::feature_store::{Dataset, FeedbackSet, QueryPoint};
use crate::latent::{em_fit, latent_distance, EmConfig, Observation};
use crate::query_space::{build_query_space_for, log_transform, QuerySpaceMatrix, SpaceDistance};
use crate::riemann::{riemann_fit, DEFAULT_ALPHA};

/// A relevance-feedback scheme that can be run inside a trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Rocchio,
    Mars,
    MindReader,
    RuiHuang,
    MarsQ,
    Riemann,
    Latent,
    /// Uniformly random scores; the chance baseline.
    Random,
    /// Ranks the target set first. Needs the target.
    Oracle,
    /// Ranks the target set last. Needs the target.
    AntiOracle,
}

impl Method {
    pub const ALL: [Method; 10] = [
        Method::Rocchio,
        Method::Mars,
        Method::MindReader,
        Method::RuiHuang,
        Method::MarsQ,
        Method::Riemann,
        Method::Latent,
        Method::Random,
        Method::Oracle,
        Method::AntiOracle,
    ];

    /// Methods compared by default in a benchmark.
    pub const DEFAULT_SET: [Method; 6] = [
        Method::Rocchio,
        Method::Mars,
        Method::RuiHuang,
        Method::MarsQ,
        Method::Riemann,
        Method::Latent,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Rocchio => "rocchio",
            Method::Mars => "mars",
            Method::MindReader => "mindreader",
            Method::RuiHuang => "rui-huang",
            Method::MarsQ => "mars-q",
            Method::Riemann => "riemann",
            Method::Latent => "latent",
            Method::Random => "random",
            Method::Oracle => "oracle",
            Method::AntiOracle => "antioracle",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        let lower = name.trim().to_ascii_lowercase();
        Method::ALL
            .iter()
            .copied()
            .find(|m| m.name() == lower)
            .ok_or_else(|| {
                let valid: Vec<&str> = Method::ALL.iter().map(|m| m.name()).collect();
                Error::InvalidArgument(format!(
                    "unknown method `{name}`; valid methods: {}",
                    valid.join(", ")
                ))
            })
    }

    /// Parses a comma-separated list.
    pub fn parse_list(list: &str) -> Result<Vec<Self>> {
        let methods: Vec<Self> = list
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(Method::from_name)
            .collect::<Result<_>>()?;
        if methods.is_empty() {
            return Err(Error::InvalidArgument("empty method list".into()));
        }
        Ok(methods)
    }

    /// Whether the method scores items in the query space.
    pub fn uses_query_space(self) -> bool {
        matches!(self, Method::MarsQ | Method::Riemann | Method::Latent)
    }

    /// Whether the method needs the target set (test doubles only).
    pub fn needs_target(self) -> bool {
        matches!(self, Method::Oracle | Method::AntiOracle)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::from_name(s)
    }
}

/// Tunables shared by all methods.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodConfig {
    pub alpha: f64,
    pub topics: usize,
    pub epsilon: f64,
    /// Log-transform the query space for the Riemann and latent methods.
    pub log_query_space: bool,
    pub space_distance: SpaceDistance,
    pub em_iterations: usize,
    pub em_restarts: usize,
}

impl Default for MethodConfig {
    fn default() -> Self {
        Self {
            alpha: DEFAULT_ALPHA,
            topics: 3,
            epsilon: crate::query_space::DEFAULT_EPSILON,
            log_query_space: true,
            space_distance: SpaceDistance::Euclidean,
            em_iterations: 100,
            em_restarts: 3,
        }
    }
}

impl MethodConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha must lie in (0, 1), got {}",
                self.alpha
            )));
        }
        if self.topics == 0 {
            return Err(Error::InvalidArgument("need at least one topic".into()));
        }
        if !(self.epsilon > 0.0) {
            return Err(Error::InvalidArgument("epsilon must be > 0".into()));
        }
        Ok(())
    }

    pub fn describe(&self) -> String {
        format!(
            "alpha={} topics={} epsilon={} log_query_space={} space_distance={:?} em_iterations={} em_restarts={}",
            self.alpha,
            self.topics,
            self.epsilon,
            self.log_query_space,
            self.space_distance,
            self.em_iterations,
            self.em_restarts
        )
    }
}

/// What a method sees when it is fitted and asked to score.
#[derive(Debug, Clone, Copy)]
pub struct ScoringContext<'a> {
    pub dataset: &'a Dataset,
    /// Item indices to score.
    pub universe: &'a [usize],
    /// Positive feedback item indices.
    pub feedback: &'a [usize],
    /// Relevance weight per feedback item; all one when absent.
    pub weights: Option<&'a [f64]>,
    /// Target set, for the oracle test doubles.
    pub target: Option<&'a [usize]>,
    pub seed: u64,
    pub config: &'a MethodConfig,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Deterministic child seed from a parent seed and a path of indices.
pub fn derive_seed(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(splitmix(seed), |acc, &p| splitmix(acc ^ splitmix(p)))
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn feedback_set(ctx: &ScoringContext) -> Result<FeedbackSet> {
    let ids = ctx.feedback.iter().map(|&i| ctx.dataset.item(i).id().to_owned());
    match ctx.weights {
        None => Ok(FeedbackSet::uniform(ids)),
        Some(w) => {
            crate::error::check_len(ctx.feedback.len(), w.len())?;
            FeedbackSet::new(ids.zip(w.iter().copied()).collect(), Vec::new())
        }
    }
}

fn positive_centroid(ctx: &ScoringContext, fb: &FeedbackSet) -> Result<QueryPoint> {
    let zero = QueryPoint::zeros(ctx.dataset.schema());
    rocchio_update(&zero, &zero, fb, ctx.dataset, &RocchioCoefficients::POSITIVES_ONLY)
}

fn query_space(
    ctx: &ScoringContext,
    q: &QueryPoint,
    indices: &[usize],
    log: bool,
) -> Result<QuerySpaceMatrix> {
    let m = build_query_space_for(ctx.dataset, indices, q, ctx.config.space_distance)?;
    if log {
        log_transform(&m, ctx.config.epsilon)
    } else {
        Ok(m)
    }
}

fn unit_hash(seed: u64, index: usize) -> f64 {
    (splitmix(seed ^ splitmix(index as u64)) >> 11) as f64 / (1u64 << 53) as f64
}

impl Method {
    /// Fits the method on the context's feedback and returns one score
    /// per universe item, lower meaning more relevant.
    pub fn score_universe(self, ctx: &ScoringContext) -> Result<Vec<f64>> {
        let ds = ctx.dataset;
        let uni = ctx.universe;
        let fb = feedback_set(ctx)?;
        let target_flags = |target: &[usize]| {
            let mut flag = vec![false; ds.len()];
            target.iter().for_each(|&i| flag[i] = true);
            flag
        };
        match self {
            Method::Random => Ok(uni.iter().map(|&i| unit_hash(ctx.seed, i)).collect()),
            Method::Oracle | Method::AntiOracle => {
                let target = ctx.target.ok_or_else(|| {
                    Error::InvalidArgument(format!("method `{self}` needs a known target set"))
                })?;
                let flag = target_flags(target);
                let inside = if self == Method::Oracle { 0.0 } else { 1.0 };
                Ok(uni.iter().map(|&i| if flag[i] { inside } else { 1.0 - inside }).collect())
            }
            Method::Rocchio => {
                let q = positive_centroid(ctx, &fb)?.flat();
                Ok(uni.iter().map(|&i| squared_distance(ds.item(i).features(), &q)).collect())
            }
            Method::Mars => {
                let q = positive_centroid(ctx, &fb)?.flat();
                let model = mars_fit(&fb, ds)?;
                uni.iter().map(|&i| mars_score(ds.item(i).features(), &q, &model)).collect()
            }
            Method::MindReader => {
                let model = mindreader_fit(&fb, ds)?;
                uni.iter().map(|&i| mindreader_score(ds.item(i).features(), &model)).collect()
            }
            Method::RuiHuang => {
                let model = rui_huang_fit(&fb, ds)?;
                uni.iter().map(|&i| rui_huang_score(ds.item(i), &model)).collect()
            }
            Method::MarsQ | Method::Riemann | Method::Latent => {
                let q = positive_centroid(ctx, &fb)?;
                let log = self != Method::MarsQ && ctx.config.log_query_space;
                let pos = query_space(ctx, &q, ctx.feedback, log)?;
                let rows = query_space(ctx, &q, uni, log)?;
                let pos_rows: Vec<&[f64]> = pos.rows().collect();
                match self {
                    Method::MarsQ => {
                        let model = mars_fit_rows(&pos_rows)?;
                        let origin = vec![0.0; rows.width()];
                        rows.rows().map(|r| mars_score(r, &origin, &model)).collect()
                    }
                    Method::Riemann => {
                        let model = riemann_fit(&pos_rows, ctx.config.alpha)?;
                        rows.rows().map(|r| model.score_row(r)).collect()
                    }
                    _ => {
                        let obs: Vec<Observation> = ctx
                            .feedback
                            .iter()
                            .zip(&pos_rows)
                            .map(|(&i, r)| Observation::from_row(ds.item(i).id(), r))
                            .collect();
                        let em = EmConfig {
                            topics: ctx.config.topics,
                            max_iterations: ctx.config.em_iterations,
                            restarts: ctx.config.em_restarts,
                            seed: ctx.seed,
                            alpha: ctx.config.alpha,
                            ..Default::default()
                        };
                        let model = em_fit(&obs, &em)?.model;
                        rows.rows().map(|r| latent_distance(r, &model)).collect()
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::feature_store::{generate_synthetic, FeatureSchema, SyntheticSpec};

    fn data() -> Dataset {
        generate_synthetic(&SyntheticSpec {
            categories: 4,
            per_category: 12,
            schema: FeatureSchema::uniform(2, 3).unwrap(),
            separation: 3.0,
            noise: 1.0,
            seed: 9,
        })
        .unwrap()
    }

    #[test]
    fn names_round_trip() {
        for m in Method::ALL {
            assert_eq!(Method::from_name(m.name()).unwrap(), m);
        }
        let err = Method::from_name("bogus").unwrap_err().to_string();
        assert!(err.contains("rui-huang") && err.contains("antioracle"));
        assert_eq!(Method::parse_list("mars, riemann").unwrap(), vec![Method::Mars, Method::Riemann]);
        assert!(Method::parse_list(" , ").is_err());
    }

    #[test]
    fn every_method_scores_the_universe() {
        let ds = data();
        let uni: Vec<usize> = (0..ds.len()).collect();
        let target = ds.category_members("cat0");
        let cfg = MethodConfig::default();
        let ctx = ScoringContext {
            dataset: &ds,
            universe: &uni,
            feedback: &target[..6],
            weights: None,
            target: Some(&target),
            seed: 3,
            config: &cfg,
        };
        for m in Method::ALL {
            let s = m.score_universe(&ctx).unwrap();
            assert_eq!(s.len(), uni.len(), "{m}");
            assert!(s.iter().all(|v| v.is_finite()), "{m}");
        }
        let o = Method::Oracle.score_universe(&ctx).unwrap();
        assert!(target.iter().all(|&i| o[i] == 0.0));
        let no_target = ScoringContext { target: None, ..ctx };
        assert!(Method::Oracle.score_universe(&no_target).is_err());
    }

    #[test]
    fn random_scores_depend_on_seed() {
        assert_ne!(unit_hash(1, 5), unit_hash(2, 5));
        assert_eq!(unit_hash(1, 5), unit_hash(1, 5));
        assert!((0.0..1.0).contains(&unit_hash(7, 0)));
        assert_ne!(derive_seed(1, &[0, 1]), derive_seed(1, &[1, 0]));
    }
}
