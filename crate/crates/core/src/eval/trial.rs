use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::methods::{Method, MethodConfig, ScoringContext};
use crate::error::{Error, Result};
use crate::feature_store::Dataset;

/// One cell of the evaluation grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Treatment {
    /// Expected random hits `q·m/db`.
    pub kbar: f64,
    pub r: usize,
    pub q: usize,
    pub repetitions: usize,
}

impl Treatment {
    pub fn new(kbar: f64, r: usize, q: usize, repetitions: usize) -> Result<Self> {
        if !(kbar > 0.0 && kbar.is_finite()) {
            return Err(Error::InvalidArgument(format!("kbar must be > 0, got {kbar}")));
        }
        if r == 0 || q == 0 || repetitions == 0 {
            return Err(Error::InvalidArgument("r, q and repetitions must be >= 1".into()));
        }
        Ok(Self {
            kbar,
            r,
            q,
            repetitions,
        })
    }

    /// Universe size for a target set of `m` items, `round(q·m/kbar)`.
    pub fn db(&self, m: usize) -> usize {
        ((self.q * m) as f64 / self.kbar).round() as usize
    }

    pub fn check(&self, m: usize) -> Result<()> {
        if self.r > m || self.q > m {
            return Err(Error::InvalidArgument(format!(
                "need r <= m and q <= m, got r={} q={} m={m}",
                self.r, self.q
            )));
        }
        if self.db(m) < m {
            return Err(Error::InvalidArgument(format!(
                "kbar={} gives a universe of {} items, smaller than the target set of {m}",
                self.kbar,
                self.db(m)
            )));
        }
        Ok(())
    }
}

/// The target category plus `db − m` items drawn uniformly from the other
/// categories. Indices are returned in dataset order.
pub fn build_trial_universe(
    dataset: &Dataset,
    target_category: &str,
    db: usize,
    seed: u64,
) -> Result<Vec<usize>> {
    let target = dataset.category_members(target_category);
    if target.is_empty() {
        return Err(Error::InvalidArgument(format!("no items in category `{target_category}`")));
    }
    if db < target.len() {
        return Err(Error::InvalidArgument(format!(
            "universe of {db} cannot hold the {} target items",
            target.len()
        )));
    }
    if db > dataset.len() {
        return Err(Error::InvalidArgument(format!(
            "universe of {db} items requested from a dataset of {}",
            dataset.len()
        )));
    }
    let others: Vec<usize> = (0..dataset.len())
        .filter(|&i| dataset.item(i).category() != target_category)
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut universe = target;
    universe.extend(index::sample(&mut rng, others.len(), db - universe.len()).into_iter().map(|k| others[k]));
    universe.sort_unstable();
    Ok(universe)
}

/// `r` distinct members of the target set, in sampled order.
pub fn sample_feedback(target: &[usize], r: usize, seed: u64) -> Result<Vec<usize>> {
    if r > target.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot draw {r} feedback items from {} targets",
            target.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked: Vec<usize> = target.to_vec();
    picked.shuffle(&mut rng);
    picked.truncate(r);
    Ok(picked)
}

/// Everything needed to evaluate one method in one repetition.
#[derive(Debug, Clone)]
pub struct TrialSetup<'a> {
    pub dataset: &'a Dataset,
    pub universe: &'a [usize],
    pub target: &'a [usize],
    pub feedback: &'a [usize],
    pub q: usize,
    pub exclude_feedback: bool,
}

/// Fits `method` on the feedback, ranks the universe and counts the
/// target items among the top `q`.
pub fn evaluate(setup: &TrialSetup, method: Method, config: &MethodConfig, seed: u64) -> Result<usize> {
    let ds = setup.dataset;
    let ranked_pool: Vec<usize> = if setup.exclude_feedback {
        let mut fb = vec![false; ds.len()];
        setup.feedback.iter().for_each(|&i| fb[i] = true);
        setup.universe.iter().copied().filter(|&i| !fb[i]).collect()
    } else {
        setup.universe.to_vec()
    };
    if setup.q > ranked_pool.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot return {} results from {} items",
            setup.q,
            ranked_pool.len()
        )));
    }
    let ctx = ScoringContext {
        dataset: ds,
        universe: &ranked_pool,
        feedback: setup.feedback,
        weights: None,
        target: Some(setup.target),
        seed,
        config,
    };
    let scores = method.score_universe(&ctx)?;
    let mut order: Vec<usize> = (0..ranked_pool.len()).collect();
    let cmp = |&a: &usize, &b: &usize| {
        scores[a]
            .total_cmp(&scores[b])
            .then_with(|| ds.item(ranked_pool[a]).id().cmp(ds.item(ranked_pool[b]).id()))
    };
    if setup.q < order.len() {
        order.select_nth_unstable_by(setup.q - 1, cmp);
        order.truncate(setup.q);
    }
    let mut is_target = vec![false; ds.len()];
    setup.target.iter().for_each(|&i| is_target[i] = true);
    Ok(order.iter().filter(|&&p| is_target[ranked_pool[p]]).count())
}

/// Samples the feedback set from `target` with `seed`, then evaluates.
#[allow(clippy::too_many_arguments)]
pub fn run_trial(
    dataset: &Dataset,
    universe: &[usize],
    target: &[usize],
    method: Method,
    r: usize,
    q: usize,
    seed: u64,
    config: &MethodConfig,
    exclude_feedback: bool,
) -> Result<usize> {
    let feedback = sample_feedback(target, r, seed)?;
    let setup = TrialSetup {
        dataset,
        universe,
        target,
        feedback: &feedback,
        q,
        exclude_feedback,
    };
    evaluate(&setup, method, config, seed)
}
