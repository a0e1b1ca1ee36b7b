use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::feature_store::{Dataset, Item};

/// A fitted relevance model. Lower scores rank first.
pub trait Scorer: Send + Sync {
    fn score(&self, index: usize, item: &Item) -> f64;
}

impl<F> Scorer for F
where
    F: Fn(usize, &Item) -> f64 + Send + Sync,
{
    fn score(&self, index: usize, item: &Item) -> f64 {
        self(index, item)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedItem {
    pub index: usize,
    pub score: f64,
}

/// Top `top_q` items of the whole dataset, ascending by score, ties by id.
pub fn rank<S: Scorer + ?Sized>(dataset: &Dataset, scorer: &S, top_q: usize) -> Result<Vec<RankedItem>> {
    let all: Vec<usize> = (0..dataset.len()).collect();
    rank_subset(dataset, &all, scorer, top_q)
}

/// Like [`rank`], restricted to the item indices in `universe`.
pub fn rank_subset<S: Scorer + ?Sized>(
    dataset: &Dataset,
    universe: &[usize],
    scorer: &S,
    top_q: usize,
) -> Result<Vec<RankedItem>> {
    if top_q > universe.len() {
        return Err(Error::InvalidArgument(format!(
            "cannot return {top_q} results from {} items",
            universe.len()
        )));
    }
    let mut scored: Vec<RankedItem> = universe
        .iter()
        .map(|&index| RankedItem {
            index,
            score: scorer.score(index, dataset.item(index)),
        })
        .collect();
    let cmp = |a: &RankedItem, b: &RankedItem| -> Ordering {
        a.score
            .total_cmp(&b.score)
            .then_with(|| dataset.item(a.index).id().cmp(dataset.item(b.index).id()))
    };
    if top_q == 0 {
        return Ok(Vec::new());
    }
    if top_q < scored.len() {
        scored.select_nth_unstable_by(top_q - 1, cmp);
        scored.truncate(top_q);
    }
    scored.sort_by(cmp);
    Ok(scored)
}
