//! Items described by several per-word feature vectors, plus feedback sets.
//!
//! A [`Dataset`] is immutable once built. Feature vectors are stored flat,
//! one contiguous `Vec<f64>` per item, and sliced per word space through
//! the offsets held by the [`FeatureSchema`].

mod io;
mod synth;

use std::collections::{HashMap, HashSet};
use std::sync::Arc;

use crate::error::{check_len, Error, Result};

pub use io::{
    load_dataset, load_schema, read_feedback, read_header_schema, write_dataset, write_schema,
};
pub use synth::{generate_synthetic, SyntheticSpec};

/// Number of word spaces and the dimension of each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureSchema {
    dims: Vec<usize>,
    offsets: Arc<[usize]>,
}

impl FeatureSchema {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Schema {
                line: None,
                message: "schema needs at least one word space".into(),
            });
        }
        if let Some(c) = dims.iter().position(|&d| d == 0) {
            return Err(Error::Schema {
                line: None,
                message: format!("word space {} has dimension 0", c + 1),
            });
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &d in &dims {
            acc += d;
            offsets.push(acc);
        }
        Ok(Self {
            dims,
            offsets: offsets.into(),
        })
    }

    /// `W` identical spaces of dimension `dim`.
    pub fn uniform(word_count: usize, dim: usize) -> Result<Self> {
        Self::new(vec![dim; word_count])
    }

    pub fn word_count(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, word: usize) -> usize {
        self.dims[word]
    }

    pub fn total_dim(&self) -> usize {
        self.offsets[self.dims.len()]
    }
}

/// One database item: an opaque id, a category label and `W` feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Item {
    id: String,
    category: String,
    features: Vec<f64>,
    offsets: Arc<[usize]>,
}

impl Item {
    /// Builds an item, checking each vector against the schema and
    /// rejecting non-finite components.
    pub fn new(
        id: impl Into<String>,
        category: impl Into<String>,
        vectors: Vec<Vec<f64>>,
        schema: &FeatureSchema,
    ) -> Result<Self> {
        check_len(schema.word_count(), vectors.len())?;
        let mut features = Vec::with_capacity(schema.total_dim());
        for (c, v) in vectors.iter().enumerate() {
            check_len(schema.dim(c), v.len())?;
            features.extend_from_slice(v);
        }
        Self::from_flat(id, category, features, schema)
    }

    pub(crate) fn from_flat(
        id: impl Into<String>,
        category: impl Into<String>,
        features: Vec<f64>,
        schema: &FeatureSchema,
    ) -> Result<Self> {
        check_len(schema.total_dim(), features.len())?;
        if let Some(d) = features.iter().position(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite feature value at component {d}"
            )));
        }
        Ok(Self {
            id: id.into(),
            category: category.into(),
            features,
            offsets: schema.offsets.clone(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn category(&self) -> &str {
        &self.category
    }

    /// All word vectors concatenated.
    pub fn features(&self) -> &[f64] {
        &self.features
    }

    pub fn word_count(&self) -> usize {
        self.offsets.len() - 1
    }

    /// The feature vector of word space `c`.
    pub fn word(&self, c: usize) -> &[f64] {
        &self.features[self.offsets[c]..self.offsets[c + 1]]
    }

    pub fn words(&self) -> impl Iterator<Item = &[f64]> + '_ {
        (0..self.word_count()).map(move |c| self.word(c))
    }
}

/// An ordered, validated collection of items sharing one schema.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: FeatureSchema,
    items: Vec<Item>,
    index: HashMap<String, usize>,
}

impl Dataset {
    pub fn new(schema: FeatureSchema, items: Vec<Item>) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut index = HashMap::with_capacity(items.len());
        for (i, item) in items.iter().enumerate() {
            if item.offsets[..] != schema.offsets[..] {
                return Err(Error::Schema {
                    line: None,
                    message: format!("item `{}` does not follow the dataset schema", item.id),
                });
            }
            if index.insert(item.id.clone(), i).is_some() {
                return Err(Error::InvalidArgument(format!("duplicate item id `{}`", item.id)));
            }
        }
        Ok(Self {
            schema,
            items,
            index,
        })
    }

    pub fn schema(&self) -> &FeatureSchema {
        &self.schema
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn item(&self, index: usize) -> &Item {
        &self.items[index]
    }

    /// Number of items (`db`).
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn position(&self, id: &str) -> Result<usize> {
        self.index
            .get(id)
            .copied()
            .ok_or_else(|| Error::UnknownId(id.to_string()))
    }

    pub fn get(&self, id: &str) -> Result<&Item> {
        self.position(id).map(|i| &self.items[i])
    }

    /// Distinct category labels in order of first appearance.
    pub fn categories(&self) -> Vec<&str> {
        let mut seen = HashSet::new();
        self.items
            .iter()
            .map(Item::category)
            .filter(|c| seen.insert(*c))
            .collect()
    }

    /// Indices of every item labelled `category`, in dataset order.
    pub fn category_members(&self, category: &str) -> Vec<usize> {
        self.items
            .iter()
            .enumerate()
            .filter(|(_, it)| it.category == category)
            .map(|(i, _)| i)
            .collect()
    }

    /// Resolves a feedback set's ids to item indices.
    pub fn resolve(&self, feedback: &FeedbackSet) -> Result<ResolvedFeedback> {
        let positives = feedback
            .positives
            .iter()
            .map(|(id, w)| self.position(id).map(|i| (i, *w)))
            .collect::<Result<Vec<_>>>()?;
        let negatives = feedback
            .negatives
            .iter()
            .map(|id| self.position(id))
            .collect::<Result<Vec<_>>>()?;
        Ok(ResolvedFeedback {
            positives,
            negatives,
        })
    }

    pub fn check_query(&self, q: &QueryPoint) -> Result<()> {
        check_len(self.schema.word_count(), q.word_count())?;
        for c in 0..q.word_count() {
            check_len(self.schema.dim(c), q.word(c).len())?;
        }
        Ok(())
    }
}

/// Positive items with relevance weights `π ∈ [0, 1]`, and negative items.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeedbackSet {
    positives: Vec<(String, f64)>,
    negatives: Vec<String>,
}

impl FeedbackSet {
    pub fn new(positives: Vec<(String, f64)>, negatives: Vec<String>) -> Result<Self> {
        for (id, w) in &positives {
            if !(0.0..=1.0).contains(w) {
                return Err(Error::InvalidArgument(format!(
                    "relevance weight {w} of `{id}` is outside [0, 1]"
                )));
            }
        }
        let pos: HashSet<&str> = positives.iter().map(|(id, _)| id.as_str()).collect();
        if let Some(id) = negatives.iter().find(|id| pos.contains(id.as_str())) {
            return Err(Error::InvalidArgument(format!(
                "`{id}` is both a positive and a negative sample"
            )));
        }
        Ok(Self {
            positives,
            negatives,
        })
    }

    /// Positives only, all with weight 1.
    pub fn uniform<I, S>(ids: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self {
            positives: ids.into_iter().map(|id| (id.into(), 1.0)).collect(),
            negatives: Vec::new(),
        }
    }

    pub fn positives(&self) -> &[(String, f64)] {
        &self.positives
    }

    pub fn negatives(&self) -> &[String] {
        &self.negatives
    }

    pub fn is_empty(&self) -> bool {
        self.positives.is_empty() && self.negatives.is_empty()
    }
}

/// Feedback with ids replaced by dataset indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedFeedback {
    pub positives: Vec<(usize, f64)>,
    pub negatives: Vec<usize>,
}

impl ResolvedFeedback {
    pub(crate) fn require_positives(&self, needed: usize) -> Result<()> {
        if self.positives.len() < needed {
            Err(Error::InsufficientSamples {
                needed,
                got: self.positives.len(),
            })
        } else {
            Ok(())
        }
    }

    /// Positive weights, rescaled to sum to one.
    pub(crate) fn normalized_weights(&self) -> Result<Vec<f64>> {
        let total: f64 = self.positives.iter().map(|(_, w)| w).sum();
        if total <= 0.0 {
            return Err(Error::InvalidArgument("all relevance weights are zero".into()));
        }
        Ok(self.positives.iter().map(|(_, w)| w / total).collect())
    }
}

/// A query given as one vector per word space.
#[derive(Debug, Clone, PartialEq)]
pub struct QueryPoint {
    vectors: Vec<Vec<f64>>,
}

impl QueryPoint {
    pub fn new(vectors: Vec<Vec<f64>>) -> Self {
        Self { vectors }
    }

    pub fn zeros(schema: &FeatureSchema) -> Self {
        Self::new(schema.dims().iter().map(|&d| vec![0.0; d]).collect())
    }

    pub fn from_item(item: &Item) -> Self {
        Self::new(item.words().map(<[f64]>::to_vec).collect())
    }

    pub fn word_count(&self) -> usize {
        self.vectors.len()
    }

    pub fn word(&self, c: usize) -> &[f64] {
        &self.vectors[c]
    }

    pub fn vectors(&self) -> &[Vec<f64>] {
        &self.vectors
    }

    pub fn flat(&self) -> Vec<f64> {
        self.vectors.concat()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn schema() -> FeatureSchema {
        FeatureSchema::new(vec![2, 3]).unwrap()
    }

    #[test]
    fn schema_rejects_degenerate_shapes() {
        assert!(FeatureSchema::new(vec![]).is_err());
        assert!(FeatureSchema::new(vec![2, 0]).is_err());
        let s = schema();
        assert_eq!(s.word_count(), 2);
        assert_eq!(s.total_dim(), 5);
    }

    #[test]
    fn item_slices_words() {
        let it = Item::new("a", "x", vec![vec![1.0, 2.0], vec![3.0, 4.0, 5.0]], &schema()).unwrap();
        assert_eq!(it.word(0), &[1.0, 2.0]);
        assert_eq!(it.word(1), &[3.0, 4.0, 5.0]);
        assert_eq!(it.features().len(), 5);
    }

    #[test]
    fn item_rejects_bad_vectors() {
        let s = schema();
        assert!(matches!(
            Item::new("a", "x", vec![vec![1.0], vec![3.0, 4.0, 5.0]], &s),
            Err(Error::DimensionMismatch { expected: 2, found: 1 })
        ));
        assert!(Item::new("a", "x", vec![vec![1.0, f64::NAN], vec![3.0, 4.0, 5.0]], &s).is_err());
    }

    #[test]
    fn dataset_rejects_duplicates_and_empty() {
        let s = schema();
        let a = Item::new("a", "x", vec![vec![0.0; 2], vec![0.0; 3]], &s).unwrap();
        assert!(matches!(Dataset::new(s.clone(), vec![]), Err(Error::EmptyDataset)));
        assert!(Dataset::new(s, vec![a.clone(), a]).is_err());
    }

    #[test]
    fn feedback_validation() {
        assert!(FeedbackSet::new(vec![("a".into(), 1.5)], vec![]).is_err());
        assert!(FeedbackSet::new(vec![("a".into(), 1.0)], vec!["a".into()]).is_err());
        let fb = FeedbackSet::new(vec![("a".into(), 0.5)], vec!["b".into()]).unwrap();
        assert_eq!(fb.negatives(), &["b".to_string()]);
    }

    #[test]
    fn resolve_reports_unknown_ids() {
        let s = schema();
        let a = Item::new("a", "x", vec![vec![0.0; 2], vec![0.0; 3]], &s).unwrap();
        let ds = Dataset::new(s, vec![a]).unwrap();
        let err = ds.resolve(&FeedbackSet::uniform(["zz"])).unwrap_err();
        assert!(matches!(err, Error::UnknownId(id) if id == "zz"));
    }
}
