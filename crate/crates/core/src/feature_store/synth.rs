use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use super::{Dataset, FeatureSchema, Item};
use crate::error::{Error, Result};

/// Parameters of a clustered synthetic dataset.
///
/// Every category gets one centre per word space, drawn from
/// `N(0, separation² I)`; its items are the centre plus `N(0, noise² I)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub categories: usize,
    pub per_category: usize,
    pub schema: FeatureSchema,
    pub separation: f64,
    pub noise: f64,
    pub seed: u64,
}

impl SyntheticSpec {
    pub fn describe(&self) -> String {
        let dims: Vec<String> = self.schema.dims().iter().map(usize::to_string).collect();
        format!(
            "synthetic categories={} per_category={} dims={} separation={} noise={} seed={}",
            self.categories,
            self.per_category,
            dims.join(","),
            self.separation,
            self.noise,
            self.seed
        )
    }
}

fn width(n: usize) -> usize {
    n.saturating_sub(1).max(1).to_string().len()
}

/// Draws the dataset described by `spec`. A pure function of `spec`.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    if spec.categories == 0 || spec.per_category == 0 {
        return Err(Error::InvalidArgument("category counts must be positive".into()));
    }
    if !(spec.separation >= 0.0 && spec.separation.is_finite()) {
        return Err(Error::InvalidArgument("separation must be >= 0".into()));
    }
    if !(spec.noise > 0.0 && spec.noise.is_finite()) {
        return Err(Error::InvalidArgument("noise must be > 0".into()));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let total = spec.schema.total_dim();
    let mut gauss = move || -> f64 { StandardNormal.sample(&mut rng) };

    let centres: Vec<Vec<f64>> = (0..spec.categories)
        .map(|_| (0..total).map(|_| spec.separation * gauss()).collect())
        .collect();

    let (cw, iw) = (width(spec.categories), width(spec.per_category));
    let mut items = Vec::with_capacity(spec.categories * spec.per_category);
    for (c, centre) in centres.iter().enumerate() {
        let category = format!("cat{c:0cw$}");
        for i in 0..spec.per_category {
            let features = centre.iter().map(|m| m + spec.noise * gauss()).collect();
            items.push(Item::from_flat(
                format!("c{c:0cw$}_{i:0iw$}"),
                category.clone(),
                features,
                &spec.schema,
            )?);
        }
    }
    Dataset::new(spec.schema.clone(), items)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(categories: usize, separation: f64, seed: u64) -> SyntheticSpec {
        SyntheticSpec {
            categories,
            per_category: 50,
            schema: FeatureSchema::uniform(2, 3).unwrap(),
            separation,
            noise: 1.0,
            seed,
        }
    }

    #[test]
    fn deterministic_under_seed() {
        let a = generate_synthetic(&spec(40, 1.0, 7)).unwrap();
        let b = generate_synthetic(&spec(40, 1.0, 7)).unwrap();
        assert_eq!(a.items(), b.items());
        let c = generate_synthetic(&spec(40, 1.0, 8)).unwrap();
        assert_ne!(a.items(), c.items());
    }

    #[test]
    fn category_sizes_are_exact() {
        let ds = generate_synthetic(&spec(7, 1.0, 1)).unwrap();
        assert_eq!(ds.len(), 350);
        let cats = ds.categories();
        assert_eq!(cats.len(), 7);
        for c in cats {
            assert_eq!(ds.category_members(c).len(), 50);
        }
    }

    #[test]
    fn ids_sort_in_dataset_order() {
        let ds = generate_synthetic(&spec(12, 1.0, 1)).unwrap();
        let ids: Vec<&str> = ds.items().iter().map(Item::id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
    }

    #[test]
    fn rejects_bad_parameters() {
        let mut s = spec(3, 1.0, 1);
        s.noise = 0.0;
        assert!(generate_synthetic(&s).is_err());
        let mut s = spec(3, -1.0, 1);
        s.noise = 1.0;
        assert!(generate_synthetic(&s).is_err());
    }
}
