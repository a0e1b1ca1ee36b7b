//! The query space: every item becomes a `W`-vector whose `c`-th
//! coordinate is its distance to the query in word space `c`.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{check_len, Error, Result};
use crate::feature_store::{Dataset, Item, QueryPoint};

/// Default offset inside `log(x + ε)`.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Distance used inside each word space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SpaceDistance {
    #[default]
    Euclidean,
    Manhattan,
}

impl SpaceDistance {
    pub fn eval(self, a: &[f64], b: &[f64]) -> f64 {
        let it = a.iter().zip(b).map(|(x, y)| x - y);
        match self {
            SpaceDistance::Euclidean => it.map(|d| d * d).sum::<f64>().sqrt(),
            SpaceDistance::Manhattan => it.map(f64::abs).sum(),
        }
    }
}

/// Rows of query-space coordinates, one per selected dataset item.
#[derive(Debug, Clone, PartialEq)]
pub struct QuerySpaceMatrix {
    coords: Vec<f64>,
    width: usize,
    items: Vec<usize>,
    query_used: QueryPoint,
    log_transformed: bool,
    epsilon: Option<f64>,
}

impl QuerySpaceMatrix {
    /// Wraps precomputed coordinate rows, e.g. for testing or for data
    /// already mapped elsewhere. Rows are numbered `0..n`.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).ok_or(Error::EmptyDataset)?;
        for r in &rows {
            check_len(width, r.len())?;
        }
        Ok(Self {
            items: (0..rows.len()).collect(),
            coords: rows.concat(),
            width,
            query_used: QueryPoint::new(Vec::new()),
            log_transformed: false,
            epsilon: None,
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// Number of word spaces `W`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.coords[r * self.width..(r + 1) * self.width]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.width)
    }

    /// Dataset index of each row.
    pub fn items(&self) -> &[usize] {
        &self.items
    }

    /// Row of a dataset index, if that item was included.
    pub fn row_of(&self, item: usize) -> Option<usize> {
        self.items.iter().position(|&i| i == item)
    }

    pub fn query_used(&self) -> &QueryPoint {
        &self.query_used
    }

    pub fn log_transformed(&self) -> bool {
        self.log_transformed
    }

    pub fn epsilon(&self) -> Option<f64> {
        self.epsilon
    }
}

/// Query-space coordinates of a single item.
pub fn query_space_row(item: &Item, q: &QueryPoint, metric: SpaceDistance) -> Vec<f64> {
    (0..q.word_count()).map(|c| metric.eval(item.word(c), q.word(c))).collect()
}

/// Maps every item of the dataset into the query space of `q`.
pub fn build_query_space(
    dataset: &Dataset,
    q: &QueryPoint,
    metric: SpaceDistance,
) -> Result<QuerySpaceMatrix> {
    let all: Vec<usize> = (0..dataset.len()).collect();
    build_query_space_for(dataset, &all, q, metric)
}

/// Like [`build_query_space`] for the listed item indices only.
pub fn build_query_space_for(
    dataset: &Dataset,
    indices: &[usize],
    q: &QueryPoint,
    metric: SpaceDistance,
) -> Result<QuerySpaceMatrix> {
    dataset.check_query(q)?;
    if let Some(&bad) = indices.iter().find(|&&i| i >= dataset.len()) {
        return Err(Error::InvalidArgument(format!("item index {bad} out of range")));
    }
    let width = q.word_count();
    let coords: Vec<f64> = indices
        .par_iter()
        .flat_map_iter(|&i| query_space_row(dataset.item(i), q, metric))
        .collect();
    Ok(QuerySpaceMatrix {
        coords,
        width,
        items: indices.to_vec(),
        query_used: q.clone(),
        log_transformed: false,
        epsilon: None,
    })
}

/// Replaces every coordinate `x` by `ln(x + ε)`.
pub fn log_transform(m: &QuerySpaceMatrix, epsilon: f64) -> Result<QuerySpaceMatrix> {
    if m.log_transformed {
        return Err(Error::AlreadyTransformed);
    }
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return Err(Error::InvalidArgument(format!("epsilon must be > 0, got {epsilon}")));
    }
    Ok(QuerySpaceMatrix {
        coords: m.coords.iter().map(|x| (x + epsilon).ln()).collect(),
        log_transformed: true,
        epsilon: Some(epsilon),
        ..m.clone()
    })
}

/// `[Σ w_d |u_d − v_d|^p]^{1/p}`.
pub fn minkowski_distance(u: &[f64], v: &[f64], weights: &[f64], p: f64) -> Result<f64> {
    check_len(u.len(), v.len())?;
    check_len(u.len(), weights.len())?;
    if !(p >= 1.0) {
        return Err(Error::InvalidArgument(format!("Minkowski exponent must be >= 1, got {p}")));
    }
    if weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::InvalidArgument("Minkowski weights must be >= 0".into()));
    }
    let s: f64 = u
        .iter()
        .zip(v)
        .zip(weights)
        .map(|((a, b), w)| w * (a - b).abs().powf(p))
        .sum();
    Ok(s.powf(1.0 / p))
}

/// Tab-separated dump: `id` followed by one column per word space.
pub fn write_query_space(
    path: impl AsRef<Path>,
    m: &QuerySpaceMatrix,
    dataset: &Dataset,
    comments: &[String],
) -> Result<()> {
    let path = path.as_ref();
    let io = |e| Error::io(path, e);
    let mut out = BufWriter::new(File::create(path).map_err(io)?);
    for c in comments {
        writeln!(out, "# {c}").map_err(io)?;
    }
    match m.epsilon {
        Some(eps) => writeln!(out, "# log-transformed, epsilon={eps}").map_err(io)?,
        None => writeln!(out, "# raw distances").map_err(io)?,
    }
    let header: Vec<String> = (1..=m.width).map(|c| format!("q{c}")).collect();
    writeln!(out, "id\t{}", header.join("\t")).map_err(io)?;
    for (r, &i) in m.items.iter().enumerate() {
        let vals: Vec<String> = m.row(r).iter().map(f64::to_string).collect();
        writeln!(out, "{}\t{}", dataset.item(i).id(), vals.join("\t")).map_err(io)?;
    }
    out.flush().map_err(io)
}
