//! Maps a dataset into the per-space distance coordinates around a query.

use rf_lab::feature_store::{generate_synthetic, FeatureSchema, QueryPoint, SyntheticSpec};
use rf_lab::query_space::{build_query_space, log_transform, minkowski_distance, SpaceDistance, DEFAULT_EPSILON};

fn main() -> rf_lab::Result<()> {
    let ds = generate_synthetic(&SyntheticSpec {
        categories: 4,
        per_category: 5,
        schema: FeatureSchema::uniform(3, 2)?,
        separation: 2.0,
        noise: 0.5,
        seed: 9,
    })?;
    let q = QueryPoint::from_item(ds.item(0));
    let m = build_query_space(&ds, &q, SpaceDistance::Euclidean)?;
    let logged = log_transform(&m, DEFAULT_EPSILON)?;
    for i in 0..6 {
        println!("{:>6} {:?} log {:?}", ds.item(i).id(), m.row(i), logged.row(i));
    }
    let origin = vec![0.0; m.width()];
    let d = minkowski_distance(m.row(7), &origin, &[1.0, 1.0, 1.0], 2.0)?;
    println!("L2 distance of item 7 from the query: {d:.4}");
    Ok(())
}
