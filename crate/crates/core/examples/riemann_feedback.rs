//! Geodesic kernel, Gaussian fit on query-space positives and rescoring.

use rf_lab::feature_store::{generate_synthetic, FeatureSchema, QueryPoint, SyntheticSpec};
use rf_lab::query_space::{build_query_space, log_transform, SpaceDistance, DEFAULT_EPSILON};
use rf_lab::riemann::{riemann_fit, riemann_score, XiTable};

fn main() -> rf_lab::Result<()> {
    let xi = XiTable::shared(0.5)?;
    for (x, v) in xi.sample(0.0, 3.0, 7) {
        println!("xi({x:.1}) = {v:.6}");
    }

    let ds = generate_synthetic(&SyntheticSpec {
        categories: 10,
        per_category: 30,
        schema: FeatureSchema::uniform(4, 6)?,
        separation: 1.0,
        noise: 1.0,
        seed: 5,
    })?;
    let target = ds.category_members("cat4");
    let flat: Vec<Vec<f64>> = target.iter().take(12).map(|&i| ds.item(i).features().to_vec()).collect();
    let dims = ds.schema().dims();
    let mut centre = Vec::new();
    let mut off = 0;
    for &d in dims {
        centre.push((off..off + d).map(|k| flat.iter().map(|f| f[k]).sum::<f64>() / flat.len() as f64).collect());
        off += d;
    }
    let q = QueryPoint::new(centre);
    let m = log_transform(&build_query_space(&ds, &q, SpaceDistance::Euclidean)?, DEFAULT_EPSILON)?;
    let pos: Vec<&[f64]> = target.iter().take(12).map(|&i| m.row(i)).collect();
    let model = riemann_fit(&pos, 0.5)?;
    println!("sigma {:?}", model.sigma);
    let scores = riemann_score(&m, &model)?;
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    let hits = order[..20].iter().filter(|&&i| ds.item(i).category() == "cat4").count();
    println!("{hits}/20 of the top results are in the target category");
    Ok(())
}
