//! Rocchio, MARS, MindReader and Rui & Huang fitted on the same positives.

use rf_lab::classic::{
    mars_fit, mars_score, mindreader_fit, mindreader_score, rank, rocchio_update, rui_huang_fit,
    rui_huang_score, RocchioCoefficients,
};
use rf_lab::feature_store::{generate_synthetic, FeatureSchema, FeedbackSet, Item, QueryPoint, SyntheticSpec};

fn main() -> rf_lab::Result<()> {
    let ds = generate_synthetic(&SyntheticSpec {
        categories: 8,
        per_category: 25,
        schema: FeatureSchema::uniform(3, 4)?,
        separation: 1.5,
        noise: 1.0,
        seed: 3,
    })?;
    let target = ds.category_members("cat2");
    let fb = FeedbackSet::uniform(target.iter().take(8).map(|&i| ds.item(i).id().to_string()));

    let zero = QueryPoint::zeros(ds.schema());
    let q = rocchio_update(&zero, &zero, &fb, &ds, &RocchioCoefficients::POSITIVES_ONLY)?.flat();
    let mars = mars_fit(&fb, &ds)?;
    let mr = mindreader_fit(&fb, &ds)?;
    let rh = rui_huang_fit(&fb, &ds)?;
    println!("mindreader rank {} (pseudo-inverse: {})", mr.rank, mr.pseudo_inverse_used);
    println!("rui-huang space weights {:?}", rh.weights);

    let hits = |scores: &(dyn Fn(&Item) -> f64 + Sync)| -> rf_lab::Result<usize> {
        let top = rank(&ds, &|_: usize, it: &Item| scores(it), 20)?;
        Ok(top.iter().filter(|r| ds.item(r.index).category() == "cat2").count())
    };
    println!("mars        {}/20", hits(&|it| mars_score(it.features(), &q, &mars).unwrap())?);
    println!("mindreader  {}/20", hits(&|it| mindreader_score(it.features(), &mr).unwrap())?);
    println!("rui-huang   {}/20", hits(&|it| rui_huang_score(it, &rh).unwrap())?);
    Ok(())
}
