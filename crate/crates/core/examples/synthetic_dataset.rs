//! Generates a small clustered dataset, writes it to a temp file and reads it back.

use rf_lab::feature_store::{generate_synthetic, load_dataset, write_dataset, FeatureSchema, SyntheticSpec};

fn main() -> rf_lab::Result<()> {
    let spec = SyntheticSpec {
        categories: 5,
        per_category: 10,
        schema: FeatureSchema::new(vec![3, 2])?,
        separation: 2.0,
        noise: 0.5,
        seed: 42,
    };
    let ds = generate_synthetic(&spec)?;
    let path = std::env::temp_dir().join("rf_lab_synthetic.csv");
    write_dataset(&path, &ds, &[spec.describe()])?;
    let back = load_dataset(&path, ds.schema())?;
    println!("{} items in {} categories, dims {:?}", back.len(), back.categories().len(), back.schema().dims());
    for item in back.items().iter().take(3) {
        println!("{} {} {:?}", item.id(), item.category(), item.features());
    }
    Ok(())
}
