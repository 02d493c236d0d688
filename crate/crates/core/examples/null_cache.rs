//! Null tables: generate once, store as checksummed text, reuse by key.
use scaledim::null::NullProvider;
use scaledim::{generate_null, load_null, store_null, NormalizerMode, NullKey, NullStore};

fn main() -> scaledim::Result<()> {
    let dir = std::env::temp_dir().join("scaledim-null-cache-example");
    let key = NullKey {
        k: 1,
        n: 100,
        step_percent: 10.0,
        mode: NormalizerMode::MaxPairwise,
        replicates: 200,
        seed: 7,
        alpha: 0.05,
    };

    let table = generate_null(&key)?;
    let path = store_null(&table, &dir)?;
    println!("stored {}", path.display());
    assert_eq!(load_null(&key, &dir)?.as_ref(), Some(&table));

    let store = NullStore::new(Some(dir.clone()), false);
    let again = store.null_table(&key)?;
    println!("cache hits: {}, generated: {}", store.cache_hits(), store.generated());
    println!("{:>7} {:>8} {:>8} {:>8}", "label", "mean", "lower", "upper");
    for row in &again.rows {
        println!("{:>7} {:>8.4} {:>8.4} {:>8.4}", row.label(), row.mean, row.lower, row.upper);
    }

    let other = NullKey { step_percent: 5.0, ..key };
    println!("different grid step -> cached: {}", load_null(&other, &dir)?.is_some());
    Ok(())
}
