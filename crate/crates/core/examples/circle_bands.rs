//! Noisy circle against Gaussian null bands: T_1 drops below the 2-d band at
//! small and large scales and sits inside it in between.
//!
//! Usage: `circle_bands [ambient=2] [replicates=1000] [seed=0]`
use scaledim::{gen_circle, sequential_test, DistanceIndex, NormalizerMode, NullStore, ScaleGrid, TestConfig};

fn main() -> scaledim::Result<()> {
    let args: Vec<u64> = std::env::args().skip(1).map(|a| a.parse().expect("numeric argument")).collect();
    let ambient = *args.first().unwrap_or(&2) as usize;
    let replicates = *args.get(1).unwrap_or(&1000) as usize;
    let seed = *args.get(2).unwrap_or(&0);

    let cloud = gen_circle(100, ambient, seed)?;
    let index = DistanceIndex::build(&cloud)?;
    let grid = ScaleGrid::build(&index, 5.0, NormalizerMode::MaxPairwise)?;
    let nulls = NullStore::in_memory();
    let k_max = (ambient - 1).min(2);
    let out = sequential_test(&cloud, &index, &grid, &nulls, &TestConfig::new(k_max, replicates, 1))?;

    println!("{:>7} {:>8}  {:>7} {:>7} {:>7}  verdict", "label", "scale", "T1", "lower", "upper");
    for v in &out.profile.verdicts {
        let first = &v.trials[0];
        println!(
            "{:>7} {:>8.4}  {:>7.3} {:>7.3} {:>7.3}  {}",
            v.label, v.standardized_scale, first.t, first.lower, first.upper, v.summary()
        );
    }
    Ok(())
}
