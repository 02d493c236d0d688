//! T_2 across scales for a clean and a noisy Swiss roll.
use scaledim::scale::t_profile;
use scaledim::{gen_swiss_roll, DistanceIndex, NormalizerMode, NormalizerTable, ScaleGrid};

fn main() -> scaledim::Result<()> {
    let normalizers = NormalizerTable::standard(2)?;
    for sigma in [0.0, 0.35] {
        let cloud = gen_swiss_roll(1000, sigma, 0)?;
        let index = DistanceIndex::build(&cloud)?;
        let grid = ScaleGrid::build(&index, 5.0, NormalizerMode::MaxPairwise)?;
        let t = t_profile(&cloud, &grid, &index, 1..=2, &normalizers)?;
        println!("sigma = {sigma}");
        for (g, p) in grid.points.iter().enumerate() {
            println!(
                "  {:>7} {:>7.4}  T1 = {:.3}  T2 = {:.3}",
                p.label(),
                p.standardized,
                t.value(1, g).unwrap_or(f64::NAN),
                t.value(2, g).unwrap_or(f64::NAN)
            );
        }
    }
    Ok(())
}
