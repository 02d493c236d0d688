//! Hénon attractor under increasing observation noise: the fractal structure
//! keeps T_1 well below 2 at small scales; noise lifts the very smallest one.
use scaledim::scale::t_profile;
use scaledim::{gen_henon, DistanceIndex, NormalizerMode, NormalizerTable, ScaleGrid};

fn main() -> scaledim::Result<()> {
    let normalizers = NormalizerTable::standard(1)?;
    println!("{:>7} {:>10} {:>10} {:>10}", "sigma", "T1(s_min)", "T1(s_5%)", "T1(s_50%)");
    for sigma in [0.0, 0.001, 0.003, 0.01, 0.03] {
        let cloud = gen_henon(1000, 100, sigma, 0)?;
        let index = DistanceIndex::build(&cloud)?;
        let grid = ScaleGrid::build(&index, 5.0, NormalizerMode::MaxPairwise)?;
        let t = t_profile(&cloud, &grid, &index, 1..=1, &normalizers)?;
        let at = |p: f64| grid.position_of(p).and_then(|g| t.value(1, g)).unwrap_or(f64::NAN);
        println!("{sigma:>7} {:>10.3} {:>10.3} {:>10.3}", at(0.0), at(5.0), at(50.0));
    }
    Ok(())
}
