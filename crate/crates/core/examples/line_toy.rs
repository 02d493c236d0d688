//! A noisy segment in the plane: the smallest-scale angle tracks the noise
//! level, while larger scales still see a line.
use scaledim::scale::{compute_angle_field, compute_T};
use scaledim::{gen_line_toy, DistanceIndex, NormalizerMode, NormalizerTable, ScaleGrid};

fn main() -> scaledim::Result<()> {
    let normalizers = NormalizerTable::standard(1)?;
    for sigma in [0.0, 0.001, 0.03, 0.3] {
        let cloud = gen_line_toy(100, sigma, 1)?;
        let index = DistanceIndex::build(&cloud)?;
        let grid = ScaleGrid::build(&index, 10.0, NormalizerMode::MaxPairwise)?;
        let field = compute_angle_field(&cloud, &index, &grid, 1)?;
        let mean: f64 = field.column(1, 0).sum::<f64>() / cloud.len() as f64;
        let t = compute_T(&field, &normalizers)?;
        let curve: Vec<String> = t.curve(1).iter().map(|v| format!("{:.2}", v.unwrap_or(f64::NAN))).collect();
        println!("sigma = {sigma:<5} mean angle at s_min = {mean:.3}   T1: {}", curve.join(" "));
    }
    Ok(())
}
