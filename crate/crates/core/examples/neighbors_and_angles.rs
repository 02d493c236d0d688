//! Low-level building blocks: the distance index, sphere-proximity neighbors
//! and the order-k angle.
use scaledim::{angle, DistanceIndex, PointCloud};

fn main() -> scaledim::Result<()> {
    let cloud = PointCloud::from_rows(&[
        vec![0.0, 0.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![1.0, 1.0, 2f64.sqrt()],
        vec![3.0, 0.0, 0.0],
    ])?;
    let index = DistanceIndex::build(&cloud)?;
    println!("s_min = {:.4}, s_max = {:.4}", index.s_min(), index.s_max());

    for s in [0.5, 1.5, 2.5] {
        let sel = index.sphere_neighbors(0, s, 3)?;
        println!("center 0, s = {s}: neighbors {:?}", sel.ids);
    }

    // Apex (1,1,√2) against the plane spanned by the first two unit vectors.
    let theta = angle(&cloud, 0, &[1, 2], 3)?;
    println!("order-2 angle = {theta:.6} rad (π/4 = {:.6})", std::f64::consts::FRAC_PI_4);
    println!("order-1 angle, collinear apex = {}", angle(&cloud, 0, &[1], 4)?);
    Ok(())
}
