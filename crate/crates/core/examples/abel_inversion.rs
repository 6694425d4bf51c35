//! Recover c_i(t) from tabulated generalized actions.

use ak_normal_forms::analysis::{abel_forward, abel_invert, QuadratureConfig, SampledFunction};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (k, i) = (4, 1);
    let cfg = QuadratureConfig::default();
    let c = |t: f64| 1.0 - 2.0 * t + t * t;
    let data =
        SampledFunction::tabulate(|h| abel_forward(c, k, i, h, &cfg).unwrap(), 0.0, 0.1, 81)?;
    for t in [0.0, 0.025, 0.05, 0.1] {
        let back = abel_invert(&data, k, i, t, &cfg)?;
        println!("t = {t:<6} c = {:.12}  recovered = {back:.12}", c(t));
    }
    Ok(())
}
