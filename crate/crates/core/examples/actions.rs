//! Actions by quadrature against the closed form of the residual.

use ak_normal_forms::analysis::{
    action_compact, cross_check_invariants, generalized_actions, QuadratureConfig,
};
use ak_normal_forms::series::{AkHamiltonian, Rational, Ring, Sigma, TruncatedSeries2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = AkHamiltonian::new(4, Sigma::Plus)?;
    let g = TruncatedSeries2::<Rational>::polynomial_i64(
        Ring::Rational,
        &[(0, 0, 1), (0, 2, 1), (1, 0, 1)],
    )
    .with_order(12);
    let cfg = QuadratureConfig::default();
    for level in [0.01, 0.05] {
        let area = action_compact(|x, xi| g.eval_f64(x, xi), 4, level, &cfg)?;
        let channels = generalized_actions(&g, 4, level, &cfg)?;
        println!("h = {level}: action {area:.12}, generalized {channels:?}");
    }
    let report = cross_check_invariants(&g, h, &[0.01, 0.03, 0.05], &cfg)?;
    println!(
        "cross check: max relative error {:e}, passed {}",
        report.max_rel_error, report.passed
    );
    Ok(())
}
