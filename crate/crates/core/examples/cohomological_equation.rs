//! Solve g = {H, u} + c(x) and check the certificate.

use ak_normal_forms::cohomology::solve_cohomological;
use ak_normal_forms::series::{AkHamiltonian, Rational, Ring, Sigma, TruncatedSeries2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = AkHamiltonian::new(3, Sigma::Minus)?;
    let g = TruncatedSeries2::<Rational>::polynomial_i64(
        Ring::Rational,
        &[(0, 0, 1), (0, 2, 1), (1, 1, 3), (2, 2, -2)],
    )
    .with_order(10);
    let sol = solve_cohomological(&g, h)?;
    println!("H = {h}");
    println!("g = {g}");
    println!("c = {}", sol.c);
    println!("u = {}", sol.u);
    println!("certificate: {}", sol.verify(&g, h));
    println!("elimination coefficients used: {}", sol.table.len());
    Ok(())
}
