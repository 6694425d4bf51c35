//! Truncated series: products, brackets and the k-channel decomposition.

use ak_normal_forms::series::{
    c_decompose, poisson_bracket, AkHamiltonian, Rational, Ring, Sigma, TruncatedSeries1,
    TruncatedSeries2,
};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = Ring::Rational;
    let a = TruncatedSeries2::<Rational>::polynomial_i64(q, &[(0, 0, 1), (1, 1, 2)]).with_order(6);
    let b = TruncatedSeries2::<Rational>::polynomial_i64(q, &[(2, 0, 1), (0, 1, -1)]);
    println!("a       = {a}");
    println!("a b     = {}", &a * &b);
    println!("{{a, b}}  = {}", poisson_bracket(&a, &b)?);

    let h = AkHamiltonian::new(4, Sigma::Plus)?;
    println!("{{H, a}}  = {}", h.bracket(&a));

    let c = TruncatedSeries1::<Rational>::polynomial_i64(q, &[(0, 1), (1, 3), (4, 2), (6, -1)])
        .with_order(10);
    for (i, part) in c_decompose(&c, 4)?.iter().enumerate() {
        println!("c_{i}(t) = {part}");
    }
    Ok(())
}
