//! Invariants survive the pullback by an H-preserving flow.

use ak_normal_forms::moser::{flow_map, linear_part, roundtrip_invariants};
use ak_normal_forms::series::{AkHamiltonian, Rational, Ring, Sigma, TruncatedSeries2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let q = Ring::Rational;
    let h = AkHamiltonian::new(4, Sigma::Minus)?;
    let g = TruncatedSeries2::<Rational>::polynomial_i64(
        q,
        &[(0, 0, 2), (1, 0, 1), (1, 2, -1), (3, 0, 1)],
    )
    .with_order(10);
    let w = TruncatedSeries2::<Rational>::polynomial_i64(q, &[(1, 0, 1), (0, 2, -1)]);

    let map = flow_map(&w, h, 10)?;
    let lin = linear_part(&map, h)?;
    println!("flow preserves H: {}", map.preserves(h)?);
    println!("linear part signs: ({}, {})", lin.eps1, lin.eps2);

    let report = roundtrip_invariants(&g, h, &w)?;
    println!(
        "invariants before: {:?}",
        report
            .before
            .components
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
    );
    println!(
        "invariants after:  {:?}",
        report
            .after
            .components
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
    );
    println!(
        "equal up to order {}: {}",
        report.certified_order, report.equal
    );
    Ok(())
}
