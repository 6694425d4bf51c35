//! The primitive and c~ normal forms of one area form.

use ak_normal_forms::cohomology::solve_cohomological;
use ak_normal_forms::normalform::{canonicalize_sign, ch_form, ch_residual, f_form, f_series};
use ak_normal_forms::series::{AkHamiltonian, Rational, Ring, Sigma, TruncatedSeries2};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = AkHamiltonian::new(4, Sigma::Plus)?;
    let g = TruncatedSeries2::<Rational>::polynomial_i64(
        Ring::Rational,
        &[(0, 0, 1), (1, 0, 1), (0, 2, 1)],
    )
    .with_order(12);
    let c = solve_cohomological(&g, h)?.c;
    println!("c = {c}");

    let f = f_form(&c, h)?;
    println!("f = {}", f_series(&f)?);
    for i in f.indices() {
        println!("  f_{i} = {}", f.component(i).unwrap());
    }
    let (canon, flipped) = canonicalize_sign(&f);
    println!("canonical representative flipped: {flipped}");
    println!("  f_2 = {}", canon.component(2).unwrap());

    let (ch, table) = ch_form(&c, h)?;
    for i in ch.indices() {
        println!("  c~_{i} = {}", ch.component(i).unwrap());
    }
    println!(
        "residual of the c~ form matches: {}",
        ch_residual(&ch)? == c
    );
    println!(
        "i-dependent conversion columns: {:?}",
        table.i_dependent_columns()
    );
    Ok(())
}
