//! Reparametrize H so that the leading function becomes 1.

use ak_normal_forms::normalform::{ch_form, fibration_form};
use ak_normal_forms::series::{AkHamiltonian, Rational, Ring, Sigma, TruncatedSeries1};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = AkHamiltonian::new(4, Sigma::Plus)?;
    // c = 1 + 2 x^4 + x^5, the residual of g = 1 + xi^2 plus an x^5 term.
    let c = TruncatedSeries1::<Rational>::polynomial_i64(Ring::Rational, &[(0, 1), (4, 2), (5, 1)])
        .with_order(12);
    let (ch, _) = ch_form(&c, h)?;
    let (form, change) = fibration_form(&ch, 160)?;
    println!("h(H)  = {}", change.h);
    println!("f^    = {}", change.fhat);
    for i in form.indices() {
        println!("c^_{i} = {}", form.component(i).unwrap());
    }
    println!("|h f^(h) - H|  = {:e}", change.invariant_error());
    println!("|leading - 1|  = {:e}", change.leading_error());
    Ok(())
}
