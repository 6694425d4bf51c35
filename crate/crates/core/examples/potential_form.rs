//! Move the area form to the standard one and H to xi^2 + V(x).

use ak_normal_forms::normalform::{f_form, potential_form};
use ak_normal_forms::series::{AkHamiltonian, Rational, Ring, Sigma, TruncatedSeries1};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = AkHamiltonian::new(3, Sigma::Minus)?;
    let c =
        TruncatedSeries1::<Rational>::polynomial_i64(Ring::Rational, &[(0, 1), (1, 1), (3, -2)])
            .with_order(9);
    let nf = f_form(&c, h)?;
    let (v, map) = potential_form(&nf)?;
    println!("V(x)    = {v}");
    println!("x'(x,xi)  = {}", map.phi_x);
    println!("xi'(x,xi) = {}", map.phi_xi);
    Ok(())
}
