//! Sweep the elimination coefficients against their growth bound.

use ak_normal_forms::analysis::growth_bound_check;
use ak_normal_forms::series::Sigma;

fn main() {
    for k in 2..=6 {
        for sigma in [Sigma::Plus, Sigma::Minus] {
            let r = growth_bound_check(k, sigma, 30, 30);
            println!(
                "k = {k} sigma = {sigma}: checked {}, excluded {}, max ratio {:.4}, violations {}",
                r.checked,
                r.excluded,
                r.max_ratio,
                r.violations.len()
            );
        }
    }
}
