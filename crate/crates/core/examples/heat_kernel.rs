//! The constant ν(μ), the heat kernel k_μ, its heat-equation residual and
//! its total mass.

use heisenspec::mehler::{self, HeatQuery};
use heisenspec::Point;

fn main() -> heisenspec::Result<()> {
    for n in 1..=3 {
        let est = mehler::nu_estimate(n, 0.0, 1e-12)?;
        println!("nu(n={n}, 0) = {:.15e} ± {:.1e}", est.value, est.est_error);
    }
    println!(
        "nu(2, 1/144π) check: {:.3e}",
        mehler::nu(2, 0.0, 1e-12)? - 1.0 / (144.0 * std::f64::consts::PI)
    );

    let q = HeatQuery::new(1, 0.5, 0.3, 0.17, 0.7);
    let k = mehler::heat_kernel(&q)?;
    println!(
        "k_0.5(x0=0.3, r²=0.17, t=0.7) = {} ± {:.1e}",
        k.value, k.est_error
    );

    let p = Point::new(0.2, vec![0.3, -0.1]);
    for h in [1e-2, 5e-3, 2.5e-3] {
        println!(
            "h = {h:.1e}: residual {:.3e}, wrong-mu residual {:.3e}",
            mehler::heat_residual(1, 0.0, &p, 0.6, h)?,
            mehler::residual_against(1, 0.3, 0.0, &p, 0.6, h)?
        );
    }

    let mass = mehler::total_mass(1, 1.0, 14.0, 1e-8)?;
    println!(
        "total mass (n=1, t=1) = {:.12} ± {:.1e}",
        mass.value, mass.est_error
    );
    Ok(())
}
