//! Weyl coefficient tables and leading-order eigenvalue predictions.

use heisenspec::weyl::{self, AsymptoticModel, CRSetting, Coefficient, Prediction};

fn main() -> heisenspec::Result<()> {
    let n = 2;
    for coeff in [Coefficient::Alpha, Coefficient::Beta, Coefficient::Gamma] {
        let kappa = if coeff == Coefficient::Gamma { 0 } else { 1 };
        let table = weyl::table(coeff, n, kappa, 1e-10)?;
        println!("{coeff:?} (n = {n}, kappa = {kappa})");
        for row in &table.rows {
            println!("  {:?} -> {:.12e}", row.index, row.value);
        }
        for s in &table.skipped {
            println!("  {:?} skipped: {}", s.index, s.reason);
        }
    }

    // Round sphere S⁵ with the standard contact form: ∫θ∧dθ² = 8π³.
    let setting = CRSetting {
        n,
        kappa: 0,
        vol_integral: 8.0 * std::f64::consts::PI.powi(3),
    };
    let vol = weyl::pseudohermitian_volume(&setting);
    let nu0 = weyl::beta(n, 0, 0, 0, 1e-10)? * vol;
    println!("pseudohermitian volume {vol:.6}, nu0 = {nu0:.6e}");
    let model = AsymptoticModel::new(2 * n + 1, 2, nu0)?;
    for k in [10u32, 100, 1000] {
        println!(
            "lambda_{k} ≈ {:.6}",
            weyl::predict(&model, Prediction::Eigen(k as f64))?
        );
    }
    println!(
        "N(50) ≈ {:.3}",
        weyl::predict(&model, Prediction::Counting(50.0))?
    );
    Ok(())
}
