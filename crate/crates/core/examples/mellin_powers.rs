//! Partial matrix powers P^{−s} from the Mellin integral of the heat
//! semigroup, compared with an eigendecomposition.

use heisenspec::oracle::{mellin_power, MatrixOperator, MellinParams};
use nalgebra::DMatrix;
use num_complex::Complex64;

fn main() -> heisenspec::Result<()> {
    // Graph Laplacian of a 4-cycle: PSD with the constants as kernel.
    let p = DMatrix::from_row_slice(
        4,
        4,
        &[
            2.0, -1.0, 0.0, -1.0, -1.0, 2.0, -1.0, 0.0, 0.0, -1.0, 2.0, -1.0, -1.0, 0.0, -1.0, 2.0,
        ],
    );
    let op = MatrixOperator::new(p.clone())?;
    let eig = p.symmetric_eigen();
    for s in [0.5, 1.0, 1.7] {
        let m = mellin_power(&op, Complex64::new(s, 0.0), MellinParams::default())?;
        let mut direct = DMatrix::<f64>::zeros(4, 4);
        for (i, &l) in eig.eigenvalues.iter().enumerate() {
            if l > 1e-10 {
                let v = eig.eigenvectors.column(i);
                direct += v * v.transpose() * l.powf(-s);
            }
        }
        let diff = m.map(|z| z.re) - &direct;
        println!("s = {s}: max |mellin − eig| = {:.2e}", diff.amax());
    }
    let semigroup = mellin_power(&op, Complex64::new(0.3, 0.4), MellinParams::default())?
        * mellin_power(&op, Complex64::new(0.7, -0.4), MellinParams::default())?;
    let one = mellin_power(&op, Complex64::new(1.0, 0.0), MellinParams::default())?;
    println!(
        "P^(−s₁)P^(−s₂) − P^(−s₁−s₂): {:.2e}",
        (semigroup - one).norm()
    );
    Ok(())
}
