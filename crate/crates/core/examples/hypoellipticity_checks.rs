//! Rockland-type checks for a sublaplacian model and the combinatorial
//! conditions behind the Weyl coefficient tables.

use heisenspec::hypo::{self, LeviData, SublaplacianModel};
use num_complex::Complex64;

fn main() -> heisenspec::Result<()> {
    // Levi form with |eigenvalues| (2, 2, 1, 1); the singular set is the
    // lattice ±(trace + 2·N-combinations of the eigenvalues).
    let levi = LeviData::new(vec![1.0, 1.0, 2.0, 2.0])?;
    println!("singular set: {:?}", hypo::singular_set(&levi));

    for mu in [
        Complex64::new(0.5, 0.0),
        Complex64::new(6.0, 0.0),
        Complex64::new(6.0, 0.1),
    ] {
        let model = SublaplacianModel::new(levi.clone(), vec![mu], hypo::DEFAULT_TOLERANCE)?;
        let rock = hypo::check_rockland(&model);
        let weak = hypo::check_weaker(&model);
        println!(
            "mu = {mu}: rockland {} {:?}, weaker {}",
            rock.pass, rock.witness, weak.pass
        );
    }

    let n = 3;
    for kappa in 0..=n {
        let row: Vec<&str> = (0..=n)
            .map(|q| match hypo::y_condition(n, kappa, n, q) {
                Ok(true) => "Y",
                Ok(false) => ".",
                Err(_) => "?",
            })
            .collect();
        println!(
            "n = {n}, kappa = {kappa}: Y(q) for q = 0..{n}: {}",
            row.join(" ")
        );
    }
    println!(
        "X(k) for d = 6, rank 6: {:?}",
        (0..=3)
            .map(|k| hypo::x_condition(6, 6, k))
            .collect::<Vec<_>>()
    );
    Ok(())
}
