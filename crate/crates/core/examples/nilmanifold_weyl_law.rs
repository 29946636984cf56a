//! Lowest eigenvalues of the discrete sublaplacian on the Heisenberg
//! nilmanifold and the Weyl ratio N(λ)/λ².

use heisenspec::oracle::{
    counting_function, median_weyl_ratio, nilmanifold_spectrum, NilmanifoldGrid,
};

fn main() -> heisenspec::Result<()> {
    let n: usize = std::env::args()
        .nth(1)
        .and_then(|a| a.parse().ok())
        .unwrap_or(12);
    let grid = NilmanifoldGrid::new(n, 0.0)?;
    let sp = nilmanifold_spectrum(&grid, 300)?;
    println!("N = {n}: lowest levels (value × multiplicity)");
    for (l, m) in sp.eigenvalues().iter().zip(sp.multiplicities()).take(8) {
        println!("  {l:>12.6} × {m}");
    }
    let expanded = sp.expanded();
    for k in [50, 150, 250] {
        let l = expanded[k];
        println!(
            "N({l:.3}) / λ² = {:.5}",
            counting_function(&sp, l) as f64 / (l * l)
        );
    }
    println!(
        "median ratio on [λ_50, λ_250] = {:.5} (continuum value 1/16 = 0.0625)",
        median_weyl_ratio(&sp, 50, 250, 2.0, 2001)?
    );
    Ok(())
}
