//! Group law, inverses, dilations and the commutator of two model fields
//! on the Heisenberg group of dimension 5.

use heisenspec::group::{dilate, pseudo_norm};
use heisenspec::{GroupSpec, Point};

fn main() -> heisenspec::Result<()> {
    let g = GroupSpec::heisenberg(2);
    let x = Point::new(0.3, vec![1.0, -0.5, 0.25, 2.0]);
    let y = Point::new(-1.2, vec![0.4, 0.7, -1.0, 0.1]);

    let xy = g.mul(&x, &y)?;
    let yx = g.mul(&y, &x)?;
    println!("x·y = {xy:?}");
    println!("y·x = {yx:?}");
    println!("central part of [x, y]: {:.6}", xy.x0 - yx.x0);

    let back = g.mul(&xy, &g.inverse(&y)?)?;
    println!("(x·y)·y⁻¹ = {back:?}");

    // The pseudo-norm is homogeneous of degree one.
    for lambda in [0.5, 2.0, 3.0] {
        println!(
            "|δ_{lambda} x| / |x| = {:.12}",
            pseudo_norm(&dilate(lambda, &x)) / pseudo_norm(&x)
        );
    }

    println!(
        "structure constants L = bᵗ − b:\n{}",
        g.structure_constants()
    );
    Ok(())
}
