//! A discrete Folland–Stein sublaplacian on the integer Heisenberg
//! nilmanifold `Γ\H³`, `n = 1`.
//!
//! The second differences along `X_1`, `X_2` are taken over the exact flows
//! of the left-invariant fields, i.e. right translations by `a = exp(hX_1)`
//! and `b = exp(hX_2)` with `h = 1/N`:
//!
//! ```text
//! −½(X_1² + X_2²) ≈ (1/2h²) Σ_j (2 − R_j − R_j^{−1}),
//! ```
//!
//! which is symmetric, positive semidefinite and annihilates constants.
//! Only exact lattice shifts occur, so no interpolation is needed. The centre
//! acts by characters `e^{2πi m x_0}`; each character gives an independent
//! `N² × N²` Hermitian block on the grid `(i_1, i_2)`, `r = i_1 N + i_2`, and
//! `−iμX_0` becomes the bounded multiplier `μ sin(2πmδ)/δ`, `δ = 2/N²`.
//! Blocks `m` and `m + N²/2` are isospectral, so `m < N²/2` covers the
//! spectrum once.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::oracle::spectrum::Spectrum;

/// Largest `N` accepted by the dense path.
pub const MAX_GRID: usize = 24;
const ASYMMETRY_LIMIT: f64 = 1e-10;
/// Eigenvalues closer than this (relative) are merged into one multiplicity.
const MERGE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NilmanifoldGrid {
    n: usize,
    mu: f64,
}

impl NilmanifoldGrid {
    pub fn new(n: usize, mu: f64) -> Result<Self> {
        if n > MAX_GRID {
            return Err(Error::GridTooLarge { n, limit: MAX_GRID });
        }
        if n < 4 || !n.is_multiple_of(2) {
            return Err(Error::OutOfRange(format!(
                "N must be even and at least 4, got {n}"
            )));
        }
        if !(mu.abs() < 1.0) {
            return Err(Error::OutOfRange(format!(
                "|mu| must be below 1 for a nonnegative operator, got {mu}"
            )));
        }
        Ok(Self { n, mu })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Number of central characters, each giving one block.
    pub fn blocks(&self) -> usize {
        self.n * self.n / 2
    }

    /// The Hermitian block for central character `m`.
    pub fn block(&self, m: usize) -> DMatrix<Complex64> {
        let n = self.n;
        let nf = n as f64;
        let n2 = nf * nf;
        let h = self.spacing();
        let dim = n * n;
        let tau = 2.0 * std::f64::consts::PI;
        let mf = m as f64;
        let phase = |x: f64| Complex64::from_polar(1.0, tau * x);
        // R_a g(i1, i2) = e^{2πi m i2/N²} g(i1+1, i2), extra e^{2πi m i2/N} on wrap;
        // R_b g(i1, i2) = e^{−2πi m i1/N²} g(i1, i2+1), extra e^{−2πi m i1/N} on wrap.
        let mut shift = DMatrix::<Complex64>::zeros(dim, dim);
        for i1 in 0..n {
            for i2 in 0..n {
                let row = i1 * n + i2;
                let (j1, wrap_a) = if i1 + 1 == n {
                    (0, true)
                } else {
                    (i1 + 1, false)
                };
                let mut pa = mf * i2 as f64 / n2;
                if wrap_a {
                    pa += mf * i2 as f64 / nf;
                }
                shift[(row, j1 * n + i2)] += phase(pa);
                let (j2, wrap_b) = if i2 + 1 == n {
                    (0, true)
                } else {
                    (i2 + 1, false)
                };
                let mut pb = -mf * i1 as f64 / n2;
                if wrap_b {
                    pb -= mf * i1 as f64 / nf;
                }
                shift[(row, i1 * n + j2)] += phase(pb);
            }
        }
        let delta = 2.0 / n2;
        let central = self.mu * (tau * mf * delta).sin() / delta;
        let scale = 1.0 / (2.0 * h * h);
        let mut block = -(&shift + shift.adjoint()) * Complex64::new(scale, 0.0);
        for i in 0..dim {
            block[(i, i)] += Complex64::new(4.0 * scale + central, 0.0);
        }
        block
    }
}

fn max_modulus(m: &DMatrix<Complex64>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

fn block_eigenvalues(grid: &NilmanifoldGrid, m: usize) -> Result<Vec<f64>> {
    let block = grid.block(m);
    let asymmetry = max_modulus(&(&block - block.adjoint()));
    if asymmetry > ASYMMETRY_LIMIT {
        return Err(Error::AssemblyFault { asymmetry });
    }
    Ok(block.symmetric_eigenvalues().iter().copied().collect())
}

/// Lowest `count` eigenvalues (with multiplicity) of the discrete operator.
///
/// Blocks are solved in parallel and merged in block order, so the result
/// does not depend on the thread count.
pub fn nilmanifold_spectrum(grid: &NilmanifoldGrid, count: usize) -> Result<Spectrum> {
    if count == 0 {
        return Err(Error::OutOfRange("count must be at least 1".into()));
    }
    let total = grid.blocks() * grid.n * grid.n;
    if count > total {
        return Err(Error::OutOfRange(format!(
            "count {count} exceeds the {total} eigenvalues of an N = {} grid",
            grid.n
        )));
    }
    let per_block: Vec<Vec<f64>> = (0..grid.blocks())
        .into_par_iter()
        .map(|m| block_eigenvalues(grid, m))
        .collect::<Result<_>>()?;
    let all: Vec<f64> = per_block.into_iter().flatten().collect();
    Ok(Spectrum::from_values(all, MERGE_TOL)?.lowest(count as u64))
}
