//! Hypoellipticity conditions for sublaplacians and form Laplacians.
//!
//! A sublaplacian `−ΣX_j² − iμX_0 + O_H(1)` at a point `a` is hypoelliptic
//! in the Heisenberg calculus iff the spectrum of `μ(a)` misses the singular
//! set `Λ_a`, built from the absolute eigenvalues of the Levi matrix `L(a)`.
//! The integer conditions `Y(q)`, `X(k)` and `Y(p,q)` are the analogous
//! statements for the Kohn Laplacian and the horizontal sublaplacian.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Hard cap on the number of lattice sums materialized for one query.
const MAX_LATTICE_POINTS: usize = 4_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LeviData {
    d: usize,
    abs_eigs: Vec<f64>,
    rank: usize,
}

impl LeviData {
    /// Builds from the `|λ_j|` of `L(a)`; entries are sorted nonincreasing.
    pub fn new(mut abs_eigs: Vec<f64>) -> Result<Self> {
        if abs_eigs.is_empty() {
            return Err(Error::OutOfRange("Levi data needs d >= 1".into()));
        }
        if abs_eigs.iter().any(|e| !e.is_finite() || *e < 0.0) {
            return Err(Error::OutOfRange(
                "absolute eigenvalues must be finite and nonnegative".into(),
            ));
        }
        abs_eigs.sort_by(|a, b| b.total_cmp(a));
        let rank = abs_eigs.iter().filter(|e| **e > 0.0).count();
        if rank % 2 != 0 {
            return Err(Error::OutOfRange(format!(
                "rank {rank} of an antisymmetric Levi matrix must be even"
            )));
        }
        Ok(Self {
            d: abs_eigs.len(),
            abs_eigs,
            rank,
        })
    }

    /// From an antisymmetric Levi matrix; entries below `zero_tol·‖L‖` count as zero.
    pub fn from_matrix(l: &DMatrix<f64>, zero_tol: f64) -> Result<Self> {
        if !l.is_square() {
            return Err(Error::DimensionMismatch {
                expected: l.nrows(),
                found: l.ncols(),
            });
        }
        let asym = (l + l.transpose()).amax();
        if asym > zero_tol * l.amax().max(1.0) {
            return Err(Error::OutOfRange("Levi matrix is not antisymmetric".into()));
        }
        // L is normal, so its singular values are the |λ_j|.
        let sv = l.clone().singular_values();
        let scale = sv.max();
        let eigs = sv
            .iter()
            .map(|&s| if s <= zero_tol * scale { 0.0 } else { s })
            .collect();
        Self::new(eigs)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn abs_eigs(&self) -> &[f64] {
        &self.abs_eigs
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn trace_abs(&self) -> f64 {
        self.abs_eigs.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SublaplacianModel {
    pub levi: LeviData,
    pub mu_spectrum: Vec<Complex64>,
    pub tolerance: f64,
}

/// On-disk model file: `{"abs_eigs":[…], "d":int, "mu":[{"re":…,"im":…}], "tol":real}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ModelFile {
    pub abs_eigs: Vec<f64>,
    pub d: usize,
    pub mu: Vec<ComplexRepr>,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn default_tol() -> f64 {
    DEFAULT_TOLERANCE
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexRepr {
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl From<ComplexRepr> for Complex64 {
    fn from(c: ComplexRepr) -> Self {
        Complex64::new(c.re, c.im)
    }
}

impl From<Complex64> for ComplexRepr {
    fn from(c: Complex64) -> Self {
        Self { re: c.re, im: c.im }
    }
}

impl SublaplacianModel {
    pub fn new(levi: LeviData, mu_spectrum: Vec<Complex64>, tolerance: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::OutOfRange("tolerance must be positive".into()));
        }
        Ok(Self {
            levi,
            mu_spectrum,
            tolerance,
        })
    }

    pub fn from_file(file: ModelFile) -> Result<Self> {
        if file.abs_eigs.len() != file.d {
            return Err(Error::DimensionMismatch {
                expected: file.d,
                found: file.abs_eigs.len(),
            });
        }
        let levi = LeviData::new(file.abs_eigs)?;
        Self::new(
            levi,
            file.mu.into_iter().map(Complex64::from).collect(),
            file.tol,
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum SingularSet {
    /// `±(threshold + Σ α_j g_j)`, `α ∈ N^d`; only when the Levi form has full rank.
    Lattice {
        threshold: f64,
        generators: Vec<f64>,
    },
    /// `(−∞, −threshold] ∪ [threshold, ∞)`.
    Rays { threshold: f64 },
}

impl SingularSet {
    pub fn threshold(&self) -> f64 {
        match self {
            SingularSet::Lattice { threshold, .. } | SingularSet::Rays { threshold } => *threshold,
        }
    }

    /// A point of the set within `tol` of the real number `x`, if any.
    pub fn nearby_point(&self, x: f64, tol: f64) -> Option<f64> {
        let sign = if x < 0.0 { -1.0 } else { 1.0 };
        let ax = x.abs();
        match self {
            SingularSet::Rays { threshold } => {
                (ax >= threshold - tol).then(|| sign * ax.max(*threshold))
            }
            SingularSet::Lattice {
                threshold,
                generators,
            } => {
                let target = ax - threshold;
                if target < -tol {
                    return None;
                }
                lattice_hit(generators, target, tol).map(|s| sign * (threshold + s))
            }
        }
    }

    /// Membership test for real `x`.
    pub fn contains(&self, x: f64) -> bool {
        self.nearby_point(x, 0.0).is_some()
    }
}

/// Finds `s = Σ α_j g_j` with `|s − target| ≤ tol`, searching sums up to `target + tol`.
fn lattice_hit(generators: &[f64], target: f64, tol: f64) -> Option<f64> {
    if target.abs() <= tol {
        return Some(0.0);
    }
    let bound = target + tol;
    let mut gens: Vec<f64> = generators.iter().copied().filter(|g| *g > 0.0).collect();
    gens.sort_by(f64::total_cmp);
    gens.dedup();
    let mut sums: Vec<f64> = vec![0.0];
    for g in gens {
        let mut next = Vec::with_capacity(sums.len());
        for &s in &sums {
            let mut v = s;
            while v <= bound {
                next.push(v);
                v += g;
            }
        }
        next.sort_by(f64::total_cmp);
        next.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
        if next.len() > MAX_LATTICE_POINTS {
            // Beyond this density every target is within tol of some sum.
            return Some(target);
        }
        sums = next;
    }
    sums.into_iter()
        .filter(|s| (s - target).abs() <= tol)
        .min_by(|a, b| (a - target).abs().total_cmp(&(b - target).abs()))
}

pub fn singular_set(levi: &LeviData) -> SingularSet {
    let threshold = 0.5 * levi.trace_abs();
    if levi.rank() == levi.d() {
        SingularSet::Lattice {
            threshold,
            generators: levi
                .abs_eigs()
                .iter()
                .copied()
                .filter(|e| *e > 0.0)
                .collect(),
        }
    } else {
        SingularSet::Rays { threshold }
    }
}

/// The weaker singular set `Λ'_a`: always the pair of rays.
pub fn weaker_singular_set(levi: &LeviData) -> SingularSet {
    SingularSet::Rays {
        threshold: 0.5 * levi.trace_abs(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Witness {
    /// An eigenvalue of `μ(a)` lying within tolerance of the singular point.
    SingularPoint { mu: ComplexRepr, point: f64 },
    /// The excluded integer window that contains the tested degree.
    Window { lo: usize, hi: usize },
    /// The excluded rectangle `[p_lo, p_hi] × [q_lo, q_hi]` containing `(p, q)`.
    Rectangle {
        p_lo: usize,
        p_hi: usize,
        q_lo: usize,
        q_hi: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub condition: &'static str,
    pub pass: bool,
    pub witness: Option<Witness>,
}

fn spectral_verdict(
    condition: &'static str,
    model: &SublaplacianModel,
    set: &SingularSet,
) -> Verdict {
    let tol = model.tolerance;
    for &mu in &model.mu_spectrum {
        // Λ lies on the real axis.
        if mu.im.abs() > tol {
            continue;
        }
        if let Some(point) = set.nearby_point(mu.re, tol) {
            return Verdict {
                condition,
                pass: false,
                witness: Some(Witness::SingularPoint {
                    mu: mu.into(),
                    point,
                }),
            };
        }
    }
    Verdict {
        condition,
        pass: true,
        witness: None,
    }
}

pub fn check_rockland(model: &SublaplacianModel) -> Verdict {
    spectral_verdict("rockland", model, &singular_set(&model.levi))
}

pub fn check_weaker(model: &SublaplacianModel) -> Verdict {
    spectral_verdict("weaker", model, &weaker_singular_set(&model.levi))
}

/// `Sp μ(a) ∩ Λ_a = ∅`, with the tolerance of the model.
pub fn rockland_sublaplacian(model: &SublaplacianModel) -> bool {
    check_rockland(model).pass
}

/// `Sp μ(a) ∩ Λ'_a = ∅`; implies [`rockland_sublaplacian`].
pub fn weaker_condition(model: &SublaplacianModel) -> bool {
    check_weaker(model).pass
}

fn in_window(x: usize, lo: usize, hi: usize) -> bool {
    lo <= x && x <= hi
}

pub fn check_y(n: usize, kappa: usize, r: usize, q: usize) -> Result<Verdict> {
    if !(kappa <= r && r <= n) || q > n {
        return Err(Error::OutOfRange(format!(
            "Y(q) needs 0 <= kappa <= r <= n and 0 <= q <= n (n={n}, kappa={kappa}, r={r}, q={q})"
        )));
    }
    let windows = [(kappa, kappa + n - r), (r - kappa, n - kappa)];
    let hit = windows.iter().find(|(lo, hi)| in_window(q, *lo, *hi));
    Ok(Verdict {
        condition: "Yq",
        pass: hit.is_none(),
        witness: hit.map(|&(lo, hi)| Witness::Window { lo, hi }),
    })
}

/// Condition `Y(q)` for a Levi form of signature `(r − κ, κ, n − r)`.
pub fn y_condition(n: usize, kappa: usize, r: usize, q: usize) -> Result<bool> {
    Ok(check_y(n, kappa, r, q)?.pass)
}

pub fn check_x(d: usize, rank: usize, k: usize) -> Result<Verdict> {
    if rank > d || !rank.is_multiple_of(2) || k > d {
        return Err(Error::OutOfRange(format!(
            "X(k) needs an even rank <= d and 0 <= k <= d (d={d}, rank={rank}, k={k})"
        )));
    }
    let r = rank / 2;
    let (lo, hi) = (r, d - r);
    let hit = in_window(k, lo, hi);
    Ok(Verdict {
        condition: "Xk",
        pass: !hit,
        witness: hit.then_some(Witness::Window { lo, hi }),
    })
}

/// Condition `X(k)` where the Levi form has rank `2r = rank`.
pub fn x_condition(d: usize, rank: usize, k: usize) -> Result<bool> {
    Ok(check_x(d, rank, k)?.pass)
}

pub fn check_ypq(n: usize, kappa: usize, r: usize, p: usize, q: usize) -> Result<Verdict> {
    if !(kappa <= r && r <= n) || p > n || q > n {
        return Err(Error::OutOfRange(format!(
            "Y(p,q) needs 0 <= kappa <= r <= n and 0 <= p, q <= n \
             (n={n}, kappa={kappa}, r={r}, p={p}, q={q})"
        )));
    }
    let w = n - r;
    let rects = [
        (kappa, kappa + w, r - kappa, r - kappa + w),
        (r - kappa, r - kappa + w, kappa, kappa + w),
    ];
    let hit = rects
        .iter()
        .find(|(plo, phi, qlo, qhi)| in_window(p, *plo, *phi) && in_window(q, *qlo, *qhi));
    Ok(Verdict {
        condition: "Ypq",
        pass: hit.is_none(),
        witness: hit.map(|&(p_lo, p_hi, q_lo, q_hi)| Witness::Rectangle {
            p_lo,
            p_hi,
            q_lo,
            q_hi,
        }),
    })
}

pub fn ypq_condition(n: usize, kappa: usize, r: usize, p: usize, q: usize) -> Result<bool> {
    Ok(check_ypq(n, kappa, r, p, q)?.pass)
}
