//! Weyl coefficients, CR volumes and the heat-trace/counting-function
//! asymptotics.
//!
//! All of `α`, `β` and `γ` are finite sums of `ν` at integer arguments in
//! `(−n, n)`. Sums are accumulated in a canonical order (terms sorted, then
//! compensated), so index symmetries hold bit-for-bit.

use std::sync::OnceLock;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
use crate::hypo;
use crate::mehler::{self, factorial};
use crate::quad::neumaier_sum;

pub(crate) fn binomial(n: u32, k: i64) -> f64 {
    if k < 0 || k > n as i64 {
        return 0.0;
    }
    let k = (k as u32).min(n - k as u32);
    (0..k)
        .fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        .round()
}

/// Lazily filled table of `ν(m)` for the integers `|m| < n`.
///
/// Each slot is written at most once; concurrent readers either see the
/// value or compute the same one.
#[derive(Debug)]
pub struct NuCache {
    n: u32,
    rel_tol: f64,
    slots: Vec<OnceLock<Result<f64>>>,
}

impl NuCache {
    pub fn new(n: u32, rel_tol: f64) -> Self {
        Self {
            n,
            rel_tol,
            slots: (0..n).map(|_| OnceLock::new()).collect(),
        }
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    /// `ν(m)`; an argument at or beyond `±n` is an internal fault here.
    pub fn get(&self, m: i64) -> Result<f64> {
        let idx = m.unsigned_abs() as usize;
        if idx >= self.slots.len() {
            return Err(Error::InconsistencyFault(format!(
                "nu argument {m} outside (-{n}, {n})",
                n = self.n
            )));
        }
        // ν is even; storing by |m| makes ν(m) and ν(−m) the same bits.
        self.slots[idx]
            .get_or_init(|| mehler::nu(self.n, idx as f64, self.rel_tol))
            .clone()
    }
}

fn canonical_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    neumaier_sum(terms)
}

fn check_kappa(n: u32, kappa: u32) -> Result<()> {
    if n == 0 || 2 * kappa > n {
        return Err(Error::OutOfRange(format!(
            "need n >= 1 and 0 <= kappa <= n/2 (n={n}, kappa={kappa})"
        )));
    }
    Ok(())
}

fn check_degree(n: u32, name: &str, v: u32) -> Result<()> {
    if v > n {
        return Err(Error::OutOfRange(format!("{name}={v} exceeds n={n}")));
    }
    Ok(())
}

pub fn alpha(n: u32, kappa: u32, p: u32, q: u32, rel_tol: f64) -> Result<f64> {
    alpha_cached(&NuCache::new(n, rel_tol), kappa, p, q)
}

/// Kohn Laplacian coefficient
/// `2^{−(n+1)} C(n,p) Σ_k C(n−κ,k) C(κ,q−k) ν(n+2q−2κ−4k)`.
pub fn alpha_cached(cache: &NuCache, kappa: u32, p: u32, q: u32) -> Result<f64> {
    let n = cache.n();
    check_kappa(n, kappa)?;
    check_degree(n, "p", p)?;
    check_degree(n, "q", q)?;
    let (nn, kk, qq) = (n as usize, kappa as usize, q as usize);
    if !hypo::y_condition(nn, kk, nn, qq)? {
        return Err(Error::ConditionViolated(format!(
            "Y({q}) fails for n={n}, kappa={kappa}"
        )));
    }
    let (n_i, k_i, q_i) = (n as i64, kappa as i64, q as i64);
    let mut terms = Vec::new();
    for k in (q_i - k_i).max(0)..=q_i.min(n_i - k_i) {
        let w = binomial(n - kappa, k) * binomial(kappa, q_i - k);
        terms.push(w * cache.get(n_i + 2 * q_i - 2 * k_i - 4 * k)?);
    }
    Ok(2f64.powi(-(n as i32 + 1)) * binomial(n, p as i64) * canonical_sum(terms))
}

pub fn beta(n: u32, kappa: u32, p: u32, q: u32, rel_tol: f64) -> Result<f64> {
    beta_cached(&NuCache::new(n, rel_tol), kappa, p, q)
}

/// Horizontal sublaplacian coefficient
/// `Σ_{k,l} C(n−κ,l)C(κ,p−l)C(n−κ,k)C(κ,q−k) ν((q−p) + 2(l−k))`.
pub fn beta_cached(cache: &NuCache, kappa: u32, p: u32, q: u32) -> Result<f64> {
    let n = cache.n();
    check_kappa(n, kappa)?;
    check_degree(n, "p", p)?;
    check_degree(n, "q", q)?;
    let (nn, kk) = (n as usize, kappa as usize);
    if !hypo::ypq_condition(nn, kk, nn, p as usize, q as usize)? {
        return Err(Error::ConditionViolated(format!(
            "Y({p},{q}) fails for n={n}, kappa={kappa}"
        )));
    }
    let (n_i, k_i, p_i, q_i) = (n as i64, kappa as i64, p as i64, q as i64);
    let mut terms = Vec::new();
    for l in (p_i - k_i).max(0)..=p_i.min(n_i - k_i) {
        let wl = binomial(n - kappa, l) * binomial(kappa, p_i - l);
        for k in (q_i - k_i).max(0)..=q_i.min(n_i - k_i) {
            let wk = binomial(n - kappa, k) * binomial(kappa, q_i - k);
            terms.push(wl * wk * cache.get((q_i - p_i) + 2 * (l - k))?);
        }
    }
    Ok(canonical_sum(terms))
}

pub fn gamma_coeff(n: u32, k: u32, rel_tol: f64) -> Result<f64> {
    gamma_cached(&NuCache::new(n, rel_tol), k)
}

/// Contact Laplacian coefficient `2^{−n} Σ_{p+q=k} C(n,p)C(n,q) ν(p−q)`, `k ≠ n`.
pub fn gamma_cached(cache: &NuCache, k: u32) -> Result<f64> {
    let n = cache.n();
    if n == 0 || k > 2 * n {
        return Err(Error::OutOfRange(format!(
            "need n >= 1 and 0 <= k <= 2n (n={n}, k={k})"
        )));
    }
    if k == n {
        return Err(Error::ConditionViolated(format!("k = n = {n}")));
    }
    let (n_i, k_i) = (n as i64, k as i64);
    let mut terms = Vec::new();
    for p in (k_i - n_i).max(0)..=k_i.min(n_i) {
        let q = k_i - p;
        terms.push(binomial(n, p) * binomial(n, q) * cache.get(p - q)?);
    }
    Ok(2f64.powi(-(n as i32)) * canonical_sum(terms))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum VolumeConvention {
    /// `(−1)^κ/(n!·2^n)`, under which the Weyl constants carry no extra 2-power.
    #[default]
    Pseudohermitian,
    /// `(−1)^κ/n!` as in the formal definition.
    Definition,
}

impl std::str::FromStr for VolumeConvention {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pseudohermitian" => Ok(Self::Pseudohermitian),
            "definition" => Ok(Self::Definition),
            other => Err(Error::Input(format!("unknown volume convention '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CRSetting {
    pub n: u32,
    pub kappa: u32,
    /// `∫θ∧dθ^n`, supplied by the caller.
    pub vol_integral: f64,
}

impl CRSetting {
    /// False when the sign of the integral contradicts the signature.
    pub fn sign_consistent(&self) -> bool {
        sign(self.kappa) * self.vol_integral >= 0.0
    }
}

fn sign(kappa: u32) -> f64 {
    if kappa.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

pub fn pseudohermitian_volume(s: &CRSetting) -> f64 {
    pseudohermitian_volume_with(s, VolumeConvention::Pseudohermitian)
}

pub fn pseudohermitian_volume_with(s: &CRSetting, convention: VolumeConvention) -> f64 {
    let base = sign(s.kappa) / factorial(s.n) * s.vol_integral;
    match convention {
        VolumeConvention::Pseudohermitian => base * 2f64.powi(-(s.n as i32)),
        VolumeConvention::Definition => base,
    }
}

/// `(1/n!)∫dθ^n∧θ`; exceeds the pseudohermitian volume by `2^n` at `κ = 0`.
pub fn contact_volume(n: u32, vol_integral: f64) -> f64 {
    vol_integral / factorial(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AsymptoticModel {
    pub d: u32,
    pub m: u32,
    pub nu0: f64,
}

impl AsymptoticModel {
    pub fn new(d: u32, m: u32, nu0: f64) -> Result<Self> {
        if d == 0 {
            return Err(Error::OutOfRange("d must be positive".into()));
        }
        if m == 0 || !m.is_multiple_of(2) {
            return Err(Error::OutOfRange(format!(
                "m must be a positive even integer, got {m}"
            )));
        }
        if !(nu0 > 0.0) || !nu0.is_finite() {
            return Err(Error::OutOfRange(format!(
                "nu0 must be positive, got {nu0}"
            )));
        }
        Ok(Self { d, m, nu0 })
    }

    /// `(d+2)/m`.
    pub fn exponent(&self) -> f64 {
        (self.d + 2) as f64 / self.m as f64
    }

    /// Leading heat coefficient `A_0 = Γ(1 + (d+2)/m)·ν_0`.
    pub fn a0(&self) -> f64 {
        gamma(1.0 + self.exponent()) * self.nu0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Prediction {
    Counting(f64),
    Eigen(f64),
    HeatLeading(f64),
}

pub fn predict(model: &AsymptoticModel, what: Prediction) -> Result<f64> {
    let a = model.exponent();
    match what {
        Prediction::Counting(lambda) if lambda > 0.0 => Ok(model.nu0 * lambda.powf(a)),
        Prediction::Eigen(k) if k >= 1.0 => Ok((k / model.nu0).powf(1.0 / a)),
        Prediction::HeatLeading(t) if t > 0.0 => Ok(model.a0() * t.powf(-a)),
        Prediction::Counting(v) => Err(Error::OutOfRange(format!(
            "lambda must be positive, got {v}"
        ))),
        Prediction::Eigen(v) => Err(Error::OutOfRange(format!("k must be at least 1, got {v}"))),
        Prediction::HeatLeading(v) => {
            Err(Error::OutOfRange(format!("t must be positive, got {v}")))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KaramataFit {
    pub nu0: f64,
    pub a0: f64,
    pub a1: f64,
    /// Euclidean norm of the least-squares residual of `trace·t^a`.
    pub quality: f64,
}

/// Fits `trace·t^a = A_0 + A_1 t^{2/m}` and converts `A_0` to `ν_0` through
/// the Tauberian relation `N(λ) ~ (A_0/Γ(1+a)) λ^a`.
pub fn karamata_fit(samples: &[(f64, f64)], d: u32, m: u32) -> Result<KaramataFit> {
    let model = AsymptoticModel::new(d, m, 1.0)?;
    if samples.len() < 3 {
        return Err(Error::OutOfRange(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    if samples
        .iter()
        .any(|&(t, tr)| !(t > 0.0) || !(tr > 0.0) || !t.is_finite() || !tr.is_finite())
    {
        return Err(Error::OutOfRange(
            "times and traces must be positive and finite".into(),
        ));
    }
    if samples.windows(2).any(|w| !(w[1].0 < w[0].0)) {
        return Err(Error::OutOfRange("t must be strictly decreasing".into()));
    }
    let a = model.exponent();
    let sub = 2.0 / m as f64;
    let rows = samples.len();
    let design = DMatrix::from_fn(
        rows,
        2,
        |i, j| if j == 0 { 1.0 } else { samples[i].0.powf(sub) },
    );
    let y = DVector::from_iterator(rows, samples.iter().map(|&(t, tr)| tr * t.powf(a)));
    let svd = design.clone().svd(true, true);
    let (smax, smin) = (svd.singular_values.max(), svd.singular_values.min());
    if !(smin > 1e-12 * smax) {
        return Err(Error::FitFailed(format!(
            "design matrix is ill-conditioned (rcond {:.3e})",
            smin / smax
        )));
    }
    let coef = svd
        .solve(&y, 0.0)
        .map_err(|e| Error::FitFailed(e.to_string()))?;
    let quality = (&design * &coef - &y).norm();
    let (a0, a1) = (coef[0], coef[1]);
    if !(a0 > 0.0) {
        return Err(Error::FitFailed(format!(
            "leading coefficient {a0} is not positive"
        )));
    }
    Ok(KaramataFit {
        nu0: a0 / gamma(1.0 + a),
        a0,
        a1,
        quality,
    })
}

/// `N(⊡;λ) ≈ ν(0)·vol·λ^{(n+1)/k}` for the `k`'th conformal power.
pub fn conformal_power_prediction(
    n: u32,
    k: u32,
    vol_theta: f64,
    lambda: f64,
    rel_tol: f64,
) -> Result<f64> {
    if n == 0 || k == 0 || k > n + 1 {
        return Err(Error::OutOfRange(format!(
            "need 1 <= k <= n+1 (n={n}, k={k})"
        )));
    }
    if !(lambda > 0.0) {
        return Err(Error::OutOfRange(format!(
            "lambda must be positive, got {lambda}"
        )));
    }
    let nu0 = mehler::nu(n, 0.0, rel_tol)?;
    Ok(nu0 * vol_theta * lambda.powf((n + 1) as f64 / k as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Coefficient {
    Alpha,
    Beta,
    Gamma,
}

impl std::str::FromStr for Coefficient {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Self::Alpha),
            "beta" => Ok(Self::Beta),
            "gamma" => Ok(Self::Gamma),
            other => Err(Error::Input(format!("unknown coefficient '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableRow {
    /// `(p, q)` for α/β, `(k,)` for γ.
    pub index: Vec<u32>,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Skipped {
    pub index: Vec<u32>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub coefficient: Coefficient,
    pub n: u32,
    pub kappa: Option<u32>,
    pub rows: Vec<TableRow>,
    pub skipped: Vec<Skipped>,
}

/// Every admissible index of one coefficient family; excluded ones are
/// listed in `skipped` rather than dropped silently.
pub fn table(coefficient: Coefficient, n: u32, kappa: u32, rel_tol: f64) -> Result<Table> {
    let cache = NuCache::new(n, rel_tol);
    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    let mut push = |index: Vec<u32>, r: Result<f64>| -> Result<()> {
        match r {
            Ok(value) => rows.push(TableRow { index, value }),
            Err(Error::ConditionViolated(reason)) => skipped.push(Skipped { index, reason }),
            Err(e) => return Err(e),
        }
        Ok(())
    };
    match coefficient {
        Coefficient::Gamma => {
            if n == 0 {
                return Err(Error::OutOfRange("n must be at least 1".into()));
            }
            for k in 0..=2 * n {
                push(vec![k], gamma_cached(&cache, k))?;
            }
        }
        Coefficient::Alpha | Coefficient::Beta => {
            check_kappa(n, kappa)?;
            for p in 0..=n {
                for q in 0..=n {
                    let r = if coefficient == Coefficient::Alpha {
                        alpha_cached(&cache, kappa, p, q)
                    } else {
                        beta_cached(&cache, kappa, p, q)
                    };
                    push(vec![p, q], r)?;
                }
            }
        }
    }
    Ok(Table {
        coefficient,
        n,
        kappa: (coefficient != Coefficient::Gamma).then_some(kappa),
        rows,
        skipped,
    })
}
