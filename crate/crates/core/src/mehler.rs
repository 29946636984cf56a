//! The heat kernel of the Folland–Stein sublaplacian on `H^{2n+1}` and the
//! constant `ν(μ)`.
//!
//! With `ℒ_μ = −½ΣX_j² − iμX_0`, the kernel of `ℒ_μ + ∂_t` is
//!
//! ```text
//! k_μ(x_0, x', t) = (2πt)^{−(n+1)} ∫ e^{i x_0 ξ/t − μξ} (ξ/sinh ξ)^n
//!                   exp(−(|x'|²/2t) ξ coth ξ) dξ,
//! ```
//!
//! and `ν(μ) = k_μ(0, 0, 1)/(n+1)!`. For `μ ≠ 0` and `x_0 ≠ 0` the integrand
//! is not conjugate-symmetric, so the kernel is complex in general.

use num_complex::Complex64;
use serde::Serialize;
use statrs::function::gamma::gamma_lr;

use crate::error::{Error, Result};
use crate::group::Point;
use crate::quad::{self, Tolerance};

pub const DEFAULT_NU_TOL: f64 = 1e-10;
pub const DEFAULT_KERNEL_TOL: f64 = 1e-8;

/// Above this `|x_0|/t` panels are sized by the phase of `e^{iωξ}`.
const PHASE_LIMIT: f64 = 50.0;
/// Above this `|x_0|/t` cancellation eats the requested digits.
const MAX_FREQUENCY: f64 = 1e4;
const MAX_PANELS: usize = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub est_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub value: Complex64,
    pub est_error: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeatQuery {
    pub n: u32,
    pub mu: f64,
    pub x0: f64,
    pub r2: f64,
    pub t: f64,
    pub rel_tol: f64,
}

impl HeatQuery {
    pub fn new(n: u32, mu: f64, x0: f64, r2: f64, t: f64) -> Self {
        Self {
            n,
            mu,
            x0,
            r2,
            t,
            rel_tol: DEFAULT_KERNEL_TOL,
        }
    }

    pub fn with_tol(self, rel_tol: f64) -> Self {
        Self { rel_tol, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        check_mu(self.n, self.mu)?;
        if !(self.t > 0.0) || !self.t.is_finite() {
            return Err(Error::OutOfRange(format!(
                "t must be positive, got {}",
                self.t
            )));
        }
        if !(self.r2 >= 0.0) || !self.r2.is_finite() {
            return Err(Error::OutOfRange(format!(
                "r2 must be nonnegative, got {}",
                self.r2
            )));
        }
        if !self.x0.is_finite() {
            return Err(Error::OutOfRange("x0 must be finite".into()));
        }
        check_tol(self.rel_tol)
    }
}

fn check_mu(n: u32, mu: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    if !mu.is_finite() || mu.abs() >= n as f64 {
        return Err(Error::DivergentIntegral { n, mu });
    }
    Ok(())
}

fn check_tol(rel_tol: f64) -> Result<()> {
    if !(rel_tol > 0.0) || rel_tol >= 1.0 {
        return Err(Error::OutOfRange(format!(
            "relative tolerance must lie in (0, 1), got {rel_tol}"
        )));
    }
    Ok(())
}

/// `ln(ξ/sinh ξ)` for `ξ ≥ 0`, stable at both ends.
fn ln_xi_over_sinh(xi: f64) -> f64 {
    if xi < 1e-4 {
        -xi * xi / 6.0
    } else if xi < 30.0 {
        (xi / xi.sinh()).ln()
    } else {
        (2.0 * xi).ln() - xi - (-(-2.0 * xi).exp()).ln_1p()
    }
}

/// `ξ coth ξ` for `ξ ≥ 0`, equal to 1 at the origin.
fn xi_coth(xi: f64) -> f64 {
    if xi < 1e-4 {
        1.0 + xi * xi / 3.0
    } else {
        xi / xi.tanh()
    }
}

/// `Γ(n+1, x) = n! e^{−x} Σ_{k≤n} x^k/k!` for integer `n`.
fn upper_gamma_int(n: u32, x: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=n {
        term *= x / k as f64;
        sum += term;
    }
    factorial(n) * (-x).exp() * sum
}

pub(crate) fn factorial(n: u32) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

/// Bound on `∫_R^∞ |integrand|` for the folded integrand `2 e^{|μ|ξ}(ξ/sinh ξ)^n e^{−cξ}`.
fn tail_bound(n: u32, decay: f64, r: f64) -> f64 {
    let lead = 2.0 * 2f64.powi(n as i32) / (1.0 - (-2.0 * r).exp()).powi(n as i32);
    lead * upper_gamma_int(n, decay * r) / decay.powi(n as i32 + 1)
}

/// Folded integrand on `[0, ∞)` of `∫ e^{iωξ − μξ}(ξ/sinh ξ)^n e^{−β ξ coth ξ} dξ`.
fn folded(n: u32, mu: f64, omega: f64, beta: f64, xi: f64) -> Complex64 {
    let ln_f = n as f64 * ln_xi_over_sinh(xi) - beta * xi_coth(xi);
    let up = (ln_f + mu * xi).exp();
    let down = (ln_f - mu * xi).exp();
    let (s, c) = (omega * xi).sin_cos();
    // 2[cos(ωξ)cosh(μξ) − i sin(ωξ)sinh(μξ)] F(ξ)
    Complex64::new(c * (up + down), -s * (up - down))
}

struct FoldedIntegral {
    value: Complex64,
    error: f64,
}

/// Adaptive evaluation of the folded integral with a controlled tail.
fn fourier_integral(
    n: u32,
    mu: f64,
    omega: f64,
    beta: f64,
    tol: Tolerance,
) -> Result<FoldedIntegral> {
    if omega.abs() > MAX_FREQUENCY {
        return Err(Error::ToleranceNotMet {
            achieved: f64::INFINITY,
            requested: tol.rel,
        });
    }
    let decay = n as f64 - mu.abs() + beta;
    let f = |xi: f64| folded(n, mu, omega, beta, xi);
    let max_width = if omega.abs() > PHASE_LIMIT {
        std::f64::consts::FRAC_PI_4 / omega.abs()
    } else {
        f64::INFINITY
    };

    // Core region: a few decay lengths.
    let mut r = (8.0 / decay).max(4.0);
    let core = quad::adaptive(
        &f,
        &quad::graded_breakpoints(r, 0.5, max_width),
        tol,
        MAX_PANELS,
    )
    .map_err(|partial| Error::ToleranceNotMet {
        achieved: partial.error / partial.value.norm(),
        requested: tol.rel,
    })?;
    let scale = core.value.norm();
    let budget = tol.abs.max(tol.rel * scale);
    let target = 0.25 * budget;
    let r0 = r;
    while tail_bound(n, decay, r) > target {
        r *= 2.0;
        if r > 1e7 {
            return Err(Error::ToleranceNotMet {
                achieved: tail_bound(n, decay, r) / scale.max(tol.abs),
                requested: tol.rel,
            });
        }
    }
    let mut value = core.value;
    let mut error = core.error;
    if r > r0 {
        let mut pts = quad::graded_breakpoints(r - r0, 1.0, max_width);
        pts.iter_mut().for_each(|p| *p += r0);
        let tail_tol = Tolerance {
            abs: 0.5 * budget,
            rel: 0.0,
        };
        let rest = quad::adaptive(&f, &pts, tail_tol, MAX_PANELS).map_err(|partial| {
            Error::ToleranceNotMet {
                achieved: (error + partial.error) / scale.max(tol.abs),
                requested: tol.rel,
            }
        })?;
        value += rest.value;
        error += rest.error;
    }
    error += tail_bound(n, decay, r);
    Ok(FoldedIntegral { value, error })
}

/// `ν(μ)` with an error estimate.
pub fn nu_estimate(n: u32, mu: f64, rel_tol: f64) -> Result<Estimate> {
    check_mu(n, mu)?;
    check_tol(rel_tol)?;
    let integral = fourier_integral(n, mu, 0.0, 0.0, Tolerance::rel(0.5 * rel_tol))?;
    let pre = (2.0 * std::f64::consts::PI).powi(-(n as i32 + 1)) / factorial(n + 1);
    let value = pre * integral.value.re;
    let est_error = pre * integral.error;
    if est_error > rel_tol * value.abs() {
        return Err(Error::ToleranceNotMet {
            achieved: est_error / value.abs(),
            requested: rel_tol,
        });
    }
    Ok(Estimate { value, est_error })
}

/// `ν(μ) = (2π)^{−(n+1)}/(n+1)! ∫ e^{−μξ}(ξ/sinh ξ)^n dξ`, for `|μ| < n`.
pub fn nu(n: u32, mu: f64, rel_tol: f64) -> Result<f64> {
    nu_estimate(n, mu, rel_tol).map(|e| e.value)
}

/// Evaluates `k_μ(x_0, x', t)` with `r2 = |x'|²`.
pub fn heat_kernel(q: &HeatQuery) -> Result<KernelValue> {
    q.validate()?;
    let kv = kernel_with(q, Tolerance::rel(0.5 * q.rel_tol))?;
    if kv.est_error > q.rel_tol * kv.value.norm() {
        return Err(Error::ToleranceNotMet {
            achieved: kv.est_error / kv.value.norm(),
            requested: q.rel_tol,
        });
    }
    Ok(kv)
}

/// Kernel evaluation under an explicit tolerance, without the final check.
fn kernel_with(q: &HeatQuery, tol: Tolerance) -> Result<KernelValue> {
    let pre = (2.0 * std::f64::consts::PI * q.t).powi(-(q.n as i32 + 1));
    let omega = q.x0 / q.t;
    let beta = q.r2 / (2.0 * q.t);
    let scaled = Tolerance {
        abs: tol.abs / pre,
        rel: tol.rel,
    };
    let integral = fourier_integral(q.n, q.mu, omega, beta, scaled)?;
    Ok(KernelValue {
        value: integral.value * pre,
        est_error: integral.error * pre,
    })
}

/// Fiberwise Mehler kernel `ĥ_0(ξ_0, x', t)`, the partial Fourier transform of
/// `k_0` in `x_0`, with `r2 = |x'|²`.
pub fn fiber_mehler(n: u32, xi0: f64, r2: f64, t: f64) -> f64 {
    let s = (t * xi0).abs();
    let ln = n as f64 * ln_xi_over_sinh(s) - r2 / (2.0 * t) * xi_coth(s);
    (2.0 * std::f64::consts::PI * t).powi(-(n as i32)) * ln.exp()
}

/// Number of GK21 panels of the fixed rule used by [`heat_residual`].
const RESIDUAL_PANELS: usize = 64;

/// Kernel by a fixed panel rule, smooth in `(x_0, r2, t)`.
fn kernel_fixed(n: u32, mu: f64, x0: f64, r2: f64, t: f64) -> Complex64 {
    let decay = n as f64 - mu.abs();
    let r = 60.0 / decay;
    let omega = x0 / t;
    let beta = r2 / (2.0 * t);
    let f = |xi: f64| folded(n, mu, omega, beta, xi);
    let pre = (2.0 * std::f64::consts::PI * t).powi(-(n as i32 + 1));
    quad::fixed(&f, 0.0, r, RESIDUAL_PANELS) * pre
}

/// Central-difference estimate of `|(ℒ_μ + ∂_t) k_μ|` at `(p, t)` with step `h`.
///
/// `X_j` and `X_{n+j}` have straight integral curves (their drift does not
/// depend on the coordinate they move), so `X_j² f` is the second difference
/// of `f` along the field vector.
pub fn heat_residual(n: u32, mu: f64, p: &Point, t: f64, h: f64) -> Result<f64> {
    residual_against(n, mu, mu, p, t, h)
}

/// Applies `ℒ_{op_mu} + ∂_t` to `k_{kernel_mu}`; unequal parameters give a
/// residual that stays away from zero as `h → 0`.
pub fn residual_against(
    n: u32,
    op_mu: f64,
    kernel_mu: f64,
    p: &Point,
    t: f64,
    h: f64,
) -> Result<f64> {
    check_mu(n, kernel_mu)?;
    let nn = n as usize;
    if p.dim() != 2 * nn {
        return Err(Error::DimensionMismatch {
            expected: 2 * nn,
            found: p.dim(),
        });
    }
    if !(t > h) || !(h > 0.0) {
        return Err(Error::OutOfRange("need 0 < h < t".into()));
    }
    let k = |x0: f64, xp: &[f64], t: f64| {
        let r2 = xp.iter().map(|v| v * v).sum();
        kernel_fixed(n, kernel_mu, x0, r2, t)
    };
    let x = p.xprime.as_slice();
    let center = k(p.x0, x, t);
    let mut lap = Complex64::new(0.0, 0.0);
    for j in 0..2 * nn {
        // X_j = ∂_j + x_{n+j}∂_0, X_{n+j} = ∂_{n+j} − x_j∂_0.
        let drift = if j < nn { x[j + nn] } else { -x[j - nn] };
        let mut plus = x.to_vec();
        let mut minus = x.to_vec();
        plus[j] += h;
        minus[j] -= h;
        let fp = k(p.x0 + h * drift, &plus, t);
        let fm = k(p.x0 - h * drift, &minus, t);
        lap += (fp - center * 2.0 + fm) / (h * h);
    }
    let d0 = (k(p.x0 + h, x, t) - k(p.x0 - h, x, t)) / (2.0 * h);
    let dt = (k(p.x0, x, t + h) - k(p.x0, x, t - h)) / (2.0 * h);
    let residual = -lap * 0.5 - Complex64::new(0.0, op_mu) * d0 + dt;
    Ok(residual.norm())
}

/// Mass of `k_0(·, t)` on the box `|x_0| ≤ trunc·t`, `|x'| ≤ trunc·√t`.
///
/// `est_error` adds the quadrature error to the mass outside the box, so a
/// small truncation shows up as a wide error bar around a value below 1.
pub fn total_mass(n: u32, t: f64, trunc: f64, rel_tol: f64) -> Result<Estimate> {
    check_mu(n, 0.0)?;
    check_tol(rel_tol)?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange(format!("t must be positive, got {t}")));
    }
    if !(trunc > 0.0) || !trunc.is_finite() {
        return Err(Error::OutOfRange(format!(
            "trunc must be positive, got {trunc}"
        )));
    }
    let nn = n as i32;
    // |S^{2n−1}| with the substitution s = r², r^{2n−1}dr = ½ s^{n−1} ds.
    let sphere = 2.0 * std::f64::consts::PI.powi(nn) / factorial(n - 1);
    let s_max = trunc * trunc * t;
    let x_max = trunc * t;
    let inner_tol = Tolerance {
        abs: 1e-2 * rel_tol / x_max,
        rel: 0.0,
    };
    let weight_max = 0.5 * sphere * s_max.powi(nn - 1);
    let kernel_tol = Tolerance {
        abs: 1e-2 * inner_tol.abs / (s_max * weight_max),
        rel: 0.0,
    };
    let not_met = |error: f64| Error::ToleranceNotMet {
        achieved: error,
        requested: rel_tol,
    };
    let radial = |x0: f64| -> f64 {
        let g = |s: f64| -> f64 {
            let q = HeatQuery::new(n, 0.0, x0, s, t);
            match kernel_with(&q, kernel_tol) {
                Ok(kv) => 0.5 * sphere * s.powi(nn - 1) * kv.value.re,
                Err(_) => f64::NAN,
            }
        };
        quad::adaptive(&g, &breakpoints(&[0.25 * t], s_max), inner_tol, 4000)
            .map(|r| r.value)
            .unwrap_or(f64::NAN)
    };
    // k_0 is even in x_0.
    let outer = |x0: f64| 2.0 * radial(x0);
    let box_tol = Tolerance {
        abs: 0.1 * rel_tol,
        rel: 0.0,
    };
    let result = quad::adaptive(
        &outer,
        &breakpoints(&[0.5 * t, 2.0 * t], x_max),
        box_tol,
        2000,
    )
    .map_err(|p| not_met(p.error))?;
    if !result.value.is_finite() || !result.error.is_finite() {
        return Err(not_met(f64::INFINITY));
    }
    let outside = (1.0 - box_mass(n, trunc)).max(0.0);
    let est_error = result.error + outside;
    Ok(Estimate {
        value: result.value,
        est_error,
    })
}

/// `0`, the interior points below `end`, then `end`.
fn breakpoints(interior: &[f64], end: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    pts.extend(interior.iter().copied().filter(|&p| p < end));
    pts.push(end);
    pts
}

/// Semi-analytic mass of `k_0` on the box: integrating the kernel in `x_0`
/// over `[−Tt, Tt]` and radially over `|x'|² ≤ T²t` under the `ξ` integral
/// leaves `(1/π)∫ sech^n ξ · sin(Tξ)/ξ · P(n, T²ξ/(2 tanh ξ)) dξ`.
pub fn box_mass(n: u32, trunc: f64) -> f64 {
    let tt = trunc;
    let f = |xi: f64| -> f64 {
        let sech = if xi > 350.0 { 0.0 } else { 1.0 / xi.cosh() };
        let sinc = if xi < 1e-8 { tt } else { (tt * xi).sin() / xi };
        let radial = gamma_lr(n as f64, 0.5 * tt * tt * xi_coth(xi));
        2.0 / std::f64::consts::PI * sech.powi(n as i32) * sinc * radial
    };
    let max_width = std::f64::consts::FRAC_PI_4 / tt.max(1.0);
    let pts = quad::graded_breakpoints(40.0 + n as f64 * 5.0, 0.25, max_width);
    quad::adaptive(
        &f,
        &pts,
        Tolerance {
            abs: 1e-15,
            rel: 1e-13,
        },
        100_000,
    )
    .unwrap_or_else(|p| p)
    .value
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn nu_closed_forms() {
        assert_relative_eq!(nu(1, 0.0, 1e-12).unwrap(), 0.0625, max_relative = 1e-12);
        assert_relative_eq!(
            nu(2, 0.0, 1e-12).unwrap(),
            1.0 / (144.0 * std::f64::consts::PI),
            max_relative = 1e-12
        );
        // n = 1 has ∫ e^{−μξ} ξ/sinh ξ dξ = π²/(2cos²(πμ/2)).
        for mu in [0.3, -0.5, 0.9] {
            let c = (std::f64::consts::PI * mu / 2.0).cos();
            let exact = std::f64::consts::PI.powi(2)
                / (2.0 * c * c)
                / (4.0 * std::f64::consts::PI.powi(2))
                / 2.0;
            assert_relative_eq!(nu(1, mu, 1e-12).unwrap(), exact, max_relative = 1e-11);
        }
    }

    #[test]
    fn nu_rejects_divergent() {
        assert_eq!(
            nu(1, 1.0, 1e-10),
            Err(Error::DivergentIntegral { n: 1, mu: 1.0 })
        );
        assert!(matches!(
            nu(2, -2.5, 1e-10),
            Err(Error::DivergentIntegral { .. })
        ));
    }

    #[test]
    fn kernel_at_origin() {
        let kv = heat_kernel(&HeatQuery::new(1, 0.0, 0.0, 0.0, 1.0)).unwrap();
        assert_relative_eq!(kv.value.re, 0.125, max_relative = 1e-12);
        assert_eq!(kv.value.im, 0.0);
        assert!(kv.est_error <= 1e-8 * 0.125);
    }

    #[test]
    fn kernel_rejects_bad_time() {
        let q = HeatQuery::new(1, 0.0, 0.0, 0.0, 0.0);
        assert!(matches!(heat_kernel(&q), Err(Error::OutOfRange(_))));
    }

    #[test]
    fn kernel_hermitian_in_x0() {
        let a = heat_kernel(&HeatQuery::new(2, 0.7, 0.4, 0.3, 0.9))
            .unwrap()
            .value;
        let b = heat_kernel(&HeatQuery::new(2, 0.7, -0.4, 0.3, 0.9))
            .unwrap()
            .value;
        assert!((a - b.conj()).norm() < 1e-9 * a.norm());
    }

    #[test]
    fn high_frequency_guard() {
        let q = HeatQuery::new(1, 0.0, 2e4, 0.0, 1.0);
        assert!(matches!(
            heat_kernel(&q),
            Err(Error::ToleranceNotMet { .. })
        ));
        // Phase-limited panels still resolve the exponentially small value in
        // absolute terms; relative accuracy is out of reach.
        let q = HeatQuery::new(1, 0.0, 80.0, 0.0, 1.0);
        assert!(matches!(
            heat_kernel(&q),
            Err(Error::ToleranceNotMet { .. })
        ));
        let kv = kernel_with(
            &q,
            Tolerance {
                abs: 1e-14,
                rel: 0.0,
            },
        )
        .unwrap();
        assert!(kv.value.norm() < 1e-14);
    }

    #[test]
    fn fiber_limits() {
        let v = fiber_mehler(2, 0.0, 0.5, 0.8);
        let exact = (2.0 * std::f64::consts::PI * 0.8f64).powi(-2) * (-0.5f64 / 1.6).exp();
        assert_relative_eq!(v, exact, max_relative = 1e-14);
        // Large |ξ_0| stays finite.
        assert!(fiber_mehler(3, 1e3, 1.0, 1.0) >= 0.0);
    }

    #[test]
    fn upper_gamma_small_cases() {
        assert_relative_eq!(upper_gamma_int(0, 2.0), (-2.0f64).exp());
        assert_relative_eq!(
            upper_gamma_int(2, 1.5),
            (-1.5f64).exp() * (1.0 + 1.5 + 1.125) * 2.0
        );
    }

    #[test]
    fn box_mass_tends_to_one() {
        assert!(box_mass(1, 1.0) < 0.9);
        // The x_0 marginal decays like e^{−πT/2}.
        let deficit = 1.0 - box_mass(1, 10.0);
        assert!(deficit > 0.0 && deficit < 1e-6);
        assert!((box_mass(1, 22.0) - 1.0).abs() < 1e-13);
        assert!((box_mass(2, 22.0) - 1.0).abs() < 1e-13);
    }
}
