//! Reference computations shared by the integration tests. None of them
//! call into the code paths they are used to check.

#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn ln_sinh(x: f64) -> f64 {
    x + (-(-2.0 * x).exp()).ln_1p() - std::f64::consts::LN_2
}

/// `ν(μ) = (2π)^{−(n+1)}/(n+1)! ∫_ℝ e^{−μξ}(ξ/sinh ξ)^n dξ` by the plain
/// trapezoid rule on the real line. The integrand is analytic in
/// `|Im ξ| < π`, so the error is of order `e^{−2π²/h}`.
pub fn nu_trapezoid(n: u32, mu: f64) -> f64 {
    assert!(mu.abs() < n as f64);
    let h = 0.02;
    let decay = n as f64 - mu.abs();
    let cut = 45.0 / decay + 20.0;
    let steps = (cut / h).ceil() as i64;
    let f = |x: f64| -> f64 {
        if x == 0.0 {
            return 1.0;
        }
        let ax = x.abs();
        (n as f64 * (ax.ln() - ln_sinh(ax)) - mu * x).exp()
    };
    let mut sum = 0.0;
    for i in -steps..=steps {
        sum += f(i as f64 * h);
    }
    let fact: f64 = (1..=n + 1).map(f64::from).product();
    sum * h / (2.0 * std::f64::consts::PI).powi(n as i32 + 1) / fact
}

/// Membership in `±(threshold + Σ α_j g_j)` when `full_rank`, otherwise in
/// `|x| ≥ threshold`; found by exhaustive search over `α`.
pub fn in_singular_set(x: f64, threshold: f64, generators: &[f64], full_rank: bool) -> bool {
    let target = x.abs() - threshold;
    if !full_rank {
        return target >= -1e-12;
    }
    fn search(rest: f64, gens: &[f64]) -> bool {
        if rest.abs() < 1e-12 {
            return true;
        }
        if rest < 0.0 || gens.is_empty() {
            return false;
        }
        let mut r = rest;
        while r > -1e-12 {
            if search(r, &gens[1..]) {
                return true;
            }
            r -= gens[0];
        }
        false
    }
    search(target, generators)
}

/// Levi signs: `r − κ` positive, `κ` negative, `n − r` zero.
pub fn levi_signs(n: usize, kappa: usize, r: usize) -> Vec<i64> {
    (0..n)
        .map(|j| {
            if j < r - kappa {
                1
            } else if j < r {
                -1
            } else {
                0
            }
        })
        .collect()
}

/// `μ_K = Σ_{j∈K} ε_j − Σ_{j∉K} ε_j` for the subset encoded by `mask`.
pub fn mu_subset(eps: &[i64], mask: u32) -> i64 {
    eps.iter()
        .enumerate()
        .map(|(j, e)| if mask >> j & 1 == 1 { *e } else { -*e })
        .sum()
}

fn form_fails(mu: i64, r: usize, full_rank: bool) -> bool {
    in_singular_set(mu as f64, r as f64, &vec![2.0; r], full_rank)
}

/// `Y(q)`: no `(0,q)`-form component `e_K` has `μ_K` in the singular set.
pub fn brute_y(n: usize, kappa: usize, r: usize, q: usize) -> bool {
    let eps = levi_signs(n, kappa, r);
    !(0..1u32 << n)
        .filter(|m| m.count_ones() as usize == q)
        .any(|m| form_fails(mu_subset(&eps, m), r, r == n))
}

/// `Y(p,q)`: no `e_J ∧ ē_K` has `(μ_K − μ_J)/2` in the singular set.
pub fn brute_ypq(n: usize, kappa: usize, r: usize, p: usize, q: usize) -> bool {
    let eps = levi_signs(n, kappa, r);
    let js: Vec<i64> = (0..1u32 << n)
        .filter(|m| m.count_ones() as usize == p)
        .map(|m| mu_subset(&eps, m))
        .collect();
    let ks: Vec<i64> = (0..1u32 << n)
        .filter(|m| m.count_ones() as usize == q)
        .map(|m| mu_subset(&eps, m))
        .collect();
    !js.iter().any(|mj| {
        ks.iter().any(|mk| {
            let diff = mk - mj;
            diff % 2 == 0 && form_fails(diff / 2, r, r == n)
        })
    })
}

/// `X(k)` on `d` horizontal directions with Levi rank `2r`: a `k`-form
/// `e_I` picks `|I ∩ Z|` holomorphic and `|I ∩ Z̄|` antiholomorphic legs.
pub fn brute_x(d: usize, rank: usize, k: usize) -> bool {
    let r = rank / 2;
    let holo = (1u32 << r) - 1;
    let anti = holo << r;
    !(0..1u32 << d)
        .filter(|m| m.count_ones() as usize == k)
        .any(|m| {
            let mu = (m & holo).count_ones() as i64 - (m & anti).count_ones() as i64;
            form_fails(mu, r, rank == d)
        })
}

/// α, β, γ summed over pairs of subsets, `None` when a term diverges.
pub fn subset_alpha(n: usize, kappa: usize, p: usize, q: usize) -> Option<f64> {
    let eps = levi_signs(n, kappa, n);
    let mut total = 0.0;
    for _ in (0..1u32 << n).filter(|m| m.count_ones() as usize == p) {
        for k in (0..1u32 << n).filter(|m| m.count_ones() as usize == q) {
            let mu = mu_subset(&eps, k);
            if mu.unsigned_abs() as usize >= n {
                return None;
            }
            total += nu_trapezoid(n as u32, mu as f64);
        }
    }
    Some(total * 2f64.powi(-(n as i32 + 1)))
}

pub fn subset_beta(n: usize, kappa: usize, p: usize, q: usize) -> Option<f64> {
    let eps = levi_signs(n, kappa, n);
    let mut total = 0.0;
    for j in (0..1u32 << n).filter(|m| m.count_ones() as usize == p) {
        for k in (0..1u32 << n).filter(|m| m.count_ones() as usize == q) {
            let mu = (mu_subset(&eps, k) - mu_subset(&eps, j)) / 2;
            if mu.unsigned_abs() as usize >= n {
                return None;
            }
            total += nu_trapezoid(n as u32, mu as f64);
        }
    }
    Some(total)
}

pub fn subset_gamma(n: usize, k: usize) -> Option<f64> {
    let mut total = 0.0;
    for j in 0..1u32 << n {
        for l in 0..1u32 << n {
            let (a, b) = (j.count_ones() as i64, l.count_ones() as i64);
            if (a + b) as usize != k {
                continue;
            }
            if (a - b).unsigned_abs() as usize >= n {
                return None;
            }
            total += nu_trapezoid(n as u32, (a - b) as f64);
        }
    }
    Some(total * 2f64.powi(-(n as i32)))
}
