use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad::Neumaier;

/// Sorted eigenvalues with multiplicities.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    multiplicities: Vec<u64>,
    /// `cumulative[i]` = total multiplicity of the first `i + 1` entries.
    cumulative: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    eigenvalue: f64,
    multiplicity: u64,
}

impl Spectrum {
    pub fn new(eigenvalues: Vec<f64>, multiplicities: Vec<u64>) -> Result<Self> {
        if eigenvalues.len() != multiplicities.len() {
            return Err(Error::DimensionMismatch {
                expected: eigenvalues.len(),
                found: multiplicities.len(),
            });
        }
        if eigenvalues.iter().any(|e| !e.is_finite()) {
            return Err(Error::OutOfRange("eigenvalues must be finite".into()));
        }
        if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::OutOfRange(
                "eigenvalues must be nondecreasing".into(),
            ));
        }
        if multiplicities.contains(&0) {
            return Err(Error::OutOfRange(
                "multiplicities must be at least 1".into(),
            ));
        }
        let cumulative = multiplicities
            .iter()
            .scan(0u64, |acc, &m| {
                *acc += m;
                Some(*acc)
            })
            .collect();
        Ok(Self {
            eigenvalues,
            multiplicities,
            cumulative,
        })
    }

    /// Sorts `values` and merges neighbours closer than `merge_tol·max(1, |λ|)`.
    pub fn from_values(mut values: Vec<f64>, merge_tol: f64) -> Result<Self> {
        if values.iter().any(|e| !e.is_finite()) {
            return Err(Error::OutOfRange("eigenvalues must be finite".into()));
        }
        values.sort_by(f64::total_cmp);
        let mut eigs: Vec<f64> = Vec::new();
        let mut mults: Vec<u64> = Vec::new();
        for v in values {
            match eigs.last() {
                Some(&last) if (v - last).abs() <= merge_tol * last.abs().max(1.0) => {
                    *mults.last_mut().unwrap() += 1;
                }
                _ => {
                    eigs.push(v);
                    mults.push(1);
                }
            }
        }
        Self::new(eigs, mults)
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn multiplicities(&self) -> &[u64] {
        &self.multiplicities
    }

    /// Number of distinct eigenvalues.
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// Eigenvalue count with multiplicity.
    pub fn total(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    /// The lowest `count` eigenvalues with multiplicity; the last multiplicity
    /// is cut if needed.
    pub fn lowest(&self, count: u64) -> Spectrum {
        let mut eigs = Vec::new();
        let mut mults = Vec::new();
        let mut left = count;
        for (&e, &m) in self.eigenvalues.iter().zip(&self.multiplicities) {
            if left == 0 {
                break;
            }
            eigs.push(e);
            mults.push(m.min(left));
            left -= m.min(left);
        }
        Spectrum::new(eigs, mults).expect("sub-spectrum keeps invariants")
    }

    /// Eigenvalues repeated by multiplicity.
    pub fn expanded(&self) -> Vec<f64> {
        self.eigenvalues
            .iter()
            .zip(&self.multiplicities)
            .flat_map(|(&e, &m)| std::iter::repeat_n(e, m as usize))
            .collect()
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for (&eigenvalue, &multiplicity) in self.eigenvalues.iter().zip(&self.multiplicities) {
            wr.serialize(Row {
                eigenvalue,
                multiplicity,
            })
            .map_err(|e| Error::Input(e.to_string()))?;
        }
        wr.flush().map_err(|e| Error::Input(e.to_string()))
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let mut eigs = Vec::new();
        let mut mults = Vec::new();
        for row in rd.deserialize() {
            let row: Row = row.map_err(|e| Error::Input(e.to_string()))?;
            eigs.push(row.eigenvalue);
            mults.push(row.multiplicity);
        }
        Self::new(eigs, mults)
    }
}

/// `Tr e^{−tP} = Σ m_k e^{−tλ_k}`.
pub fn heat_trace(sp: &Spectrum, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::OutOfRange(format!("t must be positive, got {t}")));
    }
    let mut acc = Neumaier::new();
    for (&e, &m) in sp.eigenvalues.iter().zip(&sp.multiplicities) {
        acc.add(m as f64 * (-t * e).exp());
    }
    Ok(acc.total())
}

/// `N(λ)`: eigenvalues `≤ λ`, counted with multiplicity.
pub fn counting_function(sp: &Spectrum, lambda: f64) -> u64 {
    let idx = sp.eigenvalues.partition_point(|&e| e <= lambda);
    if idx == 0 {
        0
    } else {
        sp.cumulative[idx - 1]
    }
}

/// Median of `N(λ)/λ^a` over `samples` equispaced `λ` in `[λ_lo, λ_hi]`, where
/// the endpoints are the eigenvalues at 0-based positions `lo`, `hi` counted
/// with multiplicity.
pub fn median_weyl_ratio(
    sp: &Spectrum,
    lo: usize,
    hi: usize,
    a: f64,
    samples: usize,
) -> Result<f64> {
    let all = sp.expanded();
    if !(lo < hi && hi < all.len()) || samples < 2 {
        return Err(Error::OutOfRange(format!(
            "window [{lo}, {hi}] must be increasing and inside the {} eigenvalues",
            all.len()
        )));
    }
    let (l0, l1) = (all[lo], all[hi]);
    if !(l0 > 0.0) {
        return Err(Error::OutOfRange(
            "window must start at a positive eigenvalue".into(),
        ));
    }
    let mut ratios: Vec<f64> = (0..samples)
        .map(|i| {
            let lam = l0 + (l1 - l0) * i as f64 / (samples - 1) as f64;
            counting_function(sp, lam) as f64 / lam.powf(a)
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let mid = samples / 2;
    Ok(if samples % 2 == 1 {
        ratios[mid]
    } else {
        0.5 * (ratios[mid - 1] + ratios[mid])
    })
}

/// `λ_k = ((k+1)/ν_0)^{1/a}`, whose counting function satisfies `N(λ)/λ^a → ν_0`.
pub fn synthetic_spectrum(a: f64, nu0: f64, count: usize) -> Result<Spectrum> {
    if !(a > 0.0) || !(nu0 > 0.0) || count == 0 {
        return Err(Error::OutOfRange(
            "need exponent > 0, nu0 > 0 and count >= 1".into(),
        ));
    }
    let eigs = (0..count)
        .map(|k| ((k + 1) as f64 / nu0).powf(1.0 / a))
        .collect();
    Spectrum::new(eigs, vec![1; count])
}
