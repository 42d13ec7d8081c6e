//! Pointwise error norms, the two-sample KS statistic and kernel density
//! estimates.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::sort_floats;
use crate::model::ParamDomain;
use crate::rng::{self, label};
use crate::{Error, Result};

/// The seeded point set shared by the error norms and the KS statistic
/// (physical coordinates).
pub fn error_points(domain: &ParamDomain, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut r = rng::stream(seed, &[label::ERROR_POINTS]);
    rng::unit_points(&mut r, count, domain.dim())
        .iter()
        .map(|u| domain.from_unit(u))
        .collect()
}

/// Relative discrete errors of `values` against `reference` at the same
/// points:
///
/// ```text
/// L2   = sqrt(mean (S - G)^2) / sqrt(mean G^2)
/// Linf = max |S - G| / max G
/// ```
///
/// A component is `None` when its denominator is not positive.
pub fn discrete_errors(values: &[f64], reference: &[f64]) -> Result<(Option<f64>, Option<f64>)> {
    if values.len() != reference.len() || values.is_empty() {
        return Err(Error::Argument(alloc::format!(
            "need equally many values and reference values, got {} and {}",
            values.len(),
            reference.len()
        )));
    }
    let n = values.len() as f64;
    let mut sq = 0.0;
    let mut ref_sq = 0.0;
    let mut max_diff: f64 = 0.0;
    let mut max_ref = f64::NEG_INFINITY;
    for (s, g) in values.iter().zip(reference) {
        let d = s - g;
        sq += d * d;
        ref_sq += g * g;
        max_diff = max_diff.max(d.abs());
        max_ref = max_ref.max(*g);
    }
    let l2 = (ref_sq > 0.0).then(|| libm::sqrt(sq / n) / libm::sqrt(ref_sq / n));
    let linf = (max_ref > 0.0).then(|| max_diff / max_ref);
    Ok((l2, linf))
}

/// `sup_t |F_a(t) - F_b(t)|` with right-continuous empirical CDFs, taken
/// over all sample values.
pub fn ks_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Argument("KS statistic needs two nonempty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::Numeric("NaN sample".into()));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    sort_floats(&mut a);
    sort_floats(&mut b);
    let (na, nb) = (a.len() as u128, b.len() as u128);
    let (mut i, mut j) = (0usize, 0usize);
    // |i/na - j/nb| kept as the integer numerator over na·nb.
    let mut sup: u128 = 0;
    while i < a.len() || j < b.len() {
        let t = match (a.get(i), b.get(j)) {
            (Some(&x), Some(&y)) => x.min(y),
            (Some(&x), None) => x,
            (None, Some(&y)) => y,
            (None, None) => unreachable!(),
        };
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        sup = sup.max((i as u128 * nb).abs_diff(j as u128 * na));
    }
    Ok(sup as f64 / (na * nb) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Support {
    RealLine,
    /// Estimate on `log x` and map back with the Jacobian `1/x`.
    Positive,
}

/// Normal-reference (Silverman) bandwidth `1.06 σ n^(-1/5)`.
pub fn silverman_bandwidth(samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
    1.06 * libm::sqrt(var) * libm::pow(n, -0.2)
}

/// Gaussian kernel density estimate of `samples` at each point of `grid`.
pub fn kde_pdf(samples: &[f64], grid: &[f64], support: Support) -> Result<Vec<f64>> {
    if samples.len() < 2 {
        return Err(Error::Argument("KDE needs at least two samples".into()));
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numeric("non-finite sample".into()));
    }
    let data: Vec<f64> = match support {
        Support::RealLine => samples.to_vec(),
        Support::Positive => {
            if samples.iter().any(|&v| v <= 0.0) {
                return Err(Error::Argument(
                    "positive-support KDE needs strictly positive samples".into(),
                ));
            }
            samples.iter().map(|&v| libm::log(v)).collect()
        }
    };
    let h = silverman_bandwidth(&data);
    if !(h > 0.0) {
        return Err(Error::Numeric("samples are constant; bandwidth is zero".into()));
    }
    let norm = 1.0 / (data.len() as f64 * h * libm::sqrt(2.0 * PI));
    let density = |x: f64| -> f64 {
        data.iter()
            .map(|d| {
                let z = (x - d) / h;
                libm::exp(-0.5 * z * z)
            })
            .sum::<f64>()
            * norm
    };
    Ok(grid
        .iter()
        .map(|&x| match support {
            Support::RealLine => density(x),
            Support::Positive if x > 0.0 => density(libm::log(x)) / x,
            Support::Positive => 0.0,
        })
        .collect())
}
