use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use nalgebra::DMatrix;

use super::surrogate::{Solver, SrbfSurrogate, TauSamples};
use super::training::TrainingSet;
use crate::math::euclidean_distance;
use crate::{Error, Result};

/// Leave-one-out RMSE of the `k`-center surrogate.
///
/// Each fold holds `J − 1` points, so it uses `min(k, J − 1)` centers. When
/// that is every fold point the folds interpolate and the held-out errors
/// come in closed form from the inverse of the full interpolation matrix
/// (`e_i = c_i / (A⁻¹)_ii`, `c = A⁻¹ b`).
pub fn loocv_rmse(training: &TrainingSet, k: usize, taus: &TauSamples, solver: Solver) -> Result<f64> {
    let j = training.len();
    if j < 2 {
        return Err(Error::Argument(format!("LOOCV needs at least 2 points, got {j}")));
    }
    if k == 0 || k > j {
        return Err(Error::Argument(format!("center count {k} outside 1..={j}")));
    }
    let kf = k.min(j - 1);
    let mut errors = alloc::vec![0.0; j];
    if kf == j - 1 {
        let pts = training.points();
        let dist = DMatrix::from_fn(j, j, |a, b| euclidean_distance(&pts[a], &pts[b]));
        let b = nalgebra::DVector::from_column_slice(training.values());
        for &tau in taus.values() {
            let a = dist.map(|d| if d == 0.0 { 0.0 } else { libm::pow(d, tau) });
            let inv = a
                .try_inverse()
                .ok_or_else(|| Error::Structure("singular interpolation matrix".into()))?;
            let c = &inv * &b;
            for (i, e) in errors.iter_mut().enumerate() {
                let d = inv[(i, i)];
                if d == 0.0 || !d.is_finite() {
                    return Err(Error::Structure(format!(
                        "leave-one-out fold {i} has a singular interpolation matrix"
                    )));
                }
                *e += c[i] / d;
            }
        }
        let n = taus.len() as f64;
        errors.iter_mut().for_each(|e| *e /= n);
    } else {
        for (i, e) in errors.iter_mut().enumerate() {
            let fold = training.without(i);
            let s = SrbfSurrogate::fit(&fold, kf, taus, solver)?;
            *e = training.values()[i] - s.predict(&training.points()[i]);
        }
    }
    let mse = errors.iter().map(|e| e * e).sum::<f64>() / j as f64;
    Ok(libm::sqrt(mse))
}

#[derive(Debug, Clone, PartialEq)]
pub struct LoocvChoice {
    pub k_star: usize,
    /// `(K, RMSE)` per candidate, ascending in `K`; empty for a single
    /// candidate.
    pub scores: Vec<(usize, f64)>,
}

/// The candidate with the smallest LOOCV RMSE; ties go to the smaller `K`.
pub fn loocv_select_k(
    training: &TrainingSet,
    candidates: &[usize],
    taus: &TauSamples,
    solver: Solver,
) -> Result<LoocvChoice> {
    let j = training.len();
    if j < 2 {
        return Err(Error::Argument(format!("LOOCV needs at least 2 points, got {j}")));
    }
    let set: BTreeSet<usize> = candidates.iter().copied().collect();
    if set.is_empty() || set.iter().any(|&k| k == 0 || k > j) {
        return Err(Error::Argument(format!("candidates {candidates:?} not a nonempty subset of 1..={j}")));
    }
    if set.len() == 1 {
        return Ok(LoocvChoice {
            k_star: *set.first().unwrap(),
            scores: Vec::new(),
        });
    }
    let mut scores = Vec::with_capacity(set.len());
    let mut best = (0, f64::INFINITY);
    for &k in &set {
        let r = loocv_rmse(training, k, taus, solver)?;
        if r < best.1 {
            best = (k, r);
        }
        scores.push((k, r));
    }
    if best.0 == 0 {
        return Err(Error::Numeric("every LOOCV score is NaN".into()));
    }
    Ok(LoocvChoice {
        k_star: best.0,
        scores,
    })
}
