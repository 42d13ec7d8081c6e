//! Moments by sampling and by quadrature.

use alloc::format;
use alloc::vec::Vec;

use crate::misc::{level_to_knots, MiscApproximation, TensorGrid, TensorInterpolant};
use crate::model::{FidelityModel, ParamDomain};
use crate::rng::{self, label};
use crate::{Error, Result};

/// Mean, variance and standardized third and fourth central moments.
///
/// Skewness and kurtosis are `None` when the variance is zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentSet {
    pub mean: f64,
    pub variance: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
    /// The raw moments gave a negative variance that was clipped to zero.
    pub clipped: bool,
}

impl MomentSet {
    /// The four moments in order, undefined ones as `None`.
    pub fn as_array(&self) -> [Option<f64>; 4] {
        [Some(self.mean), Some(self.variance), self.skewness, self.kurtosis]
    }

    /// From the mean and the central moments `μ2, μ3, μ4`.
    pub fn from_central(mean: f64, mu2: f64, mu3: f64, mu4: f64) -> Self {
        let scale = mu2.abs().max(mean * mean);
        let (variance, clipped) = if mu2 < -1e-12 * scale.max(1e-300) {
            (0.0, true)
        } else if mu2 <= 1e-14 * scale {
            // Cancellation noise around a genuinely zero variance.
            (0.0, false)
        } else {
            (mu2, false)
        };
        let (skewness, kurtosis) = if variance > 0.0 {
            (
                Some(mu3 / (variance * libm::sqrt(variance))),
                Some(mu4 / (variance * variance)),
            )
        } else {
            (None, None)
        };
        Self {
            mean,
            variance,
            skewness,
            kurtosis,
            clipped,
        }
    }

    /// From raw moments `E[G^r]`, `r = 1..=4`.
    pub fn from_raw(raw: [f64; 4]) -> Self {
        let [m1, m2, m3, m4] = raw;
        let mu2 = m2 - m1 * m1;
        let mu3 = m3 - 3.0 * m1 * m2 + 2.0 * m1 * m1 * m1;
        let mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
        let mut s = Self::from_central(m1, mu2, mu3, mu4);
        // μ2 is computed with large cancellation here; treat it as zero in
        // proportion to the second raw moment rather than to μ2 itself.
        if s.variance > 0.0 && s.variance <= 1e-14 * m2.abs() {
            s = Self::from_central(m1, 0.0, 0.0, 0.0);
        }
        s
    }
}

/// Population (`1/n`) sample moments, computed around the sample mean.
pub fn moments_from_samples(values: &[f64]) -> Result<MomentSet> {
    if values.is_empty() {
        return Err(Error::Argument("no samples".into()));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!("non-finite sample {v}")));
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
    for v in values {
        let d = v - mean;
        let d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    Ok(MomentSet::from_central(mean, m2 / n, m3 / n, m4 / n))
}

/// Raw moments `E[G^r]` of a collocation surrogate by its own quadrature.
pub fn raw_moments_by_misc_quadrature(approx: &MiscApproximation) -> Result<[f64; 4]> {
    let mut raw = [0.0; 4];
    for (r, m) in raw.iter_mut().enumerate() {
        *m = approx.quadrature(r + 1)?;
    }
    Ok(raw)
}

pub fn moments_by_misc_quadrature(approx: &MiscApproximation) -> Result<MomentSet> {
    Ok(MomentSet::from_raw(raw_moments_by_misc_quadrature(approx)?))
}

/// Moments of an arbitrary function of `y` by tensor CC quadrature with
/// `order` points per dimension.
pub fn moments_by_tensor_quadrature(
    domain: &ParamDomain,
    order: usize,
    mut f: impl FnMut(&[Vec<f64>]) -> Result<Vec<f64>>,
) -> Result<MomentSet> {
    let beta = order_to_level(order)?;
    let grid = TensorGrid::new(domain, &alloc::vec![beta; domain.dim()])?;
    let values = f(&grid.points)?;
    if values.len() != grid.len() {
        return Err(Error::Argument("evaluator returned the wrong number of values".into()));
    }
    let mut raw = [0.0; 4];
    for (v, w) in values.iter().zip(&grid.weights) {
        let mut p = 1.0;
        for m in raw.iter_mut() {
            p *= v;
            *m += p * w;
        }
    }
    Ok(MomentSet::from_raw(raw))
}

fn order_to_level(order: usize) -> Result<usize> {
    (1..=20)
        .find(|&b| level_to_knots(b) == order)
        .ok_or_else(|| Error::Argument(format!("{order} points do not form a nested CC rule")))
}

/// Ground truth: the tensor CC interpolant of one noiseless fidelity and its
/// quadrature moments.
#[derive(Debug, Clone)]
pub struct Reference {
    pub level: usize,
    pub order: usize,
    pub interpolant: TensorInterpolant,
    pub moments: MomentSet,
}

impl Reference {
    /// Evaluates `G_level` without noise or cost accounting on the
    /// `order^N` tensor grid.
    pub fn build(model: &FidelityModel, level: usize, order: usize) -> Result<Self> {
        let beta = order_to_level(order)?;
        let domain = model.domain().clone();
        let betas = alloc::vec![beta; domain.dim()];
        let grid = TensorGrid::new(&domain, &betas)?;
        let values = grid
            .points
            .iter()
            .map(|y| model.exact_value(level, y))
            .collect::<Result<Vec<_>>>()?;
        let interpolant = TensorInterpolant::from_values(domain, level, &betas, values)?;
        let moments = reference_moments_of(&interpolant)?;
        Ok(Self {
            level,
            order,
            interpolant,
            moments,
        })
    }
}

fn reference_moments_of(u: &TensorInterpolant) -> Result<MomentSet> {
    let mut raw = [0.0; 4];
    for (r, m) in raw.iter_mut().enumerate() {
        *m = u.quadrature(r + 1)?;
    }
    Ok(MomentSet::from_raw(raw))
}

/// Tensor CC quadrature moments of `G_level` with `order` points per
/// dimension.
pub fn reference_moments(model: &FidelityModel, level: usize, order: usize) -> Result<MomentSet> {
    Ok(Reference::build(model, level, order)?.moments)
}

/// `|est_i - ref_i| / |ref_i|`; `None` where the reference moment is zero or
/// either moment is undefined.
pub fn relative_moment_errors(est: &MomentSet, reference: &MomentSet) -> [Option<f64>; 4] {
    let e = est.as_array();
    let r = reference.as_array();
    core::array::from_fn(|i| match (e[i], r[i]) {
        (Some(a), Some(b)) if b != 0.0 => Some((a - b).abs() / b.abs()),
        _ => None,
    })
}

/// Monte Carlo protocol: the moments are averaged over `repetitions`
/// independent sets of `samples` uniform points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloProtocol {
    pub repetitions: usize,
    pub samples: usize,
    pub seed: u64,
}

impl Default for MonteCarloProtocol {
    fn default() -> Self {
        Self {
            repetitions: 10,
            samples: 10_000,
            seed: 0,
        }
    }
}

impl MonteCarloProtocol {
    /// The points of repetition `rep` (physical coordinates).
    pub fn points(&self, domain: &ParamDomain, rep: usize) -> Vec<Vec<f64>> {
        let mut r = rng::stream(self.seed, &[label::MONTE_CARLO, rep as u64]);
        rng::unit_points(&mut r, self.samples, domain.dim())
            .iter()
            .map(|u| domain.from_unit(u))
            .collect()
    }

    /// Averaged sample moments of `f`, which maps a batch of points to
    /// values.
    pub fn moments(
        &self,
        domain: &ParamDomain,
        mut f: impl FnMut(&[Vec<f64>]) -> Result<Vec<f64>>,
    ) -> Result<MomentSet> {
        if self.repetitions == 0 || self.samples == 0 {
            return Err(Error::Argument("Monte Carlo needs repetitions and samples".into()));
        }
        let sets = (0..self.repetitions)
            .map(|rep| moments_from_samples(&f(&self.points(domain, rep))?))
            .collect::<Result<Vec<_>>>()?;
        Ok(average_moments(&sets))
    }
}

/// Componentwise average; an undefined component in any set makes the
/// average undefined.
pub fn average_moments(sets: &[MomentSet]) -> MomentSet {
    let n = sets.len() as f64;
    let avg = |get: &dyn Fn(&MomentSet) -> Option<f64>| -> Option<f64> {
        let mut acc = 0.0;
        for s in sets {
            acc += get(s)?;
        }
        Some(acc / n)
    };
    MomentSet {
        mean: avg(&|s| Some(s.mean)).unwrap_or(f64::NAN),
        variance: avg(&|s| Some(s.variance)).unwrap_or(f64::NAN),
        skewness: avg(&|s| s.skewness),
        kurtosis: avg(&|s| s.kurtosis),
        clipped: sets.iter().any(|s| s.clipped),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_samples_have_undefined_shape() {
        let m = moments_from_samples(&[0.3; 4]).unwrap();
        assert_eq!(m.mean, 0.3);
        assert_eq!(m.variance, 0.0);
        assert_eq!(m.skewness, None);
        assert_eq!(m.kurtosis, None);
        let q = MomentSet::from_raw([0.3, 0.09, 0.027, 0.0081]);
        assert_eq!(q.variance, 0.0);
        assert_eq!(q.kurtosis, None);
    }

    #[test]
    fn two_point_population_moments() {
        let m = moments_from_samples(&[-1.0, 1.0]).unwrap();
        assert_eq!(m.mean, 0.0);
        assert_eq!(m.variance, 1.0);
        assert_eq!(m.skewness, Some(0.0));
        assert_eq!(m.kurtosis, Some(1.0));
    }

    #[test]
    fn raw_and_central_agree() {
        let v = [0.1, 0.5, 0.7, 2.0, 3.5];
        let a = moments_from_samples(&v).unwrap();
        let n = v.len() as f64;
        let raw: [f64; 4] = core::array::from_fn(|r| v.iter().map(|x| x.powi(r as i32 + 1)).sum::<f64>() / n);
        let b = MomentSet::from_raw(raw);
        assert!((a.mean - b.mean).abs() < 1e-14);
        assert!((a.variance - b.variance).abs() < 1e-13);
        assert!((a.skewness.unwrap() - b.skewness.unwrap()).abs() < 1e-12);
        assert!((a.kurtosis.unwrap() - b.kurtosis.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn negative_variance_is_clipped_and_flagged() {
        let m = MomentSet::from_raw([1.0, 0.9, 1.0, 1.0]);
        assert!(m.clipped);
        assert_eq!(m.variance, 0.0);
    }

    #[test]
    fn relative_errors() {
        let r = MomentSet::from_central(1.0, 2.0, 1.0, 12.0);
        let mut e = r;
        e.mean = 1.1;
        let err = relative_moment_errors(&e, &r);
        assert!((err[0].unwrap() - 0.1).abs() < 1e-15);
        assert_eq!(err[1], Some(0.0));
        let z = MomentSet::from_central(0.0, 1.0, 0.0, 3.0);
        assert_eq!(relative_moment_errors(&z, &z)[0], None);
        assert_eq!(relative_moment_errors(&z, &z)[2], None);
    }

    #[test]
    fn linear_sum_reference() {
        let m = FidelityModel::new(
            ParamDomain::unit(2),
            crate::model::FnFamily::new(1, |_: usize, y: &[f64]| y[0] + y[1]),
        );
        let r = reference_moments(&m, 1, 5).unwrap();
        assert!((r.mean - 1.0).abs() < 1e-14);
        assert!((r.variance - 1.0 / 6.0).abs() < 1e-14);
        assert!(reference_moments(&m, 1, 4).is_err());
    }
}
