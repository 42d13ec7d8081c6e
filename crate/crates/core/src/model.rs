//! Parameter domain, multi-fidelity model with cost accounting, the Taylor
//! benchmark and frozen synthetic noise.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use rand::Rng;

use crate::rng;
use crate::{Error, Result};

/// Box `Γ = Π [a_n, b_n]` with the uniform product density.
#[derive(Debug, Clone, PartialEq)]
pub struct ParamDomain {
    bounds: Vec<(f64, f64)>,
}

impl ParamDomain {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::Argument("domain needs at least one dimension".into()));
        }
        for (n, &(a, b)) in bounds.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::Argument(format!(
                    "dimension {}: bounds [{a}, {b}] are not an interval",
                    n + 1
                )));
            }
        }
        Ok(Self { bounds })
    }

    pub fn unit(dim: usize) -> Self {
        Self {
            bounds: vec![(0.0, 1.0); dim],
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    /// Constant value of the uniform density, `Π 1/(b_n - a_n)`.
    pub fn density(&self) -> f64 {
        self.bounds.iter().map(|(a, b)| 1.0 / (b - a)).product()
    }

    pub fn contains(&self, y: &[f64]) -> bool {
        y.len() == self.dim()
            && y
                .iter()
                .zip(&self.bounds)
                .all(|(v, &(a, b))| *v >= a && *v <= b)
    }

    pub fn check(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.dim() {
            return Err(Error::Domain(format!(
                "expected {} coordinates, got {}",
                self.dim(),
                y.len()
            )));
        }
        if !self.contains(y) {
            return Err(Error::Domain(format!("{y:?} not in {:?}", self.bounds)));
        }
        Ok(())
    }

    /// Maps unit-hypercube coordinates to the domain.
    ///
    /// Every point generator in the crate goes through this function, so two
    /// generators asking for the same unit coordinates get bit-identical
    /// points and hit the same cache entry.
    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter()
            .zip(&self.bounds)
            .map(|(&u, &(a, b))| (a + u * (b - a)).clamp(a, b))
            .collect()
    }

    /// Maps reference coordinates in `[-1, 1]` (Clenshaw-Curtis knots) to the
    /// domain.
    pub fn from_reference(&self, t: &[f64]) -> Vec<f64> {
        let u: Vec<f64> = t.iter().map(|&t| 0.5 * (t + 1.0)).collect();
        self.from_unit(&u)
    }

    pub fn to_unit(&self, y: &[f64]) -> Vec<f64> {
        y.iter()
            .zip(&self.bounds)
            .map(|(&y, &(a, b))| (y - a) / (b - a))
            .collect()
    }

    pub fn to_reference(&self, y: &[f64]) -> Vec<f64> {
        self.to_unit(y).iter().map(|u| 2.0 * u - 1.0).collect()
    }

    pub fn center(&self) -> Vec<f64> {
        self.from_unit(&vec![0.5; self.dim()])
    }
}

/// Exact bit pattern of a point; the cache and duplicate checks key on it.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PointKey(Vec<u64>);

impl PointKey {
    pub fn of(y: &[f64]) -> Self {
        // +0.0 and -0.0 are the same point
        Self(y.iter().map(|v| (v + 0.0).to_bits()).collect())
    }

    pub fn bits(&self) -> &[u64] {
        &self.0
    }
}

/// A family of fidelities `G_1, ..., G_M` over a common domain.
pub trait FidelityFamily {
    fn num_levels(&self) -> usize;
    /// `G_level(y)` with `level` in `1..=num_levels()`; `y` is already checked.
    fn value(&self, level: usize, y: &[f64]) -> f64;
}

/// Fidelity family backed by a closure `(level, y) -> value`.
pub struct FnFamily<F> {
    levels: usize,
    f: F,
}

impl<F: Fn(usize, &[f64]) -> f64> FnFamily<F> {
    pub fn new(levels: usize, f: F) -> Self {
        Self { levels, f }
    }
}

impl<F: Fn(usize, &[f64]) -> f64> FidelityFamily for FnFamily<F> {
    fn num_levels(&self) -> usize {
        self.levels
    }

    fn value(&self, level: usize, y: &[f64]) -> f64 {
        (self.f)(level, y)
    }
}

/// `sin(exp(y1 + y2) / 5)` on `[0, 1]^2` with fidelities given by Taylor
/// expansions of the exponential argument about the origin.
#[derive(Debug, Clone, Copy, Default)]
pub struct TaylorBenchmark;

impl TaylorBenchmark {
    pub const LEVELS: usize = 6;

    pub fn domain() -> ParamDomain {
        ParamDomain::unit(2)
    }
}

impl FidelityFamily for TaylorBenchmark {
    fn num_levels(&self) -> usize {
        Self::LEVELS
    }

    fn value(&self, level: usize, y: &[f64]) -> f64 {
        libm::sin(taylor_argument(level, y[0] + y[1]))
    }
}

/// `(1/5) Σ_{k=0}^{order} s^k / k!`.
pub fn taylor_argument(order: usize, s: f64) -> f64 {
    let mut term = 1.0;
    let mut sum = 1.0;
    for k in 1..=order {
        term *= s / k as f64;
        sum += term;
    }
    sum / 5.0
}

/// Order-`alpha` Taylor fidelity of the benchmark at `y ∈ [0,1]^2`.
pub fn taylor_fidelity(alpha: usize, y: &[f64]) -> Result<f64> {
    if !(1..=TaylorBenchmark::LEVELS).contains(&alpha) {
        return Err(Error::Level {
            level: alpha,
            max: TaylorBenchmark::LEVELS,
        });
    }
    TaylorBenchmark::domain().check(y)?;
    Ok(TaylorBenchmark.value(alpha, y))
}

/// The function the Taylor fidelities approximate.
pub fn taylor_exact(y: &[f64]) -> f64 {
    libm::sin(libm::exp(y[0] + y[1]) / 5.0)
}

/// `base^(alpha-1)`.
pub fn level_cost(base: f64, alpha: usize) -> Result<f64> {
    if alpha < 1 {
        return Err(Error::Level { level: alpha, max: usize::MAX });
    }
    Ok(crate::math::powi(base, (alpha - 1) as u32))
}

pub const DEFAULT_COST_BASE: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseKind {
    /// `value * (1 + σ u)` with `u ~ unif[-1, 1]`.
    MultiplicativeUniform,
    /// `value + σ z` with `z ~ N(0, 1)`; σ is in units of the QoI.
    AdditiveGaussian,
}

/// Frozen synthetic noise: a deterministic function of the seed, the level
/// and the point.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSpec {
    /// `amplitudes[α-1]` is σ_α; levels past the end are noiseless.
    pub amplitudes: Vec<f64>,
    pub seed: u64,
    pub kind: NoiseKind,
}

impl NoiseSpec {
    pub fn validate(&self) -> Result<()> {
        if self.amplitudes.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
            return Err(Error::Argument("noise amplitudes must be finite and >= 0".into()));
        }
        Ok(())
    }

    pub fn amplitude(&self, alpha: usize) -> f64 {
        self.amplitudes.get(alpha.wrapping_sub(1)).copied().unwrap_or(0.0)
    }
}

pub fn inject_noise(value: f64, alpha: usize, y: &[f64], spec: &NoiseSpec) -> f64 {
    let sigma = spec.amplitude(alpha);
    if sigma == 0.0 {
        return value;
    }
    let key = PointKey::of(y);
    let mut labels = Vec::with_capacity(key.bits().len() + 2);
    labels.push(rng::label::NOISE);
    labels.push(alpha as u64);
    labels.extend_from_slice(key.bits());
    let mut r = rng::stream(spec.seed, &labels);
    match spec.kind {
        NoiseKind::MultiplicativeUniform => {
            let u: f64 = r.gen_range(-1.0..=1.0);
            value * (1.0 + sigma * u)
        }
        NoiseKind::AdditiveGaussian => value + sigma * rng::standard_normal(&mut r),
    }
}

/// A fidelity family with domain checks, cost accounting and a memo cache.
///
/// Each distinct `(α, y)` is evaluated once; repeated requests return the
/// cached bits and cost nothing. The accumulated cost is always
/// `Σ_α count(α) · cost(α)`.
pub struct FidelityModel {
    domain: ParamDomain,
    family: Box<dyn FidelityFamily + Send + Sync>,
    cost_base: f64,
    noise: Option<NoiseSpec>,
    cache: BTreeMap<(usize, PointKey), f64>,
    counts: Vec<usize>,
}

impl core::fmt::Debug for FidelityModel {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        f.debug_struct("FidelityModel")
            .field("domain", &self.domain)
            .field("levels", &self.counts.len())
            .field("cost_base", &self.cost_base)
            .field("noise", &self.noise)
            .field("counts", &self.counts)
            .finish()
    }
}

impl FidelityModel {
    pub fn new(domain: ParamDomain, family: impl FidelityFamily + Send + Sync + 'static) -> Self {
        let levels = family.num_levels();
        Self {
            domain,
            family: Box::new(family),
            cost_base: DEFAULT_COST_BASE,
            noise: None,
            cache: BTreeMap::new(),
            counts: vec![0; levels],
        }
    }

    pub fn taylor_benchmark() -> Self {
        Self::new(TaylorBenchmark::domain(), TaylorBenchmark)
    }

    pub fn with_cost_base(mut self, base: f64) -> Result<Self> {
        if !(base.is_finite() && base > 0.0) {
            return Err(Error::Argument(format!("cost base must be positive, got {base}")));
        }
        self.cost_base = base;
        Ok(self)
    }

    pub fn with_noise(mut self, noise: NoiseSpec) -> Result<Self> {
        noise.validate()?;
        self.noise = Some(noise);
        Ok(self)
    }

    pub fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    pub fn levels(&self) -> usize {
        self.counts.len()
    }

    pub fn cost_base(&self) -> f64 {
        self.cost_base
    }

    pub fn noise(&self) -> Option<&NoiseSpec> {
        self.noise.as_ref()
    }

    pub fn cost(&self, alpha: usize) -> Result<f64> {
        self.check_level(alpha)?;
        level_cost(self.cost_base, alpha)
    }

    fn check_level(&self, alpha: usize) -> Result<()> {
        if alpha < 1 || alpha > self.levels() {
            return Err(Error::Level {
                level: alpha,
                max: self.levels(),
            });
        }
        Ok(())
    }

    pub fn evaluate(&mut self, alpha: usize, y: &[f64]) -> Result<f64> {
        self.check_level(alpha)?;
        self.domain.check(y)?;
        let key = (alpha, PointKey::of(y));
        if let Some(v) = self.cache.get(&key) {
            return Ok(*v);
        }
        let mut value = self.family.value(alpha, y);
        if let Some(noise) = &self.noise {
            value = inject_noise(value, alpha, y, noise);
        }
        if !value.is_finite() {
            return Err(Error::Numeric(format!("G_{alpha}({y:?}) = {value}")));
        }
        self.cache.insert(key, value);
        self.counts[alpha - 1] += 1;
        Ok(value)
    }

    /// Whether `(α, y)` has already been paid for.
    pub fn is_cached(&self, alpha: usize, y: &[f64]) -> bool {
        self.cache.contains_key(&(alpha, PointKey::of(y)))
    }

    /// Distinct evaluations per level.
    pub fn eval_counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn accumulated_cost(&self) -> f64 {
        self.counts
            .iter()
            .enumerate()
            .map(|(i, &n)| n as f64 * crate::math::powi(self.cost_base, i as u32))
            .sum()
    }

    /// Evaluates the underlying family without noise, caching or cost; used
    /// for reference solutions and tests.
    pub fn exact_value(&self, alpha: usize, y: &[f64]) -> Result<f64> {
        self.check_level(alpha)?;
        self.domain.check(y)?;
        Ok(self.family.value(alpha, y))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn taylor_values() {
        // sin(T_6(0)) = sin(1/5)
        assert!((taylor_fidelity(6, &[0.0, 0.0]).unwrap() - 0.198_669_330_795_061_2).abs() < 1e-15);
        // T_1(2) = 3/5
        assert!((taylor_fidelity(1, &[1.0, 1.0]).unwrap() - 0.564_642_473_395_035_4).abs() < 1e-15);
        let t6: f64 = (1.0 + 1.0 + 0.5 + 1.0 / 6.0 + 1.0 / 24.0 + 1.0 / 120.0 + 1.0 / 720.0) / 5.0;
        assert!((t6 - 0.543_611_111_111_111).abs() < 1e-12);
        let g = taylor_fidelity(6, &[0.5, 0.5]).unwrap();
        assert!((g - libm::sin(t6)).abs() < 1e-15);
        assert!((g - 0.517_229_914_076_238_6).abs() < 1e-15);
        assert!(matches!(taylor_fidelity(7, &[0.0, 0.0]), Err(Error::Level { .. })));
        assert!(matches!(taylor_fidelity(1, &[1.5, 0.0]), Err(Error::Domain(_))));
    }

    #[test]
    fn highest_fidelity_increases_along_first_coordinate() {
        let mut prev = f64::NEG_INFINITY;
        for i in 0..=100 {
            let y1 = i as f64 / 100.0;
            let v = taylor_fidelity(6, &[y1, 0.3]).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn taylor_remainders_shrink_on_grid() {
        let mut d65: f64 = 0.0;
        let mut d54: f64 = 0.0;
        for i in 0..=100 {
            for j in 0..=100 {
                let y = [i as f64 / 100.0, j as f64 / 100.0];
                let g4 = TaylorBenchmark.value(4, &y);
                let g5 = TaylorBenchmark.value(5, &y);
                let g6 = TaylorBenchmark.value(6, &y);
                d65 = d65.max((g6 - g5).abs());
                d54 = d54.max((g5 - g4).abs());
            }
        }
        assert!(d65 <= d54, "{d65} > {d54}");
    }

    #[test]
    fn cost_is_a_power_of_the_base() {
        assert_eq!(level_cost(8.0, 1).unwrap(), 1.0);
        assert_eq!(level_cost(8.0, 2).unwrap(), 8.0);
        assert_eq!(level_cost(8.0, 4).unwrap(), 512.0);
        assert!(level_cost(8.0, 0).is_err());
        let m = FidelityModel::taylor_benchmark();
        assert_eq!(m.cost(6).unwrap(), 32768.0);
        assert!(m.cost(7).is_err());
    }

    #[test]
    fn cache_charges_once() {
        let mut m = FidelityModel::taylor_benchmark();
        let a = m.evaluate(3, &[0.25, 0.5]).unwrap();
        let b = m.evaluate(3, &[0.25, 0.5]).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert_eq!(m.accumulated_cost(), 64.0);
        assert_eq!(m.eval_counts()[2], 1);
        m.evaluate(1, &[0.25, 0.5]).unwrap();
        assert_eq!(m.accumulated_cost(), 65.0);
        assert!(matches!(m.evaluate(0, &[0.0, 0.0]), Err(Error::Level { .. })));
        assert!(matches!(m.evaluate(1, &[0.0, -0.1]), Err(Error::Domain(_))));
        assert!(matches!(m.evaluate(1, &[0.0]), Err(Error::Domain(_))));
    }

    fn noise(sigma: f64, kind: NoiseKind) -> NoiseSpec {
        NoiseSpec { amplitudes: vec![sigma], seed: 11, kind }
    }

    #[test]
    fn zero_amplitude_noise_is_identity() {
        let spec = noise(0.0, NoiseKind::AdditiveGaussian);
        assert_eq!(inject_noise(0.3, 1, &[0.1, 0.2], &spec), 0.3);
        // levels without an amplitude are noiseless
        let spec = noise(0.5, NoiseKind::AdditiveGaussian);
        assert_eq!(inject_noise(0.3, 2, &[0.1, 0.2], &spec), 0.3);
    }

    #[test]
    fn noisy_model_is_frozen_and_cached() {
        let spec = noise(0.02, NoiseKind::MultiplicativeUniform);
        let mut m = FidelityModel::taylor_benchmark().with_noise(spec).unwrap();
        let a = m.evaluate(1, &[0.3, 0.4]).unwrap();
        let exact = TaylorBenchmark.value(1, &[0.3, 0.4]);
        assert_ne!(a, exact);
        let mut fresh = FidelityModel::taylor_benchmark()
            .with_noise(noise(0.02, NoiseKind::MultiplicativeUniform))
            .unwrap();
        assert_eq!(a.to_bits(), fresh.evaluate(1, &[0.3, 0.4]).unwrap().to_bits());
    }

    proptest! {
        #[test]
        fn multiplicative_noise_is_bounded(v in -10.0f64..10.0, y0 in 0.0f64..1.0, y1 in 0.0f64..1.0, seed in any::<u64>()) {
            let spec = NoiseSpec { amplitudes: vec![0.01], seed, kind: NoiseKind::MultiplicativeUniform };
            let out = inject_noise(v, 1, &[y0, y1], &spec);
            let (lo, hi) = if v >= 0.0 { (0.99 * v, 1.01 * v) } else { (1.01 * v, 0.99 * v) };
            prop_assert!(out >= lo - 1e-15 && out <= hi + 1e-15);
            prop_assert_eq!(out.to_bits(), inject_noise(v, 1, &[y0, y1], &spec).to_bits());
        }

        #[test]
        fn accumulated_cost_matches_distinct_points(
            evals in proptest::collection::vec((1usize..=6, 0usize..4, 0usize..4), 0..60)
        ) {
            let mut m = FidelityModel::taylor_benchmark();
            let mut distinct = alloc::collections::BTreeSet::new();
            for (alpha, i, j) in evals {
                let y = [i as f64 / 3.0, j as f64 / 3.0];
                m.evaluate(alpha, &y).unwrap();
                distinct.insert((alpha, i, j));
            }
            let expected: f64 = distinct.iter().map(|(a, _, _)| level_cost(8.0, *a).unwrap()).sum();
            prop_assert_eq!(m.accumulated_cost(), expected);
        }
    }
}
