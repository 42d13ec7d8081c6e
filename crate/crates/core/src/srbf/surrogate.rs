//! Single-fidelity stochastic RBF: power kernel, weight solves, prediction
//! and the uncertainty band.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::kmeans::select_centers;
use super::training::TrainingSet;
use crate::math::{euclidean_distance, quantile_sorted, sort_floats, two_sum, CompensatedSum};
use crate::rng::{self, label};
use crate::{Error, Result};

/// How least-squares weights are computed when `K < J`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Solver {
    /// Householder QR of the collocation matrix.
    #[default]
    Qr,
    /// Cholesky on `AᵀA w = Aᵀb`.
    NormalEquations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrbfConfig {
    pub tau_min: f64,
    pub tau_max: f64,
    /// Number of kernel exponents `Θ`.
    pub theta: usize,
    /// LOOCV scores use the first this-many exponents only.
    pub loocv_taus: usize,
    pub solver: Solver,
}

impl Default for SrbfConfig {
    fn default() -> Self {
        Self {
            tau_min: 1.0,
            tau_max: 3.0,
            theta: 1000,
            loocv_taus: 100,
            solver: Solver::Qr,
        }
    }
}

impl SrbfConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tau_min > 0.0 && self.tau_min <= self.tau_max && self.tau_max.is_finite()) {
            return Err(Error::Argument(format!(
                "need 0 < tau_min <= tau_max, got [{}, {}]",
                self.tau_min, self.tau_max
            )));
        }
        if self.theta == 0 || self.loocv_taus == 0 {
            return Err(Error::Argument("theta and loocv_taus must be positive".into()));
        }
        Ok(())
    }
}

/// The `Θ` kernel exponents shared by every surrogate of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct TauSamples {
    values: Arc<[f64]>,
    seed: Option<u64>,
}

impl TauSamples {
    /// `config.theta` uniform draws on `[tau_min, tau_max]`.
    pub fn draw(seed: u64, config: &SrbfConfig) -> Result<Self> {
        config.validate()?;
        let mut r = rng::stream(seed, &[label::TAU]);
        let span = config.tau_max - config.tau_min;
        let values: Vec<f64> = (0..config.theta)
            .map(|_| config.tau_min + span * r.gen::<f64>())
            .collect();
        Ok(Self {
            values: values.into(),
            seed: Some(seed),
        })
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
            return Err(Error::Argument("kernel exponents must be positive and finite".into()));
        }
        Ok(Self {
            values: values.into(),
            seed: None,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The first `n` exponents.
    pub fn prefix(&self, n: usize) -> Self {
        let n = n.clamp(1, self.len());
        Self {
            values: self.values[..n].into(),
            seed: self.seed,
        }
    }
}

/// `‖a − b‖^τ` as `exp(τ ln ‖a − b‖)`, with `0^τ = 0`. Matrix assembly and
/// prediction both go through this form so they agree to the last bit.
fn power_kernel(a: &[f64], b: &[f64], tau: f64) -> f64 {
    kernel_from_log(libm::log(euclidean_distance(a, b)), tau)
}

fn kernel_from_log(l: f64, tau: f64) -> f64 {
    if l == f64::NEG_INFINITY {
        0.0
    } else {
        libm::exp(tau * l)
    }
}

/// `Σ_j w_j ‖y − c_j‖^τ`, accumulated with compensation.
pub fn kernel_value(centers: &[Vec<f64>], weights: &[f64], y: &[f64], tau: f64) -> f64 {
    let mut acc = CompensatedSum::default();
    for (c, &w) in centers.iter().zip(weights) {
        acc.add_product(power_kernel(y, c, tau), w, 0.0);
    }
    acc.value()
}

/// `ln ‖y_i − c_j‖`, row-major, `-inf` for coincident points.
fn log_distances(points: &[Vec<f64>], centers: &[Vec<f64>]) -> Vec<f64> {
    let mut out = Vec::with_capacity(points.len() * centers.len());
    for p in points {
        for c in centers {
            out.push(libm::log(euclidean_distance(p, c)));
        }
    }
    out
}

fn collocation(logs: &[f64], rows: usize, cols: usize, tau: f64) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |i, j| kernel_from_log(logs[i * cols + j], tau))
}

fn min_norm(a: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let svd = a.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let eps = smax * (a.nrows().max(a.ncols()) as f64) * f64::EPSILON;
    svd.solve(b, eps)
        .map_err(|e| Error::Numeric(format!("SVD solve failed: {e}")))
}

/// Square solve refined against a compensated residual. The solution is
/// kept as an unevaluated sum `hi + lo`: interpolation weights of the power
/// kernel are large and cancel, so rounding them to one double alone would
/// already cost the interpolation property.
fn solve_square(a: DMatrix<f64>, b: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
    let n = a.nrows();
    let lu = a.clone().lu();
    let singular = || Error::Structure("singular interpolation matrix".into());
    let mut hi = lu.solve(b).ok_or_else(singular)?;
    let mut lo = DVector::zeros(n);
    let bnorm = b.amax();
    let mut best = (f64::INFINITY, hi.clone(), lo.clone());
    for _ in 0..10 {
        let mut r = DVector::zeros(n);
        for i in 0..n {
            let mut acc = CompensatedSum::new(b[i]);
            for j in 0..n {
                acc.add_product(-a[(i, j)], hi[j], lo[j]);
            }
            r[i] = acc.value();
        }
        let rmax = r.amax();
        if !(rmax < best.0) {
            break;
        }
        best = (rmax, hi.clone(), lo.clone());
        if rmax <= f64::EPSILON * bnorm {
            break;
        }
        let dw = lu.solve(&r).ok_or_else(singular)?;
        for j in 0..n {
            let (s, e) = two_sum(hi[j], dw[j]);
            let (h, l) = two_sum(s, e + lo[j]);
            hi[j] = h;
            lo[j] = l;
        }
    }
    Ok((best.1, best.2))
}

fn solve_one(a: DMatrix<f64>, b: &DVector<f64>, solver: Solver) -> Result<(DVector<f64>, DVector<f64>)> {
    let (rows, cols) = a.shape();
    if rows == cols {
        return solve_square(a, b);
    }
    let hi = match solver {
        Solver::Qr => {
            let qr = a.clone().qr();
            let r = qr.r();
            let diag = r.diagonal().abs();
            let tol = diag.max() * (rows as f64) * f64::EPSILON;
            if diag.iter().any(|&d| d <= tol) {
                min_norm(&a, b)
            } else {
                let qtb = qr.q().transpose() * b;
                r.solve_upper_triangular(&qtb)
                    .ok_or_else(|| Error::Numeric("triangular solve failed".into()))
            }
        }
        Solver::NormalEquations => {
            let ata = a.transpose() * &a;
            let atb = a.transpose() * b;
            match ata.cholesky() {
                Some(ch) => Ok(ch.solve(&atb)),
                None => min_norm(&a, b),
            }
        }
    }?;
    Ok((hi, DVector::zeros(cols)))
}

/// Weights for one exponent: interpolation when the system is square,
/// least squares otherwise. Rank-deficient rectangular systems fall back to
/// the minimum-norm solution; a singular square system is a structure error.
pub fn fit_weights(
    points: &[Vec<f64>],
    values: &[f64],
    centers: &[Vec<f64>],
    tau: f64,
    solver: Solver,
) -> Result<Vec<f64>> {
    Ok(fit_all(points, values, centers, &[tau], solver)?.0)
}

/// Leading parts and correction terms of the weights for every exponent,
/// exponent-major.
fn fit_all(
    points: &[Vec<f64>],
    values: &[f64],
    centers: &[Vec<f64>],
    taus: &[f64],
    solver: Solver,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (rows, cols) = (points.len(), centers.len());
    if cols == 0 || cols > rows || values.len() != rows {
        return Err(Error::Argument(format!(
            "need 1 <= K <= J with one value per point, got K={cols}, J={rows}, {} values",
            values.len()
        )));
    }
    let logs = log_distances(points, centers);
    let b = DVector::from_column_slice(values);
    let mut hi = Vec::with_capacity(taus.len() * cols);
    let mut lo = Vec::with_capacity(taus.len() * cols);
    for &tau in taus {
        let (wh, wl) = solve_one(collocation(&logs, rows, cols, tau), &b, solver)?;
        if wh.iter().chain(wl.iter()).any(|v| !v.is_finite()) {
            return Err(Error::Numeric(format!("non-finite RBF weights for tau = {tau}")));
        }
        hi.extend(wh.iter());
        lo.extend(wl.iter());
    }
    Ok((hi, lo))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitMode {
    Regression,
    Interpolation,
}

/// `F(y) = (1/Θ) Σ_i f(y, τ_i)` with `f(y, τ) = Σ_j w_j(τ) ‖y − c_j‖^τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SrbfSurrogate {
    centers: Vec<Vec<f64>>,
    taus: TauSamples,
    /// `weights[i * K + j] + weights_lo[i * K + j] = w_j(τ_i)`.
    weights: Vec<f64>,
    weights_lo: Vec<f64>,
    mode: FitMode,
}

/// Reusable buffers for [`SrbfSurrogate`] evaluation.
#[derive(Debug, Clone, Default)]
pub struct PredictScratch {
    logs: Vec<(usize, f64)>,
    samples: Vec<f64>,
}

impl SrbfSurrogate {
    /// Fits `k` k-means centers (the training inputs themselves when
    /// `k = J`).
    pub fn fit(training: &TrainingSet, k: usize, taus: &TauSamples, solver: Solver) -> Result<Self> {
        let centers = select_centers(training.points(), k)?;
        let (weights, weights_lo) =
            fit_all(training.points(), training.values(), &centers, taus.values(), solver)?;
        let mode = if k == training.len() {
            FitMode::Interpolation
        } else {
            FitMode::Regression
        };
        Ok(Self {
            centers,
            taus: taus.clone(),
            weights,
            weights_lo,
            mode,
        })
    }

    /// Assembles a surrogate from stored parts (for example a JSON dump).
    /// `weights_lo` may be empty.
    pub fn from_parts(
        centers: Vec<Vec<f64>>,
        taus: TauSamples,
        weights: Vec<f64>,
        weights_lo: Vec<f64>,
        mode: FitMode,
    ) -> Result<Self> {
        let weights_lo = if weights_lo.is_empty() {
            vec![0.0; weights.len()]
        } else {
            weights_lo
        };
        if centers.is_empty() || weights.len() != centers.len() * taus.len() || weights_lo.len() != weights.len() {
            return Err(Error::Argument(format!(
                "{} weights for {} centers and {} exponents",
                weights.len(),
                centers.len(),
                taus.len()
            )));
        }
        let dim = centers[0].len();
        if centers.iter().any(|c| c.len() != dim) {
            return Err(Error::Argument("centers of different dimension".into()));
        }
        Ok(Self {
            centers,
            taus,
            weights,
            weights_lo,
            mode,
        })
    }

    pub fn centers(&self) -> &[Vec<f64>] {
        &self.centers
    }

    pub fn k_star(&self) -> usize {
        self.centers.len()
    }

    pub fn mode(&self) -> FitMode {
        self.mode
    }

    pub fn taus(&self) -> &TauSamples {
        &self.taus
    }

    /// Exponent-major weights, `K` per exponent (leading parts).
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Correction terms of the weights; zero for least-squares fits.
    pub fn weights_lo(&self) -> &[f64] {
        &self.weights_lo
    }

    pub fn weights_for(&self, i: usize) -> &[f64] {
        let k = self.k_star();
        &self.weights[i * k..(i + 1) * k]
    }

    /// `f(y, τ_i)` for sample `i`.
    pub fn kernel_predict(&self, y: &[f64], i: usize) -> f64 {
        let k = self.k_star();
        let tau = self.taus.values()[i];
        let mut acc = CompensatedSum::default();
        for (j, c) in self.centers.iter().enumerate() {
            acc.add_product(power_kernel(y, c, tau), self.weights[i * k + j], self.weights_lo[i * k + j]);
        }
        acc.value()
    }

    fn fill_samples(&self, y: &[f64], s: &mut PredictScratch) {
        s.logs.clear();
        for (j, c) in self.centers.iter().enumerate() {
            let d = euclidean_distance(y, c);
            if d > 0.0 {
                s.logs.push((j, libm::log(d)));
            }
        }
        let k = self.k_star();
        s.samples.clear();
        for (i, &tau) in self.taus.values().iter().enumerate() {
            let w = &self.weights[i * k..(i + 1) * k];
            let wl = &self.weights_lo[i * k..(i + 1) * k];
            let mut acc = CompensatedSum::default();
            for &(j, l) in &s.logs {
                acc.add_product(libm::exp(tau * l), w[j], wl[j]);
            }
            s.samples.push(acc.value());
        }
    }

    /// `f(y, τ_i)` for every sample.
    pub fn samples(&self, y: &[f64]) -> Vec<f64> {
        let mut s = PredictScratch::default();
        self.fill_samples(y, &mut s);
        s.samples
    }

    pub fn predict(&self, y: &[f64]) -> f64 {
        self.predict_with(y, &mut PredictScratch::default())
    }

    pub fn predict_with(&self, y: &[f64], s: &mut PredictScratch) -> f64 {
        self.fill_samples(y, s);
        s.samples.iter().sum::<f64>() / s.samples.len() as f64
    }

    /// Width of the central 95% band of `{f(y, τ_i)}`.
    pub fn uncertainty(&self, y: &[f64]) -> f64 {
        self.predict_and_uncertainty(y, &mut PredictScratch::default()).1
    }

    pub fn predict_and_uncertainty(&self, y: &[f64], s: &mut PredictScratch) -> (f64, f64) {
        self.fill_samples(y, s);
        let mean = s.samples.iter().sum::<f64>() / s.samples.len() as f64;
        (mean, band_width(&mut s.samples))
    }
}

/// `q(0.975) − q(0.025)` of the values (type-7 quantiles); sorts in place.
pub fn band_width(values: &mut [f64]) -> f64 {
    sort_floats(values);
    let u = quantile_sorted(values, 0.975) - quantile_sorted(values, 0.025);
    u.max(0.0)
}

/// Least-squares / interpolation residuals `A w − b` for one exponent.
pub fn residuals(points: &[Vec<f64>], values: &[f64], centers: &[Vec<f64>], weights: &[f64], tau: f64) -> Vec<f64> {
    points
        .iter()
        .zip(values)
        .map(|(p, v)| kernel_value(centers, weights, p, tau) - v)
        .collect()
}

/// `Aᵀ r` for one exponent; zero at a least-squares minimizer.
pub fn normal_residual(points: &[Vec<f64>], centers: &[Vec<f64>], r: &[f64], tau: f64) -> Vec<f64> {
    let mut out = vec![0.0; centers.len()];
    for (p, ri) in points.iter().zip(r) {
        for (o, c) in out.iter_mut().zip(centers) {
            *o += power_kernel(p, c, tau) * ri;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn kernel_examples() {
        let c = vec![vec![0.0], vec![1.0]];
        assert_eq!(kernel_value(&c, &[1.0, -1.0], &[0.25], 1.0), -0.5);
        assert_eq!(kernel_value(&[vec![0.3, 0.4]], &[7.0], &[0.3, 0.4], 2.5), 0.0);
    }

    #[test]
    fn two_point_interpolation() {
        let p = vec![vec![0.0], vec![1.0]];
        let w = fit_weights(&p, &[0.0, 1.0], &p, 1.0, Solver::Qr).unwrap();
        assert_eq!(w, vec![1.0, 0.0]);
    }

    #[test]
    fn zero_data_gives_zero_weight() {
        let p = vec![vec![0.0], vec![1.0]];
        let w = fit_weights(&p, &[0.0, 0.0], &[vec![0.5]], 1.0, Solver::Qr).unwrap();
        assert_eq!(w, vec![0.0]);
    }

    #[test]
    fn single_point_interpolation_is_singular() {
        let p = vec![vec![0.2]];
        assert!(matches!(
            fit_weights(&p, &[1.0], &p, 1.5, Solver::Qr),
            Err(Error::Structure(_))
        ));
    }

    #[test]
    fn band_of_four_values() {
        // h = 3 * 0.975 = 2.925 -> 3 + 0.925; h = 0.075 -> 1 + 0.075
        let mut v = [4.0, 1.0, 3.0, 2.0];
        assert!((band_width(&mut v) - 2.85).abs() < 1e-14);
    }
}
