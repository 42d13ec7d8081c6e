use alloc::format;
use alloc::vec::Vec;

use super::surrogate::{PredictScratch, Solver, SrbfSurrogate, TauSamples};
use super::training::TrainingSet;
use crate::{Error, Result};

/// `S_M = F₁ + Σ ε_i`: the lowest fidelity surrogate plus one additive
/// error surrogate per fidelity step.
#[derive(Debug, Clone, PartialEq)]
pub struct MfSrbfSurrogate {
    layers: Vec<SrbfSurrogate>,
    /// The data each layer was fitted to (residuals for the error layers).
    layer_data: Vec<TrainingSet>,
    level_costs: Vec<f64>,
}

/// Builds `F₁` on `sets[0]` and each `ε_i` on the residuals
/// `φ − S_i(z)` over `sets[i]`. `pick_k(layer, data)` returns the center
/// count for each layer given its training data.
pub fn build_mf_surrogate(
    sets: &[TrainingSet],
    taus: &TauSamples,
    level_costs: &[f64],
    solver: Solver,
    mut pick_k: impl FnMut(usize, &TrainingSet) -> Result<usize>,
) -> Result<MfSrbfSurrogate> {
    if sets.is_empty() || sets[0].is_empty() {
        return Err(Error::Argument("the lowest fidelity has no training data".into()));
    }
    if level_costs.len() != sets.len() || level_costs.iter().any(|&g| !(g > 0.0)) {
        return Err(Error::Argument(format!(
            "need {} positive level costs, got {level_costs:?}",
            sets.len()
        )));
    }
    let mut mf = MfSrbfSurrogate {
        layers: Vec::with_capacity(sets.len()),
        layer_data: Vec::with_capacity(sets.len()),
        level_costs: level_costs.to_vec(),
    };
    let mut scratch = PredictScratch::default();
    for (i, set) in sets.iter().enumerate() {
        if set.is_empty() {
            return Err(Error::Argument(format!("fidelity {} has no training data", i + 1)));
        }
        let data = if i == 0 {
            set.clone()
        } else {
            let residuals = set
                .points()
                .iter()
                .zip(set.values())
                .map(|(z, phi)| phi - mf.predict_level_with(z, i, &mut scratch))
                .collect();
            set.with_values(residuals)?
        };
        let k = pick_k(i, &data)?;
        mf.layers.push(SrbfSurrogate::fit(&data, k, taus, solver)?);
        mf.layer_data.push(data);
    }
    Ok(mf)
}

/// Every layer interpolates its data.
pub fn build_interpolating(
    sets: &[TrainingSet],
    taus: &TauSamples,
    level_costs: &[f64],
) -> Result<MfSrbfSurrogate> {
    build_mf_surrogate(sets, taus, level_costs, Solver::Qr, |_, d| Ok(d.len()))
}

impl MfSrbfSurrogate {
    /// Reassembles a stack from stored layers.
    pub fn from_layers(layers: Vec<SrbfSurrogate>, level_costs: Vec<f64>) -> Result<Self> {
        if layers.is_empty() || layers.len() != level_costs.len() {
            return Err(Error::Argument("need one cost per layer and at least one layer".into()));
        }
        Ok(Self {
            layers,
            layer_data: Vec::new(),
            level_costs,
        })
    }

    pub fn levels(&self) -> usize {
        self.layers.len()
    }

    pub fn base(&self) -> &SrbfSurrogate {
        &self.layers[0]
    }

    pub fn error_layers(&self) -> &[SrbfSurrogate] {
        &self.layers[1..]
    }

    /// Layer 0 is `F₁`, layer `i` is `ε_i`.
    pub fn layers(&self) -> &[SrbfSurrogate] {
        &self.layers
    }

    /// Training data of each layer; empty for stacks built by
    /// [`MfSrbfSurrogate::from_layers`].
    pub fn layer_data(&self) -> &[TrainingSet] {
        &self.layer_data
    }

    pub fn level_costs(&self) -> &[f64] {
        &self.level_costs
    }

    /// `S_α(y) = F₁(y) + Σ_{i<α} ε_i(y)`, `1 <= α <= M`.
    pub fn predict_level(&self, y: &[f64], alpha: usize) -> f64 {
        self.predict_level_with(y, alpha, &mut PredictScratch::default())
    }

    pub fn predict_level_with(&self, y: &[f64], alpha: usize, s: &mut PredictScratch) -> f64 {
        self.layers[..alpha.min(self.layers.len())]
            .iter()
            .map(|l| l.predict_with(y, s))
            .sum()
    }

    pub fn predict(&self, y: &[f64]) -> f64 {
        self.predict_level(y, self.levels())
    }

    pub fn predict_with(&self, y: &[f64], s: &mut PredictScratch) -> f64 {
        self.predict_level_with(y, self.levels(), s)
    }

    /// `[U_F₁, U_ε₁, ...]` at `y`.
    pub fn component_uncertainties(&self, y: &[f64]) -> Vec<f64> {
        let mut s = PredictScratch::default();
        self.layers
            .iter()
            .map(|l| l.predict_and_uncertainty(y, &mut s).1)
            .collect()
    }

    /// `sqrt(U_F₁² + Σ U_εᵢ²)`.
    pub fn uncertainty(&self, y: &[f64]) -> f64 {
        combined(&self.component_uncertainties(y))
    }

    /// The fidelity to sample at `y`; see [`select_fidelity`].
    pub fn select_fidelity(&self, y: &[f64]) -> usize {
        select_fidelity(&self.component_uncertainties(y), &self.level_costs)
    }
}

pub(crate) fn combined(components: &[f64]) -> f64 {
    libm::sqrt(components.iter().map(|u| u * u).sum())
}

/// `argmax_i U_i / γ_i` as a 1-based level; ties go to the lowest level.
pub fn select_fidelity(components: &[f64], level_costs: &[f64]) -> usize {
    let mut best = 0;
    let mut best_v = f64::NEG_INFINITY;
    for (i, (u, g)) in components.iter().zip(level_costs).enumerate() {
        let v = u / g;
        if v > best_v {
            best_v = v;
            best = i;
        }
    }
    best + 1
}
