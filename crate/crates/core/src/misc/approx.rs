//! The combination-technique approximation `S_Λ = Σ c_{α,β} U_{α,β}`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec::Vec;

use super::cc::{level_to_knots, CcRules};
use super::index::{coefficient_increment, nonzero_coefficients, MultiIndex, MultiIndexSet};
use super::surrogate::{EvalScratch, MiscSurrogate};
use super::tensor::TensorInterpolant;
use crate::model::{FidelityModel, ParamDomain};
use crate::{Error, Result};

/// Error and work estimates of one explored index.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contribution {
    pub error: f64,
    pub work: f64,
    pub profit: f64,
}

/// `cost(α) · Π_n (m(β_n) - m(β_n - 1))`: the cost of the points that
/// `[α, β]` adds on top of its backward neighbours.
pub fn work_contribution(model: &FidelityModel, idx: &MultiIndex) -> Result<f64> {
    let e = idx.entries();
    let mut w = model.cost(e[0])?;
    for &b in &e[1..] {
        w *= (level_to_knots(b) - level_to_knots(b - 1)) as f64;
    }
    Ok(w)
}

/// Multi-fidelity collocation surrogate over a downward-closed index set.
///
/// Indices are `[α, β_1, ..., β_N]` with one fidelity index. Two sets are
/// tracked: `Λ` (accepted indices) and `J ⊇ Λ` (everything whose tensor
/// interpolant has been computed). Evaluation and quadrature use the
/// coefficients of `J`, the richer of the two.
#[derive(Debug, Clone)]
pub struct MiscApproximation {
    domain: ParamDomain,
    lambda: MultiIndexSet,
    explored: MultiIndexSet,
    coefficients: BTreeMap<MultiIndex, i64>,
    ops: BTreeMap<MultiIndex, TensorInterpolant>,
    rules: CcRules,
    contributions: BTreeMap<MultiIndex, Contribution>,
}

impl MiscApproximation {
    /// `Λ = J = {[1, ..., 1]}`.
    pub fn new(model: &mut FidelityModel) -> Result<Self> {
        let dim = 1 + model.domain().dim();
        let mut a = Self::empty(model, MultiIndexSet::unit(dim));
        a.ensure_op(model, &MultiIndex::ones(dim))?;
        a.refresh_coefficients()?;
        Ok(a)
    }

    /// `Λ = J = lambda`. Only interpolants with nonzero coefficient are
    /// computed, so indices that telescope away cost no model evaluations.
    pub fn from_set(model: &mut FidelityModel, lambda: MultiIndexSet) -> Result<Self> {
        let dim = 1 + model.domain().dim();
        if lambda.dim() != dim {
            return Err(Error::Argument(format!(
                "index set has length {}, expected 1 + {} = {dim}",
                lambda.dim(),
                model.domain().dim()
            )));
        }
        if lambda.is_empty() {
            return Err(Error::Argument("empty index set".into()));
        }
        lambda.require_downward_closed()?;
        if let Some(bad) = lambda.iter().find(|k| k[0] > model.levels()) {
            return Err(Error::Level {
                level: bad[0],
                max: model.levels(),
            });
        }
        let mut a = Self::empty(model, lambda);
        a.refresh_coefficients()?;
        let needed: Vec<MultiIndex> = a.coefficients.keys().cloned().collect();
        for k in &needed {
            a.ensure_op(model, k)?;
        }
        Ok(a)
    }

    fn empty(model: &FidelityModel, lambda: MultiIndexSet) -> Self {
        Self {
            domain: model.domain().clone(),
            explored: lambda.clone(),
            lambda,
            coefficients: BTreeMap::new(),
            ops: BTreeMap::new(),
            rules: CcRules::new(),
            contributions: BTreeMap::new(),
        }
    }

    pub fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    /// Accepted indices `Λ`.
    pub fn lambda(&self) -> &MultiIndexSet {
        &self.lambda
    }

    /// Explored indices `J`.
    pub fn explored(&self) -> &MultiIndexSet {
        &self.explored
    }

    /// Nonzero combination coefficients of `J`.
    pub fn coefficients(&self) -> &BTreeMap<MultiIndex, i64> {
        &self.coefficients
    }

    pub fn contributions(&self) -> &BTreeMap<MultiIndex, Contribution> {
        &self.contributions
    }

    pub fn tensor_op(&self, idx: &MultiIndex) -> Option<&TensorInterpolant> {
        self.ops.get(idx)
    }

    /// `(index, coefficient, interpolant)` for every nonzero term.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, i64, &TensorInterpolant)> {
        self.coefficients
            .iter()
            .map(move |(k, &c)| (k, c, &self.ops[k]))
    }

    fn ensure_op(&mut self, model: &mut FidelityModel, idx: &MultiIndex) -> Result<()> {
        if !self.ops.contains_key(idx) {
            let e = idx.entries();
            let op = TensorInterpolant::build_with_rules(model, e[0], &e[1..], &mut self.rules)?;
            self.ops.insert(idx.clone(), op);
        }
        Ok(())
    }

    fn refresh_coefficients(&mut self) -> Result<()> {
        self.coefficients = nonzero_coefficients(&self.explored)?;
        Ok(())
    }

    fn check_index(&self, model: &FidelityModel, idx: &MultiIndex) -> Result<()> {
        if idx.len() != self.lambda.dim() {
            return Err(Error::Argument(format!(
                "index {idx} has wrong length for this approximation"
            )));
        }
        if idx[0] > model.levels() {
            return Err(Error::Level {
                level: idx[0],
                max: model.levels(),
            });
        }
        Ok(())
    }

    /// Computes the interpolant of `idx` and adds it to `J`.
    pub(crate) fn explore(&mut self, model: &mut FidelityModel, idx: &MultiIndex) -> Result<()> {
        self.check_index(model, idx)?;
        self.ensure_op(model, idx)?;
        self.explored.insert(idx.clone())?;
        self.refresh_coefficients()
    }

    pub(crate) fn accept(&mut self, idx: &MultiIndex) -> Result<()> {
        if !self.lambda.with(idx).has_backward_neighbors(idx) {
            return Err(Error::Structure(format!("accepting {idx} breaks downward closure")));
        }
        self.lambda.insert(idx.clone())?;
        Ok(())
    }

    pub(crate) fn record(&mut self, idx: &MultiIndex, c: Contribution) {
        self.contributions.insert(idx.clone(), c);
    }

    /// The compiled surrogate `S_J`.
    pub fn surrogate(&self) -> Result<MiscSurrogate> {
        MiscSurrogate::from_pieces(
            self.domain.clone(),
            self.terms()
                .map(|(_, c, op)| (c as f64, op.beta(), op.values())),
        )
    }

    /// `S_J(y)`.
    pub fn evaluate(&self, y: &[f64]) -> Result<f64> {
        self.domain.check(y)?;
        let mut total = 0.0;
        for (_, c, op) in self.terms() {
            total += c as f64 * op.evaluate(y)?;
        }
        Ok(total)
    }

    /// `Σ_J c_k Σ_j G_k(y_j)^r ω_j` for `r = 1..=4`.
    pub fn quadrature(&self, r: usize) -> Result<f64> {
        let mut total = 0.0;
        for (_, c, op) in self.terms() {
            total += c as f64 * op.quadrature(r)?;
        }
        Ok(total)
    }

    fn increment(&mut self, model: &mut FidelityModel, idx: &MultiIndex) -> Result<BTreeMap<MultiIndex, i64>> {
        self.check_index(model, idx)?;
        let inc = coefficient_increment(&self.lambda, idx)?;
        for k in inc.keys() {
            self.ensure_op(model, k)?;
        }
        Ok(inc)
    }

    /// `|R_{Λ∪{idx}} - R_Λ|` for the mean.
    pub fn error_contribution_quadrature(
        &mut self,
        model: &mut FidelityModel,
        idx: &MultiIndex,
    ) -> Result<f64> {
        let inc = self.increment(model, idx)?;
        let mut d = 0.0;
        for (k, c) in &inc {
            d += *c as f64 * self.ops[k].quadrature(1)?;
        }
        Ok(d.abs())
    }

    /// `max_{y in H} |S_{Λ∪{idx}}(y) - S_Λ(y)|` over physical testing points.
    pub fn error_contribution_surrogate(
        &mut self,
        model: &mut FidelityModel,
        idx: &MultiIndex,
        testing: &[Vec<f64>],
    ) -> Result<f64> {
        if testing.is_empty() {
            return Err(Error::Argument("empty testing set".into()));
        }
        for y in testing {
            self.domain.check(y)?;
        }
        let reference: Vec<Vec<f64>> = testing.iter().map(|y| self.domain.to_reference(y)).collect();
        self.error_contribution_surrogate_reference(model, idx, &reference)
    }

    /// As [`error_contribution_surrogate`](Self::error_contribution_surrogate)
    /// with testing points already in `[-1, 1]^N`.
    pub fn error_contribution_surrogate_reference(
        &mut self,
        model: &mut FidelityModel,
        idx: &MultiIndex,
        testing: &[Vec<f64>],
    ) -> Result<f64> {
        let inc = self.increment(model, idx)?;
        if inc.is_empty() {
            return Ok(0.0);
        }
        let detail = MiscSurrogate::from_pieces(
            self.domain.clone(),
            inc.iter().map(|(k, &c)| {
                let op = &self.ops[k];
                (c as f64, op.beta(), op.values())
            }),
        )?;
        let mut scratch = EvalScratch::default();
        Ok(testing
            .iter()
            .map(|t| detail.evaluate_reference(t, &mut scratch).abs())
            .fold(0.0, f64::max))
    }
}
