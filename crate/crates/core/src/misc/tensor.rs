//! Full tensor Clenshaw-Curtis grids and Lagrange interpolants on them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::cc::{lagrange_basis, CcRule, CcRules};
use crate::math::powi;
use crate::model::{FidelityModel, ParamDomain};
use crate::{Error, Result};

/// One axis of a tensor rule.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub knots: Vec<f64>,
    pub bary: Vec<f64>,
    pub weights: Vec<f64>,
}

impl From<&CcRule> for Axis {
    fn from(r: &CcRule) -> Self {
        Self {
            knots: r.knots.clone(),
            bary: r.bary.clone(),
            weights: r.weights.clone(),
        }
    }
}

fn axes_for(beta: &[usize], rules: &mut CcRules) -> Result<Vec<Axis>> {
    let max = beta.iter().copied().max().unwrap_or(1);
    rules.ensure(max)?;
    Ok(beta.iter().map(|&b| Axis::from(rules.get(b))).collect())
}

/// The Cartesian CC grid `T_β` with tensor quadrature weights.
///
/// Points are in physical coordinates, ordered row-major with the last
/// dimension varying fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorGrid {
    pub beta: Vec<usize>,
    pub points: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
}

impl TensorGrid {
    pub fn new(domain: &ParamDomain, beta: &[usize]) -> Result<Self> {
        Self::with_rules(domain, beta, &mut CcRules::new())
    }

    pub fn with_rules(domain: &ParamDomain, beta: &[usize], rules: &mut CcRules) -> Result<Self> {
        check_beta(domain, beta)?;
        let axes = axes_for(beta, rules)?;
        let shape: Vec<usize> = axes.iter().map(|a| a.knots.len()).collect();
        let total: usize = shape.iter().product();
        let mut points = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut t = vec![0.0; beta.len()];
        for flat in 0..total {
            let mut w = 1.0;
            let mut rem = flat;
            for n in (0..shape.len()).rev() {
                let j = rem % shape[n];
                rem /= shape[n];
                t[n] = axes[n].knots[j];
                w *= axes[n].weights[j];
            }
            points.push(domain.from_reference(&t));
            weights.push(w);
        }
        Ok(Self {
            beta: beta.to_vec(),
            points,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn check_beta(domain: &ParamDomain, beta: &[usize]) -> Result<()> {
    if beta.len() != domain.dim() {
        return Err(Error::Argument(format!(
            "level vector has {} entries for a {}-dimensional domain",
            beta.len(),
            domain.dim()
        )));
    }
    if beta.iter().any(|&b| b > 20) {
        return Err(Error::Argument(format!("level {beta:?} too large")));
    }
    Ok(())
}

/// Contracts a row-major tensor of `values` (last axis fastest) with one
/// basis vector per axis.
pub(crate) fn contract(values: &[f64], basis: &[&[f64]], scratch: &mut Vec<f64>) -> f64 {
    let mut len = values.len();
    scratch.clear();
    scratch.extend_from_slice(values);
    for b in basis.iter().rev() {
        let m = b.len();
        len /= m;
        for i in 0..len {
            let row = &scratch[i * m..(i + 1) * m];
            let s: f64 = row.iter().zip(b.iter()).map(|(v, l)| v * l).sum();
            scratch[i] = s;
        }
    }
    scratch[0]
}

/// Lagrange interpolant `U_{α,β}` of one fidelity on `T_β`, or the zero
/// operator when any entry of `α` or `β` is zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorInterpolant {
    level: usize,
    beta: Vec<usize>,
    axes: Vec<Axis>,
    values: Vec<f64>,
    /// `Σ_j G(y_j)^r ω_j` for `r = 1..=4`.
    raw_moments: [f64; 4],
    domain: ParamDomain,
}

impl TensorInterpolant {
    /// Evaluates `model` at level `alpha` on every point of `T_beta`.
    pub fn build(model: &mut FidelityModel, alpha: usize, beta: &[usize]) -> Result<Self> {
        Self::build_with_rules(model, alpha, beta, &mut CcRules::new())
    }

    pub fn build_with_rules(
        model: &mut FidelityModel,
        alpha: usize,
        beta: &[usize],
        rules: &mut CcRules,
    ) -> Result<Self> {
        let domain = model.domain().clone();
        check_beta(&domain, beta)?;
        if alpha == 0 || beta.contains(&0) {
            return Ok(Self {
                level: alpha,
                beta: beta.to_vec(),
                axes: Vec::new(),
                values: Vec::new(),
                raw_moments: [0.0; 4],
                domain,
            });
        }
        let grid = TensorGrid::with_rules(&domain, beta, rules)?;
        let values = grid
            .points
            .iter()
            .map(|y| model.evaluate(alpha, y))
            .collect::<Result<Vec<_>>>()?;
        Self::assemble(domain, alpha, beta, grid, values, rules)
    }

    /// Interpolant from values already known on `T_beta` (same ordering as
    /// [`TensorGrid::points`]).
    pub fn from_values(domain: ParamDomain, alpha: usize, beta: &[usize], values: Vec<f64>) -> Result<Self> {
        check_beta(&domain, beta)?;
        if alpha == 0 || beta.contains(&0) {
            return Err(Error::Argument("zero level has no grid".into()));
        }
        let mut rules = CcRules::new();
        let grid = TensorGrid::with_rules(&domain, beta, &mut rules)?;
        if values.len() != grid.len() {
            return Err(Error::Argument(format!(
                "grid {beta:?} has {} points, got {} values",
                grid.len(),
                values.len()
            )));
        }
        Self::assemble(domain, alpha, beta, grid, values, &mut rules)
    }

    fn assemble(
        domain: ParamDomain,
        alpha: usize,
        beta: &[usize],
        grid: TensorGrid,
        values: Vec<f64>,
        rules: &mut CcRules,
    ) -> Result<Self> {
        let mut raw_moments = [0.0; 4];
        for (v, w) in values.iter().zip(&grid.weights) {
            for (r, m) in raw_moments.iter_mut().enumerate() {
                *m += powi(*v, r as u32 + 1) * w;
            }
        }
        Ok(Self {
            level: alpha,
            beta: beta.to_vec(),
            axes: axes_for(beta, rules)?,
            values,
            raw_moments,
            domain,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.is_empty()
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn beta(&self) -> &[usize] {
        &self.beta
    }

    /// Model values on the grid, row-major with the last dimension fastest.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Tensor quadrature of `G^r`, `1 <= r <= 4`.
    pub fn quadrature(&self, r: usize) -> Result<f64> {
        if !(1..=4).contains(&r) {
            return Err(Error::Argument(format!("power {r} outside 1..=4")));
        }
        Ok(self.raw_moments[r - 1])
    }

    /// Value at a physical point.
    pub fn evaluate(&self, y: &[f64]) -> Result<f64> {
        self.domain.check(y)?;
        Ok(self.evaluate_reference(&self.domain.to_reference(y)))
    }

    /// Value at a point of `[-1, 1]^N`; no domain check.
    pub fn evaluate_reference(&self, t: &[f64]) -> f64 {
        if self.is_zero() {
            return 0.0;
        }
        let basis: Vec<Vec<f64>> = self
            .axes
            .iter()
            .zip(t)
            .map(|(a, &x)| {
                let mut out = vec![0.0; a.knots.len()];
                lagrange_basis(&a.knots, &a.bary, x, &mut out);
                out
            })
            .collect();
        let refs: Vec<&[f64]> = basis.iter().map(|b| b.as_slice()).collect();
        contract(&self.values, &refs, &mut Vec::new())
    }
}
