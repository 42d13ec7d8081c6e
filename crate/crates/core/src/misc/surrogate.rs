//! Compact evaluable form of a signed combination of tensor interpolants.
//!
//! Interpolants sharing the same parametric level vector live on the same
//! grid, so their signed values can be summed once; evaluating the result
//! then costs one tensor contraction per distinct level vector.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::cc::{lagrange_basis, level_to_knots, CcRules};
use super::tensor::contract;
use crate::model::ParamDomain;
use crate::{Error, Result};

/// One merged grid: `Σ c_k · values_k` over all interpolants with this `beta`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateTerm {
    pub beta: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct MiscSurrogate {
    domain: ParamDomain,
    terms: Vec<SurrogateTerm>,
    rules: CcRules,
    /// Distinct levels used along each dimension.
    levels: Vec<Vec<usize>>,
}

/// Reusable buffers for [`MiscSurrogate::evaluate_reference`].
#[derive(Debug, Default)]
pub struct EvalScratch {
    basis: Vec<Vec<Vec<f64>>>,
    contraction: Vec<f64>,
}

impl MiscSurrogate {
    /// Merges `(coefficient, beta, grid values)` pieces by `beta`.
    pub fn from_pieces<'a>(
        domain: ParamDomain,
        pieces: impl IntoIterator<Item = (f64, &'a [usize], &'a [f64])>,
    ) -> Result<Self> {
        let mut merged: BTreeMap<Vec<usize>, Vec<f64>> = BTreeMap::new();
        for (c, beta, values) in pieces {
            if c == 0.0 || beta.contains(&0) {
                continue;
            }
            if beta.len() != domain.dim() {
                return Err(Error::Argument(format!(
                    "level vector {beta:?} does not match a {}-dimensional domain",
                    domain.dim()
                )));
            }
            let expected: usize = beta.iter().map(|&b| level_to_knots(b)).product();
            if values.len() != expected {
                return Err(Error::Argument(format!(
                    "grid {beta:?} needs {expected} values, got {}",
                    values.len()
                )));
            }
            let acc = merged
                .entry(beta.to_vec())
                .or_insert_with(|| vec![0.0; expected]);
            for (a, v) in acc.iter_mut().zip(values) {
                *a += c * v;
            }
        }
        let terms: Vec<SurrogateTerm> = merged
            .into_iter()
            .map(|(beta, values)| SurrogateTerm { beta, values })
            .collect();
        let dim = domain.dim();
        let mut levels = vec![Vec::new(); dim];
        for t in &terms {
            for (n, &b) in t.beta.iter().enumerate() {
                if !levels[n].contains(&b) {
                    levels[n].push(b);
                }
            }
        }
        levels.iter_mut().for_each(|l| l.sort_unstable());
        let max = levels.iter().flatten().copied().max().unwrap_or(1);
        let rules = CcRules::with_max_level(max)?;
        Ok(Self {
            domain,
            terms,
            rules,
            levels,
        })
    }

    pub fn domain(&self) -> &ParamDomain {
        &self.domain
    }

    pub fn terms(&self) -> &[SurrogateTerm] {
        &self.terms
    }

    /// Value at a physical point.
    pub fn evaluate(&self, y: &[f64]) -> Result<f64> {
        self.domain.check(y)?;
        Ok(self.evaluate_reference(&self.domain.to_reference(y), &mut EvalScratch::default()))
    }

    /// Values at many physical points, sharing one scratch buffer.
    pub fn evaluate_many(&self, ys: &[Vec<f64>]) -> Result<Vec<f64>> {
        let mut scratch = EvalScratch::default();
        ys.iter()
            .map(|y| {
                self.domain.check(y)?;
                Ok(self.evaluate_reference(&self.domain.to_reference(y), &mut scratch))
            })
            .collect()
    }

    /// Value at a point of `[-1, 1]^N`; no domain check.
    pub fn evaluate_reference(&self, t: &[f64], scratch: &mut EvalScratch) -> f64 {
        if self.terms.is_empty() {
            return 0.0;
        }
        let dim = self.domain.dim();
        scratch.basis.resize_with(dim, Vec::new);
        for n in 0..dim {
            let per_dim = &mut scratch.basis[n];
            let max = self.levels[n].last().copied().unwrap_or(0);
            per_dim.resize_with(max + 1, Vec::new);
            for &b in &self.levels[n] {
                let rule = self.rules.get(b);
                let out = &mut per_dim[b];
                out.resize(rule.len(), 0.0);
                lagrange_basis(&rule.knots, &rule.bary, t[n], out);
            }
        }
        let mut total = 0.0;
        let mut refs: Vec<&[f64]> = Vec::with_capacity(dim);
        for term in &self.terms {
            refs.clear();
            for (n, &b) in term.beta.iter().enumerate() {
                refs.push(&scratch.basis[n][b]);
            }
            total += contract(&term.values, &refs, &mut scratch.contraction);
        }
        total
    }
}
