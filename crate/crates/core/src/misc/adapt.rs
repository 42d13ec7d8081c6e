//! Greedy profit-driven growth of the index set.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::approx::{work_contribution, Contribution, MiscApproximation};
use super::index::MultiIndex;
use crate::model::FidelityModel;
use crate::rng::{self, label};
use crate::{Error, Result};

/// Which error contribution drives the profit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfitKind {
    /// Change of the quadrature estimate of the mean.
    Quadrature,
    /// Largest pointwise change of the surrogate over a testing set.
    Surrogate,
}

/// Any subset may be set; the loop stops at the first one hit. Without any,
/// it runs until the admissible indices are exhausted.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct StoppingCriteria {
    /// Stop once the accumulated model cost exceeds this. The check happens
    /// before each iteration, so the iteration that crosses the budget is
    /// completed (all its candidates explored and paid for).
    pub max_cost: Option<f64>,
    pub max_iterations: Option<usize>,
    /// Stop instead of accepting an index whose profit is below this.
    pub min_profit: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaptOptions {
    pub profit: ProfitKind,
    pub stop: StoppingCriteria,
    /// Size of the testing set for [`ProfitKind::Surrogate`].
    pub testing_points: usize,
    /// Seed of the testing set.
    pub seed: u64,
    /// Candidates with any parametric level above this are never explored.
    pub max_beta: usize,
}

impl Default for AdaptOptions {
    fn default() -> Self {
        Self {
            profit: ProfitKind::Surrogate,
            stop: StoppingCriteria::default(),
            testing_points: 10_000,
            seed: 0,
            max_beta: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    Budget,
    Iterations,
    Profit,
    Exhausted,
}

/// State handed to the observer after initialisation (iteration 0) and after
/// every accepted index.
pub struct IterationView<'a> {
    pub iteration: usize,
    pub cost: f64,
    pub accepted: Option<&'a MultiIndex>,
    pub approx: &'a MiscApproximation,
    pub model: &'a FidelityModel,
}

#[derive(Debug, Clone)]
pub struct AdaptOutcome<R> {
    pub approx: MiscApproximation,
    pub records: Vec<R>,
    /// Accepted indices in order.
    pub accepted: Vec<MultiIndex>,
    pub stop: StopReason,
}

/// The seeded testing set, in `[-1, 1]^N` reference coordinates.
pub fn testing_set(model: &FidelityModel, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let domain = model.domain();
    let mut r = rng::stream(seed, &[label::TESTING_SET]);
    rng::unit_points(&mut r, count, domain.dim())
        .iter()
        .map(|u| domain.to_reference(&domain.from_unit(u)))
        .collect()
}

/// Runs the adaptive loop from `Λ = J = {[1, ..., 1]}`.
///
/// Each iteration explores every reduced-margin index of `Λ` that is not yet
/// in `J` (computing its interpolant and profit), then moves the best
/// explored index into `Λ`; ties go to the lexicographically smallest index.
/// The returned approximation evaluates `S_J`.
pub fn adapt<R>(
    model: &mut FidelityModel,
    options: &AdaptOptions,
    mut observe: impl FnMut(&IterationView<'_>) -> Result<R>,
) -> Result<AdaptOutcome<R>> {
    if options.max_beta == 0 {
        return Err(Error::Argument("max_beta must be at least 1".into()));
    }
    let testing = match options.profit {
        ProfitKind::Surrogate => {
            if options.testing_points == 0 {
                return Err(Error::Argument("empty testing set".into()));
            }
            testing_set(model, options.testing_points, options.seed)
        }
        ProfitKind::Quadrature => Vec::new(),
    };
    let mut approx = MiscApproximation::new(model)?;
    let mut records = Vec::new();
    records.push(observe(&IterationView {
        iteration: 0,
        cost: model.accumulated_cost(),
        accepted: None,
        approx: &approx,
        model,
    })?);

    let mut pending: BTreeMap<MultiIndex, f64> = BTreeMap::new();
    let mut accepted = Vec::new();
    let stop = loop {
        if options.stop.max_cost.is_some_and(|b| model.accumulated_cost() > b) {
            break StopReason::Budget;
        }
        if options.stop.max_iterations.is_some_and(|n| accepted.len() >= n) {
            break StopReason::Iterations;
        }
        let candidates: Vec<MultiIndex> = approx
            .lambda()
            .reduced_margin()
            .iter()
            .filter(|k| {
                k[0] <= model.levels()
                    && k.entries()[1..].iter().all(|&b| b <= options.max_beta)
                    && !approx.explored().contains(k)
            })
            .cloned()
            .collect();
        for cand in candidates {
            let error = match options.profit {
                ProfitKind::Quadrature => approx.error_contribution_quadrature(model, &cand)?,
                ProfitKind::Surrogate => {
                    approx.error_contribution_surrogate_reference(model, &cand, &testing)?
                }
            };
            if !error.is_finite() {
                return Err(Error::Numeric(alloc::format!(
                    "error contribution of {cand} is {error}"
                )));
            }
            let work = work_contribution(model, &cand)?;
            let profit = error / work;
            approx.explore(model, &cand)?;
            approx.record(&cand, Contribution { error, work, profit });
            pending.insert(cand, profit);
        }
        let mut best: Option<(&MultiIndex, f64)> = None;
        for (k, &p) in &pending {
            if best.is_none_or(|(_, bp)| p > bp) {
                best = Some((k, p));
            }
        }
        let Some((best, profit)) = best.map(|(k, p)| (k.clone(), p)) else {
            break StopReason::Exhausted;
        };
        if options.stop.min_profit.is_some_and(|t| profit < t) {
            break StopReason::Profit;
        }
        pending.remove(&best);
        approx.accept(&best)?;
        debug_assert!(approx.lambda().is_downward_closed());
        accepted.push(best);
        records.push(observe(&IterationView {
            iteration: accepted.len(),
            cost: model.accumulated_cost(),
            accepted: accepted.last(),
            approx: &approx,
            model,
        })?);
    };
    Ok(AdaptOutcome {
        approx,
        records,
        accepted,
        stop,
    })
}
