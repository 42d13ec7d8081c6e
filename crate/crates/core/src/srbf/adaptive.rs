//! Maximum-uncertainty adaptive sampling with parallel infill.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use super::loocv::loocv_select_k;
use super::mf::{build_mf_surrogate, combined, MfSrbfSurrogate};
use super::pso::{pso_maximize, PsoConfig};
use super::surrogate::{PredictScratch, SrbfConfig, TauSamples};
use super::training::TrainingSet;
use crate::math::euclidean_distance;
use crate::model::{FidelityModel, ParamDomain};
use crate::{Error, Result};

/// How each layer picks its center count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CenterMode {
    /// LOOCV over candidates up to `J`.
    #[default]
    Auto,
    /// Always `K = J`; no LOOCV.
    Interpolation,
    /// LOOCV over candidates up to `J − 1`.
    Regression,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SrbfStop {
    /// Checked after each recorded state; the batch in flight is completed.
    pub max_cost: Option<f64>,
    pub max_iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SrbfOptions {
    /// Points added per iteration (`p`).
    pub batch: usize,
    pub mode: CenterMode,
    pub config: SrbfConfig,
    pub pso: PsoConfig,
    pub seed: u64,
    pub stop: SrbfStop,
}

impl Default for SrbfOptions {
    fn default() -> Self {
        Self {
            batch: 1,
            mode: CenterMode::Auto,
            config: SrbfConfig::default(),
            pso: PsoConfig::default(),
            seed: 0,
            stop: SrbfStop::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SrbfStopReason {
    Budget,
    Iterations,
    /// The uncertainty vanished everywhere the swarm looked.
    Degenerate,
}

/// State handed to the observer, once per iteration including the initial
/// design (iteration 0).
pub struct SrbfIterationView<'a> {
    pub iteration: usize,
    pub cost: f64,
    pub surrogate: &'a MfSrbfSurrogate,
    pub training: &'a [TrainingSet],
    pub model: &'a FidelityModel,
}

#[derive(Debug, Clone)]
pub struct SrbfOutcome<R> {
    pub surrogate: MfSrbfSurrogate,
    pub training: Vec<TrainingSet>,
    pub taus: TauSamples,
    pub records: Vec<R>,
    /// `(unit point, highest level)` pairs evaluated per iteration.
    pub batches: Vec<Vec<(Vec<f64>, usize)>>,
    pub stop: SrbfStopReason,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Infill {
    /// Unit-hypercube coordinates.
    pub point: Vec<f64>,
    pub uncertainty: f64,
    /// How many of the lowest fidelities already hold `point` (nonzero when
    /// the maximizer snapped onto an existing input).
    pub present: usize,
    pub degenerate: bool,
}

/// A maximizer closer than this to an existing input is moved onto it; an
/// input already held by every fidelity is never chosen again.
pub const MIN_SEPARATION: f64 = 1e-6;

fn nearest_input(set: &TrainingSet, y: &[f64]) -> Option<usize> {
    let mut best = None;
    let mut best_d = MIN_SEPARATION;
    for (i, p) in set.points().iter().enumerate() {
        let d = euclidean_distance(p, y);
        if d < best_d {
            best_d = d;
            best = Some(i);
        }
    }
    best
}

/// `argmax U_{S_M}` by deterministic PSO over the unit hypercube.
///
/// `sets` are the current training sets, lowest fidelity first, each a
/// subset of the one before. Inputs of the highest set are excluded. A
/// maximizer near an input of the lowest set snaps onto that input, so the
/// point only extends the fidelities that lack it. When no positive
/// uncertainty is found the domain center is returned with `degenerate`
/// set.
pub fn infill_point(mf: &MfSrbfSurrogate, sets: &[TrainingSet], pso: &PsoConfig) -> Result<Infill> {
    let (Some(lowest), Some(highest)) = (sets.first(), sets.last()) else {
        return Err(Error::Argument("no training sets".into()));
    };
    let dim = lowest.dim();
    let unit = ParamDomain::unit(dim);
    let mut s = PredictScratch::default();
    let mut comps = Vec::with_capacity(mf.levels());
    let best = pso_maximize(&unit, pso, |pts| {
        Ok(pts
            .iter()
            .map(|y| {
                if nearest_input(highest, y).is_some() {
                    return -1.0;
                }
                comps.clear();
                for l in mf.layers() {
                    comps.push(l.predict_and_uncertainty(y, &mut s).1);
                }
                combined(&comps)
            })
            .collect())
    })?;
    if !(best.value > 0.0) {
        return Ok(Infill {
            point: vec![0.5; dim],
            uncertainty: 0.0,
            present: 0,
            degenerate: true,
        });
    }
    let point = match nearest_input(lowest, &best.unit_point) {
        Some(i) => lowest.points()[i].clone(),
        None => best.unit_point,
    };
    let present = sets.iter().take_while(|t| t.contains(&point)).count();
    if present == sets.len() {
        return Ok(Infill {
            point: vec![0.5; dim],
            uncertainty: 0.0,
            present: 0,
            degenerate: true,
        });
    }
    Ok(Infill {
        point,
        uncertainty: best.value,
        present,
        degenerate: false,
    })
}

/// The `2N + 1` initial inputs: the center, then the center of each face
/// (lower before upper, dimension by dimension).
pub fn initial_design(dim: usize) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.5; dim]];
    for n in 0..dim {
        for side in [0.0, 1.0] {
            let mut p = vec![0.5; dim];
            p[n] = side;
            out.push(p);
        }
    }
    out
}

fn candidates(mode: CenterMode, prev: Option<usize>, j: usize) -> Vec<usize> {
    let cap = match mode {
        CenterMode::Regression => j.saturating_sub(1).max(1),
        _ => j,
    };
    let set: BTreeSet<usize> = match prev {
        None => (1..=cap).collect(),
        Some(k) => [k, k + 1].into_iter().filter(|&c| c >= 1 && c <= cap).collect(),
    };
    if set.is_empty() {
        vec![cap]
    } else {
        set.into_iter().collect()
    }
}

/// Runs the adaptive loop on `model`, whose inputs are mapped from the unit
/// hypercube.
///
/// Every iteration builds the stack (with LOOCV per layer unless in
/// interpolation mode), records it, checks the stops, then picks `batch`
/// points. Between picks the chosen point is added to `T_1..T_k` with the
/// surrogate's own prediction and the stack is refitted; afterwards the
/// guesses are discarded and the true model is evaluated at the picks.
pub fn adaptive_run<R>(
    model: &mut FidelityModel,
    options: &SrbfOptions,
    mut observe: impl FnMut(&SrbfIterationView<'_>) -> Result<R>,
) -> Result<SrbfOutcome<R>> {
    if options.batch == 0 {
        return Err(Error::Argument("batch size must be at least 1".into()));
    }
    let taus = TauSamples::draw(options.seed, &options.config)?;
    let loocv_taus = taus.prefix(options.config.loocv_taus);
    let solver = options.config.solver;
    let levels = model.levels();
    let costs = (1..=levels).map(|a| model.cost(a)).collect::<Result<Vec<_>>>()?;
    let domain = model.domain().clone();
    let dim = domain.dim();

    let mut sets: Vec<TrainingSet> = (1..=levels).map(|a| TrainingSet::new(a, dim)).collect();
    for (a, set) in sets.iter_mut().enumerate() {
        for u in initial_design(dim) {
            let v = model.evaluate(a + 1, &domain.from_unit(&u))?;
            set.push(u, v)?;
        }
    }

    let mut ks: Vec<Option<usize>> = vec![None; levels];
    let mut records = Vec::new();
    let mut batches = Vec::new();
    let mut t = 0;
    loop {
        let mf = build_mf_surrogate(&sets, &taus, &costs, solver, |layer, data| {
            let k = match options.mode {
                CenterMode::Interpolation => data.len(),
                mode => {
                    let c = candidates(mode, ks[layer], data.len());
                    loocv_select_k(data, &c, &loocv_taus, solver)?.k_star
                }
            };
            ks[layer] = Some(k);
            Ok(k)
        })?;
        records.push(observe(&SrbfIterationView {
            iteration: t,
            cost: model.accumulated_cost(),
            surrogate: &mf,
            training: &sets,
            model,
        })?);

        let stop = if options.stop.max_cost.is_some_and(|b| model.accumulated_cost() > b) {
            Some(SrbfStopReason::Budget)
        } else if options.stop.max_iterations.is_some_and(|n| t >= n) {
            Some(SrbfStopReason::Iterations)
        } else {
            None
        };
        if let Some(stop) = stop {
            return Ok(SrbfOutcome {
                surrogate: mf,
                training: sets,
                taus,
                records,
                batches,
                stop,
            });
        }

        let mut work = sets.clone();
        let mut guess = mf.clone();
        let mut picks = Vec::with_capacity(options.batch);
        for step in 0..options.batch {
            let inf = infill_point(&guess, &work, &options.pso)?;
            if inf.degenerate {
                break;
            }
            let k = guess.select_fidelity(&inf.point).max(inf.present + 1);
            if step + 1 < options.batch {
                for a in inf.present..k {
                    let v = guess.predict_level(&inf.point, a + 1);
                    work[a].push_provisional(inf.point.clone(), v)?;
                }
                guess = build_mf_surrogate(&work, &taus, &costs, solver, |layer, data| {
                    Ok(match options.mode {
                        CenterMode::Interpolation => data.len(),
                        _ => ks[layer].unwrap_or(1).min(data.len()),
                    })
                })?;
            }
            picks.push((inf.point, k));
        }
        if picks.is_empty() {
            return Ok(SrbfOutcome {
                surrogate: mf,
                training: sets,
                taus,
                records,
                batches,
                stop: SrbfStopReason::Degenerate,
            });
        }
        for (u, k) in &picks {
            let y = domain.from_unit(u);
            for a in 0..*k {
                if !sets[a].contains(u) {
                    let v = model.evaluate(a + 1, &y)?;
                    sets[a].push(u.clone(), v)?;
                }
            }
        }
        batches.push(picks);
        t += 1;
    }
}
