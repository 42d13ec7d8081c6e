//! Running a configured experiment and writing its artifacts.

use std::fs;
use std::path::{Path, PathBuf};

use mfuq_core::metrics::{
    discrete_errors, error_points, ks_statistic, moments_by_misc_quadrature, moments_by_tensor_quadrature,
    relative_moment_errors, ConvergenceRecord, MomentSet, Reference,
};
use mfuq_core::misc::adapt;
use mfuq_core::model::ParamDomain;
use mfuq_core::srbf::{adaptive_run, PredictScratch};
use serde::Serialize;

use crate::config::{ExperimentConfig, MethodKind, CONFIG_VERSION};
use crate::dump::{MiscDump, MomentDump, SrbfDump, SurrogateDump, SurrogateFile, TensorDump};
use crate::error::{BenchError, Result};
use crate::records::records_csv;

/// The ground truth every record is scored against.
pub struct Truth {
    pub reference: Reference,
    /// Error points (physical coordinates) and reference values there.
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

impl Truth {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let model = cfg.build_model()?;
        let reference = Reference::build(&model, cfg.reference_level(), cfg.reference.order)?;
        let points = error_points(model.domain(), cfg.metrics.error_points, cfg.method.seed);
        let values = points
            .iter()
            .map(|y| reference.interpolant.evaluate(y))
            .collect::<mfuq_core::Result<Vec<_>>>()?;
        Ok(Self { reference, points, values })
    }

    /// A record for a surrogate with `moments` and `values` at the error
    /// points.
    pub fn score(&self, iteration: usize, cost: f64, moments: MomentSet, values: &[f64]) -> mfuq_core::Result<ConvergenceRecord> {
        let (err_l2, err_linf) = discrete_errors(values, &self.values)?;
        Ok(ConvergenceRecord {
            iteration,
            cost,
            moments,
            err_moments: relative_moment_errors(&moments, &self.reference.moments),
            err_l2,
            err_linf,
            ks: ks_statistic(values, &self.values)?,
        })
    }
}

#[derive(Debug, Clone)]
pub struct RunResult {
    pub method: MethodKind,
    /// Quadrature moments for MISC, tensor quadrature of `S_M` for SRBF.
    pub records: Vec<ConvergenceRecord>,
    /// MISC only: the same states with Monte Carlo moments.
    pub mc_records: Option<Vec<ConvergenceRecord>>,
    pub surrogate: SurrogateFile,
    pub stop: String,
    pub final_cost: f64,
    pub eval_counts: Vec<usize>,
    pub reference: MomentSet,
}

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunResult> {
    cfg.validate()?;
    let truth = Truth::build(cfg)?;
    let mut model = cfg.build_model()?;
    let domain = model.domain().clone();
    match cfg.method.kind {
        MethodKind::MiscQuadratureProfit | MethodKind::MiscSurrogateProfit => {
            let mc = cfg.monte_carlo();
            let (with_mc, every) = (cfg.misc.mc_moments, cfg.misc.mc_every);
            let sampled = |s: &mfuq_core::misc::MiscSurrogate, iteration, cost, values: &[f64]| -> mfuq_core::Result<_> {
                let m = mc.moments(&domain, |p| s.evaluate_many(p))?;
                truth.score(iteration, cost, m, values)
            };
            let out = adapt(&mut model, &cfg.adapt_options(), |v| {
                let s = v.approx.surrogate()?;
                let values = s.evaluate_many(&truth.points)?;
                let quad = truth.score(v.iteration, v.cost, moments_by_misc_quadrature(v.approx)?, &values)?;
                let mc = if with_mc && v.iteration % every == 0 {
                    Some(sampled(&s, v.iteration, v.cost, &values)?)
                } else {
                    None
                };
                Ok((quad, mc))
            })?;
            let (records, mut mc_records): (Vec<_>, Vec<Option<_>>) = out.records.into_iter().unzip();
            if let (true, Some(None), Some(q)) = (with_mc, mc_records.last(), records.last()) {
                let s = out.approx.surrogate()?;
                let values = s.evaluate_many(&truth.points)?;
                *mc_records.last_mut().unwrap() = Some(sampled(&s, q.iteration, q.cost, &values)?);
            }
            let mc_records: Option<Vec<_>> = with_mc.then(|| mc_records.into_iter().flatten().collect());
            Ok(RunResult {
                method: cfg.method.kind,
                records,
                mc_records,
                surrogate: SurrogateFile::new(SurrogateDump::Misc(MiscDump::new(&out.approx)?)),
                stop: format!("{:?}", out.stop).to_lowercase(),
                final_cost: model.accumulated_cost(),
                eval_counts: model.eval_counts().to_vec(),
                reference: truth.reference.moments,
            })
        }
        MethodKind::Srbf => {
            let order = cfg.metrics.srbf_quadrature_order;
            let options = cfg.srbf_options();
            let out = adaptive_run(&mut model, &options, |v| {
                let mf = v.surrogate;
                let mut s = PredictScratch::default();
                let mut predict = |pts: &[Vec<f64>]| -> Vec<f64> { pts.iter().map(|y| mf.predict_with(&domain.to_unit(y), &mut s)).collect() };
                let moments = moments_by_tensor_quadrature(&domain, order, |pts| Ok(predict(pts)))?;
                let values = predict(&truth.points);
                truth.score(v.iteration, v.cost, moments, &values)
            })?;
            Ok(RunResult {
                method: cfg.method.kind,
                records: out.records,
                mc_records: None,
                surrogate: SurrogateFile::new(SurrogateDump::Srbf(SrbfDump::new(&out.surrogate, &domain, &options.config)?)),
                stop: format!("{:?}", out.stop).to_lowercase(),
                final_cost: model.accumulated_cost(),
                eval_counts: model.eval_counts().to_vec(),
                reference: truth.reference.moments,
            })
        }
    }
}

/// The reference interpolant with its moments, as a surrogate file.
pub fn build_reference(cfg: &ExperimentConfig) -> Result<SurrogateFile> {
    cfg.validate()?;
    let model = cfg.build_model()?;
    let r = Reference::build(&model, cfg.reference_level(), cfg.reference.order)?;
    Ok(SurrogateFile::new(SurrogateDump::Tensor(TensorDump::new(&r.interpolant, model.domain(), Some(&r.moments)))))
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema: u32,
    tool: &'static str,
    version: &'static str,
    config_version: u32,
    command: &'a str,
    seed: u64,
    budget: f64,
    /// Re-parsable with `--config`.
    config_toml: String,
    config: &'a ExperimentConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    run: Option<RunSummary<'a>>,
    outputs: Vec<String>,
}

#[derive(Serialize)]
struct RunSummary<'a> {
    method: &'static str,
    stop: &'a str,
    iterations: usize,
    final_cost: f64,
    eval_counts: &'a [usize],
    reference_level: usize,
    reference_order: usize,
    reference_moments: MomentDump,
}

fn write(dir: &Path, name: &str, text: &str, written: &mut Vec<String>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, text).map_err(|e| BenchError::io(&path, e))?;
    written.push(name.to_string());
    Ok(())
}

fn manifest(cfg: &ExperimentConfig, command: &str, run: Option<RunSummary<'_>>, mut outputs: Vec<String>) -> Result<String> {
    outputs.push("manifest.json".into());
    let m = Manifest {
        schema: crate::dump::SCHEMA,
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        config_version: CONFIG_VERSION,
        command,
        seed: cfg.method.seed,
        budget: cfg.method.budget,
        config_toml: toml::to_string(cfg).map_err(|e| BenchError::Input(e.to_string()))?,
        config: cfg,
        run,
        outputs,
    };
    let mut s = serde_json::to_string_pretty(&m).expect("manifest serializes");
    s.push('\n');
    Ok(s)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| BenchError::io(dir, e))
}

/// Writes `records.csv`, `records_mc.csv` (MISC with Monte Carlo moments),
/// `surrogate.json` and `manifest.json` into `dir`; returns the file names.
pub fn write_run(cfg: &ExperimentConfig, result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    write(dir, "records.csv", &records_csv(&result.records), &mut written)?;
    if let Some(mc) = &result.mc_records {
        write(dir, "records_mc.csv", &records_csv(mc), &mut written)?;
    }
    write(dir, "surrogate.json", &result.surrogate.to_json(), &mut written)?;
    let summary = RunSummary {
        method: result.method.name(),
        stop: &result.stop,
        iterations: result.records.len().saturating_sub(1),
        final_cost: result.final_cost,
        eval_counts: &result.eval_counts,
        reference_level: cfg.reference_level(),
        reference_order: cfg.reference.order,
        reference_moments: MomentDump::from(&result.reference),
    };
    let text = manifest(cfg, "run", Some(summary), written.clone())?;
    write(dir, "manifest.json", &text, &mut written)?;
    Ok(written.into_iter().map(|n| dir.join(n)).collect())
}

/// Writes `reference.json` and `manifest.json` into `dir`.
pub fn write_reference(cfg: &ExperimentConfig, file: &SurrogateFile, dir: &Path) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    write(dir, "reference.json", &file.to_json(), &mut written)?;
    let text = manifest(cfg, "reference", None, written.clone())?;
    write(dir, "manifest.json", &text, &mut written)?;
    Ok(written.into_iter().map(|n| dir.join(n)).collect())
}

/// Reads a points CSV (header `y1,...,yN`, or no header) for `domain`.
pub fn read_points(text: &str, domain: &ParamDomain) -> Result<Vec<Vec<f64>>> {
    let mut r = csv::ReaderBuilder::new().has_headers(false).from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (i, rec) in r.records().enumerate() {
        let rec = rec.map_err(|e| BenchError::Input(format!("points: {e}")))?;
        if i == 0 && rec.iter().any(|f| f.trim().parse::<f64>().is_err()) {
            continue;
        }
        let p = rec
            .iter()
            .map(|f| f.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| BenchError::Input(format!("points: row {} is not numeric", i + 1)))?;
        if p.len() != domain.dim() {
            return Err(BenchError::Input(format!("points: row {} has {} coordinates, expected {}", i + 1, p.len(), domain.dim())));
        }
        domain
            .check(&p)
            .map_err(|e| BenchError::Input(format!("points: row {}: {e}", i + 1)))?;
        out.push(p);
    }
    Ok(out)
}
