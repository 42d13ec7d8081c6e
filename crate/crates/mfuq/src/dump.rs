//! JSON dumps of surrogates, enough to evaluate them without the model.

use mfuq_core::metrics::MomentSet;
use mfuq_core::misc::{MiscApproximation, MiscSurrogate, TensorInterpolant};
use mfuq_core::model::ParamDomain;
use mfuq_core::srbf::{FitMode, MfSrbfSurrogate, SrbfConfig, SrbfSurrogate, TauSamples};
use serde::{Deserialize, Serialize};

use crate::error::{BenchError, Result};

pub const SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateFile {
    pub schema: u32,
    #[serde(flatten)]
    pub surrogate: SurrogateDump,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SurrogateDump {
    Misc(MiscDump),
    Srbf(SrbfDump),
    /// A single tensor interpolant (the reference solution).
    Tensor(TensorDump),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiscDump {
    pub bounds: Vec<[f64; 2]>,
    /// Accepted indices `[α, β_1, ..., β_N]`.
    pub index_set: Vec<Vec<usize>>,
    pub coefficients: Vec<Coefficient>,
    /// Coefficient-weighted grid values merged by `β`, in the grid's
    /// row-major knot order.
    pub terms: Vec<Term>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficient {
    pub index: Vec<usize>,
    pub c: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub beta: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SrbfDump {
    pub bounds: Vec<[f64; 2]>,
    pub tau: TauDump,
    pub level_costs: Vec<f64>,
    /// `F₁` then the error layers.
    pub layers: Vec<LayerDump>,
}

/// The exponents are regenerated from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauDump {
    pub seed: u64,
    pub theta: usize,
    pub tau_min: f64,
    pub tau_max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerDump {
    pub interpolating: bool,
    /// Unit-hypercube coordinates.
    pub centers: Vec<Vec<f64>>,
    /// Exponent-major: the weights for `τ_i` are `weights[i·K..(i+1)·K]`.
    pub weights: Vec<f64>,
    /// Low-order parts of the weights (may be empty).
    #[serde(default)]
    pub weights_lo: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorDump {
    pub bounds: Vec<[f64; 2]>,
    pub level: usize,
    pub beta: Vec<usize>,
    pub values: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moments: Option<MomentDump>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentDump {
    pub mean: f64,
    pub variance: f64,
    pub skewness: Option<f64>,
    pub kurtosis: Option<f64>,
}

impl From<&MomentSet> for MomentDump {
    fn from(m: &MomentSet) -> Self {
        Self {
            mean: m.mean,
            variance: m.variance,
            skewness: m.skewness,
            kurtosis: m.kurtosis,
        }
    }
}

fn bounds_of(d: &ParamDomain) -> Vec<[f64; 2]> {
    d.bounds().iter().map(|&(a, b)| [a, b]).collect()
}

fn domain_of(bounds: &[[f64; 2]]) -> Result<ParamDomain> {
    Ok(ParamDomain::new(bounds.iter().map(|b| (b[0], b[1])).collect())?)
}

impl MiscDump {
    pub fn new(approx: &MiscApproximation) -> Result<Self> {
        let s = approx.surrogate()?;
        Ok(Self {
            bounds: bounds_of(approx.domain()),
            index_set: approx.lambda().iter().map(|k| k.entries().to_vec()).collect(),
            coefficients: approx
                .coefficients()
                .iter()
                .filter(|(_, c)| **c != 0)
                .map(|(k, c)| Coefficient { index: k.entries().to_vec(), c: *c })
                .collect(),
            terms: s.terms().iter().map(|t| Term { beta: t.beta.clone(), values: t.values.clone() }).collect(),
        })
    }
}

impl SrbfDump {
    pub fn new(mf: &MfSrbfSurrogate, domain: &ParamDomain, config: &SrbfConfig) -> Result<Self> {
        let seed = mf
            .base()
            .taus()
            .seed()
            .ok_or_else(|| BenchError::Input("exponents without a seed cannot be dumped".into()))?;
        Ok(Self {
            bounds: bounds_of(domain),
            tau: TauDump {
                seed,
                theta: config.theta,
                tau_min: config.tau_min,
                tau_max: config.tau_max,
            },
            level_costs: mf.level_costs().to_vec(),
            layers: mf
                .layers()
                .iter()
                .map(|l| LayerDump {
                    interpolating: l.mode() == FitMode::Interpolation,
                    centers: l.centers().to_vec(),
                    weights: l.weights().to_vec(),
                    weights_lo: l.weights_lo().to_vec(),
                })
                .collect(),
        })
    }
}

impl TensorDump {
    pub fn new(u: &TensorInterpolant, domain: &ParamDomain, moments: Option<&MomentSet>) -> Self {
        Self {
            bounds: bounds_of(domain),
            level: u.level(),
            beta: u.beta().to_vec(),
            values: u.values().to_vec(),
            moments: moments.map(MomentDump::from),
        }
    }
}

impl SurrogateFile {
    pub fn new(surrogate: SurrogateDump) -> Self {
        Self { schema: SCHEMA, surrogate }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("dumps serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let v: serde_json::Value = serde_json::from_str(text).map_err(|e| BenchError::Input(format!("surrogate file: {e}")))?;
        match v.get("schema").and_then(|s| s.as_u64()) {
            Some(s) if s == SCHEMA as u64 => {}
            other => return Err(BenchError::Input(format!("surrogate file: unsupported schema {other:?}"))),
        }
        serde_json::from_value(v).map_err(|e| BenchError::Input(format!("surrogate file: {e}")))
    }

    pub fn load(&self) -> Result<LoadedSurrogate> {
        Ok(match &self.surrogate {
            SurrogateDump::Misc(d) => {
                let domain = domain_of(&d.bounds)?;
                let s = MiscSurrogate::from_pieces(domain, d.terms.iter().map(|t| (1.0, t.beta.as_slice(), t.values.as_slice())))?;
                LoadedSurrogate::Misc(s)
            }
            SurrogateDump::Tensor(d) => {
                let domain = domain_of(&d.bounds)?;
                let u = TensorInterpolant::from_values(domain.clone(), d.level, &d.beta, d.values.clone())?;
                LoadedSurrogate::Tensor { domain, u }
            }
            SurrogateDump::Srbf(d) => {
                let domain = domain_of(&d.bounds)?;
                let config = SrbfConfig {
                    theta: d.tau.theta,
                    tau_min: d.tau.tau_min,
                    tau_max: d.tau.tau_max,
                    ..Default::default()
                };
                let taus = TauSamples::draw(d.tau.seed, &config)?;
                let layers = d
                    .layers
                    .iter()
                    .map(|l| {
                        let mode = if l.interpolating { FitMode::Interpolation } else { FitMode::Regression };
                        SrbfSurrogate::from_parts(l.centers.clone(), taus.clone(), l.weights.clone(), l.weights_lo.clone(), mode)
                    })
                    .collect::<mfuq_core::Result<Vec<_>>>()?;
                if layers.iter().any(|l| l.centers()[0].len() != domain.dim()) {
                    return Err(BenchError::Input("surrogate file: centers do not match the bounds".into()));
                }
                LoadedSurrogate::Srbf {
                    domain,
                    mf: MfSrbfSurrogate::from_layers(layers, d.level_costs.clone())?,
                }
            }
        })
    }
}

pub enum LoadedSurrogate {
    Misc(MiscSurrogate),
    Srbf { domain: ParamDomain, mf: MfSrbfSurrogate },
    Tensor { domain: ParamDomain, u: TensorInterpolant },
}

impl LoadedSurrogate {
    pub fn domain(&self) -> &ParamDomain {
        match self {
            Self::Misc(s) => s.domain(),
            Self::Srbf { domain, .. } | Self::Tensor { domain, .. } => domain,
        }
    }

    /// Value at a physical point.
    pub fn evaluate(&self, y: &[f64]) -> Result<f64> {
        Ok(match self {
            Self::Misc(s) => s.evaluate(y)?,
            Self::Tensor { u, .. } => u.evaluate(y)?,
            Self::Srbf { domain, mf } => {
                domain.check(y)?;
                mf.predict(&domain.to_unit(y))
            }
        })
    }

    pub fn has_uncertainty(&self) -> bool {
        matches!(self, Self::Srbf { .. })
    }

    /// The SRBF band width; `None` for the other kinds.
    pub fn uncertainty(&self, y: &[f64]) -> Result<Option<f64>> {
        match self {
            Self::Srbf { domain, mf } => {
                domain.check(y)?;
                Ok(Some(mf.uncertainty(&domain.to_unit(y))))
            }
            _ => Ok(None),
        }
    }
}
