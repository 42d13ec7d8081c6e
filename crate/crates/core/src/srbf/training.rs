use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec::Vec;

use crate::model::PointKey;
use crate::{Error, Result};

/// Training data of one fidelity, inputs in the unit hypercube.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    level: usize,
    dim: usize,
    points: Vec<Vec<f64>>,
    values: Vec<f64>,
    provisional: Vec<bool>,
    keys: BTreeSet<PointKey>,
}

impl TrainingSet {
    pub fn new(level: usize, dim: usize) -> Self {
        Self {
            level,
            dim,
            points: Vec::new(),
            values: Vec::new(),
            provisional: Vec::new(),
            keys: BTreeSet::new(),
        }
    }

    pub fn from_pairs(level: usize, dim: usize, pairs: impl IntoIterator<Item = (Vec<f64>, f64)>) -> Result<Self> {
        let mut set = Self::new(level, dim);
        for (p, v) in pairs {
            set.push(p, v)?;
        }
        Ok(set)
    }

    pub fn push(&mut self, point: Vec<f64>, value: f64) -> Result<()> {
        self.insert(point, value, false)
    }

    /// Adds a point whose value is a surrogate guess rather than a model
    /// evaluation.
    pub fn push_provisional(&mut self, point: Vec<f64>, value: f64) -> Result<()> {
        self.insert(point, value, true)
    }

    fn insert(&mut self, point: Vec<f64>, value: f64, provisional: bool) -> Result<()> {
        if point.len() != self.dim {
            return Err(Error::Argument(format!(
                "point has {} coordinates, training set has {}",
                point.len(),
                self.dim
            )));
        }
        if point.iter().any(|u| !(0.0..=1.0).contains(u)) {
            return Err(Error::Domain(format!("{point:?} is outside the unit hypercube")));
        }
        if !value.is_finite() {
            return Err(Error::Numeric(format!("non-finite training value at {point:?}")));
        }
        if !self.keys.insert(PointKey::of(&point)) {
            return Err(Error::Structure(format!("duplicate training point {point:?}")));
        }
        self.points.push(point);
        self.values.push(value);
        self.provisional.push(provisional);
        Ok(())
    }

    pub fn contains(&self, point: &[f64]) -> bool {
        self.keys.contains(&PointKey::of(point))
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_provisional(&self, i: usize) -> bool {
        self.provisional[i]
    }

    pub fn provisional_count(&self) -> usize {
        self.provisional.iter().filter(|&&p| p).count()
    }

    /// The same inputs with other values (same order).
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        if values.len() != self.len() {
            return Err(Error::Argument("value count does not match the training set".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Numeric("non-finite training value".into()));
        }
        Ok(Self {
            values,
            ..self.clone()
        })
    }

    /// Copy without point `i`.
    pub fn without(&self, i: usize) -> Self {
        let mut out = self.clone();
        let p = out.points.remove(i);
        out.values.remove(i);
        out.provisional.remove(i);
        out.keys.remove(&PointKey::of(&p));
        out
    }
}
