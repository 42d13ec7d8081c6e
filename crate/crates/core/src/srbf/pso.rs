//! Deterministic particle swarm maximization over a box.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::model::{ParamDomain, PointKey};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    /// The swarm has `particle_factor · 2^N` particles.
    pub particle_factor: usize,
    /// `screening · 2^N` lattice points are evaluated first and the swarm
    /// starts from the best of them. Values below `particle_factor` mean no
    /// screening.
    pub screening: usize,
    pub iterations: usize,
    pub inertia: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity bound as a fraction of the domain width.
    pub velocity_clamp: f64,
    /// Finish with a compass search around the best particle.
    pub polish: bool,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            particle_factor: 4,
            screening: 32,
            iterations: 200,
            inertia: 0.721,
            cognitive: 1.193,
            social: 1.193,
            velocity_clamp: 0.5,
            polish: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoResult {
    /// Physical coordinates.
    pub point: Vec<f64>,
    pub unit_point: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
}

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let mut inv = 1.0 / base as f64;
    let mut r = 0.0;
    while i > 0 {
        r += (i % base) as f64 * inv;
        i /= base;
        inv /= base as f64;
    }
    r
}

/// Center, corners, face centers, then Halton points, without repeats, in
/// unit coordinates.
pub fn initial_lattice(dim: usize, count: usize) -> Vec<Vec<f64>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    let mut add = |p: Vec<f64>, out: &mut Vec<Vec<f64>>| {
        if out.len() < count && seen.insert(PointKey::of(&p)) {
            out.push(p);
        }
    };
    add(vec![0.5; dim], &mut out);
    if dim < 20 {
        for mask in 0u64..(1 << dim) {
            add((0..dim).map(|n| ((mask >> n) & 1) as f64).collect(), &mut out);
        }
    }
    for n in 0..dim {
        for side in [0.0, 1.0] {
            let mut p = vec![0.5; dim];
            p[n] = side;
            add(p, &mut out);
        }
    }
    let mut h = 1u64;
    while out.len() < count && h < 1 << 40 {
        let p = (0..dim)
            .map(|n| radical_inverse(h, PRIMES[n % PRIMES.len()] as u64))
            .collect();
        add(p, &mut out);
        h += 1;
    }
    out
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::NEG_INFINITY
    } else {
        v
    }
}

/// Maximizes `objective` over `domain`. The objective receives a batch of
/// physical points and returns one value per point; NaN counts as `-inf`.
///
/// Velocities start at zero and updates are synchronous, so the result
/// depends only on the objective and the configuration. Ties keep the
/// earlier particle, so a constant objective returns the domain center.
pub fn pso_maximize(
    domain: &ParamDomain,
    config: &PsoConfig,
    mut objective: impl FnMut(&[Vec<f64>]) -> Result<Vec<f64>>,
) -> Result<PsoResult> {
    let dim = domain.dim();
    if config.particle_factor == 0 || dim >= 20 {
        return Err(Error::Argument("unsupported PSO configuration".into()));
    }
    let count = config.particle_factor << dim;
    let pool = initial_lattice(dim, count.max(config.screening << dim));
    let mut evaluations = 0;
    let mut eval = |pts: &[Vec<f64>], evaluations: &mut usize| -> Result<Vec<f64>> {
        let phys: Vec<Vec<f64>> = pts.iter().map(|u| domain.from_unit(u)).collect();
        let v = objective(&phys)?;
        if v.len() != pts.len() {
            return Err(Error::Argument("objective returned the wrong number of values".into()));
        }
        *evaluations += pts.len();
        Ok(v.into_iter().map(sanitize).collect())
    };

    let fp = eval(&pool, &mut evaluations)?;
    let mut order: Vec<usize> = (0..pool.len()).collect();
    // stable, so equal values keep lattice order
    order.sort_by(|&a, &b| fp[b].total_cmp(&fp[a]));
    order.truncate(count);
    let mut x: Vec<Vec<f64>> = order.iter().map(|&i| pool[i].clone()).collect();
    let mut v = vec![vec![0.0; dim]; x.len()];
    let mut pbest = x.clone();
    let mut pval: Vec<f64> = order.iter().map(|&i| fp[i]).collect();
    let mut g = 0;
    for i in 1..x.len() {
        if pval[i] > pval[g] {
            g = i;
        }
    }
    let mut gbest = pbest[g].clone();
    let mut gval = pval[g];

    for _ in 0..config.iterations {
        for i in 0..x.len() {
            for n in 0..dim {
                let vel = config.inertia * v[i][n]
                    + config.cognitive * (pbest[i][n] - x[i][n])
                    + config.social * (gbest[n] - x[i][n]);
                v[i][n] = vel.clamp(-config.velocity_clamp, config.velocity_clamp);
                x[i][n] = (x[i][n] + v[i][n]).clamp(0.0, 1.0);
            }
        }
        let f = eval(&x, &mut evaluations)?;
        for i in 0..x.len() {
            if f[i] > pval[i] {
                pval[i] = f[i];
                pbest[i] = x[i].clone();
            }
        }
        for i in 0..x.len() {
            if pval[i] > gval {
                gval = pval[i];
                gbest = pbest[i].clone();
            }
        }
    }

    if config.polish {
        let mut h = 0.1;
        let mut rounds = 0;
        while h > 1e-9 && rounds < 500 {
            rounds += 1;
            let mut trial = Vec::with_capacity(2 * dim);
            for n in 0..dim {
                for s in [-h, h] {
                    let mut p = gbest.clone();
                    p[n] = (p[n] + s).clamp(0.0, 1.0);
                    trial.push(p);
                }
            }
            let f = eval(&trial, &mut evaluations)?;
            let mut best = None;
            for (i, &fi) in f.iter().enumerate() {
                if fi > gval && best.is_none_or(|b: usize| fi > f[b]) {
                    best = Some(i);
                }
            }
            match best {
                Some(b) => {
                    gval = f[b];
                    gbest = trial[b].clone();
                }
                None => h *= 0.5,
            }
        }
    }

    Ok(PsoResult {
        point: domain.from_unit(&gbest),
        unit_point: gbest,
        value: gval,
        evaluations,
    })
}
