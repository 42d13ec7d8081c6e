//! Nested Clenshaw-Curtis knots, barycentric weights and quadrature weights
//! for the uniform density on `[-1, 1]`.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::math::gauss_legendre;
use crate::{Error, Result};

/// Knot count for level `beta`: `m(0)=0`, `m(1)=1`, `m(β)=2^(β-1)+1`.
pub fn level_to_knots(beta: usize) -> usize {
    match beta {
        0 => 0,
        1 => 1,
        b => (1usize << (b - 1)) + 1,
    }
}

/// Signed variant of [`level_to_knots`] for callers holding raw integers.
pub fn level_to_knots_checked(beta: i64) -> Result<usize> {
    if beta < 0 {
        return Err(Error::Argument(format!("negative level {beta}")));
    }
    if beta > 40 {
        return Err(Error::Argument(format!("level {beta} too large")));
    }
    Ok(level_to_knots(beta as usize))
}

/// Inverse of [`level_to_knots`] for nestable counts.
pub fn knots_to_level(count: usize) -> Option<usize> {
    match count {
        0 => Some(0),
        1 => Some(1),
        c if c >= 3 && (c - 1).is_power_of_two() => Some((c - 1).trailing_zeros() as usize + 1),
        _ => None,
    }
}

/// `count` Clenshaw-Curtis knots `cos((j-1)π/(K-1))`, `j = 1..K`, in that
/// (descending) order; `K = 1` gives the midpoint `0`.
///
/// The knots are computed as `sin(π (K-1-2(j-1)) / (2(K-1)))`, which is the
/// same number but exactly symmetric, exactly zero at the middle and
/// bit-identical across nested levels: the argument for knot `2j` of the
/// `2K-1` rule is the argument for knot `j` of the `K` rule with numerator
/// and denominator both doubled, which floating point division preserves.
pub fn cc_points(count: usize) -> Result<Vec<f64>> {
    if count == 0 || knots_to_level(count).is_none() {
        return Err(Error::Argument(format!(
            "{count} Clenshaw-Curtis knots do not form a nested rule"
        )));
    }
    if count == 1 {
        return Ok(vec![0.0]);
    }
    let n = (count - 1) as i64;
    Ok((0..count as i64)
        .map(|j| libm::sin(PI * (n - 2 * j) as f64 / (2 * n) as f64))
        .collect())
}

/// Barycentric weights of the Chebyshev-extrema knots, matching the order of
/// [`cc_points`].
pub fn barycentric_weights(count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![1.0];
    }
    (0..count)
        .map(|j| {
            let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
            if j == 0 || j == count - 1 {
                0.5 * sign
            } else {
                sign
            }
        })
        .collect()
}

/// Values of all Lagrange basis polynomials on `knots` at `x`, by the second
/// (true) barycentric formula. Exactly one-hot when `x` is a knot.
pub fn lagrange_basis(knots: &[f64], bary: &[f64], x: f64, out: &mut [f64]) {
    debug_assert_eq!(knots.len(), out.len());
    if let Some(hit) = knots.iter().position(|&k| k == x) {
        out.iter_mut().for_each(|v| *v = 0.0);
        out[hit] = 1.0;
        return;
    }
    let mut denom = 0.0;
    for ((o, &k), &w) in out.iter_mut().zip(knots).zip(bary) {
        let t = w / (x - k);
        *o = t;
        denom += t;
    }
    out.iter_mut().for_each(|v| *v /= denom);
}

/// Interpolation data for one univariate level.
#[derive(Debug, Clone, PartialEq)]
pub struct CcRule {
    pub level: usize,
    pub knots: Vec<f64>,
    pub bary: Vec<f64>,
    /// Quadrature weights w.r.t. the uniform probability density on `[-1,1]`
    /// (they sum to one).
    pub weights: Vec<f64>,
}

impl CcRule {
    /// Builds the rule for level `beta >= 1`.
    ///
    /// The weights integrate each Lagrange basis polynomial against `1/2` on
    /// `[-1, 1]` with a Gauss-Legendre rule exact for its degree.
    pub fn new(beta: usize) -> Result<Self> {
        if beta == 0 {
            return Err(Error::Argument("level 0 has no knots".into()));
        }
        let m = level_to_knots(beta);
        let knots = cc_points(m)?;
        let bary = barycentric_weights(m);
        let (gx, gw) = gauss_legendre(m.div_ceil(2) + 1);
        let mut weights = vec![0.0; m];
        let mut basis = vec![0.0; m];
        for (x, w) in gx.iter().zip(&gw) {
            lagrange_basis(&knots, &bary, *x, &mut basis);
            for (acc, b) in weights.iter_mut().zip(&basis) {
                *acc += 0.5 * w * b;
            }
        }
        Ok(Self {
            level: beta,
            knots,
            bary,
            weights,
        })
    }

    pub fn len(&self) -> usize {
        self.knots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.knots.is_empty()
    }
}

/// Lazily grown table of rules indexed by level.
#[derive(Debug, Clone, Default)]
pub struct CcRules {
    rules: Vec<CcRule>,
}

impl CcRules {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_max_level(max: usize) -> Result<Self> {
        let mut r = Self::new();
        r.ensure(max)?;
        Ok(r)
    }

    pub fn ensure(&mut self, level: usize) -> Result<()> {
        while self.rules.len() < level {
            let next = CcRule::new(self.rules.len() + 1)?;
            self.rules.push(next);
        }
        Ok(())
    }

    /// Rule for `level >= 1`; panics if not yet [`ensure`](Self::ensure)d.
    pub fn get(&self, level: usize) -> &CcRule {
        &self.rules[level - 1]
    }

    pub fn max_level(&self) -> usize {
        self.rules.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn knot_counts() {
        assert_eq!(level_to_knots(0), 0);
        assert_eq!(level_to_knots(1), 1);
        assert_eq!(level_to_knots(2), 3);
        assert_eq!(level_to_knots(3), 5);
        assert_eq!(level_to_knots(6), 33);
        assert!(level_to_knots_checked(-1).is_err());
        assert_eq!(level_to_knots_checked(4).unwrap(), 9);
        for b in 0..12 {
            assert_eq!(knots_to_level(level_to_knots(b)), Some(b));
        }
    }

    #[test]
    fn small_rules() {
        assert_eq!(cc_points(1).unwrap(), vec![0.0]);
        assert_eq!(cc_points(3).unwrap(), vec![1.0, 0.0, -1.0]);
        assert!(cc_points(2).is_err());
        assert!(cc_points(4).is_err());
        assert!(cc_points(0).is_err());
        let five = cc_points(5).unwrap();
        let c = core::f64::consts::FRAC_1_SQRT_2;
        for (a, b) in five.iter().zip([1.0, c, 0.0, -c, -1.0]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn knots_match_cosine_formula() {
        for count in [3, 5, 9, 17, 33, 65] {
            let pts = cc_points(count).unwrap();
            for (j, p) in pts.iter().enumerate() {
                let c = libm::cos(j as f64 * PI / (count - 1) as f64);
                assert!((p - c).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn rules_are_nested_bitwise() {
        for beta in 1..9 {
            let coarse = cc_points(level_to_knots(beta)).unwrap();
            let fine = cc_points(level_to_knots(beta + 1)).unwrap();
            for p in &coarse {
                assert!(fine.iter().any(|q| q.to_bits() == p.to_bits()), "level {beta}: {p}");
            }
        }
    }

    #[test]
    fn weights_match_classical_clenshaw_curtis() {
        // Three-point rule for the probability measure: 1/6, 2/3, 1/6.
        let r = CcRule::new(2).unwrap();
        for (w, e) in r.weights.iter().zip([1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0]) {
            assert!((w - e).abs() < 1e-15);
        }
        // Five-point rule: 1/30, 4/15, 2/5, 4/15, 1/30.
        let r = CcRule::new(3).unwrap();
        for (w, e) in r.weights.iter().zip([1.0 / 30.0, 4.0 / 15.0, 0.4, 4.0 / 15.0, 1.0 / 30.0]) {
            assert!((w - e).abs() < 1e-15);
        }
        for beta in 1..10 {
            let r = CcRule::new(beta).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 1.0).abs() < 1e-14);
            assert!(r.weights.iter().all(|w| *w > 0.0));
        }
    }

    #[test]
    fn basis_is_a_partition_of_unity() {
        let r = CcRule::new(5).unwrap();
        let mut out = vec![0.0; r.len()];
        for x in [-0.99, -0.31, 0.0001, 0.5, 0.97] {
            lagrange_basis(&r.knots, &r.bary, x, &mut out);
            let s: f64 = out.iter().sum();
            assert!((s - 1.0).abs() < 1e-13);
        }
        lagrange_basis(&r.knots, &r.bary, r.knots[3], &mut out);
        assert_eq!(out.iter().filter(|v| **v == 1.0).count(), 1);
        assert_eq!(out[3], 1.0);
    }
}
