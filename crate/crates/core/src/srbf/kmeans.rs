use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::math::euclidean_distance;
use crate::{Error, Result};

const MAX_ITERATIONS: usize = 100;
const SHIFT_TOLERANCE: f64 = 1e-10;

fn nearest(p: &[f64], centers: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (j, c) in centers.iter().enumerate() {
        let d = euclidean_distance(p, c);
        if d < best_d {
            best_d = d;
            best = j;
        }
    }
    best
}

/// `k` centroids of `points` by Lloyd's iteration from farthest-point seeds.
///
/// Seeding starts at the point closest to the mean and then repeatedly takes
/// the point farthest from the seeds chosen so far (lowest index on ties).
/// For `k = J` the points themselves are returned.
pub fn select_centers(points: &[Vec<f64>], k: usize) -> Result<Vec<Vec<f64>>> {
    let n = points.len();
    if k == 0 || k > n {
        return Err(Error::Argument(format!("cannot pick {k} centers from {n} points")));
    }
    if k == n {
        return Ok(points.to_vec());
    }
    let dim = points[0].len();
    let mut mean = vec![0.0; dim];
    for p in points {
        for (m, v) in mean.iter_mut().zip(p) {
            *m += v / n as f64;
        }
    }
    let mut centers = vec![points[nearest(&mean, points)].clone()];
    let mut min_d: Vec<f64> = points.iter().map(|p| euclidean_distance(p, &centers[0])).collect();
    while centers.len() < k {
        let mut far = 0;
        for (i, &d) in min_d.iter().enumerate() {
            if d > min_d[far] {
                far = i;
            }
        }
        centers.push(points[far].clone());
        for (m, p) in min_d.iter_mut().zip(points) {
            *m = m.min(euclidean_distance(p, &points[far]));
        }
    }

    let scale = libm::sqrt(dim as f64);
    for _ in 0..MAX_ITERATIONS {
        let mut sums = vec![vec![0.0; dim]; k];
        let mut counts = vec![0usize; k];
        for p in points {
            let j = nearest(p, &centers);
            counts[j] += 1;
            for (s, v) in sums[j].iter_mut().zip(p) {
                *s += v;
            }
        }
        let mut shift: f64 = 0.0;
        for j in 0..k {
            // an empty cluster keeps its centroid
            if counts[j] == 0 {
                continue;
            }
            let next: Vec<f64> = sums[j].iter().map(|s| s / counts[j] as f64).collect();
            shift = shift.max(euclidean_distance(&next, &centers[j]));
            centers[j] = next;
        }
        if shift <= SHIFT_TOLERANCE * scale {
            break;
        }
    }
    Ok(centers)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_means_in_one_dimension() {
        let p = vec![vec![0.0], vec![0.1], vec![0.9], vec![1.0]];
        let mut c: Vec<f64> = select_centers(&p, 2).unwrap().into_iter().map(|c| c[0]).collect();
        c.sort_by(f64::total_cmp);
        assert!((c[0] - 0.05).abs() < 1e-15 && (c[1] - 0.95).abs() < 1e-15);
    }

    #[test]
    fn one_center_is_the_mean() {
        let p = vec![vec![0.0, 1.0], vec![0.5, 0.0], vec![1.0, 0.5]];
        let c = select_centers(&p, 1).unwrap();
        assert!((c[0][0] - 0.5).abs() < 1e-15 && (c[0][1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn full_count_returns_points_and_too_many_fails() {
        let p = vec![vec![0.3], vec![0.7]];
        assert_eq!(select_centers(&p, 2).unwrap(), p);
        assert!(select_centers(&p, 3).is_err());
        assert!(select_centers(&p, 0).is_err());
    }
}
