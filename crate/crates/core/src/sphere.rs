//! Deterministic low-discrepancy point sets on unit spheres.
//!
//! `S^0` is `{-1, +1}`, `S^1` uses equally spaced angles, `S^2` the golden
//! spiral, and higher spheres map Halton points through Box-Muller before
//! normalizing.

use std::f64::consts::PI;

const PRIMES: [u32; 16] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53];

fn radical_inverse(mut i: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while i > 0 {
        r += f * (i % base) as f64;
        i /= base;
        f *= inv;
    }
    r
}

/// `count` points on the unit sphere of `R^ambient` (for `ambient = 1` the
/// result is always the two points `+-1`).
pub fn sphere_points(ambient: usize, count: usize) -> Vec<Vec<f64>> {
    assert!(ambient >= 1, "ambient dimension must be positive");
    match ambient {
        1 => vec![vec![1.0], vec![-1.0]],
        2 => (0..count)
            .map(|k| {
                let t = 2.0 * PI * (k as f64 + 0.5) / count as f64;
                vec![t.cos(), t.sin()]
            })
            .collect(),
        3 => {
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..count)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / count as f64;
                    let r = (1.0 - z * z).max(0.0).sqrt();
                    let t = golden * k as f64;
                    vec![r * t.cos(), r * t.sin(), z]
                })
                .collect()
        }
        d => {
            let pairs = d.div_ceil(2);
            assert!(2 * pairs <= PRIMES.len(), "sphere dimension {d} too large");
            (0..count)
                .map(|k| {
                    let idx = k as u64 + 1;
                    let mut v = Vec::with_capacity(2 * pairs);
                    for p in 0..pairs {
                        let u1 = radical_inverse(idx, PRIMES[2 * p] as u64).max(1e-300);
                        let u2 = radical_inverse(idx, PRIMES[2 * p + 1] as u64);
                        let r = (-2.0 * u1.ln()).sqrt();
                        v.push(r * (2.0 * PI * u2).cos());
                        v.push(r * (2.0 * PI * u2).sin());
                    }
                    v.truncate(d);
                    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter().map(|x| x / norm).collect()
                })
                .collect()
        }
    }
}

/// Normalizes in place; returns the original norm.
pub fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_unit_and_deterministic() {
        for ambient in 1..=6 {
            let a = sphere_points(ambient, 257);
            let b = sphere_points(ambient, 257);
            assert_eq!(a, b);
            for p in &a {
                assert_eq!(p.len(), ambient);
                let n: f64 = p.iter().map(|x| x * x).sum();
                assert!((n - 1.0).abs() < 1e-12);
            }
        }
        assert_eq!(sphere_points(1, 1000).len(), 2);
    }

    #[test]
    fn points_cover_the_sphere() {
        // every axis direction has a nearby sample
        for ambient in 2..=5 {
            let pts = sphere_points(ambient, 4096);
            for axis in 0..ambient {
                for sign in [-1.0, 1.0] {
                    let best = pts.iter().map(|p| sign * p[axis]).fold(f64::NEG_INFINITY, f64::max);
                    assert!(best > 0.9, "ambient {ambient} axis {axis} sign {sign}: {best}");
                }
            }
        }
    }
}
