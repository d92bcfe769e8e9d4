//! Smooth bump profile, the lattice partition of unity `eta_{g,mu}` and the
//! vertical cutoff used to split a field near the interface.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// `x -> 1 / (1 + e^{g(x)})` with `g = 1/x - 1/(1-x)`, i.e. the smooth step
/// `s(x) / (s(x) + s(1-x))` for `s(x) = e^{-1/x}`, together with two
/// derivatives.
fn smooth_step(x: f64) -> [f64; 3] {
    if x <= 0.0 {
        return [0.0, 0.0, 0.0];
    }
    if x >= 1.0 {
        return [1.0, 0.0, 0.0];
    }
    let y = 1.0 - x;
    let g = 1.0 / x - 1.0 / y;
    let g1 = -1.0 / (x * x) - 1.0 / (y * y);
    let g2 = 2.0 / (x * x * x) - 2.0 / (y * y * y);
    // T = 1/(1+e^g) and T(1-T) = 1/(4 cosh^2(g/2)), both overflow-safe
    let t = if g > 0.0 {
        let e = (-g).exp();
        e / (1.0 + e)
    } else {
        1.0 / (1.0 + g.exp())
    };
    let tt = if g.abs() > 1400.0 { 0.0 } else { 0.25 / (0.5 * g).cosh().powi(2) };
    let t1 = -tt * g1;
    let t2 = -(t1 * (1.0 - 2.0 * t) * g1 + tt * g2);
    [t, t1, t2]
}

/// `theta_0(t) = T(3 - 2|t|)`: equal to 1 on `[-1, 1]`, 0 for `|t| >= 3/2`.
pub fn bump(t: f64) -> f64 {
    smooth_step(3.0 - 2.0 * t.abs())[0]
}

/// Derivative of order `order <= 2` of [`bump`].
pub fn bump_deriv(t: f64, order: usize) -> Result<f64> {
    let s = smooth_step(3.0 - 2.0 * t.abs());
    match order {
        0 => Ok(s[0]),
        1 => Ok(-2.0 * t.signum() * s[1]),
        2 => Ok(4.0 * s[2]),
        k => Err(Error::UnsupportedOrder(k)),
    }
}

/// Partition `eta_g = theta_{g,mu} / bar theta_mu` on the lattice `g / mu`,
/// `g in Z^d`, restricted to the indices whose supports meet a bounding box.
#[derive(Debug, Clone, Serialize)]
pub struct PartitionGrid {
    pub mu: f64,
    pub dim: usize,
    /// Inclusive index range per axis.
    pub index_lo: Vec<i64>,
    pub index_hi: Vec<i64>,
}

/// `theta_{g,mu}(x) = prod_i theta_0(mu x_i - g_i)`.
pub fn theta_g(mu: f64, g: &[i64], x: &[f64]) -> f64 {
    g.iter().zip(x).map(|(&gi, &xi)| bump(mu * xi - gi as f64)).product()
}

/// Indices `g` with `|mu x_i - g_i| < 3/2` on every axis, the only ones whose
/// member can be nonzero at `x`.
fn active_indices(mu: f64, x: &[f64]) -> Vec<Vec<i64>> {
    let mut out: Vec<Vec<i64>> = vec![vec![]];
    for &xi in x {
        let y = mu * xi;
        let lo = (y - 1.5).floor() as i64;
        let hi = (y + 1.5).ceil() as i64;
        let mut next = Vec::new();
        for prefix in &out {
            for gi in lo..=hi {
                if (y - gi as f64).abs() < 1.5 {
                    let mut p = prefix.clone();
                    p.push(gi);
                    next.push(p);
                }
            }
        }
        out = next;
    }
    out
}

/// `bar theta_mu(x) = sum_g theta_{g,mu}(x)`.
pub fn theta_bar(mu: f64, x: &[f64]) -> f64 {
    active_indices(mu, x).iter().map(|g| theta_g(mu, g, x)).sum()
}

impl PartitionGrid {
    /// Lattice covering `[lo, hi]^d`.
    pub fn build(mu: f64, dim: usize, lo: f64, hi: f64) -> Result<Self> {
        if !(mu >= 1.0 && mu.is_finite()) {
            return Err(Error::InvalidParameter(format!("mu must be >= 1, got {mu}")));
        }
        if dim == 0 || !(lo < hi) {
            return Err(Error::InvalidParameter("need dim >= 1 and lo < hi".into()));
        }
        let a = (mu * lo - 1.5).floor() as i64;
        let b = (mu * hi + 1.5).ceil() as i64;
        Ok(Self { mu, dim, index_lo: vec![a; dim], index_hi: vec![b; dim] })
    }

    pub fn len(&self) -> usize {
        self.index_lo.iter().zip(&self.index_hi).map(|(a, b)| (b - a + 1) as usize).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn center(&self, g: &[i64]) -> Vec<f64> {
        g.iter().map(|&gi| gi as f64 / self.mu).collect()
    }

    /// `eta_{g,mu}(x)`.
    pub fn eta(&self, g: &[i64], x: &[f64]) -> f64 {
        let t = theta_g(self.mu, g, x);
        if t == 0.0 {
            0.0
        } else {
            t / theta_bar(self.mu, x)
        }
    }

    /// `sum_g eta_{g,mu}(x)` over the nonzero members.
    pub fn sum(&self, x: &[f64]) -> f64 {
        let bar = theta_bar(self.mu, x);
        active_indices(self.mu, x).iter().map(|g| theta_g(self.mu, g, x) / bar).sum()
    }
}

/// Number of `g'` whose support meets the support of `theta_{g,mu}`, found by
/// sampling both members on a grid over the cube of `g`.
pub fn overlap_count(mu: f64, g: &[i64], per_axis: usize) -> usize {
    let d = g.len();
    let offsets: Vec<Vec<i64>> = (0..9i64.pow(d as u32))
        .map(|mut k| {
            (0..d)
                .map(|_| {
                    let o = k % 9 - 4;
                    k /= 9;
                    o
                })
                .collect()
        })
        .collect();
    let pts: Vec<f64> = (0..per_axis).map(|i| -1.5 + 3.0 * (i as f64 + 0.5) / per_axis as f64).collect();
    offsets
        .iter()
        .filter(|off| {
            let gp: Vec<i64> = g.iter().zip(off.iter()).map(|(a, b)| a + b).collect();
            // product members overlap iff their factors overlap on every axis
            (0..d).all(|i| {
                pts.iter().any(|&s| {
                    let x = (g[i] as f64 + s) / mu;
                    bump(mu * x - g[i] as f64) > 0.0 && bump(mu * x - gp[i] as f64) > 0.0
                })
            })
        })
        .count()
}

#[derive(Debug, Clone, Serialize)]
pub struct PartitionAudit {
    pub mu: f64,
    pub dim: usize,
    pub audit_nodes: usize,
    pub max_sum_deviation: f64,
    pub min_theta_bar: f64,
    /// `max_k sup |D^k theta_{g,mu}| / mu^k`.
    pub c1: f64,
    /// `max_k sup |D^k bar theta_mu| / mu^k`.
    pub c2: f64,
    /// `max_k sup |D^k eta_{g,mu}| / mu^k`.
    pub c3: f64,
    /// Largest `|eta_g|` found outside `Q_{3/(2 mu)}(x_g)`.
    pub support_leak: f64,
    /// Largest `|D theta_g|` found inside `Q_{1/mu}(x_g)`.
    pub plateau_gradient: f64,
    pub overlap_cardinality: usize,
}

/// `|f|` and the Frobenius norms of the first and second derivative tensors
/// of `f` at `x`, by central differences with step `h`.
fn fd_norms<F: Fn(&[f64]) -> f64>(f: &F, x: &[f64], h: f64) -> [f64; 3] {
    let d = x.len();
    let f0 = f(x);
    let at = |shift: &[(usize, f64)]| {
        let mut y = x.to_vec();
        for &(i, s) in shift {
            y[i] += s;
        }
        f(&y)
    };
    let mut g2 = 0.0;
    let mut h2 = 0.0;
    for i in 0..d {
        let fp = at(&[(i, h)]);
        let fm = at(&[(i, -h)]);
        g2 += ((fp - fm) / (2.0 * h)).powi(2);
        h2 += ((fp - 2.0 * f0 + fm) / (h * h)).powi(2);
        for j in 0..i {
            let v = (at(&[(i, h), (j, h)]) - at(&[(i, h), (j, -h)]) - at(&[(i, -h), (j, h)]) + at(&[(i, -h), (j, -h)]))
                / (4.0 * h * h);
            h2 += 2.0 * v * v;
        }
    }
    [f0.abs(), g2.sqrt(), h2.sqrt()]
}

pub(crate) fn lattice_points(dim: usize, per_axis: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    let total = per_axis.pow(dim as u32);
    (0..total)
        .map(|mut k| {
            (0..dim)
                .map(|_| {
                    let i = k % per_axis;
                    k /= per_axis;
                    lo + (hi - lo) * i as f64 / (per_axis - 1) as f64
                })
                .collect()
        })
        .collect()
}

/// Audits the partition: sum-to-one on about `nodes` points of `[lo, hi]^d`,
/// and derivative constants measured by finite differences with step
/// `1e-4 / mu` at `per_cell` points per lattice spacing around `g = 0`.
pub fn audit(mu: f64, dim: usize, lo: f64, hi: f64, nodes: usize, per_cell: usize) -> Result<PartitionAudit> {
    let grid = PartitionGrid::build(mu, dim, lo, hi)?;
    let per_axis = ((nodes as f64).powf(1.0 / dim as f64).round() as usize).max(2);
    let box_pts = lattice_points(dim, per_axis, lo, hi);
    let (max_dev, min_bar) = box_pts
        .par_iter()
        .map(|x| ((grid.sum(x) - 1.0).abs(), theta_bar(mu, x)))
        .reduce(|| (0.0, f64::INFINITY), |a, b| (a.0.max(b.0), a.1.min(b.1)));

    let h = 1e-4 / mu;
    let zero = vec![0i64; dim];
    let span = 2.0;
    let m = (2.0 * span * per_cell as f64) as usize + 1;
    let local: Vec<Vec<f64>> = lattice_points(dim, m, -span / mu, span / mu);
    let scale = |v: [f64; 3]| v[0].max(v[1] / mu).max(v[2] / (mu * mu));
    let stats = local
        .par_iter()
        .map(|x| {
            let th = |y: &[f64]| theta_g(mu, &zero, y);
            let bar = |y: &[f64]| theta_bar(mu, y);
            let eta = |y: &[f64]| grid.eta(&zero, y);
            let nt = fd_norms(&th, x, h);
            let nb = fd_norms(&bar, x, h);
            let ne = fd_norms(&eta, x, h);
            let cube = x.iter().map(|v| (mu * v).abs()).fold(0.0, f64::max);
            let leak = if cube >= 1.5 { eta(x).abs() } else { 0.0 };
            let plateau = if cube < 1.0 - 1.0e-3 { nt[1] } else { 0.0 };
            [scale(nt), scale(nb), scale(ne), leak, plateau]
        })
        .reduce(|| [0.0; 5], |a, b| std::array::from_fn(|i| a[i].max(b[i])));

    Ok(PartitionAudit {
        mu,
        dim,
        audit_nodes: box_pts.len(),
        max_sum_deviation: max_dev,
        min_theta_bar: min_bar,
        c1: stats[0],
        c2: stats[1],
        c3: stats[2],
        support_leak: stats[3],
        plateau_gradient: stats[4],
        overlap_cardinality: overlap_count(mu, &zero, 64),
    })
}

/// `eta_mu(x_n) = theta_0(mu x_n)` and its complement. A field splits as
/// `v = eta_mu u` near the interface plus `z = (1 - eta_mu) u` away from it.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerticalCutoff {
    pub mu: f64,
}

impl VerticalCutoff {
    pub fn eta(&self, x_n: f64) -> f64 {
        bump(self.mu * x_n)
    }

    pub fn complement(&self, x_n: f64) -> f64 {
        1.0 - self.eta(x_n)
    }
}

/// Requires `2 / mu < r0`.
pub fn vertical_cutoff(mu: f64, r0: f64) -> Result<VerticalCutoff> {
    if !(mu >= 1.0) {
        return Err(Error::InvalidParameter(format!("mu must be >= 1, got {mu}")));
    }
    if 2.0 / mu >= r0 {
        return Err(Error::Constraint(format!("2 / mu = {} is not below r0 = {r0}", 2.0 / mu)));
    }
    Ok(VerticalCutoff { mu })
}
