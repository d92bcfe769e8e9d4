//! Strong pseudoconvexity of the conjugated symbol for the weight `psi_eps`.
//!
//! The null set of `p(xi + i tau alpha e_n)` is enumerated from the root
//! formulas rather than by root finding. `Q` is the Hessian form of the
//! weight applied to the `xi`-gradient of the symbol; the term involving
//! `x`-derivatives of the coefficients vanishes for frozen coefficients and
//! is not evaluated.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::coefficients::{ComplexSymmetricMatrix, DerivedConstants};
use crate::error::{Error, Result};
use crate::sphere::sphere_points;
use crate::symbol::{bilinear, factor_matrix, symbol_gradient};
use crate::tolerance::TOL;
use crate::weights::{grad_psi, WeightParameters};
use crate::Side;

/// Which of the two root formulas produced a null point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `xi_n + i tau alpha = -E - B - i(F + A)`.
    First,
    /// `xi_n + i tau alpha = -E + B - i(F - A)`.
    Second,
}

#[derive(Debug, Clone, Serialize)]
pub struct NullPoint {
    pub xi: Vec<f64>,
    pub tau: f64,
    pub side: Side,
    pub branch: Branch,
    pub normalized: bool,
}

impl NullPoint {
    fn normalize(&mut self) {
        let r = (self.xi.iter().map(|v| v * v).sum::<f64>() + self.tau * self.tau).sqrt();
        self.xi.iter_mut().for_each(|v| *v /= r);
        self.tau /= r;
        self.normalized = true;
    }
}

/// `zeta = xi + i tau grad psi(x)` on the given side.
fn zeta(weights: &WeightParameters, x: &[f64], xi: &[f64], tau: f64, side: Side) -> Vec<Complex64> {
    let g = grad_psi(weights, x, side);
    xi.iter().zip(&g).map(|(&a, &b)| Complex64::new(a, tau * b)).collect()
}

/// `Q = sum_lj psi_lj d_j p conj(d_l p)` with the diagonal Hessian of `psi`.
fn q_from_gradient(weights: &WeightParameters, grad: &[Complex64]) -> Complex64 {
    let n = grad.len();
    grad.iter()
        .enumerate()
        .map(|(j, g)| {
            let h = if j == n - 1 { weights.beta } else { -weights.epsilon };
            h * g * g.conj()
        })
        .sum()
}

/// `Q(x, xi, tau)`.
pub fn eval_q(
    matrix: &ComplexSymmetricMatrix,
    weights: &WeightParameters,
    x: &[f64],
    xi: &[f64],
    tau: f64,
    side: Side,
) -> Result<f64> {
    let n = matrix.dim();
    if x.len() != n || xi.len() != n {
        return Err(Error::Dimension(format!("x and xi must have length {n}")));
    }
    let z = zeta(weights, x, xi, tau, side);
    let q = q_from_gradient(weights, &symbol_gradient(matrix, &z));
    if q.im.abs() > TOL.q_imag_rel * q.re.abs().max(1.0) * 1e3 {
        return Err(Error::InternalInconsistency(format!("Q has imaginary part {:e}", q.im)));
    }
    Ok(q.re)
}

/// `|p(xi + i tau grad psi(x))|`.
pub fn abs_conjugated_symbol(
    matrix: &ComplexSymmetricMatrix,
    weights: &WeightParameters,
    x: &[f64],
    xi: &[f64],
    tau: f64,
    side: Side,
) -> f64 {
    bilinear(matrix.entries(), &zeta(weights, x, xi, tau, side)).norm()
}

#[derive(Debug, Clone, Serialize)]
pub struct NullSet {
    pub points: Vec<NullPoint>,
    /// Candidates rejected because their `tau` was not positive.
    pub discarded: usize,
}

/// Null points of `p(xi + i tau alpha e_n)` over `count` unit `xi'`.
///
/// With `xi'` fixed the symbol factors as `a_nn (xi_n + i tau alpha - r1)
/// (xi_n + i tau alpha - r2)` with `r1 = -E-B-i(F+A)` and `r2 = -E+B-i(F-A)`.
/// A real `xi_n` needs `Im r = -tau alpha`. The first branch then forces
/// `tau alpha = -(F + A)`, which is negative because `A > |F|`, so its
/// candidates are discarded. The second gives `tau alpha = A - F > 0`.
pub fn null_points(matrix: &ComplexSymmetricMatrix, side: Side, alpha: f64, count: usize, normalize: bool) -> Result<NullSet> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be positive, got {alpha}")));
    }
    let n = matrix.dim();
    let mut points = Vec::new();
    let mut discarded = 0;
    for xp in sphere_points(n - 1, count.max(1)) {
        let f = factor_matrix(matrix, side, &xp)?;
        for (branch, xi_n, tau_alpha) in [
            (Branch::First, -f.e - f.root_b, -(f.f + f.root_a)),
            (Branch::Second, -f.e + f.root_b, f.root_a - f.f),
        ] {
            let tau = tau_alpha / alpha;
            if tau <= 0.0 {
                discarded += 1;
                continue;
            }
            let mut xi = xp.clone();
            xi.push(xi_n);
            let mut p = NullPoint { xi, tau, side, branch, normalized: false };
            if normalize {
                p.normalize();
            }
            points.push(p);
        }
    }
    Ok(NullSet { points, discarded })
}

#[derive(Debug, Clone, Serialize)]
pub struct PseudoconvexityCertificate {
    pub side: Side,
    pub epsilon_used: f64,
    pub beta: f64,
    pub alpha: f64,
    /// Minimum of `Q(0, xi, tau)` over null points with `|xi'| = 1`.
    pub min_q_on_null_set: f64,
    /// `2 beta lambda_tilde1 lambda0^2`.
    pub null_set_lower_bound: f64,
    pub lower_bound_holds: bool,
    /// Largest `|p|` on a constructed null point relative to `|xi|^2 + tau^2`.
    pub max_null_residual: f64,
    pub null_points: usize,
    pub discarded_null_candidates: usize,
    /// Empirical `C` in `Q >= C beta |xi + i tau alpha e_n|^2` on the null set.
    pub bound_constant: f64,
    pub c1: f64,
    pub c2: f64,
    /// `min (C1 Q + |p|) - C2` on a fresh sample of the sphere.
    pub fresh_sample_margin: f64,
    pub delta_prime: f64,
    pub delta_prime_halvings: usize,
    pub sphere_samples: usize,
}

/// Points of the unit sphere in `(xi, tau)` with `tau` folded to `tau >= 0`.
fn sphere_sample(n: usize, count: usize) -> Vec<(Vec<f64>, f64)> {
    sphere_points(n + 1, count)
        .into_iter()
        .map(|mut v| {
            let t = v.pop().unwrap().abs();
            (v, t)
        })
        .collect()
}

fn project(v: &[f64]) -> (Vec<f64>, f64) {
    let r = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    let mut xi: Vec<f64> = v.iter().map(|a| a / r).collect();
    let t = xi.pop().unwrap().abs();
    (xi, t)
}

/// Projected coordinate pattern search for a local minimum of `f` on the sphere.
fn pattern_search<F: Fn(&[f64], f64) -> f64>(f: &F, xi: &[f64], tau: f64, step0: f64) -> (f64, Vec<f64>, f64) {
    let mut v: Vec<f64> = xi.iter().copied().chain(std::iter::once(tau)).collect();
    let mut best = f(xi, tau);
    let mut step = step0;
    let mut iters = 0;
    while step > 1e-10 && iters < 4000 {
        iters += 1;
        let mut improved = false;
        for k in 0..v.len() {
            for s in [step, -step] {
                let mut w = v.clone();
                w[k] += s;
                let (x, t) = project(&w);
                let val = f(&x, t);
                if val < best {
                    best = val;
                    let mut nv = x;
                    nv.push(t);
                    v = nv;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    let (x, t) = project(&v);
    (best, x, t)
}

/// Certifies strong pseudoconvexity near the origin for one side.
///
/// `delta_prime` is the requested localization radius; it must be below
/// `alpha / (2 beta)` and is halved until the perturbed inequality holds.
pub fn certify(
    matrix: &ComplexSymmetricMatrix,
    side: Side,
    weights: &WeightParameters,
    derived: &DerivedConstants,
    delta_prime: f64,
    samples: usize,
) -> Result<PseudoconvexityCertificate> {
    let n = matrix.dim();
    let alpha = weights.alpha(side);
    let beta = weights.beta;
    let bound_radius = weights.localization_bound(side);
    if !(delta_prime > 0.0 && delta_prime < bound_radius) {
        return Err(Error::InvalidParameter(format!(
            "delta' = {delta_prime} must lie in (0, alpha / (2 beta) = {bound_radius})"
        )));
    }
    let origin = vec![0.0; n];

    // (a) the null set at the origin, one point per unit xi'
    let null = null_points(matrix, side, alpha, samples, false)?;
    let mut min_q = f64::INFINITY;
    let mut argmin: Option<&NullPoint> = None;
    let mut max_res: f64 = 0.0;
    let mut bound_c = f64::INFINITY;
    for p in &null.points {
        let q = eval_q(matrix, weights, &origin, &p.xi, p.tau, side)?;
        let size = p.xi.iter().map(|v| v * v).sum::<f64>() + p.tau * p.tau;
        let res = abs_conjugated_symbol(matrix, weights, &origin, &p.xi, p.tau, side) / size;
        max_res = max_res.max(res);
        let xi2 = p.xi.iter().map(|v| v * v).sum::<f64>();
        let mod2 = xi2 + (p.tau * alpha).powi(2);
        bound_c = bound_c.min(q / (beta * mod2));
        if q < min_q {
            min_q = q;
            argmin = Some(p);
        }
    }
    let Some(worst) = argmin else {
        return Err(Error::PseudoconvexityFailed { reason: "empty null set".into(), xi: vec![], tau: 0.0 });
    };
    if max_res > TOL.null_residual {
        return Err(Error::InternalInconsistency(format!("null point residual {max_res:e}")));
    }
    if min_q <= 0.0 {
        return Err(Error::PseudoconvexityFailed {
            reason: format!("Q = {min_q:e} <= 0 on the null set"),
            xi: worst.xi.clone(),
            tau: worst.tau,
        });
    }
    let lower = 2.0 * beta * derived.lambda_tilde1 * derived.lambda0.powi(2);
    let lower_bound_holds = min_q >= lower - 1e-8;

    // (b) constants of the compactness reformulation on the sphere
    let sample = sphere_sample(n, samples);
    let qp: Vec<(f64, f64)> = sample
        .par_iter()
        .map(|(xi, t)| {
            Ok((
                eval_q(matrix, weights, &origin, xi, *t, side)?,
                abs_conjugated_symbol(matrix, weights, &origin, xi, *t, side),
            ))
        })
        .collect::<Result<_>>()?;
    let mut best: Option<(f64, f64, usize)> = None;
    for k in -12..=12 {
        let c1 = 2f64.powi(k);
        let (c2, idx) = qp
            .iter()
            .enumerate()
            .map(|(i, (q, p))| (c1 * q + p, i))
            .fold((f64::INFINITY, 0), |a, b| if b.0 < a.0 { b } else { a });
        let score = c2 / (1.0 + c1);
        if best.map_or(true, |(bc1, bc2, _)| score > bc2 / (1.0 + bc1)) {
            best = Some((c1, c2, idx));
        }
    }
    let (c1, c2_sampled, idx) = best.expect("nonempty C1 grid");
    if c2_sampled <= 0.0 {
        let (xi, t) = &sample[idx];
        return Err(Error::PseudoconvexityFailed {
            reason: "no C1 in 2^-12..2^12 gives a positive C2".into(),
            xi: xi.clone(),
            tau: *t,
        });
    }
    let objective = |xi: &[f64], t: f64| -> f64 {
        let z = zeta(weights, &origin, xi, t, side);
        c1 * q_from_gradient(weights, &symbol_gradient(matrix, &z)).re + bilinear(matrix.entries(), &z).norm()
    };
    let mut order: Vec<usize> = (0..qp.len()).collect();
    order.sort_by(|&a, &b| {
        let va = c1 * qp[a].0 + qp[a].1;
        let vb = c1 * qp[b].0 + qp[b].1;
        va.total_cmp(&vb)
    });
    let step0 = (4.0 / samples.max(1) as f64).powf(1.0 / n as f64);
    let refined = order
        .par_iter()
        .take(16)
        .map(|&i| pattern_search(&objective, &sample[i].0, sample[i].1, step0))
        .collect::<Vec<_>>();
    let (c2, wx, wt) = refined
        .into_iter()
        .fold((c2_sampled, sample[idx].0.clone(), sample[idx].1), |a, b| if b.0 < a.0 { b } else { a });
    if c2 <= 0.0 {
        return Err(Error::PseudoconvexityFailed { reason: "refined C2 is not positive".into(), xi: wx, tau: wt });
    }

    // fresh sample, disjoint from the search set
    let fresh = sphere_sample(n, samples + 1013);
    let fresh_min = fresh
        .par_iter()
        .map(|(xi, t)| objective(xi, *t))
        .reduce(|| f64::INFINITY, f64::min);

    // (c) perturbation in x on the side's half ball
    let directions: Vec<Vec<f64>> = sphere_points(n, 64)
        .into_iter()
        .filter(|d| match side {
            Side::Plus => d[n - 1] >= 0.0,
            Side::Minus => d[n - 1] <= 0.0,
        })
        .collect();
    let check_sample: Vec<&(Vec<f64>, f64)> = sample.iter().step_by((samples / 1024).max(1)).collect();
    let mut dp = delta_prime;
    let mut halvings = 0;
    loop {
        let ok = directions.par_iter().all(|d| {
            [0.5, 1.0].iter().all(|s| {
                let x: Vec<f64> = d.iter().map(|v| v * s * dp).collect();
                check_sample.iter().all(|(xi, t)| {
                    let z = zeta(weights, &x, xi, *t, side);
                    let v = c1 * q_from_gradient(weights, &symbol_gradient(matrix, &z)).re
                        + bilinear(matrix.entries(), &z).norm();
                    v >= 0.5 * c2
                })
            })
        });
        if ok {
            break;
        }
        halvings += 1;
        dp *= 0.5;
        if halvings > 40 {
            return Err(Error::PseudoconvexityFailed {
                reason: "perturbed inequality fails for every tested delta'".into(),
                xi: wx,
                tau: wt,
            });
        }
    }

    Ok(PseudoconvexityCertificate {
        side,
        epsilon_used: weights.epsilon,
        beta,
        alpha,
        min_q_on_null_set: min_q,
        null_set_lower_bound: lower,
        lower_bound_holds,
        max_null_residual: max_res,
        null_points: null.points.len(),
        discarded_null_candidates: null.discarded,
        bound_constant: bound_c,
        c1,
        c2,
        fresh_sample_margin: fresh_min - c2,
        delta_prime: dp,
        delta_prime_halvings: halvings,
        sphere_samples: samples,
    })
}

/// Per null point, the pair `(T, N)` with `Q(0) = -eps T + beta N`.
fn null_set_terms(matrix: &ComplexSymmetricMatrix, side: Side, alpha: f64, samples: usize) -> Result<Vec<(f64, f64)>> {
    let n = matrix.dim();
    let origin = vec![0.0; n];
    let tang = WeightParameters { alpha_plus: alpha, alpha_minus: alpha, beta: 0.0, epsilon: 1.0, delta: 1.0 };
    let norm = WeightParameters { alpha_plus: alpha, alpha_minus: alpha, beta: 1.0, epsilon: 0.0, delta: 1.0 };
    null_points(matrix, side, alpha, samples, false)?
        .points
        .iter()
        .map(|p| {
            let t = -eval_q(matrix, &tang, &origin, &p.xi, p.tau, side)?;
            let nn = eval_q(matrix, &norm, &origin, &p.xi, p.tau, side)?;
            Ok((t, nn))
        })
        .collect()
}

/// Largest `eps = beta 2^-m`, `m >= 1`, for which the minimum of `Q(0)` over
/// the null set is at least half its `eps -> 0` limit.
///
/// `Q` is affine in `eps` on the null set (the gradient of `psi` at the
/// origin does not involve `eps`), so the minimum is monotone in `eps`.
pub fn calibrate_epsilon(
    matrix: &ComplexSymmetricMatrix,
    side: Side,
    alpha: f64,
    beta: f64,
    samples: usize,
) -> Result<f64> {
    if !(beta > 0.0) {
        return Err(Error::InvalidParameter(format!("beta must be positive, got {beta}")));
    }
    let terms = null_set_terms(matrix, side, alpha, samples)?;
    let min_q = |eps: f64| terms.iter().map(|(t, nn)| beta * nn - eps * t).fold(f64::INFINITY, f64::min);
    let limit = min_q(0.0);
    let target = 0.5 * limit * (1.0 - 1e-12);
    for m in 1..=60 {
        let eps = beta * 2f64.powi(-m);
        if min_q(eps) >= target {
            return Ok(eps);
        }
    }
    Err(Error::PseudoconvexityFailed {
        reason: "no lattice epsilon reaches half the limiting value".into(),
        xi: vec![],
        tau: 0.0,
    })
}
