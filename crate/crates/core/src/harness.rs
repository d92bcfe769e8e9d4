//! Left- and right-hand sides of the interface Carleman estimates on a
//! grid, swept over `tau`.
//!
//! Three interface variants are supported: frozen coefficients `A(0)` with
//! weight `psi_eps`, the `x_n`-dependent operator `div(A(delta x_n) grad)`
//! with `psi_eps`, and the full operator `div(A(x) grad)` with `phi_delta`.
//! A fourth path evaluates the single-operator interior estimate for fields
//! supported away from the interface.
//!
//! All weighted quantities in a row share one log offset `2 tau w_max`
//! (`w_max` the largest weight on the support); reported values are the
//! true values times `exp(-log_offset)`, which leaves ratios untouched.

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientPair;
use crate::error::{Error, Result};
use crate::grid::{
    derivative, derivative_energy, h_half_seminorm, jump_data, multi_indices, side_slot, side_traces, support_mask,
    trace_terms_with, weight_arrays, weight_gradient, weight_range, weight_value, weighted_sum, Grid, GridField,
    JumpData, SideTrace, WeightKind,
};
use crate::partition::vertical_cutoff;
use crate::tolerance::TOL;
use crate::transmission::log_grid;
use crate::weights::WeightParameters;
use crate::Side;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EstimateId {
    Frozen,
    Vertical,
    Full,
    Interior,
}

impl EstimateId {
    pub fn as_str(&self) -> &'static str {
        match self {
            EstimateId::Frozen => "frozen",
            EstimateId::Vertical => "vertical",
            EstimateId::Full => "full",
            EstimateId::Interior => "interior",
        }
    }

    pub fn weight_kind(&self) -> WeightKind {
        match self {
            EstimateId::Full => WeightKind::PhiDelta,
            _ => WeightKind::Psi,
        }
    }
}

impl std::str::FromStr for EstimateId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frozen" => Ok(EstimateId::Frozen),
            "vertical" => Ok(EstimateId::Vertical),
            "full" => Ok(EstimateId::Full),
            "interior" => Ok(EstimateId::Interior),
            other => Err(Error::Config(format!("unknown estimate id '{other}'"))),
        }
    }
}

/// Where the operator takes its coefficients from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CoefficientSource {
    /// `A_+-(0)`.
    Frozen,
    /// `A_+-(0', delta x_n)`.
    Vertical { delta: f64 },
    /// `A_+-(x)`.
    Full,
}

impl CoefficientSource {
    fn is_constant(&self, pair: &CoefficientPair) -> bool {
        matches!(self, CoefficientSource::Frozen) || pair.spatial.is_none()
    }

    fn write(&self, pair: &CoefficientPair, side: Side, x: &[f64], out: &mut [Complex64]) {
        match self {
            CoefficientSource::Frozen => out.copy_from_slice(pair.side(side).entries()),
            CoefficientSource::Vertical { delta } => {
                let mut y = vec![0.0; x.len()];
                y[x.len() - 1] = delta * x[x.len() - 1];
                pair.write_entries_at(side, &y, out);
            }
            CoefficientSource::Full => pair.write_entries_at(side, x, out),
        }
    }
}

/// Per-side operator values on the whole grid.
#[derive(Debug, Clone)]
pub struct OperatorArrays {
    pub minus: Vec<Complex64>,
    pub plus: Vec<Complex64>,
}

impl OperatorArrays {
    pub fn side(&self, side: Side) -> &[Complex64] {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }
}

/// Second-order derivative arrays of one side, indexed `[l][j]` (symmetric).
fn hessian_arrays(field: &GridField, side: Side) -> Result<Vec<Vec<Vec<Complex64>>>> {
    let n = field.grid.n;
    let mut out = vec![vec![Vec::new(); n]; n];
    for l in 0..n {
        for j in l..n {
            let mut alpha = vec![0; n];
            alpha[l] += 1;
            alpha[j] += 1;
            let d = derivative(field, side, &alpha)?;
            out[j][l] = d.clone();
            out[l][j] = d;
        }
    }
    Ok(out)
}

/// `sum_{l,j} a_lj D_lj u`, plus `sum_{l,j} (d_l a_lj) D_j u` when
/// `divergence` is set (the two together equal `div(A grad u)`).
/// Coefficient derivatives are central differences at step `h`.
fn apply_side<F>(field: &GridField, side: Side, coeffs: F, divergence: bool) -> Result<Vec<Complex64>>
where
    F: Fn(&[f64], &mut [Complex64]) + Sync,
{
    let g = &field.grid;
    let n = g.n;
    let hess = hessian_arrays(field, side)?;
    let grad: Vec<Vec<Complex64>> =
        multi_indices(n, 1).iter().map(|a| derivative(field, side, a)).collect::<Result<_>>()?;
    let out = (0..g.len())
        .into_par_iter()
        .map(|i| {
            let x = g.point(i);
            let mut a = vec![Complex64::default(); n * n];
            coeffs(&x, &mut a);
            let mut v = Complex64::default();
            for l in 0..n {
                for j in 0..n {
                    v += a[l * n + j] * hess[l][j][i];
                }
            }
            if divergence {
                let mut ap = vec![Complex64::default(); n * n];
                let mut am = vec![Complex64::default(); n * n];
                for l in 0..n {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[l] += g.h;
                    xm[l] -= g.h;
                    coeffs(&xp, &mut ap);
                    coeffs(&xm, &mut am);
                    for j in 0..n {
                        v += (ap[l * n + j] - am[l * n + j]) / (2.0 * g.h) * grad[j][i];
                    }
                }
            }
            v
        })
        .collect();
    Ok(out)
}

/// `div(A_+- grad u_+-)` on each side's array over the whole grid.
pub fn apply_operator(field: &GridField, pair: &CoefficientPair, source: CoefficientSource) -> Result<OperatorArrays> {
    check_dims(field, pair)?;
    let variable = !source.is_constant(pair);
    let run = |side: Side| apply_side(field, side, |x: &[f64], out: &mut [Complex64]| source.write(pair, side, x, out), variable);
    Ok(OperatorArrays { minus: run(Side::Minus)?, plus: run(Side::Plus)? })
}

/// Non-divergence `sum a_jl(delta x) D^2_jl u` (interior estimate).
pub fn apply_nondivergence(field: &GridField, pair: &CoefficientPair, delta: f64) -> Result<OperatorArrays> {
    check_dims(field, pair)?;
    let run = |side: Side| {
        let coeffs = |x: &[f64], out: &mut [Complex64]| {
            let y: Vec<f64> = x.iter().map(|v| v * delta).collect();
            pair.write_entries_at(side, &y, out);
        };
        apply_side(field, side, coeffs, false)
    };
    Ok(OperatorArrays { minus: run(Side::Minus)?, plus: run(Side::Plus)? })
}

fn check_dims(field: &GridField, pair: &CoefficientPair) -> Result<()> {
    if pair.dim() != field.grid.n {
        return Err(Error::Dimension(format!(
            "coefficient dimension {} differs from grid dimension {}",
            pair.dim(),
            field.grid.n
        )));
    }
    Ok(())
}

/// One row of a sweep; weighted values are scaled by `exp(-log_offset)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CarlemanRow {
    pub tau: f64,
    pub lhs_k: [f64; 3],
    pub lhs_trace0: f64,
    pub lhs_trace1: f64,
    pub lhs_half_u: f64,
    pub lhs_half_du: f64,
    pub rhs_op: f64,
    pub rhs_half_h1: f64,
    pub rhs_half_dh0: f64,
    pub rhs_l2_h0: f64,
    pub rhs_l2_h1: f64,
    pub lhs_total: f64,
    pub rhs_total: f64,
    pub ratio: f64,
    /// Both sides vanish (ratio reported as 0).
    pub empty: bool,
    pub log_offset: f64,
}

impl CarlemanRow {
    fn finish(mut self) -> Self {
        self.lhs_total = self.lhs_k.iter().sum::<f64>() + self.lhs_trace0 + self.lhs_trace1 + self.lhs_half_u + self.lhs_half_du;
        self.rhs_total = self.rhs_op + self.rhs_half_h1 + self.rhs_half_dh0 + self.rhs_l2_h0 + self.rhs_l2_h1;
        if self.rhs_total > 0.0 {
            self.ratio = self.lhs_total / self.rhs_total;
        } else if self.lhs_total == 0.0 {
            self.ratio = 0.0;
            self.empty = true;
        } else {
            self.ratio = f64::INFINITY;
        }
        self
    }

    /// Interface groups of the right-hand side.
    pub fn rhs_jump(&self) -> f64 {
        self.rhs_half_h1 + self.rhs_half_dh0 + self.rhs_l2_h0 + self.rhs_l2_h1
    }

    pub fn lhs_trace(&self) -> f64 {
        self.lhs_trace0 + self.lhs_trace1 + self.lhs_half_u + self.lhs_half_du
    }

    pub fn terms(&self) -> [f64; 14] {
        [
            self.lhs_k[0],
            self.lhs_k[1],
            self.lhs_k[2],
            self.lhs_trace0,
            self.lhs_trace1,
            self.lhs_half_u,
            self.lhs_half_du,
            self.rhs_op,
            self.rhs_half_h1,
            self.rhs_half_dh0,
            self.rhs_l2_h0,
            self.rhs_l2_h1,
            self.lhs_total,
            self.rhs_total,
        ]
    }
}

/// Everything that does not depend on `tau`.
struct Prepared {
    estimate: EstimateId,
    grid: Grid,
    kind: WeightKind,
    weights: WeightParameters,
    w: [Vec<f64>; 2],
    w_hi: f64,
    w_lo: f64,
    energy: [[Vec<f64>; 2]; 3],
    op: [Vec<f64>; 2],
    traces: Option<[SideTrace; 2]>,
    jumps: Option<JumpData>,
}

fn support_limit(estimate: EstimateId, weights: &WeightParameters, r0: f64) -> f64 {
    match estimate {
        EstimateId::Full => weights.delta * r0,
        _ => r0,
    }
}

fn prepare(
    estimate: EstimateId,
    field: &GridField,
    pair: &CoefficientPair,
    weights: &WeightParameters,
    r0: f64,
) -> Result<Prepared> {
    weights.check()?;
    check_dims(field, pair)?;
    let g = field.grid.clone();
    let limit = support_limit(estimate, weights, r0);
    let radius = field.support_radius();
    if radius > limit + 1e-12 {
        return Err(Error::Support { radius, limit });
    }
    let kind = estimate.weight_kind();
    let w = weight_arrays(&g, weights, kind);
    let mask = support_mask(field);
    let (w_hi, w_lo) = weight_range(&g, &mask, &w);
    let energy = [derivative_energy(field, 0)?, derivative_energy(field, 1)?, derivative_energy(field, 2)?];
    let ops = match estimate {
        EstimateId::Frozen => apply_operator(field, pair, CoefficientSource::Frozen)?,
        EstimateId::Vertical => apply_operator(field, pair, CoefficientSource::Vertical { delta: weights.delta })?,
        EstimateId::Full => apply_operator(field, pair, CoefficientSource::Full)?,
        EstimateId::Interior => {
            let layer = g.interface_indices();
            let touches = layer.iter().any(|&i| {
                (0..=1).any(|off| {
                    let (a, b) = (i - off, i + off);
                    [a, b].iter().any(|&j| field.plus[j] != Complex64::default() || field.minus[j] != Complex64::default())
                })
            });
            if touches {
                return Err(Error::Constraint(
                    "interior estimate needs a field that vanishes near the interface".into(),
                ));
            }
            apply_nondivergence(field, pair, weights.delta)?
        }
    };
    let op = [
        ops.minus.iter().map(|z| z.norm_sqr()).collect(),
        ops.plus.iter().map(|z| z.norm_sqr()).collect(),
    ];
    let (traces, jumps) = if estimate == EstimateId::Interior {
        (None, None)
    } else {
        (Some(side_traces(field)?), Some(jump_data(field, pair, estimate == EstimateId::Full)?))
    };
    Ok(Prepared { estimate, grid: g, kind, weights: *weights, w, w_hi, w_lo, energy, op, traces, jumps })
}

impl Prepared {
    fn tau_budget(&self) -> f64 {
        let osc = self.w_hi - self.w_lo;
        if osc > 0.0 {
            0.5 * TOL.log_budget / osc
        } else {
            f64::INFINITY
        }
    }

    fn row(&self, tau: f64) -> Result<CarlemanRow> {
        let g = &self.grid;
        let offset = 2.0 * tau * self.w_hi;
        let mut row = CarlemanRow {
            tau,
            lhs_k: [0.0; 3],
            lhs_trace0: 0.0,
            lhs_trace1: 0.0,
            lhs_half_u: 0.0,
            lhs_half_du: 0.0,
            rhs_op: 0.0,
            rhs_half_h1: 0.0,
            rhs_half_dh0: 0.0,
            rhs_l2_h0: 0.0,
            rhs_l2_h1: 0.0,
            lhs_total: 0.0,
            rhs_total: 0.0,
            ratio: 0.0,
            empty: false,
            log_offset: offset,
        };
        for k in 0..3 {
            let e = &self.energy[k];
            row.lhs_k[k] = tau.powi(3 - 2 * k as i32) * weighted_sum(g, [&e[0], &e[1]], &self.w, tau, offset);
        }
        row.rhs_op = weighted_sum(g, [&self.op[0], &self.op[1]], &self.w, tau, offset);
        if let (Some(traces), Some(jumps)) = (&self.traces, &self.jumps) {
            let t = trace_terms_with(g, traces, &self.weights, self.kind, tau, offset)?;
            row.lhs_trace0 = t.l2_u;
            row.lhs_trace1 = t.l2_du;
            row.lhs_half_u = t.half_u;
            row.lhs_half_du = t.half_du;
            self.jump_groups(traces, jumps, tau, offset, &mut row)?;
        }
        Ok(row.finish())
    }

    fn jump_groups(&self, traces: &[SideTrace; 2], jumps: &JumpData, tau: f64, offset: f64, row: &mut CarlemanRow) -> Result<()> {
        let g = &self.grid;
        let n = g.n;
        let layer = g.interface_indices();
        let (minus, plus) = (&traces[side_slot(Side::Minus)], &traces[side_slot(Side::Plus)]);
        let mut e_h1 = Vec::with_capacity(layer.len());
        let mut d_h0 = vec![Vec::with_capacity(layer.len()); n - 1];
        let (mut l2_h0, mut l2_h1) = (0.0, 0.0);
        for (k, &i) in layer.iter().enumerate() {
            let x = g.point(i);
            let w = weight_value(&self.weights, self.kind, &x, Side::Plus);
            let gw = weight_gradient(&self.weights, self.kind, &x, Side::Plus);
            let e = (tau * w - 0.5 * offset).exp();
            let q = g.interface_weight(k);
            let (h0, h1) = (jumps.h0[k], jumps.h1[k]);
            l2_h0 += q * h0.norm_sqr() * e * e;
            l2_h1 += q * h1.norm_sqr() * e * e;
            e_h1.push(h1 * e);
            for j in 0..n - 1 {
                let dh0 = plus.grad[j][k] - minus.grad[j][k];
                d_h0[j].push((dh0 + tau * gw[j] * h0) * e);
            }
        }
        let dims = g.interface_dims();
        row.rhs_half_h1 = h_half_seminorm(&e_h1, &dims, g.h)?;
        row.rhs_half_dh0 = d_h0.iter().map(|c| h_half_seminorm(c, &dims, g.h)).sum::<Result<f64>>()?;
        row.rhs_l2_h0 = tau.powi(3) * l2_h0;
        row.rhs_l2_h1 = tau * l2_h1;
        Ok(())
    }
}

/// Single-`tau` evaluation of the chosen estimate.
pub fn assemble(
    estimate: EstimateId,
    field: &GridField,
    pair: &CoefficientPair,
    weights: &WeightParameters,
    tau: f64,
    r0: f64,
) -> Result<CarlemanRow> {
    if !(tau > 0.0) {
        return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
    }
    let p = prepare(estimate, field, pair, weights, r0)?;
    let budget = p.tau_budget();
    if tau > budget {
        return Err(Error::OverflowBudget { tau, tau_max: budget });
    }
    p.row(tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub tau_min: f64,
    pub tau_max: f64,
    pub points: usize,
    #[serde(default = "default_r0")]
    pub r0: f64,
}

pub fn default_r0() -> f64 {
    0.5
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self { tau_min: 20.0, tau_max: 200.0, points: 12, r0: default_r0() }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CarlemanReport {
    pub estimate_id: EstimateId,
    pub grid: Grid,
    pub weights: WeightParameters,
    pub weight_kind: WeightKind,
    pub support_radius: f64,
    pub support_limit: f64,
    pub tau_max_budget: f64,
    pub rows: Vec<CarlemanRow>,
    /// First `tau` after which `R` stops growing (the grid's last point if it never does).
    pub knee_tau: f64,
    /// Start of the asserted range: `max(10, knee)`.
    pub tau0: f64,
    pub max_ratio: f64,
    pub argmax_tau: f64,
    /// Maximum over every row, including those below `tau0`.
    pub max_ratio_all: f64,
    pub bounded: bool,
}

impl CarlemanReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "estimate_id",
            "tau",
            "lhs_total",
            "rhs_total",
            "ratio",
            "lhs_k0",
            "lhs_k1",
            "lhs_k2",
            "lhs_trace0",
            "lhs_trace1",
            "lhs_half_u",
            "lhs_half_Du",
            "rhs_op",
            "rhs_half_h1",
            "rhs_half_Dh0",
            "rhs_l2_h0",
            "rhs_l2_h1",
            "log_offset",
        ])?;
        for r in &self.rows {
            let vals = [
                r.tau,
                r.lhs_total,
                r.rhs_total,
                r.ratio,
                r.lhs_k[0],
                r.lhs_k[1],
                r.lhs_k[2],
                r.lhs_trace0,
                r.lhs_trace1,
                r.lhs_half_u,
                r.lhs_half_du,
                r.rhs_op,
                r.rhs_half_h1,
                r.rhs_half_dh0,
                r.rhs_l2_h0,
                r.rhs_l2_h1,
                r.log_offset,
            ];
            let mut rec = vec![self.estimate_id.as_str().to_string()];
            rec.extend(vals.iter().map(|v| format!("{v:e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

fn knee(rows: &[CarlemanRow]) -> f64 {
    for pair in rows.windows(2) {
        if pair[1].ratio <= pair[0].ratio {
            return pair[0].tau;
        }
    }
    rows.last().map(|r| r.tau).unwrap_or(0.0)
}

/// Evaluates the estimate on a logarithmic `tau` grid, in parallel.
pub fn tau_sweep(
    estimate: EstimateId,
    field: &GridField,
    pair: &CoefficientPair,
    weights: &WeightParameters,
    spec: &SweepSpec,
) -> Result<CarlemanReport> {
    if !(spec.tau_min > 0.0 && spec.tau_max >= spec.tau_min) || spec.points == 0 {
        return Err(Error::InvalidParameter(format!(
            "sweep needs 0 < tau_min <= tau_max and points >= 1, got [{}, {}] x {}",
            spec.tau_min, spec.tau_max, spec.points
        )));
    }
    let p = prepare(estimate, field, pair, weights, spec.r0)?;
    let budget = p.tau_budget();
    if spec.tau_max > budget {
        return Err(Error::OverflowBudget { tau: spec.tau_max, tau_max: budget });
    }
    let taus = log_grid(spec.tau_min, spec.tau_max, spec.points);
    let rows = taus.par_iter().map(|&t| p.row(t)).collect::<Result<Vec<_>>>()?;
    let knee_tau = knee(&rows);
    let tau0 = knee_tau.max(10.0);
    let (mut max_ratio, mut argmax_tau) = (0.0f64, tau0);
    for r in rows.iter().filter(|r| r.tau >= tau0) {
        if r.ratio > max_ratio || !r.ratio.is_finite() {
            max_ratio = r.ratio;
            argmax_tau = r.tau;
        }
    }
    let max_ratio_all = rows.iter().map(|r| r.ratio).fold(0.0, f64::max);
    let bounded = rows.iter().all(|r| r.ratio.is_finite() && r.ratio >= 0.0) && max_ratio.is_finite();
    Ok(CarlemanReport {
        estimate_id: p.estimate,
        grid: p.grid.clone(),
        weights: *weights,
        weight_kind: p.kind,
        support_radius: field.support_radius(),
        support_limit: support_limit(estimate, weights, spec.r0),
        tau_max_budget: budget,
        rows,
        knee_tau,
        tau0,
        max_ratio,
        argmax_tau,
        max_ratio_all,
        bounded,
    })
}

/// Interior estimate sweep for a field supported away from `x_n = 0`.
pub fn interior_check(
    field: &GridField,
    pair: &CoefficientPair,
    weights: &WeightParameters,
    spec: &SweepSpec,
) -> Result<CarlemanReport> {
    tau_sweep(EstimateId::Interior, field, pair, weights, spec)
}

/// Bookkeeping of `u = v + z` with `v = eta_mu(x_n) u`.
#[derive(Debug, Clone, Serialize)]
pub struct SplitReport {
    pub mu: f64,
    pub tau: f64,
    pub lhs_u: f64,
    pub lhs_v: f64,
    pub lhs_z: f64,
    /// `2 (LHS(v) + LHS(z)) - LHS(u)`.
    pub slack: f64,
    pub holds: bool,
    /// Largest interface group of `z` (exactly 0 when `mu h <= 1`).
    pub z_trace_max: f64,
    pub reconstruction_error: f64,
    pub log_offset: f64,
}

/// Left-hand side of the vertical estimate for `u`, `v_mu` and `z_mu`.
pub fn split_check(
    field: &GridField,
    pair: &CoefficientPair,
    weights: &WeightParameters,
    tau: f64,
    mu: f64,
    r0: f64,
) -> Result<SplitReport> {
    let cut = vertical_cutoff(mu, r0)?;
    let v = field.times_vertical(|t| cut.eta(t));
    let diff = |a: &[Complex64], b: &[Complex64]| a.iter().zip(b).map(|(x, y)| x - y).collect::<Vec<_>>();
    let z = GridField {
        grid: field.grid.clone(),
        rho: field.rho,
        plus: diff(&field.plus, &v.plus),
        minus: diff(&field.minus, &v.minus),
    };
    let reconstruction_error = field
        .plus
        .iter()
        .zip(&v.plus)
        .zip(&z.plus)
        .chain(field.minus.iter().zip(&v.minus).zip(&z.minus))
        .map(|((u, a), b)| (u - (a + b)).norm())
        .fold(0.0, f64::max);
    let pu = prepare(EstimateId::Vertical, field, pair, weights, r0)?;
    let offset = 2.0 * tau * pu.w_hi;
    let lhs = |f: &GridField| -> Result<(f64, f64)> {
        let p = prepare(EstimateId::Vertical, f, pair, weights, r0)?;
        let mut total = 0.0;
        for k in 0..3 {
            let e = &p.energy[k];
            total += tau.powi(3 - 2 * k as i32) * weighted_sum(&p.grid, [&e[0], &e[1]], &p.w, tau, offset);
        }
        let traces = p.traces.as_ref().expect("interface estimate has traces");
        let t = trace_terms_with(&p.grid, traces, weights, p.kind, tau, offset)?;
        let tr = t.l2_u + t.l2_du + t.half_u + t.half_du;
        Ok((total + tr, tr))
    };
    let (lhs_u, _) = lhs(field)?;
    let (lhs_v, _) = lhs(&v)?;
    let (lhs_z, z_trace_max) = lhs(&z)?;
    let slack = 2.0 * (lhs_v + lhs_z) - lhs_u;
    Ok(SplitReport {
        mu,
        tau,
        lhs_u,
        lhs_v,
        lhs_z,
        slack,
        holds: slack >= -TOL.a_lower_bound * lhs_u.max(1.0),
        z_trace_max,
        reconstruction_error,
        log_offset: offset,
    })
}
