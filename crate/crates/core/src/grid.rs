//! Grid-sampled piecewise fields `u = H_+ u_+ + H_- u_-`.
//!
//! Each side is stored as a smooth function on the whole box, so every
//! stencil is interior; integrals only use the side's own half, with the
//! interface layer weighted by one half.

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::coefficients::CoefficientPair;
use crate::error::{Error, Result};
use crate::partition::{bump, bump_deriv};
use crate::weights::{grad_phi_delta, grad_psi, phi_delta_side, psi, WeightParameters};
use crate::Side;

/// Uniform tensor grid on `[-L, L]^n` with `x_n = 0` as a node layer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Grid {
    pub n: usize,
    pub half_width: f64,
    pub h: f64,
    /// Nodes per axis (odd).
    pub nodes: usize,
}

impl Grid {
    pub fn new(n: usize, half_width: f64, h: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(format!("grid dimension must be >= 2, got {n}")));
        }
        if !(h > 0.0 && half_width > 0.0) {
            return Err(Error::InvalidParameter("grid spacing and half width must be positive".into()));
        }
        let cells = half_width / h;
        let m = cells.round();
        if (cells - m).abs() > 1e-9 * cells.max(1.0) || m < 2.0 {
            return Err(Error::InvalidParameter(format!(
                "half width {half_width} must be an integer multiple (>= 2) of h = {h}"
            )));
        }
        Ok(Self { n, half_width: m * h, h, nodes: 2 * m as usize + 1 })
    }

    pub fn len(&self) -> usize {
        self.nodes.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the `x_n = 0` layer along any axis.
    pub fn mid(&self) -> usize {
        self.nodes / 2
    }

    pub fn coord(&self, i: usize) -> f64 {
        (i as f64 - self.mid() as f64) * self.h
    }

    /// Row-major stride; the last axis (`x_n`) is contiguous.
    pub fn stride(&self, axis: usize) -> usize {
        self.nodes.pow((self.n - 1 - axis) as u32)
    }

    pub fn multi(&self, mut idx: usize) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for a in (0..self.n).rev() {
            out[a] = idx % self.nodes;
            idx /= self.nodes;
        }
        out
    }

    pub fn point(&self, idx: usize) -> Vec<f64> {
        self.multi(idx).into_iter().map(|i| self.coord(i)).collect()
    }

    /// Shape of the interface grid (`n - 1` axes).
    pub fn interface_dims(&self) -> Vec<usize> {
        vec![self.nodes; self.n - 1]
    }

    /// Flat indices of the interface layer, ordered row-major in `x'`.
    pub fn interface_indices(&self) -> Vec<usize> {
        let m = self.nodes.pow((self.n - 1) as u32);
        (0..m).map(|k| k * self.nodes + self.mid()).collect()
    }

    /// Trapezoid weight of node `idx` for integrals over the side's half box
    /// (0 off that half, half weight on the interface layer).
    pub fn side_weight(&self, idx: usize, side: Side) -> f64 {
        let m = self.multi(idx);
        let mut w = 1.0;
        for (a, &i) in m.iter().enumerate() {
            let edge = i == 0 || i == self.nodes - 1;
            if a == self.n - 1 {
                let on_side = match side {
                    Side::Plus => i >= self.mid(),
                    Side::Minus => i <= self.mid(),
                };
                if !on_side {
                    return 0.0;
                }
                if i == self.mid() || edge {
                    w *= 0.5;
                }
            } else if edge {
                w *= 0.5;
            }
            w *= self.h;
        }
        w
    }

    /// Trapezoid weight on the interface grid.
    pub fn interface_weight(&self, k: usize) -> f64 {
        let mut w = 1.0;
        let mut k = k;
        for _ in 0..self.n - 1 {
            let i = k % self.nodes;
            k /= self.nodes;
            w *= if i == 0 || i == self.nodes - 1 { 0.5 * self.h } else { self.h };
        }
        w
    }
}

/// Pair of per-side arrays on a common grid.
#[derive(Debug, Clone)]
pub struct GridField {
    pub grid: Grid,
    /// Nominal support radius of the synthesized field.
    pub rho: f64,
    pub plus: Vec<Complex64>,
    pub minus: Vec<Complex64>,
}

impl GridField {
    pub fn from_fn<F, G>(grid: Grid, rho: f64, plus: F, minus: G) -> Self
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
        G: Fn(&[f64]) -> Complex64 + Sync,
    {
        let (p, m): (Vec<_>, Vec<_>) = (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let x = grid.point(i);
                (plus(&x), minus(&x))
            })
            .unzip();
        Self { grid, rho, plus: p, minus: m }
    }

    pub fn zeros(grid: Grid) -> Self {
        let len = grid.len();
        Self { grid, rho: 0.0, plus: vec![Complex64::default(); len], minus: vec![Complex64::default(); len] }
    }

    pub fn side(&self, side: Side) -> &[Complex64] {
        match side {
            Side::Plus => &self.plus,
            Side::Minus => &self.minus,
        }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid.clone(),
            rho: self.rho,
            plus: self.plus.iter().map(|v| v * c).collect(),
            minus: self.minus.iter().map(|v| v * c).collect(),
        }
    }

    /// Multiplies both sides pointwise by a function of `x_n`.
    pub fn times_vertical<F: Fn(f64) -> f64>(&self, f: F) -> Self {
        let g = &self.grid;
        let factor: Vec<f64> = (0..g.nodes).map(|i| f(g.coord(i))).collect();
        let apply = |a: &[Complex64]| a.iter().enumerate().map(|(i, v)| v * factor[i % g.nodes]).collect();
        Self { grid: g.clone(), rho: self.rho, plus: apply(&self.plus), minus: apply(&self.minus) }
    }

    /// Largest `max(|x'|, |x_n|)` over nodes where the side's own half is nonzero.
    pub fn support_radius(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .filter(|&i| {
                let xn = g.coord(i % g.nodes);
                (xn >= 0.0 && self.plus[i] != Complex64::default()) || (xn <= 0.0 && self.minus[i] != Complex64::default())
            })
            .map(|i| {
                let x = g.point(i);
                let t = x[..g.n - 1].iter().map(|v| v * v).sum::<f64>().sqrt();
                t.max(x[g.n - 1].abs())
            })
            .fold(0.0, f64::max)
    }

    /// Largest value on nodes within two cells of the box boundary.
    pub fn boundary_max(&self) -> f64 {
        let g = &self.grid;
        (0..g.len())
            .filter(|&i| g.multi(i).iter().any(|&k| k < 2 || k + 2 >= g.nodes))
            .map(|i| self.plus[i].norm().max(self.minus[i].norm()))
            .fold(0.0, f64::max)
    }
}

/// All multi-indices of order `k` in `n` variables, each listed once.
pub fn multi_indices(n: usize, k: usize) -> Vec<Vec<usize>> {
    match k {
        0 => vec![vec![0; n]],
        1 => (0..n)
            .map(|a| {
                let mut m = vec![0; n];
                m[a] = 1;
                m
            })
            .collect(),
        2 => {
            let mut out = Vec::new();
            for a in 0..n {
                for b in a..n {
                    let mut m = vec![0; n];
                    m[a] += 1;
                    m[b] += 1;
                    out.push(m);
                }
            }
            out
        }
        _ => vec![],
    }
}

/// Central second-order finite difference `D^alpha` of a grid array.
///
/// Pure second derivatives use the compact three-point stencil; nodes whose
/// stencil leaves the box get 0 (fields vanish near the boundary).
pub fn derivative_of(grid: &Grid, data: &[Complex64], alpha: &[usize]) -> Result<Vec<Complex64>> {
    if alpha.len() != grid.n {
        return Err(Error::Dimension(format!("multi-index has length {}, grid dimension {}", alpha.len(), grid.n)));
    }
    let order: usize = alpha.iter().sum();
    if order > 2 {
        return Err(Error::UnsupportedOrder(order));
    }
    let axes: Vec<usize> = alpha.iter().enumerate().flat_map(|(a, &k)| std::iter::repeat(a).take(k)).collect();
    let h = grid.h;
    let last = grid.nodes - 1;
    let out = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let m = grid.multi(i);
            let inside = |a: usize| m[a] >= 1 && m[a] < last;
            match axes.as_slice() {
                [] => data[i],
                [a] => {
                    if !inside(*a) {
                        return Complex64::default();
                    }
                    let s = grid.stride(*a);
                    (data[i + s] - data[i - s]) / (2.0 * h)
                }
                [a, b] if a == b => {
                    if !inside(*a) {
                        return Complex64::default();
                    }
                    let s = grid.stride(*a);
                    (data[i + s] - 2.0 * data[i] + data[i - s]) / (h * h)
                }
                [a, b] => {
                    if !inside(*a) || !inside(*b) {
                        return Complex64::default();
                    }
                    let (sa, sb) = (grid.stride(*a), grid.stride(*b));
                    (data[i + sa + sb] - data[i + sa - sb] - data[i - sa + sb] + data[i - sa - sb]) / (4.0 * h * h)
                }
                _ => unreachable!(),
            }
        })
        .collect();
    Ok(out)
}

pub fn derivative(field: &GridField, side: Side, alpha: &[usize]) -> Result<Vec<Complex64>> {
    derivative_of(&field.grid, field.side(side), alpha)
}

/// Which Carleman weight multiplies the integrands.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightKind {
    /// `psi_eps` (frozen and vertical estimates).
    Psi,
    /// `phi_delta` (full estimate).
    PhiDelta,
}

pub fn weight_value(weights: &WeightParameters, kind: WeightKind, x: &[f64], side: Side) -> f64 {
    match kind {
        WeightKind::Psi => psi(weights, x, side),
        WeightKind::PhiDelta => phi_delta_side(weights, x, side).expect("weights validated"),
    }
}

pub fn weight_gradient(weights: &WeightParameters, kind: WeightKind, x: &[f64], side: Side) -> Vec<f64> {
    match kind {
        WeightKind::Psi => grad_psi(weights, x, side),
        WeightKind::PhiDelta => grad_phi_delta(weights, x, side).expect("weights validated"),
    }
}

/// A nonnegative quantity stored as `value * exp(log_offset)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogScaled {
    pub value: f64,
    pub log_offset: f64,
}

impl LogScaled {
    pub fn ln(&self) -> f64 {
        self.value.ln() + self.log_offset
    }
}

/// Nodes where some side is nonzero on its own half, dilated by one cell.
pub(crate) fn support_mask(field: &GridField) -> Vec<bool> {
    let g = &field.grid;
    let raw: Vec<bool> = (0..g.len())
        .map(|i| field.plus[i] != Complex64::default() || field.minus[i] != Complex64::default())
        .collect();
    (0..g.len())
        .map(|i| {
            let m = g.multi(i);
            (0..3usize.pow(g.n as u32)).any(|mut code| {
                let mut j = 0isize;
                for a in 0..g.n {
                    let off = (code % 3) as isize - 1;
                    code /= 3;
                    let k = m[a] as isize + off;
                    if k < 0 || k >= g.nodes as isize {
                        return false;
                    }
                    j += k * g.stride(a) as isize;
                }
                raw[j as usize]
            })
        })
        .collect()
}

/// Per-side weight values at every node (each side's smooth extension).
pub(crate) fn weight_arrays(grid: &Grid, weights: &WeightParameters, kind: WeightKind) -> [Vec<f64>; 2] {
    let eval = |side: Side| (0..grid.len()).map(|i| weight_value(weights, kind, &grid.point(i), side)).collect();
    [eval(Side::Minus), eval(Side::Plus)]
}

pub(crate) fn side_slot(side: Side) -> usize {
    match side {
        Side::Minus => 0,
        Side::Plus => 1,
    }
}

/// Largest and smallest weight over the support (each side on its half).
pub(crate) fn weight_range(grid: &Grid, mask: &[bool], w: &[Vec<f64>; 2]) -> (f64, f64) {
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for i in 0..grid.len() {
        if !mask[i] {
            continue;
        }
        for side in Side::BOTH {
            if grid.side_weight(i, side) > 0.0 {
                let v = w[side_slot(side)][i];
                hi = hi.max(v);
                lo = lo.min(v);
            }
        }
    }
    if hi == f64::NEG_INFINITY {
        (0.0, 0.0)
    } else {
        (hi, lo)
    }
}

/// `sum_sides int_{side half} |f_side|^2 e^{2 tau w_side - offset}`.
///
/// Terms are produced in parallel but added sequentially, so the result
/// does not depend on the thread count.
pub(crate) fn weighted_sum(grid: &Grid, f: [&[f64]; 2], w: &[Vec<f64>; 2], tau: f64, offset: f64) -> f64 {
    let terms: Vec<f64> = (0..grid.len())
        .into_par_iter()
        .map(|i| {
            let mut s = 0.0;
            for side in Side::BOTH {
                let k = side_slot(side);
                let q = grid.side_weight(i, side);
                if q > 0.0 && f[k][i] != 0.0 {
                    s += q * f[k][i] * (2.0 * tau * w[k][i] - offset).exp();
                }
            }
            s
        })
        .collect();
    terms.iter().sum()
}

/// `sum_{|alpha| = k} |D^alpha u|^2` per node, for each side.
pub(crate) fn derivative_energy(field: &GridField, k: usize) -> Result<[Vec<f64>; 2]> {
    let g = &field.grid;
    let mut out = [vec![0.0; g.len()], vec![0.0; g.len()]];
    for side in Side::BOTH {
        for alpha in multi_indices(g.n, k) {
            let d = derivative(field, side, &alpha)?;
            for (o, v) in out[side_slot(side)].iter_mut().zip(&d) {
                *o += v.norm_sqr();
            }
        }
    }
    Ok(out)
}

/// `tau^{3-2k} sum_sides int |D^k u|^2 e^{2 tau w}` over each side's half.
pub fn weighted_volume_term(
    field: &GridField,
    weights: &WeightParameters,
    tau: f64,
    k: usize,
    kind: WeightKind,
) -> Result<LogScaled> {
    if k > 2 {
        return Err(Error::UnsupportedOrder(k));
    }
    let g = &field.grid;
    let w = weight_arrays(g, weights, kind);
    let mask = support_mask(field);
    let (hi, _) = weight_range(g, &mask, &w);
    let offset = 2.0 * tau * hi;
    let e = derivative_energy(field, k)?;
    let s = weighted_sum(g, [&e[0], &e[1]], &w, tau, offset);
    Ok(LogScaled { value: tau.powi(3 - 2 * k as i32) * s, log_offset: offset })
}

/// Jump data on the interface grid.
#[derive(Debug, Clone)]
pub struct JumpData {
    pub dims: Vec<usize>,
    /// `u_+ - u_-`.
    pub h0: Vec<Complex64>,
    /// `A_+ grad u_+ . e_n - A_- grad u_- . e_n`.
    pub h1: Vec<Complex64>,
}

impl JumpData {
    pub fn max_abs(&self) -> (f64, f64) {
        let m = |v: &[Complex64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        (m(&self.h0), m(&self.h1))
    }
}

/// `h0 = u_+ - u_-` and `h1 = sum_j (a^+_nj d_j u_+ - a^-_nj d_j u_-)` at `x_n = 0`.
///
/// With `spatial = false` the frozen matrices `A_+-(0)` are used; otherwise
/// the pair's spatial field at `(x', 0)`.
pub fn jump_data(field: &GridField, pair: &CoefficientPair, spatial: bool) -> Result<JumpData> {
    let g = &field.grid;
    let n = g.n;
    if pair.dim() != n {
        return Err(Error::Dimension(format!("pair dimension {} differs from grid dimension {n}", pair.dim())));
    }
    let layer = g.interface_indices();
    let mut grads: [Vec<Vec<Complex64>>; 2] = [Vec::new(), Vec::new()];
    for side in Side::BOTH {
        for alpha in multi_indices(n, 1) {
            grads[side_slot(side)].push(derivative(field, side, &alpha)?);
        }
    }
    let mut h0 = Vec::with_capacity(layer.len());
    let mut h1 = Vec::with_capacity(layer.len());
    let mut a = vec![Complex64::default(); n * n];
    for &i in &layer {
        h0.push(field.plus[i] - field.minus[i]);
        let x = g.point(i);
        let mut flux = Complex64::default();
        for side in Side::BOTH {
            if spatial {
                pair.write_entries_at(side, &x, &mut a);
            } else {
                a.copy_from_slice(pair.side(side).entries());
            }
            let sign = if side == Side::Plus { 1.0 } else { -1.0 };
            for j in 0..n {
                flux += sign * a[(n - 1) * n + j] * grads[side_slot(side)][j][i];
            }
        }
        h1.push(flux);
    }
    Ok(JumpData { dims: g.interface_dims(), h0, h1 })
}

fn fft_nd(data: &mut [Complex64], dims: &[usize]) {
    let mut planner = FftPlanner::<f64>::new();
    let total: usize = dims.iter().product();
    for (axis, &len) in dims.iter().enumerate() {
        let fft = planner.plan_fft_forward(len);
        let stride: usize = dims[axis + 1..].iter().product();
        let mut buf = vec![Complex64::default(); len];
        for start in 0..total {
            // start must be the first element of a line along `axis`
            if (start / stride) % len != 0 {
                continue;
            }
            for k in 0..len {
                buf[k] = data[start + k * stride];
            }
            fft.process(&mut buf);
            for k in 0..len {
                data[start + k * stride] = buf[k];
            }
        }
    }
}

/// `int m(|xi|) |f^(xi)|^2 dxi` with `f^(xi) = int f e^{-i x.xi} dx`, using
/// the DFT scaled by `h^d` on a grid zero-padded to at least `pad` times
/// its size per axis.
fn multiplier_energy<M: Fn(f64) -> f64 + Sync>(f: &[Complex64], dims: &[usize], h: f64, pad: usize, m: M) -> Result<f64> {
    if f.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::InvalidInput("non-finite trace value".into()));
    }
    let total: usize = dims.iter().product();
    if total != f.len() {
        return Err(Error::Dimension(format!("array of length {} does not match dims {dims:?}", f.len())));
    }
    let d = dims.len();
    let padded: Vec<usize> = dims.iter().map(|&n| (n * pad).next_power_of_two()).collect();
    let ptotal: usize = padded.iter().product();
    let mut buf = vec![Complex64::default(); ptotal];
    for (k, v) in f.iter().enumerate() {
        let mut rem = k;
        let mut idx = 0;
        let mut stride = 1;
        for a in (0..d).rev() {
            let i = rem % dims[a];
            rem /= dims[a];
            idx += i * stride;
            stride *= padded[a];
        }
        buf[idx] = *v;
    }
    fft_nd(&mut buf, &padded);
    let scale = h.powi(d as i32);
    let dxi: f64 = padded.iter().map(|&p| 2.0 * std::f64::consts::PI / (p as f64 * h)).product();
    let terms: Vec<f64> = buf
        .par_iter()
        .enumerate()
        .map(|(k, z)| {
            let mut rem = k;
            let mut xi2 = 0.0;
            for a in (0..d).rev() {
                let p = padded[a];
                let i = rem % p;
                rem /= p;
                let signed = if i <= p / 2 { i as f64 } else { i as f64 - p as f64 };
                xi2 += (2.0 * std::f64::consts::PI * signed / (p as f64 * h)).powi(2);
            }
            m(xi2.sqrt()) * (z * scale).norm_sqr()
        })
        .collect();
    Ok(terms.iter().sum::<f64>() * dxi)
}

const PAD: usize = 4;

/// Fourier-multiplier seminorm `[f]^2_{1/2} = int |xi| |f^(xi)|^2 dxi`.
pub fn h_half_seminorm(f: &[Complex64], dims: &[usize], h: f64) -> Result<f64> {
    multiplier_energy(f, dims, h, PAD, |r| r)
}

/// `int |f|^2` through the same DFT pipeline (Parseval check).
pub fn l2_via_fft(f: &[Complex64], dims: &[usize], h: f64) -> Result<f64> {
    let d = dims.len() as i32;
    Ok(multiplier_energy(f, dims, h, PAD, |_| 1.0)? / (2.0 * std::f64::consts::PI).powi(d))
}

/// Double-integral seminorm `int int |f(x) - f(y)|^2 / |x - y|^2 dx dy` in
/// one dimension, by direct summation with a diagonal correction and the
/// exact contribution of the exterior where `f = 0`.
pub fn double_integral_seminorm_1d(f: &[Complex64], h: f64) -> f64 {
    let n = f.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                let d = (i as f64 - j as f64) * h;
                s += (f[i] - f[j]).norm_sqr() / (d * d);
            }
        }
    }
    s *= h * h;
    // cells i = j: |f(x)-f(y)|^2 / |x-y|^2 ~ |f'|^2 over the h x h square
    let mut diag = 0.0;
    for i in 1..n - 1 {
        let d = (f[i + 1] - f[i - 1]) / (2.0 * h);
        diag += d.norm_sqr();
    }
    s += diag * h * h;
    // pairs with one point outside [x_0 - h/2, x_{n-1} + h/2]
    let (a, b) = (-0.5 * h, (n as f64 - 0.5) * h);
    let mut tail = 0.0;
    for (i, v) in f.iter().enumerate() {
        let x = i as f64 * h;
        tail += v.norm_sqr() * (1.0 / (b - x) + 1.0 / (x - a));
    }
    s + 2.0 * tail * h
}

/// The four interface groups of the left-hand side.
#[derive(Debug, Clone, Copy, Default, Serialize)]
pub struct TraceTerms {
    /// `tau^3 sum_sides int |u(x',0)|^2 e^{2 tau w}`.
    pub l2_u: f64,
    /// `tau sum_sides int |Du(x',0)|^2 e^{2 tau w}`.
    pub l2_du: f64,
    /// `tau^2 sum_sides [e^{tau w} u(.,0)]^2_{1/2}`.
    pub half_u: f64,
    /// `sum_sides [D(e^{tau w} u)(.,0)]^2_{1/2}`, all `n` components.
    pub half_du: f64,
    pub log_offset: f64,
}

/// Trace arrays of one side at the interface layer.
#[derive(Debug, Clone)]
pub(crate) struct SideTrace {
    pub u: Vec<Complex64>,
    /// `n` gradient components.
    pub grad: Vec<Vec<Complex64>>,
}

pub(crate) fn side_traces(field: &GridField) -> Result<[SideTrace; 2]> {
    let g = &field.grid;
    let layer = g.interface_indices();
    let make = |side: Side| -> Result<SideTrace> {
        let data = field.side(side);
        let u = layer.iter().map(|&i| data[i]).collect();
        let grad = multi_indices(g.n, 1)
            .iter()
            .map(|alpha| {
                let d = derivative(field, side, alpha)?;
                Ok(layer.iter().map(|&i| d[i]).collect())
            })
            .collect::<Result<_>>()?;
        Ok(SideTrace { u, grad })
    };
    Ok([make(Side::Minus)?, make(Side::Plus)?])
}

/// Interface groups with an explicit log offset (`2 tau w_max`).
pub(crate) fn trace_terms_with(
    grid: &Grid,
    traces: &[SideTrace; 2],
    weights: &WeightParameters,
    kind: WeightKind,
    tau: f64,
    offset: f64,
) -> Result<TraceTerms> {
    let layer = grid.interface_indices();
    let dims = grid.interface_dims();
    let n = grid.n;
    let mut t = TraceTerms { log_offset: offset, ..Default::default() };
    for side in Side::BOTH {
        let tr = &traces[side_slot(side)];
        let mut scaled_u = Vec::with_capacity(layer.len());
        let mut scaled_grad = vec![Vec::with_capacity(layer.len()); n];
        for (k, &i) in layer.iter().enumerate() {
            let x = grid.point(i);
            let w = weight_value(weights, kind, &x, side);
            let gw = weight_gradient(weights, kind, &x, side);
            let e = (tau * w - 0.5 * offset).exp();
            let q = grid.interface_weight(k);
            let du2: f64 = tr.grad.iter().map(|c| c[k].norm_sqr()).sum();
            t.l2_u += q * tr.u[k].norm_sqr() * e * e;
            t.l2_du += q * du2 * e * e;
            scaled_u.push(tr.u[k] * e);
            for j in 0..n {
                scaled_grad[j].push((tr.grad[j][k] + tau * gw[j] * tr.u[k]) * e);
            }
        }
        t.half_u += h_half_seminorm(&scaled_u, &dims, grid.h)?;
        for comp in &scaled_grad {
            t.half_du += h_half_seminorm(comp, &dims, grid.h)?;
        }
    }
    t.l2_u *= tau.powi(3);
    t.l2_du *= tau;
    t.half_u *= tau * tau;
    Ok(t)
}

/// Interface groups of the left-hand side at `tau`.
pub fn trace_terms(field: &GridField, weights: &WeightParameters, tau: f64, kind: WeightKind) -> Result<TraceTerms> {
    let g = &field.grid;
    let w = weight_arrays(g, weights, kind);
    let (hi, _) = weight_range(g, &support_mask(field), &w);
    let traces = side_traces(field)?;
    trace_terms_with(g, &traces, weights, kind, tau, 2.0 * tau * hi)
}

/// Synthesized test-function families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// Tangential smooth bump times a vertical quadratic.
    BumpPoly,
    /// Same with a Gaussian factor in the tangential profile.
    BumpGauss,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct JumpSpec {
    #[serde(default)]
    pub h0_amp: f64,
    #[serde(default)]
    pub h1_amp: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub rho: f64,
    pub h: f64,
    pub family: Family,
    #[serde(default)]
    pub jump: JumpSpec,
    /// Half width of the box; defaults to `rho` plus three cells, rounded up to the grid.
    #[serde(default)]
    pub half_width: Option<f64>,
    /// Tangential center of the profile.
    #[serde(default)]
    pub center: Option<Vec<f64>>,
}

impl FieldSpec {
    pub fn grid(&self, n: usize) -> Result<Grid> {
        let hw = match self.half_width {
            Some(v) => v,
            None => ((self.rho / self.h).ceil() + 3.0) * self.h,
        };
        Grid::new(n, hw, self.h)
    }
}

/// Tangential profile `b(x') = G(r) theta_0(3 r / (2 rho))`, `r = |x' - c'|`,
/// and its gradient.
fn profile(family: Family, rho: f64, center: &[f64], xp: &[f64]) -> (f64, Vec<f64>) {
    let d: Vec<f64> = xp.iter().zip(center).map(|(a, c)| a - c).collect();
    let r = d.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s = 1.5 / rho;
    let cut = bump(s * r);
    let dcut = bump_deriv(s * r, 1).expect("order 1") * s;
    let (gv, dg_over_r) = match family {
        Family::BumpPoly => (1.0, 0.0),
        Family::BumpGauss => {
            let w = rho / 3.0;
            let gv = (-r * r / (2.0 * w * w)).exp();
            (gv, -gv / (w * w))
        }
    };
    let b = gv * cut;
    let radial_over_r = if r > 0.0 { dg_over_r * cut + gv * dcut / r } else { 0.0 };
    (b, d.iter().map(|v| v * radial_over_r).collect())
}

/// `u_+- = chi(x_n) [c0 b + x_n w + c2 x_n^2 b]` with `w` chosen so that,
/// for the frozen matrices, `h0 = h0_amp b` and `h1 = h1_amp b`.
pub fn synthesize(spec: &FieldSpec, pair: &CoefficientPair) -> Result<GridField> {
    let n = pair.dim();
    if !(spec.rho > 0.0) {
        return Err(Error::InvalidParameter(format!("rho must be positive, got {}", spec.rho)));
    }
    let grid = spec.grid(n)?;
    if grid.half_width < spec.rho + 2.0 * grid.h {
        return Err(Error::InvalidParameter(format!(
            "box half width {} leaves fewer than two empty cells around rho = {}",
            grid.half_width, spec.rho
        )));
    }
    let center = spec.center.clone().unwrap_or_else(|| vec![0.0; n - 1]);
    if center.len() != n - 1 {
        return Err(Error::Dimension(format!("center must have length {}", n - 1)));
    }
    let rho = spec.rho;
    let c0 = [1.0, 1.0 + spec.jump.h0_amp];
    let flux = [1.0, 1.0 + spec.jump.h1_amp];
    let c2 = [0.5, -0.5];
    let family = spec.family;
    let make = |side: Side| {
        let k = side_slot(side);
        let a = pair.side(side);
        let ann = a.entry(n - 1, n - 1);
        let row: Vec<Complex64> = (0..n - 1).map(|j| a.entry(n - 1, j)).collect();
        let center = center.clone();
        move |x: &[f64]| -> Complex64 {
            let xn = x[n - 1];
            let chi = bump(1.5 * xn / rho);
            if chi == 0.0 {
                return Complex64::default();
            }
            let (b, db) = profile(family, rho, &center, &x[..n - 1]);
            let tang: Complex64 = row.iter().zip(&db).map(|(a, d)| a * d).sum();
            let w = (flux[k] * b - c0[k] * tang) / ann;
            chi * (c0[k] * b + xn * w + c2[k] * xn * xn * b)
        }
    };
    let mut field = GridField::from_fn(grid, rho, make(Side::Plus), make(Side::Minus));
    field.rho = rho;
    Ok(field)
}

/// Field supported in `x_n in (c - height, c + height)` away from the
/// interface, equal on both sides: `b(x') theta_0(3 (x_n - c) / (2 height))`.
pub fn synthesize_offset(grid: Grid, rho: f64, center_n: f64, height: f64, family: Family) -> Result<GridField> {
    if center_n.abs() <= height {
        return Err(Error::InvalidParameter("offset field would touch the interface".into()));
    }
    let n = grid.n;
    let zero = vec![0.0; n - 1];
    let f = move |x: &[f64]| {
        let v = bump(1.5 * (x[n - 1] - center_n) / height);
        if v == 0.0 {
            return Complex64::default();
        }
        Complex64::new(v * profile(family, rho, &zero, &x[..n - 1]).0, 0.0)
    };
    let mut field = GridField::from_fn(grid, rho.max(center_n.abs() + height), f.clone(), f);
    field.rho = rho.max(center_n.abs() + height);
    Ok(field)
}
