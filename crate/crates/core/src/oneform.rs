//! Discrete one-forms realizing the torus parameterization.
//!
//! A one-form stores one value per undirected edge `(a, b)`, `a < b`, read as
//! `x_a - x_b`; the reverse direction is the negation. The solved pair is
//! closed on every trivial basis cycle, has unit periods on the generators
//! (`u`: toroidal, `v`: poloidal), and is co-closed at every vertex.
//!
//! The constraints are enforced by exact elimination. The cycle rows
//! `C x = t` are solved in the minimum-norm sense through `C C^T y = t`, and
//! the exact part `d f` is then added to balance every vertex, which leaves all
//! cycle sums untouched:
//!
//! ```text
//! x = C^T y + d f,    (d^T W d) f = -d^T W C^T y
//! ```

use std::io::Write;

use log::debug;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cycles::ClassifiedBasis;
use crate::knn::NeighborGraph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OneFormError {
    #[error("edge weight {index} is {value}, weights must be positive")]
    InvalidWeight { index: usize, value: f64 },
    #[error("expected {expected} edge weights, got {found}")]
    WeightCount { expected: usize, found: usize },
    #[error("{system} solve stalled after {iterations} iterations at relative residual {residual:.3e}")]
    NoConvergence { system: &'static str, iterations: usize, residual: f64 },
    #[error("{which} residual {value:.3e} exceeds {limit:.3e}")]
    Residual { which: ResidualKind, value: f64, limit: f64, diagnostics: Box<Residuals> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ResidualKind {
    Coclosedness,
    TrivialClosedness,
    Period,
}

impl std::fmt::Display for ResidualKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Coclosedness => "co-closedness",
            Self::TrivialClosedness => "trivial-cycle closedness",
            Self::Period => "period",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WeightMode {
    Uniform,
    /// Default: uniform weights give twin vertices (adjacent, with the same
    /// other neighbors) identical coordinates.
    #[default]
    InverseLength,
}

/// Positive weight per undirected edge.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeWeights(Vec<f64>);

impl EdgeWeights {
    pub fn new(graph: &NeighborGraph, weights: Vec<f64>) -> Result<Self, OneFormError> {
        if weights.len() != graph.edge_count() {
            return Err(OneFormError::WeightCount { expected: graph.edge_count(), found: weights.len() });
        }
        if let Some((index, &value)) = weights.iter().enumerate().find(|(_, w)| !(**w > 0.0 && w.is_finite())) {
            return Err(OneFormError::InvalidWeight { index, value });
        }
        Ok(Self(weights))
    }

    pub fn from_mode(graph: &NeighborGraph, mode: WeightMode) -> Self {
        match mode {
            WeightMode::Uniform => Self(vec![1.0; graph.edge_count()]),
            WeightMode::InverseLength => Self(graph.edges().iter().map(|e| 1.0 / e.length).collect()),
        }
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

/// Which role a cycle row plays in the system.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CycleRow {
    Trivial,
    Toroidal,
    Poloidal,
}

/// The assembled linear system. Rows are the co-closedness equations (one per
/// vertex), the closedness equations of the trivial cycles and the two period
/// constraints; unknowns are the edge values.
#[derive(Debug, Clone)]
pub struct OneFormSystem {
    vertex_count: usize,
    edges: Vec<(u32, u32)>,
    weights: Vec<f64>,
    cycles: Vec<(CycleRow, Vec<(u32, f64)>)>,
}

pub fn assemble_system(graph: &NeighborGraph, basis: &ClassifiedBasis, weights: &EdgeWeights) -> OneFormSystem {
    let signed = |c: &crate::cycles::Cycle| c.signed_edges(graph).map(|(e, s)| (e as u32, s)).collect::<Vec<_>>();
    let mut cycles: Vec<(CycleRow, Vec<(u32, f64)>)> = basis.trivial.iter().map(|c| (CycleRow::Trivial, signed(c))).collect();
    cycles.push((CycleRow::Toroidal, signed(&basis.toroidal)));
    cycles.push((CycleRow::Poloidal, signed(&basis.poloidal)));
    OneFormSystem {
        vertex_count: graph.vertex_count(),
        edges: graph.edges().iter().map(|e| (e.a, e.b)).collect(),
        weights: weights.as_slice().to_vec(),
        cycles,
    }
}

/// Conjugate-gradient settings shared by both solves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_iterations: 50_000 }
    }
}

/// Acceptance gates on the solved forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ResidualGates {
    /// Relative to the median absolute edge value.
    pub coclosedness: f64,
    pub trivial_closedness: f64,
    pub period: f64,
}

impl Default for ResidualGates {
    fn default() -> Self {
        Self { coclosedness: 1e-6, trivial_closedness: 1e-6, period: 1e-6 }
    }
}

impl OneFormSystem {
    pub fn row_count(&self) -> usize {
        self.vertex_count + self.cycles.len()
    }

    pub fn unknown_count(&self) -> usize {
        self.edges.len()
    }

    /// Co-closedness row of vertex `v` as `(edge, coefficient)`.
    pub fn coclosedness_row(&self, v: usize) -> Vec<(usize, f64)> {
        self.edges
            .iter()
            .enumerate()
            .filter_map(|(e, &(a, b))| {
                if a as usize == v {
                    Some((e, self.weights[e]))
                } else if b as usize == v {
                    Some((e, -self.weights[e]))
                } else {
                    None
                }
            })
            .collect()
    }

    /// Cycle rows in order: trivial cycles, toroidal, poloidal.
    pub fn cycle_rows(&self) -> impl Iterator<Item = (CycleRow, &[(u32, f64)])> {
        self.cycles.iter().map(|(kind, row)| (*kind, row.as_slice()))
    }

    /// Right-hand side of the cycle rows for the given generator periods.
    fn targets(&self, toroidal: f64, poloidal: f64) -> Vec<f64> {
        self.cycles
            .iter()
            .map(|(kind, _)| match kind {
                CycleRow::Trivial => 0.0,
                CycleRow::Toroidal => toroidal,
                CycleRow::Poloidal => poloidal,
            })
            .collect()
    }

    fn cycle_apply_transpose(&self, y: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for ((_, row), &yi) in self.cycles.iter().zip(y) {
            for &(e, s) in row {
                out[e as usize] += s * yi;
            }
        }
    }

    fn cycle_apply(&self, x: &[f64], out: &mut [f64]) {
        for ((_, row), o) in self.cycles.iter().zip(out.iter_mut()) {
            *o = row.iter().map(|&(e, s)| s * x[e as usize]).sum();
        }
    }

    /// `d^T W x`: weighted imbalance at every vertex.
    fn divergence(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            let flow = self.weights[e] * x[e];
            out[a as usize] += flow;
            out[b as usize] -= flow;
        }
    }

    fn laplacian_apply(&self, f: &[f64], out: &mut [f64]) {
        out.iter_mut().for_each(|o| *o = 0.0);
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            let flow = self.weights[e] * (f[a as usize] - f[b as usize]);
            out[a as usize] += flow;
            out[b as usize] -= flow;
        }
    }

    /// Solves for a single form with the given generator periods. Zero periods
    /// give the zero form, the only solution of the homogeneous system.
    pub fn solve_for(&self, toroidal: f64, poloidal: f64, opts: &SolverOptions) -> Result<Vec<f64>, OneFormError> {
        let m = self.cycles.len();
        let e_count = self.edges.len();
        let n = self.vertex_count;
        let t = self.targets(toroidal, poloidal);

        let mut scratch = vec![0.0; e_count];
        let diag: Vec<f64> = self.cycles.iter().map(|(_, r)| r.len() as f64).collect();
        let (y, it1) = conjugate_gradient(
            |v, out| {
                self.cycle_apply_transpose(v, &mut scratch);
                self.cycle_apply(&scratch, out);
            },
            &diag,
            &t,
            false,
            opts,
            "cycle",
        )?;
        let mut x = vec![0.0; e_count];
        self.cycle_apply_transpose(&y, &mut x);
        debug_assert_eq!(y.len(), m);

        let mut rhs = vec![0.0; n];
        self.divergence(&x, &mut rhs);
        rhs.iter_mut().for_each(|r| *r = -*r);
        let mut degree = vec![0.0; n];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            degree[a as usize] += self.weights[e];
            degree[b as usize] += self.weights[e];
        }
        let (f, it2) = conjugate_gradient(|v, out| self.laplacian_apply(v, out), &degree, &rhs, true, opts, "laplacian")?;
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            x[e] += f[a as usize] - f[b as usize];
        }
        debug!("one-form solve: {it1} cycle iterations, {it2} laplacian iterations");
        Ok(x)
    }

    /// Residual diagnostics of a solved pair.
    pub fn residuals(&self, du: &[f64], dv: &[f64]) -> Residuals {
        let n = self.vertex_count;
        let mut total_weight = vec![0.0; n];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            total_weight[a as usize] += self.weights[e];
            total_weight[b as usize] += self.weights[e];
        }
        let rms = |x: &[f64]| {
            let mut div = vec![0.0; n];
            self.divergence(x, &mut div);
            let sum: f64 = div.iter().zip(&total_weight).map(|(d, w)| (d / w).powi(2)).sum();
            (sum / n as f64).sqrt()
        };
        let median_abs = |x: &[f64]| {
            let mut a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
            a.sort_by(f64::total_cmp);
            a.get(a.len() / 2).copied().unwrap_or(0.0)
        };
        let mut sums_u = vec![0.0; self.cycles.len()];
        let mut sums_v = vec![0.0; self.cycles.len()];
        self.cycle_apply(du, &mut sums_u);
        self.cycle_apply(dv, &mut sums_v);
        let mut max_trivial: f64 = 0.0;
        let mut period = [[0.0; 2]; 2];
        for (i, (kind, _)) in self.cycles.iter().enumerate() {
            match kind {
                CycleRow::Trivial => max_trivial = max_trivial.max(sums_u[i].abs()).max(sums_v[i].abs()),
                CycleRow::Toroidal => {
                    period[0][0] = sums_u[i];
                    period[1][0] = sums_v[i];
                }
                CycleRow::Poloidal => {
                    period[0][1] = sums_u[i];
                    period[1][1] = sums_v[i];
                }
            }
        }
        let period_error = (0..2)
            .flat_map(|r| (0..2).map(move |c| (r, c)))
            .map(|(r, c)| (period[r][c] - if r == c { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max);
        Residuals {
            coclosedness_rms: [rms(du), rms(dv)],
            coclosedness_scale: [median_abs(du), median_abs(dv)],
            max_trivial_closedness: max_trivial,
            period_matrix: period,
            period_error,
        }
    }
}

/// Residual diagnostics. `period_matrix[form][generator]` with forms
/// `(u, v)` and generators `(toroidal, poloidal)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Residuals {
    pub coclosedness_rms: [f64; 2],
    pub coclosedness_scale: [f64; 2],
    pub max_trivial_closedness: f64,
    pub period_matrix: [[f64; 2]; 2],
    pub period_error: f64,
}

impl Residuals {
    /// First gate that fails, if any.
    pub fn check(&self, gates: &ResidualGates) -> Result<(), OneFormError> {
        for i in 0..2 {
            let limit = gates.coclosedness * self.coclosedness_scale[i];
            if !(self.coclosedness_rms[i] <= limit) {
                return Err(self.fail(ResidualKind::Coclosedness, self.coclosedness_rms[i], limit));
            }
        }
        if !(self.max_trivial_closedness <= gates.trivial_closedness) {
            return Err(self.fail(ResidualKind::TrivialClosedness, self.max_trivial_closedness, gates.trivial_closedness));
        }
        if !(self.period_error <= gates.period) {
            return Err(self.fail(ResidualKind::Period, self.period_error, gates.period));
        }
        Ok(())
    }

    fn fail(&self, which: ResidualKind, value: f64, limit: f64) -> OneFormError {
        OneFormError::Residual { which, value, limit, diagnostics: Box::new(self.clone()) }
    }

    pub fn write_json<W: Write>(&self, out: W) -> serde_json::Result<()> {
        serde_json::to_writer_pretty(out, self)
    }
}

/// The parameterization differentials.
#[derive(Debug, Clone, PartialEq)]
pub struct OneFormPair {
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
    pub residuals: Residuals,
}

impl OneFormPair {
    /// `(x_a - x_b)` for both forms along the directed edge `a -> b`.
    pub fn along(&self, graph: &NeighborGraph, a: usize, b: usize) -> Option<(f64, f64)> {
        let e = graph.find_edge(a, b)?;
        let s = if a < b { 1.0 } else { -1.0 };
        Some((s * self.du[e], s * self.dv[e]))
    }
}

/// Solves both forms and applies the residual gates.
pub fn solve_oneforms(system: &OneFormSystem) -> Result<OneFormPair, OneFormError> {
    solve_oneforms_with(system, &SolverOptions::default(), &ResidualGates::default())
}

pub fn solve_oneforms_with(
    system: &OneFormSystem,
    opts: &SolverOptions,
    gates: &ResidualGates,
) -> Result<OneFormPair, OneFormError> {
    let pair = solve_oneforms_unchecked(system, opts)?;
    pair.residuals.check(gates)?;
    Ok(pair)
}

/// Solves both forms without applying the gates.
pub fn solve_oneforms_unchecked(system: &OneFormSystem, opts: &SolverOptions) -> Result<OneFormPair, OneFormError> {
    let du = system.solve_for(1.0, 0.0, opts)?;
    let dv = system.solve_for(0.0, 1.0, opts)?;
    let residuals = system.residuals(&du, &dv);
    Ok(OneFormPair { du, dv, residuals })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn remove_mean(v: &mut [f64]) {
    let mean = v.iter().sum::<f64>() / v.len() as f64;
    v.iter_mut().for_each(|x| *x -= mean);
}

/// Jacobi-preconditioned conjugate gradient. With `singular`, the system is
/// taken to have the constants as kernel and iterates are kept mean-free.
fn conjugate_gradient(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    diag: &[f64],
    b: &[f64],
    singular: bool,
    opts: &SolverOptions,
    system: &'static str,
) -> Result<(Vec<f64>, usize), OneFormError> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    if singular {
        remove_mean(&mut r);
    }
    let b_norm = dot(&r, &r).sqrt();
    if b_norm == 0.0 {
        return Ok((x, 0));
    }
    let inv: Vec<f64> = diag.iter().map(|d| if *d > 0.0 { 1.0 / d } else { 1.0 }).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv).map(|(r, i)| r * i).collect();
    if singular {
        remove_mean(&mut z);
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    for it in 1..=opts.max_iterations {
        apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let res = dot(&r, &r).sqrt() / b_norm;
        if res <= opts.tolerance {
            if singular {
                remove_mean(&mut x);
            }
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] * inv[i];
        }
        if singular {
            remove_mean(&mut z);
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let residual = dot(&r, &r).sqrt() / b_norm;
    Err(OneFormError::NoConvergence { system, iterations: opts.max_iterations, residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cycles::{ClassifiedBasis, Cycle};
    use crate::knn::Edge;

    /// Square with a diagonal plus a pendant triangle: three independent cycles.
    fn toy() -> (NeighborGraph, ClassifiedBasis) {
        let pairs = [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2), (3, 4), (2, 4)];
        let edges = pairs.iter().map(|&(a, b)| Edge { a, b, length: 1.0 + 0.1 * a as f64 }).collect();
        let g = NeighborGraph::from_edges(5, edges, 0).unwrap();
        let c = |w: &[u32]| Cycle::from_vertices(&g, w).unwrap();
        let basis = ClassifiedBasis { trivial: vec![c(&[0, 1, 2])], toroidal: c(&[0, 2, 3]), poloidal: c(&[2, 3, 4]) };
        (g, basis)
    }

    #[test]
    fn counts_and_row_signs() {
        let (g, b) = toy();
        let sys = assemble_system(&g, &b, &EdgeWeights::from_mode(&g, WeightMode::Uniform));
        assert_eq!(sys.row_count(), 5 + 3);
        assert_eq!(sys.unknown_count(), 7);
        let row = sys.coclosedness_row(2);
        // Edges sort as (0,1) (0,2) (0,3) (1,2) (2,3) (2,4) (3,4); vertex 2 is
        // the larger endpoint of (0,2), (1,2) and the smaller of (2,3), (2,4).
        assert_eq!(row, vec![(1, -1.0), (3, -1.0), (4, 1.0), (5, 1.0)]);
    }

    #[test]
    fn constraints_hold_exactly() {
        let (g, b) = toy();
        let sys = assemble_system(&g, &b, &EdgeWeights::from_mode(&g, WeightMode::InverseLength));
        let pair = solve_oneforms(&sys).unwrap();
        let r = &pair.residuals;
        assert!(r.max_trivial_closedness < 1e-9);
        assert!(r.period_error < 1e-9, "{r:?}");
    }

    #[test]
    fn homogeneous_system_gives_zero() {
        let (g, b) = toy();
        let sys = assemble_system(&g, &b, &EdgeWeights::from_mode(&g, WeightMode::Uniform));
        let x = sys.solve_for(0.0, 0.0, &SolverOptions::default()).unwrap();
        assert!(x.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn weight_scaling_leaves_solution_unchanged() {
        let (g, b) = toy();
        let w1 = EdgeWeights::from_mode(&g, WeightMode::InverseLength);
        let w2 = EdgeWeights::new(&g, w1.as_slice().iter().map(|w| 7.5 * w).collect()).unwrap();
        let p1 = solve_oneforms(&assemble_system(&g, &b, &w1)).unwrap();
        let p2 = solve_oneforms(&assemble_system(&g, &b, &w2)).unwrap();
        for (a, b) in p1.du.iter().zip(&p2.du) {
            assert!((a - b).abs() < 1e-9);
        }
    }

    #[test]
    fn bad_weights_rejected() {
        let (g, _) = toy();
        assert!(matches!(EdgeWeights::new(&g, vec![1.0; 6]), Err(OneFormError::WeightCount { .. })));
        let mut w = vec![1.0; 7];
        w[3] = 0.0;
        assert!(matches!(EdgeWeights::new(&g, w), Err(OneFormError::InvalidWeight { index: 3, .. })));
    }
}
