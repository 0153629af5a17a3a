//! Point-cloud generators for 2-tori in 3D, 4D and 6D.
//!
//! * [`sample_torus_revolution`]: torus of revolution in 3D.
//! * [`sample_standard_map_torus`]: product of two Chirikov standard maps,
//!   embedded by angles on the Clifford torus in 4D.
//! * [`sample_center_manifold_torus`]: the linearized center manifold of a
//!   collinear libration point, an exact flat 2-torus in 6D phase space.

use std::f64::consts::TAU;

use nalgebra::{Complex, DMatrix, Matrix6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cloud::{CloudError, PointCloud, Provenance};
use crate::cr3bp::{self, Cr3bpError, LibrationLabel, LibrationPoint, MassParameter, State6};

#[derive(Debug, Error)]
pub enum SamplerError {
    #[error("invalid torus radii R={major}, r={minor} (need R > r > 0)")]
    InvalidRadii { major: f64, minor: f64 },
    #[error("invalid sampler parameter: {0}")]
    InvalidParameter(String),
    #[error("center manifold needs a collinear point, got {0:?}")]
    NotCollinear(LibrationLabel),
    #[error("expected two center eigenvalue pairs, found {0}")]
    CenterPairs(usize),
    #[error("eigen-decomposition failed: {0}")]
    Eigen(String),
    #[error(transparent)]
    Dynamics(#[from] Cr3bpError),
    #[error(transparent)]
    Cloud(#[from] CloudError),
}

/// Angle pairs on a jittered grid of `n` points. Rings of constant second
/// angle are spaced so that cells are square when the two circumferences
/// have ratio `second / first = ratio`.
pub fn jittered_angle_grid(n: usize, ratio: f64, jitter: f64, rng: &mut impl Rng) -> Vec<(f64, f64)> {
    let rings = ((n as f64 * ratio).sqrt().round() as usize).clamp(3, n / 3);
    let base = n / rings;
    let extra = n % rings;
    let mut out = Vec::with_capacity(n);
    for ring in 0..rings {
        let count = base + usize::from(ring < extra);
        let offset: f64 = rng.gen();
        for i in 0..count {
            let du: f64 = rng.gen_range(-0.5..0.5);
            let dv: f64 = rng.gen_range(-0.5..0.5);
            let a = TAU * (i as f64 + offset + jitter * du) / count as f64;
            let b = TAU * (ring as f64 + 0.5 + jitter * dv) / rings as f64;
            out.push((a.rem_euclid(TAU), b.rem_euclid(TAU)));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TorusSampling {
    pub major_radius: f64,
    pub minor_radius: f64,
    pub n: usize,
    pub seed: u64,
    /// Fraction of a grid cell; 0 gives a regular grid with random ring offsets.
    #[serde(default = "default_jitter")]
    pub jitter: f64,
}

fn default_jitter() -> f64 {
    0.6
}

pub fn sample_torus_revolution(major: f64, minor: f64, n: usize, seed: u64) -> Result<PointCloud, SamplerError> {
    sample_torus_revolution_with(&TorusSampling { major_radius: major, minor_radius: minor, n, seed, jitter: default_jitter() })
}

pub fn sample_torus_revolution_with(cfg: &TorusSampling) -> Result<PointCloud, SamplerError> {
    let (big, small) = (cfg.major_radius, cfg.minor_radius);
    if !(big.is_finite() && small > 0.0 && big > small) {
        return Err(SamplerError::InvalidRadii { major: big, minor: small });
    }
    if cfg.n < 16 {
        return Err(SamplerError::InvalidParameter(format!("n = {} < 16", cfg.n)));
    }
    if !(0.0..1.0).contains(&cfg.jitter) {
        return Err(SamplerError::InvalidParameter(format!("jitter = {}", cfg.jitter)));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let points = jittered_angle_grid(cfg.n, small / big, cfg.jitter, &mut rng)
        .into_iter()
        .map(|(u, v)| {
            let ring = big + small * v.cos();
            vec![ring * u.cos(), ring * u.sin(), small * v.sin()]
        })
        .collect();
    Ok(PointCloud::new(3, points, Provenance::Synthetic)?)
}

/// Two uncoupled standard maps `p' = p + K sin(theta)`, `theta' = theta + p'`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(default)]
pub struct StandardMapConfig {
    pub k1: f64,
    pub k2: f64,
    pub theta1: f64,
    pub p1: f64,
    pub theta2: f64,
    pub p2: f64,
    pub n: usize,
}

impl Default for StandardMapConfig {
    /// Momenta give rotation numbers close to the inverse plastic number and
    /// its square, a well-spread pair for 2D Kronecker sequences.
    fn default() -> Self {
        Self {
            k1: 0.3,
            k2: 0.3,
            theta1: 0.5,
            p1: TAU * 0.754_877_666_246_692_7,
            theta2: 1.5,
            p2: TAU * 0.569_840_290_998_053_2,
            n: 4000,
        }
    }
}

impl StandardMapConfig {
    pub fn validate(&self) -> Result<(), SamplerError> {
        if !(self.k1 >= 0.0 && self.k2 >= 0.0) {
            return Err(SamplerError::InvalidParameter(format!("K1={}, K2={}", self.k1, self.k2)));
        }
        if ![self.theta1, self.p1, self.theta2, self.p2, self.k1, self.k2].iter().all(|v| v.is_finite()) {
            return Err(SamplerError::InvalidParameter("non-finite standard map seed".into()));
        }
        if self.n < crate::cloud::MIN_POINTS {
            return Err(SamplerError::InvalidParameter(format!("n = {}", self.n)));
        }
        Ok(())
    }
}

/// The raw iterates `(theta1, p1, theta2, p2)`, all reduced mod 2pi. The
/// initial condition is the first entry.
pub fn standard_map_orbit(cfg: &StandardMapConfig) -> Vec<[f64; 4]> {
    let mut s = [cfg.theta1.rem_euclid(TAU), cfg.p1.rem_euclid(TAU), cfg.theta2.rem_euclid(TAU), cfg.p2.rem_euclid(TAU)];
    let mut out = Vec::with_capacity(cfg.n);
    for _ in 0..cfg.n {
        out.push(s);
        for (theta, p, k) in [(0, 1, cfg.k1), (2, 3, cfg.k2)] {
            s[p] = (s[p] + k * s[theta].sin()).rem_euclid(TAU);
            s[theta] = (s[theta] + s[p]).rem_euclid(TAU);
        }
    }
    out
}

pub fn sample_standard_map_torus(cfg: &StandardMapConfig) -> Result<PointCloud, SamplerError> {
    cfg.validate()?;
    let points = standard_map_orbit(cfg).into_iter().map(|[t1, _, t2, _]| vec![t1.cos(), t1.sin(), t2.cos(), t2.sin()]).collect();
    Ok(PointCloud::new(4, points, Provenance::StandardMap)?)
}

/// One center mode: `omega` and a complex eigenvector normalized to unit
/// position norm with its dominant position component real and positive.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterMode {
    pub omega: f64,
    pub vector: [Complex<f64>; 6],
}

impl CenterMode {
    fn real_part(&self, amplitude: f64, phase: f64) -> [f64; 6] {
        let rot = Complex::from_polar(amplitude, phase);
        let mut out = [0.0; 6];
        for (o, u) in out.iter_mut().zip(&self.vector) {
            *o = (rot * u).re;
        }
        out
    }
}

/// Linear quasi-periodic motion about a collinear libration point:
/// `x = x_L + Re(A e^{i phase_p} u_p) + Re(B e^{i phase_v} u_v)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterManifoldTorus {
    pub mu: MassParameter,
    pub point: LibrationPoint,
    pub jacobian: [[f64; 6]; 6],
    pub planar: CenterMode,
    pub vertical: CenterMode,
    pub amp_planar: f64,
    pub amp_vertical: f64,
}

const JACOBIAN_STEP: f64 = 1e-6;

impl CenterManifoldTorus {
    pub fn new(mu: MassParameter, point: LibrationPoint, amp_planar: f64, amp_vertical: f64) -> Result<Self, SamplerError> {
        if !point.label.is_collinear() {
            return Err(SamplerError::NotCollinear(point.label));
        }
        if !(amp_planar > 0.0 && amp_vertical >= 0.0 && amp_planar.is_finite() && amp_vertical.is_finite()) {
            return Err(SamplerError::InvalidParameter(format!("amplitudes ({amp_planar}, {amp_vertical})")));
        }
        let x0 = point.state().to_array();
        let jacobian = cr3bp::vector_field_jacobian(&x0, mu, JACOBIAN_STEP)?;
        let modes = center_modes(&jacobian)?;
        let (planar, vertical) = split_modes(modes)?;
        Ok(Self { mu, point, jacobian, planar, vertical, amp_planar, amp_vertical })
    }

    /// Replaces the two frequencies while keeping the mode shapes. Used to
    /// force commensurate motion; the result no longer solves the linear flow.
    pub fn with_frequencies(mut self, omega_planar: f64, omega_vertical: f64) -> Self {
        self.planar.omega = omega_planar;
        self.vertical.omega = omega_vertical;
        self
    }

    pub fn state_at_phases(&self, phase_planar: f64, phase_vertical: f64) -> [f64; 6] {
        let mut x = self.point.state().to_array();
        let p = self.planar.real_part(self.amp_planar, phase_planar);
        let v = self.vertical.real_part(self.amp_vertical, phase_vertical);
        for i in 0..6 {
            x[i] += p[i] + v[i];
        }
        x
    }

    pub fn state_at(&self, t: f64) -> [f64; 6] {
        self.state_at_phases(self.planar.omega * t, self.vertical.omega * t)
    }

    /// `J (x - x_L)`, the linearized vector field.
    pub fn linear_derivative(&self, x: &[f64; 6]) -> [f64; 6] {
        let x0 = self.point.state().to_array();
        let mut out = [0.0; 6];
        for (row, o) in out.iter_mut().enumerate() {
            *o = (0..6).map(|c| self.jacobian[row][c] * (x[c] - x0[c])).sum();
        }
        out
    }

    /// Arc length of one full period of each mode in the 6D embedding.
    pub fn circumferences(&self) -> (f64, f64) {
        let arc = |mode: &CenterMode, amp: f64| {
            let steps = 512;
            let mut prev = mode.real_part(amp, 0.0);
            let mut total = 0.0;
            for s in 1..=steps {
                let cur = mode.real_part(amp, TAU * s as f64 / steps as f64);
                total += crate::cloud::sq_dist(&prev, &cur).sqrt();
                prev = cur;
            }
            total
        };
        (arc(&self.planar, self.amp_planar), arc(&self.vertical, self.amp_vertical))
    }
}

fn center_modes(jac: &[[f64; 6]; 6]) -> Result<Vec<CenterMode>, SamplerError> {
    let m = Matrix6::from_fn(|r, c| jac[r][c]);
    let eigenvalues = m.complex_eigenvalues();
    let scale = m.norm();
    let mut omegas: Vec<f64> =
        eigenvalues.iter().filter(|l| l.im > 0.0 && l.re.abs() <= 1e-6 * scale.max(1.0)).map(|l| l.im).collect();
    if omegas.iter().any(|w| !w.is_finite()) {
        return Err(SamplerError::Eigen("non-finite eigenvalue".into()));
    }
    omegas.sort_by(f64::total_cmp);
    omegas
        .into_iter()
        .map(|omega| {
            let shifted = DMatrix::from_fn(6, 6, |r, c| {
                Complex::new(jac[r][c], 0.0) - if r == c { Complex::new(0.0, omega) } else { Complex::new(0.0, 0.0) }
            });
            let svd = shifted.svd(false, true);
            let v_t = svd.v_t.ok_or_else(|| SamplerError::Eigen("missing right singular vectors".into()))?;
            let (min_idx, _) =
                svd.singular_values.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).expect("six singular values");
            let mut vector = [Complex::new(0.0, 0.0); 6];
            for (i, v) in vector.iter_mut().enumerate() {
                *v = v_t[(min_idx, i)].conj();
            }
            normalize_mode(&mut vector);
            Ok(CenterMode { omega, vector })
        })
        .collect()
}

fn normalize_mode(u: &mut [Complex<f64>; 6]) {
    let pos_norm = u[..3].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    let dominant = (0..3).max_by(|&a, &b| u[a].norm().total_cmp(&u[b].norm())).unwrap_or(0);
    let phase = Complex::from_polar(1.0, -u[dominant].arg());
    let largest = u.iter().map(|c| c.norm()).fold(0.0, f64::max) / pos_norm;
    for c in u.iter_mut() {
        *c = *c * phase / pos_norm;
        // Decoupled components come back as SVD round-off; make them exact zeros.
        if c.norm() < 1e-12 * largest {
            *c = Complex::new(0.0, 0.0);
        }
    }
}

fn split_modes(modes: Vec<CenterMode>) -> Result<(CenterMode, CenterMode), SamplerError> {
    if modes.len() != 2 {
        return Err(SamplerError::CenterPairs(modes.len()));
    }
    let vertical_weight = |m: &CenterMode| m.vector[2].norm_sqr() + m.vector[5].norm_sqr();
    let mut modes = modes;
    modes.sort_by(|a, b| vertical_weight(a).total_cmp(&vertical_weight(b)));
    let vertical = modes.pop().expect("two modes");
    let planar = modes.pop().expect("two modes");
    Ok((planar, vertical))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CenterManifoldSampling {
    /// Jittered grid over the two phases, spaced by the mode circumferences.
    PhaseGrid { seed: u64, jitter: f64 },
    /// One trajectory sampled every `dt` from `t = 0`.
    Trajectory { dt: f64 },
}

impl Default for CenterManifoldSampling {
    fn default() -> Self {
        Self::PhaseGrid { seed: 0, jitter: default_jitter() }
    }
}

pub fn sample_center_manifold_torus(
    mu: MassParameter,
    point: &LibrationPoint,
    amp_planar: f64,
    amp_vertical: f64,
    n: usize,
) -> Result<PointCloud, SamplerError> {
    let torus = CenterManifoldTorus::new(mu, *point, amp_planar, amp_vertical)?;
    sample_center_manifold_with(&torus, n, CenterManifoldSampling::default())
}

pub fn sample_center_manifold_with(
    torus: &CenterManifoldTorus,
    n: usize,
    sampling: CenterManifoldSampling,
) -> Result<PointCloud, SamplerError> {
    if n < crate::cloud::MIN_POINTS {
        return Err(SamplerError::InvalidParameter(format!("n = {n}")));
    }
    let points: Vec<Vec<f64>> = match sampling {
        CenterManifoldSampling::PhaseGrid { seed, jitter } => {
            if !(0.0..1.0).contains(&jitter) {
                return Err(SamplerError::InvalidParameter(format!("jitter = {jitter}")));
            }
            let (c_planar, c_vertical) = torus.circumferences();
            // A vanishing mode still needs a finite ratio; the cloud then lies on a curve.
            let ratio = if c_vertical > 0.0 { c_vertical / c_planar } else { 1.0 };
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            jittered_angle_grid(n, ratio, jitter, &mut rng)
                .into_iter()
                .map(|(a, b)| torus.state_at_phases(a, b).to_vec())
                .collect()
        }
        CenterManifoldSampling::Trajectory { dt } => {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(SamplerError::InvalidParameter(format!("dt = {dt}")));
            }
            (0..n).map(|k| torus.state_at(k as f64 * dt).to_vec()).collect()
        }
    };
    let (cloud, removed) = PointCloud::new_dedup(6, points, Provenance::Cr3bpLinear)?;
    if removed > 0 {
        log::warn!("center manifold sampler produced {removed} duplicate point(s)");
    }
    Ok(cloud)
}

/// Samples the nonlinear flow from `state0` every `dt` for `n` samples.
pub fn sample_integrated_trajectory(
    mu: MassParameter,
    state0: &State6,
    dt: f64,
    n: usize,
    tol: f64,
) -> Result<PointCloud, SamplerError> {
    if !(dt > 0.0) || n < crate::cloud::MIN_POINTS {
        return Err(SamplerError::InvalidParameter(format!("dt = {dt}, n = {n}")));
    }
    let times: Vec<f64> = (0..n).map(|k| k as f64 * dt).collect();
    let t_end = times[n - 1];
    let opts = cr3bp::IntegrateOptions::adaptive(tol).with_samples(times);
    let traj = cr3bp::integrate_with(state0, mu, t_end, &opts)?;
    let points = traj.samples.iter().map(|(_, s)| s.to_array().to_vec()).collect();
    let (cloud, _) = PointCloud::new_dedup(6, points, Provenance::Cr3bpIntegrated)?;
    Ok(cloud)
}
