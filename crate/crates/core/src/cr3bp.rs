//! Circular restricted three-body problem in the barycentric rotating frame.
//!
//! Normalized units: the primaries sit on the x-axis at `-mu` and `1 - mu`,
//! their separation is 1 and the rotation rate is 1. A state is the position
//! and velocity of the massless third body.

use std::io::Write;

use thiserror::Error;

/// Distance below which a state is treated as coincident with a primary.
pub const SINGULARITY_RADIUS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Cr3bpError {
    #[error("mass parameter {0} outside (0, 0.5]")]
    InvalidMassParameter(f64),
    #[error("state coincides with primary m{body} (distance {distance:e})")]
    Singularity { body: u8, distance: f64 },
    #[error("non-finite state component")]
    NonFinite,
    #[error("invalid integration argument: {0}")]
    InvalidArgument(String),
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepUnderflow { t: f64, h: f64 },
    #[error("root finder failed to converge for {0:?}")]
    RootFinding(LibrationLabel),
}

/// `mu = m2 / (m1 + m2)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, serde::Serialize, serde::Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct MassParameter(f64);

impl MassParameter {
    /// Accepts `0 < mu <= 0.5`; the equal-mass boundary is allowed.
    pub fn new(mu: f64) -> Result<Self, Cr3bpError> {
        if mu.is_finite() && mu > 0.0 && mu <= 0.5 {
            Ok(Self(mu))
        } else {
            Err(Cr3bpError::InvalidMassParameter(mu))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// x-coordinates of the two primaries.
    pub fn primaries(self) -> (f64, f64) {
        (-self.0, 1.0 - self.0)
    }
}

impl TryFrom<f64> for MassParameter {
    type Error = Cr3bpError;
    fn try_from(mu: f64) -> Result<Self, Self::Error> {
        Self::new(mu)
    }
}

impl From<MassParameter> for f64 {
    fn from(mu: MassParameter) -> f64 {
        mu.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct State6 {
    pub r: [f64; 3],
    pub v: [f64; 3],
}

impl State6 {
    pub fn new(r: [f64; 3], v: [f64; 3]) -> Self {
        Self { r, v }
    }

    pub fn from_array(x: [f64; 6]) -> Self {
        Self { r: [x[0], x[1], x[2]], v: [x[3], x[4], x[5]] }
    }

    pub fn to_array(self) -> [f64; 6] {
        [self.r[0], self.r[1], self.r[2], self.v[0], self.v[1], self.v[2]]
    }

    pub fn is_finite(&self) -> bool {
        self.r.iter().chain(self.v.iter()).all(|c| c.is_finite())
    }

    /// The y-mirror of a state: `(x, -y, z, -vx, vy, -vz)`.
    ///
    /// Maps a solution at time `t` to a solution at time `-t`.
    pub fn mirrored(self) -> Self {
        Self { r: [self.r[0], -self.r[1], self.r[2]], v: [-self.v[0], self.v[1], -self.v[2]] }
    }
}

fn primary_distances(r: &[f64; 3], mu: MassParameter) -> Result<(f64, f64), Cr3bpError> {
    if !r.iter().all(|c| c.is_finite()) {
        return Err(Cr3bpError::NonFinite);
    }
    let mu = mu.0;
    let yz2 = r[1] * r[1] + r[2] * r[2];
    let r1 = ((r[0] + mu).powi(2) + yz2).sqrt();
    let r2 = ((r[0] - 1.0 + mu).powi(2) + yz2).sqrt();
    if r1 < SINGULARITY_RADIUS {
        return Err(Cr3bpError::Singularity { body: 1, distance: r1 });
    }
    if r2 < SINGULARITY_RADIUS {
        return Err(Cr3bpError::Singularity { body: 2, distance: r2 });
    }
    Ok((r1, r2))
}

/// Rotating-frame acceleration `(x'', y'', z'')`.
pub fn eom(state: &State6, mu: MassParameter) -> Result<[f64; 3], Cr3bpError> {
    let (r1, r2) = primary_distances(&state.r, mu)?;
    if !state.v.iter().all(|c| c.is_finite()) {
        return Err(Cr3bpError::NonFinite);
    }
    let m = mu.0;
    let [x, y, z] = state.r;
    let [vx, vy, _] = state.v;
    let a1 = (1.0 - m) / (r1 * r1 * r1);
    let a2 = m / (r2 * r2 * r2);
    Ok([-(a1 * (x + m) + a2 * (x - 1.0 + m)) + x + 2.0 * vy, -(a1 * y + a2 * y) + y - 2.0 * vx, -(a1 * z + a2 * z)])
}

/// First-order vector field `d/dt (r, v) = (v, eom)`.
pub fn vector_field(x: &[f64; 6], mu: MassParameter) -> Result<[f64; 6], Cr3bpError> {
    let s = State6::from_array(*x);
    let a = eom(&s, mu)?;
    Ok([x[3], x[4], x[5], a[0], a[1], a[2]])
}

/// Augmented potential `U = (x^2 + y^2)/2 + (1 - mu)/|r1| + mu/|r2|`.
pub fn augmented_potential(r: &[f64; 3], mu: MassParameter) -> Result<f64, Cr3bpError> {
    let (r1, r2) = primary_distances(r, mu)?;
    let m = mu.0;
    Ok(0.5 * (r[0] * r[0] + r[1] * r[1]) + (1.0 - m) / r1 + m / r2)
}

/// Jacobi constant `C = 2U - v.v`.
pub fn jacobi_constant(state: &State6, mu: MassParameter) -> Result<f64, Cr3bpError> {
    let u = augmented_potential(&state.r, mu)?;
    let v2: f64 = state.v.iter().map(|c| c * c).sum();
    Ok(2.0 * u - v2)
}

/// Central-difference Jacobian of the first-order vector field.
pub fn vector_field_jacobian(x: &[f64; 6], mu: MassParameter, h: f64) -> Result<[[f64; 6]; 6], Cr3bpError> {
    let mut jac = [[0.0; 6]; 6];
    for col in 0..6 {
        let mut xp = *x;
        let mut xm = *x;
        xp[col] += h;
        xm[col] -= h;
        let fp = vector_field(&xp, mu)?;
        let fm = vector_field(&xm, mu)?;
        for row in 0..6 {
            jac[row][col] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    Ok(jac)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum LibrationLabel {
    L1,
    L2,
    L3,
    L4,
    L5,
}

impl LibrationLabel {
    pub fn is_collinear(self) -> bool {
        matches!(self, Self::L1 | Self::L2 | Self::L3)
    }
}

impl std::str::FromStr for LibrationLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "L1" => Ok(Self::L1),
            "L2" => Ok(Self::L2),
            "L3" => Ok(Self::L3),
            "L4" => Ok(Self::L4),
            "L5" => Ok(Self::L5),
            other => Err(format!("unknown libration point {other:?}")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LibrationPoint {
    pub label: LibrationLabel,
    pub position: [f64; 3],
    pub jacobi: f64,
}

impl LibrationPoint {
    pub fn state(&self) -> State6 {
        State6::new(self.position, [0.0; 3])
    }
}

/// x-acceleration on the x-axis with zero velocity; its roots are L1-L3.
fn collinear_residual(x: f64, mu: f64) -> f64 {
    let d1 = x + mu;
    let d2 = x - 1.0 + mu;
    x - (1.0 - mu) * d1 / (d1.abs() * d1 * d1) - mu * d2 / (d2.abs() * d2 * d2)
}

/// Bisection to machine precision on a sign-changing bracket.
fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> Option<f64> {
    let mut f_lo = f(lo);
    let f_hi = f(hi);
    if f_lo == 0.0 {
        return Some(lo);
    }
    if f_hi == 0.0 {
        return Some(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return None;
    }
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Some(if f_lo.abs() < f(hi).abs() { lo } else { hi });
        }
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return Some(mid);
        }
        if f_mid.signum() == f_lo.signum() {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    None
}

/// The five equilibria, ordered L1..L5.
pub fn libration_points(mu: MassParameter) -> Result<Vec<LibrationPoint>, Cr3bpError> {
    let m = mu.0;
    let gap = 1e-9;
    let f = |x: f64| collinear_residual(x, m);
    let brackets = [
        (LibrationLabel::L1, -m + gap, 1.0 - m - gap),
        (LibrationLabel::L2, 1.0 - m + gap, 2.0),
        (LibrationLabel::L3, -2.0, -m - gap),
    ];
    let mut out = Vec::with_capacity(5);
    for (label, lo, hi) in brackets {
        let x = bisect(lo, hi, f).ok_or(Cr3bpError::RootFinding(label))?;
        let position = [x, 0.0, 0.0];
        let jacobi = jacobi_constant(&State6::new(position, [0.0; 3]), mu)?;
        out.push(LibrationPoint { label, position, jacobi });
    }
    let half_sqrt3 = 0.75f64.sqrt();
    for (label, y) in [(LibrationLabel::L4, half_sqrt3), (LibrationLabel::L5, -half_sqrt3)] {
        let position = [0.5 - m, y, 0.0];
        let jacobi = jacobi_constant(&State6::new(position, [0.0; 3]), mu)?;
        out.push(LibrationPoint { label, position, jacobi });
    }
    Ok(out)
}

pub fn libration_point(mu: MassParameter, label: LibrationLabel) -> Result<LibrationPoint, Cr3bpError> {
    let points = libration_points(mu)?;
    Ok(points.into_iter().find(|p| p.label == label).expect("all five labels present"))
}

#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Dormand-Prince 5(4) with local extrapolation.
    DormandPrince { rtol: f64, atol: f64 },
    /// Classical fixed-step RK4; the last step is shortened to land on `t_span`.
    Rk4 { step: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    pub method: Method,
    /// Output times in `[0, t_span]`. `None` records every accepted step.
    pub sample_times: Option<Vec<f64>>,
    pub max_steps: usize,
}

impl IntegrateOptions {
    pub fn adaptive(tol: f64) -> Self {
        Self { method: Method::DormandPrince { rtol: tol, atol: tol }, sample_times: None, max_steps: 10_000_000 }
    }

    pub fn with_samples(mut self, times: Vec<f64>) -> Self {
        self.sample_times = Some(times);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<(f64, State6)>,
}

impl Trajectory {
    pub fn last(&self) -> Option<&(f64, State6)> {
        self.samples.last()
    }

    /// `max |C(t) - C(0)|` over the samples.
    pub fn jacobi_drift(&self, mu: MassParameter) -> Result<f64, Cr3bpError> {
        let Some((_, s0)) = self.samples.first() else {
            return Ok(0.0);
        };
        let c0 = jacobi_constant(s0, mu)?;
        let mut worst = 0.0f64;
        for (_, s) in &self.samples {
            worst = worst.max((jacobi_constant(s, mu)? - c0).abs());
        }
        Ok(worst)
    }

    /// CSV with columns `t,x,y,z,vx,vy,vz,C`, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mu: MassParameter, mut out: W) -> std::io::Result<()> {
        writeln!(out, "t,x,y,z,vx,vy,vz,C")?;
        for (t, s) in &self.samples {
            let c = jacobi_constant(s, mu).unwrap_or(f64::NAN);
            let a = s.to_array();
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                t, a[0], a[1], a[2], a[3], a[4], a[5], c
            )?;
        }
        Ok(())
    }
}

/// Adaptive integration recording every accepted step.
pub fn integrate(state0: &State6, mu: MassParameter, t_span: f64, tol: f64) -> Result<Trajectory, Cr3bpError> {
    integrate_with(state0, mu, t_span, &IntegrateOptions::adaptive(tol))
}

// Dormand-Prince 5(4) tableau. The field is autonomous, so the nodes c_i are not needed.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b_hat
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type Vec6 = [f64; 6];

fn axpy(y: &Vec6, h: f64, terms: &[(f64, &Vec6)]) -> Vec6 {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..6 {
            out[i] += h * c * k[i];
        }
    }
    out
}

struct DpStep {
    y: Vec6,
    k7: Vec6,
    err: f64,
}

fn dp_step(y: &Vec6, k1: &Vec6, h: f64, mu: MassParameter, rtol: f64, atol: f64) -> Result<DpStep, Cr3bpError> {
    let f = |x: &Vec6| vector_field(x, mu);
    let k2 = f(&axpy(y, h, &[(A21, k1)]))?;
    let k3 = f(&axpy(y, h, &[(A31, k1), (A32, &k2)]))?;
    let k4 = f(&axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]))?;
    let k5 = f(&axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]))?;
    let k6 = f(&axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]))?;
    let y_new = axpy(y, h, &[(B1, k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
    let k7 = f(&y_new)?;
    let mut acc = 0.0;
    for i in 0..6 {
        let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        let scale = atol + rtol * y[i].abs().max(y_new[i].abs());
        acc += (e / scale).powi(2);
    }
    Ok(DpStep { y: y_new, k7, err: (acc / 6.0).sqrt() })
}

fn rk4_step(y: &Vec6, h: f64, mu: MassParameter) -> Result<Vec6, Cr3bpError> {
    let f = |x: &Vec6| vector_field(x, mu);
    let k1 = f(y)?;
    let k2 = f(&axpy(y, h, &[(0.5, &k1)]))?;
    let k3 = f(&axpy(y, h, &[(0.5, &k2)]))?;
    let k4 = f(&axpy(y, h, &[(1.0, &k3)]))?;
    Ok(axpy(y, h, &[(1.0 / 6.0, &k1), (1.0 / 3.0, &k2), (1.0 / 3.0, &k3), (1.0 / 6.0, &k4)]))
}

/// Integrates forward over `[0, t_span]`. With `sample_times`, steps are
/// clipped so that every requested time is hit exactly.
pub fn integrate_with(
    state0: &State6,
    mu: MassParameter,
    t_span: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory, Cr3bpError> {
    if !state0.is_finite() {
        return Err(Cr3bpError::NonFinite);
    }
    if !(t_span >= 0.0) || !t_span.is_finite() {
        return Err(Cr3bpError::InvalidArgument(format!("t_span = {t_span}")));
    }
    // Validates the initial state against the singularities.
    vector_field(&state0.to_array(), mu)?;

    let mut stops: Vec<f64> = match &opts.sample_times {
        Some(times) => {
            let mut t: Vec<f64> = times.clone();
            if t.iter().any(|s| !(0.0..=t_span).contains(s)) {
                return Err(Cr3bpError::InvalidArgument("sample time outside [0, t_span]".into()));
            }
            t.sort_by(f64::total_cmp);
            t.dedup();
            t
        }
        None => Vec::new(),
    };
    let record_all = opts.sample_times.is_none();
    if stops.last().copied() != Some(t_span) {
        stops.push(t_span);
    }
    let wants = |t: f64| -> bool { record_all || opts.sample_times.as_ref().is_some_and(|s| s.contains(&t)) };

    let mut traj = Trajectory::default();
    let mut t = 0.0;
    let mut y = state0.to_array();
    if wants(0.0) || t_span == 0.0 {
        traj.samples.push((0.0, *state0));
    }
    if t_span == 0.0 {
        return Ok(traj);
    }

    let mut steps = 0usize;
    let mut next_stop = 0usize;
    while stops[next_stop] <= t {
        next_stop += 1;
    }

    match opts.method {
        Method::Rk4 { step } => {
            if !(step > 0.0) {
                return Err(Cr3bpError::InvalidArgument(format!("rk4 step = {step}")));
            }
            while next_stop < stops.len() {
                let target = stops[next_stop];
                let h = step.min(target - t);
                y = rk4_step(&y, h, mu)?;
                t = if h == target - t { target } else { t + h };
                if t == target {
                    next_stop += 1;
                }
                if wants(t) {
                    traj.samples.push((t, State6::from_array(y)));
                }
                steps += 1;
                if steps > opts.max_steps {
                    return Err(Cr3bpError::StepUnderflow { t, h });
                }
            }
        }
        Method::DormandPrince { rtol, atol } => {
            if !(rtol > 0.0 && atol > 0.0) {
                return Err(Cr3bpError::InvalidArgument("tolerances must be positive".into()));
            }
            let mut k1 = vector_field(&y, mu)?;
            let mut h = (0.01 * t_span).min(1e-2);
            while next_stop < stops.len() {
                let target = stops[next_stop];
                let remaining = target - t;
                let clipped = h >= remaining;
                let h_try = if clipped { remaining } else { h };
                if h_try < 1e-15 * t.abs().max(1.0) && !clipped {
                    return Err(Cr3bpError::StepUnderflow { t, h: h_try });
                }
                let step = dp_step(&y, &k1, h_try, mu, rtol, atol);
                let (accepted, err) = match step {
                    Ok(s) if s.err <= 1.0 => {
                        y = s.y;
                        k1 = s.k7;
                        t = if clipped { target } else { t + h_try };
                        (true, s.err)
                    }
                    Ok(s) => (false, s.err),
                    // A trial stage landed on a primary; shrink and retry.
                    Err(Cr3bpError::Singularity { .. }) => (false, 1e6),
                    Err(e) => return Err(e),
                };
                let factor = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let h_new = h_try * if accepted { factor } else { factor.min(1.0) };
                if !accepted && h_new < 1e-15 * t.abs().max(1.0) {
                    return Err(Cr3bpError::StepUnderflow { t, h: h_new });
                }
                if accepted {
                    if t == target {
                        next_stop += 1;
                    }
                    if wants(t) {
                        traj.samples.push((t, State6::from_array(y)));
                    }
                    // Keep the unclipped step estimate when we only shortened to hit a stop.
                    h = if clipped { h.max(h_new) } else { h_new };
                } else {
                    h = h_new;
                }
                steps += 1;
                if steps > opts.max_steps {
                    return Err(Cr3bpError::StepUnderflow { t, h });
                }
            }
        }
    }
    Ok(traj)
}
