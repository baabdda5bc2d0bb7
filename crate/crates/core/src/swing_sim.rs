//! Linearized swing dynamics around the synchronous operating point.
//!
//! Phase deviations obey `Δδ̈ = −γ Δδ̇ − P Δδ + u(t)`, where `u` is a
//! rectangular acceleration pulse applied to one generator. A mode of `P`
//! with eigenvalue `α > 0` is a damped oscillator, one with `α < 0` grows
//! exponentially, and the all-ones mode only drifts. Integration is
//! fixed-step classical Runge-Kutta.

use thiserror::Error;

use crate::coupling::CouplingMatrix;

/// State magnitude treated as divergence.
pub const OVERFLOW_LIMIT: f64 = 1e12;

/// Decay threshold relative to the post-pulse peak.
pub const DECAY_FRACTION: f64 = 0.01;

/// Fraction of the run, counted from the end, inspected by the detector.
pub const TAIL_FRACTION: f64 = 0.25;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    BadConfig(String),
    #[error("pulse target {0} is not a generator")]
    BadTarget(usize),
    #[error("ripple window starting at {0} s holds fewer than two samples")]
    EmptyWindow(f64),
    #[error("ripple window starts at {start} s, before the pulse ends at {pulse_end} s")]
    WindowBeforePulseEnd { start: f64, pulse_end: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub target: usize,
    /// Per-unit acceleration while the pulse is on.
    pub magnitude: f64,
    pub t_on: f64,
    pub t_off: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub gamma: f64,
    pub dt: f64,
    pub t_end: f64,
    pub pulse: Pulse,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            gamma: 0.2,
            dt: 1e-3,
            t_end: 13.0,
            pulse: Pulse {
                target: 0,
                magnitude: 1.0,
                t_on: 3.0,
                t_off: 3.1,
            },
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |m: &str| Err(SimError::BadConfig(m.to_string()));
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return bad("dt must be positive");
        }
        if !self.gamma.is_finite() || self.gamma < 0.0 {
            return bad("gamma must be finite and non-negative");
        }
        if !self.pulse.magnitude.is_finite() {
            return bad("pulse magnitude must be finite");
        }
        let p = &self.pulse;
        if !(p.t_on < p.t_off && p.t_off <= self.t_end) || p.t_on < 0.0 {
            return bad("need 0 <= t_on < t_off <= t_end");
        }
        Ok(())
    }

    fn pulse_active(&self, t: f64) -> bool {
        // slack absorbs the rounding of i·dt at grid-aligned pulse edges
        let eps = 1e-9 * self.dt;
        t >= self.pulse.t_on - eps && t < self.pulse.t_off - eps
    }
}

/// Sampled response on the uniform grid `t_i = i·dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub n: usize,
    pub config: SimConfig,
    pub times: Vec<f64>,
    /// Phase deviation per sample, one entry per generator.
    pub delta: Vec<Vec<f64>>,
    /// Velocity deviation.
    pub omega: Vec<Vec<f64>>,
    /// Acceleration: the right-hand side evaluated on the stored state.
    pub accel: Vec<Vec<f64>>,
    /// Time at which the state first exceeded [`OVERFLOW_LIMIT`]; the
    /// trajectory stops there.
    pub diverged_at: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Response {
    Decayed,
    Oscillating,
    Diverged,
}

impl Response {
    pub fn as_str(&self) -> &'static str {
        match self {
            Response::Decayed => "Decayed",
            Response::Oscillating => "Oscillating",
            Response::Diverged => "Diverged",
        }
    }
}

/// Classical fourth-order Runge-Kutta step for `y' = f(y)`.
fn rk4_step(y: &[f64], h: f64, f: impl Fn(&[f64], &mut [f64])) -> Vec<f64> {
    let m = y.len();
    let mut k1 = vec![0.0; m];
    let mut k2 = vec![0.0; m];
    let mut k3 = vec![0.0; m];
    let mut k4 = vec![0.0; m];
    let mut tmp = vec![0.0; m];
    f(y, &mut k1);
    for i in 0..m {
        tmp[i] = y[i] + 0.5 * h * k1[i];
    }
    f(&tmp, &mut k2);
    for i in 0..m {
        tmp[i] = y[i] + 0.5 * h * k2[i];
    }
    f(&tmp, &mut k3);
    for i in 0..m {
        tmp[i] = y[i] + h * k3[i];
    }
    f(&tmp, &mut k4);
    (0..m)
        .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// `[Δδ, Δω]` → `[Δω, Δω̇]`.
fn swing_rhs(p: &CouplingMatrix, gamma: f64, forcing: &[f64], y: &[f64], out: &mut [f64]) {
    let n = p.n();
    let (delta, omega) = y.split_at(n);
    out[..n].copy_from_slice(omega);
    let coupling = p.matrix.mul_vec(delta);
    for i in 0..n {
        out[n + i] = -gamma * omega[i] - coupling[i] + forcing[i];
    }
}

pub fn simulate(p: &CouplingMatrix, cfg: &SimConfig) -> Result<Trajectory, SimError> {
    simulate_from(p, cfg, &vec![0.0; 2 * p.n()])
}

/// Like [`simulate`], starting from `initial = [Δδ, Δω]`.
pub fn simulate_from(p: &CouplingMatrix, cfg: &SimConfig, initial: &[f64]) -> Result<Trajectory, SimError> {
    cfg.validate()?;
    let n = p.n();
    if cfg.pulse.target >= n {
        return Err(SimError::BadTarget(cfg.pulse.target));
    }
    if initial.len() != 2 * n {
        return Err(SimError::BadConfig(format!(
            "initial state has {} entries, expected {}",
            initial.len(),
            2 * n
        )));
    }
    let steps = (cfg.t_end / cfg.dt).round() as usize;
    let forcing_at = |t: f64| {
        let mut u = vec![0.0; n];
        if cfg.pulse_active(t) {
            u[cfg.pulse.target] = cfg.pulse.magnitude;
        }
        u
    };

    let mut traj = Trajectory {
        n,
        config: *cfg,
        times: Vec::with_capacity(steps + 1),
        delta: Vec::with_capacity(steps + 1),
        omega: Vec::with_capacity(steps + 1),
        accel: Vec::with_capacity(steps + 1),
        diverged_at: None,
    };
    let mut y = initial.to_vec();
    let mut rate = vec![0.0; 2 * n];
    for i in 0..=steps {
        let t = i as f64 * cfg.dt;
        swing_rhs(p, cfg.gamma, &forcing_at(t), &y, &mut rate);
        traj.times.push(t);
        traj.delta.push(y[..n].to_vec());
        traj.omega.push(y[n..].to_vec());
        traj.accel.push(rate[n..].to_vec());
        if y.iter().any(|x| !x.is_finite() || x.abs() > OVERFLOW_LIMIT) {
            traj.diverged_at = Some(t);
            break;
        }
        if i == steps {
            break;
        }
        // forcing is held constant over each step, sampled at its midpoint
        let u = forcing_at((i as f64 + 0.5) * cfg.dt);
        y = rk4_step(&y, cfg.dt, |s, out| swing_rhs(p, cfg.gamma, &u, s, out));
    }
    Ok(traj)
}

/// Largest peak-to-peak excursion of any generator's acceleration over
/// samples with `t >= window_start`.
pub fn ripple_metric(t: &Trajectory, window_start: f64) -> Result<f64, SimError> {
    let pulse_end = t.config.pulse.t_off;
    if window_start < pulse_end - 1e-9 * t.config.dt {
        return Err(SimError::WindowBeforePulseEnd {
            start: window_start,
            pulse_end,
        });
    }
    let first = t.times.iter().position(|&s| s >= window_start - 1e-9 * t.config.dt);
    let Some(first) = first.filter(|&f| t.times.len() - f >= 2) else {
        return Err(SimError::EmptyWindow(window_start));
    };
    let mut worst: f64 = 0.0;
    for g in 0..t.n {
        let (lo, hi) = t.accel[first..]
            .iter()
            .map(|a| a[g])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| (lo.min(x), hi.max(x)));
        worst = worst.max(hi - lo);
    }
    Ok(worst)
}

/// Classifies the post-pulse velocity response.
///
/// The envelope is `max_i |Δω_i|` per sample. `Decayed` when the envelope
/// over the final quarter of the run stays below 1% of its post-pulse peak;
/// `Diverged` when the overflow guard tripped or the envelope grows
/// monotonically over that final quarter; otherwise `Oscillating`.
pub fn divergence_detect(t: &Trajectory) -> Response {
    if t.diverged_at.is_some() {
        return Response::Diverged;
    }
    let pulse_end = t.config.pulse.t_off;
    let envelope: Vec<(f64, f64)> = t
        .times
        .iter()
        .zip(&t.omega)
        .filter(|(&s, _)| s >= pulse_end)
        .map(|(&s, w)| (s, w.iter().fold(0.0_f64, |m, x| m.max(x.abs()))))
        .collect();
    let peak = envelope.iter().fold(0.0_f64, |m, &(_, e)| m.max(e));
    if peak == 0.0 {
        return Response::Decayed;
    }
    let tail_start = t.config.t_end * (1.0 - TAIL_FRACTION);
    let tail: Vec<f64> = envelope
        .iter()
        .filter(|(s, _)| *s >= tail_start)
        .map(|&(_, e)| e)
        .collect();
    if tail.is_empty() {
        return Response::Oscillating;
    }
    let tail_max = tail.iter().fold(0.0_f64, |m, &e| m.max(e));
    if tail_max < DECAY_FRACTION * peak {
        return Response::Decayed;
    }
    let growing = tail.windows(2).all(|w| w[1] >= w[0]) && tail[tail.len() - 1] > tail[0];
    if growing {
        Response::Diverged
    } else {
        Response::Oscillating
    }
}

/// Trajectory as CSV: `time, delta_0.., omega_0.., accel_0..`.
pub fn trajectory_to_csv(t: &Trajectory) -> String {
    let mut header = vec!["time".to_string()];
    for prefix in ["delta", "omega", "accel"] {
        header.extend((0..t.n).map(|i| format!("{prefix}_{i}")));
    }
    let mut s = header.join(",");
    s.push('\n');
    for k in 0..t.times.len() {
        let mut row = vec![crate::fmt_sig(t.times[k])];
        for col in [&t.delta[k], &t.omega[k], &t.accel[k]] {
            row.extend(col.iter().map(|&x| crate::fmt_sig(x)));
        }
        s.push_str(&row.join(","));
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coupling::analyze;
    use crate::coupling::CouplingConstants;
    use crate::instances::{two_generator_line, two_generator_one_load};
    use crate::numerics::RealSymMatrix;

    fn mixed_triangle(k12: f64) -> CouplingMatrix {
        let g = two_generator_one_load(0.0, 0.0, k12, -0.25, 1.0).unwrap();
        analyze(&g, &CouplingConstants::default()).unwrap().coupling
    }

    fn cfg(gamma: f64) -> SimConfig {
        SimConfig {
            gamma,
            ..SimConfig::default()
        }
    }

    #[test]
    fn zero_pulse_zero_trajectory() {
        let mut c = cfg(0.2);
        c.pulse.magnitude = 0.0;
        let t = simulate(&mixed_triangle(1.0), &c).unwrap();
        assert_eq!(t.times.len(), 13_001);
        assert!(t.delta.iter().chain(&t.omega).chain(&t.accel).flatten().all(|&x| x == 0.0));
        assert_eq!(ripple_metric(&t, 3.1).unwrap(), 0.0);
        assert_eq!(divergence_detect(&t), Response::Decayed);
    }

    #[test]
    fn stable_triangle_decays() {
        // γ = 2 gives decay rate 1 per second on the oscillatory mode
        let t = simulate(&mixed_triangle(1.0), &cfg(2.0)).unwrap();
        assert_eq!(divergence_detect(&t), Response::Decayed);
        let peak = t.omega.iter().flatten().fold(0.0_f64, |m, x| m.max(x.abs()));
        let last = t.omega.last().unwrap().iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        assert!(last < 0.01 * peak);
    }

    #[test]
    fn unstable_triangle_diverges() {
        let t = simulate(&mixed_triangle(0.0), &cfg(0.2)).unwrap();
        assert_eq!(divergence_detect(&t), Response::Diverged);
    }

    #[test]
    fn undamped_stable_oscillates() {
        let t = simulate(&mixed_triangle(1.0), &cfg(0.0)).unwrap();
        assert_eq!(divergence_detect(&t), Response::Oscillating);
    }

    #[test]
    fn overflow_guard_reports_time() {
        let p = CouplingMatrix {
            matrix: RealSymMatrix::from_rows(&[vec![-50.0, 50.0], vec![50.0, -50.0]]).unwrap(),
        };
        let t = simulate(&p, &cfg(0.0)).unwrap();
        let at = t.diverged_at.expect("must overflow");
        assert!(at > 3.0 && at < 13.0);
        assert_eq!(*t.times.last().unwrap(), at);
        assert_eq!(divergence_detect(&t), Response::Diverged);
    }

    #[test]
    fn acceleration_column_is_rhs() {
        let p = mixed_triangle(1.0);
        let t = simulate(&p, &cfg(0.2)).unwrap();
        for k in [0, 3000, 3050, 3100, 8000, 13000] {
            let mut y = t.delta[k].clone();
            y.extend(&t.omega[k]);
            let mut out = vec![0.0; 4];
            let active = t.config.pulse_active(t.times[k]);
            let u = vec![if active { 1.0 } else { 0.0 }, 0.0];
            swing_rhs(&p, 0.2, &u, &y, &mut out);
            assert_eq!(&out[2..], &t.accel[k][..]);
        }
        assert!(t.accel[3050][0] > 0.5);
    }

    #[test]
    fn ripple_is_linear_in_pulse() {
        let p = analyze(&two_generator_line(-0.5).unwrap(), &CouplingConstants::default())
            .unwrap()
            .coupling;
        let mut c = cfg(0.2);
        let r1 = ripple_metric(&simulate(&p, &c).unwrap(), 3.1).unwrap();
        c.pulse.magnitude = 2.0;
        let r2 = ripple_metric(&simulate(&p, &c).unwrap(), 3.1).unwrap();
        assert!((r2 - 2.0 * r1).abs() <= 1e-12 * r2);
    }

    #[test]
    fn ripple_window_errors() {
        let t = simulate(&mixed_triangle(1.0), &cfg(0.2)).unwrap();
        assert!(matches!(ripple_metric(&t, 13.0), Err(SimError::EmptyWindow(_))));
        assert!(matches!(
            ripple_metric(&t, 2.0),
            Err(SimError::WindowBeforePulseEnd { .. })
        ));
    }

    #[test]
    fn uniform_mode_drifts() {
        let p = mixed_triangle(1.0);
        let mut c = cfg(0.0);
        c.pulse.magnitude = 0.0;
        let t = simulate_from(&p, &c, &[0.0, 0.0, 0.5, 0.5]).unwrap();
        for (k, &s) in t.times.iter().enumerate().step_by(997) {
            assert!((t.delta[k][0] - 0.5 * s).abs() < 1e-9);
            assert!((t.delta[k][1] - 0.5 * s).abs() < 1e-9);
            assert!(t.accel[k].iter().all(|a| a.abs() < 1e-12));
        }
    }

    #[test]
    fn config_validation() {
        let p = mixed_triangle(1.0);
        let mut c = cfg(0.2);
        c.dt = 0.0;
        assert!(matches!(simulate(&p, &c), Err(SimError::BadConfig(_))));
        let mut c = cfg(0.2);
        c.pulse.t_off = 2.0;
        assert!(matches!(simulate(&p, &c), Err(SimError::BadConfig(_))));
        let mut c = cfg(0.2);
        c.pulse.target = 2;
        assert_eq!(simulate(&p, &c), Err(SimError::BadTarget(2)));
        assert!(simulate(&p, &cfg(-1.0)).is_err());
    }

    #[test]
    fn csv_layout() {
        let mut c = cfg(0.2);
        c.t_end = 3.2;
        c.dt = 0.1;
        let t = simulate(&mixed_triangle(1.0), &c).unwrap();
        let csv = trajectory_to_csv(&t);
        let mut lines = csv.lines();
        assert_eq!(
            lines.next().unwrap(),
            "time,delta_0,delta_1,omega_0,omega_1,accel_0,accel_1"
        );
        assert_eq!(lines.count(), 33);
    }
}
