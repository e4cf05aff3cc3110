//! Third-order extended state observers and the setpoint tracking
//! differentiator.
//!
//! Each chamber runs one observer over (pressure, pressure rate, total
//! disturbance). Gains come from the bandwidth parameterization
//! `beta = (3 w, 3 w^2, w^3)`; the update is forward Euler, guarded so the
//! product `dt * w` stays small enough for that discretization.

use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ObserverError {
    #[error("observer bandwidth must be positive, got {0}")]
    BadBandwidth(f64),
    #[error("dt * omega = {0} exceeds the forward-Euler guard of 0.2")]
    GuardViolation(f64),
    #[error("time step must be positive, got {0}")]
    BadTimeStep(f64),
}

/// Bandwidth-parameterized observer gains `(3 w, 3 w^2, w^3)`.
pub fn bandwidth_gains(omega: f64) -> Result<[f64; 3], ObserverError> {
    if !(omega > 0.0) {
        return Err(ObserverError::BadBandwidth(omega));
    }
    Ok([3.0 * omega, 3.0 * omega * omega, omega * omega * omega])
}

/// Observer configuration for one chamber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EsoConfig {
    /// Observer bandwidth, rad/s.
    pub omega: f64,
    /// Row mapping the three valve-command increments onto the observer's
    /// second-derivative channel.
    pub b_row: [f64; 3],
    /// Gain vector, fixed to the bandwidth parameterization.
    pub beta: [f64; 3],
}

impl EsoConfig {
    pub fn from_bandwidth(omega: f64, b_row: [f64; 3]) -> Result<Self, ObserverError> {
        Ok(Self { omega, b_row, beta: bandwidth_gains(omega)? })
    }
}

/// Observer state: pressure estimate (kPa), pressure-rate estimate (kPa/s),
/// and the total-disturbance estimate on the second-derivative channel.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EsoState {
    pub z1: f64,
    pub z2: f64,
    pub z3: f64,
}

impl EsoState {
    /// Start the observer on the measured output with no rate or disturbance
    /// estimate.
    pub fn at_output(y: f64) -> Self {
        Self { z1: y, z2: 0.0, z3: 0.0 }
    }

    /// One forward-Euler update:
    /// `e = z1 - y`, `z1 += dt (z2 - b1 e)`, `z2 += dt (z3 - b2 e + b.u)`,
    /// `z3 += dt (-b3 e)`.
    pub fn step(
        &self,
        y_meas: f64,
        cmds: [f64; 3],
        cfg: &EsoConfig,
        dt: f64,
    ) -> Result<EsoState, ObserverError> {
        if !(dt > 0.0) {
            return Err(ObserverError::BadTimeStep(dt));
        }
        let product = dt * cfg.omega;
        if product > 0.2 {
            return Err(ObserverError::GuardViolation(product));
        }
        let e = self.z1 - y_meas;
        let bu = cfg.b_row[0] * cmds[0] + cfg.b_row[1] * cmds[1] + cfg.b_row[2] * cmds[2];
        Ok(EsoState {
            z1: self.z1 + dt * (self.z2 - cfg.beta[0] * e),
            z2: self.z2 + dt * (self.z3 - cfg.beta[1] * e + bu),
            z3: self.z3 + dt * (-cfg.beta[2] * e),
        })
    }
}

/// Discrete time-optimal tracking differentiator.
///
/// Produces a smooth tracked setpoint `v1` and its derivative `v2`; steps
/// settle without overshoot and ramps are followed with `v2` equal to the
/// ramp slope.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdState {
    /// Tracked setpoint, kPa.
    pub v1: f64,
    /// Tracked derivative, kPa/s.
    pub v2: f64,
    /// Speed factor (maximum tracking acceleration), kPa/s^2.
    pub r: f64,
    /// Filter step, s; a little above the integration step avoids chatter.
    pub h: f64,
}

impl TdState {
    pub fn new(initial: f64, r: f64, h: f64) -> Self {
        Self { v1: initial, v2: 0.0, r, h }
    }

    /// One tracking step toward `target`.
    pub fn step(&self, target: f64, dt: f64) -> TdState {
        let accel = time_optimal_accel(self.v1 - target, self.v2, self.r, self.h);
        TdState {
            v1: self.v1 + dt * self.v2,
            v2: self.v2 + dt * accel,
            r: self.r,
            h: self.h,
        }
    }
}

/// Time-optimal control synthesis for the discrete double integrator: the
/// acceleration that brings (x1, x2) to the origin without overshoot.
fn time_optimal_accel(x1: f64, x2: f64, r: f64, h: f64) -> f64 {
    let d = r * h;
    let d0 = h * d;
    let y = x1 + h * x2;
    let a0 = (d * d + 8.0 * r * y.abs()).sqrt();
    let a = if y.abs() > d0 {
        x2 + 0.5 * (a0 - d) * y.signum()
    } else {
        x2 + y / h
    };
    if a.abs() > d {
        -r * a.signum()
    } else {
        -r * a / d
    }
}
