//! Valve flow characteristics and actuation dynamics.
//!
//! Flow follows the generalized equation `mdot = phi * A * p * sqrt(2/(R T))`
//! with the flow coefficient `phi` taken from an isentropic converging-nozzle
//! surrogate of the pressure ratio: a choked plateau below the critical ratio
//! and a subsonic branch falling to zero as the ratio approaches one. The
//! plateau is scaled to 0.65, typical of large butterfly and sleeve valves.
//!
//! Actuation is a first-order lag on the commanded opening behind a pure
//! transport delay; the lag is advanced with its exact exponential update.

use std::collections::VecDeque;

use super::{FlowResult, GasConstants, GasError};

/// Choked-plateau value of the flow coefficient.
pub const PHI_CHOKED: f64 = 0.65;

/// Installed flow area for an opening fraction, linear in the fraction.
pub fn valve_area(pos: f64, diameter: f64) -> Result<f64, GasError> {
    if !(0.0..=1.0).contains(&pos) {
        return Err(GasError::OutOfRange { what: "valve opening fraction", value: pos });
    }
    if !(diameter > 0.0) {
        return Err(GasError::OutOfRange { what: "valve diameter", value: diameter });
    }
    Ok(pos * std::f64::consts::PI * diameter * diameter / 4.0)
}

/// Flow coefficient as a function of the pressure ratio across the valve.
///
/// Returns 0 when `p_down >= p_up`, the choked plateau [`PHI_CHOKED`] below
/// the critical ratio, and the scaled subsonic nozzle branch in between. The
/// installed area does not enter the surrogate; the parameter is kept so the
/// signature matches the general coefficient map `phi(p, p_a, A)`.
pub fn flow_coefficient(
    p_up: f64,
    p_down: f64,
    _area: f64,
    gas: &GasConstants,
) -> Result<f64, GasError> {
    if !(p_up > 0.0) {
        return Err(GasError::OutOfRange { what: "upstream pressure", value: p_up });
    }
    if !(p_down >= 0.0) {
        return Err(GasError::OutOfRange { what: "downstream pressure", value: p_down });
    }
    let ratio = p_down / p_up;
    if ratio >= 1.0 {
        return Ok(0.0);
    }
    let critical = gas.critical_pressure_ratio();
    if ratio <= critical {
        return Ok(PHI_CHOKED);
    }
    let g = gas.gamma();
    let shape = |r: f64| r.powf(2.0 / g) - r.powf((g + 1.0) / g);
    Ok(PHI_CHOKED * (shape(ratio) / shape(critical)).sqrt())
}

/// Mass flow through an installed area under the one-directional convention.
///
/// The stream enthalpy is the upstream stagnation enthalpy `Cp * T_up`.
pub fn valve_mass_flow(
    p_up: f64,
    t_up: f64,
    p_down: f64,
    area: f64,
    gas: &GasConstants,
) -> Result<FlowResult, GasError> {
    if !(p_up > 0.0) || !(t_up > 0.0) {
        return Err(GasError::NonPhysicalState { pressure: p_up, temperature: t_up });
    }
    if !(area >= 0.0) {
        return Err(GasError::OutOfRange { what: "flow area", value: area });
    }
    let phi = flow_coefficient(p_up, p_down, area, gas)?;
    let mdot = mass_flow_with_phi(phi, area, p_up, t_up, gas.r);
    Ok(FlowResult::new(mdot, gas.cp * t_up))
}

/// Raw generalized flow equation, `phi * A * p * sqrt(2/(R T))`.
pub(crate) fn mass_flow_with_phi(phi: f64, area: f64, p_up: f64, t_up: f64, r: f64) -> f64 {
    phi * area * p_up * (2.0 / (r * t_up)).sqrt()
}

/// One control valve: geometry, actuation lag, transport delay, and the
/// command history that realizes the delay.
#[derive(Debug, Clone, PartialEq)]
pub struct ValveUnit {
    /// Nominal diameter, m.
    pub diameter: f64,
    /// First-order actuation time constant, s.
    pub tau: f64,
    /// Transport delay on the command path, s.
    pub delay: f64,
    /// Last commanded opening fraction.
    pub cmd: f64,
    /// Actual opening fraction.
    pub pos: f64,
    /// Commands not yet past the delay line, oldest first.
    cmd_history: VecDeque<f64>,
    /// Command assumed to have been held before the first step.
    initial_cmd: f64,
}

impl ValveUnit {
    pub fn new(diameter: f64, tau: f64, delay: f64, initial_pos: f64) -> Result<Self, GasError> {
        if !(diameter > 0.0) {
            return Err(GasError::OutOfRange { what: "valve diameter", value: diameter });
        }
        if !(tau > 0.0) {
            return Err(GasError::OutOfRange { what: "valve time constant", value: tau });
        }
        if !(delay >= 0.0) {
            return Err(GasError::OutOfRange { what: "valve delay", value: delay });
        }
        if !(0.0..=1.0).contains(&initial_pos) {
            return Err(GasError::OutOfRange { what: "valve opening fraction", value: initial_pos });
        }
        Ok(Self {
            diameter,
            tau,
            delay,
            cmd: initial_pos,
            pos: initial_pos,
            cmd_history: VecDeque::new(),
            initial_cmd: initial_pos,
        })
    }

    /// Fully open installed area, m^2.
    pub fn max_area(&self) -> f64 {
        std::f64::consts::PI * self.diameter * self.diameter / 4.0
    }

    /// Installed area at the current opening, m^2.
    pub fn area(&self) -> f64 {
        self.pos * self.max_area()
    }

    /// Advance the actuator by `dt` under a new command.
    ///
    /// The command seen by the lag is the one issued `delay` seconds ago;
    /// the lag itself is discretized exactly:
    /// `pos' = cmd_delayed + (pos - cmd_delayed) * exp(-dt/tau)`.
    pub fn advance(&mut self, cmd: f64, dt: f64) -> Result<(), GasError> {
        if !(dt > 0.0) {
            return Err(GasError::OutOfRange { what: "time step", value: dt });
        }
        if !(0.0..=1.0).contains(&cmd) {
            return Err(GasError::OutOfRange { what: "valve command", value: cmd });
        }
        debug_assert!(dt <= self.tau / 5.0, "dt too coarse for valve lag accuracy");
        self.cmd = cmd;
        let n_delay = (self.delay / dt).round() as usize;
        self.cmd_history.push_back(cmd);
        while self.cmd_history.len() > n_delay + 1 {
            self.cmd_history.pop_front();
        }
        let effective = if self.cmd_history.len() == n_delay + 1 {
            *self.cmd_history.front().expect("history nonempty")
        } else {
            self.initial_cmd
        };
        let decay = (-dt / self.tau).exp();
        self.pos = (effective + (self.pos - effective) * decay).clamp(0.0, 1.0);
        Ok(())
    }
}
