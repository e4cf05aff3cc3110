//! Lumped-parameter gas path: chambers, valves, boundary conditions.

pub mod chamber;
pub mod plant;
pub mod valve;

use thiserror::Error;

/// Errors raised by the gas-path model.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum GasError {
    #[error("{what} out of range: {value}")]
    OutOfRange { what: &'static str, value: f64 },
    #[error("gas constants invalid: R = {r}, Cp = {cp} (need R > 0 and Cp > R)")]
    BadGasConstants { r: f64, cp: f64 },
    #[error("nonphysical chamber state: P = {pressure} Pa, T = {temperature} K")]
    NonPhysicalState { pressure: f64, temperature: f64 },
}

/// Calorically perfect gas description.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GasConstants {
    /// Specific gas constant, J/(kg K).
    pub r: f64,
    /// Specific heat at constant pressure, J/(kg K).
    pub cp: f64,
}

impl GasConstants {
    /// Dry air.
    pub const AIR: GasConstants = GasConstants { r: 287.06, cp: 1004.5 };

    pub fn new(r: f64, cp: f64) -> Result<Self, GasError> {
        if !(r > 0.0) || !(cp > r) {
            return Err(GasError::BadGasConstants { r, cp });
        }
        Ok(Self { r, cp })
    }

    /// Specific heat at constant volume, Cp - R.
    pub fn cv(&self) -> f64 {
        self.cp - self.r
    }

    /// Ratio of specific heats.
    pub fn gamma(&self) -> f64 {
        self.cp / self.cv()
    }

    /// Pressure ratio below which an ideal converging nozzle chokes.
    pub fn critical_pressure_ratio(&self) -> f64 {
        let g = self.gamma();
        (2.0 / (g + 1.0)).powf(g / (g - 1.0))
    }
}

/// Integrated state of one stabilizing chamber.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChamberState {
    /// Absolute pressure, Pa.
    pub pressure: f64,
    /// Absolute temperature, K.
    pub temperature: f64,
}

impl ChamberState {
    pub fn new(pressure: f64, temperature: f64) -> Result<Self, GasError> {
        let s = Self { pressure, temperature };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<(), GasError> {
        if !(self.pressure > 0.0) || !(self.temperature > 0.0) {
            return Err(GasError::NonPhysicalState {
                pressure: self.pressure,
                temperature: self.temperature,
            });
        }
        Ok(())
    }

    /// Gas mass held by the chamber, PV/(RT).
    pub fn mass(&self, geometry: &ChamberGeometry, gas: &GasConstants) -> f64 {
        self.pressure * geometry.volume / (gas.r * self.temperature)
    }
}

/// Fixed chamber geometry.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChamberGeometry {
    /// Volume, m^3.
    pub volume: f64,
}

impl ChamberGeometry {
    pub fn new(volume: f64) -> Result<Self, GasError> {
        if !(volume > 0.0) {
            return Err(GasError::OutOfRange { what: "chamber volume", value: volume });
        }
        Ok(Self { volume })
    }
}

/// One stream through a valve or boundary section.
///
/// `mdot` is nonnegative under the one-directional flow convention; the
/// stream's specific enthalpy is evaluated at its source state.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowResult {
    /// Mass flow, kg/s.
    pub mdot: f64,
    /// Specific enthalpy of the stream, J/kg.
    pub enthalpy: f64,
    /// Mean flow velocity, m/s. Zero unless kinetic-energy terms are wanted.
    pub velocity: f64,
}

impl FlowResult {
    pub fn new(mdot: f64, enthalpy: f64) -> Self {
        Self { mdot, enthalpy, velocity: 0.0 }
    }

    /// Energy carried per unit time: mdot * (h + C^2/2), W.
    pub fn energy_rate(&self) -> f64 {
        self.mdot * (self.enthalpy + 0.5 * self.velocity * self.velocity)
    }
}

/// How the supply manifold feeds chamber 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SupplyModel {
    /// Imposed mass flow, kg/s.
    FixedFlow(f64),
    /// Fixed-area orifice from (P_in, T_in) to chamber 1.
    Orifice {
        /// Effective flow area, m^2.
        area: f64,
    },
}

/// Boundary states and imposed flows around the two chambers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConditions {
    /// Supply manifold pressure, Pa.
    pub p_in: f64,
    /// Supply manifold temperature, K.
    pub t_in: f64,
    /// Ambient pressure at the Valve_air outlet, Pa.
    pub p_amb: f64,
    /// Ambient temperature at the Valve_air outlet, K.
    pub t_amb: f64,
    /// Sink pressure downstream of the extraction duct, Pa. The imposed
    /// extraction flow does not depend on it; kept for reporting.
    pub p_engine: f64,
    /// Heat transfer rate into chamber 1, W.
    pub q1: f64,
    /// Heat transfer rate into chamber 2, W.
    pub q2: f64,
    /// Supply path into chamber 1.
    pub supply: SupplyModel,
    /// Engine extraction flow out of chamber 2, kg/s (scenario-driven).
    pub mdot_out: f64,
}

impl BoundaryConditions {
    pub fn validate(&self) -> Result<(), GasError> {
        for (what, value) in [
            ("supply pressure", self.p_in),
            ("supply temperature", self.t_in),
            ("ambient pressure", self.p_amb),
            ("ambient temperature", self.t_amb),
            ("engine sink pressure", self.p_engine),
        ] {
            if !(value > 0.0) {
                return Err(GasError::OutOfRange { what, value });
            }
        }
        if !(self.mdot_out >= 0.0) {
            return Err(GasError::OutOfRange { what: "extraction flow", value: self.mdot_out });
        }
        if let SupplyModel::Orifice { area } = self.supply {
            if !(area >= 0.0) {
                return Err(GasError::OutOfRange { what: "supply orifice area", value: area });
            }
        }
        Ok(())
    }
}

/// First-order sensitivities of the two chamber pressure rates to the three
/// valve mass flows, evaluated at an operating point.
///
/// Signs follow the flow direction: flows leaving chamber 1 reduce P1 at
/// `a1`/`a2`/`a_air` Pa/s per kg/s, flows entering chamber 2 raise P2 at
/// `b1`/`b2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearizedCoeffs {
    pub a1: f64,
    pub a2: f64,
    pub a_air: f64,
    pub b1: f64,
    pub b2: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn air_constants_sane() {
        let g = GasConstants::AIR;
        assert!((g.gamma() - 1.4).abs() < 2e-3);
        assert!((g.critical_pressure_ratio() - 0.5283).abs() < 1e-3);
    }

    #[test]
    fn gas_constants_reject_cp_below_r() {
        assert!(GasConstants::new(287.0, 200.0).is_err());
        assert!(GasConstants::new(-1.0, 1000.0).is_err());
    }

    #[test]
    fn chamber_state_rejects_nonpositive() {
        assert!(ChamberState::new(-1.0, 300.0).is_err());
        assert!(ChamberState::new(1e5, 0.0).is_err());
        assert!(ChamberState::new(1e5, 300.0).is_ok());
    }

    #[test]
    fn chamber_mass_matches_ideal_gas_law() {
        let st = ChamberState::new(101_325.0, 288.15).unwrap();
        let geo = ChamberGeometry::new(1.0).unwrap();
        let m = st.mass(&geo, &GasConstants::AIR);
        assert!((m - 1.2253).abs() < 1e-3);
    }
}
