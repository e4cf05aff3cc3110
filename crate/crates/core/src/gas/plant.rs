//! Whole-plant state and its fixed-step integrator.

use thiserror::Error;

use super::chamber::{chamber_rates, ChamberFlows};
use super::valve::{valve_mass_flow, ValveUnit};
use super::{
    BoundaryConditions, ChamberGeometry, ChamberState, FlowResult, GasConstants, GasError,
    LinearizedCoeffs, SupplyModel,
};

/// Pressure floor used when evaluating rates at intermediate integrator
/// stages, Pa. A committed state at or below the floor is a fault.
const P_FLOOR: f64 = 1.0;
/// Temperature floor for stage evaluations, K.
const T_FLOOR: f64 = 1.0;

/// Integration fault: the committed state left the physical domain.
#[derive(Debug, Clone, Error, PartialEq)]
#[error("plant state became nonphysical: chamber 1 ({p1} Pa, {t1} K), chamber 2 ({p2} Pa, {t2} K)")]
pub struct PlantFault {
    pub p1: f64,
    pub t1: f64,
    pub p2: f64,
    pub t2: f64,
}

/// Mass flows resolved for one step, kg/s.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FlowReport {
    pub mdot_in: f64,
    pub mdot_air: f64,
    pub mdot_v1: f64,
    pub mdot_v2: f64,
    pub mdot_out: f64,
    /// A stage evaluation hit the pressure/temperature floor.
    pub floored: bool,
}

/// The full gas path: two chambers and three valves plus gas properties.
#[derive(Debug, Clone, PartialEq)]
pub struct Plant {
    pub gas: GasConstants,
    pub geo1: ChamberGeometry,
    pub geo2: ChamberGeometry,
    pub ch1: ChamberState,
    pub ch2: ChamberState,
    pub valve_air: ValveUnit,
    pub valve1: ValveUnit,
    pub valve2: ValveUnit,
}

impl Plant {
    /// Evaluate the five section flows for given chamber states and frozen
    /// valve areas.
    fn flows_at(
        &self,
        p1: f64,
        t1: f64,
        p2: f64,
        t2: f64,
        a_air: f64,
        a1: f64,
        a2: f64,
        bc: &BoundaryConditions,
    ) -> Result<ChamberFlows, GasError> {
        let inflow = match bc.supply {
            SupplyModel::FixedFlow(mdot) => FlowResult::new(mdot, self.gas.cp * bc.t_in),
            SupplyModel::Orifice { area } => {
                valve_mass_flow(bc.p_in, bc.t_in, p1, area, &self.gas)?
            }
        };
        Ok(ChamberFlows {
            inflow,
            air: valve_mass_flow(p1, t1, bc.p_amb, a_air, &self.gas)?,
            v1: valve_mass_flow(p1, t1, p2, a1, &self.gas)?,
            v2: valve_mass_flow(p1, t1, p2, a2, &self.gas)?,
            out: FlowResult::new(bc.mdot_out, self.gas.cp * t2),
        })
    }

    /// Current-area flows at the current chamber states (diagnostics).
    pub fn flows(&self, bc: &BoundaryConditions) -> Result<ChamberFlows, GasError> {
        self.flows_at(
            self.ch1.pressure,
            self.ch1.temperature,
            self.ch2.pressure,
            self.ch2.temperature,
            self.valve_air.area(),
            self.valve1.area(),
            self.valve2.area(),
            bc,
        )
    }

    /// Advance the plant one step of `dt` seconds.
    ///
    /// Valve actuators advance first with their exact exponential update and
    /// delay lines; their areas are then frozen while the chamber states take
    /// one classic fourth-order Runge-Kutta step. Boundary conditions are
    /// held over the step (zero-order hold). Returns the flows of the first
    /// stage, which are the ones acting at the step start.
    pub fn step(
        &mut self,
        cmds: [f64; 3],
        bc: &BoundaryConditions,
        dt: f64,
    ) -> Result<FlowReport, PlantStepError> {
        if !(dt > 0.0) {
            return Err(GasError::OutOfRange { what: "time step", value: dt }.into());
        }
        bc.validate().map_err(PlantStepError::Domain)?;

        self.valve_air.advance(cmds[0], dt).map_err(PlantStepError::Domain)?;
        self.valve1.advance(cmds[1], dt).map_err(PlantStepError::Domain)?;
        self.valve2.advance(cmds[2], dt).map_err(PlantStepError::Domain)?;
        let (a_air, a1, a2) = (self.valve_air.area(), self.valve1.area(), self.valve2.area());

        let mut floored = false;
        let mut eval = |y: [f64; 4]| -> Result<([f64; 4], ChamberFlows), GasError> {
            let p1 = y[0].max(P_FLOOR);
            let t1 = y[1].max(T_FLOOR);
            let p2 = y[2].max(P_FLOOR);
            let t2 = y[3].max(T_FLOOR);
            if p1 != y[0] || t1 != y[1] || p2 != y[2] || t2 != y[3] {
                floored = true;
            }
            let flows = self.flows_at(p1, t1, p2, t2, a_air, a1, a2, bc)?;
            let s1 = ChamberState { pressure: p1, temperature: t1 };
            let s2 = ChamberState { pressure: p2, temperature: t2 };
            let r = chamber_rates(&s1, &s2, &self.geo1, &self.geo2, &flows, bc, &self.gas)?;
            Ok(([r.dp1, r.dt1, r.dp2, r.dt2], flows))
        };

        let y0 = [
            self.ch1.pressure,
            self.ch1.temperature,
            self.ch2.pressure,
            self.ch2.temperature,
        ];
        let (k1, flows1) = eval(y0).map_err(PlantStepError::Domain)?;
        let (k2, _) = eval(advanced(y0, k1, dt / 2.0)).map_err(PlantStepError::Domain)?;
        let (k3, _) = eval(advanced(y0, k2, dt / 2.0)).map_err(PlantStepError::Domain)?;
        let (k4, _) = eval(advanced(y0, k3, dt)).map_err(PlantStepError::Domain)?;

        let mut y = y0;
        for i in 0..4 {
            y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        if !(y[0] > P_FLOOR && y[1] > T_FLOOR && y[2] > P_FLOOR && y[3] > T_FLOOR)
            || y.iter().any(|v| !v.is_finite())
        {
            return Err(PlantStepError::Fault(PlantFault {
                p1: y[0],
                t1: y[1],
                p2: y[2],
                t2: y[3],
            }));
        }
        self.ch1 = ChamberState { pressure: y[0], temperature: y[1] };
        self.ch2 = ChamberState { pressure: y[2], temperature: y[3] };

        Ok(FlowReport {
            mdot_in: flows1.inflow.mdot,
            mdot_air: flows1.air.mdot,
            mdot_v1: flows1.v1.mdot,
            mdot_v2: flows1.v2.mdot,
            mdot_out: flows1.out.mdot,
            floored,
        })
    }
}

fn advanced(y: [f64; 4], k: [f64; 4], h: f64) -> [f64; 4] {
    [y[0] + h * k[0], y[1] + h * k[1], y[2] + h * k[2], y[3] + h * k[3]]
}

/// Failure modes of one plant step.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum PlantStepError {
    #[error(transparent)]
    Domain(#[from] GasError),
    #[error(transparent)]
    Fault(PlantFault),
}

/// Sensitivity of a chamber's pressure rate to one unit of stream mass flow,
/// obtained by differentiating the rate equations: `(R/V) * (T_chamber +
/// (h_stream - Cp T_chamber)/(Cp - R))`. For a stream leaving at the
/// chamber's own enthalpy this reduces to `R T / V`.
fn stream_sensitivity(t_chamber: f64, h_stream: f64, volume: f64, gas: &GasConstants) -> f64 {
    gas.r / volume * (t_chamber + (h_stream - gas.cp * t_chamber) / gas.cv())
}

/// Pressure-rate sensitivities to the three valve flows at an operating
/// point, with stream enthalpies from the calorically perfect model (valve
/// streams leave chamber 1 at `Cp T1`).
pub fn linearized_coeffs(
    state1: &ChamberState,
    state2: &ChamberState,
    geo1: &ChamberGeometry,
    geo2: &ChamberGeometry,
    gas: &GasConstants,
) -> LinearizedCoeffs {
    let h_from_ch1 = gas.cp * state1.temperature;
    LinearizedCoeffs {
        a1: stream_sensitivity(state1.temperature, h_from_ch1, geo1.volume, gas),
        a2: stream_sensitivity(state1.temperature, h_from_ch1, geo1.volume, gas),
        a_air: stream_sensitivity(state1.temperature, h_from_ch1, geo1.volume, gas),
        b1: stream_sensitivity(state2.temperature, h_from_ch1, geo2.volume, gas),
        b2: stream_sensitivity(state2.temperature, h_from_ch1, geo2.volume, gas),
    }
}
