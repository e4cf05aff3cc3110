//! Coupled pressure/temperature rate equations for the two chambers.

use super::{BoundaryConditions, ChamberGeometry, ChamberState, FlowResult, GasConstants, GasError};

/// The five streams entering the chamber balance: supply into chamber 1,
/// Valve_air out of chamber 1, Valve1 and Valve2 from chamber 1 into
/// chamber 2, and the extraction out of chamber 2.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ChamberFlows {
    pub inflow: FlowResult,
    pub air: FlowResult,
    pub v1: FlowResult,
    pub v2: FlowResult,
    pub out: FlowResult,
}

/// Right-hand sides of the four chamber state equations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChamberRates {
    /// dP1/dt, Pa/s.
    pub dp1: f64,
    /// dT1/dt, K/s.
    pub dt1: f64,
    /// dP2/dt, Pa/s.
    pub dp2: f64,
    /// dT2/dt, K/s.
    pub dt2: f64,
}

/// Evaluate the chamber pressure and temperature rates.
///
/// Each chamber combines a mass term `R T / V * net_mdot` with an energy
/// bracket `Q + sum(mdot_in (h + C^2/2)) - sum(mdot_out (h + C^2/2))
/// - Cp T net_mdot` scaled by `R/(V (Cp - R))`; the temperature rate is the
/// same bracket scaled by `R T/(P V (Cp - R))`. The pair conserves chamber
/// mass exactly: d(PV/RT)/dt equals the net mass flux.
///
/// Stream enthalpies must be evaluated at their source states (supply at
/// `Cp T_in`, valve streams at `Cp T1`, extraction at `Cp T2`).
pub fn chamber_rates(
    state1: &ChamberState,
    state2: &ChamberState,
    geo1: &ChamberGeometry,
    geo2: &ChamberGeometry,
    flows: &ChamberFlows,
    bc: &BoundaryConditions,
    gas: &GasConstants,
) -> Result<ChamberRates, GasError> {
    if !(gas.cp > gas.r) {
        return Err(GasError::BadGasConstants { r: gas.r, cp: gas.cp });
    }
    state1.validate()?;
    state2.validate()?;

    let cv = gas.cv();
    let t1 = state1.temperature;
    let t2 = state2.temperature;

    let net1 = flows.inflow.mdot - (flows.air.mdot + flows.v1.mdot + flows.v2.mdot);
    let bracket1 = bc.q1 + flows.inflow.energy_rate()
        - flows.air.energy_rate()
        - flows.v1.energy_rate()
        - flows.v2.energy_rate()
        - gas.cp * t1 * net1;
    let dp1 = gas.r * t1 / geo1.volume * net1 + gas.r / (geo1.volume * cv) * bracket1;
    let dt1 = gas.r * t1 / (state1.pressure * geo1.volume * cv) * bracket1;

    let net2 = flows.v1.mdot + flows.v2.mdot - flows.out.mdot;
    let bracket2 = bc.q2 + flows.v1.energy_rate() + flows.v2.energy_rate()
        - flows.out.energy_rate()
        - gas.cp * t2 * net2;
    let dp2 = gas.r * t2 / geo2.volume * net2 + gas.r / (geo2.volume * cv) * bracket2;
    let dt2 = gas.r * t2 / (state2.pressure * geo2.volume * cv) * bracket2;

    Ok(ChamberRates { dp1, dt1, dp2, dt2 })
}
