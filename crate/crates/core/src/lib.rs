//! Simulation library for a two-chamber, three-valve intake-pressure rig.
//!
//! The plant is a pair of large stabilizing volumes coupled through control
//! valves: a supply manifold feeds chamber 1 through a fixed orifice, chamber 1
//! vents to ambient through `Valve_air` and feeds chamber 2 through `Valve1`
//! and `Valve2`, and an imposed extraction flow drains chamber 2. On top of
//! the gas path the crate provides:
//!
//! * bandwidth-tuned third-order extended state observers and a tracking
//!   differentiator ([`observer`]),
//! * an exterior exponential-penalty formulation of the pressure-band
//!   constraints, its gradient solver, and the per-tick coordinator
//!   ([`penalty`]),
//! * the cooperative disturbance-rejection control law, valve allocation, and
//!   an independent three-loop PID baseline ([`control`]),
//! * piecewise-linear test profiles with measurement-noise injection
//!   ([`scenario`]),
//! * the closed-loop harness: configuration, trim solving, the fixed-step
//!   simulation loop, metrics, and CSV output ([`sim`]),
//! * the executable acceptance checks behind the `validate` CLI subcommand
//!   ([`validate`]).
//!
//! All plant-internal quantities are SI (Pa, K, kg/s); controller-facing
//! pressures, config files, and reports use kPa.

pub mod control;
pub mod gas;
pub mod observer;
pub mod penalty;
pub mod scenario;
pub mod sim;
pub mod validate;

pub use control::{
    adrc_command, allocate_valves, saturate_and_rate_limit, AdrcCommand, AdrcGains, PdSign,
    PidGains, PidLoop, SaturationFlags, ValveCommandSet,
};
pub use gas::{
    BoundaryConditions, ChamberGeometry, ChamberState, FlowResult, GasConstants, GasError,
    LinearizedCoeffs, SupplyModel,
};
pub use gas::plant::{FlowReport, Plant, PlantFault};
pub use gas::valve::{flow_coefficient, valve_area, valve_mass_flow, ValveUnit};
pub use observer::{bandwidth_gains, EsoConfig, EsoState, ObserverError, TdState};
pub use penalty::{Coordinator, PenaltyError, PenaltyProblem, SolveStatus, SolveTrace};
pub use scenario::{NoiseConfig, NoiseModel, PiecewiseLinearProfile, Scenario, ScenarioError};
pub use sim::{run_simulation, RunMetrics, RunOutput, SimConfig, SimError};
