//! Cooperative control law, valve allocation, and the PID baseline.

use crate::observer::{EsoState, TdState};

/// Sign applied to the derivative-tracking term of the cooperative law.
///
/// `Plus` adds damping the usual way (`+ kd (v2 - z2)` drives the pressure
/// rate toward the tracked setpoint rate). `Minus` subtracts the same term;
/// it is selectable for comparison but feeds the rate error back with the
/// destabilizing sign.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PdSign {
    #[default]
    Plus,
    Minus,
}

/// Gains of the cooperative law plus the control-effectiveness scalars and
/// the chamber-2 allocation split.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdrcGains {
    /// Chamber 1 proportional, derivative, and coordination gains.
    pub k11: f64,
    pub k12: f64,
    pub k13: f64,
    /// Chamber 2 proportional, derivative, and coordination gains.
    pub k21: f64,
    pub k22: f64,
    pub k23: f64,
    /// Effective control gains dividing the compensated commands. Chamber 1
    /// actuates through the vent valve, so `b_eff1` is negative.
    pub b_eff1: f64,
    pub b_eff2: f64,
    /// Fraction of the chamber-2 command routed to Valve1.
    pub rho: f64,
    /// Derivative-term sign convention.
    pub pd_sign: PdSign,
}

/// Virtual commands before and after disturbance compensation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdrcCommand {
    /// Desired second-derivative-channel inputs per chamber.
    pub u_c1: f64,
    pub u_c2: f64,
    /// Compensated control inputs, `(u_c - z3) / b_eff`.
    pub u1: f64,
    pub u2: f64,
}

/// Commanded opening fractions for the three valves.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ValveCommandSet {
    pub vp_air: f64,
    pub vp1: f64,
    pub vp2: f64,
}

/// Which commands were clipped by saturation this tick.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SaturationFlags {
    pub air: bool,
    pub v1: bool,
    pub v2: bool,
}

impl SaturationFlags {
    pub fn any(&self) -> bool {
        self.air || self.v1 || self.v2
    }
}

/// Evaluate the cooperative law for both chambers.
///
/// Per chamber: `u_c = kp (v1 - z1) +/- kd (v2 - z2) - kc * gradL_i`, then
/// the disturbance estimate is removed and the result scaled onto the valve
/// axis: `U = (u_c - z3) / b_eff`.
pub fn adrc_command(
    z_v1: &EsoState,
    z_v2: &EsoState,
    td_v1: &TdState,
    td_v2: &TdState,
    grad_l: [f64; 2],
    gains: &AdrcGains,
) -> AdrcCommand {
    let d_sign = match gains.pd_sign {
        PdSign::Plus => 1.0,
        PdSign::Minus => -1.0,
    };
    let u_c1 = gains.k11 * (td_v1.v1 - z_v1.z1) + d_sign * gains.k12 * (td_v1.v2 - z_v1.z2)
        - gains.k13 * grad_l[0];
    let u_c2 = gains.k21 * (td_v2.v1 - z_v2.z1) + d_sign * gains.k22 * (td_v2.v2 - z_v2.z2)
        - gains.k23 * grad_l[1];
    AdrcCommand {
        u_c1,
        u_c2,
        u1: (u_c1 - z_v1.z3) / gains.b_eff1,
        u2: (u_c2 - z_v2.z3) / gains.b_eff2,
    }
}

/// Distribute the two chamber commands over the three valves around their
/// trim openings. The result is not yet clamped; pass it through
/// [`saturate_and_rate_limit`].
pub fn allocate_valves(u1: f64, u2: f64, trim: &ValveCommandSet, rho: f64) -> ValveCommandSet {
    ValveCommandSet {
        vp_air: trim.vp_air + u1,
        vp1: trim.vp1 + rho * u2,
        vp2: trim.vp2 + (1.0 - rho) * u2,
    }
}

/// Clamp commands to [0, 1] and to the actuator slew limit
/// `|delta| <= rate_max * dt` against the previously issued commands.
pub fn saturate_and_rate_limit(
    cmds: &ValveCommandSet,
    prev: &ValveCommandSet,
    dt: f64,
    rate_max: f64,
) -> (ValveCommandSet, SaturationFlags) {
    let max_delta = rate_max * dt;
    let limit = |want: f64, prev: f64| {
        let slewed = want.clamp(prev - max_delta, prev + max_delta);
        let clamped = slewed.clamp(0.0, 1.0);
        (clamped, (clamped - want).abs() > 1e-12)
    };
    let (vp_air, air) = limit(cmds.vp_air, prev.vp_air);
    let (vp1, v1) = limit(cmds.vp1, prev.vp1);
    let (vp2, v2) = limit(cmds.vp2, prev.vp2);
    (ValveCommandSet { vp_air, vp1, vp2 }, SaturationFlags { air, v1, v2 })
}

/// Gains for one PID loop. Signed gains set the loop direction: the vent
/// loop uses negative gains because opening the valve lowers its pressure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidGains {
    pub kp: f64,
    pub ki: f64,
    pub kd: f64,
    /// Clamp on the accumulated integral, in output units.
    pub integral_limit: f64,
}

impl PidGains {
    pub const fn new(kp: f64, ki: f64, kd: f64, integral_limit: f64) -> Self {
        Self { kp, ki, kd, integral_limit }
    }
}

/// Positional PID with derivative on the measurement and conditional
/// integration: the integral freezes while the output is saturated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PidLoop {
    pub gains: PidGains,
    integral: f64,
    prev_meas: Option<f64>,
}

impl PidLoop {
    pub fn new(gains: PidGains) -> Self {
        Self { gains, integral: 0.0, prev_meas: None }
    }

    /// One update; returns the absolute command in [0, 1] around `trim`.
    pub fn step(&mut self, setpoint: f64, measurement: f64, trim: f64, dt: f64) -> f64 {
        assert!(dt > 0.0, "PID step needs dt > 0");
        let error = setpoint - measurement;
        let derivative = match self.prev_meas {
            Some(prev) => -(measurement - prev) / dt,
            None => 0.0,
        };
        self.prev_meas = Some(measurement);

        let candidate_integral = (self.integral + self.gains.ki * error * dt)
            .clamp(-self.gains.integral_limit, self.gains.integral_limit);
        let unsaturated =
            trim + self.gains.kp * error + candidate_integral + self.gains.kd * derivative;
        if (0.0..=1.0).contains(&unsaturated) {
            self.integral = candidate_integral;
            unsaturated
        } else {
            // Hold the integral while clipped.
            let held = trim + self.gains.kp * error + self.integral + self.gains.kd * derivative;
            held.clamp(0.0, 1.0)
        }
    }

    pub fn reset(&mut self) {
        self.integral = 0.0;
        self.prev_meas = None;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn table_gains() -> AdrcGains {
        AdrcGains {
            k11: 0.001,
            k12: 0.0001,
            k13: 0.1,
            k21: 0.04,
            k22: 0.04,
            k23: 1.0,
            b_eff1: -480.0,
            b_eff2: 130.0,
            rho: 0.5,
            pd_sign: PdSign::Plus,
        }
    }

    fn eso(z1: f64, z2: f64, z3: f64) -> EsoState {
        EsoState { z1, z2, z3 }
    }

    fn td(v1: f64, v2: f64) -> TdState {
        TdState { v1, v2, r: 10.0, h: 0.02 }
    }

    #[test]
    fn regulation_equilibrium_commands_nothing() {
        let g = table_gains();
        let cmd = adrc_command(
            &eso(65.0, 0.0, 0.0),
            &eso(130.0, 0.0, 0.0),
            &td(65.0, 0.0),
            &td(130.0, 0.0),
            [0.0, 0.0],
            &g,
        );
        assert_eq!(cmd.u_c1, 0.0);
        assert_eq!(cmd.u_c2, 0.0);
        assert_eq!(cmd.u1, 0.0);
        assert_eq!(cmd.u2, 0.0);
    }

    #[test]
    fn pure_disturbance_cancellation() {
        let g = table_gains();
        let d = 7.5;
        let cmd = adrc_command(
            &eso(65.0, 0.0, d),
            &eso(130.0, 0.0, -d),
            &td(65.0, 0.0),
            &td(130.0, 0.0),
            [0.0, 0.0],
            &g,
        );
        assert_relative_eq!(cmd.u1, -d / g.b_eff1, max_relative = 1e-12);
        assert_relative_eq!(cmd.u2, d / g.b_eff2, max_relative = 1e-12);
    }

    #[test]
    fn unit_error_scales_by_proportional_gain() {
        let g = table_gains();
        let cmd = adrc_command(
            &eso(64.0, 0.0, 0.0),
            &eso(130.0, 0.0, 0.0),
            &td(65.0, 0.0),
            &td(130.0, 0.0),
            [0.0, 0.0],
            &g,
        );
        assert_relative_eq!(cmd.u_c1, 0.001, max_relative = 1e-12);
    }

    #[test]
    fn minus_convention_flips_only_the_derivative_term() {
        let mut g = table_gains();
        let args = (
            eso(64.0, 0.3, 0.0),
            eso(131.0, -0.2, 0.0),
            td(65.0, 0.1),
            td(130.0, 0.0),
            [0.5, -0.4],
        );
        let plus = adrc_command(&args.0, &args.1, &args.2, &args.3, args.4, &g);
        g.pd_sign = PdSign::Minus;
        let minus = adrc_command(&args.0, &args.1, &args.2, &args.3, args.4, &g);
        let d1 = g.k12 * (args.2.v2 - args.0.z2);
        let d2 = g.k22 * (args.3.v2 - args.1.z2);
        assert_relative_eq!(plus.u_c1 - minus.u_c1, 2.0 * d1, max_relative = 1e-12);
        assert_relative_eq!(plus.u_c2 - minus.u_c2, 2.0 * d2, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn law_is_affine_in_its_inputs(
            a in -3.0f64..3.0,
            z1a in -5.0f64..5.0, z2a in -5.0f64..5.0, z3a in -5.0f64..5.0,
            z1b in -5.0f64..5.0, z2b in -5.0f64..5.0, z3b in -5.0f64..5.0,
            g1 in -5.0f64..5.0, g2 in -5.0f64..5.0,
        ) {
            // With the trims at zero the map inputs -> (u_c, U) is linear;
            // check superposition on the chamber-1 channel.
            let g = table_gains();
            let t0 = td(0.0, 0.0);
            let run = |z: EsoState, grad: [f64; 2]| {
                adrc_command(&z, &eso(0.0, 0.0, 0.0), &t0, &t0, grad, &g)
            };
            let ca = run(eso(z1a, z2a, z3a), [g1, 0.0]);
            let cb = run(eso(z1b, z2b, z3b), [g2, 0.0]);
            let cc = run(
                eso(a * z1a + z1b, a * z2a + z2b, a * z3a + z3b),
                [a * g1 + g2, 0.0],
            );
            prop_assert!((cc.u_c1 - (a * ca.u_c1 + cb.u_c1)).abs() < 1e-9);
            prop_assert!((cc.u1 - (a * ca.u1 + cb.u1)).abs() < 1e-9);
        }

        #[test]
        fn allocation_conserves_the_chamber2_command(
            u1 in -0.5f64..0.5, u2 in -0.5f64..0.5, rho in 0.0f64..1.0
        ) {
            let trim = ValveCommandSet { vp_air: 0.1, vp1: 0.3, vp2: 0.3 };
            let c = allocate_valves(u1, u2, &trim, rho);
            prop_assert!((c.vp1 + c.vp2 - (trim.vp1 + trim.vp2) - u2).abs() < 1e-12);
            prop_assert!((c.vp_air - trim.vp_air - u1).abs() < 1e-12);
        }
    }

    #[test]
    fn allocation_returns_trim_for_zero_commands() {
        let trim = ValveCommandSet { vp_air: 0.12, vp1: 0.27, vp2: 0.27 };
        assert_eq!(allocate_valves(0.0, 0.0, &trim, 0.5), trim);
    }

    #[test]
    fn allocation_splits_by_rho() {
        let trim = ValveCommandSet::default();
        let c = allocate_valves(0.0, 0.1, &trim, 0.5);
        assert_relative_eq!(c.vp1, 0.05, max_relative = 1e-12);
        assert_relative_eq!(c.vp2, 0.05, max_relative = 1e-12);
    }

    #[test]
    fn saturation_clamps_and_flags() {
        let prev = ValveCommandSet { vp_air: 0.5, vp1: 0.5, vp2: 0.5 };
        let want = ValveCommandSet { vp_air: -3.0, vp1: 1.2, vp2: 0.5 };
        let (out, flags) = saturate_and_rate_limit(&want, &prev, 10.0, 0.4);
        // Generous slew budget: only the [0, 1] clamp acts.
        assert_eq!(out.vp_air, 0.0);
        assert_eq!(out.vp1, 1.0);
        assert_eq!(out.vp2, 0.5);
        assert!(flags.air && flags.v1 && !flags.v2);
    }

    #[test]
    fn rate_limit_bounds_the_per_tick_move() {
        let prev = ValveCommandSet::default();
        let want = ValveCommandSet { vp_air: 1.0, vp1: 1.0, vp2: 1.0 };
        let (out, flags) = saturate_and_rate_limit(&want, &prev, 0.01, 0.4);
        assert_relative_eq!(out.vp_air, 0.004, max_relative = 1e-12);
        assert_relative_eq!(out.vp1, 0.004, max_relative = 1e-12);
        assert!(flags.any());
    }

    #[test]
    fn in_range_slow_commands_pass_through() {
        let prev = ValveCommandSet { vp_air: 0.30, vp1: 0.30, vp2: 0.30 };
        let want = ValveCommandSet { vp_air: 0.301, vp1: 0.299, vp2: 0.3 };
        let (out, flags) = saturate_and_rate_limit(&want, &prev, 0.01, 0.4);
        assert_eq!(out, want);
        assert!(!flags.any());
    }

    #[test]
    fn compensated_loop_matches_disturbance_free_reference() {
        // Linear test plant y'' = b u + f with perfect disturbance knowledge
        // and the true effectiveness: the closed loop must match the
        // disturbance-free double integrator under the same PD law within 1%.
        let b = 37.0;
        let kp = 2.0;
        let kd = 2.0;
        let dt = 0.001;
        let steps = 20_000;
        let setpoint = 1.0;
        let f_dist = |t: f64| 4.0 * (0.7 * t).sin() + 2.0;

        let simulate = |with_disturbance: bool| -> Vec<f64> {
            let (mut y, mut ydot) = (0.0f64, 0.0f64);
            let mut out = Vec::with_capacity(steps);
            for k in 0..steps {
                let t = k as f64 * dt;
                let f = if with_disturbance { f_dist(t) } else { 0.0 };
                let u_c = kp * (setpoint - y) + kd * (0.0 - ydot);
                let u = if with_disturbance { (u_c - f) / b } else { u_c / b };
                let accel = b * u + f;
                ydot += dt * accel;
                y += dt * ydot;
                out.push(y);
            }
            out
        };

        let compensated = simulate(true);
        let reference = simulate(false);
        for (a, r) in compensated.iter().zip(reference.iter()) {
            assert!((a - r).abs() <= 0.01 * setpoint, "trajectories diverged: {a} vs {r}");
        }
    }

    #[test]
    fn pid_zero_error_returns_trim() {
        let mut pid = PidLoop::new(PidGains::new(0.5, 0.1, 0.05, 0.3));
        let out = pid.step(65.0, 65.0, 0.27, 0.01);
        assert_eq!(out, 0.27);
    }

    #[test]
    fn pid_proportional_only() {
        let mut pid = PidLoop::new(PidGains::new(0.02, 0.0, 0.0, 0.3));
        let out = pid.step(66.0, 65.0, 0.3, 0.01);
        assert_relative_eq!(out, 0.3 + 0.02, max_relative = 1e-12);
        // Constant error: same command every step with ki = 0.
        let again = pid.step(66.0, 65.0, 0.3, 0.01);
        assert_relative_eq!(again, 0.32, max_relative = 1e-12);
    }

    #[test]
    fn pid_zero_gains_pass_trim_through() {
        let mut pid = PidLoop::new(PidGains::new(0.0, 0.0, 0.0, 0.3));
        for k in 0..50 {
            let out = pid.step(100.0, 65.0 + k as f64, 0.27, 0.01);
            assert_eq!(out, 0.27);
        }
    }

    #[test]
    fn pid_integral_freezes_while_saturated() {
        let gains = PidGains::new(0.0, 5.0, 0.0, 10.0);
        let mut saturated = PidLoop::new(gains);
        // Error large enough to saturate immediately; the integral must not
        // accumulate while pinned.
        for _ in 0..100 {
            let out = saturated.step(100.0, 0.0, 0.5, 0.01);
            assert_eq!(out, 1.0);
        }
        // After the error flips, recovery must start immediately rather than
        // unwinding a wound-up integral: one step back under the limit.
        let out = saturated.step(-100.0, 0.0, 0.5, 0.01);
        assert!(out < 1.0, "integral wound up while saturated");
    }

    #[test]
    fn pid_derivative_acts_on_measurement() {
        let mut pid = PidLoop::new(PidGains::new(0.0, 0.0, 0.1, 0.3));
        pid.step(65.0, 65.0, 0.3, 0.01);
        // Measurement rising at 1 kPa per step: derivative term opposes it.
        let out = pid.step(65.0, 66.0, 0.3, 0.01);
        assert!(out < 0.3);
    }
}
