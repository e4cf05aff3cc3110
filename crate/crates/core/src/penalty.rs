//! Exterior exponential-penalty formulation of the pressure-band constraints.
//!
//! The objective is the squared distance of the two chamber pressures from
//! their setpoints; each constraint keeps one pressure inside a band around
//! its center. Violations are penalized by `(exp(max(0, eta * g)) - 1)^2`
//! scaled by a growing penalty factor, which keeps the augmented objective
//! identical to the plain objective everywhere inside the feasible set and
//! continuously differentiable across its boundary.

use thiserror::Error;

/// Exponent cap applied inside the penalty to avoid non-finite intermediates.
const EXP_CLAMP: f64 = 700.0;
/// Consecutive ascent steps tolerated before the solver reports divergence.
const DIVERGENCE_RUN: usize = 50;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum PenaltyError {
    #[error("invalid penalty parameter {what}: {value}")]
    BadParameter { what: &'static str, value: f64 },
    #[error("gradient iteration diverged at iter {iter} (L = {l:.6e}); reduce the learning rate")]
    Diverged { iter: usize, l: f64 },
}

/// Setpoints, constraint bands, and solver tuning for the coordination
/// problem over the pair of chamber pressures (all pressures in kPa).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PenaltyProblem {
    /// Objective centers.
    pub p1_set: f64,
    pub p2_set: f64,
    /// Constraint band centers (default equal to the setpoints).
    pub c1: f64,
    pub c2: f64,
    /// Allowed deviations from the band centers.
    pub eps1: f64,
    pub eps2: f64,
    /// Penalty factor.
    pub gamma: f64,
    /// Per-constraint tuning weights eta = [mu, sigma].
    pub mu: f64,
    pub sigma: f64,
    /// Gradient learning rate.
    pub lr: f64,
    /// Penalty growth factor per iteration (1 = fixed penalty).
    pub omega: f64,
    /// Termination threshold on gamma * alpha.
    pub xi: f64,
    /// Cap on the penalty factor.
    pub gamma_max: f64,
    /// Iteration budget.
    pub max_iters: usize,
    /// Step-norm convergence tolerance.
    pub step_tol: f64,
}

impl PenaltyProblem {
    /// Problem with constraint bands centered on the setpoints and the
    /// documented default tuning.
    pub fn new(p1_set: f64, p2_set: f64, eps1: f64, eps2: f64) -> Self {
        Self {
            p1_set,
            p2_set,
            c1: p1_set,
            c2: p2_set,
            eps1,
            eps2,
            gamma: 0.5,
            mu: 0.001,
            sigma: 0.01,
            lr: 0.2,
            omega: 2.0,
            xi: 1e-6,
            gamma_max: 1e8,
            max_iters: 10_000,
            step_tol: 1e-9,
        }
    }

    pub fn validate(&self) -> Result<(), PenaltyError> {
        let checks = [
            ("gamma", self.gamma, self.gamma > 0.0),
            ("mu", self.mu, self.mu > 0.0),
            ("sigma", self.sigma, self.sigma > 0.0),
            ("eps1", self.eps1, self.eps1 > 0.0),
            ("eps2", self.eps2, self.eps2 > 0.0),
            ("lr", self.lr, self.lr > 0.0),
            ("omega", self.omega, self.omega >= 1.0),
            ("xi", self.xi, self.xi > 0.0),
            ("gamma_max", self.gamma_max, self.gamma_max >= self.gamma),
            ("step_tol", self.step_tol, self.step_tol > 0.0),
        ];
        for (what, value, ok) in checks {
            if !ok {
                return Err(PenaltyError::BadParameter { what, value });
            }
        }
        Ok(())
    }

    /// Squared-distance objective.
    pub fn objective(&self, p1: f64, p2: f64) -> f64 {
        (p1 - self.p1_set).powi(2) + (p2 - self.p2_set).powi(2)
    }

    /// Band constraints; `g_i <= 0` iff the pressure is within its band.
    pub fn constraint_values(&self, p1: f64, p2: f64) -> (f64, f64) {
        (
            (p1 - self.c1).powi(2) - self.eps1 * self.eps1,
            (p2 - self.c2).powi(2) - self.eps2 * self.eps2,
        )
    }

    /// Exterior penalty; zero iff both constraints hold. The second value
    /// reports whether the exponent cap engaged.
    pub fn penalty_alpha(&self, p1: f64, p2: f64) -> (f64, bool) {
        let (g1, g2) = self.constraint_values(p1, p2);
        let mut saturated = false;
        let mut term = |eta: f64, g: f64| {
            let mut m = (eta * g).max(0.0);
            if m > EXP_CLAMP {
                m = EXP_CLAMP;
                saturated = true;
            }
            (m.exp() - 1.0).powi(2)
        };
        let alpha = term(self.mu, g1) + term(self.sigma, g2);
        (alpha, saturated)
    }

    /// Augmented objective `L = f + gamma * alpha`.
    pub fn augmented(&self, p1: f64, p2: f64) -> f64 {
        let (alpha, _) = self.penalty_alpha(p1, p2);
        self.objective(p1, p2) + self.gamma * alpha
    }

    /// Analytic gradient of the augmented objective.
    ///
    /// The penalty is C1 across the band boundary: the exterior factor
    /// `(exp(m) - 1)` vanishes exactly at `g = 0`, so the one-sided
    /// derivative there is zero on both sides.
    pub fn grad(&self, p1: f64, p2: f64) -> [f64; 2] {
        let (g1, g2) = self.constraint_values(p1, p2);
        let pen_d = |eta: f64, g: f64, dev: f64| {
            if g <= 0.0 {
                return 0.0;
            }
            let m = (eta * g).min(EXP_CLAMP);
            let e = m.exp();
            self.gamma * 2.0 * (e - 1.0) * e * eta * 2.0 * dev
        };
        [
            2.0 * (p1 - self.p1_set) + pen_d(self.mu, g1, p1 - self.c1),
            2.0 * (p2 - self.p2_set) + pen_d(self.sigma, g2, p2 - self.c2),
        ]
    }
}

/// Why the offline solve stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveStatus {
    /// Step norm fell below the tolerance.
    Converged,
    /// Iteration budget exhausted.
    MaxIters,
    /// The active penalty contribution fell below xi.
    PenaltyBelowXi,
}

/// One recorded iterate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveIterate {
    pub iter: usize,
    pub p1: f64,
    pub p2: f64,
    pub l: f64,
    pub f: f64,
    pub alpha: f64,
    pub gamma: f64,
}

/// Full iterate history of one offline solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveTrace {
    pub iterates: Vec<SolveIterate>,
    pub status: SolveStatus,
}

impl SolveTrace {
    pub fn last(&self) -> &SolveIterate {
        self.iterates.last().expect("trace records at least the start point")
    }
}

/// Gradient iteration on the augmented objective with a growing penalty.
///
/// Each iteration takes one componentwise gradient step `P <- P - lr * grad L`
/// and then multiplies the penalty factor by `omega` (capped at `gamma_max`).
/// Termination: step-norm convergence, the iteration budget, or an *active*
/// penalty contribution below `xi` (`0 < gamma * alpha < xi`). A feasible
/// iterate has `alpha = 0` exactly and keeps descending the plain objective;
/// terminating there would strand the solve far from the optimum.
pub fn solve_offline(
    prob: &PenaltyProblem,
    start: (f64, f64),
) -> Result<SolveTrace, PenaltyError> {
    prob.validate()?;
    let mut work = *prob;
    let (mut p1, mut p2) = start;
    let mut iterates = Vec::new();
    let record = |work: &PenaltyProblem, iter: usize, p1: f64, p2: f64| {
        let f = work.objective(p1, p2);
        let (alpha, _) = work.penalty_alpha(p1, p2);
        SolveIterate { iter, p1, p2, l: f + work.gamma * alpha, f, alpha, gamma: work.gamma }
    };
    iterates.push(record(&work, 0, p1, p2));

    let mut ascent_run = 0usize;
    let mut last_l = iterates[0].l;
    for iter in 1..=work.max_iters {
        let g = work.grad(p1, p2);
        let step1 = work.lr * g[0];
        let step2 = work.lr * g[1];
        p1 -= step1;
        p2 -= step2;

        let it = record(&work, iter, p1, p2);
        let gamma_alpha = it.gamma * it.alpha;
        iterates.push(it);

        if it.l > last_l {
            ascent_run += 1;
            if ascent_run >= DIVERGENCE_RUN {
                return Err(PenaltyError::Diverged { iter, l: it.l });
            }
        } else {
            ascent_run = 0;
        }
        last_l = it.l;

        if (step1 * step1 + step2 * step2).sqrt() < work.step_tol {
            return Ok(SolveTrace { iterates, status: SolveStatus::Converged });
        }
        if it.alpha > 0.0 && gamma_alpha < work.xi {
            return Ok(SolveTrace { iterates, status: SolveStatus::PenaltyBelowXi });
        }
        work.gamma = (work.gamma * work.omega).min(work.gamma_max);
    }
    Ok(SolveTrace { iterates, status: SolveStatus::MaxIters })
}

/// Per-tick coordination: evaluates the augmented-objective gradient at the
/// observer's pressure estimates and schedules the penalty factor, growing it
/// while constraints stay violated and resetting it after a sustained
/// feasible stretch.
#[derive(Debug, Clone, PartialEq)]
pub struct Coordinator {
    prob: PenaltyProblem,
    gamma0: f64,
    /// Band-center offsets from the setpoints, preserved under retargeting.
    dc1: f64,
    dc2: f64,
    /// Violation ticks between penalty growth events.
    pub n_grow: u32,
    /// Feasible ticks required before the penalty resets.
    pub m_reset: u32,
    violation_ticks: u32,
    feasible_ticks: u32,
}

impl Coordinator {
    pub fn new(prob: PenaltyProblem, n_grow: u32, m_reset: u32) -> Result<Self, PenaltyError> {
        prob.validate()?;
        Ok(Self {
            gamma0: prob.gamma,
            dc1: prob.c1 - prob.p1_set,
            dc2: prob.c2 - prob.p2_set,
            prob,
            n_grow,
            m_reset,
            violation_ticks: 0,
            feasible_ticks: 0,
        })
    }

    /// Move the objective centers (and band centers with their configured
    /// offsets) to track the scenario setpoints.
    pub fn set_targets(&mut self, p1_set: f64, p2_set: f64) {
        self.prob.p1_set = p1_set;
        self.prob.p2_set = p2_set;
        self.prob.c1 = p1_set + self.dc1;
        self.prob.c2 = p2_set + self.dc2;
    }

    /// One scheduler tick: update the penalty factor from the feasibility of
    /// the estimates, then return the gradient at the current factor.
    pub fn tick(&mut self, p1_est: f64, p2_est: f64) -> [f64; 2] {
        let (g1, g2) = self.prob.constraint_values(p1_est, p2_est);
        if g1 > 0.0 || g2 > 0.0 {
            self.feasible_ticks = 0;
            self.violation_ticks += 1;
            if self.n_grow > 0 && self.violation_ticks % self.n_grow == 0 {
                self.prob.gamma = (self.prob.gamma * self.prob.omega).min(self.prob.gamma_max);
            }
        } else {
            self.violation_ticks = 0;
            self.feasible_ticks = self.feasible_ticks.saturating_add(1);
            if self.feasible_ticks >= self.m_reset {
                self.prob.gamma = self.gamma0;
            }
        }
        self.prob.grad(p1_est, p2_est)
    }

    pub fn gamma(&self) -> f64 {
        self.prob.gamma
    }

    pub fn problem(&self) -> &PenaltyProblem {
        &self.prob
    }
}
