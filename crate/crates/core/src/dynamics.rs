//! Time evolution of the Galerkin system and its conserved / dissipated
//! quantities.
//!
//! In modal form the equations of motion read
//!
//! ```text
//! (M − Rᵀ𝕀⁻¹R) ċ + Rᵀ ȧ = −ν S c − T·c·c − 2 Σ_k (a − ω)_k C_k c
//!                  𝕀 ȧ = −(a − ω) × 𝕀a,          ω = 𝕀⁻¹ R c
//! ```
//!
//! The total angular momentum `m = 𝕀a` obeys `ṁ = m × (a − ω)`, a pure
//! rotation, so `|m|` is conserved. The available energy
//! `½[cᵀMc − (𝕀ω|ω) + (𝕀a|a)]` decays at the rate `ν cᵀSc`.
//!
//! The default integrator is a two-stage IMEX scheme of order two: the Stokes
//! term is treated implicitly (Crank–Nicolson, one Cholesky factorisation per
//! step size), the bilinear terms explicitly at a predicted midpoint, and the
//! momentum is advanced by an exact rotation about the midpoint relative
//! angular velocity, which keeps `|𝕀a|` constant to rounding.

use crate::assembly::CoupledSystem;
use crate::error::{Error, FitError, Result};
use crate::vec3::{cross, dot, norm, sub};
use alloc::vec::Vec;
use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use num_traits::Float;

#[derive(Clone, Debug, PartialEq)]
pub struct State {
    /// Modal coefficients, `v = Σ c_j b_j`.
    pub c: DVector<f64>,
    /// Angular velocity of the body.
    pub a: [f64; 3],
    pub t: f64,
}

impl State {
    pub fn new(c: DVector<f64>, a: [f64; 3], t: f64) -> Self {
        Self { c, a, t }
    }

    /// Fluid at relative rest.
    pub fn rigid(n: usize, a: [f64; 3]) -> Self {
        Self::new(DVector::zeros(n), a, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite()) && self.a.iter().all(|v| v.is_finite()) && self.t.is_finite()
    }

    fn check(&self, sys: &CoupledSystem<'_>) -> Result<()> {
        if self.c.len() != sys.len() {
            return Err(Error::DimensionMismatch {
                expected: sys.len(),
                got: self.c.len(),
            });
        }
        if !self.is_finite() {
            return Err(Error::InvalidParameter("state has non-finite entries".into()));
        }
        Ok(())
    }
}

/// Everything but the Stokes term on the fluid side:
/// `−T·c·c − 2 Σ_k (a − ω)_k C_k c`.
fn fluid_transport(sys: &CoupledSystem<'_>, c: &DVector<f64>, a: [f64; 3]) -> DVector<f64> {
    let ops = sys.ops();
    let relative = sub(a, sys.omega(c));
    let mut out = ops.convective_apply(c, c);
    out.gemv(2.0, &ops.coriolis_matrix(relative), c, 1.0);
    -out
}

/// Right-hand sides `(fluid, body)` of `E u̇ = …`.
pub fn loads(sys: &CoupledSystem<'_>, c: &DVector<f64>, a: [f64; 3]) -> (DVector<f64>, [f64; 3]) {
    let mut fluid = fluid_transport(sys, c, a);
    fluid.gemv(-sys.viscosity(), sys.ops().stiffness(), c, 1.0);
    let relative = sub(a, sys.omega(c));
    let body = cross(sys.inertia().apply(a), relative);
    (fluid, body)
}

/// Time derivative `(ċ, ȧ)`.
pub fn rhs(sys: &CoupledSystem<'_>, state: &State) -> Result<(DVector<f64>, [f64; 3])> {
    state.check(sys)?;
    let (fluid, body) = loads(sys, &state.c, state.a);
    Ok(sys.eblocks().solve(&fluid, body))
}

/// Available energy `½[cᵀMc − (𝕀ω|ω) + (𝕀a|a)]`.
pub fn energy(sys: &CoupledSystem<'_>, state: &State) -> f64 {
    let c = &state.c;
    let kinetic = c.dot(&(sys.ops().mass() * c));
    let omega = sys.omega(c);
    let inertia = sys.inertia();
    0.5 * (kinetic - dot(inertia.apply(omega), omega) + dot(inertia.apply(state.a), state.a))
}

/// `ν cᵀSc = ν ∫|∇v|²`.
pub fn dissipation(sys: &CoupledSystem<'_>, state: &State) -> f64 {
    sys.viscosity() * state.c.dot(&(sys.ops().stiffness() * &state.c))
}

/// Total angular momentum `𝕀a`.
pub fn momentum(sys: &CoupledSystem<'_>, state: &State) -> [f64; 3] {
    sys.inertia().apply(state.a)
}

/// `‖c‖_M = (cᵀMc)^{1/2}`, the L² norm of the relative velocity.
pub fn mass_norm(sys: &CoupledSystem<'_>, c: &DVector<f64>) -> f64 {
    c.dot(&(sys.ops().mass() * c)).max(0.0).sqrt()
}

/// Rotation of `m` by the rotation vector `phi` (Rodrigues).
fn rotate(m: [f64; 3], phi: [f64; 3]) -> [f64; 3] {
    let theta = norm(phi);
    if theta == 0.0 {
        return m;
    }
    let k = [phi[0] / theta, phi[1] / theta, phi[2] / theta];
    let (s, c) = theta.sin_cos();
    let km = cross(k, m);
    let kdm = dot(k, m) * (1.0 - c);
    [
        m[0] * c + km[0] * s + k[0] * kdm,
        m[1] * c + km[1] * s + k[1] * kdm,
        m[2] * c + km[2] * s + k[2] * kdm,
    ]
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scheme {
    /// Fixed-step second-order IMEX midpoint scheme.
    ImexMidpoint,
    /// The same scheme with step-doubling error control.
    ImexMidpointAdaptive,
}

impl Scheme {
    pub fn order(&self) -> u32 {
        2
    }
}

/// `ν λ_max(M⁻¹S) Δt` never exceeds this for the default step.
pub const DEFAULT_STIFFNESS_NUMBER: f64 = 10.0;
/// Upper bound on the default step, set by the rigid-body time scale.
pub const DEFAULT_MAX_STEP: f64 = 1e-2;
pub const DEFAULT_RTOL: f64 = 1e-8;
pub const DEFAULT_BLOWUP_GUARD: f64 = 1e6;
/// Target number of recorded samples per run.
pub const DEFAULT_SAMPLES: f64 = 2000.0;

#[derive(Clone, Debug, PartialEq)]
pub struct IntegratorConfig {
    pub scheme: Scheme,
    /// Fixed step (or initial step in adaptive mode); `None` picks the default.
    pub dt: Option<f64>,
    /// Relative tolerance of the adaptive mode; also the slack unit of the
    /// energy-monotonicity check.
    pub rtol: f64,
    /// Record every `sample_every`-th step; `None` derives it from the horizon.
    pub sample_every: Option<usize>,
    /// `‖c‖ + |a|` above this aborts the run.
    pub blowup_guard: f64,
    pub min_dt: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::ImexMidpoint,
            dt: None,
            rtol: DEFAULT_RTOL,
            sample_every: None,
            blowup_guard: DEFAULT_BLOWUP_GUARD,
            min_dt: 1e-12,
        }
    }
}

/// `min(10 / (ν λ_max(M⁻¹S)), 10⁻²)`.
pub fn default_step(sys: &CoupledSystem<'_>) -> f64 {
    let stiff = sys.viscosity() * sys.ops().stiffness_radius();
    (DEFAULT_STIFFNESS_NUMBER / stiff).min(DEFAULT_MAX_STEP)
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub state: State,
    pub energy: f64,
    pub momentum: [f64; 3],
    pub dissipation: f64,
    pub mass_norm: f64,
}

impl Sample {
    pub fn of(sys: &CoupledSystem<'_>, state: &State) -> Self {
        Self {
            t: state.t,
            energy: energy(sys, state),
            momentum: momentum(sys, state),
            dissipation: dissipation(sys, state),
            mass_norm: mass_norm(sys, &state.c),
            state: state.clone(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct IntegratorStats {
    pub steps: usize,
    pub rejected: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    /// The blow-up guard tripped; the trajectory ends at the offending state.
    Diverged,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub stats: IntegratorStats,
    pub status: RunStatus,
    /// Step of the fixed-step scheme, or the last accepted step.
    pub dt: f64,
}

impl Trajectory {
    pub fn last(&self) -> &Sample {
        self.samples.last().expect("a trajectory has at least one sample")
    }

    /// Largest `| |𝕀a(t)| − |𝕀a(0)| | / |𝕀a(0)|` over the samples; absolute
    /// when the initial momentum vanishes.
    pub fn momentum_drift(&self) -> f64 {
        let m0 = norm(self.samples[0].momentum);
        let scale = if m0 > 0.0 { m0 } else { 1.0 };
        self.samples
            .iter()
            .map(|s| (norm(s.momentum) - m0).abs() / scale)
            .fold(0.0, f64::max)
    }

    /// Largest energy increase between consecutive samples.
    pub fn max_energy_increase(&self) -> f64 {
        self.samples
            .windows(2)
            .map(|w| w[1].energy - w[0].energy)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `|E(t_end) − E(t_0) + ∫ ν cᵀSc dt|` with the dissipation integral taken
    /// by the trapezoidal rule over the samples.
    pub fn energy_balance_residual(&self) -> f64 {
        let dissipated: f64 = self
            .samples
            .windows(2)
            .map(|w| 0.5 * (w[1].t - w[0].t) * (w[0].dissipation + w[1].dissipation))
            .sum();
        let first = &self.samples[0];
        (self.last().energy - first.energy + dissipated).abs()
    }

    /// `(t, value)` pairs of a per-sample quantity.
    pub fn series<F: Fn(&Sample) -> f64>(&self, f: F) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.t, f(s))).collect()
    }
}

struct ImexStepper<'s, 'a> {
    sys: &'s CoupledSystem<'a>,
    dt: f64,
    implicit: Cholesky<f64, Dyn>,
    explicit: DMatrix<f64>,
}

impl<'s, 'a> ImexStepper<'s, 'a> {
    fn new(sys: &'s CoupledSystem<'a>, dt: f64) -> Self {
        let half = 0.5 * dt * sys.viscosity();
        let reduced = sys.eblocks().fluid_block();
        let stiffness = sys.ops().stiffness();
        let implicit = Cholesky::new(reduced + stiffness * half)
            .expect("sum of positive definite matrices is positive definite");
        Self {
            sys,
            dt,
            implicit,
            explicit: reduced - stiffness * half,
        }
    }

    fn step(&self, state: &State) -> State {
        let sys = self.sys;
        let h = self.dt;
        let inertia = sys.inertia();
        let coupling_t = sys.eblocks().coupling_block();
        let reduced = sys.eblocks().fluid_block();

        let c0 = &state.c;
        let a0 = state.a;
        let m0 = inertia.apply(a0);

        // predictor: half step, backward Euler on the Stokes term
        let rel0 = sub(a0, sys.omega(c0));
        let a_half = inertia.solve(rotate(m0, [-0.5 * h * rel0[0], -0.5 * h * rel0[1], -0.5 * h * rel0[2]]));
        let mut rhs = reduced * c0;
        rhs.gemv(-1.0, coupling_t, &DVector::from_row_slice(&sub(a_half, a0)), 1.0);
        rhs.axpy(0.5 * h, &fluid_transport(sys, c0, a0), 1.0);
        let c_half = self.implicit.solve(&rhs);

        // corrector: full step with midpoint explicit terms, Crank–Nicolson Stokes
        let rel_half = sub(a_half, sys.omega(&c_half));
        let a1 = inertia.solve(rotate(m0, [-h * rel_half[0], -h * rel_half[1], -h * rel_half[2]]));
        let mut rhs = &self.explicit * c0;
        rhs.gemv(-1.0, coupling_t, &DVector::from_row_slice(&sub(a1, a0)), 1.0);
        rhs.axpy(h, &fluid_transport(sys, &c_half, a_half), 1.0);
        let c1 = self.implicit.solve(&rhs);

        State::new(c1, a1, state.t + h)
    }
}

fn size(state: &State) -> f64 {
    state.c.norm() + norm(state.a)
}

/// Advances `state0` over `horizon` time units.
pub fn integrate(
    sys: &CoupledSystem<'_>,
    state0: &State,
    horizon: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    state0.check(sys)?;
    if !(horizon.is_finite() && horizon > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!(
            "horizon must be positive, got {horizon}"
        )));
    }
    let dt0 = config.dt.unwrap_or_else(|| default_step(sys));
    if !(dt0.is_finite() && dt0 > 0.0) {
        return Err(Error::InvalidParameter(alloc::format!("invalid step {dt0}")));
    }
    match config.scheme {
        Scheme::ImexMidpoint => integrate_fixed(sys, state0, horizon, dt0, config),
        Scheme::ImexMidpointAdaptive => integrate_adaptive(sys, state0, horizon, dt0, config),
    }
}

fn integrate_fixed(
    sys: &CoupledSystem<'_>,
    state0: &State,
    horizon: f64,
    dt_max: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let steps = (horizon / dt_max).ceil().max(1.0) as usize;
    let dt = horizon / steps as f64;
    if dt < config.min_dt {
        return Err(Error::StepSizeUnderflow { t: state0.t, dt });
    }
    let every = config
        .sample_every
        .unwrap_or_else(|| ((horizon / DEFAULT_SAMPLES / dt).floor() as usize).max(1));
    let stepper = ImexStepper::new(sys, dt);
    let t0 = state0.t;

    let mut samples = alloc::vec![Sample::of(sys, state0)];
    let mut state = state0.clone();
    let mut status = RunStatus::Completed;
    for k in 1..=steps {
        state = stepper.step(&state);
        // pin the clock to avoid accumulating rounding in t
        state.t = t0 + k as f64 * dt;
        let blown = !state.is_finite() || size(&state) > config.blowup_guard;
        if blown || k % every == 0 || k == steps {
            samples.push(Sample::of(sys, &state));
        }
        if blown {
            status = RunStatus::Diverged;
            break;
        }
    }
    Ok(Trajectory {
        samples,
        stats: IntegratorStats {
            steps,
            rejected: 0,
        },
        status,
        dt,
    })
}

fn integrate_adaptive(
    sys: &CoupledSystem<'_>,
    state0: &State,
    horizon: f64,
    dt0: f64,
    config: &IntegratorConfig,
) -> Result<Trajectory> {
    let t_end = state0.t + horizon;
    let sample_spacing = horizon / DEFAULT_SAMPLES;
    let atol = config.rtol * (size(state0).max(1e-300));
    let mut samples = alloc::vec![Sample::of(sys, state0)];
    let mut next_sample = state0.t + sample_spacing;
    let mut state = state0.clone();
    let mut dt = dt0.min(horizon);
    let mut stats = IntegratorStats::default();
    let mut status = RunStatus::Completed;
    let mut accepted_since_sample = 0usize;

    while state.t < t_end {
        let h = dt.min(t_end - state.t);
        if h < config.min_dt {
            return Err(Error::StepSizeUnderflow { t: state.t, dt: h });
        }
        let full = ImexStepper::new(sys, h).step(&state);
        let half = ImexStepper::new(sys, 0.5 * h);
        let fine = half.step(&half.step(&state));

        let mut err2 = 0.0;
        let mut count = 0.0;
        for (x, y) in fine.c.iter().zip(full.c.iter()) {
            let sc = atol + config.rtol * x.abs().max(y.abs());
            err2 += ((x - y) / sc).powi(2);
            count += 1.0;
        }
        for d in 0..3 {
            let sc = atol + config.rtol * fine.a[d].abs().max(full.a[d].abs());
            err2 += ((fine.a[d] - full.a[d]) / sc).powi(2);
            count += 1.0;
        }
        // Richardson: the local error of the fine solution is (fine − full)/3
        let err = (err2 / count).sqrt() / 3.0;
        let factor = if err == 0.0 {
            2.0
        } else {
            (0.9 * err.powf(-1.0 / 3.0)).clamp(0.2, 2.0)
        };
        if err <= 1.0 {
            stats.steps += 1;
            // no extrapolation: the fine pair keeps |𝕀a| exact
            state = fine;
            accepted_since_sample += 1;
            let blown = !state.is_finite() || size(&state) > config.blowup_guard;
            let due = match config.sample_every {
                Some(every) => accepted_since_sample >= every,
                None => state.t >= next_sample,
            };
            if blown || due || state.t >= t_end {
                samples.push(Sample::of(sys, &state));
                accepted_since_sample = 0;
                while next_sample <= state.t {
                    next_sample += sample_spacing;
                }
            }
            if blown {
                status = RunStatus::Diverged;
                break;
            }
        } else {
            stats.rejected += 1;
        }
        dt = h * factor;
    }
    Ok(Trajectory {
        samples,
        stats,
        status,
        dt,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialFit {
    /// Slope of `log(value)`; negative for decay.
    pub rate: f64,
    pub intercept: f64,
    /// Standard error of the slope.
    pub rate_std_error: f64,
    /// RMS residual of the log-linear fit.
    pub residual_rms: f64,
    pub samples: usize,
}

pub const MIN_FIT_SAMPLES: usize = 10;

/// Least-squares slope of `log(value)` against `t` over the trailing
/// `window` time units of `series`.
pub fn fit_exponential_rate(series: &[(f64, f64)], window: f64) -> Result<ExponentialFit> {
    let t_last = series.last().map(|s| s.0).unwrap_or(0.0);
    let picked: Vec<(f64, f64)> = series
        .iter()
        .copied()
        .filter(|(t, _)| *t >= t_last - window)
        .collect();
    if picked.len() < MIN_FIT_SAMPLES {
        return Err(Error::Fit(FitError::TooFewSamples {
            got: picked.len(),
            needed: MIN_FIT_SAMPLES,
        }));
    }
    if picked.iter().any(|(_, v)| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::Fit(FitError::NonPositive));
    }
    let n = picked.len() as f64;
    let logs: Vec<(f64, f64)> = picked.iter().map(|&(t, v)| (t, v.ln())).collect();
    let tm = logs.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = logs.iter().map(|p| p.1).sum::<f64>() / n;
    let stt: f64 = logs.iter().map(|p| (p.0 - tm).powi(2)).sum();
    let syy: f64 = logs.iter().map(|p| (p.1 - ym).powi(2)).sum();
    let sty: f64 = logs.iter().map(|p| (p.0 - tm) * (p.1 - ym)).sum();
    if stt == 0.0 || syy == 0.0 {
        return Err(Error::Fit(FitError::Degenerate));
    }
    let rate = sty / stt;
    let intercept = ym - rate * tm;
    let sse: f64 = logs
        .iter()
        .map(|p| (p.1 - intercept - rate * p.0).powi(2))
        .sum();
    let dof = (n - 2.0).max(1.0);
    Ok(ExponentialFit {
        rate,
        intercept,
        rate_std_error: (sse / dof / stt).sqrt(),
        residual_rms: (sse / n).sqrt(),
        samples: picked.len(),
    })
}
