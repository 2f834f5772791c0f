use super::Run;
use crate::cache::encode_modal;
use crate::config::{IntegratorSection, SchemeChoice};
use crate::error::{CliError, Context};
use crate::model::{initial_state, Model};
use crate::output::{write_atomic, write_json, Cell, Table};
use serde::Serialize;
use spinfluid_core::dynamics::{fit_exponential_rate, integrate, RunStatus, Sample, Trajectory};
use spinfluid_core::equilibria::{distance_to_equilibria, nearest_equilibrium};
use spinfluid_core::spectrum::analyze;
use spinfluid_core::{IntegratorConfig, Scheme};
use std::path::PathBuf;

/// `max_t |a(t) − a(0)|` above this counts as leaving the initial rotation.
pub const ESCAPE_RADIUS: f64 = 1e-2;

pub fn integrator_config(sec: &IntegratorSection) -> IntegratorConfig {
    IntegratorConfig {
        scheme: match sec.scheme {
            SchemeChoice::Imex => Scheme::ImexMidpoint,
            SchemeChoice::ImexAdaptive => Scheme::ImexMidpointAdaptive,
        },
        dt: sec.dt,
        rtol: sec.rtol,
        sample_every: sec.sample_every,
        blowup_guard: sec.blowup_guard,
        ..IntegratorConfig::default()
    }
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct FitReport {
    pub window: f64,
    pub floor: f64,
    pub rate: Option<f64>,
    pub rate_std_error: Option<f64>,
    pub residual_rms: Option<f64>,
    pub samples: usize,
    pub error: Option<String>,
}

/// Log-linear fit over the trailing `window`, ignoring everything after the
/// series first drops below `floor` times its maximum (round-off territory).
pub fn fit_with_floor(series: &[(f64, f64)], window: f64, floor: f64) -> FitReport {
    let peak = series.iter().map(|s| s.1).fold(0.0, f64::max);
    let peak_at = series.iter().position(|s| s.1 == peak).unwrap_or(0);
    let cut = series[peak_at..]
        .iter()
        .position(|s| s.1 <= floor * peak)
        .map(|k| peak_at + k)
        .unwrap_or(series.len());
    let mut report = FitReport {
        window,
        floor,
        ..FitReport::default()
    };
    match fit_exponential_rate(&series[..cut], window) {
        Ok(fit) => {
            report.rate = Some(fit.rate);
            report.rate_std_error = Some(fit.rate_std_error);
            report.residual_rms = Some(fit.residual_rms);
            report.samples = fit.samples;
        }
        Err(e) => report.error = Some(e.to_string()),
    }
    report
}

#[derive(Clone, Debug, Serialize)]
pub struct StateSummary {
    pub t: f64,
    pub a: [f64; 3],
    pub abs_ia: f64,
    pub energy: f64,
    pub norm_c_m: f64,
}

impl From<&Sample> for StateSummary {
    fn from(s: &Sample) -> Self {
        Self {
            t: s.t,
            a: s.state.a,
            abs_ia: norm(s.momentum),
            energy: s.energy,
            norm_c_m: s.mass_norm,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct LimitReport {
    pub a_bar: [f64; 3],
    pub lambda: f64,
    pub distance: f64,
    pub is_max_family: bool,
    pub abs_ia_bar: f64,
    /// `| |𝕀ā| − |𝕀a(0)| |`.
    pub momentum_mismatch: f64,
    pub spectral_gap: Option<f64>,
    pub classification: Option<&'static str>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SimulationSummary {
    pub status: &'static str,
    pub steps: usize,
    pub rejected_steps: usize,
    pub dt: f64,
    pub n_modes: usize,
    pub moments: [f64; 3],
    pub start_equilibrium: Option<[f64; 3]>,
    pub initial: StateSummary,
    #[serde(rename = "final")]
    pub last: StateSummary,
    pub momentum_drift: f64,
    pub energy_max_increase: f64,
    pub energy_balance_residual: f64,
    pub max_deviation: f64,
    pub escaped: bool,
    pub limit: LimitReport,
    pub fit_norm_c_m: FitReport,
    pub fit_distance: FitReport,
    /// `−rate(‖c‖_M) / gap` at the limit equilibrium.
    pub rate_over_gap: Option<f64>,
}

pub struct Simulation {
    pub summary: SimulationSummary,
    pub trajectory: Trajectory,
}

fn norm(v: [f64; 3]) -> f64 {
    (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt()
}

pub fn compute(run: &Run) -> Result<Simulation, CliError> {
    let s = &run.scenario;
    let model = Model::build(s)?;
    let sys = model.system()?;
    let init = initial_state(s, &model, &sys)?;
    let config = integrator_config(&s.integrator);
    let horizon = s.integrator.horizon;
    let traj = integrate(&sys, &init.state, horizon, &config).context("integrate")?;

    let first = &traj.samples[0];
    let last = traj.last();
    let a0 = first.state.a;
    let max_deviation = traj
        .samples
        .iter()
        .map(|x| norm([x.state.a[0] - a0[0], x.state.a[1] - a0[1], x.state.a[2] - a0[2]]))
        .fold(0.0, f64::max);

    let inertia = model.inertia;
    let near = nearest_equilibrium(&inertia, last.state.a);
    let abs_ia_bar = norm(inertia.apply(near.point));
    let spectrum = if near.lambda > 0.0 && traj.status == RunStatus::Completed {
        Some(analyze(&sys, near.point).context("spectrum at the limit")?)
    } else {
        None
    };
    let limit = LimitReport {
        a_bar: near.point,
        lambda: near.lambda,
        distance: near.distance,
        is_max_family: near.lambda > 0.0 && inertia.coincide(near.lambda, inertia.max_moment()),
        abs_ia_bar,
        momentum_mismatch: (abs_ia_bar - norm(first.momentum)).abs(),
        spectral_gap: spectrum.as_ref().and_then(|r| r.spectral_gap),
        classification: spectrum.as_ref().map(|r| r.classification.as_str()),
    };

    let window = s.integrator.fit_window.unwrap_or(0.5 * horizon);
    let floor = s.integrator.fit_floor;
    let fit_norm_c_m = fit_with_floor(&traj.series(|x| x.mass_norm), window, floor);
    let fit_distance = fit_with_floor(
        &traj.series(|x| distance_to_equilibria(&inertia, x.state.a)),
        window,
        floor,
    );
    let rate_over_gap = match (fit_norm_c_m.rate, limit.spectral_gap) {
        (Some(rate), Some(gap)) if gap > 0.0 => Some(-rate / gap),
        _ => None,
    };

    let summary = SimulationSummary {
        status: match traj.status {
            RunStatus::Completed => "completed",
            RunStatus::Diverged => "diverged",
        },
        steps: traj.stats.steps,
        rejected_steps: traj.stats.rejected,
        dt: traj.dt,
        n_modes: model.ops.len(),
        moments: inertia.moments(),
        start_equilibrium: init.equilibrium.map(|e| e.a_star),
        initial: first.into(),
        last: last.into(),
        momentum_drift: traj.momentum_drift(),
        energy_max_increase: traj.max_energy_increase(),
        energy_balance_residual: traj.energy_balance_residual(),
        max_deviation,
        escaped: max_deviation > ESCAPE_RADIUS,
        limit,
        fit_norm_c_m,
        fit_distance,
        rate_over_gap,
    };
    Ok(Simulation {
        summary,
        trajectory: traj,
    })
}

pub fn trajectory_table(traj: &Trajectory) -> Table {
    let mut table = Table::new(&["t", "a1", "a2", "a3", "abs_Ia", "energy", "dissipation", "norm_c_M"]);
    for s in &traj.samples {
        table.push(vec![
            s.t.into(),
            s.state.a[0].into(),
            s.state.a[1].into(),
            s.state.a[2].into(),
            Cell::from(norm(s.momentum)),
            s.energy.into(),
            s.dissipation.into(),
            s.mass_norm.into(),
        ]);
    }
    table
}

/// Writes every output, then reports a tripped blow-up guard as an error.
pub fn execute(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let sim = compute(run)?;
    let mut written = Vec::new();
    if run.scenario.output.trajectory {
        written.push(trajectory_table(&sim.trajectory).write(&run.out, "trajectory", run.format, &run.header)?);
    }
    if run.scenario.output.modal_dump {
        let path = run.out.join("modal.bin");
        write_atomic(&path, &encode_modal(&sim.trajectory, &run.header.scenario_hash))?;
        written.push(path);
    }
    let path = run.out.join("summary.json");
    write_json(&path, &run.header, &sim.summary)?;
    written.push(path);
    if sim.trajectory.status == RunStatus::Diverged {
        return Err(CliError::BlowUp { t: sim.trajectory.last().t });
    }
    Ok(written)
}
