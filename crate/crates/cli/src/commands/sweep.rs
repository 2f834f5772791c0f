use super::Run;
use crate::commands::equilibria::verdict_str;
use crate::config::{AxisChoice, SweepSection};
use crate::error::{CliError, Context};
use crate::model::{cavity, inertia, rng, target_equilibrium, Model};
use crate::output::{write_json, Cell, Table};
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use spinfluid_core::equilibria::{reduced_hessian_test, Verdict};
use spinfluid_core::spectrum::{analyze, track_branch};
use spinfluid_core::{InertiaSpec, SpectrumReport};
use std::path::PathBuf;

#[derive(Clone, Debug, Serialize)]
pub struct CrossingSummary {
    pub mu1: f64,
    pub mu3: f64,
    pub a_star: [f64; 3],
    pub mu_cross: f64,
    pub branch_at_cross: f64,
    pub slope: f64,
    pub sign_change_at: Option<f64>,
    pub eps0_at_cross: f64,
    pub unstable_below: Vec<usize>,
    pub unstable_above: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PanelSummary {
    pub samples: usize,
    pub seed: u64,
    pub checks: usize,
    /// Hessian verdict disagreeing with "is the largest moment".
    pub variational_mismatches: usize,
    /// Unstable count differing from the expected 0 / 1 / 2.
    pub spectral_mismatches: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RefinementSummary {
    pub resolutions: Vec<[usize; 2]>,
    /// Unstable counts and kernel dimensions agree across resolutions.
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SweepSummary {
    MuCrossing(CrossingSummary),
    InertiaPanel(PanelSummary),
    Refinement(RefinementSummary),
}

pub struct SweepOutput {
    pub summary: SweepSummary,
    pub table: Table,
}

pub fn compute(run: &Run) -> Result<SweepOutput, CliError> {
    match &run.scenario.sweep {
        Some(SweepSection::MuCrossing { half_width, points }) => mu_crossing(run, *half_width, *points),
        Some(SweepSection::InertiaPanel {
            samples,
            excess_min,
            excess_max,
            spectra,
            seed,
        }) => {
            let seed = seed.or(run.scenario.initial.seed).ok_or_else(|| {
                CliError::Config("inertia-panel needs a seed (sweep.seed, initial.seed or --seed)".into())
            })?;
            inertia_panel(run, *samples, (*excess_min, *excess_max), *spectra, seed)
        }
        Some(SweepSection::Refinement { resolutions }) => refinement(run, resolutions),
        None => Err(CliError::Config("the sweep command needs a [sweep] section".into())),
    }
}

/// `μ3 + (k − K)·half_width/K` for `k = 0..2K`, with the centre exactly `μ3`.
pub fn mu_grid(mu3: f64, half_width: f64, points: usize) -> Vec<f64> {
    let half = (points / 2) as f64;
    (0..points).map(|k| mu3 + (k as f64 - half) * (half_width / half)).collect()
}

fn mu_crossing(run: &Run, half_width: f64, points: usize) -> Result<SweepOutput, CliError> {
    let model = Model::build(&run.scenario)?;
    let [mu1, _, mu3] = model.inertia.moments();
    if !(mu1 < mu3 - half_width) {
        return Err(CliError::Config(format!(
            "mu-crossing needs inertia moment 1 below moment 3 - half_width (got {mu1}, {mu3}, {half_width})"
        )));
    }
    let a_star = [0.0, 0.0, run.scenario.initial.momentum / mu3];
    if a_star[2] == 0.0 {
        return Err(CliError::Config("mu-crossing needs initial.momentum > 0".into()));
    }
    let grid = mu_grid(mu3, half_width, points);
    let reports: Vec<(f64, SpectrumReport)> = grid
        .par_iter()
        .map(|&mu| {
            let inertia = InertiaSpec::new([mu1, mu, mu3]).context("sweep inertia")?;
            let sys = model.system_with(inertia)?;
            Ok((mu, analyze(&sys, a_star).context("sweep spectrum")?))
        })
        .collect::<Result<_, CliError>>()?;
    let sweep = track_branch(&reports, mu3).context("branch tracking")?;

    let mut table = Table::new(&["mu", "unstable_count", "classification", "branch", "nearest_re", "nearest_im"]);
    for row in &sweep.rows {
        table.push(vec![
            row.mu.into(),
            row.unstable_count.into(),
            row.classification.as_str().into(),
            row.branch.into(),
            row.nearest.re.into(),
            row.nearest.im.into(),
        ]);
    }
    let centre = points / 2;
    let summary = CrossingSummary {
        mu1,
        mu3,
        a_star,
        mu_cross: sweep.mu_cross,
        branch_at_cross: sweep.branch_at_cross,
        slope: sweep.slope,
        sign_change_at: sweep.sign_change_at,
        eps0_at_cross: reports[centre].1.eps0,
        unstable_below: reports[..centre].iter().map(|r| r.1.unstable_count).collect(),
        unstable_above: reports[centre + 1..].iter().map(|r| r.1.unstable_count).collect(),
    };
    Ok(SweepOutput {
        summary: SweepSummary::MuCrossing(summary),
        table,
    })
}

struct PanelRow {
    excess: [f64; 3],
    axis: AxisChoice,
    lambda: f64,
    verdict: Verdict,
    is_max: bool,
    spectrum: Option<(usize, usize, &'static str)>,
}

fn inertia_panel(
    run: &Run,
    samples: usize,
    (lo, hi): (f64, f64),
    spectra: bool,
    seed: u64,
) -> Result<SweepOutput, CliError> {
    let cavity = cavity(&run.scenario)?;
    let mut rng = rng(seed);
    let draws: Vec<[f64; 3]> = (0..samples)
        .map(|_| core::array::from_fn(|_| rng.random_range(lo..hi)))
        .collect();
    let model = if spectra { Some(Model::build(&run.scenario)?) } else { None };
    let momentum = run.scenario.initial.momentum;

    let rows: Vec<Vec<PanelRow>> = draws
        .par_iter()
        .map(|&excess| {
            let inertia = InertiaSpec::from_shell_excess(&cavity, excess).context("panel inertia")?;
            let sys = model.as_ref().map(|m| m.system_with(inertia)).transpose()?;
            AxisChoice::all()
                .into_iter()
                .map(|axis| {
                    let eq = target_equilibrium(&inertia, axis, momentum)?;
                    let verdict = reduced_hessian_test(&inertia, eq.a_star).context("variational test")?.verdict;
                    let spectrum = match &sys {
                        Some(sys) => {
                            let r = analyze(sys, eq.a_star).context("panel spectrum")?;
                            Some((r.unstable_count, r.kernel_dim, r.classification.as_str()))
                        }
                        None => None,
                    };
                    Ok(PanelRow {
                        excess,
                        axis,
                        lambda: eq.lambda,
                        verdict,
                        is_max: inertia.coincide(eq.lambda, inertia.max_moment()),
                        spectrum,
                    })
                })
                .collect()
        })
        .collect::<Result<_, CliError>>()?;

    let mut table = Table::new(&[
        "sample",
        "excess1",
        "excess2",
        "excess3",
        "axis",
        "lambda",
        "verdict",
        "is_max",
        "agree",
        "unstable_count",
        "kernel_dim",
        "classification",
    ]);
    let mut variational_mismatches = 0;
    let mut spectral_mismatches = 0;
    for (k, group) in rows.iter().enumerate() {
        for r in group {
            let agree = (r.verdict == Verdict::LocalMinCandidate) == r.is_max;
            variational_mismatches += usize::from(!agree);
            let (unstable, kernel, class): (Cell, Cell, Cell) = match r.spectrum {
                Some((u, kd, c)) => {
                    spectral_mismatches += usize::from(u != 2 - r.axis.slot());
                    (u.into(), kd.into(), c.into())
                }
                None => ("".into(), "".into(), "".into()),
            };
            table.push(vec![
                k.into(),
                r.excess[0].into(),
                r.excess[1].into(),
                r.excess[2].into(),
                r.axis.as_str().into(),
                r.lambda.into(),
                verdict_str(r.verdict).into(),
                Cell::from(if r.is_max { "true" } else { "false" }),
                Cell::from(if agree { "true" } else { "false" }),
                unstable,
                kernel,
                class,
            ]);
        }
    }
    let summary = PanelSummary {
        samples,
        seed,
        checks: samples * 3,
        variational_mismatches,
        spectral_mismatches: spectra.then_some(spectral_mismatches),
    };
    Ok(SweepOutput {
        summary: SweepSummary::InertiaPanel(summary),
        table,
    })
}

fn refinement(run: &Run, resolutions: &[[usize; 2]]) -> Result<SweepOutput, CliError> {
    let s = &run.scenario;
    let cavity = cavity(s)?;
    let (inertia, diag) = inertia(s, &cavity)?;
    let momentum = s.initial.momentum;
    let results: Vec<(usize, Vec<(AxisChoice, SpectrumReport)>)> = resolutions
        .par_iter()
        .map(|&[l, n]| {
            let model = Model::with(s, cavity, inertia, diag.clone(), l, n)?;
            let sys = model.system()?;
            let reports = s
                .spectrum
                .axes
                .iter()
                .map(|&axis| {
                    let eq = target_equilibrium(&inertia, axis, momentum)?;
                    Ok((axis, analyze(&sys, eq.a_star).context("refinement spectrum")?))
                })
                .collect::<Result<Vec<_>, CliError>>()?;
            Ok((model.ops.len(), reports))
        })
        .collect::<Result<_, CliError>>()?;

    let mut table = Table::new(&[
        "l_max",
        "n_max",
        "modes",
        "axis",
        "unstable_count",
        "kernel_dim",
        "classification",
        "spectral_gap",
    ]);
    for (&[l, n], (modes, reports)) in resolutions.iter().zip(&results) {
        for (axis, r) in reports {
            table.push(vec![
                l.into(),
                n.into(),
                (*modes).into(),
                axis.as_str().into(),
                r.unstable_count.into(),
                r.kernel_dim.into(),
                r.classification.as_str().into(),
                r.spectral_gap.map_or(Cell::from(""), Cell::from),
            ]);
        }
    }
    let signature = |reports: &Vec<(AxisChoice, SpectrumReport)>| -> Vec<(usize, usize)> {
        reports.iter().map(|(_, r)| (r.unstable_count, r.kernel_dim)).collect()
    };
    let consistent = results.windows(2).all(|w| signature(&w[0].1) == signature(&w[1].1));
    Ok(SweepOutput {
        summary: SweepSummary::Refinement(RefinementSummary {
            resolutions: resolutions.to_vec(),
            consistent,
        }),
        table,
    })
}

pub fn execute(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let out = compute(run)?;
    let table = out.table.write(&run.out, "sweep", run.format, &run.header)?;
    let json = run.out.join("sweep.json");
    write_json(&json, &run.header, &out.summary)?;
    Ok(vec![table, json])
}
