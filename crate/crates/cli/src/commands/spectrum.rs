use super::Run;
use crate::commands::equilibria::verdict_str;
use crate::config::AxisChoice;
use crate::error::{CliError, Context};
use crate::model::{target_equilibrium, Model};
use crate::output::{write_json, Cell, Table};
use serde::Serialize;
use spinfluid_core::equilibria::reduced_hessian_test;
use spinfluid_core::spectrum::analyze;
use spinfluid_core::{CoupledSystem, SpectrumReport};
use std::path::PathBuf;

#[derive(Clone, Debug, Serialize)]
pub struct ReportSummary {
    pub axis: AxisChoice,
    pub a_star: [f64; 3],
    pub lambda_star: f64,
    pub eps0: f64,
    pub kernel_dim: usize,
    pub manifold_dim: usize,
    pub rank: usize,
    pub rank_squared: usize,
    pub semisimple: bool,
    pub unstable_count: usize,
    pub spectral_gap: Option<f64>,
    pub imaginary_axis_audit: bool,
    pub classification: &'static str,
    pub variational_verdict: &'static str,
    pub eigenvalue_count: usize,
}

impl ReportSummary {
    pub fn new(axis: AxisChoice, r: &SpectrumReport, verdict: &'static str) -> Self {
        Self {
            axis,
            a_star: r.a_star,
            lambda_star: r.lambda_star,
            eps0: r.eps0,
            kernel_dim: r.kernel_dim,
            manifold_dim: r.manifold_dim,
            rank: r.rank,
            rank_squared: r.rank_squared,
            semisimple: r.semisimple,
            unstable_count: r.unstable_count,
            spectral_gap: r.spectral_gap,
            imaginary_axis_audit: r.axis_audit,
            classification: r.classification.as_str(),
            variational_verdict: verdict,
            eigenvalue_count: r.eigenvalues.len(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SpectrumOutput {
    pub convention: &'static str,
    pub moments: [f64; 3],
    pub momentum: f64,
    pub n_modes: usize,
    pub reports: Vec<ReportSummary>,
    #[serde(skip)]
    pub full: Vec<SpectrumReport>,
}

pub fn analyze_axis(sys: &CoupledSystem<'_>, axis: AxisChoice, momentum: f64) -> Result<(SpectrumReport, &'static str), CliError> {
    let eq = target_equilibrium(sys.inertia(), axis, momentum)?;
    let report = analyze(sys, eq.a_star).context("spectrum")?;
    let verdict = reduced_hessian_test(sys.inertia(), eq.a_star).context("variational test")?;
    Ok((report, verdict_str(verdict.verdict)))
}

pub fn compute(run: &Run) -> Result<SpectrumOutput, CliError> {
    let model = Model::build(&run.scenario)?;
    let sys = model.system()?;
    let momentum = run.scenario.initial.momentum;
    let mut reports = Vec::new();
    let mut full = Vec::new();
    for &axis in &run.scenario.spectrum.axes {
        let (report, verdict) = analyze_axis(&sys, axis, momentum)?;
        reports.push(ReportSummary::new(axis, &report, verdict));
        full.push(report);
    }
    Ok(SpectrumOutput {
        convention: spinfluid_core::spectrum::GENERATOR_CONVENTION,
        moments: model.inertia.moments(),
        momentum,
        n_modes: model.ops.len(),
        reports,
        full,
    })
}

pub fn eigenvalue_table(out: &SpectrumOutput) -> Table {
    let mut table = Table::new(&["axis", "re", "im", "abs", "cluster"]);
    for (summary, report) in out.reports.iter().zip(&out.full) {
        for e in &report.eigenvalues {
            table.push(vec![
                Cell::from(summary.axis.as_str()),
                e.z.re.into(),
                e.z.im.into(),
                e.z.re.hypot(e.z.im).into(),
                e.tag.as_str().into(),
            ]);
        }
    }
    table
}

pub fn execute(run: &Run) -> Result<Vec<PathBuf>, CliError> {
    let out = compute(run)?;
    let json = run.out.join("spectrum.json");
    write_json(&json, &run.header, &out)?;
    let table = eigenvalue_table(&out).write(&run.out, "eigenvalues", run.format, &run.header)?;
    Ok(vec![json, table])
}
