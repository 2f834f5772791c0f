use crate::cache::{decode_operators, EXTENSION};
use crate::config::Scenario;
use crate::error::CliError;
use crate::model::Model;
use clap::ValueEnum;
use std::fs;
use std::path::{Path, PathBuf};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum CacheAction {
    /// Assemble the scenario's operators into the cache.
    Build,
    /// One line per cached operator set.
    List,
    /// Remove every cached operator set.
    Clear,
}

/// The scenario's `basis.cache_dir` if set, else `fallback`.
pub fn cache_dir(scenario: Option<&Scenario>, fallback: &Path) -> PathBuf {
    scenario
        .and_then(|s| s.basis.cache_dir.clone())
        .unwrap_or_else(|| fallback.to_path_buf())
}

fn entries(dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let read = match fs::read_dir(dir) {
        Ok(r) => r,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(Vec::new()),
        Err(e) => return Err(CliError::io(dir, e)),
    };
    let mut paths = Vec::new();
    for entry in read {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().is_some_and(|x| x == EXTENSION) {
            paths.push(path);
        }
    }
    paths.sort();
    Ok(paths)
}

/// Lines for the terminal.
pub fn execute(action: CacheAction, scenario: Option<Scenario>, dir: &Path) -> Result<Vec<String>, CliError> {
    match action {
        CacheAction::Build => {
            let mut s = scenario.ok_or_else(|| CliError::Config("cache build needs --config".into()))?;
            s.basis.cache_dir = Some(dir.to_path_buf());
            let model = Model::build(&s)?;
            let what = if model.from_cache { "already cached" } else { "built" };
            Ok(vec![format!(
                "{what}: l_max={} n_max={} ({} modes) in {}",
                model.l_max,
                model.n_max,
                model.ops.len(),
                dir.display()
            )])
        }
        CacheAction::List => entries(dir)?
            .into_iter()
            .map(|path| {
                let bytes = fs::read(&path).map_err(|e| CliError::io(&path, e))?;
                Ok(match decode_operators(&bytes) {
                    Ok((h, _)) => format!(
                        "{} radius={:?} l_max={} n_max={} modes={}",
                        h.key, h.radius, h.l_max, h.n_max, h.n
                    ),
                    Err(e) => format!("{} invalid: {e}", path.display()),
                })
            })
            .collect(),
        CacheAction::Clear => {
            let paths = entries(dir)?;
            for path in &paths {
                fs::remove_file(path).map_err(|e| CliError::io(path, e))?;
            }
            Ok(vec![format!("removed {} operator set(s) from {}", paths.len(), dir.display())])
        }
    }
}
