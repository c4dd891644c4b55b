//! Scenario files, task execution and reports.

mod config;
mod report;
mod tasks;

pub use config::{
    ConfigError, ExpectedVerdict, HomothetyConfig, RawConfig, RawConnection, RawHomothety, RawManifold, RawRadius,
    RawSampling, RawTask, RawWeights, Scenario, TaskName,
};
pub use report::{Check, Inputs, Relation, RunReport, Status, TaskReport, REPORT_VERSION};
pub use tasks::{
    run_task, Inapplicable, RunOptions, BRUTE_TOL, FD_TOL, FORM_TOL, GAUSS_BONNET_TOL, JET_TOL, NONZERO,
    PUSHFORWARD_TOL, SPREAD_TOL,
};

pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_SEED: u64 = 0;

/// Command-line overrides; `None` falls back to the config, then defaults.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Overrides {
    pub task: Option<TaskName>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
}

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Inapplicable(#[from] Inapplicable),
    #[error("no task selected: pass --task or set [task] name")]
    NoTask,
    #[error("{0} must be positive")]
    NotPositive(&'static str),
}

pub fn resolve(sc: &Scenario, o: &Overrides) -> Result<(TaskName, RunOptions), RunError> {
    let task = o.task.or(sc.task).ok_or(RunError::NoTask)?;
    let samples = o.samples.or(sc.count).unwrap_or(DEFAULT_SAMPLES);
    if samples == 0 {
        return Err(RunError::NotPositive("--samples"));
    }
    let tolerance = o.tolerance.or(sc.tolerance);
    if tolerance.is_some_and(|t| !(t > 0.0)) {
        return Err(RunError::NotPositive("--tol"));
    }
    Ok((
        task,
        RunOptions {
            samples,
            seed: o.seed.or(sc.seed).unwrap_or(DEFAULT_SEED),
            tolerance,
        },
    ))
}

/// Runs the selected task. Under `all`, tasks that do not apply are
/// skipped with a note; a single inapplicable task is an error.
pub fn run(sc: &Scenario, o: &Overrides) -> Result<RunReport, RunError> {
    let (task, opts) = resolve(sc, o)?;
    let sections = if task == TaskName::All {
        TaskName::EACH
            .iter()
            .map(|&t| run_task(t, sc, &opts).unwrap_or_else(|e| TaskReport::skipped(t.as_str(), e.reason)))
            .collect()
    } else {
        vec![run_task(task, sc, &opts)?]
    };
    let inputs = Inputs {
        config: sc.raw.clone(),
        samples: opts.samples,
        seed: opts.seed,
        tolerance: opts.tolerance,
    };
    Ok(RunReport::new(task.as_str(), inputs, sections))
}
