//! Experiment driver for transport-capacity allocation: scenario files,
//! sweeps, Monte Carlo fixed-distance trials and CSV/JSON output.

pub mod experiment;
pub mod output;
pub mod scenario;
pub mod stats;

use std::path::Path;

use tera_tc_core::strategies::Strategy;

pub use experiment::{run_experiment, ExperimentOutput, ExperimentSpec, RunOptions};
pub use scenario::{load_scenario, write_scenario, LoadedScenario, ScenarioError, ScenarioFile};

/// Runs the scenario's experiment and writes tables plus `metadata.json` to `out_dir`.
pub fn run_to_dir(
    loaded: &LoadedScenario,
    options: &RunOptions,
    out_dir: &Path,
) -> anyhow::Result<ExperimentOutput> {
    let scenario = loaded.validate()?;
    let spec = &loaded.file.experiment;
    let output = run_experiment(spec, &scenario, options)?;
    let files = output::write_results(&output, out_dir)?;
    let mut notes = vec![
        "rows are ordered by strategy, sweep index, trial".to_string(),
        "status is `ok` or the error for that work item; failed items emit no device rows"
            .to_string(),
    ];
    if matches!(spec, ExperimentSpec::CdfFixedDistance { .. }) {
        notes.push("CDFs pool device rates jointly over devices and trials".into());
        notes.push("device positions are uniform over the disk area; a zero rate means no power was assigned".into());
    }
    let strategies: Vec<Strategy> = spec.strategies(options.strategies.as_deref());
    let metadata = output::RunMetadata {
        tool: "tera-tc",
        version: env!("CARGO_PKG_VERSION"),
        provenance: output::provenance(),
        experiment_id: spec.id(),
        kind: spec.kind(),
        seed: options.seed.unwrap_or(scenario.config.seed),
        strategies,
        files,
        notes,
        scenario: loaded.file.clone(),
    };
    output::write_metadata(&metadata, out_dir)?;
    Ok(output)
}
