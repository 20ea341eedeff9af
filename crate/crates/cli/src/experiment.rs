//! Experiment drivers: parameter sweeps, Monte Carlo fixed-distance trials and
//! single-link curves. Every driver returns plain row tables; work items may
//! run in parallel but rows are always merged in (strategy, sweep index,
//! trial) order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use tera_tc_core::channel::{spectral_efficiency, Carrier, LinkParams};
use tera_tc_core::distance::{iterate_power_distance, optimal_distance_pair, DeviceLink};
use tera_tc_core::strategies::{audit, Allocation, Strategy};
use tera_tc_core::units::{dbm_to_watt, linear_to_db};
use tera_tc_core::{DeviceSpec, Scenario, SolverConfig};

use crate::scenario::{check_grid, invalid, ScenarioError};
use crate::stats::empirical_cdf;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DistanceGrid {
    pub min_m: f64,
    pub max_m: f64,
    pub points: usize,
}

impl DistanceGrid {
    /// Log-spaced distances from `min_m` to `max_m` inclusive.
    pub fn distances(&self) -> Vec<f64> {
        let (a, b) = (self.min_m.ln(), self.max_m.ln());
        let steps = (self.points - 1).max(1) as f64;
        (0..self.points)
            .map(|i| (a + (b - a) * i as f64 / steps).exp())
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ExperimentSpec {
    /// TC against the total power budget.
    TcVsPower {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strategies: Option<Vec<Strategy>>,
        p_total_dbm: Vec<f64>,
    },
    /// TC against the number of active devices; the first `K` scenario devices are used.
    TcVsDevices {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strategies: Option<Vec<Strategy>>,
        device_counts: Vec<usize>,
    },
    /// Fixed-distance rate distributions with devices dropped uniformly in a disk.
    CdfFixedDistance {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strategies: Option<Vec<Strategy>>,
        radii_m: Vec<f64>,
        trials: usize,
    },
    /// Per-subwindow losses at the allocated distances.
    LossDistanceVsFrequency {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strategies: Option<Vec<Strategy>>,
    },
    /// Allocated rate against allocated distance for each device.
    RateDistanceTradeoff {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strategies: Option<Vec<Strategy>>,
    },
    /// Proposed method against the exhaustive-assignment search.
    ExhaustiveValidation {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        strategies: Option<Vec<Strategy>>,
        p_total_dbm: Vec<f64>,
    },
    /// `T(d)` for one link at fixed power.
    SingleLinkCurve {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        id: Option<String>,
        frequency_hz: f64,
        k_abs_per_m: f64,
        power_dbm: f64,
        distances: DistanceGrid,
    },
}

impl ExperimentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentSpec::TcVsPower { .. } => "tc_vs_power",
            ExperimentSpec::TcVsDevices { .. } => "tc_vs_devices",
            ExperimentSpec::CdfFixedDistance { .. } => "cdf_fixed_distance",
            ExperimentSpec::LossDistanceVsFrequency { .. } => "loss_distance_vs_frequency",
            ExperimentSpec::RateDistanceTradeoff { .. } => "rate_distance_tradeoff",
            ExperimentSpec::ExhaustiveValidation { .. } => "exhaustive_validation",
            ExperimentSpec::SingleLinkCurve { .. } => "single_link_curve",
        }
    }

    pub fn id(&self) -> String {
        let id = match self {
            ExperimentSpec::TcVsPower { id, .. }
            | ExperimentSpec::TcVsDevices { id, .. }
            | ExperimentSpec::CdfFixedDistance { id, .. }
            | ExperimentSpec::LossDistanceVsFrequency { id, .. }
            | ExperimentSpec::RateDistanceTradeoff { id, .. }
            | ExperimentSpec::ExhaustiveValidation { id, .. }
            | ExperimentSpec::SingleLinkCurve { id, .. } => id,
        };
        id.clone().unwrap_or_else(|| self.kind().to_string())
    }

    fn listed_strategies(&self) -> Option<&Vec<Strategy>> {
        match self {
            ExperimentSpec::TcVsPower { strategies, .. }
            | ExperimentSpec::TcVsDevices { strategies, .. }
            | ExperimentSpec::CdfFixedDistance { strategies, .. }
            | ExperimentSpec::LossDistanceVsFrequency { strategies, .. }
            | ExperimentSpec::RateDistanceTradeoff { strategies, .. }
            | ExperimentSpec::ExhaustiveValidation { strategies, .. } => strategies.as_ref(),
            ExperimentSpec::SingleLinkCurve { .. } => None,
        }
    }

    pub fn default_strategies(&self) -> Vec<Strategy> {
        use Strategy::*;
        match self {
            ExperimentSpec::TcVsPower { .. } | ExperimentSpec::TcVsDevices { .. } => {
                vec![Proposed, Distmax, Nonadaptive]
            }
            ExperimentSpec::CdfFixedDistance { .. } => vec![FixedTc, SumRate],
            ExperimentSpec::LossDistanceVsFrequency { .. } => vec![Proposed],
            ExperimentSpec::RateDistanceTradeoff { .. } => vec![Proposed, Distmax],
            ExperimentSpec::ExhaustiveValidation { .. } => vec![Proposed, Exhaustive],
            ExperimentSpec::SingleLinkCurve { .. } => vec![],
        }
    }

    /// Strategies to run: an explicit override, else the file's list, else the kind's default.
    pub fn strategies(&self, overridden: Option<&[Strategy]>) -> Vec<Strategy> {
        match (overridden, self.listed_strategies()) {
            (Some(s), _) => s.to_vec(),
            (None, Some(s)) => s.clone(),
            (None, None) => self.default_strategies(),
        }
    }

    pub fn validate(&self, scenario: &Scenario) -> Result<(), ScenarioError> {
        if let Some(list) = self.listed_strategies() {
            if list.is_empty() {
                return Err(invalid("experiment.strategies", "list is empty"));
            }
        }
        match self {
            ExperimentSpec::TcVsPower { p_total_dbm, .. }
            | ExperimentSpec::ExhaustiveValidation { p_total_dbm, .. } => {
                check_grid("experiment.p_total_dbm", p_total_dbm)
            }
            ExperimentSpec::TcVsDevices { device_counts, .. } => {
                check_grid("experiment.device_counts", device_counts)?;
                if device_counts[0] == 0 {
                    return Err(invalid(
                        "experiment.device_counts",
                        "counts must be at least 1",
                    ));
                }
                let max = *device_counts.last().unwrap();
                if max > scenario.num_devices() {
                    return Err(invalid(
                        "experiment.device_counts",
                        format!(
                            "{max} exceeds the {} devices listed",
                            scenario.num_devices()
                        ),
                    ));
                }
                Ok(())
            }
            ExperimentSpec::CdfFixedDistance {
                radii_m, trials, ..
            } => {
                check_grid("experiment.radii_m", radii_m)?;
                if !(radii_m[0] > 0.0) {
                    return Err(invalid("experiment.radii_m", "radii must be positive"));
                }
                if *trials == 0 {
                    return Err(invalid("experiment.trials", "must be at least 1"));
                }
                Ok(())
            }
            ExperimentSpec::LossDistanceVsFrequency { .. }
            | ExperimentSpec::RateDistanceTradeoff { .. } => Ok(()),
            ExperimentSpec::SingleLinkCurve {
                frequency_hz,
                k_abs_per_m,
                distances,
                ..
            } => {
                if !(*frequency_hz > 0.0) || !(*k_abs_per_m >= 0.0) {
                    return Err(invalid(
                        "experiment",
                        "frequency must be positive and k_abs non-negative",
                    ));
                }
                if !(distances.min_m > 0.0
                    && distances.max_m > distances.min_m
                    && distances.points >= 2)
                {
                    return Err(invalid(
                        "experiment.distances",
                        "need 0 < min_m < max_m and at least 2 points",
                    ));
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub experiment: String,
    pub strategy: String,
    pub sweep_value: f64,
    pub trial: usize,
    /// `ok`, or the solver or audit error for this work item.
    pub status: String,
    pub tc_m_bps: Option<f64>,
    pub sum_rate_bps: Option<f64>,
    pub power_w: Option<f64>,
    pub iterations: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceRow {
    pub experiment: String,
    pub strategy: String,
    pub sweep_value: f64,
    pub trial: usize,
    pub k: usize,
    pub subwindow: usize,
    pub frequency_hz: f64,
    pub k_abs_per_m: f64,
    pub distance_m: f64,
    pub power_w: f64,
    pub rate_bps: f64,
    pub rate_req_bps: f64,
    pub tc_m_bps: f64,
    pub regime: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfRow {
    pub strategy: String,
    pub radius_m: f64,
    pub rate_bps: f64,
    pub cdf: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdfSummaryRow {
    pub strategy: String,
    pub radius_m: f64,
    pub samples: usize,
    /// Share of devices left without power (rate exactly 0).
    pub zero_rate_fraction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossDistanceRow {
    pub strategy: String,
    pub subwindow: usize,
    pub frequency_hz: f64,
    pub k_abs_per_m: f64,
    pub device: Option<usize>,
    pub distance_m: Option<f64>,
    pub spreading_loss_db: Option<f64>,
    pub absorption_loss_db: Option<f64>,
    pub path_loss_db: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExhaustiveGapRow {
    pub p_total_dbm: f64,
    pub proposed_tc_m_bps: Option<f64>,
    pub exhaustive_tc_m_bps: Option<f64>,
    /// `(exhaustive - proposed) / exhaustive`.
    pub relative_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkCurveRow {
    pub distance_m: f64,
    pub snr: f64,
    pub rate_bps: f64,
    pub tc_m_bps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkOptimumRow {
    /// `stationarity` (root of the optimality condition), `grid` (best grid
    /// point) or `iterative` (the smoothed distance-power iteration).
    pub method: String,
    pub distance_m: f64,
    pub tc_m_bps: f64,
}

/// All tables an experiment can produce; each non-empty one becomes a CSV file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutput {
    pub summary: Vec<SummaryRow>,
    pub devices: Vec<DeviceRow>,
    pub cdf: Vec<CdfRow>,
    pub cdf_summary: Vec<CdfSummaryRow>,
    pub loss_distance: Vec<LossDistanceRow>,
    pub exhaustive_gap: Vec<ExhaustiveGapRow>,
    pub link_curve: Vec<LinkCurveRow>,
    pub link_optimum: Vec<LinkOptimumRow>,
}

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides `solver.seed` from the scenario file.
    pub seed: Option<u64>,
    pub strategies: Option<Vec<Strategy>>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

/// Result of one (strategy, sweep point, trial) work item.
struct ItemResult {
    summary: SummaryRow,
    devices: Vec<DeviceRow>,
    allocation: Option<Allocation>,
}

struct Item {
    strategy: Strategy,
    sweep_value: f64,
    trial: usize,
    scenario: Scenario,
}

fn evaluate(experiment: &str, item: Item) -> ItemResult {
    let mut summary = SummaryRow {
        experiment: experiment.to_string(),
        strategy: item.strategy.to_string(),
        sweep_value: item.sweep_value,
        trial: item.trial,
        status: "ok".into(),
        tc_m_bps: None,
        sum_rate_bps: None,
        power_w: None,
        iterations: None,
    };
    let allocation = match item.strategy.run(&item.scenario) {
        Ok(a) => match audit(&a, &item.scenario) {
            Ok(()) => a,
            Err(e) => {
                summary.status = format!("audit failed: {}", e.0);
                return ItemResult {
                    summary,
                    devices: vec![],
                    allocation: None,
                };
            }
        },
        Err(e) => {
            summary.status = format!("error: {e}");
            return ItemResult {
                summary,
                devices: vec![],
                allocation: None,
            };
        }
    };
    summary.tc_m_bps = Some(allocation.tc);
    summary.sum_rate_bps = Some(allocation.sum_rate);
    summary.power_w = Some(allocation.power_used);
    summary.iterations = Some(allocation.iterations);
    let devices = allocation
        .devices
        .iter()
        .zip(&item.scenario.devices)
        .enumerate()
        .map(|(k, (d, spec))| DeviceRow {
            experiment: experiment.to_string(),
            strategy: item.strategy.to_string(),
            sweep_value: item.sweep_value,
            trial: item.trial,
            k,
            subwindow: d.subwindow,
            frequency_hz: d.frequency,
            k_abs_per_m: d.k_abs,
            distance_m: d.distance,
            power_w: d.power,
            rate_bps: d.rate,
            rate_req_bps: spec.rate_req,
            tc_m_bps: d.tc,
            regime: d.regime.map_or("", |r| r.as_str()).to_string(),
        })
        .collect();
    ItemResult {
        summary,
        devices,
        allocation: Some(allocation),
    }
}

/// Runs all items (possibly in parallel) and returns results in input order.
fn evaluate_all(experiment: &str, items: Vec<Item>) -> Vec<ItemResult> {
    items
        .into_par_iter()
        .map(|item| evaluate(experiment, item))
        .collect()
}

fn merge(results: &[ItemResult], out: &mut ExperimentOutput) {
    for r in results {
        out.summary.push(r.summary.clone());
        out.devices.extend(r.devices.iter().cloned());
    }
}

fn with_power_dbm(scenario: &Scenario, dbm: f64) -> Result<Scenario, ScenarioError> {
    Ok(scenario.with_total_power(dbm_to_watt(dbm))?)
}

pub fn run_tc_vs_power(
    experiment: &str,
    scenario: &Scenario,
    strategies: &[Strategy],
    p_total_dbm: &[f64],
) -> Result<ExperimentOutput, ScenarioError> {
    let mut items = Vec::new();
    for &strategy in strategies {
        for &p in p_total_dbm {
            items.push(Item {
                strategy,
                sweep_value: p,
                trial: 0,
                scenario: with_power_dbm(scenario, p)?,
            });
        }
    }
    let mut out = ExperimentOutput::default();
    merge(&evaluate_all(experiment, items), &mut out);
    Ok(out)
}

pub fn run_tc_vs_devices(
    experiment: &str,
    scenario: &Scenario,
    strategies: &[Strategy],
    device_counts: &[usize],
) -> Result<ExperimentOutput, ScenarioError> {
    let mut items = Vec::new();
    for &strategy in strategies {
        for &k in device_counts {
            let mut s = scenario.clone();
            s.devices.truncate(k);
            s.validate()?;
            items.push(Item {
                strategy,
                sweep_value: k as f64,
                trial: 0,
                scenario: s,
            });
        }
    }
    let mut out = ExperimentOutput::default();
    merge(&evaluate_all(experiment, items), &mut out);
    Ok(out)
}

/// Distances of `count` points uniform over a disk of radius 1, for one trial.
/// Each trial has its own ChaCha stream, so trials are independent of
/// scheduling and the same trial reuses its draws across radii.
pub fn unit_disk_distances(seed: u64, trial: usize, count: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial as u64);
    (0..count).map(|_| rng.gen::<f64>().sqrt()).collect()
}

pub fn run_cdf_fixed_distance(
    experiment: &str,
    scenario: &Scenario,
    strategies: &[Strategy],
    radii_m: &[f64],
    trials: usize,
    seed: u64,
) -> Result<ExperimentOutput, ScenarioError> {
    let k = scenario.num_devices();
    let draws: Vec<Vec<f64>> = (0..trials)
        .map(|t| unit_disk_distances(seed, t, k))
        .collect();
    let mut items = Vec::new();
    for &strategy in strategies {
        for &radius in radii_m {
            for (trial, unit) in draws.iter().enumerate() {
                let devices = scenario
                    .devices
                    .iter()
                    .zip(unit)
                    .map(|(spec, u)| DeviceSpec {
                        rate_req: spec.rate_req,
                        fixed_distance: Some((radius * u).max(scenario.config.d_min)),
                    })
                    .collect();
                items.push(Item {
                    strategy,
                    sweep_value: radius,
                    trial,
                    scenario: Scenario {
                        devices,
                        ..scenario.clone()
                    },
                });
            }
        }
    }
    let results = evaluate_all(experiment, items);
    let mut out = ExperimentOutput::default();
    merge(&results, &mut out);
    // Pool device rates over all trials for each (strategy, radius).
    for group in results.chunks(trials) {
        let first = &group[0].summary;
        let rates: Vec<f64> = group
            .iter()
            .filter_map(|r| r.allocation.as_ref())
            .flat_map(|a| a.devices.iter().map(|d| d.rate))
            .collect();
        let zeros = rates.iter().filter(|r| **r == 0.0).count();
        out.cdf_summary.push(CdfSummaryRow {
            strategy: first.strategy.clone(),
            radius_m: first.sweep_value,
            samples: rates.len(),
            zero_rate_fraction: if rates.is_empty() {
                f64::NAN
            } else {
                zeros as f64 / rates.len() as f64
            },
        });
        out.cdf
            .extend(empirical_cdf(&rates).into_iter().map(|(rate, cdf)| CdfRow {
                strategy: first.strategy.clone(),
                radius_m: first.sweep_value,
                rate_bps: rate,
                cdf,
            }));
    }
    Ok(out)
}

pub fn run_loss_distance_vs_frequency(
    experiment: &str,
    scenario: &Scenario,
    strategies: &[Strategy],
) -> Result<ExperimentOutput, ScenarioError> {
    let p_dbm = tera_tc_core::units::watt_to_dbm(scenario.params.p_total);
    let items = strategies
        .iter()
        .map(|&strategy| Item {
            strategy,
            sweep_value: p_dbm,
            trial: 0,
            scenario: scenario.clone(),
        })
        .collect();
    let results = evaluate_all(experiment, items);
    let mut out = ExperimentOutput::default();
    merge(&results, &mut out);
    let c = scenario.params.c;
    for r in &results {
        let Some(a) = &r.allocation else { continue };
        let mut by_subwindow = vec![None; scenario.band.len()];
        for (k, d) in a.devices.iter().enumerate() {
            by_subwindow[d.subwindow] = Some((k, d.distance));
        }
        for (n, w) in scenario.band.subwindows().iter().enumerate() {
            let losses = by_subwindow[n].map(|(_, d)| {
                let spreading =
                    -linear_to_db((c / (4.0 * std::f64::consts::PI * w.frequency * d)).powi(2));
                let absorption = 10.0 * std::f64::consts::LOG10_E * w.k_abs * d;
                (spreading, absorption)
            });
            out.loss_distance.push(LossDistanceRow {
                strategy: r.summary.strategy.clone(),
                subwindow: n,
                frequency_hz: w.frequency,
                k_abs_per_m: w.k_abs,
                device: by_subwindow[n].map(|(k, _)| k),
                distance_m: by_subwindow[n].map(|(_, d)| d),
                spreading_loss_db: losses.map(|l| l.0),
                absorption_loss_db: losses.map(|l| l.1),
                path_loss_db: losses.map(|l| l.0 + l.1),
            });
        }
    }
    Ok(out)
}

pub fn run_rate_distance_tradeoff(
    experiment: &str,
    scenario: &Scenario,
    strategies: &[Strategy],
) -> Result<ExperimentOutput, ScenarioError> {
    let p_dbm = tera_tc_core::units::watt_to_dbm(scenario.params.p_total);
    let items = strategies
        .iter()
        .map(|&strategy| Item {
            strategy,
            sweep_value: p_dbm,
            trial: 0,
            scenario: scenario.clone(),
        })
        .collect();
    let mut out = ExperimentOutput::default();
    merge(&evaluate_all(experiment, items), &mut out);
    Ok(out)
}

pub fn run_exhaustive_validation(
    experiment: &str,
    scenario: &Scenario,
    strategies: &[Strategy],
    p_total_dbm: &[f64],
) -> Result<ExperimentOutput, ScenarioError> {
    let mut out = run_tc_vs_power(experiment, scenario, strategies, p_total_dbm)?;
    let tc_of = |strategy: Strategy, p: f64| {
        out.summary
            .iter()
            .find(|r| r.strategy == strategy.as_str() && r.sweep_value == p)
            .and_then(|r| r.tc_m_bps)
    };
    let gaps: Vec<ExhaustiveGapRow> = p_total_dbm
        .iter()
        .map(|&p| {
            let proposed = tc_of(Strategy::Proposed, p);
            let exhaustive = tc_of(Strategy::Exhaustive, p);
            ExhaustiveGapRow {
                p_total_dbm: p,
                proposed_tc_m_bps: proposed,
                exhaustive_tc_m_bps: exhaustive,
                relative_gap: proposed.zip(exhaustive).map(|(a, b)| (b - a) / b),
            }
        })
        .collect();
    out.exhaustive_gap = gaps;
    Ok(out)
}

/// `T(d) = d W log2(1 + snr(d))` on a grid, plus the optimum found three ways.
pub fn single_link_curve(
    carrier: &Carrier,
    power_w: f64,
    params: &LinkParams,
    grid: &DistanceGrid,
    config: &SolverConfig,
) -> Result<(Vec<LinkCurveRow>, Vec<LinkOptimumRow>), ScenarioError> {
    let curve: Vec<LinkCurveRow> = grid
        .distances()
        .into_iter()
        .map(|d| {
            let snr = carrier.ln_snr(d, power_w, params).exp();
            let rate = carrier.bandwidth * spectral_efficiency(snr);
            LinkCurveRow {
                distance_m: d,
                snr,
                rate_bps: rate,
                tc_m_bps: d * rate,
            }
        })
        .collect();
    let tc_at = |d: f64| d * carrier.rate(d, power_w, params);
    let (d_opt, _) = optimal_distance_pair(power_w, carrier, params)?;
    let best = curve.iter().fold(
        &curve[0],
        |b, r| if r.tc_m_bps > b.tc_m_bps { r } else { b },
    );
    let params_p = params.with_total_power(power_w)?;
    let device = DeviceLink {
        carrier: *carrier,
        rate_req: 0.0,
    };
    let iter = iterate_power_distance(&[device], &[config.d_init], &[power_w], &params_p, config)?;
    let optimum = vec![
        LinkOptimumRow {
            method: "stationarity".into(),
            distance_m: d_opt,
            tc_m_bps: tc_at(d_opt),
        },
        LinkOptimumRow {
            method: "grid".into(),
            distance_m: best.distance_m,
            tc_m_bps: best.tc_m_bps,
        },
        LinkOptimumRow {
            method: "iterative".into(),
            distance_m: iter.distances[0],
            tc_m_bps: iter.tc,
        },
    ];
    Ok((curve, optimum))
}

/// Runs the experiment described by `spec` on `scenario`.
pub fn run_experiment(
    spec: &ExperimentSpec,
    scenario: &Scenario,
    options: &RunOptions,
) -> Result<ExperimentOutput, ScenarioError> {
    spec.validate(scenario)?;
    let id = spec.id();
    let strategies = spec.strategies(options.strategies.as_deref());
    let seed = options.seed.unwrap_or(scenario.config.seed);
    let body = || -> Result<ExperimentOutput, ScenarioError> {
        match spec {
            ExperimentSpec::TcVsPower { p_total_dbm, .. } => {
                run_tc_vs_power(&id, scenario, &strategies, p_total_dbm)
            }
            ExperimentSpec::TcVsDevices { device_counts, .. } => {
                run_tc_vs_devices(&id, scenario, &strategies, device_counts)
            }
            ExperimentSpec::CdfFixedDistance {
                radii_m, trials, ..
            } => run_cdf_fixed_distance(&id, scenario, &strategies, radii_m, *trials, seed),
            ExperimentSpec::LossDistanceVsFrequency { .. } => {
                run_loss_distance_vs_frequency(&id, scenario, &strategies)
            }
            ExperimentSpec::RateDistanceTradeoff { .. } => {
                run_rate_distance_tradeoff(&id, scenario, &strategies)
            }
            ExperimentSpec::ExhaustiveValidation { p_total_dbm, .. } => {
                run_exhaustive_validation(&id, scenario, &strategies, p_total_dbm)
            }
            ExperimentSpec::SingleLinkCurve {
                frequency_hz,
                k_abs_per_m,
                power_dbm,
                distances,
                ..
            } => {
                let carrier = Carrier::new(*frequency_hz, *k_abs_per_m, scenario.band.bandwidth());
                let (curve, optimum) = single_link_curve(
                    &carrier,
                    dbm_to_watt(*power_dbm),
                    &scenario.params,
                    distances,
                    &scenario.config,
                )?;
                Ok(ExperimentOutput {
                    link_curve: curve,
                    link_optimum: optimum,
                    ..Default::default()
                })
            }
        }
    };
    match options.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| invalid("parallel", e.to_string()))?
            .install(body),
        None => body(),
    }
}
