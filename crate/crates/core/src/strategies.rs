//! End-to-end allocation strategies.
//!
//! Fixed distances: [`fixed_distance_tc_max`] and its unit-weight twin
//! [`sum_rate_max`]. Variable distances: [`proposed_tc_max`], the benchmarks
//! [`distance_max_benchmark`] and [`non_adaptive_benchmark`], and
//! [`exhaustive_tc_max`], which replaces the assignment stage by enumeration.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assignment::{for_each_injection, hungarian_assign, Assignment, PayoffMatrix};
use crate::band::BandPlan;
use crate::channel::{check_link_params, required_snr, LinkParams};
use crate::config::SolverConfig;
use crate::distance::{
    classify_regime, infeasible_devices, iterate_power_distance, DeviceLink, PowerDistanceSolution,
    Regime,
};
use crate::error::{Error, Result};
use crate::search::bisect;
use crate::waterfill::{waterfill, WaterfillInput};

/// Relative slack allowed on the power budget and on rate floors when auditing.
pub const AUDIT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    /// Minimum rate, bps.
    pub rate_req: f64,
    /// Distance to the access point when it is given rather than optimised, m.
    pub fixed_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub band: BandPlan,
    pub params: LinkParams,
    pub devices: Vec<DeviceSpec>,
    pub config: SolverConfig,
}

impl Scenario {
    pub fn new(
        band: BandPlan,
        params: LinkParams,
        devices: Vec<DeviceSpec>,
        config: SolverConfig,
    ) -> Result<Self> {
        let s = Self {
            band,
            params,
            devices,
            config,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        check_link_params(&self.params)?;
        self.config.validate()?;
        if self.devices.is_empty() {
            return Err(Error::InvalidParameter("scenario has no devices".into()));
        }
        if self.devices.len() > self.band.len() {
            return Err(Error::Dimension(format!(
                "{} devices but only {} subwindows",
                self.devices.len(),
                self.band.len()
            )));
        }
        for (k, d) in self.devices.iter().enumerate() {
            if !(d.rate_req >= 0.0 && d.rate_req.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "device {k}: rate requirement must be non-negative, got {}",
                    d.rate_req
                )));
            }
            if let Some(x) = d.fixed_distance {
                if !(x > 0.0 && x.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "device {k}: fixed distance must be positive, got {x}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn num_devices(&self) -> usize {
        self.devices.len()
    }

    /// Same scenario with a different total power budget.
    pub fn with_total_power(&self, p_total: f64) -> Result<Self> {
        Ok(Self {
            params: self.params.with_total_power(p_total)?,
            ..self.clone()
        })
    }

    fn fixed_distances(&self) -> Result<Vec<f64>> {
        self.devices
            .iter()
            .enumerate()
            .map(|(k, d)| {
                d.fixed_distance.ok_or_else(|| {
                    Error::InvalidParameter(format!("device {k} has no fixed distance"))
                })
            })
            .collect()
    }

    fn device_links(&self, assignment: &[usize]) -> Vec<DeviceLink> {
        assignment
            .iter()
            .zip(&self.devices)
            .map(|(&n, spec)| DeviceLink {
                carrier: self.band.carrier(n),
                rate_req: spec.rate_req,
            })
            .collect()
    }

    fn equal_power(&self) -> f64 {
        self.params.p_total / self.devices.len() as f64
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Fixed distances: Hungarian assignment on `d_k R_{k,n}`, distance-weighted water-filling.
    FixedTc,
    /// Fixed distances: the same pipeline with unit weights.
    SumRate,
    /// Iterative assignment plus distance-power fixed point.
    Proposed,
    /// Greedy low-absorption pairing, sum-distance maximisation with pinned rates.
    Distmax,
    /// Band-order assignment, equal power, per-device best distance.
    Nonadaptive,
    /// Distance-power fixed point for every possible assignment.
    Exhaustive,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::FixedTc,
        Strategy::SumRate,
        Strategy::Proposed,
        Strategy::Distmax,
        Strategy::Nonadaptive,
        Strategy::Exhaustive,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Strategy::FixedTc => "fixed_tc",
            Strategy::SumRate => "sum_rate",
            Strategy::Proposed => "proposed",
            Strategy::Distmax => "distmax",
            Strategy::Nonadaptive => "nonadaptive",
            Strategy::Exhaustive => "exhaustive",
        }
    }

    /// Whether the strategy enforces per-device rate floors.
    pub fn has_rate_floors(&self) -> bool {
        !matches!(self, Strategy::FixedTc | Strategy::SumRate)
    }

    pub fn run(&self, scenario: &Scenario) -> Result<Allocation> {
        match self {
            Strategy::FixedTc => fixed_distance_tc_max(scenario),
            Strategy::SumRate => sum_rate_max(scenario),
            Strategy::Proposed => proposed_tc_max(scenario),
            Strategy::Distmax => distance_max_benchmark(scenario),
            Strategy::Nonadaptive => non_adaptive_benchmark(scenario),
            Strategy::Exhaustive => exhaustive_tc_max(scenario),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|x| x.as_str() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown strategy `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceAllocation {
    pub subwindow: usize,
    pub frequency: f64,
    pub k_abs: f64,
    pub power: f64,
    pub distance: f64,
    pub rate: f64,
    /// `distance * rate`, m*bps.
    pub tc: f64,
    pub regime: Option<Regime>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub strategy: Strategy,
    pub devices: Vec<DeviceAllocation>,
    pub tc: f64,
    pub sum_rate: f64,
    pub power_used: f64,
    /// Inner fixed-point iterations summed over all runs (0 for closed-form strategies).
    pub iterations: usize,
}

impl Allocation {
    fn build(
        strategy: Strategy,
        scenario: &Scenario,
        assignment: &[usize],
        distances: &[f64],
        powers: &[f64],
        regimes: Option<&[Regime]>,
        iterations: usize,
    ) -> Self {
        let devices: Vec<DeviceAllocation> = (0..assignment.len())
            .map(|k| {
                let n = assignment[k];
                let carrier = scenario.band.carrier(n);
                let rate = carrier.rate(distances[k], powers[k], &scenario.params);
                DeviceAllocation {
                    subwindow: n,
                    frequency: carrier.frequency,
                    k_abs: carrier.k_abs,
                    power: powers[k],
                    distance: distances[k],
                    rate,
                    tc: distances[k] * rate,
                    regime: regimes.map(|r| r[k]),
                }
            })
            .collect();
        Self {
            strategy,
            tc: devices.iter().map(|d| d.tc).sum(),
            sum_rate: devices.iter().map(|d| d.rate).sum(),
            power_used: devices.iter().map(|d| d.power).sum(),
            devices,
            iterations,
        }
    }

    fn from_solution(
        strategy: Strategy,
        scenario: &Scenario,
        assignment: &[usize],
        sol: &PowerDistanceSolution,
        iterations: usize,
    ) -> Self {
        Self::build(
            strategy,
            scenario,
            assignment,
            &sol.distances,
            &sol.powers,
            Some(&sol.regimes),
            iterations,
        )
    }

    pub fn assignment(&self) -> Vec<usize> {
        self.devices.iter().map(|d| d.subwindow).collect()
    }
}

/// Payoff matrix of `weight(k) * R_{k,n}(d_k, p_k)` over all devices and subwindows.
fn rate_payoff(
    scenario: &Scenario,
    distances: &[f64],
    powers: &[f64],
    weight: impl Fn(usize) -> f64,
) -> Result<PayoffMatrix> {
    PayoffMatrix::from_fn(scenario.num_devices(), scenario.band.len(), |k, n| {
        weight(k)
            * scenario
                .band
                .carrier(n)
                .rate(distances[k], powers[k], &scenario.params)
    })
}

fn fixed_distance_pipeline(
    scenario: &Scenario,
    strategy: Strategy,
    tc_weighted: bool,
) -> Result<Allocation> {
    scenario.validate()?;
    let distances = scenario.fixed_distances()?;
    let k = scenario.num_devices();
    let equal = vec![scenario.equal_power(); k];
    let weight = |i: usize| if tc_weighted { distances[i] } else { 1.0 };
    let payoff = rate_payoff(scenario, &distances, &equal, weight)?;
    let assignment = hungarian_assign(&payoff)?;

    let weights: Vec<f64> = (0..k).map(weight).collect();
    let ln_inverse_gains: Vec<f64> = (0..k)
        .map(|i| {
            scenario
                .band
                .carrier(assignment.subwindow_of(i))
                .ln_inverse_gain(distances[i], &scenario.params)
        })
        .collect();
    let input =
        WaterfillInput::from_ln_inverse_gains(weights, &ln_inverse_gains, scenario.params.p_total)?;
    let sol = waterfill(&input)?;
    Ok(Allocation::build(
        strategy,
        scenario,
        assignment.as_slice(),
        &distances,
        &sol.powers,
        None,
        0,
    ))
}

/// TC maximisation with given distances: assignment at equal power, then
/// distance-weighted water-filling. No rate floors.
pub fn fixed_distance_tc_max(scenario: &Scenario) -> Result<Allocation> {
    fixed_distance_pipeline(scenario, Strategy::FixedTc, true)
}

/// Sum-rate comparator for fixed distances: the TC pipeline with unit weights.
pub fn sum_rate_max(scenario: &Scenario) -> Result<Allocation> {
    fixed_distance_pipeline(scenario, Strategy::SumRate, false)
}

/// Iterative TC maximisation: `m_out` rounds of Hungarian assignment on the
/// current distances and powers followed by the distance-power fixed point;
/// the best round is returned.
pub fn proposed_tc_max(scenario: &Scenario) -> Result<Allocation> {
    scenario.validate()?;
    let cfg = &scenario.config;
    let k = scenario.num_devices();
    let mut distances = vec![cfg.d_init; k];
    let mut powers = vec![scenario.equal_power(); k];
    let mut best: Option<(Assignment, PowerDistanceSolution)> = None;
    let mut iterations = 0;
    for _ in 0..cfg.m_out {
        let payoff = rate_payoff(scenario, &distances, &powers, |i| distances[i])?;
        let assignment = hungarian_assign(&payoff)?;
        let links = scenario.device_links(assignment.as_slice());
        let sol = iterate_power_distance(&links, &distances, &powers, &scenario.params, cfg)?;
        iterations += sol.iterations;
        distances.clone_from(&sol.distances);
        powers.clone_from(&sol.powers);
        if best.as_ref().is_none_or(|(_, b)| sol.tc > b.tc) {
            best = Some((assignment, sol));
        }
    }
    let (assignment, sol) = best.expect("m_out >= 1");
    Ok(Allocation::from_solution(
        Strategy::Proposed,
        scenario,
        assignment.as_slice(),
        &sol,
        iterations,
    ))
}

/// The distance-power fixed point run on every assignment; the best TC wins
/// (first in lexicographic order on ties).
pub fn exhaustive_tc_max(scenario: &Scenario) -> Result<Allocation> {
    scenario.validate()?;
    let cfg = &scenario.config;
    let k = scenario.num_devices();
    let distances = vec![cfg.d_init; k];
    let powers = vec![scenario.equal_power(); k];
    let mut best: Option<(Vec<usize>, PowerDistanceSolution)> = None;
    let mut failure = None;
    let mut iterations = 0;
    for_each_injection(k, scenario.band.len(), cfg.enumeration_cap, |n_of_k| {
        if failure.is_some() {
            return;
        }
        let links = scenario.device_links(n_of_k);
        match iterate_power_distance(&links, &distances, &powers, &scenario.params, cfg) {
            Ok(sol) => {
                iterations += sol.iterations;
                if best.as_ref().is_none_or(|(_, b)| sol.tc > b.tc) {
                    best = Some((n_of_k.to_vec(), sol));
                }
            }
            // An assignment on which some floor cannot be met is simply not a candidate.
            Err(Error::Infeasible { .. }) => {}
            Err(e) => failure = Some(e),
        }
    })?;
    if let Some(e) = failure {
        return Err(e);
    }
    let (assignment, sol) = best.ok_or_else(|| Error::Infeasible {
        devices: (0..k).collect(),
    })?;
    Ok(Allocation::from_solution(
        Strategy::Exhaustive,
        scenario,
        &assignment,
        &sol,
        iterations,
    ))
}

/// Indices of `0..len` sorted by `key`, ties kept in index order.
fn stable_order(len: usize, key: impl Fn(usize) -> f64) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..len).collect();
    idx.sort_by(|&a, &b| key(a).total_cmp(&key(b)));
    idx
}

fn check_feasible(scenario: &Scenario, assignment: &[usize]) -> Result<Vec<DeviceLink>> {
    let links = scenario.device_links(assignment);
    let infeasible = infeasible_devices(&links, &scenario.params, scenario.config.d_min);
    if infeasible.is_empty() {
        Ok(links)
    } else {
        Err(Error::Infeasible {
            devices: infeasible,
        })
    }
}

/// Sum-distance benchmark. The device with the smallest rate floor takes the
/// subwindow with the smallest absorption coefficient, and so on. Each device
/// then runs exactly at its floor, with distances from the KKT condition
/// `nu snr_k sigma^2 (2 d + k_abs d^2) e^{k_abs d} (4 pi f / c)^2 / (Gt Gr) = 1`
/// and `nu` set so the budget is spent.
pub fn distance_max_benchmark(scenario: &Scenario) -> Result<Allocation> {
    scenario.validate()?;
    let k = scenario.num_devices();
    if let Some(i) = scenario.devices.iter().position(|d| d.rate_req <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "distance maximisation needs positive rate floors (device {i})"
        )));
    }
    let by_rate = stable_order(k, |i| scenario.devices[i].rate_req);
    let by_absorption = stable_order(scenario.band.len(), |n| scenario.band.subwindows()[n].k_abs);
    let mut assignment = vec![0; k];
    for (&dev, &n) in by_rate.iter().zip(&by_absorption) {
        assignment[dev] = n;
    }
    let links = check_feasible(scenario, &assignment)?;

    let ln_snrs: Vec<f64> = links
        .iter()
        .map(|l| required_snr(l.rate_req / l.carrier.bandwidth).ln())
        .collect();
    let params = &scenario.params;

    let distance_for = |i: usize, ln_nu: f64| -> Result<f64> {
        let c = &links[i].carrier;
        // ln(d (2 + k d)) + k d = ln(Gt Gr (c / 4 pi f)^2 / sigma^2) - ln snr - ln nu
        let rhs = c.ln_snr_scale(params) - ln_snrs[i] - ln_nu;
        let phi = |ln_d: f64| {
            let d = ln_d.exp();
            ln_d + (2.0 + c.k_abs * d).ln() + c.k_abs * d - rhs
        };
        let hi = rhs - std::f64::consts::LN_2;
        let mut lo = hi - 1.0;
        while phi(lo) > 0.0 {
            lo = hi - 2.0 * (hi - lo);
        }
        Ok(bisect(phi, lo, hi, 0.0, 400)?.exp())
    };
    let ln_power = |i: usize, d: f64| {
        let c = &links[i].carrier;
        ln_snrs[i] - c.ln_snr_scale(params) + c.k_abs * d + 2.0 * d.ln()
    };
    let excess = |ln_nu: f64| -> f64 {
        let mut total = 0.0;
        for i in 0..k {
            match distance_for(i, ln_nu) {
                Ok(d) => total += ln_power(i, d).exp(),
                Err(_) => return f64::NAN,
            }
        }
        (total / params.p_total).ln()
    };

    // Start from the absorption-free solution for an average device and widen
    // geometrically until the budget residual changes sign.
    let mean_scale = links
        .iter()
        .map(|l| l.carrier.ln_snr_scale(params))
        .sum::<f64>()
        / k as f64;
    let mean_snr = ln_snrs.iter().sum::<f64>() / k as f64;
    let guess = 0.5 * (mean_scale - mean_snr - 4f64.ln() - (params.p_total / k as f64).ln());
    let (mut lo, mut hi) = (guess - 1.0, guess + 1.0);
    let mut widen = 0;
    while excess(lo) < 0.0 || excess(hi) > 0.0 {
        if excess(lo) < 0.0 {
            lo -= 4.0;
        }
        if excess(hi) > 0.0 {
            hi += 4.0;
        }
        widen += 1;
        if widen > 200 {
            return Err(Error::Convergence {
                what: "distance-maximisation dual bracket",
                iterations: widen,
            });
        }
    }
    // Keep the upper end so the budget is never exceeded.
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if excess(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let ln_nu = hi;
    let distances = (0..k)
        .map(|i| distance_for(i, ln_nu))
        .collect::<Result<Vec<f64>>>()?;
    let powers: Vec<f64> = (0..k).map(|i| ln_power(i, distances[i]).exp()).collect();
    let regimes = vec![Regime::DistanceMaximized; k];
    Ok(Allocation::build(
        Strategy::Distmax,
        scenario,
        &assignment,
        &distances,
        &powers,
        Some(&regimes),
        0,
    ))
}

/// Non-adaptive benchmark: devices in descending order of rate floor take
/// subwindows from the lowest frequency up, power is split equally, and each
/// device uses its TC-optimal distance unless that breaks its floor, in which
/// case it uses its maximum feasible distance.
pub fn non_adaptive_benchmark(scenario: &Scenario) -> Result<Allocation> {
    scenario.validate()?;
    let k = scenario.num_devices();
    let order = stable_order(k, |i| -scenario.devices[i].rate_req);
    let mut assignment = vec![0; k];
    for (n, &dev) in order.iter().enumerate() {
        assignment[dev] = n;
    }
    let links = check_feasible(scenario, &assignment)?;
    let p = scenario.equal_power();
    let mut distances = Vec::with_capacity(k);
    let mut regimes = Vec::with_capacity(k);
    for link in &links {
        let r = classify_regime(
            p,
            link.rate_req,
            &link.carrier,
            &scenario.params,
            scenario.config.d_min,
        )?;
        distances.push(r.d_opt);
        regimes.push(r.regime);
    }
    Ok(Allocation::build(
        Strategy::Nonadaptive,
        scenario,
        &assignment,
        &distances,
        &vec![p; k],
        Some(&regimes),
        0,
    ))
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditFailure(pub String);

/// Checks an allocation against the scenario: injective assignment, power
/// budget, non-negative powers and positive distances, and (for strategies with
/// floors) every rate at or above its floor.
pub fn audit(
    allocation: &Allocation,
    scenario: &Scenario,
) -> std::result::Result<(), AuditFailure> {
    let fail = |m: String| Err(AuditFailure(m));
    if allocation.devices.len() != scenario.num_devices() {
        return fail(format!(
            "{} allocated devices for {} in the scenario",
            allocation.devices.len(),
            scenario.num_devices()
        ));
    }
    if Assignment::new(allocation.assignment(), scenario.band.len()).is_err() {
        return fail("subwindow assignment is not injective".into());
    }
    let budget = scenario.params.p_total;
    if allocation.power_used > budget * (1.0 + AUDIT_TOLERANCE) {
        return fail(format!(
            "power {} exceeds budget {budget}",
            allocation.power_used
        ));
    }
    for (k, (dev, spec)) in allocation.devices.iter().zip(&scenario.devices).enumerate() {
        if !(dev.power >= 0.0) {
            return fail(format!("device {k}: negative power {}", dev.power));
        }
        if !(dev.distance > 0.0 && dev.distance.is_finite()) {
            return fail(format!("device {k}: invalid distance {}", dev.distance));
        }
        if allocation.strategy.has_rate_floors()
            && dev.rate < spec.rate_req * (1.0 - AUDIT_TOLERANCE)
        {
            return fail(format!(
                "device {k}: rate {} below floor {}",
                dev.rate, spec.rate_req
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assignment::exhaustive_assign;
    use crate::band::Subwindow;
    use approx::assert_relative_eq;

    fn params(p_dbm: f64) -> LinkParams {
        LinkParams::from_db(15.0, 15.0, -168.0, p_dbm).unwrap()
    }

    fn flat_band(n: usize, k_abs: f64) -> BandPlan {
        BandPlan::contiguous(500e9, 1e9, n, |_| Ok(k_abs)).unwrap()
    }

    fn variable(rates_bits_per_hz: &[f64], w: f64) -> Vec<DeviceSpec> {
        rates_bits_per_hz
            .iter()
            .map(|r| DeviceSpec {
                rate_req: r * w,
                fixed_distance: None,
            })
            .collect()
    }

    #[test]
    fn single_fixed_device_takes_best_subwindow_and_full_power() {
        let band = BandPlan::new(
            vec![
                Subwindow {
                    frequency: 500e9,
                    k_abs: 0.9,
                },
                Subwindow {
                    frequency: 510e9,
                    k_abs: 0.1,
                },
                Subwindow {
                    frequency: 520e9,
                    k_abs: 0.5,
                },
            ],
            1e9,
        )
        .unwrap();
        let s = Scenario::new(
            band,
            params(20.0),
            vec![DeviceSpec {
                rate_req: 0.0,
                fixed_distance: Some(4.0),
            }],
            SolverConfig::default(),
        )
        .unwrap();
        let a = fixed_distance_tc_max(&s).unwrap();
        assert_eq!(a.devices[0].subwindow, 1);
        assert_relative_eq!(a.devices[0].power, s.params.p_total, max_relative = 1e-14);
        audit(&a, &s).unwrap();
    }

    #[test]
    fn far_device_avoids_absorbing_subwindow() {
        let band = BandPlan::new(
            vec![
                Subwindow {
                    frequency: 550e9,
                    k_abs: 1.5,
                },
                Subwindow {
                    frequency: 560e9,
                    k_abs: 0.05,
                },
            ],
            1e9,
        )
        .unwrap();
        let devices = vec![
            DeviceSpec {
                rate_req: 0.0,
                fixed_distance: Some(1.0),
            },
            DeviceSpec {
                rate_req: 0.0,
                fixed_distance: Some(10.0),
            },
        ];
        let s = Scenario::new(band, params(30.0), devices, SolverConfig::default()).unwrap();
        let a = fixed_distance_tc_max(&s).unwrap();
        // Oracle: enumerate both assignments of the equal-power payoff.
        let d = [1.0, 10.0];
        let payoff = PayoffMatrix::from_fn(2, 2, |k, n| {
            d[k] * s
                .band
                .carrier(n)
                .rate(d[k], s.params.p_total / 2.0, &s.params)
        })
        .unwrap();
        let best = exhaustive_assign(&payoff, 1e7).unwrap();
        assert_eq!(a.assignment(), best.as_slice());
        assert_eq!(a.devices[1].subwindow, 1);
    }

    #[test]
    fn equidistant_sum_rate_matches_tc_assignment() {
        let t = crate::band::AbsorptionTable::synthetic();
        let band = BandPlan::contiguous(500e9, 1e9, 100, |f| t.lookup(f)).unwrap();
        let devices = vec![
            DeviceSpec {
                rate_req: 0.0,
                fixed_distance: Some(3.0)
            };
            30
        ];
        let s = Scenario::new(band, params(30.0), devices, SolverConfig::default()).unwrap();
        let a = fixed_distance_tc_max(&s).unwrap();
        let b = sum_rate_max(&s).unwrap();
        assert_eq!(a.assignment(), b.assignment());
        for (x, y) in a.devices.iter().zip(&b.devices) {
            assert_relative_eq!(x.power, y.power, max_relative = 1e-9);
        }
    }

    #[test]
    fn fixed_pipeline_requires_distances() {
        let s = Scenario::new(
            flat_band(2, 0.1),
            params(10.0),
            variable(&[1.0], 1e9),
            SolverConfig::default(),
        )
        .unwrap();
        assert!(fixed_distance_tc_max(&s).is_err());
    }

    #[test]
    fn scenario_validation() {
        let cfg = SolverConfig::default();
        assert!(Scenario::new(flat_band(2, 0.1), params(10.0), vec![], cfg).is_err());
        assert!(Scenario::new(
            flat_band(1, 0.1),
            params(10.0),
            variable(&[1.0, 1.0], 1e9),
            cfg
        )
        .is_err());
        assert!(
            Scenario::new(flat_band(2, 0.1), params(10.0), variable(&[-1.0], 1e9), cfg).is_err()
        );
        let bad = vec![DeviceSpec {
            rate_req: 0.0,
            fixed_distance: Some(0.0),
        }];
        assert!(Scenario::new(flat_band(2, 0.1), params(10.0), bad, cfg).is_err());
    }

    #[test]
    fn distmax_pins_rates_and_spends_budget() {
        let t = crate::band::AbsorptionTable::synthetic();
        let band = BandPlan::contiguous(500e9, 1e9, 20, |f| t.lookup(f)).unwrap();
        let rates: Vec<f64> = (0..12).map(|k| 1.0 + 0.25 * k as f64).collect();
        let s = Scenario::new(
            band,
            params(30.0),
            variable(&rates, 1e9),
            SolverConfig::default(),
        )
        .unwrap();
        let a = distance_max_benchmark(&s).unwrap();
        for (dev, spec) in a.devices.iter().zip(&s.devices) {
            assert!(((dev.rate - spec.rate_req) / spec.rate_req).abs() < 1e-9);
        }
        assert_relative_eq!(a.power_used, s.params.p_total, max_relative = 1e-9);
        audit(&a, &s).unwrap();
        // Smallest floor sits on the least absorbing subwindow.
        let min_k = s
            .band
            .subwindows()
            .iter()
            .map(|w| w.k_abs)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(a.devices[0].k_abs, min_k);
    }

    #[test]
    fn distmax_without_absorption_matches_closed_form() {
        let band = flat_band(4, 0.0);
        let s = Scenario::new(
            band,
            params(20.0),
            variable(&[1.0, 2.0, 3.0], 1e9),
            SolverConfig::default(),
        )
        .unwrap();
        let a = distance_max_benchmark(&s).unwrap();
        // d_k = Gt Gr c^2 / (2 nu snr_k sigma^2 (4 pi f_k)^2), so
        // d_k^2 snr_k^2 f_k^4 is the same for every k.
        let inv: Vec<f64> = a
            .devices
            .iter()
            .zip(&s.devices)
            .map(|(d, spec)| {
                let snr = required_snr(spec.rate_req / 1e9);
                d.distance * snr * d.frequency * d.frequency
            })
            .collect();
        for v in &inv {
            assert_relative_eq!(*v, inv[0], max_relative = 1e-10);
        }
    }

    #[test]
    fn nonadaptive_order_and_equal_split() {
        let band = flat_band(6, 0.1);
        let s = Scenario::new(
            band,
            params(20.0),
            variable(&[1.0, 3.0, 2.0, 3.0], 1e9),
            SolverConfig::default(),
        )
        .unwrap();
        let a = non_adaptive_benchmark(&s).unwrap();
        assert_eq!(a.assignment(), vec![3, 0, 2, 1]);
        for d in &a.devices {
            assert_relative_eq!(d.power, s.params.p_total / 4.0, max_relative = 1e-15);
        }
        assert_relative_eq!(a.power_used, s.params.p_total, max_relative = 1e-14);
        audit(&a, &s).unwrap();
    }

    #[test]
    fn nonadaptive_single_device_equals_proposed() {
        let band = flat_band(3, 0.2);
        let s = Scenario::new(
            band,
            params(10.0),
            variable(&[1.0], 1e9),
            SolverConfig::default(),
        )
        .unwrap();
        let a = non_adaptive_benchmark(&s).unwrap();
        let b = proposed_tc_max(&s).unwrap();
        assert_eq!(a.devices[0].subwindow, 0);
        assert_eq!(b.devices[0].subwindow, 0);
        assert_relative_eq!(a.tc, b.tc, max_relative = 1e-9);
    }

    #[test]
    fn proposed_feasible_and_deterministic() {
        let t = crate::band::AbsorptionTable::synthetic();
        let band = BandPlan::contiguous(500e9, 1e9, 30, |f| t.lookup(f)).unwrap();
        let rates: Vec<f64> = (0..30).map(|k| (1 + k % 4) as f64).collect();
        let s = Scenario::new(
            band,
            params(30.0),
            variable(&rates, 1e9),
            SolverConfig::default(),
        )
        .unwrap();
        let a = proposed_tc_max(&s).unwrap();
        audit(&a, &s).unwrap();
        assert_relative_eq!(a.power_used, s.params.p_total, max_relative = 1e-9);
        assert_eq!(a, proposed_tc_max(&s).unwrap());
    }

    #[test]
    fn exhaustive_single_subwindow_matches_inner_solver() {
        let band = flat_band(1, 0.3);
        let s = Scenario::new(
            band,
            params(10.0),
            variable(&[1.0], 1e9),
            SolverConfig::default(),
        )
        .unwrap();
        let a = exhaustive_tc_max(&s).unwrap();
        let links = s.device_links(&[0]);
        let sol =
            iterate_power_distance(&links, &[10.0], &[s.params.p_total], &s.params, &s.config)
                .unwrap();
        assert_eq!(a.tc, sol.tc);
    }

    #[test]
    fn exhaustive_symmetric_pair_matches_proposed() {
        let band = flat_band(2, 0.1);
        let s = Scenario::new(
            band,
            params(20.0),
            variable(&[1.0, 1.0], 1e9),
            SolverConfig::default(),
        )
        .unwrap();
        let a = exhaustive_tc_max(&s).unwrap();
        let b = proposed_tc_max(&s).unwrap();
        assert_relative_eq!(a.tc, b.tc, max_relative = 1e-6);
    }

    #[test]
    fn strategy_names_round_trip() {
        for s in Strategy::ALL {
            assert_eq!(s.as_str().parse::<Strategy>().unwrap(), s);
        }
        assert!("nope".parse::<Strategy>().is_err());
    }
}
