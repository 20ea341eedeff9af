//! Joint power and distance determination for a fixed subwindow assignment.
//!
//! A device's rate-distance product `T(d) = d W log2(1 + snr(d))` is strictly
//! quasiconcave in `d`. Its peak satisfies
//!
//! ```text
//! ln(1 + snr) (1 + snr) / snr = 2 + k_abs d
//! ```
//!
//! When a minimum rate is imposed and the peak rate falls short of it, the
//! device instead sits at the largest distance meeting the rate exactly. The
//! multi-device problem is solved by freezing the absorption term at the
//! current distances, solving the resulting convex distance problem in closed
//! form (dual variable `nu` on the power budget), smoothing, and repeating.

use std::f64::consts::LN_2;

use serde::{Deserialize, Serialize};

use crate::channel::{required_snr, spectral_efficiency, Carrier, LinkParams};
use crate::config::SolverConfig;
use crate::error::{Error, Result};
use crate::search::bisect;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// The rate floor is slack at the TC-optimal distance.
    TcMaximized,
    /// The rate floor binds; the device sits at its maximum feasible distance.
    DistanceMaximized,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::TcMaximized => "tc_maximized",
            Regime::DistanceMaximized => "distance_maximized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeResult {
    pub regime: Regime,
    pub d_opt: f64,
    pub snr_opt: f64,
    pub spectral_eff_opt: f64,
}

/// A device bound to a subwindow, with its minimum rate in bps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeviceLink {
    pub carrier: Carrier,
    pub rate_req: f64,
}

/// `ln(1 + snr) (1 + snr) / snr`, strictly increasing on (0, inf) with infimum 1.
pub fn stationarity_lhs(snr: f64) -> f64 {
    if snr <= 0.0 {
        return 1.0;
    }
    if snr.is_infinite() {
        return f64::INFINITY;
    }
    snr.ln_1p() / snr * (1.0 + snr)
}

/// Same as [`stationarity_lhs`] but from `ln(snr)`, so links with overflowing
/// SNR stay finite.
fn stationarity_lhs_ln(ln_snr: f64) -> f64 {
    if ln_snr > 700.0 {
        // ln(1 + x) (1 + 1/x) = ln x + O(ln x / x)
        ln_snr
    } else {
        stationarity_lhs(ln_snr.exp())
    }
}

/// Unique `snr > 0` with `ln(1 + snr)(1 + snr)/snr = 2 + absorption_exponent`.
///
/// Solved in `u = ln(1 + snr)`, where the equation reads `u / (1 - e^-u) = 2 + a`.
/// The left side exceeds `u`, so `[0, 2 + a]` always brackets the root, however
/// large the exponent.
pub fn solve_stationarity_snr(absorption_exponent: f64) -> Result<f64> {
    if !(absorption_exponent >= 0.0) || absorption_exponent.is_infinite() {
        return Err(Error::Domain {
            what: "absorption exponent",
            value: absorption_exponent,
        });
    }
    let target = 2.0 + absorption_exponent;
    let g = |u: f64| u / -(-u).exp_m1() - target;
    let u = bisect(g, 1e-9, target, 0.0, 2000)?;
    Ok(u.exp_m1())
}

/// `lhs(snr) - 2 - k_abs d`: zero exactly at the TC-optimal distance.
pub fn stationarity_residual(snr: f64, absorption_exponent: f64) -> f64 {
    stationarity_lhs(snr) - 2.0 - absorption_exponent
}

fn check_power(power: f64) -> Result<()> {
    if power > 0.0 && power.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "power",
            value: power,
        })
    }
}

/// Distance at which an absorption-free link reaches `snr` with `power`.
fn free_space_distance(carrier: &Carrier, power: f64, snr: f64, params: &LinkParams) -> f64 {
    ((power.ln() + carrier.ln_snr_scale(params) - snr.ln()) / 2.0).exp()
}

const ROOT_MAX_ITER: usize = 200;

/// Inner steps without a new smallest TC change before the smoothing is damped further.
const STALL_PATIENCE: usize = 20;

/// The unconstrained TC-optimal distance `d^o` at a given power, and the SNR there.
///
/// The stationarity residual is strictly decreasing in `d` (SNR falls while the
/// absorption exponent grows), so the peak of `T(d)` is found as the root of the
/// residual by bisection in `ln d`. The absorption-free optimum bounds it from
/// above.
pub fn optimal_distance_pair(
    power: f64,
    carrier: &Carrier,
    params: &LinkParams,
) -> Result<(f64, f64)> {
    check_power(power)?;
    let residual = |ln_d: f64| {
        let d = ln_d.exp();
        stationarity_lhs_ln(carrier.ln_snr(d, power, params)) - 2.0 - carrier.k_abs * d
    };
    let xi_free = solve_stationarity_snr(0.0)?;
    let hi = free_space_distance(carrier, power, xi_free, params).ln() + 1.0;
    let mut lo = hi - 2.0;
    let mut steps = 0;
    while residual(lo) <= 0.0 {
        lo -= 2.0;
        steps += 1;
        if steps > ROOT_MAX_ITER {
            return Err(Error::Convergence {
                what: "optimal distance bracket",
                iterations: steps,
            });
        }
    }
    let d = bisect(residual, lo, hi, 0.0, ROOT_MAX_ITER)?.exp();
    let snr = carrier.ln_snr(d, power, params).exp();
    let check = stationarity_residual(snr, carrier.k_abs * d);
    if !(check.abs() < 1e-6) {
        return Err(Error::Convergence {
            what: "optimal distance (stationarity residual)",
            iterations: ROOT_MAX_ITER,
        });
    }
    Ok((d, snr))
}

/// Largest distance at which `power` still delivers `rate_req` bps.
pub fn max_distance(
    power: f64,
    rate_req: f64,
    carrier: &Carrier,
    params: &LinkParams,
    d_min: f64,
) -> Result<f64> {
    check_power(power)?;
    if !(rate_req > 0.0 && rate_req.is_finite()) {
        return Err(Error::Domain {
            what: "rate requirement",
            value: rate_req,
        });
    }
    let ln_target = required_snr(rate_req / carrier.bandwidth).ln();
    let excess = |ln_d: f64| carrier.ln_snr(ln_d.exp(), power, params) - ln_target;
    let lo = d_min.ln();
    if excess(lo) < 0.0 {
        return Err(Error::Infeasible { devices: vec![] });
    }
    let hi = ((carrier.ln_snr(1.0, power, params) - ln_target) / 2.0).max(lo);
    if excess(hi) >= 0.0 {
        // Only when k_abs = 0, where the absorption-free bound is exact.
        return Ok(hi.exp());
    }
    Ok(bisect(excess, lo, hi, 0.0, ROOT_MAX_ITER)?.exp())
}

/// Regime of a single device at a given power and its best distance under the rate floor.
pub fn classify_regime(
    power: f64,
    rate_req: f64,
    carrier: &Carrier,
    params: &LinkParams,
    d_min: f64,
) -> Result<RegimeResult> {
    let (d_o, snr_o) = optimal_distance_pair(power, carrier, params)?;
    let eta_o = spectral_efficiency(snr_o);
    if rate_req <= carrier.bandwidth * eta_o {
        if d_o >= d_min {
            return Ok(RegimeResult {
                regime: Regime::TcMaximized,
                d_opt: d_o,
                snr_opt: snr_o,
                spectral_eff_opt: eta_o,
            });
        }
        // The peak lies below d_min; T is decreasing from there on.
        let snr = carrier.ln_snr(d_min, power, params).exp();
        return Ok(RegimeResult {
            regime: Regime::TcMaximized,
            d_opt: d_min,
            snr_opt: snr,
            spectral_eff_opt: spectral_efficiency(snr),
        });
    }
    let d_max = max_distance(power, rate_req, carrier, params, d_min)?;
    let snr = required_snr(rate_req / carrier.bandwidth);
    Ok(RegimeResult {
        regime: Regime::DistanceMaximized,
        d_opt: d_max,
        snr_opt: snr,
        spectral_eff_opt: spectral_efficiency(snr),
    })
}

/// Target SNR for the next update: the stationarity SNR at the current
/// absorption exponent, or the rate-floor SNR when that would be too low.
pub fn select_snr(device: &DeviceLink, distance: f64) -> Result<(f64, Regime)> {
    let snr_tc = solve_stationarity_snr(device.carrier.k_abs * distance)?;
    let w = device.carrier.bandwidth;
    if device.rate_req <= w * spectral_efficiency(snr_tc) {
        Ok((snr_tc, Regime::TcMaximized))
    } else {
        Ok((required_snr(device.rate_req / w), Regime::DistanceMaximized))
    }
}

/// One closed-form distance update with the absorption term frozen at the
/// current distances.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceUpdate {
    pub snrs: Vec<f64>,
    pub regimes: Vec<Regime>,
    /// Dual variable of the power budget.
    pub dual: f64,
    /// Unsmoothed optimal distances `d_hat`.
    pub distances: Vec<f64>,
    /// `ln B_k` with power `p_k = B_k d_k^2` while the absorption term is frozen.
    ln_power_coeffs: Vec<f64>,
    /// `log2(1 + snr_k)`.
    efficiencies: Vec<f64>,
}

impl DistanceUpdate {
    /// Distances `d_k = log2(1 + snr_k) / (2 nu B_k)` for an arbitrary dual value.
    pub fn distances_for_dual(&self, dual: f64) -> Vec<f64> {
        self.efficiencies
            .iter()
            .zip(&self.ln_power_coeffs)
            .map(|(l, ln_b)| (l.ln() - (2.0 * dual).ln() - ln_b).exp())
            .collect()
    }

    /// Power needed to hold each device's target SNR at `distances`.
    pub fn powers_for(&self, distances: &[f64]) -> Vec<f64> {
        self.ln_power_coeffs
            .iter()
            .zip(distances)
            .map(|(ln_b, d)| (ln_b + 2.0 * d.ln()).exp())
            .collect()
    }
}

/// Solves the frozen-absorption problem
/// `max sum_k d_k log2(1 + snr_k)  s.t.  sum_k B_k d_k^2 <= P`.
///
/// Stationarity gives `d_k = log2(1 + snr_k) / (2 nu B_k)`; the budget holds
/// with equality, which fixes `nu = sqrt(sum_k log2(1 + snr_k)^2 / B_k / (4 P))`.
pub fn distance_update(
    devices: &[DeviceLink],
    distances: &[f64],
    params: &LinkParams,
) -> Result<DistanceUpdate> {
    if devices.len() != distances.len() {
        return Err(Error::Dimension(format!(
            "{} devices vs {} distances",
            devices.len(),
            distances.len()
        )));
    }
    let mut snrs = Vec::with_capacity(devices.len());
    let mut regimes = Vec::with_capacity(devices.len());
    let mut ln_power_coeffs = Vec::with_capacity(devices.len());
    let mut efficiencies = Vec::with_capacity(devices.len());
    for (dev, &d) in devices.iter().zip(distances) {
        let (snr, regime) = select_snr(dev, d)?;
        snrs.push(snr);
        regimes.push(regime);
        // B = snr sigma^2 e^{k d} (4 pi f / c)^2 / (Gt Gr)
        ln_power_coeffs.push(snr.ln() - dev.carrier.ln_snr_scale(params) + dev.carrier.k_abs * d);
        efficiencies.push(spectral_efficiency(snr));
    }
    // ln of sum_k l_k^2 / B_k, accumulated stably.
    let terms: Vec<f64> = efficiencies
        .iter()
        .zip(&ln_power_coeffs)
        .map(|(l, ln_b)| 2.0 * l.ln() - ln_b)
        .collect();
    let peak = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let ln_sum = peak + terms.iter().map(|t| (t - peak).exp()).sum::<f64>().ln();
    let dual = (0.5 * (ln_sum - (4.0 * params.p_total).ln())).exp();
    if !(dual > 0.0 && dual.is_finite()) {
        return Err(Error::Convergence {
            what: "power-budget dual",
            iterations: 0,
        });
    }
    let mut update = DistanceUpdate {
        snrs,
        regimes,
        dual,
        distances: Vec::new(),
        ln_power_coeffs,
        efficiencies,
    };
    update.distances = update.distances_for_dual(dual);
    Ok(update)
}

/// Per-device state of the inner loop.
#[derive(Debug, Clone, PartialEq)]
pub struct IterState {
    pub distances: Vec<f64>,
    pub powers: Vec<f64>,
    pub snrs: Vec<f64>,
    pub dual: f64,
    pub iteration: usize,
    pub tc_history: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PowerDistanceSolution {
    pub distances: Vec<f64>,
    pub powers: Vec<f64>,
    pub snrs: Vec<f64>,
    pub rates: Vec<f64>,
    pub regimes: Vec<Regime>,
    pub tc: f64,
    /// Inner iterations until `|dT| <= epsilon`.
    pub iterations: usize,
    /// TC after each inner iteration, before the final feasibility polish.
    pub tc_history: Vec<f64>,
}

fn tc_of(devices: &[DeviceLink], distances: &[f64], powers: &[f64], params: &LinkParams) -> f64 {
    devices
        .iter()
        .zip(distances.iter().zip(powers))
        .map(|(dev, (&d, &p))| d * dev.carrier.rate(d, p, params))
        .sum()
}

/// Devices whose rate floor is out of reach even with the whole budget at `d_min`.
pub fn infeasible_devices(devices: &[DeviceLink], params: &LinkParams, d_min: f64) -> Vec<usize> {
    devices
        .iter()
        .enumerate()
        .filter(|(_, dev)| {
            dev.rate_req > 0.0
                && dev.carrier.ln_snr(d_min, params.p_total, params)
                    < required_snr(dev.rate_req / dev.carrier.bandwidth).ln()
        })
        .map(|(k, _)| k)
        .collect()
}

/// Iterative distance-power fixed point for a fixed assignment.
///
/// Starting from `(distances, powers)`, each step picks target SNRs by regime,
/// solves the frozen-absorption distance problem, smooths
/// `d <- alpha d + (1 - alpha) d_hat`, and sets powers to hold the target SNRs.
/// It stops once the TC changes by at most `epsilon`. The converged powers are
/// then scaled onto the budget and each device is moved to its best distance
/// under its rate floor at that power, which makes every floor hold exactly.
pub fn iterate_power_distance(
    devices: &[DeviceLink],
    distances: &[f64],
    powers: &[f64],
    params: &LinkParams,
    config: &SolverConfig,
) -> Result<PowerDistanceSolution> {
    config.validate()?;
    if devices.is_empty() {
        return Err(Error::InvalidParameter("no devices".into()));
    }
    if devices.len() != distances.len() || devices.len() != powers.len() {
        return Err(Error::Dimension(format!(
            "{} devices, {} distances, {} powers",
            devices.len(),
            distances.len(),
            powers.len()
        )));
    }
    if let Some(d) = distances.iter().find(|d| !(**d > 0.0 && d.is_finite())) {
        return Err(Error::Domain {
            what: "initial distance",
            value: *d,
        });
    }
    if let Some(p) = powers.iter().find(|p| !(**p >= 0.0 && p.is_finite())) {
        return Err(Error::Domain {
            what: "initial power",
            value: *p,
        });
    }
    let infeasible = infeasible_devices(devices, params, config.d_min);
    if !infeasible.is_empty() {
        return Err(Error::Infeasible {
            devices: infeasible,
        });
    }

    let mut state = IterState {
        distances: distances.to_vec(),
        powers: powers.to_vec(),
        snrs: vec![0.0; devices.len()],
        dual: 0.0,
        iteration: 0,
        tc_history: vec![tc_of(devices, distances, powers, params)],
    };
    let mut alpha = config.alpha;
    // Last two TC changes, used to spot a two-cycle.
    let mut deltas = [0.0f64; 2];
    // Smallest |dT| since the damping last changed, and steps since it was set.
    let mut best_delta = f64::INFINITY;
    let mut since_best = 0;
    let mut converged = false;
    while state.iteration < config.max_inner_iterations {
        state.iteration += 1;
        let update = distance_update(devices, &state.distances, params)?;
        let next: Vec<f64> = state
            .distances
            .iter()
            .zip(&update.distances)
            .map(|(d, d_hat)| (alpha * d + (1.0 - alpha) * d_hat).max(config.d_min))
            .collect();
        state.powers = update.powers_for(&next);
        state.distances = next;
        state.snrs = update.snrs;
        state.dual = update.dual;
        let tc = tc_of(devices, &state.distances, &state.powers, params);
        let previous = *state.tc_history.last().unwrap();
        state.tc_history.push(tc);
        let step_scale = (1.0 - alpha) / (1.0 - config.alpha);
        if config.converged(previous, tc, step_scale) {
            converged = true;
            break;
        }
        let delta = tc - previous;
        if delta.abs() < best_delta {
            best_delta = delta.abs();
            since_best = 0;
        } else {
            since_best += 1;
        }
        let alternating = delta * deltas[1] < 0.0 && deltas[1] * deltas[0] < 0.0;
        let two_cycle = alternating && delta.abs() > 0.5 * deltas[0].abs();
        if two_cycle || since_best >= STALL_PATIENCE {
            // Strong absorption can make the smoothed map overshoot into a
            // cycle or wander; damp harder. The fixed point does not move.
            alpha = 1.0 - 0.5 * (1.0 - alpha);
            if 1.0 - alpha < 1e-6 * (1.0 - config.alpha) {
                break;
            }
            deltas = [0.0; 2];
            best_delta = f64::INFINITY;
            since_best = 0;
        } else {
            deltas = [deltas[1], delta];
        }
    }
    if !converged {
        return Err(Error::Convergence {
            what: "power-distance iteration",
            iterations: config.max_inner_iterations,
        });
    }
    finalize(devices, state, params, config)
}

fn finalize(
    devices: &[DeviceLink],
    state: IterState,
    params: &LinkParams,
    config: &SolverConfig,
) -> Result<PowerDistanceSolution> {
    let used: f64 = state.powers.iter().sum();
    let scale = params.p_total / used;
    let powers: Vec<f64> = state.powers.iter().map(|p| p * scale).collect();
    let mut distances = Vec::with_capacity(devices.len());
    let mut snrs = Vec::with_capacity(devices.len());
    let mut regimes = Vec::with_capacity(devices.len());
    for (dev, &p) in devices.iter().zip(&powers) {
        let r = classify_regime(p, dev.rate_req, &dev.carrier, params, config.d_min)?;
        distances.push(r.d_opt);
        snrs.push(r.snr_opt);
        regimes.push(r.regime);
    }
    let rates: Vec<f64> = devices
        .iter()
        .zip(distances.iter().zip(&powers))
        .map(|(dev, (&d, &p))| dev.carrier.rate(d, p, params))
        .collect();
    let tc = distances.iter().zip(&rates).map(|(d, r)| d * r).sum();
    Ok(PowerDistanceSolution {
        distances,
        powers,
        snrs,
        rates,
        regimes,
        tc,
        iterations: state.iteration,
        tc_history: state.tc_history,
    })
}

/// Derivative of `T(d)` with respect to `d` at fixed power, in bps:
/// `W log2(1 + snr) - W (2 + k d) / (ln 2 (1 + 1/snr))`.
pub fn tc_slope(distance: f64, power: f64, carrier: &Carrier, params: &LinkParams) -> f64 {
    let snr = carrier.ln_snr(distance, power, params).exp();
    let w = carrier.bandwidth;
    w * spectral_efficiency(snr) - w * (2.0 + carrier.k_abs * distance) / (LN_2 * (1.0 + 1.0 / snr))
}
