//! Weighted multilevel water-filling for fixed distances.
//!
//! Maximises `sum_k w_k log(1 + p_k / g_k)` subject to `sum_k p_k = P`, where
//! `w_k` is the device weight (its distance) and `g_k` the inverse effective
//! gain `sigma^2 / |h_k|^2`. The optimum is `p_k = [w_k / lambda - g_k]^+`.

use crate::error::{Error, Result};
use crate::search::bisect;

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillInput {
    weights: Vec<f64>,
    inverse_gains: Vec<f64>,
    budget: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaterfillSolution {
    pub powers: Vec<f64>,
    /// The dual variable `lambda`; active devices satisfy `w_k / (g_k + p_k) = lambda`.
    pub water_level: f64,
}

impl WaterfillInput {
    /// `inverse_gains` may contain `+inf` for links whose gain underflows; those
    /// devices never receive power.
    pub fn new(weights: Vec<f64>, inverse_gains: Vec<f64>, budget: f64) -> Result<Self> {
        if weights.len() != inverse_gains.len() {
            return Err(Error::Dimension(format!(
                "{} weights vs {} inverse gains",
                weights.len(),
                inverse_gains.len()
            )));
        }
        if weights.is_empty() {
            return Err(Error::InvalidParameter(
                "water-filling needs at least one device".into(),
            ));
        }
        if let Some(w) = weights.iter().find(|w| !(**w > 0.0 && w.is_finite())) {
            return Err(Error::Domain {
                what: "weight",
                value: *w,
            });
        }
        if let Some(g) = inverse_gains.iter().find(|g| !(**g > 0.0)) {
            return Err(Error::Domain {
                what: "inverse gain",
                value: *g,
            });
        }
        if !(budget > 0.0 && budget.is_finite()) {
            return Err(Error::Domain {
                what: "budget",
                value: budget,
            });
        }
        Ok(Self {
            weights,
            inverse_gains,
            budget,
        })
    }

    /// Builds the input from `ln g_k`; values beyond the f64 range become `+inf`.
    pub fn from_ln_inverse_gains(
        weights: Vec<f64>,
        ln_inverse_gains: &[f64],
        budget: f64,
    ) -> Result<Self> {
        Self::new(
            weights,
            ln_inverse_gains.iter().map(|l| l.exp()).collect(),
            budget,
        )
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn inverse_gains(&self) -> &[f64] {
        &self.inverse_gains
    }

    pub fn budget(&self) -> f64 {
        self.budget
    }

    fn allocation_at(&self, level: f64) -> f64 {
        self.weights
            .iter()
            .zip(&self.inverse_gains)
            .map(|(w, g)| (w / level - g).max(0.0))
            .sum()
    }
}

pub fn waterfill(input: &WaterfillInput) -> Result<WaterfillSolution> {
    let k = input.weights.len();
    let budget = input.budget;

    // Threshold level below which device k switches on.
    let thresholds: Vec<f64> = input
        .weights
        .iter()
        .zip(&input.inverse_gains)
        .map(|(w, g)| w / g)
        .collect();
    let hi = thresholds.iter().copied().fold(0.0, f64::max);
    if hi == 0.0 {
        // Every gain underflowed: no allocation changes the objective.
        return Ok(WaterfillSolution {
            powers: vec![budget / k as f64; k],
            water_level: 0.0,
        });
    }
    let lo = input
        .weights
        .iter()
        .zip(&input.inverse_gains)
        .map(|(w, g)| w / (g + budget))
        .fold(f64::INFINITY, f64::min);

    // Bisect in log(level); the residual is decreasing in the level. Halving
    // `lo` keeps the bracket strict when one device takes the whole budget.
    let ln_level = bisect(
        |x| input.allocation_at(x.exp()) - budget,
        lo.ln() - std::f64::consts::LN_2,
        hi.ln(),
        f64::EPSILON,
        400,
    )?;
    let mut level = ln_level.exp();

    // With the active set known the level has a closed form; this makes the
    // budget hold to rounding rather than to the bisection tolerance.
    let mut active: Vec<bool> = thresholds.iter().map(|t| *t > level).collect();
    for _ in 0..k + 1 {
        let (w_sum, g_sum) = active
            .iter()
            .enumerate()
            .filter(|(_, a)| **a)
            .fold((0.0, 0.0), |(ws, gs), (i, _)| {
                (ws + input.weights[i], gs + input.inverse_gains[i])
            });
        if w_sum == 0.0 {
            break;
        }
        let exact = w_sum / (budget + g_sum);
        let next: Vec<bool> = thresholds.iter().map(|t| *t > exact).collect();
        level = exact;
        if next == active {
            break;
        }
        active = next;
    }

    let powers = input
        .weights
        .iter()
        .zip(&input.inverse_gains)
        .zip(&active)
        .map(|((w, g), a)| if *a { (w / level - g).max(0.0) } else { 0.0 })
        .collect();
    Ok(WaterfillSolution {
        powers,
        water_level: level,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn objective(input: &WaterfillInput, powers: &[f64]) -> f64 {
        input
            .weights()
            .iter()
            .zip(input.inverse_gains())
            .zip(powers)
            .map(|((w, g), p)| w * (p / g).ln_1p() / std::f64::consts::LN_2)
            .sum()
    }

    #[test]
    fn single_device_takes_everything() {
        let input = WaterfillInput::new(vec![3.0], vec![0.7], 2.5).unwrap();
        let sol = waterfill(&input).unwrap();
        assert_relative_eq!(sol.powers[0], 2.5, max_relative = 1e-15);
    }

    #[test]
    fn symmetric_devices_split_equally() {
        let input = WaterfillInput::new(vec![2.0; 4], vec![0.1; 4], 1.0).unwrap();
        let sol = waterfill(&input).unwrap();
        for p in sol.powers {
            assert_relative_eq!(p, 0.25, max_relative = 1e-14);
        }
    }

    #[test]
    fn weak_device_is_switched_off() {
        let input = WaterfillInput::new(vec![1.0, 1.0], vec![0.1, 50.0], 1.0).unwrap();
        let sol = waterfill(&input).unwrap();
        assert_eq!(sol.powers[1], 0.0);
        assert_relative_eq!(sol.powers[0], 1.0, max_relative = 1e-14);
        assert!(input.weights()[1] / input.inverse_gains()[1] <= sol.water_level);
    }

    #[test]
    fn infinite_inverse_gain_gets_nothing() {
        let input =
            WaterfillInput::from_ln_inverse_gains(vec![1.0, 2.0], &[-3.0, 900.0], 4.0).unwrap();
        assert!(input.inverse_gains()[1].is_infinite());
        let sol = waterfill(&input).unwrap();
        assert_eq!(sol.powers[1], 0.0);
        assert_relative_eq!(sol.powers[0], 4.0, max_relative = 1e-14);
    }

    #[test]
    fn asymmetric_three_devices_matches_simplex_grid() {
        let input = WaterfillInput::new(vec![1.0, 4.0, 9.0], vec![0.05, 0.4, 1.5], 2.0).unwrap();
        let sol = waterfill(&input).unwrap();
        let best = objective(&input, &sol.powers);

        // Dense grid over the simplex p1 + p2 + p3 = P with step P/2000, then a
        // finer grid around the coarse maximiser.
        let p = input.budget();
        let scan = |c1: f64, c2: f64, half: f64, steps: usize| {
            let mut top = (f64::NEG_INFINITY, 0.0, 0.0);
            for i in 0..=steps {
                for j in 0..=steps {
                    let p1 = c1 - half + 2.0 * half * i as f64 / steps as f64;
                    let p2 = c2 - half + 2.0 * half * j as f64 / steps as f64;
                    let p3 = p - p1 - p2;
                    if p1 < 0.0 || p2 < 0.0 || p3 < 0.0 {
                        continue;
                    }
                    let v = objective(&input, &[p1, p2, p3]);
                    if v > top.0 {
                        top = (v, p1, p2);
                    }
                }
            }
            top
        };
        let coarse = scan(p / 2.0, p / 2.0, p / 2.0, 2000);
        let fine = scan(coarse.1, coarse.2, p / 1000.0, 400);
        assert!(best >= fine.0 * (1.0 - 1e-12));
        assert_relative_eq!(best, fine.0, max_relative = 1e-6);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(WaterfillInput::new(vec![1.0], vec![1.0, 2.0], 1.0).is_err());
        assert!(WaterfillInput::new(vec![0.0], vec![1.0], 1.0).is_err());
        assert!(WaterfillInput::new(vec![1.0], vec![0.0], 1.0).is_err());
        assert!(WaterfillInput::new(vec![1.0], vec![1.0], 0.0).is_err());
        assert!(WaterfillInput::new(vec![], vec![], 1.0).is_err());
    }
}
