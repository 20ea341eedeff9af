use proptest::prelude::*;
use tera_tc_core::waterfill::{waterfill, WaterfillInput};

fn instance() -> impl Strategy<Value = (Vec<f64>, Vec<f64>, f64)> {
    (1usize..=20).prop_flat_map(|k| {
        (
            prop::collection::vec(0.5f64..40.0, k),
            prop::collection::vec(-8.0f64..2.0, k),
            -3.0f64..2.0,
        )
            .prop_map(|(w, lg, lb)| {
                (
                    w,
                    lg.iter().map(|x| 10f64.powf(*x)).collect(),
                    10f64.powf(lb),
                )
            })
    })
}

fn objective(w: &[f64], g: &[f64], p: &[f64]) -> f64 {
    w.iter()
        .zip(g)
        .zip(p)
        .map(|((w, g), p)| w * (1.0 + p / g).log2())
        .sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn kkt_and_budget((w, g, budget) in instance()) {
        let input = WaterfillInput::new(w.clone(), g.clone(), budget).unwrap();
        let sol = waterfill(&input).unwrap();
        let used: f64 = sol.powers.iter().sum();
        prop_assert!((used - budget).abs() <= 1e-9 * budget);
        let level = 1.0 / sol.water_level;
        for k in 0..w.len() {
            prop_assert!(sol.powers[k] >= 0.0);
            if sol.powers[k] > 0.0 {
                let lk = (sol.powers[k] + g[k]) / w[k];
                prop_assert!((lk - level).abs() <= 1e-8 * level, "active level {lk} vs {level}");
            } else {
                prop_assert!(g[k] / w[k] >= level * (1.0 - 1e-8));
            }
        }
    }

    #[test]
    fn pairwise_transfers_do_not_help((w, g, budget) in instance()) {
        let input = WaterfillInput::new(w.clone(), g.clone(), budget).unwrap();
        let p = waterfill(&input).unwrap().powers;
        let base = objective(&w, &g, &p);
        for i in 0..w.len() {
            for j in 0..w.len() {
                let delta = 1e-4 * p[i];
                if i == j || delta == 0.0 {
                    continue;
                }
                let mut q = p.clone();
                q[i] -= delta;
                q[j] += delta;
                prop_assert!(objective(&w, &g, &q) <= base * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn powers_grow_with_budget((w, g, budget) in instance(), factor in 1.0f64..10.0) {
        let a = waterfill(&WaterfillInput::new(w.clone(), g.clone(), budget).unwrap()).unwrap();
        let b = waterfill(&WaterfillInput::new(w, g, budget * factor).unwrap()).unwrap();
        for (x, y) in a.powers.iter().zip(&b.powers) {
            prop_assert!(*y >= *x * (1.0 - 1e-9) - 1e-15 * budget);
        }
    }
}
