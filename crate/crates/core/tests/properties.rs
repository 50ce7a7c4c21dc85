mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rug::{Float, Rational};
use selfsim::factor::{build_factor, build_factor_constrained, OddConvention};
use selfsim::limit::{aggregate_estimates, limit_power_restriction, LimitEstimate, OrderValue};
use selfsim::numeric::{real, PRECISION};
use selfsim::prony::{solve_prony, Term};
use selfsim::report::{emit_report, run_scenario, Format, RunOptions};
use selfsim::scenario::builtin;
use selfsim::series::{transform_series, AsymptoticSeries, PowerPrefactor};

use common::*;

fn separated_terms(seed: u64, count: usize, min_gap: f64) -> Vec<Term> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let terms = random_terms(&mut rng, count);
        if node_separation(&terms) >= min_gap {
            return terms;
        }
    }
}

fn raw_estimate(values: &[Option<f64>]) -> LimitEstimate {
    LimitEstimate::from_raw(
        values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let v = v.map_or_else(|| OrderValue::Unavailable("no value".into()), OrderValue::Value);
                (i + 1, v)
            })
            .collect::<BTreeMap<_, _>>(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn prony_recovers_generated_terms(seed in any::<u64>(), count in 1usize..=4) {
        let terms = separated_terms(seed, count, 1e-3);
        let got = solve_prony(&moments_of(&terms, 2 * count), count, None, None).unwrap();
        prop_assert!(term_mismatch(&terms, &got) < 1e-20);
    }

    #[test]
    fn factor_approximant_reexpands_its_series(seed in any::<u64>(), count in 1usize..=3, extra in 0usize..=1) {
        let terms = separated_terms(seed, count, 1e-2);
        let k = 2 * count - extra;
        let series = product_series(&terms, k);
        for convention in [OddConvention::UnitNode, OddConvention::FirstCoefficient] {
            let Ok(approx) = build_factor(&series, convention) else { continue };
            let expansion = approx.expand(k);
            for (g, w) in expansion.coefficients().iter().zip(series.coefficients()) {
                let diff = Float::with_val(PRECISION, g - w).abs().to_f64();
                prop_assert!(diff <= 1e-10 * w.to_f64().abs().max(1.0));
            }
        }
    }

    #[test]
    fn binomial_products_are_recovered_exactly(seed in any::<u64>(), count in 1usize..=3) {
        let terms = separated_terms(seed, count, 1e-2);
        let approx = build_factor(&product_series(&terms, 2 * count), OddConvention::UnitNode).unwrap();
        let got: Vec<Term> = approx
            .factors
            .iter()
            .map(|f| Term { node: f.node.clone(), weight: f.exponent.clone() })
            .collect();
        prop_assert!(term_mismatch(&terms, &got) < 1e-20);
    }

    #[test]
    fn aggregation_is_deterministic_and_fills_only_interior_gaps(
        values in prop::collection::vec(prop::option::weighted(0.7, -1.0f64..1.0), 2..12),
    ) {
        let raw = raw_estimate(&values);
        let first = aggregate_estimates(&raw);
        let second = aggregate_estimates(&raw);
        prop_assert_eq!(&first, &second);
        let Ok(agg) = first else { return Ok(()) };
        for (i, v) in values.iter().enumerate() {
            let k = i + 1;
            match v {
                Some(x) => prop_assert_eq!(agg.filled[&k], *x),
                None => {
                    let lo = i.checked_sub(1).and_then(|j| values[j]);
                    let hi = values.get(i + 1).copied().flatten();
                    match (lo, hi) {
                        (Some(a), Some(b)) => prop_assert_eq!(agg.filled[&k], (a + b) / 2.0),
                        _ => prop_assert!(!agg.filled.contains_key(&k)),
                    }
                }
            }
        }
        let top: Vec<f64> = agg.filled.values().rev().take(2).copied().collect();
        prop_assert_eq!(agg.final_value, Some((top[0] + top[1]) / 2.0));
    }

    #[test]
    fn transformation_shifts_the_first_coefficient(
        a1 in -50i64..50,
        alpha in (-6i64..6).prop_filter("nonzero", |a| *a != 0),
        omega in 1i64..8,
        den in 1i64..5,
    ) {
        let alpha = Rational::from((alpha, den));
        let omega = Rational::from((omega, den));
        let series = AsymptoticSeries::new(
            PowerPrefactor::new(real(1.0), alpha.clone()).unwrap(),
            Rational::from(1),
            vec![Rational::from(1), Rational::from(a1)],
        )
        .unwrap();
        let b = transform_series(&series, &omega).unwrap();
        prop_assert_eq!(b.base.coefficients()[1].clone(), Rational::from(a1) + alpha / omega);
    }
}

#[test]
fn constrained_approximants_reach_their_limit() {
    let g = real(1e8);
    for (name, orders) in [("string", 3..=15), ("membrane", 1..=4)] {
        let scenario = builtin(name).unwrap();
        let orders: Vec<usize> = orders.collect();
        let limits = limit_power_restriction(&scenario.series, &orders).unwrap();
        for k in orders {
            let Some(limit) = limits.per_order[&k].value() else { continue };
            let approx = build_factor_constrained(&scenario.series.truncated(k)).unwrap();
            let value = approx.evaluate(&g).unwrap().to_f64();
            assert!((value - limit).abs() <= 1e-6 * limit.abs(), "{name} k={k}: {value} vs {limit}");
        }
    }
}

#[test]
fn csv_reports_are_byte_identical_across_runs() {
    for name in ["string", "membrane", "oscillator", "polaron"] {
        let scenario = builtin(name).unwrap();
        let first = emit_report(&run_scenario(&scenario, &RunOptions::default()), Format::Csv).unwrap();
        let second = emit_report(&run_scenario(&scenario, &RunOptions::default()), Format::Csv).unwrap();
        assert_eq!(first, second, "{name}");
    }
}
