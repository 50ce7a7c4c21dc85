//! Generators and comparisons shared by the integration tests.
#![allow(dead_code)]

use rand::Rng;
use rug::ops::Pow;
use rug::{Complex, Float, Rational};
use selfsim::numeric::{complex, real, PRECISION};
use selfsim::prony::Term;
use selfsim::series::{AsymptoticSeries, MomentVector, PowerPrefactor};

/// Random terms with `|A| ∈ [0.1, 10]` and `|n| ∈ [0.1, 3]`; a conjugate pair
/// replaces two real terms about half the time.
pub fn random_terms<R: Rng>(rng: &mut R, count: usize) -> Vec<Term> {
    let mut terms: Vec<Term> = Vec::with_capacity(count);
    let magnitude = |rng: &mut R, lo: f64, hi: f64| {
        let m = rng.gen_range(lo..hi);
        if rng.gen_bool(0.5) {
            -m
        } else {
            m
        }
    };
    while terms.len() < count {
        if count - terms.len() >= 2 && rng.gen_bool(0.5) {
            let r = rng.gen_range(0.1..10.0);
            let phase = rng.gen_range(0.2..std::f64::consts::PI - 0.2);
            let node = complex(&real(r * phase.cos()), &real(r * phase.sin()));
            let w = rng.gen_range(0.1..3.0);
            let wphase = rng.gen_range(0.0..std::f64::consts::TAU);
            let weight = complex(&real(w * wphase.cos()), &real(w * wphase.sin()));
            terms.push(Term {
                node: node.clone().conj(),
                weight: weight.clone().conj(),
            });
            terms.push(Term { node, weight });
        } else {
            let node = magnitude(rng, 0.1, 10.0);
            let weight = magnitude(rng, 0.1, 3.0);
            terms.push(Term {
                node: complex(&real(node), &real(0.0)),
                weight: complex(&real(weight), &real(0.0)),
            });
        }
    }
    terms
}

/// Smallest pairwise node distance relative to the largest node.
pub fn node_separation(terms: &[Term]) -> f64 {
    let mut scale: f64 = 0.0;
    let mut gap = f64::INFINITY;
    for (i, a) in terms.iter().enumerate() {
        scale = scale.max(Float::with_val(PRECISION, a.node.abs_ref()).to_f64());
        for b in &terms[i + 1..] {
            let d = Complex::with_val(PRECISION, &a.node - &b.node);
            gap = gap.min(Float::with_val(PRECISION, d.abs_ref()).to_f64());
        }
    }
    gap / scale
}

/// `Bₘ = Σ nᵢ Aᵢᵐ` for `m = 1..=count`.
pub fn moments_of(terms: &[Term], count: usize) -> MomentVector<Float> {
    let values = (1..=count)
        .map(|m| {
            let mut sum = Complex::new(PRECISION);
            for t in terms {
                sum += Complex::with_val(PRECISION, (&t.node).pow(m as u32)) * &t.weight;
            }
            sum.real().clone()
        })
        .collect();
    MomentVector { values, zero: None }
}

pub fn relative_gap(a: &Complex, b: &Complex) -> f64 {
    let d = Complex::with_val(PRECISION, a - b);
    let scale = Float::with_val(PRECISION, b.abs_ref()).to_f64().max(1e-300);
    Float::with_val(PRECISION, d.abs_ref()).to_f64() / scale
}

/// Largest relative mismatch between two term lists, matched greedily by node.
pub fn term_mismatch(expected: &[Term], got: &[Term]) -> f64 {
    if expected.len() != got.len() {
        return f64::INFINITY;
    }
    let mut unused: Vec<&Term> = got.iter().collect();
    let mut worst: f64 = 0.0;
    for e in expected {
        let (index, _) = unused
            .iter()
            .enumerate()
            .map(|(i, g)| (i, relative_gap(&g.node, &e.node)))
            .min_by(|x, y| x.1.total_cmp(&y.1))
            .expect("same length");
        let g = unused.remove(index);
        worst = worst.max(relative_gap(&g.node, &e.node)).max(relative_gap(&g.weight, &e.weight));
    }
    worst
}

/// Taylor coefficients of `Πᵢ (1 + Aᵢ g)^{nᵢ}` through order `k`.
pub fn product_series(terms: &[Term], k: usize) -> AsymptoticSeries<Float> {
    // ln Π = Σ_m (-1)^(m-1)/m Bₘ gᵐ
    let moments = moments_of(terms, k);
    let mut logs = vec![Float::new(PRECISION); k + 1];
    for m in 1..=k {
        let v = moments.values[m - 1].clone() / m as u32;
        logs[m] = if m % 2 == 0 { -v } else { v };
    }
    let coefficients = selfsim::series::exp_zero(&logs, k);
    AsymptoticSeries::new(PowerPrefactor::new(real(1.0), Rational::new()).unwrap(), Rational::from(1), coefficients).unwrap()
}

/// `|x - printed| <= 1` unit in the last printed digit.
pub fn matches_printed(x: f64, printed: &str) -> bool {
    let value: f64 = printed.parse().expect("number");
    let (mantissa, exponent) = match printed.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().expect("exponent")),
        None => (printed, 0),
    };
    let decimals = mantissa.split_once('.').map_or(0, |(_, f)| f.len()) as i32;
    let unit = 10f64.powi(exponent - decimals);
    (x - value).abs() <= unit * (1.0 + 1e-9)
}

/// `|x - reference| <= 1` unit in the `digits`-th significant figure.
pub fn matches_significant(x: f64, reference: f64, digits: i32) -> bool {
    if reference == 0.0 {
        return x == 0.0;
    }
    let unit = 10f64.powi(reference.abs().log10().floor() as i32 - digits + 1);
    (x - reference).abs() <= unit * (1.0 + 1e-9)
}
