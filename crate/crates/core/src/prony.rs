//! Prony reduction of the moment system `Σᵢ nᵢ Aᵢᵐ = Bₘ`.
//!
//! The nodes `Aᵢ` are the roots of the monic polynomial whose coefficients
//! solve the Hankel recurrence `B_{m+N} + Σⱼ cⱼ B_{m+j} = 0`; the weights
//! `nᵢ` then follow from a Vandermonde system. Two variants change the row
//! set: a pinned node replaces one Hankel row by `p(t) = 0`, and a known
//! `B₀ = Σ nᵢ` shifts the moment window down by one.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use rug::ops::Pow;
use rug::{Complex, Float};

use crate::error::{Error, Result};
use crate::numeric::{complex, complex_real, epsilon, solve_linear, PRECISION};
use crate::series::MomentVector;

/// One `(Aᵢ, nᵢ)` pair.
#[derive(Clone, Debug, PartialEq)]
pub struct Term {
    pub node: Complex,
    pub weight: Complex,
}

/// Solves the moment system for `nodes` terms.
///
/// Uses `B_s..B_{s+2N-1}` (or one fewer with a pinned node), where `s = 0`
/// when `moment_zero` supplies `B₀` and `s = 1` otherwise.
pub fn solve_prony(
    moments: &MomentVector<Float>,
    nodes: usize,
    fixed_node: Option<&Float>,
    moment_zero: Option<&Float>,
) -> Result<Vec<Term>> {
    if nodes == 0 {
        return Err(Error::invalid("at least one node is required"));
    }
    let start = usize::from(moment_zero.is_none());
    let needed = if fixed_node.is_some() { 2 * nodes - 1 } else { 2 * nodes };
    let moment = |m: usize| -> Option<Float> {
        if m == 0 {
            moment_zero.cloned()
        } else {
            moments.get(m)
        }
    };
    let window: Vec<Float> = (start..start + needed)
        .map(|m| moment(m).ok_or_else(|| Error::invalid(format!("moment B{m} is missing"))))
        .collect::<Result<_>>()?;
    let b = |m: usize| &window[m - start];

    // Hankel rows, plus p(t) = 0 for a pinned node.
    let hankel_rows = if fixed_node.is_some() { nodes - 1 } else { nodes };
    let mut matrix = Vec::with_capacity(nodes);
    let mut rhs = Vec::with_capacity(nodes);
    for m in start..start + hankel_rows {
        matrix.push((0..nodes).map(|j| b(m + j).clone()).collect::<Vec<_>>());
        rhs.push(-b(m + nodes).clone());
    }
    if let Some(t) = fixed_node {
        matrix.push((0..nodes).map(|j| Float::with_val(PRECISION, t.pow(j as u32))).collect());
        rhs.push(-Float::with_val(PRECISION, t.pow(nodes as u32)));
    }
    let coefficients = solve_linear(matrix, rhs, &epsilon(PRECISION as i32 - 40))
        .ok_or_else(|| Error::NoSolution("singular Hankel system".into()))?;

    let mut roots = polynomial_roots(&coefficients)?;
    if let Some(t) = fixed_node {
        snap_to(&mut roots, t);
    }
    check_nodes(&roots)?;
    classify_conjugates(&mut roots)?;

    // Vandermonde system for the weights.
    let matrix: Vec<Vec<Complex>> = (start..start + nodes)
        .map(|m| roots.iter().map(|a| power(a, m)).collect())
        .collect();
    let rhs: Vec<Complex> = (start..start + nodes).map(|m| complex_real(b(m))).collect();
    let weights = solve_linear(matrix, rhs, &epsilon(PRECISION as i32 - 40))
        .ok_or_else(|| Error::NoSolution("singular Vandermonde system".into()))?;

    let mut terms: Vec<Term> = roots
        .into_iter()
        .zip(weights)
        .map(|(node, weight)| Term { node, weight })
        .collect();
    symmetrize_weights(&mut terms);

    let tolerance = Float::with_val(PRECISION, 1e-20);
    for m in start..start + needed {
        let mut sum = Complex::new(PRECISION);
        let mut scale = b(m).clone().abs();
        for term in &terms {
            let contribution = Complex::with_val(PRECISION, &term.weight * power(&term.node, m));
            scale = scale.max(&Float::with_val(PRECISION, contribution.abs_ref()));
            sum += contribution;
        }
        let residual = Float::with_val(PRECISION, (sum - b(m)).abs_ref());
        if residual > Float::with_val(PRECISION, &tolerance * &scale) {
            return Err(Error::NoSolution(format!("moment B{m} not reproduced")));
        }
    }
    sort_terms(&mut terms);
    Ok(terms)
}

fn power(z: &Complex, m: usize) -> Complex {
    Complex::with_val(PRECISION, z.pow(m as u32))
}

/// Canonical order: descending `|A|`, ties by ascending argument.
pub fn sort_terms(terms: &mut [Term]) {
    terms.sort_by(|x, y| {
        let ax = Float::with_val(PRECISION, x.node.abs_ref());
        let ay = Float::with_val(PRECISION, y.node.abs_ref());
        let scale = ax.clone().max(&ay);
        let gap = Float::with_val(PRECISION, &ax - &ay);
        if gap.clone().abs() > scale * epsilon(200) {
            return ay.partial_cmp(&ax).unwrap_or(Ordering::Equal);
        }
        let argx = Float::with_val(PRECISION, x.node.arg_ref());
        let argy = Float::with_val(PRECISION, y.node.arg_ref());
        argx.partial_cmp(&argy).unwrap_or(Ordering::Equal)
    });
}

/// `true` when `|Im z| < 10⁻²⁰ (1 + |Re z|)`.
pub fn is_effectively_real(z: &Complex) -> bool {
    let bound = (z.real().clone().abs() + 1u32) * Float::with_val(PRECISION, 1e-20);
    z.imag().clone().abs() < bound
}

fn snap_to(roots: &mut [Complex], t: &Float) {
    let target = complex_real(t);
    let distance = |z: &Complex| Float::with_val(PRECISION, Complex::with_val(PRECISION, z - &target).abs_ref());
    if let Some(nearest) = (0..roots.len()).min_by(|&x, &y| {
        distance(&roots[x])
            .partial_cmp(&distance(&roots[y]))
            .unwrap_or(Ordering::Equal)
    }) {
        roots[nearest] = target;
    }
}

fn check_nodes(roots: &[Complex]) -> Result<()> {
    let largest = roots
        .iter()
        .map(|z| Float::with_val(PRECISION, z.abs_ref()))
        .fold(Float::new(PRECISION), |m, x| m.max(&x));
    for (i, z) in roots.iter().enumerate() {
        let size = Float::with_val(PRECISION, z.abs_ref());
        if size.is_zero() || size <= Float::with_val(PRECISION, &largest * epsilon(200)) {
            return Err(Error::DegenerateNodes("node at zero".into()));
        }
        for w in &roots[i + 1..] {
            let gap = Float::with_val(PRECISION, Complex::with_val(PRECISION, z - w).abs_ref());
            let scale = size.clone().max(&Float::with_val(PRECISION, w.abs_ref()));
            if gap <= scale * epsilon(100) {
                return Err(Error::DegenerateNodes("repeated node".into()));
            }
        }
    }
    Ok(())
}

/// Zeroes negligible imaginary parts and makes complex roots exact conjugate pairs.
fn classify_conjugates(roots: &mut [Complex]) -> Result<()> {
    for z in roots.iter_mut() {
        if is_effectively_real(z) {
            z.mut_imag().assign_zero();
        }
    }
    let mut paired = vec![false; roots.len()];
    for i in 0..roots.len() {
        if paired[i] || roots[i].imag().is_zero() {
            continue;
        }
        let target = Complex::with_val(PRECISION, roots[i].conj_ref());
        let partner = (0..roots.len())
            .filter(|&j| j != i && !paired[j] && !roots[j].imag().is_zero())
            .min_by(|&x, &y| {
                let dx = Float::with_val(PRECISION, Complex::with_val(PRECISION, &roots[x] - &target).abs_ref());
                let dy = Float::with_val(PRECISION, Complex::with_val(PRECISION, &roots[y] - &target).abs_ref());
                dx.partial_cmp(&dy).unwrap_or(Ordering::Equal)
            })
            .ok_or_else(|| Error::NoSolution("complex node without a conjugate partner".into()))?;
        let mirrored = Complex::with_val(PRECISION, roots[partner].conj_ref());
        let average = Complex::with_val(PRECISION, &roots[i] + &mirrored) / 2u32;
        roots[partner] = Complex::with_val(PRECISION, average.conj_ref());
        roots[i] = average;
        paired[i] = true;
        paired[partner] = true;
    }
    Ok(())
}

fn symmetrize_weights(terms: &mut [Term]) {
    for i in 0..terms.len() {
        if terms[i].node.imag().is_zero() {
            terms[i].weight.mut_imag().assign_zero();
            continue;
        }
        let target = Complex::with_val(PRECISION, terms[i].node.conj_ref());
        if let Some(j) = (i + 1..terms.len()).find(|&j| terms[j].node == target) {
            let mirrored = Complex::with_val(PRECISION, terms[j].weight.conj_ref());
            let average = Complex::with_val(PRECISION, &terms[i].weight + &mirrored) / 2u32;
            terms[j].weight = Complex::with_val(PRECISION, average.conj_ref());
            terms[i].weight = average;
        }
    }
}

trait AssignZero {
    fn assign_zero(&mut self);
}

impl AssignZero for Float {
    fn assign_zero(&mut self) {
        *self = Float::new(PRECISION);
    }
}

/// Roots of `x^N + c_{N-1} x^{N-1} + ... + c₀`.
///
/// Seeds come from the companion-matrix eigenvalues in double precision; the
/// Aberth-Ehrlich iteration then refines all roots simultaneously at working
/// precision, followed by one Newton polish.
pub fn polynomial_roots(coefficients: &[Float]) -> Result<Vec<Complex>> {
    let n = coefficients.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    if n == 1 {
        return Ok(vec![complex_real(&-coefficients[0].clone())]);
    }
    let mut roots = companion_seeds(coefficients);
    let tolerance = epsilon(PRECISION as i32 - 16);
    let mut converged = false;
    for _ in 0..500 {
        let mut largest_step = Float::new(PRECISION);
        for i in 0..n {
            let (value, slope) = horner(coefficients, &roots[i]);
            if value.is_zero() {
                continue;
            }
            let ratio = Complex::with_val(PRECISION, &value / &slope);
            let mut repulsion = Complex::new(PRECISION);
            for (j, other) in roots.iter().enumerate() {
                if j != i {
                    let diff = Complex::with_val(PRECISION, &roots[i] - other);
                    repulsion += diff.recip();
                }
            }
            let denominator = Complex::with_val(PRECISION, 1 - Complex::with_val(PRECISION, &ratio * &repulsion));
            let step = ratio / denominator;
            let size = Float::with_val(PRECISION, step.abs_ref());
            let scale = Float::with_val(PRECISION, roots[i].abs_ref()) + 1u32;
            let relative = size / scale;
            if relative > largest_step {
                largest_step = relative;
            }
            roots[i] -= step;
        }
        if !largest_step.is_finite() {
            return Err(Error::NoSolution("root iteration diverged".into()));
        }
        if largest_step < tolerance {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoSolution("root iteration did not converge".into()));
    }
    for root in roots.iter_mut() {
        let (value, slope) = horner(coefficients, root);
        if !slope.is_zero() {
            *root -= value / slope;
        }
    }
    Ok(roots)
}

/// `(p(z), p'(z))` for the monic polynomial.
fn horner(coefficients: &[Float], z: &Complex) -> (Complex, Complex) {
    let mut value = Complex::with_val(PRECISION, 1);
    let mut slope = Complex::new(PRECISION);
    for c in coefficients.iter().rev() {
        slope = slope * z + &value;
        value = value * z + c;
    }
    (value, slope)
}

fn companion_seeds(coefficients: &[Float]) -> Vec<Complex> {
    let n = coefficients.len();
    let c: Vec<f64> = coefficients.iter().map(Float::to_f64).collect();
    let mut seeds: Vec<(f64, f64)> = Vec::new();
    if c.iter().all(|x| x.is_finite()) {
        let companion = DMatrix::from_fn(n, n, |row, col| {
            if col == n - 1 {
                -c[row]
            } else if row == col + 1 {
                1.0
            } else {
                0.0
            }
        });
        seeds = companion
            .complex_eigenvalues()
            .iter()
            .map(|z| (z.re, z.im))
            .collect();
    }
    if seeds.len() != n || seeds.iter().any(|(re, im)| !re.is_finite() || !im.is_finite()) {
        // Fall back to points on a circle of the Cauchy bound.
        let radius = 1.0 + c.iter().fold(0.0f64, |m, x| m.max(x.abs())).min(1e300);
        seeds = (0..n)
            .map(|k| {
                let angle = 2.0 * std::f64::consts::PI * (k as f64 + 0.25) / n as f64;
                (radius * angle.cos(), radius * angle.sin())
            })
            .collect();
    }
    // Aberth needs distinct starting points.
    for i in 0..n {
        for j in 0..i {
            let (re, im) = seeds[j];
            if (seeds[i].0 - re).abs() + (seeds[i].1 - im).abs() <= 1e-12 * (1.0 + re.abs() + im.abs()) {
                seeds[i].0 += 1e-6 * (1.0 + re.abs()) * (i as f64 + 1.0);
                seeds[i].1 += 1e-6 * (1.0 + im.abs()) * (i as f64 + 1.0);
            }
        }
    }
    seeds
        .into_iter()
        .map(|(re, im)| complex(&Float::with_val(PRECISION, re), &Float::with_val(PRECISION, im)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::real;

    fn moments(values: &[f64]) -> MomentVector<Float> {
        MomentVector {
            values: values.iter().map(|&x| real(x)).collect(),
            zero: None,
        }
    }

    fn close(z: &Complex, re: f64, im: f64) -> bool {
        (z.real().to_f64() - re).abs() < 1e-30_f64.max(1e-25 * re.abs()) && (z.imag().to_f64() - im).abs() < 1e-25
    }

    #[test]
    fn recovers_two_nodes() {
        let terms = solve_prony(&moments(&[8.0, 22.0, 62.0, 178.0]), 2, None, None).unwrap();
        assert!(close(&terms[0].node, 3.0, 0.0) && close(&terms[0].weight, 2.0, 0.0));
        assert!(close(&terms[1].node, 2.0, 0.0) && close(&terms[1].weight, 1.0, 0.0));
    }

    #[test]
    fn recovers_a_single_binomial() {
        let terms = solve_prony(&moments(&[6.0, 12.0]), 1, None, None).unwrap();
        assert!(close(&terms[0].node, 2.0, 0.0) && close(&terms[0].weight, 3.0, 0.0));
    }

    #[test]
    fn vanishing_second_moment_forces_a_zero_node() {
        let err = solve_prony(&moments(&[0.25, 0.0]), 1, None, None).unwrap_err();
        assert!(matches!(err, Error::DegenerateNodes(_)));
    }

    #[test]
    fn singular_hankel_is_reported() {
        // B = (1, 1, 1, 1) is a single node at 1 with weight 1; asking for two is singular.
        let err = solve_prony(&moments(&[1.0, 1.0, 1.0, 1.0]), 2, None, None).unwrap_err();
        assert!(matches!(err, Error::NoSolution(_)));
    }

    #[test]
    fn pinned_node_is_kept_exactly() {
        // nodes {1, 4}, weights {2, 0.5}: B = 2 + 0.5·4^m
        let b: Vec<f64> = (1..=3).map(|m| 2.0 + 0.5 * 4f64.powi(m)).collect();
        let terms = solve_prony(&moments(&b), 2, Some(&real(1.0)), None).unwrap();
        assert_eq!(terms[1].node, Complex::with_val(PRECISION, 1));
        assert!(close(&terms[0].node, 4.0, 0.0));
        assert!(close(&terms[0].weight, 0.5, 0.0));
    }

    #[test]
    fn zeroth_moment_shifts_the_window() {
        // nodes {2, 3}, weights {1, 2}: B0 = 3, B1 = 8, B2 = 22, B3 = 62
        let mut m = moments(&[8.0, 22.0, 62.0]);
        m.zero = None;
        let terms = solve_prony(&m, 2, None, Some(&real(3.0))).unwrap();
        assert!(close(&terms[0].node, 3.0, 0.0) && close(&terms[0].weight, 2.0, 0.0));
    }

    #[test]
    fn conjugate_pairs_come_out_exactly_conjugate() {
        // nodes 1 ± 2i with weights 0.5 ∓ 0.25i
        let nodes = [(1.0, 2.0), (1.0, -2.0)];
        let weights = [(0.5, -0.25), (0.5, 0.25)];
        let mut b = Vec::new();
        for m in 1..=4u32 {
            let mut acc = Complex::new(PRECISION);
            for (a, w) in nodes.iter().zip(&weights) {
                let a = Complex::with_val(PRECISION, *a);
                let w = Complex::with_val(PRECISION, *w);
                acc += w * a.pow(m);
            }
            b.push(acc.real().to_f64());
        }
        let terms = solve_prony(&moments(&b), 2, None, None).unwrap();
        assert_eq!(terms[0].node, Complex::with_val(PRECISION, terms[1].node.conj_ref()));
        assert_eq!(terms[0].weight, Complex::with_val(PRECISION, terms[1].weight.conj_ref()));
        assert!(terms[0].node.imag().is_sign_negative());
    }

    #[test]
    fn missing_moments_are_rejected() {
        assert!(solve_prony(&moments(&[1.0, 2.0, 3.0]), 2, None, None).is_err());
        assert!(solve_prony(&moments(&[1.0]), 0, None, None).is_err());
    }

    #[test]
    fn polynomial_roots_of_a_quartic() {
        // (x-1)(x+2)(x²+1) = x⁴ + x³ - x² + x - 2
        let c: Vec<Float> = [-2.0, 1.0, -1.0, 1.0].iter().map(|&x| real(x)).collect();
        let mut roots = polynomial_roots(&c).unwrap();
        let key = |z: &Complex| ((z.real().to_f64() * 1e6).round() as i64, (z.imag().to_f64() * 1e6).round() as i64);
        roots.sort_by_key(key);
        assert!(close(&roots[0], -2.0, 0.0));
        assert!(close(&roots[1], 0.0, -1.0));
        assert!(close(&roots[2], 0.0, 1.0));
        assert!(close(&roots[3], 1.0, 0.0));
    }
}
