//! Self-similar factor approximants `f₀(g) · Πᵢ (1 + Aᵢ u)^{nᵢ}`, `u = g^q`.
//!
//! Parameters come from the log-moments of the series through the Prony
//! reduction. Four builders share that core: the plain accuracy-through-order
//! build, the power-restricted build (finite limit at infinity), the
//! interpolating build (matches a strong-coupling leading term) and, in
//! [`combine_weighted`], a blend with a root approximant.

use rug::ops::Pow;
use rug::{Complex, Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{complex_real, real, real_q, PRECISION};
use crate::prony::{is_effectively_real, solve_prony, Term};
use crate::root::{RootApproximant, StrongCouplingExpansion};
use crate::series::{compute_moments, exp_zero, AsymptoticSeries, PowerPrefactor};

/// How the extra parameter of an odd-order build is fixed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OddConvention {
    /// Pin one node at `A₁ = 1`.
    UnitNode,
    /// Pin one node at `A₁ = a₁/a₀`.
    #[serde(rename = "a1_over_a0")]
    FirstCoefficient,
}

/// One factor `(1 + A u)^n`.
#[derive(Clone, Debug, PartialEq)]
pub struct Factor {
    pub node: Complex,
    pub exponent: Complex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FactorApproximant {
    pub prefactor: PowerPrefactor,
    pub factors: Vec<Factor>,
    pub power_step: Rational,
    /// Large-`g` exponent when a build imposes it exactly.
    pub imposed_exponent: Option<Rational>,
}

impl FactorApproximant {
    fn from_terms(series: &AsymptoticSeries<Float>, terms: Vec<Term>, imposed_exponent: Option<Rational>) -> Self {
        FactorApproximant {
            prefactor: series.prefactor().clone(),
            factors: terms
                .into_iter()
                .map(|t| Factor {
                    node: t.node,
                    exponent: t.weight,
                })
                .collect(),
            power_step: series.power_step().clone(),
            imposed_exponent,
        }
    }

    /// Number of factors.
    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn evaluate(&self, g: &Float) -> Result<Float> {
        evaluate_factor(self, g)
    }

    pub fn asymptote(&self) -> Result<(Float, Float)> {
        factor_asymptote(self)
    }

    /// Taylor coefficients about `u = 0`, normalized to `a₀ = 1`.
    pub fn expand(&self, order: usize) -> AsymptoticSeries<Float> {
        // ln Π (1 + A u)^n = Σ_m (-1)^(m-1)/m Σᵢ nᵢ Aᵢᵐ uᵐ
        let mut logs = vec![Float::new(PRECISION); order + 1];
        for (m, slot) in logs.iter_mut().enumerate().skip(1) {
            let mut sum = Complex::new(PRECISION);
            for f in &self.factors {
                sum += Complex::with_val(PRECISION, (&f.node).pow(m as u32)) * &f.exponent;
            }
            let value = Float::with_val(PRECISION, sum.real()) / m as u32;
            *slot = if m % 2 == 0 { -value } else { value };
        }
        AsymptoticSeries::from_normalized(self.prefactor.clone(), self.power_step.clone(), exp_zero(&logs, order))
    }
}

fn unavailable(order: usize) -> impl Fn(Error) -> Error {
    move |e| Error::OrderUnavailable {
        order,
        reason: e.to_string(),
    }
}

/// Accuracy-through-order build at the order of `series`.
///
/// Even `k` uses `k/2` factors; odd `k` uses `(k+1)/2` with one node pinned
/// according to `convention`.
pub fn build_factor(series: &AsymptoticSeries<Float>, convention: OddConvention) -> Result<FactorApproximant> {
    let k = series.order();
    if k == 0 {
        return Err(Error::invalid("a factor approximant needs order k >= 1"));
    }
    let moments = compute_moments(series);
    if moments.values.iter().all(|m| m.is_zero()) {
        // Constant series: nothing to factor.
        return Ok(FactorApproximant::from_terms(series, Vec::new(), None));
    }
    let terms = if k % 2 == 0 {
        solve_prony(&moments, k / 2, None, None)
    } else {
        let pinned = match convention {
            OddConvention::UnitNode => real(1.0),
            OddConvention::FirstCoefficient => series.coefficients()[1].clone(),
        };
        solve_prony(&moments, k.div_ceil(2), Some(&pinned), None)
    }
    .map_err(unavailable(k))?;
    Ok(FactorApproximant::from_terms(series, terms, None))
}

/// Build whose exponents cancel the prefactor power, `α + q Σ nᵢ = 0`, so the
/// approximant tends to a constant as `g → ∞`.
///
/// Odd `k` solves the square system `B₀..B_k` with `B₀ = -α/q`. Even `k` adds
/// one factor with its node pinned at 1 and keeps every moment.
pub fn build_factor_constrained(series: &AsymptoticSeries<Float>) -> Result<FactorApproximant> {
    let k = series.order();
    let alpha = &series.prefactor().exponent;
    if alpha.cmp0() != std::cmp::Ordering::Less {
        return Err(Error::invalid("power restriction needs a negative prefactor exponent"));
    }
    if k == 0 {
        return Err(Error::invalid("power restriction needs order k >= 1"));
    }
    let total = real_q(&Rational::from(-alpha.clone() / series.power_step()));
    let moments = compute_moments(series);
    let terms = if k % 2 == 1 {
        solve_prony(&moments, k.div_ceil(2), None, Some(&total))
    } else {
        solve_prony(&moments, k / 2 + 1, Some(&real(1.0)), Some(&total))
    }
    .map_err(unavailable(k))?;
    let approx = FactorApproximant::from_terms(series, terms, Some(Rational::new()));
    if let Some(f) = approx.factors.iter().find(|f| is_branch_factor(f)) {
        return Err(Error::OrderUnavailable {
            order: k,
            reason: format!(
                "negative real node {:.6e} with non-integer exponent makes the limit complex",
                f.node.real().to_f64()
            ),
        });
    }
    Ok(approx)
}

fn is_branch_factor(f: &Factor) -> bool {
    f.node.imag().is_zero() && f.node.real().is_sign_negative() && !is_integer_exponent(&f.exponent)
}

fn is_integer_exponent(n: &Complex) -> bool {
    is_effectively_real(n) && {
        let re = n.real();
        let nearest = Float::with_val(PRECISION, re.round_ref());
        Float::with_val(PRECISION, re - &nearest).abs() < 1e-30
    }
}

/// Order-`k+1` build that also honours the leading strong-coupling term
/// `b₁ g^{α₁}`.
///
/// For even `k+1` the power condition `α + q Σ nᵢ = α₁` supplies `B₀` and the
/// system is linear-Prony. For odd `k+1` the amplitude condition
/// `A Πᵢ Aᵢ^{nᵢ} = b₁` is added as well; one real node `t` is then left free,
/// the remaining system is solved exactly for each `t`, and the amplitude
/// residual is driven to zero by a bracketed scan in `ln t`.
pub fn build_factor_interpolating(
    series: &AsymptoticSeries<Float>,
    asymptote: &StrongCouplingExpansion,
) -> Result<FactorApproximant> {
    let k = series.order();
    if k == 0 {
        return Err(Error::invalid("interpolation needs order k >= 1"));
    }
    let (b1, alpha1) = asymptote.leading();
    let q = series.power_step();
    let alpha = &series.prefactor().exponent;
    let imposed = Rational::from(alpha1 - alpha) / q;
    let total = real_q(&imposed);
    let moments = compute_moments(series);
    let order = k + 1;
    if order % 2 == 0 {
        let terms = solve_prony(&moments, order / 2, None, Some(&total)).map_err(unavailable(k))?;
        return Ok(FactorApproximant::from_terms(series, terms, Some(alpha1.clone())));
    }

    let ratio = Float::with_val(PRECISION, b1 / &series.prefactor().amplitude);
    if ratio.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::OrderUnavailable {
            order: k,
            reason: "amplitude ratio b1/A must be positive".into(),
        });
    }
    let target = ratio.ln();
    let nodes = order.div_ceil(2);
    let residual = |log_t: &Float| -> Option<(Float, Vec<Term>)> {
        let t = Float::with_val(PRECISION, log_t.exp_ref());
        let terms = solve_prony(&moments, nodes, Some(&t), Some(&total)).ok()?;
        let mut log_product = Complex::new(PRECISION);
        for term in &terms {
            let ln_node = Complex::with_val(PRECISION, term.node.ln_ref());
            log_product += ln_node * &term.weight;
        }
        if !is_effectively_real(&log_product) {
            return None;
        }
        Some((Float::with_val(PRECISION, log_product.real() - &target), terms))
    };

    let grid: Vec<Float> = (-120..=160).map(|i| real(i as f64 * 0.1 * std::f64::consts::LN_10)).collect();
    let mut previous: Option<(Float, Float)> = None;
    for x in &grid {
        let Some((r, terms)) = residual(x) else {
            previous = None;
            continue;
        };
        if r.is_zero() {
            return Ok(FactorApproximant::from_terms(series, terms, Some(alpha1.clone())));
        }
        if let Some((x0, r0)) = &previous {
            if r0.is_sign_negative() != r.is_sign_negative() {
                if let Some(terms) = refine_bracket(&residual, x0.clone(), r0.clone(), x.clone(), r.clone()) {
                    return Ok(FactorApproximant::from_terms(series, terms, Some(alpha1.clone())));
                }
            }
        }
        previous = Some((x.clone(), r));
    }
    Err(Error::OrderUnavailable {
        order: k,
        reason: "no admissible solution of the interpolation conditions".into(),
    })
}

/// Illinois-modified regula falsi on a sign-changing bracket.
fn refine_bracket(
    residual: &impl Fn(&Float) -> Option<(Float, Vec<Term>)>,
    mut a: Float,
    mut fa: Float,
    mut b: Float,
    mut fb: Float,
) -> Option<Vec<Term>> {
    let accept = Float::with_val(PRECISION, 1e-40);
    let mut side = 0i8;
    for _ in 0..400 {
        let c = Float::with_val(PRECISION, &a * &fb - &b * &fa) / Float::with_val(PRECISION, &fb - &fa);
        let (fc, terms) = residual(&c)?;
        if fc.clone().abs() < accept || Float::with_val(PRECISION, &b - &a).abs() < 1e-60 {
            // A pole of the residual also changes sign; only a genuine root is small.
            let small = Float::with_val(PRECISION, 1e-15);
            return (fc.abs() < small).then_some(terms);
        }
        if fc.is_sign_negative() == fb.is_sign_negative() {
            b = c;
            fb = fc;
            if side == -1 {
                fa /= 2u32;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb /= 2u32;
            }
            side = 1;
        }
    }
    None
}

/// Evaluates the product in complex arithmetic and returns the real part.
pub fn evaluate_factor(approx: &FactorApproximant, g: &Float) -> Result<Float> {
    let g_f64 = g.to_f64();
    if g.is_sign_negative() && !g.is_zero() {
        return Err(Error::invalid("factor approximants are evaluated for g >= 0"));
    }
    let u = Float::with_val(PRECISION, g.pow(&real_q(&approx.power_step)));
    let mut product = complex_real(&approx.prefactor.evaluate(g));
    for f in &approx.factors {
        let base = Complex::with_val(PRECISION, &f.node * &u) + 1u32;
        if f.node.imag().is_zero() {
            let b = base.real();
            let near_zero = b.clone().abs() < Float::with_val(PRECISION, 1e-20) * (Float::with_val(PRECISION, u.abs_ref()) + 1u32);
            let integer = is_integer_exponent(&f.exponent);
            if (near_zero && !(integer && f.exponent.real().cmp0() == Some(std::cmp::Ordering::Greater)))
                || (b.is_sign_negative() && !integer)
            {
                return Err(Error::PoleOrBranch { g: g_f64 });
            }
        }
        product *= base.pow(&f.exponent);
    }
    let re = product.real().clone();
    let im = product.imag().clone().abs();
    if im > Float::with_val(PRECISION, re.abs_ref()) * 1e-8 {
        return Err(Error::NonReal { g: g_f64 });
    }
    Ok(re)
}

/// Large-`g` power law `amplitude · g^exponent` of the approximant.
///
/// The exponent is `α + q Σ nᵢ`, or the exactly imposed value for constrained
/// and interpolating builds; the amplitude is `A Πᵢ Aᵢ^{nᵢ}`.
pub fn factor_asymptote(approx: &FactorApproximant) -> Result<(Float, Float)> {
    let exponent = match &approx.imposed_exponent {
        Some(e) => real_q(e),
        None => {
            let mut sum = Float::new(PRECISION);
            for f in &approx.factors {
                sum += f.exponent.real();
            }
            sum * real_q(&approx.power_step) + real_q(&approx.prefactor.exponent)
        }
    };
    let mut amplitude = complex_real(&approx.prefactor.amplitude);
    for f in &approx.factors {
        amplitude *= Complex::with_val(PRECISION, (&f.node).pow(&f.exponent));
    }
    if !amplitude.real().is_finite()
        || Float::with_val(PRECISION, amplitude.imag().abs_ref()) > Float::with_val(PRECISION, amplitude.real().abs_ref()) * 1e-8
    {
        return Err(Error::NonReal { g: f64::INFINITY });
    }
    Ok((amplitude.real().clone(), exponent))
}

/// How the blending weight of [`combine_weighted`] is chosen.
#[derive(Clone, Debug, PartialEq)]
pub enum Lambda {
    Fixed(Float),
    /// Match the series coefficient `a_{k+1}` (normalized to `a₀ = 1`), given
    /// as `(k + 1, value)`, when it is known; otherwise use ½.
    Auto { next_coefficient: Option<(usize, Float)> },
}

/// `W(g) = λ f*(g) + (1 - λ) R*(g)`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightedApproximant {
    pub factor: FactorApproximant,
    pub root: RootApproximant,
    pub lambda: Float,
}

impl WeightedApproximant {
    pub fn evaluate(&self, g: &Float) -> Result<Float> {
        let f = evaluate_factor(&self.factor, g)?;
        let r = self.root.evaluate(g)?;
        let one_minus = Float::with_val(PRECISION, 1 - &self.lambda);
        Ok(f * &self.lambda + r * one_minus)
    }

    /// Coefficient-wise blend of the two expansions (both share `f₀`).
    pub fn expand(&self, order: usize) -> Result<AsymptoticSeries<Float>> {
        let f = self.factor.expand(order);
        let r = self.root.expand(order)?;
        let one_minus = Float::with_val(PRECISION, 1 - &self.lambda);
        let coefficients = f
            .coefficients()
            .iter()
            .zip(r.coefficients())
            .map(|(x, y)| Float::with_val(PRECISION, x * &self.lambda) + Float::with_val(PRECISION, y * &one_minus))
            .collect();
        Ok(AsymptoticSeries::from_normalized(f.prefactor().clone(), f.power_step().clone(), coefficients))
    }
}

/// Blends a factor and a root approximant built from the same series.
pub fn combine_weighted(factor: &FactorApproximant, root: &RootApproximant, lambda: Lambda) -> Result<WeightedApproximant> {
    let lambda = match lambda {
        Lambda::Fixed(value) => value,
        Lambda::Auto { next_coefficient: None } => real(0.5),
        Lambda::Auto {
            next_coefficient: Some((order, target)),
        } => {
            // Both members reproduce a₀..a_k, so any blend does; λ is the
            // single extra degree of freedom and is spent on a_{k+1}.
            let f = factor.expand(order).coefficients()[order].clone();
            let r = root.expand(order)?.coefficients()[order].clone();
            let gap = Float::with_val(PRECISION, &f - &r);
            if gap.is_zero() {
                real(0.5)
            } else {
                Float::with_val(PRECISION, &target - &r) / gap
            }
        }
    };
    Ok(WeightedApproximant {
        factor: factor.clone(),
        root: root.clone(),
        lambda,
    })
}
