//! Nested self-similar root approximants.
//!
//! A ladder in the variable `x` is
//!
//! ```text
//! P₁ = 1 + A₁ x^{m₁},  Qⱼ = Pⱼ^{nⱼ},  Pⱼ₊₁ = Qⱼ + Aⱼ₊₁ x^{mⱼ₊₁},  R = f₀(g) · Q_p
//! ```
//!
//! with `x = g^{-s}` for ladders anchored at infinity (interpolation between a
//! strong-coupling form and a weak-coupling series) and `x = g^{s}` for
//! ladders anchored at zero (the iterated-root extrapolation).

use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::numeric::{real, real_q, RealScalar, PRECISION};
use crate::series::{pow_unit, AsymptoticSeries, PowerPrefactor};

/// `Σⱼ bⱼ g^{αⱼ}` with strictly descending powers.
#[derive(Clone, Debug, PartialEq)]
pub struct StrongCouplingExpansion {
    terms: Vec<(Float, Rational)>,
}

impl StrongCouplingExpansion {
    pub fn new(terms: Vec<(Float, Rational)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::schema("asymptote", "at least one term is required"));
        }
        if terms[0].0.is_zero() {
            return Err(Error::schema("asymptote[0].b", "leading amplitude must be nonzero"));
        }
        if terms.windows(2).any(|w| w[1].1 >= w[0].1) {
            return Err(Error::schema("asymptote", "powers must be strictly descending"));
        }
        Ok(StrongCouplingExpansion { terms })
    }

    pub fn leading(&self) -> (&Float, &Rational) {
        (&self.terms[0].0, &self.terms[0].1)
    }

    pub fn terms(&self) -> &[(Float, Rational)] {
        &self.terms
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Orientation {
    /// Ladder in `x = g^{-s}`; reproduces the prefactor as `g → ∞`.
    AtInfinity,
    /// Ladder in `x = g^{s}`; reproduces the prefactor as `g → 0`.
    AtZero,
}

/// A ladder exponent, kept exact whenever it is known exactly.
#[derive(Clone, Debug, PartialEq)]
pub enum Exponent {
    Exact(Rational),
    Real(Float),
}

impl Exponent {
    pub fn value(&self) -> Float {
        match self {
            Exponent::Exact(q) => real_q(q),
            Exponent::Real(x) => x.clone(),
        }
    }

    fn from_scalar<T: RealScalar>(x: &T) -> Self {
        match x.exact() {
            Some(q) => Exponent::Exact(q),
            None => Exponent::Real(x.to_real()),
        }
    }

    fn is_integer(&self) -> bool {
        match self {
            Exponent::Exact(q) => *q.denom() == 1,
            Exponent::Real(x) => x.is_integer(),
        }
    }
}

/// One rung `Aⱼ x^{mⱼ}` together with the exponent `nⱼ` applied after it.
#[derive(Clone, Debug, PartialEq)]
pub struct Rung {
    pub amplitude: Float,
    pub power: u32,
    pub exponent: Exponent,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RootApproximant {
    pub prefactor: PowerPrefactor,
    pub orientation: Orientation,
    /// `s` in `x = g^{∓s}`.
    pub ladder_exponent: Rational,
    /// `q` of the series variable `u = g^q` on the expansion side.
    pub series_step: Rational,
    pub rungs: Vec<Rung>,
}

impl RootApproximant {
    pub fn depth(&self) -> usize {
        self.rungs.len()
    }

    pub fn evaluate(&self, g: &Float) -> Result<Float> {
        evaluate_root(self, g)
    }

    pub fn asymptote(&self) -> Result<(Float, Float)> {
        root_asymptote(self)
    }

    /// Coefficients of `Q_p` in powers of the ladder variable about `x = 0`.
    pub fn anchor_expansion(&self, order: usize) -> Vec<Float> {
        let mut p = vec![Float::new(PRECISION); order + 1];
        p[0] = real(1.0);
        let mut q = p.clone();
        for (j, rung) in self.rungs.iter().enumerate() {
            if j > 0 {
                p = q.clone();
            }
            if let Some(slot) = p.get_mut(rung.power as usize) {
                *slot += &rung.amplitude;
            }
            q = pow_unit(&p, &rung.exponent.value(), order);
        }
        q
    }

    /// Expansion about `g = 0` in the series variable `u = g^q`.
    ///
    /// For a ladder anchored at zero this is the anchor expansion; for one
    /// anchored at infinity it is the far-side expansion the ladder was
    /// matched to.
    pub fn expand(&self, order: usize) -> Result<AsymptoticSeries<Float>> {
        let ratio = Rational::from(&self.ladder_exponent / &self.series_step);
        if *ratio.denom() != 1 || ratio.cmp0() != std::cmp::Ordering::Greater {
            return Err(Error::invalid("ladder exponent must be a positive multiple of the series step"));
        }
        let r = ratio.numer().to_usize().unwrap_or(usize::MAX);
        match self.orientation {
            Orientation::AtZero => {
                let x = self.anchor_expansion(order / r);
                let mut coefficients = vec![Float::new(PRECISION); order + 1];
                for (j, c) in x.into_iter().enumerate() {
                    coefficients[j * r] = c;
                }
                Ok(AsymptoticSeries::from_normalized(
                    self.prefactor.clone(),
                    self.series_step.clone(),
                    coefficients,
                ))
            }
            Orientation::AtInfinity => {
                let (amplitude, power, tail) = self.far_expansion(r, order)?;
                let exponent = Rational::from(&self.prefactor.exponent + Rational::from(&power * &self.series_step));
                let prefactor = PowerPrefactor::new(amplitude * &self.prefactor.amplitude, exponent)?;
                Ok(AsymptoticSeries::from_normalized(prefactor, self.series_step.clone(), tail))
            }
        }
    }

    /// Laurent expansion of `Q_p = c · w^e · (1 + T₁ w + ...)` where `x = w^{-r}`.
    fn far_expansion(&self, r: usize, order: usize) -> Result<(Float, Rational, Vec<Float>)> {
        let bad = |why: &str| Error::invalid(format!("far-side expansion unavailable: {why}"));
        let first = self.rungs.first().ok_or_else(|| bad("empty ladder"))?;
        let shift = r * first.power as usize;
        let mut c = first.amplitude.clone();
        let mut e = -Rational::from(shift);
        let mut tail = vec![Float::new(PRECISION); order + 1];
        tail[0] = real(1.0);
        if shift <= order {
            tail[shift] = Float::with_val(PRECISION, first.amplitude.recip_ref());
        }
        for (j, rung) in self.rungs.iter().enumerate() {
            let Exponent::Exact(n) = &rung.exponent else {
                return Err(bad("ladder exponents must be exact"));
            };
            if c.cmp0() != Some(std::cmp::Ordering::Greater) {
                return Err(bad("non-positive leading amplitude"));
            }
            c = Float::with_val(PRECISION, c.pow(&real_q(n)));
            e *= n;
            tail = pow_unit(&tail, &real_q(n), order);
            if let Some(next) = self.rungs.get(j + 1) {
                let power = -Rational::from(r * next.power as usize);
                let gap = Rational::from(&e - &power);
                if *gap.denom() != 1 || gap.cmp0() != std::cmp::Ordering::Greater {
                    return Err(bad("rung does not dominate the previous level"));
                }
                let gap = gap.numer().to_usize().unwrap_or(usize::MAX);
                let scale = Float::with_val(PRECISION, &c / &next.amplitude);
                let mut shifted = vec![Float::new(PRECISION); order + 1];
                shifted[0] = real(1.0);
                for i in 0..=order.saturating_sub(gap) {
                    if gap + i <= order {
                        shifted[gap + i] += Float::with_val(PRECISION, &tail[i] * &scale);
                    }
                }
                tail = shifted;
                c = next.amplitude.clone();
                e = power;
            }
        }
        Ok((c, e, tail))
    }
}

/// Innermost-outward evaluation in real arithmetic.
pub fn evaluate_root(root: &RootApproximant, g: &Float) -> Result<Float> {
    let g_f64 = g.to_f64();
    if g.is_sign_negative() && !g.is_zero() {
        return Err(Error::invalid("root approximants are evaluated for g >= 0"));
    }
    if g.is_zero() && root.orientation == Orientation::AtInfinity {
        // Only the leading far-side power survives.
        let (amplitude, exponent) = root_asymptote(root)?;
        return Ok(match exponent.cmp0() {
            Some(std::cmp::Ordering::Greater) => Float::new(PRECISION),
            Some(std::cmp::Ordering::Equal) => amplitude,
            _ => return Err(Error::PoleOrBranch { g: 0.0 }),
        });
    }
    let s = real_q(&root.ladder_exponent);
    let x = match root.orientation {
        Orientation::AtZero => Float::with_val(PRECISION, g.pow(&s)),
        Orientation::AtInfinity => Float::with_val(PRECISION, g.pow(&-s)),
    };
    let mut q = real(1.0);
    for (j, rung) in root.rungs.iter().enumerate() {
        let base = if j == 0 { real(1.0) } else { q.clone() };
        let term = Float::with_val(PRECISION, (&x).pow(rung.power)) * &rung.amplitude;
        let p = base + term;
        if p.is_sign_negative() && !p.is_zero() && !rung.exponent.is_integer() {
            return Err(Error::BranchViolation { g: g_f64 });
        }
        q = Float::with_val(PRECISION, p.pow(&rung.exponent.value()));
    }
    Ok(root.prefactor.evaluate(g) * q)
}

/// Leading power law on the side opposite the anchor.
///
/// Walks the ladder keeping only the dominant term of each level; equal powers
/// add their amplitudes.
pub fn root_asymptote(root: &RootApproximant) -> Result<(Float, Float)> {
    let mut amplitude = real(1.0);
    let mut power = Float::new(PRECISION);
    for (j, rung) in root.rungs.iter().enumerate() {
        let rung_power = real(rung.power as f64);
        if j == 0 {
            // 1 + A x^m with x → ∞
            amplitude = rung.amplitude.clone();
            power = rung_power;
        } else {
            match power.partial_cmp(&rung_power) {
                Some(std::cmp::Ordering::Less) => {
                    amplitude = rung.amplitude.clone();
                    power = rung_power;
                }
                Some(std::cmp::Ordering::Equal) => amplitude += &rung.amplitude,
                _ => {}
            }
        }
        if amplitude.cmp0() != Some(std::cmp::Ordering::Greater) && !rung.exponent.is_integer() {
            return Err(Error::BranchViolation { g: f64::INFINITY });
        }
        let n = rung.exponent.value();
        amplitude = Float::with_val(PRECISION, amplitude.pow(&n));
        power *= &n;
    }
    let s = real_q(&root.ladder_exponent);
    let g_power = match root.orientation {
        Orientation::AtZero => power * s,
        Orientation::AtInfinity => -(power * s),
    };
    Ok((
        amplitude * &root.prefactor.amplitude,
        g_power + real_q(&root.prefactor.exponent),
    ))
}

/// Interior exponent `(2j+1)/(2j)`.
fn interior_exponent(j: usize) -> Rational {
    Rational::from((2 * j as i64 + 1, 2 * j as i64))
}

/// Ladder anchored at the strong-coupling form `anchor`, matched to the
/// weak-coupling `series` order by order.
///
/// Interior exponents are `(2j+1)/(2j)`; the terminal exponent bridges the two
/// leading powers, `n_p = (α_anchor - α_far)/(s p)` with `s = 2q`. Anchor terms
/// beyond the first fix `A₁, A₂, ...`; the weak-coupling amplitude fixes
/// `A_p`; each series coefficient `a_d` then fixes `A_{p-d}`.
pub fn build_root_interpolant(
    series: &AsymptoticSeries<Float>,
    anchor: &StrongCouplingExpansion,
    depth: usize,
) -> Result<RootApproximant> {
    let unavailable = |why: String| Error::DepthUnavailable { depth, reason: why };
    let q = series.power_step().clone();
    let s = Rational::from(&q * 2);
    let (b1, alpha_anchor) = anchor.leading();
    let subleading = anchor.terms().len() - 1;
    if depth < subleading + 1 {
        return Err(Error::invalid("depth is smaller than the number of anchor conditions"));
    }
    let far_count = depth - 1 - subleading;
    if series.order() < far_count {
        return Err(Error::invalid(format!(
            "depth {depth} needs {far_count} series coefficients beyond a0, have {}",
            series.order()
        )));
    }
    for (j, (_, alpha)) in anchor.terms().iter().enumerate().skip(1) {
        let expected = Rational::from(alpha_anchor - Rational::from(&s * j as u32));
        if *alpha != expected {
            return Err(Error::invalid("anchor powers must step down by the ladder exponent"));
        }
    }

    let alpha_far = &series.prefactor().exponent;
    let terminal = Rational::from(alpha_anchor - alpha_far) / Rational::from(&s * depth as u32);
    if terminal.cmp0() == std::cmp::Ordering::Equal {
        return Err(Error::invalid("anchor and series share the same leading power"));
    }
    let mut root = RootApproximant {
        prefactor: PowerPrefactor::new(b1.clone(), alpha_anchor.clone())?,
        orientation: Orientation::AtInfinity,
        ladder_exponent: s,
        series_step: q,
        rungs: (1..=depth)
            .map(|j| Rung {
                amplitude: real(1.0),
                power: j as u32,
                exponent: Exponent::Exact(if j < depth { interior_exponent(j) } else { terminal.clone() }),
            })
            .collect(),
    };

    // Anchor side: the x^j coefficient is affine in Aⱼ.
    for j in 1..=subleading {
        let target = Float::with_val(PRECISION, &anchor.terms()[j].0 / b1);
        let coefficient = |root: &mut RootApproximant, a: f64| {
            root.rungs[j - 1].amplitude = real(a);
            root.anchor_expansion(j)[j].clone()
        };
        let c0 = coefficient(&mut root, 0.0);
        let c1 = coefficient(&mut root, 1.0);
        let slope = Float::with_val(PRECISION, &c1 - &c0);
        if slope.is_zero() {
            return Err(unavailable(format!("anchor condition {j} does not involve A{j}")));
        }
        root.rungs[j - 1].amplitude = (target - c0) / slope;
    }

    // Far side: leading amplitude, then a_d fixes t = A_{p-d}^{n_{p-d}}.
    let ratio = Float::with_val(PRECISION, &series.prefactor().amplitude / b1);
    if ratio.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(unavailable("amplitudes at the two ends have opposite signs".into()));
    }
    root.rungs[depth - 1].amplitude = Float::with_val(PRECISION, ratio.pow(real_q(&terminal).recip()));
    for d in 1..=far_count {
        let index = depth - 1 - d;
        let n = root.rungs[index].exponent.value();
        let inv_n = Float::with_val(PRECISION, n.recip_ref());
        let target = series.coefficients()[d].clone();
        let coefficient = |root: &mut RootApproximant, t: f64| -> Result<Float> {
            root.rungs[index].amplitude = Float::with_val(PRECISION, real(t).pow(&inv_n));
            Ok(root.expand(d)?.coefficients()[d].clone())
        };
        let c1 = coefficient(&mut root, 1.0).map_err(|e| unavailable(e.to_string()))?;
        let c2 = coefficient(&mut root, 2.0).map_err(|e| unavailable(e.to_string()))?;
        let slope = Float::with_val(PRECISION, &c2 - &c1);
        if slope.is_zero() {
            return Err(unavailable(format!("coefficient a{d} does not involve A{}", index + 1)));
        }
        let t = (target - c1) / slope + 1u32;
        if t.cmp0() != Some(std::cmp::Ordering::Greater) {
            return Err(unavailable(format!("A{} would need a non-positive power base", index + 1)));
        }
        root.rungs[index].amplitude = Float::with_val(PRECISION, t.pow(&inv_n));
    }

    // Far-side fidelity.
    let expansion = root.expand(far_count).map_err(|e| unavailable(e.to_string()))?;
    for (d, (got, want)) in expansion.coefficients().iter().zip(series.coefficients()).enumerate() {
        let err = Float::with_val(PRECISION, got - want).abs();
        if err > Float::with_val(PRECISION, want.abs_ref()).max(&real(1e-30)) * 1e-10 {
            return Err(unavailable(format!("coefficient a{d} is not reproduced")));
        }
    }
    Ok(root)
}

/// The `(k+1)`-th coefficient (normalized, `a₀ = 1`) implied by a root matched
/// through order `k` of `series`.
pub fn predict_next_coefficient(root: &RootApproximant, series: &AsymptoticSeries<Float>) -> Result<Float> {
    let next = series.order() + 1;
    Ok(root.expand(next)?.coefficients()[next].clone())
}

/// One stage of [`bootstrap_sequence`].
#[derive(Clone, Debug, PartialEq)]
pub struct BootstrapStage {
    pub root: RootApproximant,
    /// The coefficient this stage predicts for the next order.
    pub predicted: Float,
}

/// Alternates interpolation and prediction, growing the ladder by one rung per
/// stage until `max_depth`.
///
/// The first depth uses every supplied condition: `1 + k + (anchor terms - 1)`.
pub fn bootstrap_sequence(
    series: &AsymptoticSeries<Float>,
    anchor: &StrongCouplingExpansion,
    max_depth: usize,
) -> Result<Vec<BootstrapStage>> {
    let initial = 1 + series.order() + anchor.terms().len() - 1;
    if max_depth < initial {
        return Err(Error::invalid(format!("max_depth must be at least {initial}")));
    }
    let mut stages = Vec::new();
    let mut current = series.clone();
    for depth in initial..=max_depth {
        let built = build_root_interpolant(&current, anchor, depth)
            .and_then(|root| predict_next_coefficient(&root, &current).map(|p| (root, p)));
        let (root, predicted) = match built {
            Ok(pair) => pair,
            Err(e) if stages.is_empty() => return Err(e),
            Err(_) => break,
        };
        current = current.extended(predicted.clone());
        stages.push(BootstrapStage { root, predicted });
    }
    Ok(stages)
}

/// Iterated roots anchored at zero: stage 1 fixes `(A₁, n₁)` from `a₁, a₂`;
/// every later stage freezes the ladder, splits the outer exponent as
/// `n_prev = n_inner · n_new`, adds `Aⱼ u^{2j-1}` and fixes `(Aⱼ, n_new)` from
/// the next two coefficients. Returns all stages.
///
/// Rational input stays rational throughout.
pub fn build_root_iterated<T: RealScalar>(series: &AsymptoticSeries<T>) -> Result<Vec<RootApproximant>> {
    let k = series.order();
    if k < 2 {
        return Err(Error::invalid("iterated roots need order k >= 2"));
    }
    let a = series.coefficients();
    if a[1].is_zero() {
        return Err(Error::invalid("iterated roots need a1 != 0"));
    }
    // (1 + A u)^n: a₁ = n A, a₂ = n (n-1) A² / 2
    let ratio = a[2].clone() * &T::from_i64(2) / &(a[1].clone() * &a[1]);
    let denominator = T::one() - &ratio;
    if denominator.is_zero() {
        return Err(Error::invalid("a2 = a1²/2 leaves the first stage undetermined"));
    }
    let mut n_prev = T::one() / &denominator;
    let a1 = a[1].clone() / &n_prev;
    let mut ladder: Vec<(T, u32, T)> = vec![(a1.clone(), 1, n_prev.clone())];
    let mut base = vec![T::zero(); k + 1];
    base[0] = T::one();
    base[1] = a1;

    let to_root = |ladder: &[(T, u32, T)]| RootApproximant {
        prefactor: series.prefactor().clone(),
        orientation: Orientation::AtZero,
        ladder_exponent: series.power_step().clone(),
        series_step: series.power_step().clone(),
        rungs: ladder
            .iter()
            .map(|(amp, power, n)| Rung {
                amplitude: amp.to_real(),
                power: *power,
                exponent: Exponent::from_scalar(n),
            })
            .collect(),
    };
    let mut stages = vec![to_root(&ladder)];

    let mut m = 3usize;
    while m < k {
        let r = pow_unit(&base, &n_prev, k);
        // With inner = n_prev/n_new, base^inner + A u^m raised to n_new expands as
        // r + n_new A u^m + n_new A (n_prev - inner) b₁ u^{m+1} + ...
        let x = a[m].clone() - &r[m];
        let c1 = n_prev.clone() * &base[1];
        if c1.is_zero() {
            break;
        }
        let amp = (r[m + 1].clone() + &(x.clone() * &c1) - &a[m + 1]) / &c1;
        if amp.is_zero() || x.is_zero() {
            break;
        }
        let n_new = x / &amp;
        let inner = n_prev.clone() / &n_new;
        let mut next = pow_unit(&base, &inner, k);
        next[m] = next[m].clone() + &amp;
        if let Some(last) = ladder.last_mut() {
            last.2 = inner;
        }
        ladder.push((amp, m as u32, n_new.clone()));
        stages.push(to_root(&ladder));
        base = next;
        n_prev = n_new;
        m += 2;
    }
    Ok(stages)
}
