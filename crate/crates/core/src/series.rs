//! Truncated power series and the series-level derivations the approximant
//! builders consume: log-moments, the β (log-derivative) series and the
//! `g = z (1 - z)^(-1/ω)` re-expansion.
//!
//! A series is stored against `u = g^q` with integer powers; `q` is carried as
//! metadata so half-integer expansions need no special casing.

use rug::ops::Pow;
use rug::{Float, Rational};

use crate::error::{Error, Result};
use crate::numeric::{real_q, RealScalar, Scalar, PRECISION};

/// `amplitude · g^exponent`.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerPrefactor {
    pub amplitude: Float,
    pub exponent: Rational,
}

impl PowerPrefactor {
    pub fn new(amplitude: Float, exponent: Rational) -> Result<Self> {
        if amplitude.is_zero() || !amplitude.is_finite() {
            return Err(Error::schema("prefactor.amplitude", "must be finite and nonzero"));
        }
        Ok(PowerPrefactor { amplitude, exponent })
    }

    pub fn constant(amplitude: Float) -> Result<Self> {
        Self::new(amplitude, Rational::new())
    }

    pub fn evaluate(&self, g: &Float) -> Float {
        let power = Float::with_val(PRECISION, g.pow(&real_q(&self.exponent)));
        power * &self.amplitude
    }
}

/// `f_k(g) = f₀(g) · Σ aₙ uⁿ` with `u = g^q` and `a₀ = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticSeries<T> {
    prefactor: PowerPrefactor,
    power_step: Rational,
    coefficients: Vec<T>,
}

impl<T: RealScalar> AsymptoticSeries<T> {
    /// Builds a series, folding any `a₀ ≠ 1` into the prefactor amplitude.
    pub fn new(prefactor: PowerPrefactor, power_step: Rational, coefficients: Vec<T>) -> Result<Self> {
        if power_step.cmp0() != std::cmp::Ordering::Greater {
            return Err(Error::schema("power_step", "must be positive"));
        }
        let Some(a0) = coefficients.first().cloned() else {
            return Err(Error::schema("coefficients", "at least a0 is required"));
        };
        if a0.is_zero() {
            return Err(Error::schema("coefficients[0]", "a0 must be nonzero"));
        }
        let coefficients = coefficients.into_iter().map(|c| c / &a0).collect();
        let amplitude = prefactor.amplitude * a0.to_real();
        Ok(AsymptoticSeries {
            prefactor: PowerPrefactor::new(amplitude, prefactor.exponent)?,
            power_step,
            coefficients,
        })
    }

    pub fn to_real(&self) -> AsymptoticSeries<Float> {
        AsymptoticSeries {
            prefactor: self.prefactor.clone(),
            power_step: self.power_step.clone(),
            coefficients: self.coefficients.iter().map(RealScalar::to_real).collect(),
        }
    }

    /// Evaluates the truncated sum itself (not an approximant).
    pub fn evaluate_partial(&self, g: &Float) -> Float {
        let u = Float::with_val(PRECISION, g.pow(&real_q(&self.power_step)));
        let mut acc = Float::new(PRECISION);
        for c in self.coefficients.iter().rev() {
            acc = acc * &u + c.to_real();
        }
        acc * self.prefactor.evaluate(g)
    }
}

impl<T: Scalar> AsymptoticSeries<T> {
    /// Assembles a series whose coefficients are already normalized.
    pub(crate) fn from_normalized(prefactor: PowerPrefactor, power_step: Rational, coefficients: Vec<T>) -> Self {
        debug_assert!(coefficients.first().is_some_and(|c| *c == T::one()));
        AsymptoticSeries {
            prefactor,
            power_step,
            coefficients,
        }
    }

    pub fn prefactor(&self) -> &PowerPrefactor {
        &self.prefactor
    }

    pub fn power_step(&self) -> &Rational {
        &self.power_step
    }

    pub fn coefficients(&self) -> &[T] {
        &self.coefficients
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Keeps `a₀..a_k`.
    pub fn truncated(&self, k: usize) -> Self {
        let mut out = self.clone();
        out.coefficients.truncate(k + 1);
        out
    }

    /// Appends `a_{k+1}`, e.g. a predicted coefficient.
    pub fn extended(&self, next: T) -> Self {
        let mut out = self.clone();
        out.coefficients.push(next);
        out
    }
}

/// Log-moments `B₁..B_k`, optionally with `B₀ = Σ nᵢ` for constrained builds.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector<T> {
    pub values: Vec<T>,
    pub zero: Option<T>,
}

impl<T: Clone> MomentVector<T> {
    /// `B_m`, with `m = 0` served from the optional zeroth moment.
    pub fn get(&self, m: usize) -> Option<T> {
        if m == 0 {
            self.zero.clone()
        } else {
            self.values.get(m - 1).cloned()
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// A series re-expanded in `z` after `g = z (1 - z)^(-1/ω)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TransformedSeries<T> {
    pub omega: T,
    pub base: AsymptoticSeries<T>,
}

/// Product of two series truncated at order `k`.
pub fn mul<T: Scalar>(a: &[T], b: &[T], k: usize) -> Vec<T> {
    (0..=k)
        .map(|n| {
            let mut acc = T::zero();
            for i in 0..=n {
                if let (Some(x), Some(y)) = (a.get(i), b.get(n - i)) {
                    if !x.is_zero() && !y.is_zero() {
                        acc = acc + &(x.clone() * y);
                    }
                }
            }
            acc
        })
        .collect()
}

/// `ln a` for a series with `a₀ = 1`; the result has a zero constant term.
pub fn log_unit<T: Scalar>(a: &[T], k: usize) -> Vec<T> {
    let coef = |n: usize| a.get(n).cloned().unwrap_or_else(T::zero);
    let mut out = vec![T::zero(); k + 1];
    for n in 1..=k {
        let mut acc = coef(n) * &T::from_i64(n as i64);
        for j in 1..n {
            let a_nj = coef(n - j);
            if !a_nj.is_zero() {
                acc = acc - &(out[j].clone() * &T::from_i64(j as i64) * &a_nj);
            }
        }
        out[n] = acc / &T::from_i64(n as i64);
    }
    out
}

/// `exp l` for a series with `l₀ = 0`.
pub fn exp_zero<T: Scalar>(l: &[T], k: usize) -> Vec<T> {
    let coef = |n: usize| l.get(n).cloned().unwrap_or_else(T::zero);
    let mut out = vec![T::zero(); k + 1];
    out[0] = T::one();
    for n in 1..=k {
        let mut acc = T::zero();
        for j in 1..=n {
            let l_j = coef(j);
            if !l_j.is_zero() {
                acc = acc + &(l_j * &T::from_i64(j as i64) * &out[n - j]);
            }
        }
        out[n] = acc / &T::from_i64(n as i64);
    }
    out
}

/// `a^p` for a series with `a₀ = 1`, by the J.C.P. Miller recurrence.
pub fn pow_unit<T: Scalar>(a: &[T], p: &T, k: usize) -> Vec<T> {
    let coef = |n: usize| a.get(n).cloned().unwrap_or_else(T::zero);
    let mut out = vec![T::zero(); k + 1];
    out[0] = T::one();
    for n in 1..=k {
        let mut acc = T::zero();
        for j in 1..=n {
            let a_j = coef(j);
            if a_j.is_zero() {
                continue;
            }
            let weight = p.clone() * &T::from_i64(j as i64) - &T::from_i64((n - j) as i64);
            acc = acc + &(weight * &a_j * &out[n - j]);
        }
        out[n] = acc / &T::from_i64(n as i64);
    }
    out
}

/// `Bₙ = (-1)^(n-1) n Lₙ` with `Lₙ` the coefficients of `ln Σ aₘ uᵐ`.
pub fn compute_moments<T: Scalar>(series: &AsymptoticSeries<T>) -> MomentVector<T> {
    let k = series.order();
    let logs = log_unit(series.coefficients(), k);
    let values = (1..=k)
        .map(|n| {
            let b = logs[n].clone() * &T::from_i64(n as i64);
            if n % 2 == 0 {
                -b
            } else {
                b
            }
        })
        .collect();
    MomentVector { values, zero: None }
}

/// Truncated expansion of `β(g) = g f'(g) / f(g)`.
///
/// With a nonzero prefactor exponent `α` the result is `α (1 + Σ cₙ uⁿ)` of
/// the same order. With `α = 0` the leading term is `q L₁ u`, so the result
/// carries prefactor `q L₁ g^q` and is one order shorter.
pub fn beta_series<T: RealScalar>(series: &AsymptoticSeries<T>) -> Result<AsymptoticSeries<T>> {
    let k = series.order();
    let logs = log_unit(series.coefficients(), k);
    let q = series.power_step();
    let alpha = &series.prefactor().exponent;
    // g d/dg ln f = α + q Σ n Lₙ uⁿ
    let scaled = |n: usize| logs[n].clone() * &T::from_i64(n as i64) * &T::from_rational(q);
    if alpha.cmp0() != std::cmp::Ordering::Equal {
        let inv_alpha = T::from_rational(&Rational::from(alpha.recip_ref()));
        let mut coefficients = vec![T::one()];
        coefficients.extend((1..=k).map(|n| scaled(n) * &inv_alpha));
        let prefactor = PowerPrefactor::constant(real_q(alpha))?;
        return Ok(AsymptoticSeries::from_normalized(prefactor, q.clone(), coefficients));
    }
    if k == 0 || logs[1].is_zero() {
        return Err(Error::BetaDegenerate);
    }
    let lead = scaled(1);
    let coefficients = (1..=k).map(|n| scaled(n) / &lead).collect();
    let prefactor = PowerPrefactor::new(lead.to_real(), q.clone())?;
    Ok(AsymptoticSeries::from_normalized(prefactor, q.clone(), coefficients))
}

/// Re-expands `f(g)` in `z` after substituting `g = z (1 - z)^(-1/ω)`.
///
/// The prefactor keeps its amplitude and power (now a power of `z`); the
/// factor `(1 - z)^(-α/ω)` it produces is absorbed into the tail. Exact for
/// rational inputs with rational `ω`. Only `q = 1` series are accepted.
pub fn transform_series<T: RealScalar>(series: &AsymptoticSeries<T>, omega: &T) -> Result<TransformedSeries<T>> {
    if omega.to_real().cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::invalid("omega must be positive"));
    }
    if *series.power_step() != 1 {
        return Err(Error::invalid("the z-transform needs an integer-power series (q = 1)"));
    }
    let k = series.order();
    let inv = T::one() / omega;
    // h = (1 - z)^(-1/ω) = Σ (1/ω)_n zⁿ / n!
    let mut h = vec![T::one()];
    for n in 1..=k {
        let next = h[n - 1].clone() * &(inv.clone() + &T::from_i64(n as i64 - 1)) / &T::from_i64(n as i64);
        h.push(next);
    }
    let alpha = T::from_rational(&series.prefactor().exponent);
    let front = pow_unit(&h, &alpha, k);

    // Σ aₙ zⁿ hⁿ
    let mut tail = vec![T::zero(); k + 1];
    let mut h_power = vec![T::one()];
    for (n, a_n) in series.coefficients().iter().enumerate() {
        if n > 0 {
            h_power = mul(&h_power, &h, k - n);
        }
        if a_n.is_zero() {
            continue;
        }
        for (i, h_i) in h_power.iter().enumerate().take(k - n + 1) {
            tail[n + i] = tail[n + i].clone() + &(a_n.clone() * h_i);
        }
    }
    let coefficients = mul(&front, &tail, k);
    Ok(TransformedSeries {
        omega: omega.clone(),
        base: AsymptoticSeries::from_normalized(series.prefactor().clone(), Rational::from(1), coefficients),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::real;

    fn q(n: i64, d: i64) -> Rational {
        Rational::from((n, d))
    }

    fn rational_series(coeffs: &[Rational], exponent: Rational) -> AsymptoticSeries<Rational> {
        let prefactor = PowerPrefactor::new(real(1.0), exponent).unwrap();
        AsymptoticSeries::new(prefactor, Rational::from(1), coeffs.to_vec()).unwrap()
    }

    #[test]
    fn first_moment_is_a1() {
        let s = rational_series(&[q(1, 1), q(7, 3)], Rational::new());
        assert_eq!(compute_moments(&s).values, vec![q(7, 3)]);
    }

    #[test]
    fn string_moments_have_vanishing_second_entry() {
        let s = rational_series(&[q(1, 1), q(1, 4), q(1, 32)], Rational::from(-2));
        assert_eq!(compute_moments(&s).values, vec![q(1, 4), q(0, 1)]);
    }

    #[test]
    fn moments_of_a_binomial_product_are_power_sums() {
        // (1+2u)(1+3u)^2
        let a = mul(&[q(1, 1), q(2, 1)], &mul(&[q(1, 1), q(3, 1)], &[q(1, 1), q(3, 1)], 4), 4);
        let s = rational_series(&a, Rational::new());
        let b = compute_moments(&s).values;
        assert_eq!(b, vec![q(8, 1), q(22, 1), q(62, 1), q(178, 1)]);
    }

    #[test]
    fn normalization_folds_a0_into_the_amplitude() {
        let prefactor = PowerPrefactor::new(real(2.0), Rational::new()).unwrap();
        let s = AsymptoticSeries::new(prefactor, Rational::from(1), vec![q(3, 10), q(3, 5)]).unwrap();
        assert_eq!(s.coefficients(), &[q(1, 1), q(2, 1)]);
        assert!((s.prefactor().amplitude.to_f64() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_series() {
        let p = PowerPrefactor::new(real(1.0), Rational::new()).unwrap();
        assert!(AsymptoticSeries::<Rational>::new(p.clone(), Rational::from(1), vec![]).is_err());
        assert!(AsymptoticSeries::new(p.clone(), Rational::from(1), vec![q(0, 1)]).is_err());
        assert!(AsymptoticSeries::new(p, Rational::new(), vec![q(1, 1)]).is_err());
        assert!(PowerPrefactor::new(real(0.0), Rational::new()).is_err());
    }

    #[test]
    fn pow_unit_matches_binomial_coefficients() {
        let cube = pow_unit(&[q(1, 1), q(2, 1)], &q(3, 1), 4);
        assert_eq!(cube, vec![q(1, 1), q(6, 1), q(12, 1), q(8, 1), q(0, 1)]);
        let root = pow_unit(&[q(1, 1), q(1, 1)], &q(1, 2), 3);
        assert_eq!(root, vec![q(1, 1), q(1, 2), q(-1, 8), q(1, 16)]);
    }

    #[test]
    fn log_and_exp_are_inverse() {
        let a = vec![q(1, 1), q(-3, 4), q(5, 7), q(2, 9), q(-1, 3)];
        let back = exp_zero(&log_unit(&a, 4), 4);
        assert_eq!(back, a);
    }

    #[test]
    fn beta_of_a_pure_power_is_constant() {
        let s = rational_series(&[q(1, 1), q(0, 1), q(0, 1)], Rational::from(3));
        let beta = beta_series(&s).unwrap();
        assert_eq!(beta.prefactor().amplitude.to_f64(), 3.0);
        assert_eq!(beta.coefficients(), &[q(1, 1), q(0, 1), q(0, 1)]);
    }

    #[test]
    fn beta_without_prefactor_power_starts_at_q_l1() {
        // f = 1 + 2g: β = 2g/(1+2g) = 2g (1 - 2g + 4g² ...)
        let s = rational_series(&[q(1, 1), q(2, 1), q(0, 1), q(0, 1)], Rational::new());
        let beta = beta_series(&s).unwrap();
        assert_eq!(beta.prefactor().amplitude.to_f64(), 2.0);
        assert_eq!(beta.prefactor().exponent, 1);
        assert_eq!(beta.coefficients(), &[q(1, 1), q(-2, 1), q(4, 1)]);

        let flat = rational_series(&[q(1, 1), q(0, 1), q(5, 1)], Rational::new());
        assert_eq!(beta_series(&flat), Err(Error::BetaDegenerate));
    }

    #[test]
    fn transform_of_a_constant_tail_is_trivial() {
        let s = rational_series(&[q(1, 1)], Rational::new());
        let t = transform_series(&s, &q(2, 1)).unwrap();
        assert_eq!(t.base.coefficients(), &[q(1, 1)]);
    }

    #[test]
    fn transform_first_order_follows_g_expansion() {
        // g = z + z²/ω + ...; with α = 0, f = 1 + a1 g + a2 g² gives
        // b1 = a1 and b2 = a2 + a1/ω.
        let s = rational_series(&[q(1, 1), q(3, 1), q(5, 1)], Rational::new());
        let t = transform_series(&s, &q(3, 1)).unwrap();
        assert_eq!(t.base.coefficients(), &[q(1, 1), q(3, 1), q(6, 1)]);
        // with α = -2 the front factor (1-z)^(2/ω) contributes -2/ω at first order
        let s = rational_series(&[q(1, 1), q(3, 1)], Rational::from(-2));
        let t = transform_series(&s, &q(4, 1)).unwrap();
        assert_eq!(t.base.coefficients(), &[q(1, 1), q(5, 2)]);
    }

    #[test]
    fn transform_rejects_nonpositive_omega_and_fractional_steps() {
        let s = rational_series(&[q(1, 1), q(1, 1)], Rational::new());
        assert!(transform_series(&s, &q(0, 1)).is_err());
        let p = PowerPrefactor::new(real(1.0), Rational::new()).unwrap();
        let half = AsymptoticSeries::new(p, q(1, 2), vec![q(1, 1), q(1, 1)]).unwrap();
        assert!(transform_series(&half, &q(2, 1)).is_err());
    }

    #[test]
    fn moment_vector_indexing() {
        let m = MomentVector {
            values: vec![1, 2, 3],
            zero: Some(9),
        };
        assert_eq!(m.get(0), Some(9));
        assert_eq!(m.get(3), Some(3));
        assert_eq!(m.get(4), None);
    }

    #[test]
    fn partial_sum_evaluation() {
        let s = rational_series(&[q(1, 1), q(1, 2)], Rational::from(-1));
        let v = s.evaluate_partial(&real(2.0)).to_f64();
        assert!((v - 1.0).abs() < 1e-15);
    }
}
