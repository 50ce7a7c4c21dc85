//! Extrapolation to `g → ∞`: power restriction, and the variable
//! transformation `g = z (1 - z)^(-1/ω)` that maps infinity to `z = 1`.

use std::collections::BTreeMap;

use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{build_factor, build_factor_constrained, factor_asymptote, FactorApproximant, OddConvention};
use crate::numeric::{real, real_q, RealScalar, PRECISION};
use crate::series::{beta_series, transform_series, AsymptoticSeries};

/// ω read off one even-order β-approximant.
#[derive(Clone, Debug, PartialEq)]
pub struct OmegaCandidate {
    /// `None` when the order gives no real positive ω.
    pub omega: Option<Float>,
    /// The raw value `-(γ + q Σ mᵢ)`, also when it is rejected.
    pub raw: Option<Float>,
    pub beta_approximant: Option<FactorApproximant>,
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OmegaEstimate {
    pub per_order: BTreeMap<usize, OmegaCandidate>,
    pub selected: Float,
    pub selected_order: usize,
}

/// A per-order limit, or why there is none.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderValue {
    Value(f64),
    Unavailable(String),
}

impl OrderValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            OrderValue::Value(v) => Some(*v),
            OrderValue::Unavailable(_) => None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LimitEstimate {
    pub per_order: BTreeMap<usize, OrderValue>,
    pub filled: BTreeMap<usize, f64>,
    pub final_value: Option<f64>,
}

impl LimitEstimate {
    pub fn from_raw(per_order: BTreeMap<usize, OrderValue>) -> Self {
        LimitEstimate {
            per_order,
            ..Default::default()
        }
    }

    /// `true` when no requested order produced a value.
    pub fn all_unavailable(&self) -> bool {
        self.per_order.values().all(|v| v.value().is_none())
    }
}

/// Power-restricted limits `A Πᵢ Aᵢ^{nᵢ}` for each requested order, then
/// neighbour fill and final average where possible.
pub fn limit_power_restriction(series: &AsymptoticSeries<Float>, orders: &[usize]) -> Result<LimitEstimate> {
    if series.prefactor().exponent.cmp0() != std::cmp::Ordering::Less {
        return Err(Error::invalid("power restriction needs a negative prefactor exponent"));
    }
    let per_order = orders
        .iter()
        .map(|&k| {
            let value = if k > series.order() {
                OrderValue::Unavailable(format!("series known only to order {}", series.order()))
            } else {
                match build_factor_constrained(&series.truncated(k)).and_then(|f| factor_asymptote(&f)) {
                    Ok((amplitude, _)) => OrderValue::Value(amplitude.to_f64()),
                    Err(e) => OrderValue::Unavailable(e.to_string()),
                }
            };
            (k, value)
        })
        .collect();
    Ok(aggregate_or_raw(LimitEstimate::from_raw(per_order)))
}

/// ω from the even-order factor approximants of the β-series.
///
/// A β-approximant `β₀ g^γ Πᵢ (1 + Dᵢ u)^{mᵢ}` behaves as `g^{γ + q Σ mᵢ}`
/// at large `g`, which is `g^{-ω}`. The largest even order with a real
/// positive ω is selected.
pub fn estimate_omega(series: &AsymptoticSeries<Float>, max_even_order: usize) -> Result<OmegaEstimate> {
    let beta = beta_series(series)?;
    let gamma = real_q(&beta.prefactor().exponent);
    let q = real_q(beta.power_step());
    let mut per_order = BTreeMap::new();
    let top = max_even_order.min(beta.order());
    for k in (2..=top).step_by(2) {
        let candidate = match build_factor(&beta.truncated(k), OddConvention::UnitNode) {
            Ok(approx) => {
                let mut total = Float::new(PRECISION);
                let mut imaginary = Float::new(PRECISION);
                for f in &approx.factors {
                    total += f.exponent.real();
                    imaginary += f.exponent.imag();
                }
                let raw = -(Float::with_val(PRECISION, &total * &q) + &gamma);
                let real_valued = imaginary.abs() < Float::with_val(PRECISION, raw.abs_ref()).max(&real(1.0)) * 1e-20;
                let admissible = real_valued && raw.is_finite() && raw.cmp0() == Some(std::cmp::Ordering::Greater);
                OmegaCandidate {
                    omega: admissible.then(|| raw.clone()),
                    note: (!admissible).then(|| "not a real positive exponent".to_string()),
                    raw: Some(raw),
                    beta_approximant: Some(approx),
                }
            }
            Err(e) => OmegaCandidate {
                omega: None,
                raw: None,
                beta_approximant: None,
                note: Some(e.to_string()),
            },
        };
        per_order.insert(k, candidate);
    }
    let (selected_order, selected) = per_order
        .iter()
        .rev()
        .find_map(|(k, c)| c.omega.clone().map(|w| (*k, w)))
        .ok_or(Error::OmegaUnavailable)?;
    Ok(OmegaEstimate {
        per_order,
        selected,
        selected_order,
    })
}

/// `F_k*(1)` for each requested order: transform, build the `z`-side factor
/// approximant (odd orders pin a unit node), evaluate the finite product at
/// `z = 1`; then neighbour fill and final average.
pub fn limit_via_transformation<T: RealScalar>(
    series: &AsymptoticSeries<T>,
    omega: &T,
    orders: &[usize],
) -> Result<LimitEstimate> {
    if omega.to_real().cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::invalid("omega must be positive"));
    }
    let one = real(1.0);
    let mut per_order = BTreeMap::new();
    for &k in orders {
        let value = if k > series.order() {
            OrderValue::Unavailable(format!("series known only to order {}", series.order()))
        } else {
            let evaluated = transform_series(&series.truncated(k), omega).and_then(|t| {
                let approx = build_factor(&t.base.to_real(), OddConvention::UnitNode)?;
                approx.evaluate(&one)
            });
            match evaluated {
                Ok(v) => OrderValue::Value(v.to_f64()),
                Err(e) => OrderValue::Unavailable(e.to_string()),
            }
        };
        per_order.insert(k, value);
    }
    Ok(aggregate_or_raw(LimitEstimate::from_raw(per_order)))
}

fn aggregate_or_raw(raw: LimitEstimate) -> LimitEstimate {
    aggregate_estimates(&raw).unwrap_or(raw)
}

/// Fills an unavailable order with the mean of its two available neighbours
/// and averages the two highest filled orders.
///
/// Endpoints cannot be filled. Fills use the raw neighbours, so the result
/// depends only on `per_order`.
pub fn aggregate_estimates(raw: &LimitEstimate) -> Result<LimitEstimate> {
    let value_at = |k: usize| raw.per_order.get(&k).and_then(OrderValue::value);
    let mut filled = BTreeMap::new();
    for (&k, v) in &raw.per_order {
        match v.value() {
            Some(x) => {
                filled.insert(k, x);
            }
            None => {
                if let (Some(lo), Some(hi)) = (k.checked_sub(1).and_then(value_at), value_at(k + 1)) {
                    filled.insert(k, (lo + hi) / 2.0);
                }
            }
        }
    }
    let mut last = filled.values().rev();
    let (Some(top), Some(below)) = (last.next(), last.next()) else {
        return Err(Error::InsufficientOrders);
    };
    let final_value = Some((top + below) / 2.0);
    Ok(LimitEstimate {
        per_order: raw.per_order.clone(),
        filled,
        final_value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::PowerPrefactor;
    use rug::Rational;

    fn raw(values: &[(usize, Option<f64>)]) -> LimitEstimate {
        LimitEstimate::from_raw(
            values
                .iter()
                .map(|&(k, v)| (k, v.map_or_else(|| OrderValue::Unavailable("x".into()), OrderValue::Value)))
                .collect(),
        )
    }

    #[test]
    fn single_gap_is_filled_with_the_neighbour_mean() {
        let agg = aggregate_estimates(&raw(&[(3, Some(1.0)), (4, None), (5, Some(2.0))])).unwrap();
        assert_eq!(agg.filled[&4], 1.5);
        assert_eq!(agg.final_value, Some(1.75));
    }

    #[test]
    fn endpoints_stay_unfilled() {
        let agg = aggregate_estimates(&raw(&[(1, None), (2, Some(1.0)), (3, Some(3.0)), (4, None)])).unwrap();
        assert!(!agg.filled.contains_key(&1) && !agg.filled.contains_key(&4));
        assert_eq!(agg.final_value, Some(2.0));
    }

    #[test]
    fn one_usable_order_is_not_enough() {
        assert_eq!(
            aggregate_estimates(&raw(&[(1, Some(1.0)), (2, None)])),
            Err(Error::InsufficientOrders)
        );
    }

    #[test]
    fn membrane_final_average() {
        let agg = aggregate_estimates(&raw(&[(4, Some(0.0906)), (5, Some(0.0898)), (6, Some(0.0747))])).unwrap();
        assert!((agg.final_value.unwrap() - 0.08225).abs() < 1e-12);
    }

    #[test]
    fn single_factor_limit_is_recovered() {
        // f = g^{-2} (1 + 3g)^2 → 9
        let prefactor = PowerPrefactor::new(real(1.0), Rational::from(-2)).unwrap();
        let series = AsymptoticSeries::new(prefactor, Rational::from(1), vec![real(1.0), real(6.0), real(9.0), real(0.0)]).unwrap();
        let est = limit_power_restriction(&series, &[1, 2, 3]).unwrap();
        for k in 1..=2 {
            let v = est.per_order[&k].value().unwrap();
            assert!((v - 9.0).abs() < 1e-12, "k = {k}: {v}");
        }
        // Two free nodes for a one-factor function: the Hankel system is singular.
        assert!(est.per_order[&3].value().is_none());
    }

    #[test]
    fn constant_series_transforms_to_its_amplitude() {
        let prefactor = PowerPrefactor::new(real(0.25), Rational::new()).unwrap();
        let series = AsymptoticSeries::new(prefactor, Rational::from(1), vec![real(1.0), real(0.0), real(0.0), real(0.0)]).unwrap();
        let est = limit_via_transformation(&series, &real(2.0), &[1, 2, 3]).unwrap();
        for k in 1..=3 {
            assert_eq!(est.per_order[&k].value(), Some(0.25));
        }
        assert_eq!(est.final_value, Some(0.25));
    }

    #[test]
    fn omega_of_a_rational_function() {
        // f = (2+g)/(1+g) = 2 (1 + g/2)(1 + g)^-1, f - 1 ~ 1/g, so ω = 1.
        let prefactor = PowerPrefactor::new(real(2.0), Rational::new()).unwrap();
        let mut coeffs = vec![real(1.0)];
        // (1 + g/2) Σ (-g)^n = 1 - g/2 + g²/2 - ...
        for n in 1..=6 {
            let sign = if n % 2 == 0 { 0.5 } else { -0.5 };
            coeffs.push(real(sign));
        }
        let series = AsymptoticSeries::new(prefactor, Rational::from(1), coeffs).unwrap();
        let est = estimate_omega(&series, 6).unwrap();
        assert!((est.selected.to_f64() - 1.0).abs() < 1e-12);
    }
}
