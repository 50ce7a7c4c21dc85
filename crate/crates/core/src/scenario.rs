//! Benchmark scenarios: the six built-in problems and the structured input
//! document used for user-supplied series.

use std::fmt;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::{parse_decimal, pi, real, real_q, PRECISION};
use crate::root::StrongCouplingExpansion;
use crate::series::{AsymptoticSeries, PowerPrefactor};

pub const BUILTIN_NAMES: [&str; 6] = ["polaron", "lieb-liniger", "fermi-gas", "oscillator", "string", "membrane"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pipeline {
    /// Accuracy-through-order factor approximants and their large-`g` form.
    Factor,
    /// Factor approximants that also match the leading strong-coupling term.
    FactorInterpolant,
    /// Root ladder interpolation that predicts one coefficient per stage.
    Bootstrap,
    /// Root ladder interpolation against every anchor term.
    RootInterpolant,
    IteratedRoots,
    PowerRestriction,
    /// ω from the β-series.
    Omega,
    Transformation,
}

impl Pipeline {
    pub const ALL: [Pipeline; 8] = [
        Pipeline::Factor,
        Pipeline::FactorInterpolant,
        Pipeline::Bootstrap,
        Pipeline::RootInterpolant,
        Pipeline::IteratedRoots,
        Pipeline::PowerRestriction,
        Pipeline::Omega,
        Pipeline::Transformation,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Factor => "factor",
            Pipeline::FactorInterpolant => "factor_interpolant",
            Pipeline::Bootstrap => "bootstrap",
            Pipeline::RootInterpolant => "root_interpolant",
            Pipeline::IteratedRoots => "iterated_roots",
            Pipeline::PowerRestriction => "power_restriction",
            Pipeline::Omega => "omega",
            Pipeline::Transformation => "transformation",
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pipeline {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().replace('-', "_");
        Pipeline::ALL
            .into_iter()
            .find(|p| p.name() == key)
            .ok_or_else(|| Error::invalid(format!("unknown pipeline {s:?}")))
    }
}

/// What a reference value is compared against.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    /// The constant `f(∞)`.
    #[default]
    Limit,
    /// Amplitude of the leading large-`g` power.
    StrongAmplitude,
    /// The coefficient of order `k` of the series, unnormalized.
    Coefficient(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub label: String,
    pub value: f64,
    pub source: String,
    #[serde(default)]
    pub target: Target,
}

/// A pipeline and the orders it runs at by default.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PipelineSpec {
    pub pipeline: Pipeline,
    pub orders: RangeInclusive<usize>,
}

/// Exact cross-check lists carried by a scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Fixture {
    pub label: String,
    pub values: Vec<Rational>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub series: AsymptoticSeries<Float>,
    /// The same series in exact arithmetic, when every coefficient is rational.
    pub exact: Option<AsymptoticSeries<Rational>>,
    pub asymptote: Option<StrongCouplingExpansion>,
    pub references: Vec<Reference>,
    pub pipelines: Vec<PipelineSpec>,
    /// A known approach exponent; otherwise the transformation estimates ω.
    pub omega: Option<Rational>,
    pub fixtures: Vec<Fixture>,
    /// Things the loader changed, such as normalizing `a₀`.
    pub notices: Vec<String>,
}

impl Scenario {
    pub fn reference(&self, target: Target) -> Option<&Reference> {
        self.references.iter().find(|r| r.target == target)
    }

    pub fn fixture(&self, label: &str) -> Option<&Fixture> {
        self.fixtures.iter().find(|f| f.label == label)
    }

    /// The input document that loads back into this scenario.
    pub fn to_document(&self) -> ScenarioDocument {
        let coefficients: Vec<String> = match &self.exact {
            Some(exact) => exact.coefficients().iter().map(rational_text).collect(),
            None => self.series.coefficients().iter().map(float_text).collect(),
        };
        ScenarioDocument {
            name: Some(self.name.clone()),
            prefactor: PrefactorDocument {
                amplitude: Decimal(float_text(&self.series.prefactor().amplitude)),
                exponent: Decimal(rational_text(&self.series.prefactor().exponent)),
            },
            power_step: Decimal(rational_text(self.series.power_step())),
            coefficients: coefficients.into_iter().map(Decimal).collect(),
            asymptote: self.asymptote.as_ref().map(|a| {
                a.terms()
                    .iter()
                    .map(|(b, alpha)| AsymptoteTerm {
                        b: Decimal(float_text(b)),
                        alpha: Decimal(rational_text(alpha)),
                    })
                    .collect()
            }),
            references: (!self.references.is_empty()).then(|| self.references.clone()),
            omega: self.omega.as_ref().map(|w| Decimal(rational_text(w))),
            pipelines: Some(
                self.pipelines
                    .iter()
                    .map(|p| PipelineDocument {
                        pipeline: p.pipeline,
                        from: *p.orders.start(),
                        to: *p.orders.end(),
                    })
                    .collect(),
            ),
        }
    }
}

fn rational_text(q: &Rational) -> String {
    if *q.denom() == 1 {
        q.numer().to_string()
    } else {
        q.to_string()
    }
}

/// Enough digits that reading the text back gives the same 256-bit float.
fn float_text(x: &Float) -> String {
    x.to_string_radix(10, Some(80))
}

/// A number written as a decimal string (`"-1.591962e-2"`, `"3/10"`); plain
/// JSON numbers are accepted on input.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Decimal(pub String);

impl<'de> Deserialize<'de> for Decimal {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Number(serde_json::Number),
        }
        Ok(match Raw::deserialize(deserializer)? {
            Raw::Text(s) => Decimal(s),
            Raw::Number(n) => Decimal(n.to_string()),
        })
    }
}

impl Decimal {
    fn parse(&self, field: &str) -> Result<Rational> {
        parse_decimal(&self.0).map_err(|_| Error::schema(field, format!("not a decimal number: {:?}", self.0)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrefactorDocument {
    pub amplitude: Decimal,
    pub exponent: Decimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AsymptoteTerm {
    pub b: Decimal,
    pub alpha: Decimal,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineDocument {
    pub pipeline: Pipeline,
    pub from: usize,
    pub to: usize,
}

/// The structured input document.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub prefactor: PrefactorDocument,
    pub power_step: Decimal,
    pub coefficients: Vec<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub asymptote: Option<Vec<AsymptoteTerm>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub references: Option<Vec<Reference>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub omega: Option<Decimal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pipelines: Option<Vec<PipelineDocument>>,
}

/// A built-in name, or the text of an input document.
pub fn load_scenario(source: &str) -> Result<Scenario> {
    if BUILTIN_NAMES.contains(&source.trim()) {
        builtin(source.trim())
    } else {
        parse_document(source)
    }
}

/// Parses a JSON input document. A report emitted as `json-doc` is accepted
/// too; its embedded `scenario` is loaded.
pub fn parse_document(text: &str) -> Result<Scenario> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| Error::schema("document", e.to_string()))?;
    let value = match value {
        serde_json::Value::Object(mut map) if map.contains_key("rows") && map.contains_key("scenario") => {
            map.remove("scenario").unwrap_or_default()
        }
        other => other,
    };
    let doc: ScenarioDocument = serde_json::from_value(value).map_err(|e| Error::schema("document", e.to_string()))?;
    from_document(&doc)
}

pub fn from_document(doc: &ScenarioDocument) -> Result<Scenario> {
    let amplitude = doc.prefactor.amplitude.parse("prefactor.amplitude")?;
    let exponent = doc.prefactor.exponent.parse("prefactor.exponent")?;
    let power_step = doc.power_step.parse("power_step")?;
    let coefficients = doc
        .coefficients
        .iter()
        .enumerate()
        .map(|(i, c)| c.parse(&format!("coefficients[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    let mut notices = Vec::new();
    if let Some(a0) = coefficients.first() {
        if *a0 != 1 && !a0.is_zero() {
            notices.push(format!("a0 = {} normalized to 1; the prefactor amplitude absorbs it", rational_text(a0)));
        }
    }
    let prefactor = PowerPrefactor::new(real_q(&amplitude), exponent)?;
    let exact = AsymptoticSeries::new(prefactor, power_step, coefficients)?;
    let series = exact.to_real();

    let asymptote = match &doc.asymptote {
        None => None,
        Some(terms) => {
            let parsed = terms
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    Ok((
                        real_q(&t.b.parse(&format!("asymptote[{i}].b"))?),
                        t.alpha.parse(&format!("asymptote[{i}].alpha"))?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            Some(StrongCouplingExpansion::new(parsed)?)
        }
    };
    let references = doc.references.clone().unwrap_or_default();
    for (i, r) in references.iter().enumerate() {
        if r.source.trim().is_empty() {
            return Err(Error::schema(format!("references[{i}].source"), "every reference needs a source"));
        }
        if !r.value.is_finite() {
            return Err(Error::schema(format!("references[{i}].value"), "must be finite"));
        }
    }
    let omega = match &doc.omega {
        None => None,
        Some(w) => {
            let w = w.parse("omega")?;
            if w.cmp0() != std::cmp::Ordering::Greater {
                return Err(Error::schema("omega", "must be positive"));
            }
            Some(w)
        }
    };
    let order = exact.order();
    let pipelines = match &doc.pipelines {
        Some(list) => list
            .iter()
            .enumerate()
            .map(|(i, p)| {
                if p.from > p.to {
                    return Err(Error::schema(format!("pipelines[{i}]"), "from must not exceed to"));
                }
                Ok(PipelineSpec {
                    pipeline: p.pipeline,
                    orders: p.from..=p.to,
                })
            })
            .collect::<Result<Vec<_>>>()?,
        None => default_pipelines(&series, asymptote.is_some(), order),
    };
    Ok(Scenario {
        name: doc.name.clone().unwrap_or_else(|| "input".to_string()),
        series,
        exact: Some(exact),
        asymptote,
        references,
        pipelines,
        omega,
        fixtures: Vec::new(),
        notices,
    })
}

/// Pipelines that make sense for an arbitrary document.
fn default_pipelines(series: &AsymptoticSeries<Float>, has_asymptote: bool, order: usize) -> Vec<PipelineSpec> {
    let all = 1..=order.max(1);
    let mut out = vec![PipelineSpec {
        pipeline: Pipeline::Factor,
        orders: all.clone(),
    }];
    if has_asymptote {
        out.push(PipelineSpec {
            pipeline: Pipeline::FactorInterpolant,
            orders: all.clone(),
        });
    }
    if series.prefactor().exponent.cmp0() == std::cmp::Ordering::Less {
        out.push(PipelineSpec {
            pipeline: Pipeline::PowerRestriction,
            orders: all.clone(),
        });
    }
    out
}

fn q(text: &str) -> Rational {
    parse_decimal(text).expect("built-in constant")
}

fn qs(texts: &[&str]) -> Vec<Rational> {
    texts.iter().map(|t| q(t)).collect()
}

fn reference(label: &str, value: f64, source: &str, target: Target) -> Reference {
    Reference {
        label: label.to_string(),
        value,
        source: source.to_string(),
        target,
    }
}

fn spec(pipeline: Pipeline, orders: RangeInclusive<usize>) -> PipelineSpec {
    PipelineSpec { pipeline, orders }
}

fn pi_squared() -> Float {
    Float::with_val(PRECISION, pi().square_ref())
}

/// `π²/(8g²)`, shared by the string and the membrane.
fn wall_prefactor() -> PowerPrefactor {
    PowerPrefactor::new(pi_squared() / 8u32, Rational::from(-2)).expect("nonzero")
}

pub fn builtin(name: &str) -> Result<Scenario> {
    let scenario = match name {
        "polaron" => polaron(),
        "lieb-liniger" => lieb_liniger(),
        "fermi-gas" => fermi_gas(),
        "oscillator" => oscillator(),
        "string" => string(),
        "membrane" => membrane(),
        other => {
            return Err(Error::invalid(format!(
                "unknown scenario {other:?}; built-ins are {}",
                BUILTIN_NAMES.join(", ")
            )))
        }
    };
    Ok(scenario)
}

fn exact_scenario(
    name: &str,
    prefactor: PowerPrefactor,
    power_step: Rational,
    coefficients: Vec<Rational>,
) -> (AsymptoticSeries<Float>, AsymptoticSeries<Rational>, String) {
    let exact = AsymptoticSeries::new(prefactor, power_step, coefficients).expect("built-in series");
    (exact.to_real(), exact, name.to_string())
}

/// Fröhlich polaron energy, `e ≃ a₁g + a₂g² + a₃g³`, strong coupling `Bg²`.
fn polaron() -> Scenario {
    // a₁ is the leading coefficient; the loader folds it into the amplitude.
    let coefficients = qs(&["-1", "-1.591962e-2", "-0.806070e-3"]);
    let prefactor = PowerPrefactor::new(real(1.0), Rational::from(1)).expect("nonzero");
    let (series, exact, name) = exact_scenario("polaron", prefactor, Rational::from(1), coefficients);
    let miyake = "Miyake strong-coupling limit";
    let estimate = "published bootstrap estimate";
    Scenario {
        name,
        series,
        exact: Some(exact),
        asymptote: Some(StrongCouplingExpansion::new(vec![(real_q(&q("-0.108513")), Rational::from(2))]).expect("valid")),
        references: vec![
            reference("B", -0.108513, miyake, Target::StrongAmplitude),
            reference("a4*", -5.014168e-5, estimate, Target::Coefficient(3)),
            reference("a5*", -3.312472e-6, estimate, Target::Coefficient(4)),
        ],
        pipelines: vec![spec(Pipeline::Bootstrap, 3..=4)],
        omega: None,
        fixtures: Vec::new(),
        notices: Vec::new(),
    }
}

/// Lieb-Liniger energy, `e ≃ g + a₃g^{3/2} + a₄g² + a₅g^{5/2}` with the
/// Tonks-Girardeau expansion `π²/3 (1 - 4/g + 12/g²)`.
fn lieb_liniger() -> Scenario {
    let prefactor = PowerPrefactor::new(real(1.0), Rational::from(1)).expect("nonzero");
    let coefficients = qs(&["1", "-0.424413", "0.065352", "-0.017201"]);
    let (series, exact, name) = exact_scenario("lieb-liniger", prefactor, Rational::from((1, 2)), coefficients);
    let tonks = pi_squared() / 3u32;
    let anchor = vec![
        (tonks.clone(), Rational::new()),
        (Float::with_val(PRECISION, &tonks * -4i32), Rational::from(-1)),
        (Float::with_val(PRECISION, &tonks * 12u32), Rational::from(-2)),
    ];
    Scenario {
        name,
        series,
        exact: Some(exact),
        asymptote: Some(StrongCouplingExpansion::new(anchor).expect("valid")),
        references: vec![
            reference("pi^2/3", tonks.to_f64(), "Tonks-Girardeau limit", Target::Limit),
            reference("a6*", 5.153629e-3, "published bootstrap estimate", Target::Coefficient(4)),
        ],
        pipelines: vec![spec(Pipeline::Bootstrap, 4..=5), spec(Pipeline::RootInterpolant, 1..=3)],
        omega: None,
        fixtures: Vec::new(),
        notices: Vec::new(),
    }
}

/// Dilute attractive Fermi gas; the unitary limit is 0.132.
fn fermi_gas() -> Scenario {
    let a0 = q("3/10");
    // a₁ = -1/(3π) is irrational, so there is no exact series.
    let a1 = Float::with_val(PRECISION, -(3u32 * pi())).recip();
    let coefficients: Vec<Float> = vec![real_q(&a0), a1, real_q(&q("0.055661")), real_q(&q("-0.00914")), real_q(&q("-0.018604"))];
    let prefactor = PowerPrefactor::new(real(1.0), Rational::new()).expect("nonzero");
    let series = AsymptoticSeries::new(prefactor, Rational::from(1), coefficients).expect("built-in series");
    Scenario {
        name: "fermi-gas".to_string(),
        series,
        exact: None,
        asymptote: Some(StrongCouplingExpansion::new(vec![(real_q(&q("0.132")), Rational::new())]).expect("valid")),
        references: vec![reference("unitary", 0.132, "unitary-limit numerical value", Target::Limit)],
        pipelines: vec![spec(Pipeline::FactorInterpolant, 3..=4)],
        omega: None,
        fixtures: Vec::new(),
        notices: Vec::new(),
    }
}

/// Quartic anharmonic oscillator ground state, `H = -½∂² + ½x² + g x⁴`.
fn oscillator() -> Scenario {
    let coefficients = qs(&[
        "1/2",
        "3/4",
        "-2.625",
        "20.8125",
        "-241.2890625",
        "3580.98046875",
        "-63982.8134766",
        "1329733.72705",
    ]);
    let prefactor = PowerPrefactor::new(real(1.0), Rational::new()).expect("nonzero");
    let (series, exact, name) = exact_scenario("oscillator", prefactor, Rational::from(1), coefficients);
    Scenario {
        name,
        series,
        exact: Some(exact),
        asymptote: None,
        references: vec![reference(
            "0.667986 g^(1/3)",
            0.667986,
            "strong-coupling expansion of the quartic oscillator",
            Target::StrongAmplitude,
        )],
        pipelines: vec![spec(Pipeline::Factor, 1..=7), spec(Pipeline::IteratedRoots, 2..=7)],
        omega: None,
        fixtures: Vec::new(),
        notices: Vec::new(),
    }
}

/// Coefficients `a₀..a_k` of `E(g) 8g²/π² = 1 + g²/32 + (g/4)√(1 + g²/64)`.
pub fn string_coefficients(k: usize) -> Vec<Rational> {
    let mut out = vec![Rational::new(); k + 1];
    out[0] = Rational::from(1);
    if k >= 2 {
        out[2] = Rational::from((1, 32));
    }
    // (g/4) Σ_j C(1/2, j) (g²/64)^j
    let mut binomial = Rational::from(1);
    let mut scale = Rational::from((1, 4));
    let mut j = 0u32;
    while 2 * j as usize + 1 <= k {
        out[2 * j as usize + 1] += Rational::from(&binomial * &scale);
        binomial *= Rational::from((1, 2)) - j;
        binomial /= j + 1;
        scale /= 64;
        j += 1;
    }
    out
}

/// Ground-state energy of the particle between soft walls of stiffness `g`.
pub fn exact_string_energy(g: &Float) -> Result<Float> {
    if g.cmp0() != Some(std::cmp::Ordering::Greater) {
        return Err(Error::invalid("g must be positive"));
    }
    let g2 = Float::with_val(PRECISION, g.square_ref());
    let root = (Float::with_val(PRECISION, &g2 / 64u32) + 1u32).sqrt();
    let mut bracket = Float::with_val(PRECISION, &g2 / 32u32);
    bracket += 1u32;
    bracket += Float::with_val(PRECISION, g * &root) / 4u32;
    Ok(pi_squared() / (g2 * 8u32) * bracket)
}

fn string() -> Scenario {
    let (series, exact, name) = exact_scenario("string", wall_prefactor(), Rational::from(1), string_coefficients(15));
    let limit = pi_squared() / 128u32;
    Scenario {
        name,
        series,
        exact: Some(exact),
        asymptote: None,
        references: vec![reference("pi^2/128", limit.to_f64(), "exact solution of the soft-wall problem", Target::Limit)],
        pipelines: vec![
            spec(Pipeline::PowerRestriction, 3..=15),
            spec(Pipeline::Transformation, 3..=15),
            spec(Pipeline::Omega, 4..=8),
        ],
        // The exact energy approaches π²/128 as g^-2.
        omega: Some(Rational::from(2)),
        fixtures: vec![
            Fixture {
                label: "beta".to_string(),
                values: qs(&["1", "-1/8", "0", "1/1024", "0", "-3/262144", "0", "5/33554432", "0", "-35/17179869184"]),
            },
            Fixture {
                label: "transformed".to_string(),
                values: qs(&[
                    "1",
                    "-3/4",
                    "-3/32",
                    "-15/512",
                    "-15/1024",
                    "-1185/131072",
                    "-1635/262144",
                    "-77295/16777216",
                    "-119595/33554432",
                    "-24489285/8589934592",
                ]),
            },
        ],
        notices: Vec::new(),
    }
}

/// Pressure of a fluctuating membrane between walls, known to sixth order.
fn membrane() -> Scenario {
    let coefficients = qs(&[
        "1",
        "1/4",
        "1/32",
        "2.176347e-3",
        "0.552721e-4",
        "-0.721482e-5",
        "-1.777848e-6",
    ]);
    let (series, exact, name) = exact_scenario("membrane", wall_prefactor(), Rational::from(1), coefficients);
    Scenario {
        name,
        series,
        exact: Some(exact),
        asymptote: None,
        references: vec![
            reference("Monte Carlo", 0.0798, "Gompper and Kroll, Monte Carlo (±0.0003)", Target::Limit),
            reference("Kastening", 0.0821, "Kastening, numerical variational perturbation theory", Target::Limit),
        ],
        pipelines: vec![
            spec(Pipeline::PowerRestriction, 1..=6),
            spec(Pipeline::Omega, 2..=6),
            spec(Pipeline::Transformation, 4..=6),
        ],
        omega: None,
        fixtures: vec![Fixture {
            label: "beta".to_string(),
            values: qs(&["1", "-1/8", "0", "0.64173e-3", "0.10668e-5", "0.46253e-5", "0.18454e-5"]),
        }],
        notices: Vec::new(),
    }
}
