//! Running scenarios and rendering their reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::ops::RangeInclusive;
use std::str::FromStr;

use rug::{Float, Rational};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::factor::{build_factor, build_factor_interpolating, FactorApproximant, OddConvention};
use crate::limit::{estimate_omega, limit_power_restriction, limit_via_transformation, LimitEstimate, OrderValue};
use crate::numeric::real_q;
use crate::root::{
    bootstrap_sequence, build_root_interpolant, build_root_iterated, predict_next_coefficient, RootApproximant,
    StrongCouplingExpansion,
};
use crate::scenario::{Pipeline, Scenario, ScenarioDocument, Target};
use crate::series::AsymptoticSeries;

/// Which construction produced a row.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Factor,
    #[serde(rename = "factor_a1_over_a0")]
    FactorFirstCoefficient,
    FactorInterpolant,
    Bootstrap,
    RootInterpolant,
    IteratedRoots,
    PowerRestriction,
    Omega,
    Transformation,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Factor => "factor",
            Method::FactorFirstCoefficient => "factor_a1_over_a0",
            Method::FactorInterpolant => "factor_interpolant",
            Method::Bootstrap => "bootstrap",
            Method::RootInterpolant => "root_interpolant",
            Method::IteratedRoots => "iterated_roots",
            Method::PowerRestriction => "power_restriction",
            Method::Omega => "omega",
            Method::Transformation => "transformation",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "reason")]
pub enum RowStatus {
    Ok,
    /// Unavailable at this order; the value is the mean of its neighbours.
    Filled(String),
    Unavailable(String),
}

impl RowStatus {
    fn label(&self) -> String {
        match self {
            RowStatus::Ok => "ok".to_string(),
            RowStatus::Filled(why) => format!("filled: {why}"),
            RowStatus::Unavailable(why) => format!("unavailable: {why}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    /// Series order the row is built from (for predictions, the predicted order).
    pub order: usize,
    pub method: Method,
    pub value: Option<f64>,
    /// Large-`g` exponent when the value is an amplitude.
    pub exponent: Option<f64>,
    pub error_percent: Option<f64>,
    /// Label of the reference `error_percent` is measured against.
    pub reference: Option<String>,
    pub status: RowStatus,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FinalEstimate {
    pub method: Method,
    pub value: f64,
    pub error_percent: Option<f64>,
    pub reference: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Parameter {
    pub name: String,
    pub value: f64,
}

/// Parameters of one built approximant.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParameterSet {
    pub label: String,
    pub values: Vec<Parameter>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: ScenarioDocument,
    pub rows: Vec<ReportRow>,
    pub finals: Vec<FinalEstimate>,
    pub parameters: Vec<ParameterSet>,
    pub notes: Vec<String>,
}

impl ScenarioReport {
    /// `true` when no row carries a value.
    pub fn all_unavailable(&self) -> bool {
        self.rows.iter().all(|r| r.value.is_none())
    }

    pub fn rows_for(&self, method: Method) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(move |r| r.method == method)
    }

    pub fn row(&self, method: Method, order: usize) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.method == method && r.order == order)
    }

    pub fn final_for(&self, method: Method) -> Option<&FinalEstimate> {
        self.finals.iter().find(|f| f.method == method)
    }

    pub fn parameter_set(&self, label: &str) -> Option<&ParameterSet> {
        self.parameters.iter().find(|p| p.label == label)
    }
}

/// `(value - reference) / reference × 100`.
pub fn percentage_error(value: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 || !reference.is_finite() {
        return Err(Error::invalid("percentage error needs a finite nonzero reference"));
    }
    Ok((value - reference) / reference * 100.0)
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RunOptions {
    /// Restrict to these pipelines; `None` runs the scenario's own list.
    pub pipelines: Option<Vec<Pipeline>>,
    /// Override every pipeline's order range.
    pub orders: Option<RangeInclusive<usize>>,
}

struct Runner<'a> {
    scenario: &'a Scenario,
    report: ScenarioReport,
}

pub fn run_scenario(scenario: &Scenario, options: &RunOptions) -> ScenarioReport {
    let mut runner = Runner {
        scenario,
        report: ScenarioReport {
            scenario: scenario.to_document(),
            rows: Vec::new(),
            finals: Vec::new(),
            parameters: Vec::new(),
            notes: scenario.notices.clone(),
        },
    };
    let plan: Vec<(Pipeline, RangeInclusive<usize>)> = match &options.pipelines {
        Some(list) => list
            .iter()
            .map(|&p| {
                let own = scenario.pipelines.iter().find(|s| s.pipeline == p).map(|s| s.orders.clone());
                (p, own.unwrap_or(1..=scenario.series.order().max(1)))
            })
            .collect(),
        None => scenario.pipelines.iter().map(|s| (s.pipeline, s.orders.clone())).collect(),
    };
    for (pipeline, default_orders) in plan {
        let orders: Vec<usize> = options.orders.clone().unwrap_or(default_orders).collect();
        match pipeline {
            Pipeline::Factor => runner.factor(&orders),
            Pipeline::FactorInterpolant => runner.factor_interpolant(&orders),
            Pipeline::Bootstrap => runner.bootstrap(&orders),
            Pipeline::RootInterpolant => runner.root_interpolant(&orders),
            Pipeline::IteratedRoots => runner.iterated_roots(&orders),
            Pipeline::PowerRestriction => runner.power_restriction(&orders),
            Pipeline::Omega => runner.omega(&orders),
            Pipeline::Transformation => runner.transformation(&orders),
        }
    }
    runner.report
}

fn factor_parameters(label: String, approx: &FactorApproximant) -> ParameterSet {
    let mut values = Vec::new();
    for (i, f) in approx.factors.iter().enumerate() {
        let i = i + 1;
        values.push(Parameter {
            name: format!("A{i}"),
            value: f.node.real().to_f64(),
        });
        if !f.node.imag().is_zero() {
            values.push(Parameter {
                name: format!("A{i}.im"),
                value: f.node.imag().to_f64(),
            });
        }
        values.push(Parameter {
            name: format!("n{i}"),
            value: f.exponent.real().to_f64(),
        });
        if !f.exponent.imag().is_zero() {
            values.push(Parameter {
                name: format!("n{i}.im"),
                value: f.exponent.imag().to_f64(),
            });
        }
    }
    ParameterSet { label, values }
}

fn root_parameters(label: String, root: &RootApproximant) -> ParameterSet {
    let mut values = Vec::new();
    for (i, rung) in root.rungs.iter().enumerate() {
        values.push(Parameter {
            name: format!("A{}", i + 1),
            value: rung.amplitude.to_f64(),
        });
        values.push(Parameter {
            name: format!("n{}", i + 1),
            value: rung.exponent.value().to_f64(),
        });
    }
    ParameterSet { label, values }
}

impl Runner<'_> {
    fn series(&self) -> &AsymptoticSeries<Float> {
        &self.scenario.series
    }

    fn order_check(&self, k: usize, min: usize) -> Option<RowStatus> {
        if k < min {
            Some(RowStatus::Unavailable(format!("needs order >= {min}")))
        } else if k > self.series().order() {
            Some(RowStatus::Unavailable(format!("series known only to order {}", self.series().order())))
        } else {
            None
        }
    }

    fn push(&mut self, order: usize, method: Method, value: Option<f64>, exponent: Option<f64>, target: Option<Target>, status: RowStatus) {
        let reference = target.and_then(|t| self.scenario.reference(t));
        let error_percent = match (value, reference) {
            (Some(v), Some(r)) => percentage_error(v, r.value).ok(),
            _ => None,
        };
        self.report.rows.push(ReportRow {
            order,
            method,
            value,
            exponent,
            error_percent,
            reference: reference.filter(|_| error_percent.is_some()).map(|r| r.label.clone()),
            status,
        });
    }

    fn unavailable(&mut self, order: usize, method: Method, why: impl Into<String>) {
        self.push(order, method, None, None, None, RowStatus::Unavailable(why.into()));
    }

    fn inapplicable(&mut self, method: Method, why: impl Into<String>) {
        let why = why.into();
        self.report.notes.push(format!("{}: {why}", method.name()));
        self.unavailable(0, method, format!("inapplicable: {why}"));
    }

    fn factor(&mut self, orders: &[usize]) {
        for &k in orders {
            if let Some(status) = self.order_check(k, 1) {
                self.push(k, Method::Factor, None, None, None, status);
                continue;
            }
            let mut conventions = vec![(Method::Factor, OddConvention::UnitNode, "")];
            if k % 2 == 1 {
                conventions.push((Method::FactorFirstCoefficient, OddConvention::FirstCoefficient, " (a1/a0)"));
            }
            for (method, convention, suffix) in conventions {
                let built = build_factor(&self.series().truncated(k), convention);
                match built.and_then(|f| f.asymptote().map(|a| (f, a))) {
                    Ok((approx, (amplitude, exponent))) => {
                        self.report.parameters.push(factor_parameters(format!("f{k}*{suffix}"), &approx));
                        self.push(k, method, Some(amplitude.to_f64()), Some(exponent.to_f64()), None, RowStatus::Ok);
                    }
                    Err(e) => self.unavailable(k, method, e.to_string()),
                }
            }
        }
    }

    fn anchor(&mut self, method: Method) -> Option<StrongCouplingExpansion> {
        let anchor = self.scenario.asymptote.clone();
        if anchor.is_none() {
            self.inapplicable(method, "the scenario has no strong-coupling asymptote");
        }
        anchor
    }

    /// The unnormalized series coefficient of normalized order `k`.
    fn unnormalized(&self, normalized: &Float) -> f64 {
        Float::with_val(normalized.prec(), normalized * &self.series().prefactor().amplitude).to_f64()
    }

    fn factor_interpolant(&mut self, orders: &[usize]) {
        let Some(anchor) = self.anchor(Method::FactorInterpolant) else { return };
        for &k in orders {
            if let Some(status) = self.order_check(k, 1) {
                self.push(k + 1, Method::FactorInterpolant, None, None, None, status);
                continue;
            }
            let truncated = self.series().truncated(k);
            match build_factor_interpolating(&truncated, &anchor) {
                Ok(approx) => {
                    let next = approx.expand(k + 1).coefficients()[k + 1].clone();
                    self.report.parameters.push(factor_parameters(format!("f{k}+1*"), &approx));
                    let value = self.unnormalized(&next);
                    self.push(k + 1, Method::FactorInterpolant, Some(value), None, Some(Target::Coefficient(k + 1)), RowStatus::Ok);
                }
                Err(e) => self.unavailable(k + 1, Method::FactorInterpolant, e.to_string()),
            }
        }
    }

    fn bootstrap(&mut self, orders: &[usize]) {
        let Some(full) = self.anchor(Method::Bootstrap) else { return };
        let leading = full.leading();
        let anchor = StrongCouplingExpansion::new(vec![(leading.0.clone(), leading.1.clone())]).expect("valid leading term");
        let base = self.series().order();
        let Some(&top) = orders.iter().max() else { return };
        let stages = if top > base { bootstrap_sequence(self.series(), &anchor, top) } else { Ok(Vec::new()) };
        let stages = match stages {
            Ok(s) => s,
            Err(e) => {
                for &k in orders {
                    self.unavailable(k, Method::Bootstrap, e.to_string());
                }
                return;
            }
        };
        for &k in orders {
            // The stage of depth d matches orders 0..d-1 and predicts order d.
            match stages.iter().find(|s| s.root.depth() == k) {
                Some(stage) => {
                    let value = self.unnormalized(&stage.predicted);
                    self.report.parameters.push(root_parameters(format!("R{k}* (bootstrap)"), &stage.root));
                    self.push(k, Method::Bootstrap, Some(value), None, Some(Target::Coefficient(k)), RowStatus::Ok);
                }
                None => self.unavailable(k, Method::Bootstrap, format!("order {k} is not predicted from order {base}")),
            }
        }
        // Ladders built on the published predictions, order by order.
        let mut extended = self.series().clone();
        while let Some(r) = self.scenario.reference(Target::Coefficient(extended.order() + 1)) {
            let label = r.label.clone();
            let normalized = real_q(&Rational::from_f64(r.value).expect("finite")) / &self.series().prefactor().amplitude;
            extended = extended.extended(normalized);
            let depth = extended.order() + 1;
            match build_root_interpolant(&extended, &anchor, depth) {
                Ok(root) => self.report.parameters.push(root_parameters(format!("R{depth}* (with {label})"), &root)),
                Err(e) => self.report.notes.push(format!("R{depth}* with {label}: {e}")),
            }
        }
    }

    fn root_interpolant(&mut self, orders: &[usize]) {
        let Some(anchor) = self.anchor(Method::RootInterpolant) else { return };
        let extra = anchor.terms().len() - 1;
        for &k in orders {
            if let Some(status) = self.order_check(k, 0) {
                self.push(k + 1, Method::RootInterpolant, None, None, None, status);
                continue;
            }
            let truncated = self.series().truncated(k);
            let depth = 1 + k + extra;
            let built = build_root_interpolant(&truncated, &anchor, depth)
                .and_then(|root| predict_next_coefficient(&root, &truncated).map(|p| (root, p)));
            match built {
                Ok((root, next)) => {
                    self.report.parameters.push(root_parameters(format!("R{depth}* (order {k}, {} anchor terms)", extra + 1), &root));
                    let value = self.unnormalized(&next);
                    self.push(k + 1, Method::RootInterpolant, Some(value), None, Some(Target::Coefficient(k + 1)), RowStatus::Ok);
                }
                Err(e) => self.unavailable(k + 1, Method::RootInterpolant, e.to_string()),
            }
        }
    }

    fn iterated_roots(&mut self, orders: &[usize]) {
        let Some(&top) = orders.iter().max() else { return };
        let top = top.min(self.series().order());
        let stages = match &self.scenario.exact {
            Some(exact) => build_root_iterated(&exact.truncated(top)),
            None => build_root_iterated(&self.series().truncated(top)),
        };
        let stages = match stages {
            Ok(s) => s,
            Err(e) => {
                self.inapplicable(Method::IteratedRoots, e.to_string());
                return;
            }
        };
        // Stage j uses orders up to 2j; odd orders add nothing.
        for &k in orders.iter().filter(|k| *k % 2 == 0) {
            let stage = (k >= 2).then(|| stages.get(k / 2 - 1)).flatten();
            let Some(root) = stage else {
                self.unavailable(k, Method::IteratedRoots, "no stage reaches this order");
                continue;
            };
            self.report.parameters.push(root_parameters(format!("R{k}* (iterated)"), root));
            match root.asymptote() {
                Ok((amplitude, exponent)) => {
                    self.push(k, Method::IteratedRoots, Some(amplitude.to_f64()), Some(exponent.to_f64()), None, RowStatus::Ok)
                }
                Err(e) => self.unavailable(k, Method::IteratedRoots, e.to_string()),
            }
        }
    }

    fn limit_rows(&mut self, method: Method, estimate: &LimitEstimate) {
        for (&k, raw) in &estimate.per_order {
            match raw {
                OrderValue::Value(v) => self.push(k, method, Some(*v), None, Some(Target::Limit), RowStatus::Ok),
                OrderValue::Unavailable(why) => match estimate.filled.get(&k) {
                    Some(v) => self.push(k, method, Some(*v), None, Some(Target::Limit), RowStatus::Filled(why.clone())),
                    None => self.unavailable(k, method, why.clone()),
                },
            }
        }
        match estimate.final_value {
            Some(value) => {
                let reference = self.scenario.reference(Target::Limit);
                self.report.finals.push(FinalEstimate {
                    method,
                    value,
                    error_percent: reference.and_then(|r| percentage_error(value, r.value).ok()),
                    reference: reference.map(|r| r.label.clone()),
                });
            }
            None => self.report.notes.push(format!("{}: fewer than two usable orders, no final estimate", method.name())),
        }
    }

    fn power_restriction(&mut self, orders: &[usize]) {
        match limit_power_restriction(self.series(), orders) {
            Ok(estimate) => self.limit_rows(Method::PowerRestriction, &estimate),
            Err(e) => self.inapplicable(Method::PowerRestriction, e.to_string()),
        }
    }

    fn omega(&mut self, orders: &[usize]) {
        let top = orders.iter().copied().filter(|k| k % 2 == 0).max().unwrap_or(0);
        match estimate_omega(self.series(), top) {
            Ok(est) => {
                for (&k, candidate) in est.per_order.range(orders.first().copied().unwrap_or(0)..) {
                    match (&candidate.omega, &candidate.raw) {
                        (Some(w), _) => self.push(k, Method::Omega, Some(w.to_f64()), None, None, RowStatus::Ok),
                        (None, Some(raw)) => {
                            let why = format!("ω = {:.6} is not real positive", raw.to_f64());
                            self.unavailable(k, Method::Omega, why)
                        }
                        (None, None) => {
                            let why = candidate.note.clone().unwrap_or_default();
                            self.unavailable(k, Method::Omega, why)
                        }
                    }
                }
                self.report.notes.push(format!(
                    "omega: selected ω = {:.6} from order {}",
                    est.selected.to_f64(),
                    est.selected_order
                ));
            }
            Err(e) => self.inapplicable(Method::Omega, e.to_string()),
        }
    }

    fn transformation(&mut self, orders: &[usize]) {
        let estimate = match (&self.scenario.omega, &self.scenario.exact) {
            (Some(omega), Some(exact)) => {
                self.report.notes.push(format!("transformation: known ω = {omega}"));
                limit_via_transformation(exact, omega, orders)
            }
            (Some(omega), None) => {
                self.report.notes.push(format!("transformation: known ω = {omega}"));
                limit_via_transformation(self.series(), &real_q(omega), orders)
            }
            (None, _) => match estimate_omega(self.series(), self.series().order()) {
                Ok(est) => {
                    self.report.notes.push(format!(
                        "transformation: estimated ω = {:.6} (order {})",
                        est.selected.to_f64(),
                        est.selected_order
                    ));
                    limit_via_transformation(self.series(), &est.selected, orders)
                }
                Err(e) => Err(e),
            },
        };
        match estimate {
            Ok(estimate) => self.limit_rows(Method::Transformation, &estimate),
            Err(e) => self.inapplicable(Method::Transformation, e.to_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    TableText,
    Csv,
    JsonDoc,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "table-text" | "table" | "text" => Ok(Format::TableText),
            "csv" => Ok(Format::Csv),
            "json-doc" | "json" => Ok(Format::JsonDoc),
            other => Err(Error::invalid(format!("unknown format {other:?}"))),
        }
    }
}

/// Four decimals for mid-range values, scientific outside it.
pub fn format_value(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-3..1e5).contains(&a) {
        format!("{v:.4}")
    } else {
        format!("{v:.4e}")
    }
}

/// Three significant figures, in plain decimal notation.
pub fn format_percent(p: f64) -> String {
    if p == 0.0 || !p.is_finite() {
        return format!("{p:.2}");
    }
    let magnitude = p.abs().log10().floor() as i32;
    let decimals = (2 - magnitude).max(0) as usize;
    format!("{p:.decimals$}")
}

pub fn emit_report(report: &ScenarioReport, format: Format) -> Result<String> {
    if report.rows.is_empty() {
        return Err(Error::invalid("the report has no rows"));
    }
    match format {
        Format::JsonDoc => serde_json::to_string_pretty(report).map_err(|e| Error::invalid(e.to_string())),
        Format::Csv => emit_csv(report),
        Format::TableText => Ok(emit_table(report)),
    }
}

fn emit_csv(report: &ScenarioReport) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| Error::invalid(e.to_string());
    writer.write_record(["k", "method", "value", "error_percent", "status"]).map_err(fail)?;
    for row in &report.rows {
        writer
            .write_record([
                row.order.to_string(),
                row.method.name().to_string(),
                row.value.map(format_value).unwrap_or_default(),
                row.error_percent.map(|p| format!("{p:.4}")).unwrap_or_default(),
                row.status.label(),
            ])
            .map_err(fail)?;
    }
    for f in &report.finals {
        writer
            .write_record([
                "final".to_string(),
                f.method.name().to_string(),
                format_value(f.value),
                f.error_percent.map(|p| format!("{p:.4}")).unwrap_or_default(),
                "ok".to_string(),
            ])
            .map_err(fail)?;
    }
    let bytes = writer.into_inner().map_err(|e| Error::invalid(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::invalid(e.to_string()))
}

/// One column pair per method: the value, then the percentage error, the
/// exponent, or nothing, whichever the method's rows carry.
fn emit_table(report: &ScenarioReport) -> String {
    let mut methods: Vec<Method> = Vec::new();
    for row in &report.rows {
        if !methods.contains(&row.method) {
            methods.push(row.method);
        }
    }
    enum Second {
        Error,
        Exponent,
        None,
    }
    let second: Vec<Second> = methods
        .iter()
        .map(|&m| {
            if report.rows_for(m).any(|r| r.error_percent.is_some()) {
                Second::Error
            } else if report.rows_for(m).any(|r| r.exponent.is_some()) {
                Second::Exponent
            } else {
                Second::None
            }
        })
        .collect();

    let mut header = vec!["k".to_string()];
    for (m, s) in methods.iter().zip(&second) {
        header.push(m.name().to_string());
        match s {
            Second::Error => header.push("%".to_string()),
            Second::Exponent => header.push("exponent".to_string()),
            Second::None => {}
        }
    }
    let mut by_order: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let orders: Vec<usize> = {
        let mut o: Vec<usize> = report.rows.iter().map(|r| r.order).collect();
        o.sort_unstable();
        o.dedup();
        o
    };
    let mut filled_any = false;
    for &k in &orders {
        let mut cells = vec![k.to_string()];
        for (m, s) in methods.iter().zip(&second) {
            let row = report.row(*m, k);
            let value = match row {
                Some(r) => match (r.value, &r.status) {
                    (Some(v), RowStatus::Filled(_)) => {
                        filled_any = true;
                        format!("{}f", format_value(v))
                    }
                    (Some(v), _) => format_value(v),
                    (None, _) => "n/a".to_string(),
                },
                None => String::new(),
            };
            cells.push(value);
            match s {
                Second::Error => cells.push(row.and_then(|r| r.error_percent).map(format_percent).unwrap_or_default()),
                Second::Exponent => cells.push(row.and_then(|r| r.exponent).map(|e| format!("{e:.4}")).unwrap_or_default()),
                Second::None => {}
            }
        }
        by_order.insert(k, cells);
    }
    let mut lines: Vec<Vec<String>> = vec![header];
    lines.extend(by_order.into_values());
    if !report.finals.is_empty() {
        let mut cells = vec!["final".to_string()];
        for (m, s) in methods.iter().zip(&second) {
            let f = report.final_for(*m);
            cells.push(f.map(|f| format_value(f.value)).unwrap_or_default());
            match s {
                Second::Error => cells.push(f.and_then(|f| f.error_percent).map(format_percent).unwrap_or_default()),
                Second::Exponent => cells.push(String::new()),
                Second::None => {}
            }
        }
        lines.push(cells);
    }

    let columns = lines.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns)
        .map(|c| lines.iter().filter_map(|l| l.get(c)).map(|s| s.chars().count()).max().unwrap_or(0))
        .collect();
    let name = report.scenario.name.as_deref().unwrap_or("input");
    let mut out = format!("scenario: {name}\n\n");
    for line in &lines {
        let cells: Vec<String> = line
            .iter()
            .enumerate()
            .map(|(c, s)| format!("{s:>width$}", width = widths[c]))
            .collect();
        let _ = writeln!(out, "{}", cells.join("  ").trim_end());
    }
    if filled_any {
        out.push_str("\nf: order unavailable, value is the mean of its neighbours\n");
    }
    let references: Vec<String> = report
        .rows
        .iter()
        .filter_map(|r| r.reference.clone())
        .chain(report.finals.iter().filter_map(|f| f.reference.clone()))
        .collect();
    if let Some(refs) = &report.scenario.references {
        let used: Vec<_> = refs.iter().filter(|r| references.contains(&r.label)).collect();
        if !used.is_empty() {
            out.push_str("\nreferences:\n");
            for r in used {
                let _ = writeln!(out, "  {} = {} ({})", r.label, r.value, r.source);
            }
        }
    }
    if !report.parameters.is_empty() {
        out.push_str("\nparameters:\n");
        for set in &report.parameters {
            let values: Vec<String> = set.values.iter().map(|p| format!("{}={:.7e}", p.name, p.value)).collect();
            let _ = writeln!(out, "  {}: {}", set.label, values.join(" "));
        }
    }
    let unavailable: Vec<&ReportRow> = report
        .rows
        .iter()
        .filter(|r| !matches!(r.status, RowStatus::Ok))
        .collect();
    if !unavailable.is_empty() || !report.notes.is_empty() {
        out.push_str("\nnotes:\n");
        for note in &report.notes {
            let _ = writeln!(out, "  {note}");
        }
        for r in unavailable {
            let _ = writeln!(out, "  {} k={}: {}", r.method.name(), r.order, r.status.label());
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{builtin, parse_document};

    #[test]
    fn percentage_error_examples() {
        assert!((percentage_error(0.0593, 0.077106).unwrap() + 23.09).abs() < 0.01);
        assert_eq!(percentage_error(0.3, 0.3).unwrap(), 0.0);
        assert!((percentage_error(0.0823, 0.0798).unwrap() - 3.13).abs() < 0.01);
        assert!(percentage_error(1.0, 0.0).is_err());
    }

    #[test]
    fn percent_formatting() {
        assert_eq!(format_percent(94.1234), "94.1");
        assert_eq!(format_percent(7.5213), "7.52");
        assert_eq!(format_percent(-0.00812), "-0.00812");
        assert_eq!(format_value(0.059312), "0.0593");
        assert_eq!(format_value(-5.014168e-5), "-5.0142e-5");
    }

    #[test]
    fn constant_scenario_is_constant_everywhere() {
        let s = parse_document(
            r#"{"prefactor": {"amplitude": "0.25", "exponent": "0"}, "power_step": "1",
                "coefficients": ["1", "0", "0", "0"], "omega": "1",
                "references": [{"label": "exact", "value": 0.25, "source": "constant function"}],
                "pipelines": [{"pipeline": "transformation", "from": 1, "to": 3},
                              {"pipeline": "factor", "from": 1, "to": 3}]}"#,
        )
        .unwrap();
        let report = run_scenario(&s, &RunOptions::default());
        for row in &report.rows {
            assert_eq!(row.value, Some(0.25), "{row:?}");
        }
        for row in report.rows_for(Method::Transformation) {
            assert_eq!(row.error_percent, Some(0.0));
        }
        assert_eq!(report.final_for(Method::Transformation).unwrap().error_percent, Some(0.0));
    }

    #[test]
    fn empty_report_is_rejected() {
        let s = builtin("oscillator").unwrap();
        let mut report = run_scenario(&s, &RunOptions::default());
        report.rows.clear();
        assert!(emit_report(&report, Format::Csv).is_err());
    }

    #[test]
    fn inapplicable_pipeline_is_a_row_annotation() {
        let s = builtin("oscillator").unwrap();
        let options = RunOptions {
            pipelines: Some(vec![Pipeline::PowerRestriction, Pipeline::Factor]),
            orders: Some(2..=2),
        };
        let report = run_scenario(&s, &options);
        assert!(report.rows_for(Method::PowerRestriction).all(|r| r.value.is_none()));
        assert!(report.row(Method::Factor, 2).unwrap().value.is_some());
    }

    #[test]
    fn json_doc_round_trips() {
        let s = builtin("membrane").unwrap();
        let report = run_scenario(&s, &RunOptions::default());
        let text = emit_report(&report, Format::JsonDoc).unwrap();
        let back: ScenarioReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back, report);
        let reloaded = parse_document(&text).unwrap();
        assert_eq!(reloaded.series, s.series);
        assert_eq!(run_scenario(&reloaded, &RunOptions::default()).rows, report.rows);
    }
}
