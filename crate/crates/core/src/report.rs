//! Input documents, reports, and the three commands behind the CLI.
//!
//! Everything that crosses the JSON boundary keeps rationals as exact
//! `"num/den"` strings; reports round-trip losslessly.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::engine::{self, CharSequence, EngineError, Parametrization, StepTrace};
use crate::parse::parse_series;
use crate::puiseux::{puiseux_expand, PuiseuxData};
use crate::rational::Rational;
use crate::series::TruncSeries;

/// A series in an input document: either expression text or an explicit
/// term list `[[exponent, "coefficient"], ...]`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(untagged)]
pub enum SeriesInput {
    Expr(String),
    Terms(Vec<(u64, Rational)>),
}

/// Declared precision of the input data: `"exact"` for polynomials, a
/// number `N` for series known through `t^N`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(untagged)]
pub enum TruncationSpec {
    Bound(u64),
    Exact(ExactWord),
}

/// The literal string `"exact"`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum ExactWord {
    #[serde(rename = "exact")]
    Exact,
}

/// The JSON input document accepted by every subcommand.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct InputDocument {
    pub x: SeriesInput,
    pub y: SeriesInput,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub truncation: Option<TruncationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_steps: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub report_coefficients: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_format: Option<OutputFormat>,
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Human,
    Json,
}

/// A fully resolved request: parsed series with their declared precision
/// applied, plus the report options.
#[derive(Clone, Debug)]
pub struct Request {
    pub x: TruncSeries,
    pub y: TruncSeries,
    pub max_steps: Option<usize>,
    pub coefficients: bool,
    pub time: bool,
}

/// Exponents above this are rejected at the boundary; the arithmetic
/// inside assumes orders comfortably inside `u64`.
const MAX_EXPONENT: u64 = u32::MAX as u64;
/// Largest accepted truncation bound; the oracle allocates dense scratch
/// vectors of this length.
const MAX_TRUNCATION: u64 = 1_000_000;

fn series_from_input(name: &str, input: &SeriesInput) -> Result<TruncSeries, String> {
    let series = match input {
        SeriesInput::Expr(src) => parse_series(src).map_err(|e| format!("in {name}: {e}"))?,
        SeriesInput::Terms(pairs) => {
            if pairs.windows(2).any(|w| w[0].0 >= w[1].0) {
                return Err(format!(
                    "in {name}: term-list exponents must be strictly increasing"
                ));
            }
            TruncSeries::from_terms(crate::series::Precision::Exact, pairs.iter().cloned())
        }
    };
    if let Some((e, _)) = series.iter().next_back() {
        if e > MAX_EXPONENT {
            return Err(format!("in {name}: exponent {e} is too large"));
        }
    }
    Ok(series)
}

impl InputDocument {
    /// Parses the series and applies the declared truncation. The optional
    /// arguments override the document's own options.
    pub fn resolve(
        &self,
        truncation_override: Option<TruncationSpec>,
        max_steps_override: Option<usize>,
        coefficients: bool,
        time: bool,
    ) -> Result<Request, String> {
        let mut x = series_from_input("x", &self.x)?;
        let mut y = series_from_input("y", &self.y)?;
        let truncation = truncation_override.or(self.truncation);
        if let Some(TruncationSpec::Bound(k)) = truncation {
            if k > MAX_TRUNCATION {
                return Err(format!("truncation {k} exceeds the supported {MAX_TRUNCATION}"));
            }
            x = x.truncate(k);
            y = y.truncate(k);
        }
        let max_steps = max_steps_override.or(self.max_steps);
        if max_steps == Some(0) {
            return Err("max_steps must be at least 1".into());
        }
        Ok(Request {
            x,
            y,
            max_steps,
            coefficients: coefficients || self.report_coefficients.unwrap_or(false),
            time,
        })
    }
}

/// Machine-readable outcome of a command.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Status {
    #[default]
    Ok,
    /// The input could not be parsed or validated.
    InputError { message: String },
    /// The branch is smooth or the input degenerate (`ord <= 1`).
    SmoothOrInvalid,
    /// An input series has no certified vanishing order.
    UnknownOrder,
    /// The parametrization covers its image `covering_degree` times.
    NonInjective { covering_degree: u64 },
    /// More input precision is needed; retry with at least this truncation.
    InsufficientPrecision { needed_bound: u64 },
    MaxStepsExceeded { max_steps: usize },
    /// The exponent gcd never reached 1 within the examined range.
    IncompleteSequence { stuck_gcd: u64 },
    /// `check` only: the engines disagree on the named quantity.
    Mismatch { field: String },
}

impl Status {
    /// Process exit code: 0 ok, 2 non-injective, 3 insufficient precision,
    /// 1 anything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Status::Ok => 0,
            Status::NonInjective { .. } | Status::IncompleteSequence { .. } => 2,
            Status::InsufficientPrecision { .. } => 3,
            _ => 1,
        }
    }

    fn from_engine_error(e: &EngineError) -> Status {
        match e {
            EngineError::SmoothOrInvalid { .. } => Status::SmoothOrInvalid,
            EngineError::UnknownOrder => Status::UnknownOrder,
            EngineError::NonInjective { covering_degree } => Status::NonInjective {
                covering_degree: *covering_degree,
            },
            EngineError::InsufficientPrecision { needed_bound } => Status::InsufficientPrecision {
                needed_bound: *needed_bound,
            },
            EngineError::MaxStepsExceeded { max_steps } => Status::MaxStepsExceeded {
                max_steps: *max_steps,
            },
            EngineError::IncompleteSequence { stuck_gcd } => Status::IncompleteSequence {
                stuck_gcd: *stuck_gcd,
            },
            EngineError::Series(e) => Status::InputError {
                message: e.to_string(),
            },
        }
    }
}

/// Per-step diagnostics: the certified order of `P_k`, the exponent it
/// yields, and its leading coefficient.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct StepDiag {
    pub k: usize,
    pub ord: u64,
    pub r: u64,
    pub leading: Rational,
}

/// The report produced by `analyze` and `oracle`.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq, Default)]
pub struct Report {
    pub status: Status,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub swapped: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r_sequence: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub char_seq: Option<CharSequence>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gcd_chain: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inessential: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<StepDiag>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<(u64, Rational)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub timing_micros: Option<u64>,
}

impl Report {
    fn failure(status: Status) -> Report {
        Report {
            status,
            ..Report::default()
        }
    }

    pub fn input_error(message: impl Into<String>) -> Report {
        Report::failure(Status::InputError {
            message: message.into(),
        })
    }

    /// Multi-line human rendering; rationals stay exact.
    pub fn render_human(&self) -> String {
        let mut out = String::new();
        let mut line = |s: String| {
            out.push_str(&s);
            out.push('\n');
        };
        line(format!("status: {}", status_human(&self.status)));
        if let Some(c) = &self.char_seq {
            line(format!("characteristic sequence: {c}"));
        }
        if let Some(p) = self.p {
            line(format!("multiplicity: {p}"));
        }
        if let Some(rs) = &self.r_sequence {
            line(format!("r-sequence: {}", join(rs, ", ")));
        }
        if let Some(chain) = &self.gcd_chain {
            line(format!("gcd chain: {}", join(chain, " > ")));
        }
        if let Some(inessential) = &self.inessential {
            if !inessential.is_empty() {
                line(format!("inessential exponents: {}", join(inessential, ", ")));
            }
        }
        if self.swapped == Some(true) {
            line("note: x and y were exchanged so that ord x <= ord y".into());
        }
        if let Some(steps) = &self.steps {
            for s in steps.iter().filter(|s| s.k > 0) {
                line(format!(
                    "  step k={}: ord P_k = {}, r_k = {}, leading = {}",
                    s.k, s.ord, s.r, s.leading
                ));
            }
        }
        if let Some(coeffs) = &self.coefficients {
            line("normalized Puiseux coefficients:".into());
            for (s, c) in coeffs {
                line(format!("  c~_{s} = {c}"));
            }
        }
        if let Some(us) = self.timing_micros {
            line(format!("time: {us} us"));
        }
        out
    }
}

fn status_human(status: &Status) -> String {
    match status {
        Status::Ok => "ok".into(),
        Status::InputError { message } => format!("input error: {message}"),
        Status::SmoothOrInvalid => {
            "smooth or invalid: the multiplicity must be at least 2".into()
        }
        Status::UnknownOrder => "unknown order: input precision certifies no vanishing order".into(),
        Status::NonInjective { covering_degree } => format!(
            "non-injective: the parametrization covers its image {covering_degree} times"
        ),
        Status::InsufficientPrecision { needed_bound } => format!(
            "insufficient precision: retry with inputs certified to at least t^{needed_bound}"
        ),
        Status::MaxStepsExceeded { max_steps } => {
            format!("no conclusion within {max_steps} steps")
        }
        Status::IncompleteSequence { stuck_gcd } => format!(
            "incomplete: the exponent gcd is stuck at {stuck_gcd} over the examined range"
        ),
        Status::Mismatch { field } => format!("mismatch on {field}"),
    }
}

fn join<T: std::fmt::Display>(items: &[T], sep: &str) -> String {
    items
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(sep)
}

fn trace_diag(t: &StepTrace) -> StepDiag {
    let ord = match t.poly.order() {
        crate::series::OrderResult::Order(v) => v,
        _ => unreachable!("a recorded trace always has a certified order"),
    };
    StepDiag {
        k: t.k,
        ord,
        r: t.r,
        leading: t.leading.clone(),
    }
}

/// Runs the derived-polynomial engine and reports.
pub fn run_analyze(req: &Request) -> Report {
    let par = match Parametrization::new(req.x.clone(), req.y.clone()) {
        Ok(par) => par,
        Err(e) => return Report::failure(Status::from_engine_error(&e)),
    };
    let started = Instant::now();
    let outcome = engine::run(&par, req.max_steps);
    let elapsed = started.elapsed();
    let mut report = match &outcome {
        Ok(run) => Report {
            status: Status::Ok,
            r_sequence: Some(run.r_sequence.clone()),
            char_seq: Some(run.char_seq.clone()),
            gcd_chain: Some(run.char_seq.gcd_chain.clone()),
            inessential: Some(run.inessential.clone()),
            steps: Some(run.traces.iter().map(trace_diag).collect()),
            coefficients: req.coefficients.then(|| {
                run.traces.iter().map(|t| (t.r, t.coeff.clone())).collect()
            }),
            ..Report::default()
        },
        Err(e) => Report::failure(Status::from_engine_error(e)),
    };
    report.swapped = Some(par.swapped());
    report.p = Some(par.p());
    if req.time {
        report.timing_micros = Some(elapsed.as_micros() as u64);
    }
    report
}

/// Expansion bound policy for the oracle: the certified input bound when
/// the inputs are truncated; otherwise grow adaptively until the gcd chain
/// completes or the cap is hit.
fn oracle_expand(par: &Parametrization) -> Result<PuiseuxData, EngineError> {
    const CAP: u64 = 256;
    if let Some(k) = par.input_bound() {
        return match puiseux_expand(par, k) {
            // The chain cannot complete within what the inputs certify;
            // report the same minimal suggestion the engine would.
            Err(EngineError::IncompleteSequence { .. }) => {
                Err(EngineError::InsufficientPrecision { needed_bound: k + 1 })
            }
            other => other,
        };
    }
    let mut bound = (par.q() + par.p() + 8).min(CAP).max(par.q());
    loop {
        match puiseux_expand(par, bound) {
            Err(EngineError::IncompleteSequence { .. }) if bound < CAP => {
                bound = (bound * 2).min(CAP);
            }
            other => return other,
        }
    }
}

fn oracle_report_body(data: &PuiseuxData, want_coeffs: bool) -> Report {
    let last_q = *data
        .char_seq
        .q_list
        .last()
        .expect("a complete chain has at least one characteristic exponent");
    let r_sequence: Vec<u64> = data.positions().into_iter().filter(|&s| s <= last_q).collect();
    let inessential = r_sequence
        .iter()
        .copied()
        .filter(|s| !data.char_seq.q_list.contains(s))
        .collect();
    Report {
        status: Status::Ok,
        r_sequence: Some(r_sequence.clone()),
        char_seq: Some(data.char_seq.clone()),
        gcd_chain: Some(data.char_seq.gcd_chain.clone()),
        inessential: Some(inessential),
        coefficients: want_coeffs.then(|| {
            r_sequence
                .iter()
                .map(|s| (*s, data.coefficients[s].clone()))
                .collect()
        }),
        ..Report::default()
    }
}

/// Runs the classical expansion route and reports.
pub fn run_oracle(req: &Request) -> Report {
    let par = match Parametrization::new(req.x.clone(), req.y.clone()) {
        Ok(par) => par,
        Err(e) => return Report::failure(Status::from_engine_error(&e)),
    };
    let started = Instant::now();
    let outcome = oracle_expand(&par);
    let elapsed = started.elapsed();
    let mut report = match &outcome {
        Ok(data) => oracle_report_body(data, req.coefficients),
        Err(e) => Report::failure(Status::from_engine_error(e)),
    };
    report.swapped = Some(par.swapped());
    report.p = Some(par.p());
    if req.time {
        report.timing_micros = Some(elapsed.as_micros() as u64);
    }
    report
}

/// First disagreeing quantity between the two routes.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct Mismatch {
    pub field: String,
    pub engine_value: String,
    pub oracle_value: String,
}

/// Output of `check`: both reports plus the comparison verdict.
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct CheckReport {
    pub status: Status,
    pub matched: bool,
    pub engine: Report,
    pub oracle: Report,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mismatch: Option<Mismatch>,
}

impl CheckReport {
    fn mismatch(engine: Report, oracle: Report, m: Mismatch) -> CheckReport {
        CheckReport {
            status: Status::Mismatch {
                field: m.field.clone(),
            },
            matched: false,
            engine,
            oracle,
            mismatch: Some(m),
        }
    }

    pub fn render_human(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "check: {}\n",
            if self.matched { "match" } else { "MISMATCH" }
        ));
        if let Some(m) = &self.mismatch {
            out.push_str(&format!(
                "first disagreement: {} (engine: {}, oracle: {})\n",
                m.field, m.engine_value, m.oracle_value
            ));
        }
        out.push_str("--- engine ---\n");
        out.push_str(&self.engine.render_human());
        out.push_str("--- oracle ---\n");
        out.push_str(&self.oracle.render_human());
        out
    }
}

/// Runs both routes (concurrently; both are pure) and diffs the r-sequence,
/// the characteristic sequence, and the leading-coefficient identity
/// `leading(P_k) = prod_{j<k} (r_k - r_j) * p^{k-1} * c~_{r_k} * a0^{2k-1}`
/// with the oracle's coefficients.
pub fn run_check(req: &Request) -> CheckReport {
    let par = match Parametrization::new(req.x.clone(), req.y.clone()) {
        Ok(par) => par,
        Err(e) => {
            let r = Report::failure(Status::from_engine_error(&e));
            return CheckReport {
                status: r.status.clone(),
                matched: false,
                engine: r.clone(),
                oracle: r,
                mismatch: None,
            };
        }
    };

    let (engine_outcome, engine_us, oracle_outcome, oracle_us) = std::thread::scope(|scope| {
        let par_ref = &par;
        let max_steps = req.max_steps;
        let engine_handle = scope.spawn(move || {
            let started = Instant::now();
            let out = engine::run(par_ref, max_steps);
            (out, started.elapsed().as_micros() as u64)
        });
        let oracle_handle = scope.spawn(move || {
            let started = Instant::now();
            let out = oracle_expand(par_ref);
            (out, started.elapsed().as_micros() as u64)
        });
        let (e, eus) = engine_handle.join().expect("engine thread");
        let (o, ous) = oracle_handle.join().expect("oracle thread");
        (e, eus, o, ous)
    });

    let mut engine_report = match &engine_outcome {
        Ok(run) => Report {
            status: Status::Ok,
            r_sequence: Some(run.r_sequence.clone()),
            char_seq: Some(run.char_seq.clone()),
            gcd_chain: Some(run.char_seq.gcd_chain.clone()),
            inessential: Some(run.inessential.clone()),
            steps: Some(run.traces.iter().map(trace_diag).collect()),
            coefficients: req.coefficients.then(|| {
                run.traces.iter().map(|t| (t.r, t.coeff.clone())).collect()
            }),
            ..Report::default()
        },
        Err(e) => Report::failure(Status::from_engine_error(e)),
    };
    engine_report.swapped = Some(par.swapped());
    engine_report.p = Some(par.p());

    let mut oracle_report = match &oracle_outcome {
        Ok(data) => oracle_report_body(data, req.coefficients),
        Err(e) => Report::failure(Status::from_engine_error(e)),
    };
    oracle_report.swapped = Some(par.swapped());
    oracle_report.p = Some(par.p());

    if req.time {
        engine_report.timing_micros = Some(engine_us);
        oracle_report.timing_micros = Some(oracle_us);
    }

    match (&engine_outcome, &oracle_outcome) {
        (Ok(erun), Ok(odata)) => {
            if engine_report.r_sequence != oracle_report.r_sequence {
                let m = Mismatch {
                    field: "r_sequence".into(),
                    engine_value: format!("{:?}", engine_report.r_sequence),
                    oracle_value: format!("{:?}", oracle_report.r_sequence),
                };
                return CheckReport::mismatch(engine_report, oracle_report, m);
            }
            if engine_report.char_seq != oracle_report.char_seq {
                let m = Mismatch {
                    field: "char_seq".into(),
                    engine_value: format!("{:?}", engine_report.char_seq),
                    oracle_value: format!("{:?}", oracle_report.char_seq),
                };
                return CheckReport::mismatch(engine_report, oracle_report, m);
            }
            // Leading-coefficient identity, exact, at every step k >= 1.
            for trace in erun.traces.iter().filter(|t| t.k >= 1) {
                let c_oracle = &odata.coefficients[&trace.r];
                let mut expected = c_oracle
                    * &Rational::from_int(par.p()).pow(trace.k as i64 - 1);
                expected = expected * par.a0().pow(2 * trace.k as i64 - 1);
                for prev in erun.traces.iter().filter(|t| t.k < trace.k) {
                    expected = expected * Rational::from(trace.r - prev.r);
                }
                if expected != trace.leading {
                    let m = Mismatch {
                        field: format!("leading_identity_k{}", trace.k),
                        engine_value: trace.leading.to_string(),
                        oracle_value: expected.to_string(),
                    };
                    return CheckReport::mismatch(engine_report, oracle_report, m);
                }
            }
            CheckReport {
                status: Status::Ok,
                matched: true,
                engine: engine_report,
                oracle: oracle_report,
                mismatch: None,
            }
        }
        (Err(EngineError::NonInjective { covering_degree }), Err(EngineError::IncompleteSequence { stuck_gcd }))
            if covering_degree == stuck_gcd =>
        {
            // The oracle cannot prove non-injectivity, only observe the gcd
            // stuck at the covering degree; that is agreement.
            CheckReport {
                status: engine_report.status.clone(),
                matched: true,
                engine: engine_report,
                oracle: oracle_report,
                mismatch: None,
            }
        }
        (Err(_), Err(_)) if engine_report.status == oracle_report.status => CheckReport {
            status: engine_report.status.clone(),
            matched: true,
            engine: engine_report,
            oracle: oracle_report,
            mismatch: None,
        },
        _ => {
            let m = Mismatch {
                field: "status".into(),
                engine_value: format!("{:?}", engine_report.status),
                oracle_value: format!("{:?}", oracle_report.status),
            };
            CheckReport::mismatch(engine_report, oracle_report, m)
        }
    }
}

/// Convenience used by tests and snippets: coefficients of a run as a map.
pub fn coefficient_map(report: &Report) -> BTreeMap<u64, Rational> {
    report
        .coefficients
        .iter()
        .flatten()
        .map(|(s, c)| (*s, c.clone()))
        .collect()
}
