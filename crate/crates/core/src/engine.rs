//! The derived-polynomial recursion that reads off the characteristic
//! sequence of a cuspidal branch directly from its parametrization.
//!
//! Starting from `P_0 = y`, each step builds
//!
//! ```text
//! P_1     = y' x - (q/p) x' y
//! P_{k+1} = x x' dP_k/dt - (r_k/p x'^2 + (2k-1) x'' x) P_k
//! ```
//!
//! The vanishing order of `P_k` exceeds that of `P_{k-1}` by exactly the
//! amount dictated by the next nonzero Puiseux exponent `r_k`:
//! `ord P_k = r_k + (2k-1)(p-1)` for `k >= 1`. The exponents `r_0 < r_1 < ...`
//! are collected until their running gcd with `p` reaches 1, which pins the
//! characteristic sequence without ever computing fractional-power series.

use num_integer::gcd;
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::rational::Rational;
use crate::series::{OrderResult, SeriesError, TruncSeries};

/// Why a run could not produce (or finish producing) a characteristic
/// sequence.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EngineError {
    /// The smaller input order is at most 1: the germ is smooth or the
    /// input degenerate, and there is no cusp to analyze.
    #[error("multiplicity must be at least 2; the branch is smooth or the input degenerate")]
    SmoothOrInvalid { min_order: Option<u64> },
    /// An input series has no certified vanishing order.
    #[error("cannot certify the vanishing order of an input series; increase its truncation")]
    UnknownOrder,
    /// Some derived polynomial vanished identically: the parametrization
    /// runs through the curve `covering_degree` times.
    #[error("the parametrization is not one-to-one: it factors through a degree-{covering_degree} cover")]
    NonInjective { covering_degree: u64 },
    /// The inputs are not certified far enough to decide the next exponent.
    #[error("insufficient precision: retry with inputs certified to at least t^{needed_bound}")]
    InsufficientPrecision { needed_bound: u64 },
    #[error("no conclusion after {max_steps} steps; raise the step limit")]
    MaxStepsExceeded { max_steps: usize },
    /// The gcd of the known exponents never reaches 1.
    #[error("exponent gcd stuck at {stuck_gcd} over the available exponents")]
    IncompleteSequence { stuck_gcd: u64 },
    #[error(transparent)]
    Series(#[from] SeriesError),
}

/// A validated local parametrization `(x(t), y(t))` with `ord x = p`,
/// `ord y = q`, `q >= p > 1`. The coordinates are swapped on construction
/// if necessary.
#[derive(Clone, Debug)]
pub struct Parametrization {
    x: TruncSeries,
    y: TruncSeries,
    p: u64,
    q: u64,
    a0: Rational,
    b0: Rational,
    swapped: bool,
}

impl Parametrization {
    /// Validates a pair of series as a cuspidal parametrization.
    ///
    /// Both orders must be certified; the coordinates are exchanged when
    /// `ord x > ord y` so that `p <= q` afterwards, and `p > 1` is
    /// required.
    pub fn new(x: TruncSeries, y: TruncSeries) -> Result<Self, EngineError> {
        let (ox, oy) = match (x.order(), y.order()) {
            (OrderResult::Unknown, _) | (_, OrderResult::Unknown) => {
                return Err(EngineError::UnknownOrder)
            }
            (OrderResult::CertifiedZero, _) | (_, OrderResult::CertifiedZero) => {
                return Err(EngineError::SmoothOrInvalid { min_order: None })
            }
            (OrderResult::Order(ox), OrderResult::Order(oy)) => (ox, oy),
        };
        let (x, y, p, q, swapped) = if ox <= oy {
            (x, y, ox, oy, false)
        } else {
            (y, x, oy, ox, true)
        };
        if p <= 1 {
            return Err(EngineError::SmoothOrInvalid { min_order: Some(p) });
        }
        let a0 = x.coeff(p);
        let b0 = y.coeff(q);
        Ok(Parametrization {
            x,
            y,
            p,
            q,
            a0,
            b0,
            swapped,
        })
    }

    pub fn x(&self) -> &TruncSeries {
        &self.x
    }

    pub fn y(&self) -> &TruncSeries {
        &self.y
    }

    /// The multiplicity `ord x`.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// `ord y`.
    pub fn q(&self) -> u64 {
        self.q
    }

    /// Leading coefficient of `x`.
    pub fn a0(&self) -> &Rational {
        &self.a0
    }

    /// Leading coefficient of `y`.
    pub fn b0(&self) -> &Rational {
        &self.b0
    }

    /// Whether the two inputs were exchanged during validation.
    pub fn swapped(&self) -> bool {
        self.swapped
    }

    /// The common certified bound of the inputs, `None` when both are
    /// exact.
    pub fn input_bound(&self) -> Option<u64> {
        match (self.x.precision().bound(), self.y.precision().bound()) {
            (None, b) | (b, None) => b,
            (Some(a), Some(b)) => Some(a.min(b)),
        }
    }

    /// The minimal input truncation that could let a stuck run progress.
    fn needed_bound(&self) -> u64 {
        self.input_bound()
            .expect("exact inputs cannot run out of precision")
            + 1
    }
}

/// Per-step record: the polynomial `P_k`, the exponent `r_k` it certifies,
/// its leading coefficient, and the recovered normalized Puiseux
/// coefficient.
#[derive(Clone, Debug)]
pub struct StepTrace {
    /// Step index; 0 is the seed `P_0 = y`.
    pub k: usize,
    /// The derived polynomial `P_k`.
    pub poly: TruncSeries,
    /// The Puiseux exponent certified by this step.
    pub r: u64,
    /// Coefficient of `P_k` at its vanishing order (`b0` for `k = 0`).
    pub leading: Rational,
    /// Normalized Puiseux coefficient `c~_{r_k} = c_{r_k} a0^{r_k/p}`.
    pub coeff: Rational,
}

/// The characteristic sequence `(p; q_0, ..., q_n)` together with the
/// strictly decreasing gcd chain `p = p_0 > p_1 > ... > p_{n+1} = 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CharSequence {
    pub p: u64,
    pub q_list: Vec<u64>,
    pub gcd_chain: Vec<u64>,
}

impl fmt::Display for CharSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({};", self.p)?;
        for (i, q) in self.q_list.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{q}")?;
        }
        write!(f, ")")
    }
}

/// Everything a successful run produces.
#[derive(Clone, Debug)]
pub struct EngineRun {
    /// All certified nonzero Puiseux exponents, in order of discovery.
    pub r_sequence: Vec<u64>,
    pub traces: Vec<StepTrace>,
    pub char_seq: CharSequence,
    /// Exponents of `r_sequence` that do not lower the running gcd.
    pub inessential: Vec<u64>,
}

/// The seed record `P_0 = y`, `r_0 = q`.
pub fn initial_trace(par: &Parametrization) -> StepTrace {
    StepTrace {
        k: 0,
        poly: par.y.clone(),
        r: par.q,
        leading: par.b0.clone(),
        coeff: par.b0.clone(),
    }
}

fn order_shift(k: usize, p: u64) -> u64 {
    (2 * k as u64 - 1) * (p - 1)
}

/// Normalized Puiseux coefficient from a leading coefficient:
/// `leading / (prod_{j<k} (r_k - r_j) * p^{k-1} * a0^{2k-1})`.
fn recover(par: &Parametrization, prior_rs: &[u64], k: usize, r: u64, leading: &Rational) -> Rational {
    debug_assert_eq!(prior_rs.len(), k);
    let mut denom = Rational::from_int(par.p).pow(k as i64 - 1);
    denom = denom * par.a0.pow(2 * k as i64 - 1);
    for &rj in prior_rs {
        denom = denom * Rational::from(r - rj);
    }
    leading / &denom
}

/// Recovers the normalized Puiseux coefficient `c~_{r_k}` recorded in
/// `trace`, given the traces of all previous steps.
pub fn recover_coefficient(
    par: &Parametrization,
    prior: &[StepTrace],
    trace: &StepTrace,
) -> Rational {
    if trace.k == 0 {
        return par.b0.clone();
    }
    assert_eq!(prior.len(), trace.k, "need exactly the traces before step {}", trace.k);
    let rs: Vec<u64> = prior.iter().map(|t| t.r).collect();
    recover(par, &rs, trace.k, trace.r, &trace.leading)
}

fn interpret_order(
    par: &Parametrization,
    poly: &TruncSeries,
    running_gcd: u64,
) -> Result<u64, EngineError> {
    match poly.order() {
        OrderResult::Order(v) => Ok(v),
        OrderResult::CertifiedZero => Err(EngineError::NonInjective {
            covering_degree: running_gcd,
        }),
        OrderResult::Unknown => Err(EngineError::InsufficientPrecision {
            needed_bound: par.needed_bound(),
        }),
    }
}

/// First step of the recursion: `P_1 = y' x - (q/p) x' y` and
/// `r_1 = ord P_1 - (p-1)`.
pub fn first_step(par: &Parametrization) -> Result<StepTrace, EngineError> {
    let xd = par.x.derivative()?;
    let yd = par.y.derivative()?;
    let poly = (&yd * &par.x).sub(&(&xd * &par.y).scale(&Rational::new(par.q, par.p)));

    let v = interpret_order(par, &poly, gcd(par.p, par.q))?;
    let r = v
        .checked_sub(order_shift(1, par.p))
        .expect("ord P_1 >= p + q > p - 1");
    assert!(r > par.q, "exponent sequence must increase: r_1 = {r} <= q = {}", par.q);
    let leading = poly.coeff(v);
    let coeff = recover(par, &[par.q], 1, r, &leading);
    Ok(StepTrace {
        k: 1,
        poly,
        r,
        leading,
        coeff,
    })
}

/// Inductive step: from `P_k` (`k >= 1`) build `P_{k+1}` and certify
/// `r_{k+1} = ord P_{k+1} - (2k+1)(p-1)`.
pub fn next_step(par: &Parametrization, history: &[StepTrace]) -> Result<StepTrace, EngineError> {
    let prev = history.last().expect("history must contain the previous step");
    assert!(prev.k >= 1, "the inductive step starts from P_1");
    let k_next = prev.k + 1;

    let xd = par.x.derivative()?;
    let xdd = xd.derivative()?;
    let dp = prev.poly.derivative()?;

    let lead_part = (&par.x * &xd).mul(&dp);
    let correction = (&xd * &xd)
        .scale(&Rational::new(prev.r, par.p))
        .add(&(&xdd * &par.x).scale(&Rational::from((2 * prev.k - 1) as u64)));
    let poly = lead_part.sub(&correction.mul(&prev.poly));

    let running = history
        .iter()
        .fold(par.p, |d, t| gcd(d, t.r));
    let v = interpret_order(par, &poly, running)?;
    let r = v
        .checked_sub(order_shift(k_next, par.p))
        .unwrap_or_else(|| panic!("ord P_{k_next} = {v} below the order shift"));
    assert!(
        r > prev.r,
        "exponent sequence must increase: r_{k_next} = {r} <= r_{} = {}",
        prev.k,
        prev.r
    );
    let leading = poly.coeff(v);
    let rs: Vec<u64> = history.iter().map(|t| t.r).collect();
    let coeff = recover(par, &rs, k_next, r, &leading);
    Ok(StepTrace {
        k: k_next,
        poly,
        r,
        leading,
        coeff,
    })
}

/// Reads the characteristic sequence off a strictly increasing list of
/// nonzero Puiseux exponents: `q_0` is the first entry not divisible by
/// `p`, each later `q_k` the first not divisible by the current gcd, until
/// the gcd reaches 1.
pub fn extract_characteristic(p: u64, rs: &[u64]) -> Result<CharSequence, EngineError> {
    assert!(rs.windows(2).all(|w| w[0] < w[1]), "exponents must strictly increase");
    let mut q_list = Vec::new();
    let mut gcd_chain = vec![p];
    let mut current = p;
    while current != 1 {
        let q = rs
            .iter()
            .copied()
            .find(|&r| r % current != 0)
            .ok_or(EngineError::IncompleteSequence { stuck_gcd: current })?;
        if let Some(&last) = q_list.last() {
            assert!(q > last, "characteristic exponents must increase");
        }
        q_list.push(q);
        current = gcd(current, q);
        gcd_chain.push(current);
    }
    Ok(CharSequence {
        p,
        q_list,
        gcd_chain,
    })
}

/// Default step allowance: the certified input bound when the inputs are
/// truncated (exponents cannot exceed it), 64 for exact inputs.
pub fn default_max_steps(par: &Parametrization) -> usize {
    match par.input_bound() {
        Some(k) => (k as usize).max(1),
        None => 64,
    }
}

/// Runs the full driver: seed with `r_0 = q`, then iterate steps until the
/// running gcd of `p` and the found exponents reaches 1.
pub fn run(par: &Parametrization, max_steps: Option<usize>) -> Result<EngineRun, EngineError> {
    let max_steps = max_steps.unwrap_or_else(|| default_max_steps(par));
    assert!(max_steps >= 1, "max_steps must be at least 1");

    let mut traces = vec![initial_trace(par)];
    let mut d = gcd(par.p, par.q);
    if d != 1 {
        let t1 = first_step(par)?;
        d = gcd(d, t1.r);
        traces.push(t1);
        while d != 1 {
            if traces.len() > max_steps {
                return Err(EngineError::MaxStepsExceeded { max_steps });
            }
            let t = next_step(par, &traces)?;
            d = gcd(d, t.r);
            traces.push(t);
        }
    }

    let r_sequence: Vec<u64> = traces.iter().map(|t| t.r).collect();
    let char_seq = extract_characteristic(par.p, &r_sequence)?;
    let inessential = r_sequence
        .iter()
        .copied()
        .filter(|r| !char_seq.q_list.contains(r))
        .collect();
    Ok(EngineRun {
        r_sequence,
        traces,
        char_seq,
        inessential,
    })
}

/// Applies `t -> lambda t` to both coordinates; the characteristic data is
/// unchanged while each normalized coefficient `c~_s` picks up `lambda^s`.
pub fn scale_parameter(par: &Parametrization, lambda: &Rational) -> Parametrization {
    Parametrization::new(
        par.x.scale_argument(lambda),
        par.y.scale_argument(lambda),
    )
    .expect("parameter scaling preserves validity")
}
