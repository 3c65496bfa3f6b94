//! Classical Newton–Puiseux expansion, used as an independent check of the
//! recursion engine.
//!
//! Writing `x = a0 t^p h(t)` with `h(0) = 1`, the substitution
//! `u = t h(t)^{1/p}` turns `x` into `a0 u^p`, so expressing `y` in terms
//! of `u` (revert `u(t)`, then compose) yields the normalized Puiseux
//! coefficients `c~_s = c_s a0^{s/p}` directly as exact rationals. This
//! route costs a p-th root, a series reversion, and a composition; it is
//! the slow-but-classical path the engine is checked against.

use std::collections::BTreeMap;

use crate::engine::{extract_characteristic, CharSequence, EngineError, Parametrization};
use crate::rational::Rational;
use crate::series::{Precision, TruncSeries};

/// A series with constant term 1. Unit series admit p-th roots and
/// reciprocals with rational coefficients, solved degree by degree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnitSeries(TruncSeries);

impl UnitSeries {
    /// Wraps a series whose constant term is 1. Panics otherwise.
    pub fn new(s: TruncSeries) -> Self {
        assert!(
            s.coeff(0).is_one(),
            "a unit series must have constant term 1"
        );
        UnitSeries(s)
    }

    pub fn series(&self) -> &TruncSeries {
        &self.0
    }

    pub fn into_series(self) -> TruncSeries {
        self.0
    }

    fn bound(&self) -> u64 {
        self.0
            .precision()
            .bound()
            .expect("unit-series algorithms need a finite working precision; truncate first")
    }

    /// Multiplicative inverse, solved by the convolution recurrence
    /// `c_0 = 1`, `c_n = -sum_{k=1}^{n} a_k c_{n-k}`.
    pub fn recip(&self) -> UnitSeries {
        let k = self.bound();
        let n = k as usize + 1;
        let mut a = vec![Rational::zero(); n];
        for (e, c) in self.0.iter() {
            a[e as usize] = c.clone();
        }
        let mut inv = vec![Rational::zero(); n];
        inv[0] = Rational::one();
        for m in 1..n {
            let mut acc = Rational::zero();
            for i in 1..=m {
                if !a[i].is_zero() && !inv[m - i].is_zero() {
                    acc = acc + &a[i] * &inv[m - i];
                }
            }
            inv[m] = -acc;
        }
        UnitSeries(TruncSeries::from_terms(
            Precision::Bound(k),
            inv.into_iter().enumerate().map(|(e, c)| (e as u64, c)),
        ))
    }
}

/// The unit series `g` with `g^p = h` and `g(0) = 1`, on all certified
/// degrees of `h`.
///
/// Solved from the differential equation `p h g' = h' g`, whose degree-`m`
/// coefficient gives `p m g_m = sum_{i=1}^{m} h_i (i - p (m - i)) g_{m-i}`.
pub fn unit_root(h: &UnitSeries, p: u64) -> UnitSeries {
    assert!(p >= 1);
    let k = h.bound();
    let h_terms: Vec<(u64, Rational)> = h.series().iter().map(|(e, c)| (e, c.clone())).collect();
    let mut g = vec![Rational::zero(); k as usize + 1];
    g[0] = Rational::one();
    let p_rat = Rational::from(p);
    for m in 1..=k {
        let mut acc = Rational::zero();
        for (i, hi) in &h_terms {
            if *i < 1 || *i > m {
                continue;
            }
            let weight = Rational::from(*i) - &p_rat * &Rational::from(m - i);
            let prev = &g[(m - i) as usize];
            if !prev.is_zero() && !weight.is_zero() {
                acc = acc + hi * &(&weight * prev);
            }
        }
        g[m as usize] = acc / (&p_rat * &Rational::from(m));
    }
    UnitSeries(TruncSeries::from_terms(
        Precision::Bound(k),
        g.into_iter().enumerate().map(|(e, c)| (e as u64, c)),
    ))
}

/// Compositional inverse of `u(t) = t + u_2 t^2 + ...`: the series `t(u)`
/// with `u(t(u)) = u` on all certified degrees.
///
/// Uses the Lagrange inversion formula
/// `[u^n] t(u) = (1/n) [t^{n-1}] (t / u(t))^n` with incrementally updated
/// powers of `t / u(t)`.
pub fn reversion(u: &TruncSeries) -> TruncSeries {
    let k = u
        .precision()
        .bound()
        .expect("reversion needs a finite working precision; truncate first");
    assert!(
        u.lowest_term().map(|(e, _)| e) == Some(1) && u.coeff(1).is_one(),
        "reversion requires order 1 with unit leading coefficient; normalize first"
    );
    let z = UnitSeries::new(u.shift_down(1)).recip();
    let z = z.series();
    let mut zpow = z.clone();
    let mut coeffs = Vec::with_capacity(k as usize);
    for n in 1..=k {
        coeffs.push((n, zpow.coeff(n - 1) / Rational::from(n)));
        if n < k {
            zpow = zpow.mul(z);
        }
    }
    TruncSeries::from_terms(Precision::Bound(k), coeffs)
}

/// `f(g(t))` on certified degrees; `g` must have no constant term.
///
/// The certified bound combines both sides: the unknown tail of `f` first
/// shows up at degree `(K_f + 1) v_g`, and the unknown tail of `g` at
/// `K_g + 1 + (v_f - 1) v_g`, where `v` denotes valuations (for `g`, a
/// certified lower bound; for `f`, its smallest positive exponent).
pub fn compose(f: &TruncSeries, g: &TruncSeries) -> TruncSeries {
    assert!(
        g.lowest_term().is_none_or(|(e, _)| e >= 1),
        "composition requires ord(g) >= 1"
    );

    // A certified lower bound for the valuation of g (+infinity = None).
    let v_g = match g.lowest_term() {
        Some((e, _)) => Some(e),
        None => g.precision().bound().map(|k| k + 1),
    };

    // g is exactly zero: f(0) is the constant term, known exactly.
    let Some(v_g) = v_g else {
        return TruncSeries::term(f.coeff(0), 0);
    };

    let mut cap: Option<u64> = None;
    let mut consider = |k: u64| cap = Some(cap.map_or(k, |c| c.min(k)));
    if let Some(kf) = f.precision().bound() {
        consider((kf + 1) * v_g - 1);
    }
    if let Some(kg) = g.precision().bound() {
        // Only positive exponents of f see g at all.
        if let Some(vf) = f.iter().map(|(e, _)| e).find(|&e| e >= 1) {
            consider(kg + (vf - 1) * v_g);
        }
    }

    // Coefficients up to the cap depend only on stored terms, so evaluate
    // with plain polynomial arithmetic and attach the precision at the end.
    let g_map: BTreeMap<u64, Rational> = g.iter().map(|(e, c)| (e, c.clone())).collect();
    let terms: Vec<(u64, Rational)> = f.iter().map(|(e, c)| (e, c.clone())).collect();
    let mut acc: BTreeMap<u64, Rational> = BTreeMap::new();
    if let Some((_, c_last)) = terms.last() {
        acc.insert(0, c_last.clone());
        for window in (0..terms.len() - 1).rev().map(|i| (&terms[i], &terms[i + 1])) {
            let (e_low, c_low) = window.0;
            let (e_high, _) = window.1;
            acc = map_mul_pow(&acc, &g_map, e_high - e_low, cap);
            let entry = acc.entry(0).or_insert_with(Rational::zero);
            *entry = &*entry + c_low;
            if entry.is_zero() {
                acc.remove(&0);
            }
        }
        let (e_first, _) = &terms[0];
        acc = map_mul_pow(&acc, &g_map, *e_first, cap);
    }

    let prec = cap.map_or(Precision::Exact, Precision::Bound);
    TruncSeries::from_terms(prec, acc)
}

fn map_mul(
    a: &BTreeMap<u64, Rational>,
    b: &BTreeMap<u64, Rational>,
    cap: Option<u64>,
) -> BTreeMap<u64, Rational> {
    let mut out: BTreeMap<u64, Rational> = BTreeMap::new();
    for (&ea, ca) in a {
        for (&eb, cb) in b {
            let e = ea + eb;
            if cap.is_some_and(|k| e > k) {
                break;
            }
            let entry = out.entry(e).or_insert_with(Rational::zero);
            *entry = &*entry + &(ca * cb);
        }
    }
    out.retain(|_, c| !c.is_zero());
    out
}

fn map_mul_pow(
    a: &BTreeMap<u64, Rational>,
    base: &BTreeMap<u64, Rational>,
    exp: u64,
    cap: Option<u64>,
) -> BTreeMap<u64, Rational> {
    let mut out = a.clone();
    for _ in 0..exp {
        out = map_mul(&out, base, cap);
    }
    out
}

/// The normalized Puiseux coefficients of a parametrization up to a bound.
#[derive(Clone, Debug)]
pub struct PuiseuxData {
    /// Nonzero `c~_s` by exponent `s`.
    pub coefficients: BTreeMap<u64, Rational>,
    /// Every `s <= certified_bound` is decided (zero or listed).
    pub certified_bound: u64,
    pub char_seq: CharSequence,
}

impl PuiseuxData {
    /// Exponents with nonzero coefficient, ascending.
    pub fn positions(&self) -> Vec<u64> {
        self.coefficients.keys().copied().collect()
    }
}

/// Expands `y` in the normalized root `u = (x/a0)^{1/p}` and decides every
/// coefficient `c~_s` for `s <= bound`.
///
/// Panics if `bound < ord y`; fails with `InsufficientPrecision` when the
/// inputs are not certified far enough, and `IncompleteSequence` when the
/// nonzero exponents up to `bound` never bring the gcd down to 1.
pub fn puiseux_expand(par: &Parametrization, bound: u64) -> Result<PuiseuxData, EngineError> {
    assert!(
        bound >= par.q(),
        "the expansion bound must reach ord y = {}",
        par.q()
    );
    if let Some(k) = par.input_bound() {
        if bound > k {
            return Err(EngineError::InsufficientPrecision {
                needed_bound: bound,
            });
        }
    }
    let x = par.x().truncate(bound);
    let y = par.y().truncate(bound);

    let h = UnitSeries::new(x.shift_down(par.p()).scale(&par.a0().recip()));
    let root = unit_root(&h, par.p());
    let u_of_t = TruncSeries::term(Rational::one(), 1).mul(root.series());
    let t_of_u = reversion(&u_of_t);
    let expansion = compose(&y, &t_of_u);
    debug_assert!(expansion.precision().covers(bound));

    let coefficients: BTreeMap<u64, Rational> =
        expansion.iter().map(|(e, c)| (e, c.clone())).collect();
    let positions: Vec<u64> = coefficients.keys().copied().collect();
    let char_seq = extract_characteristic(par.p(), &positions)?;
    Ok(PuiseuxData {
        coefficients,
        certified_bound: bound,
        char_seq,
    })
}
