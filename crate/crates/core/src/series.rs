//! Truncated formal power series in one variable `t` with exact rational
//! coefficients and certified precision.
//!
//! A series stores only its nonzero coefficients (sparse map, exponent to
//! coefficient) together with a [`Precision`]: either every coefficient of
//! every degree is known (`Exact`), or all coefficients of `t^e` for
//! `e <= K` are known exactly and nothing is claimed beyond (`Bound(K)`).
//!
//! Invariants:
//! - no stored coefficient is zero
//! - every stored exponent is within the certified range
//! - precision propagates conservatively: an operation never claims a
//!   coefficient it cannot certify

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::rational::Rational;

/// How far the coefficients of a series are certified.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Precision {
    /// Every coefficient of every degree is known.
    Exact,
    /// Coefficients of `t^e` for `e <= K` are known exactly; nothing is
    /// known beyond.
    Bound(u64),
}

impl Precision {
    /// The meet of two precisions; `Exact` absorbs.
    pub fn min(self, other: Precision) -> Precision {
        match (self, other) {
            (Precision::Exact, p) | (p, Precision::Exact) => p,
            (Precision::Bound(a), Precision::Bound(b)) => Precision::Bound(a.min(b)),
        }
    }

    /// Whether the coefficient of `t^e` is within the certified range.
    pub fn covers(self, e: u64) -> bool {
        match self {
            Precision::Exact => true,
            Precision::Bound(k) => e <= k,
        }
    }

    /// The finite bound, if any.
    pub fn bound(self) -> Option<u64> {
        match self {
            Precision::Exact => None,
            Precision::Bound(k) => Some(k),
        }
    }
}

/// Outcome of asking for the vanishing order of a series at `t = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrderResult {
    /// The smallest exponent with nonzero coefficient, certified.
    Order(u64),
    /// The series is identically zero (requires exact precision).
    CertifiedZero,
    /// No nonzero coefficient within the certified range; the order may be
    /// anything beyond it.
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("differentiating a series certified only at degree 0 leaves nothing certified")]
    DegeneratePrecision,
}

/// A truncated formal power series with exact rational coefficients.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncSeries {
    terms: BTreeMap<u64, Rational>,
    prec: Precision,
}

impl TruncSeries {
    /// The zero series at the given precision.
    pub fn zero(prec: Precision) -> Self {
        TruncSeries {
            terms: BTreeMap::new(),
            prec,
        }
    }

    /// The exactly-zero series.
    pub fn zero_exact() -> Self {
        Self::zero(Precision::Exact)
    }

    /// A single exact term `c * t^e` (the zero series if `c = 0`).
    pub fn term(coef: Rational, exp: u64) -> Self {
        let mut terms = BTreeMap::new();
        if !coef.is_zero() {
            terms.insert(exp, coef);
        }
        TruncSeries {
            terms,
            prec: Precision::Exact,
        }
    }

    /// Builds a series from exponent/coefficient pairs. Duplicate exponents
    /// are summed; zero coefficients and exponents beyond the precision are
    /// dropped.
    pub fn from_terms(prec: Precision, pairs: impl IntoIterator<Item = (u64, Rational)>) -> Self {
        let mut terms: BTreeMap<u64, Rational> = BTreeMap::new();
        for (e, c) in pairs {
            if !prec.covers(e) {
                continue;
            }
            let entry = terms.entry(e).or_insert_with(Rational::zero);
            *entry = &*entry + &c;
        }
        terms.retain(|_, c| !c.is_zero());
        Self::finish(terms, prec)
    }

    fn finish(terms: BTreeMap<u64, Rational>, prec: Precision) -> Self {
        let s = TruncSeries { terms, prec };
        debug_assert!(s.is_canonical());
        s
    }

    fn is_canonical(&self) -> bool {
        self.terms
            .iter()
            .all(|(&e, c)| !c.is_zero() && self.prec.covers(e))
    }

    pub fn precision(&self) -> Precision {
        self.prec
    }

    /// Nonzero terms in ascending exponent order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (u64, &Rational)> {
        self.terms.iter().map(|(&e, c)| (e, c))
    }

    pub fn term_count(&self) -> usize {
        self.terms.len()
    }

    /// The coefficient of `t^e`. Zero for absent exponents within the
    /// certified range; panics when `e` is beyond it, because the
    /// coefficient there is unknown rather than zero.
    pub fn coeff(&self, e: u64) -> Rational {
        assert!(
            self.prec.covers(e),
            "coefficient of t^{e} is beyond the certified precision {:?}",
            self.prec
        );
        self.terms.get(&e).cloned().unwrap_or_else(Rational::zero)
    }

    /// The term of smallest exponent, if any nonzero term is stored.
    pub fn lowest_term(&self) -> Option<(u64, &Rational)> {
        self.terms.iter().next().map(|(&e, c)| (e, c))
    }

    /// A certified lower bound for the valuation: the smallest stored
    /// exponent, or one past the bound for a series with no stored terms.
    /// `None` means the valuation is `+infinity` (exactly zero).
    fn valuation_floor(&self) -> Option<u64> {
        match self.terms.keys().next() {
            Some(&e) => Some(e),
            None => match self.prec {
                Precision::Exact => None,
                Precision::Bound(k) => Some(k + 1),
            },
        }
    }

    /// Certified vanishing order at `t = 0`.
    pub fn order(&self) -> OrderResult {
        match self.terms.keys().next() {
            Some(&e) => OrderResult::Order(e),
            None => match self.prec {
                Precision::Exact => OrderResult::CertifiedZero,
                Precision::Bound(_) => OrderResult::Unknown,
            },
        }
    }

    /// Coefficientwise sum; the result's precision is the meet of the
    /// operands' precisions.
    pub fn add(&self, other: &Self) -> Self {
        let prec = self.prec.min(other.prec);
        let mut terms = self.terms.clone();
        terms.retain(|&e, _| prec.covers(e));
        for (&e, c) in &other.terms {
            if !prec.covers(e) {
                continue;
            }
            let entry = terms.entry(e).or_insert_with(Rational::zero);
            *entry = &*entry + c;
        }
        terms.retain(|_, c| !c.is_zero());
        Self::finish(terms, prec)
    }

    pub fn neg(&self) -> Self {
        let terms = self.terms.iter().map(|(&e, c)| (e, -c)).collect();
        Self::finish(terms, self.prec)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    /// Cauchy product restricted to certified degrees.
    ///
    /// The result is exact when both factors are exact. Otherwise each
    /// bounded factor `f` with bound `K_f` certifies the product up to
    /// `K_f + v`, where `v` is a certified lower bound for the valuation of
    /// the other factor, and the result's bound is the minimum of those. A
    /// factor that is exactly zero makes the product exactly zero.
    pub fn mul(&self, other: &Self) -> Self {
        let mut bound: Option<u64> = None;
        let mut consider = |k: Option<u64>| {
            if let Some(k) = k {
                bound = Some(bound.map_or(k, |b| b.min(k)));
            }
        };
        if let Precision::Bound(kf) = self.prec {
            consider(other.valuation_floor().map(|v| kf + v));
        }
        if let Precision::Bound(kg) = other.prec {
            consider(self.valuation_floor().map(|v| kg + v));
        }
        let prec = match bound {
            None => Precision::Exact,
            Some(k) => Precision::Bound(k),
        };

        let mut terms: BTreeMap<u64, Rational> = BTreeMap::new();
        for (&ea, ca) in &self.terms {
            for (&eb, cb) in &other.terms {
                let e = ea + eb;
                if !prec.covers(e) {
                    break; // exponents ascend, the rest only grow
                }
                let entry = terms.entry(e).or_insert_with(Rational::zero);
                *entry = &*entry + &(ca * cb);
            }
        }
        terms.retain(|_, c| !c.is_zero());
        Self::finish(terms, prec)
    }

    /// Multiplies every coefficient by `c`; precision is unchanged.
    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.prec);
        }
        let terms = self.terms.iter().map(|(&e, v)| (e, v * c)).collect();
        Self::finish(terms, self.prec)
    }

    /// Termwise derivative `d/dt`. A bound shrinks by one; an exact series
    /// stays exact. Fails when nothing certifiable remains.
    pub fn derivative(&self) -> Result<Self, SeriesError> {
        let prec = match self.prec {
            Precision::Exact => Precision::Exact,
            Precision::Bound(0) => return Err(SeriesError::DegeneratePrecision),
            Precision::Bound(k) => Precision::Bound(k - 1),
        };
        let terms = self
            .terms
            .iter()
            .filter(|&(&e, _)| e > 0)
            .map(|(&e, c)| (e - 1, c * &Rational::from(e)))
            .collect();
        Ok(Self::finish(terms, prec))
    }

    /// Drops all exponents above `k`; the result is certified up to `k` at
    /// most.
    pub fn truncate(&self, k: u64) -> Self {
        let prec = self.prec.min(Precision::Bound(k));
        let terms = self
            .terms
            .range(..=k)
            .map(|(&e, c)| (e, c.clone()))
            .collect();
        Self::finish(terms, prec)
    }

    /// Exact division by `t^p`. Panics if any stored exponent is below `p`
    /// or the precision cannot absorb the shift.
    pub fn shift_down(&self, p: u64) -> Self {
        let prec = match self.prec {
            Precision::Exact => Precision::Exact,
            Precision::Bound(k) => {
                assert!(k >= p, "cannot divide a series known to t^{k} by t^{p}");
                Precision::Bound(k - p)
            }
        };
        let terms = self
            .terms
            .iter()
            .map(|(&e, c)| {
                assert!(e >= p, "t^{e} is not divisible by t^{p}");
                (e - p, c.clone())
            })
            .collect();
        Self::finish(terms, prec)
    }

    /// Substitutes `t -> lambda * t` for a nonzero constant `lambda`:
    /// the coefficient of `t^e` picks up a factor `lambda^e`. Precision is
    /// unchanged.
    pub fn scale_argument(&self, lambda: &Rational) -> Self {
        assert!(!lambda.is_zero(), "argument scale must be nonzero");
        let terms = self
            .terms
            .iter()
            .map(|(&e, c)| (e, c * &lambda.pow(e as i64)))
            .collect();
        Self::finish(terms, self.prec)
    }
}

impl Add for &TruncSeries {
    type Output = TruncSeries;
    fn add(self, rhs: &TruncSeries) -> TruncSeries {
        TruncSeries::add(self, rhs)
    }
}

impl Sub for &TruncSeries {
    type Output = TruncSeries;
    fn sub(self, rhs: &TruncSeries) -> TruncSeries {
        TruncSeries::sub(self, rhs)
    }
}

impl Mul for &TruncSeries {
    type Output = TruncSeries;
    fn mul(self, rhs: &TruncSeries) -> TruncSeries {
        TruncSeries::mul(self, rhs)
    }
}

impl Neg for &TruncSeries {
    type Output = TruncSeries;
    fn neg(self) -> TruncSeries {
        TruncSeries::neg(self)
    }
}

/// Renders in the same notation the expression parser accepts, e.g.
/// `t^12 + t^13 + 37/28*t^14`. Precision is not part of the notation.
impl fmt::Display for TruncSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (&e, c)) in self.terms.iter().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = if neg { -c } else { c.clone() };
            if e == 0 {
                write!(f, "{mag}")?;
            } else {
                if !mag.is_one() {
                    write!(f, "{mag}*")?;
                }
                if e == 1 {
                    write!(f, "t")?;
                } else {
                    write!(f, "t^{e}")?;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn poly(pairs: &[(u64, (i64, i64))]) -> TruncSeries {
        TruncSeries::from_terms(
            Precision::Exact,
            pairs.iter().map(|&(e, (n, d))| (e, rat(n, d))),
        )
    }

    /// The parametrization used as a running example across the crate.
    pub(crate) fn sample_x() -> TruncSeries {
        poly(&[(12, (1, 1)), (13, (1, 1)), (14, (37, 28))])
    }

    pub(crate) fn sample_y() -> TruncSeries {
        poly(&[
            (18, (1, 1)),
            (19, (3, 2)),
            (20, (33, 14)),
            (21, (13, 14)),
            (22, (675, 1568)),
            (23, (-675, 3136)),
        ])
    }

    #[test]
    fn add_cancels_to_zero() {
        let a = TruncSeries::term(Rational::one(), 2);
        let b = TruncSeries::term(-Rational::one(), 2);
        let sum = &a + &b;
        assert_eq!(sum, TruncSeries::zero_exact());

        let y = sample_y();
        assert_eq!(&y + &y.neg(), TruncSeries::zero_exact());
    }

    #[test]
    fn add_takes_min_precision() {
        let a = TruncSeries::from_terms(
            Precision::Exact,
            [(0, Rational::one()), (1, Rational::one())],
        );
        let b = TruncSeries::from_terms(Precision::Bound(5), [(1, Rational::one())]);
        let sum = &a + &b;
        assert_eq!(sum.precision(), Precision::Bound(5));
        assert_eq!(sum.coeff(0), Rational::one());
        assert_eq!(sum.coeff(1), rat(2, 1));
    }

    #[test]
    fn add_drops_terms_beyond_the_new_bound() {
        let a = poly(&[(1, (1, 1)), (9, (1, 1))]);
        let b = TruncSeries::from_terms(Precision::Bound(5), [(1, Rational::one())]);
        let sum = &a + &b;
        assert_eq!(sum.precision(), Precision::Bound(5));
        assert_eq!(sum.iter().map(|(e, _)| e).collect::<Vec<_>>(), vec![1]);
    }

    #[test]
    fn mul_monomials() {
        let a = TruncSeries::term(Rational::one(), 3);
        let b = TruncSeries::term(Rational::one(), 4);
        assert_eq!(&a * &b, TruncSeries::term(Rational::one(), 7));
    }

    // min(K_f + v_g, K_g + v_f) = min(10+2, 10+1) = 11: g's unknown t^11
    // term times f's t term already reaches degree 12, so 12 cannot be
    // certified.
    #[test]
    fn mul_bound_uses_min_over_both_factors() {
        let f = TruncSeries::from_terms(
            Precision::Bound(10),
            [(1, Rational::one()), (4, Rational::one())],
        );
        let g = TruncSeries::from_terms(
            Precision::Bound(10),
            [(2, Rational::one()), (3, Rational::one())],
        );
        let prod = &f * &g;
        assert_eq!(prod.precision(), Precision::Bound(11));
    }

    #[test]
    fn mul_with_exact_zero_is_exactly_zero() {
        let f = TruncSeries::from_terms(Precision::Bound(10), [(1, Rational::one())]);
        let z = TruncSeries::zero_exact();
        assert_eq!(&f * &z, TruncSeries::zero_exact());
    }

    #[test]
    fn mul_with_bounded_zero_stays_conservative() {
        // v of a zero factor with Bound(4) is taken as 5.
        let f = TruncSeries::from_terms(Precision::Bound(10), [(2, Rational::one())]);
        let z = TruncSeries::zero(Precision::Bound(4));
        let prod = &f * &z;
        assert_eq!(prod.precision(), Precision::Bound(4 + 2));
        assert_eq!(prod.order(), OrderResult::Unknown);
    }

    /// Independent dense convolution, used as the oracle for `mul`.
    fn convolve_dense(a: &TruncSeries, b: &TruncSeries, up_to: u64) -> Vec<Rational> {
        let n = up_to as usize + 1;
        let mut av = vec![Rational::zero(); n];
        let mut bv = vec![Rational::zero(); n];
        for (e, c) in a.iter() {
            if (e as usize) < n {
                av[e as usize] = c.clone();
            }
        }
        for (e, c) in b.iter() {
            if (e as usize) < n {
                bv[e as usize] = c.clone();
            }
        }
        let mut out = vec![Rational::zero(); n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] = &out[i + j] + &(&av[i] * &bv[j]);
            }
        }
        out
    }

    #[test]
    fn mul_matches_brute_force_convolution() {
        let x = sample_x();
        let xdot = x.derivative().unwrap();
        let prod = &x * &xdot;
        let expected = convolve_dense(&x, &xdot, 27);
        assert_eq!(prod.precision(), Precision::Exact);
        for e in 0..=27u64 {
            assert_eq!(prod.coeff(e), expected[e as usize], "coefficient of t^{e}");
        }
        // spot values: x*x' starts 12 t^23 + 25 t^24
        assert_eq!(prod.coeff(23), rat(12, 1));
        assert_eq!(prod.coeff(24), rat(25, 1));
    }

    #[test]
    fn scale_by_zero_gives_zero_with_same_precision() {
        let f = TruncSeries::from_terms(
            Precision::Bound(7),
            [(2, Rational::one()), (3, Rational::one())],
        );
        let scaled = f.scale(&Rational::zero());
        assert_eq!(scaled, TruncSeries::zero(Precision::Bound(7)));
    }

    #[test]
    fn scale_multiplies_each_coefficient() {
        let f = poly(&[(12, (1, 1)), (13, (1, 1))]);
        let scaled = f.scale(&rat(3, 2));
        assert_eq!(scaled.coeff(12), rat(3, 2));
        assert_eq!(scaled.coeff(13), rat(3, 2));
        assert_eq!(scaled.precision(), Precision::Exact);
    }

    #[test]
    fn scale_normalizes_a_leading_term() {
        // -2025/10976 t^35 - 24975/43904 t^36 scaled by -10976/2025 gets a
        // unit leading coefficient; the t^36 value follows by exact
        // arithmetic.
        let p1 = TruncSeries::from_terms(
            Precision::Exact,
            [(35, rat(-2025, 10976)), (36, rat(-24975, 43904))],
        );
        let scaled = p1.scale(&rat(-10976, 2025));
        assert_eq!(scaled.coeff(35), Rational::one());
        assert_eq!(scaled.coeff(36), &rat(24975, 43904) * &rat(10976, 2025));
    }

    #[test]
    fn derivative_is_termwise() {
        let f = poly(&[(12, (1, 1)), (13, (1, 1)), (14, (37, 28))]);
        let d = f.derivative().unwrap();
        assert_eq!(d.coeff(11), rat(12, 1));
        assert_eq!(d.coeff(12), rat(13, 1));
        assert_eq!(d.coeff(13), rat(37, 2));
        assert_eq!(d.precision(), Precision::Exact);
    }

    #[test]
    fn derivative_of_constant_is_zero() {
        let c = TruncSeries::term(rat(5, 1), 0);
        assert_eq!(c.derivative().unwrap(), TruncSeries::zero_exact());
    }

    #[test]
    fn derivative_shrinks_bound_and_rejects_bound_zero() {
        let f = TruncSeries::from_terms(Precision::Bound(5), [(1, Rational::one())]);
        assert_eq!(f.derivative().unwrap().precision(), Precision::Bound(4));

        let c = TruncSeries::from_terms(Precision::Bound(0), [(0, Rational::one())]);
        assert_eq!(c.derivative(), Err(SeriesError::DegeneratePrecision));
    }

    #[test]
    fn derivative_matches_termwise_oracle_on_sample() {
        let y = sample_y();
        let d = y.derivative().unwrap();
        for (e, c) in y.iter() {
            assert_eq!(d.coeff(e - 1), c * &Rational::from(e));
        }
        assert_eq!(d.coeff(17), rat(18, 1));
        assert_eq!(d.coeff(18), rat(57, 2));
        assert_eq!(d.coeff(19), rat(330, 7));
    }

    #[test]
    fn order_results() {
        assert_eq!(sample_y().order(), OrderResult::Order(18));
        assert_eq!(
            TruncSeries::zero_exact().order(),
            OrderResult::CertifiedZero
        );
        assert_eq!(
            TruncSeries::zero(Precision::Bound(40)).order(),
            OrderResult::Unknown
        );
    }

    #[test]
    fn truncate_drops_and_bounds() {
        let f = poly(&[(1, (1, 1)), (5, (1, 1))]);
        let t = f.truncate(3);
        assert_eq!(t.precision(), Precision::Bound(3));
        assert_eq!(t.iter().map(|(e, _)| e).collect::<Vec<_>>(), vec![1]);

        let g = poly(&[(2, (1, 1))]);
        let t = g.truncate(10);
        assert_eq!(t.precision(), Precision::Bound(10));
        assert_eq!(t.coeff(2), Rational::one());
    }

    #[test]
    fn truncate_sample_y_keeps_low_coefficients() {
        let t = sample_y().truncate(20);
        assert_eq!(t.precision(), Precision::Bound(20));
        assert_eq!(t.coeff(18), Rational::one());
        assert_eq!(t.coeff(19), rat(3, 2));
        assert_eq!(t.coeff(20), rat(33, 14));
        assert_eq!(t.term_count(), 3);
    }

    #[test]
    fn shift_down_divides_exactly() {
        let x = sample_x();
        let h = x.shift_down(12);
        assert_eq!(h.coeff(0), Rational::one());
        assert_eq!(h.coeff(1), Rational::one());
        assert_eq!(h.coeff(2), rat(37, 28));
    }

    #[test]
    fn scale_argument_multiplies_by_powers() {
        let f = poly(&[(2, (1, 1)), (3, (4, 1))]);
        let g = f.scale_argument(&rat(1, 2));
        assert_eq!(g.coeff(2), rat(1, 4));
        assert_eq!(g.coeff(3), rat(1, 2));
    }

    #[test]
    fn display_round_trips_notation() {
        assert_eq!(sample_x().to_string(), "t^12 + t^13 + 37/28*t^14");
        assert_eq!(TruncSeries::zero_exact().to_string(), "0");
        assert_eq!(TruncSeries::term(-Rational::one(), 3).to_string(), "-t^3");
        let mixed =
            TruncSeries::from_terms(Precision::Exact, [(0, rat(5, 1)), (1, rat(-1, 2))]);
        assert_eq!(mixed.to_string(), "5 - 1/2*t");
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_rational() -> impl Strategy<Value = Rational> {
            (-9i64..=9, 1i64..=9).prop_map(|(n, d)| rat(n, d))
        }

        fn arb_poly() -> impl Strategy<Value = TruncSeries> {
            prop::collection::vec((0u64..24, arb_rational()), 0..8)
                .prop_map(|pairs| TruncSeries::from_terms(Precision::Exact, pairs))
        }

        fn arb_series() -> impl Strategy<Value = TruncSeries> {
            (arb_poly(), prop::option::of(0u64..30)).prop_map(|(p, bound)| match bound {
                None => p,
                Some(k) => p.truncate(k),
            })
        }

        /// Equality of all coefficients on the common certified range.
        fn agree_on_certified(a: &TruncSeries, b: &TruncSeries) -> bool {
            let limit = a.precision().min(b.precision());
            let up_to = |s: &TruncSeries| {
                s.iter()
                    .filter(|&(e, _)| limit.covers(e))
                    .map(|(e, c)| (e, c.clone()))
                    .collect::<Vec<_>>()
            };
            up_to(a) == up_to(b)
        }

        proptest! {
            #[test]
            fn add_is_associative_and_commutative(
                f in arb_series(), g in arb_series(), h in arb_series()
            ) {
                prop_assert!(agree_on_certified(&(&f + &g), &(&g + &f)));
                prop_assert!(agree_on_certified(&(&(&f + &g) + &h), &(&f + &(&g + &h))));
            }

            #[test]
            fn mul_is_commutative_and_associative(
                f in arb_series(), g in arb_series(), h in arb_series()
            ) {
                prop_assert!(agree_on_certified(&(&f * &g), &(&g * &f)));
                prop_assert!(agree_on_certified(&(&(&f * &g) * &h), &(&f * &(&g * &h))));
            }

            #[test]
            fn mul_distributes_over_add(
                f in arb_series(), g in arb_series(), h in arb_series()
            ) {
                let lhs = &f * &(&g + &h);
                let rhs = &(&f * &g) + &(&f * &h);
                prop_assert!(agree_on_certified(&lhs, &rhs));
            }

            #[test]
            fn leibniz_rule(f in arb_poly(), g in arb_poly()) {
                let lhs = (&f * &g).derivative().unwrap();
                let fd = f.derivative().unwrap();
                let gd = g.derivative().unwrap();
                let rhs = &(&fd * &g) + &(&f * &gd);
                prop_assert!(agree_on_certified(&lhs, &rhs));
            }

            /// Re-running a pipeline with inputs truncated to a larger bound
            /// never changes a coefficient inside the smaller run's output
            /// bound.
            #[test]
            fn precision_soundness(
                f in arb_poly(), g in arb_poly(),
                k1 in 2u64..16, extra in 1u64..16
            ) {
                let k2 = k1 + extra;
                let pipeline = |a: &TruncSeries, b: &TruncSeries| {
                    let s = &(a * b) + a;
                    let d = s.derivative().unwrap();
                    &(&d * b) + &s
                };
                let coarse = pipeline(&f.truncate(k1), &g.truncate(k1));
                let fine = pipeline(&f.truncate(k2), &g.truncate(k2));
                let exact = pipeline(&f, &g);
                prop_assert!(agree_on_certified(&coarse, &fine));
                prop_assert!(agree_on_certified(&coarse, &exact));
            }

            #[test]
            fn operations_keep_canonical_form(f in arb_series(), g in arb_series()) {
                for s in [&f + &g, &f - &g, &f * &g, f.neg(), f.truncate(5)] {
                    prop_assert!(s.iter().all(|(e, c)| !c.is_zero() && s.precision().covers(e)));
                }
            }
        }
    }
}
