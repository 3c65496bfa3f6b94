//! Shared machinery for the integration suites: a deterministic RNG and a
//! generator of exact-polynomial parametrizations with known expansion
//! structure.
//!
//! Designed cases are built backwards: pick a divisor chain of `p`, pick
//! the exponent positions that realize each gcd drop (plus some inessential
//! positions that do not drop it), pick the normalized coefficients, then
//! synthesize `y = sum c~_s w(t)^s` truncated to a polynomial, where
//! `w = t (x / (a0 t^p))^{1/p}`. Truncation only disturbs coefficients
//! beyond the last designed position, so the expansion of the synthesized
//! polynomial is known exactly up to there.

use std::collections::BTreeSet;

use cusp_char::puiseux::{unit_root, UnitSeries};
use cusp_char::rational::Rational;
use cusp_char::series::{Precision, TruncSeries};

/// SplitMix64; deterministic and portable, so every suite run sees the
/// same cases.
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `lo..=hi`.
    pub fn range(&mut self, lo: u64, hi: u64) -> u64 {
        assert!(lo <= hi);
        lo + self.next_u64() % (hi - lo + 1)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.range(0, items.len() as u64 - 1) as usize]
    }

    pub fn chance(&mut self, percent: u64) -> bool {
        self.range(0, 99) < percent
    }

    /// Small nonzero rational.
    pub fn coefficient(&mut self) -> Rational {
        let num = self.range(1, 6) as i64 * if self.chance(50) { 1 } else { -1 };
        let den = self.range(1, 4) as i64;
        Rational::new(num, den)
    }
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

pub struct GeneratedCase {
    pub x: TruncSeries,
    pub y: TruncSeries,
    /// For designed cases: the exact expansion positions (and coefficients)
    /// up to and including the gcd-completing exponent. Not every suite
    /// reads it.
    #[allow(dead_code)]
    pub designed: Option<Vec<(u64, Rational)>>,
}

/// Maximum support degree of the generated polynomials.
const MAX_DEGREE: u64 = 58;

fn support_gcd(series_list: &[&TruncSeries]) -> u64 {
    let mut d = 0;
    for s in series_list {
        for (e, _) in s.iter() {
            d = gcd(d, e);
        }
    }
    d
}

fn random_x(rng: &mut Rng, p: u64, max_degree: u64) -> (TruncSeries, Rational) {
    let a0 = Rational::from_int(*rng.pick(&[1i64, 1, 1, 1, 2, -1, 3]));
    let mut terms = vec![(p, a0.clone())];
    let extras = rng.range(0, 2);
    let mut used = BTreeSet::from([p]);
    for _ in 0..extras {
        let e = p + rng.range(1, 6);
        if e <= max_degree && used.insert(e) {
            let c = Rational::from_int(rng.range(1, 9) as i64 * if rng.chance(50) { 1 } else { -1 });
            terms.push((e, c));
        }
    }
    (TruncSeries::from_terms(Precision::Exact, terms), a0)
}

/// A divisor chain `p = d_0 > d_1 > ... > 1` with random drops, biased
/// toward long chains so the inductive step gets exercised.
fn divisor_chain(rng: &mut Rng, p: u64) -> Vec<u64> {
    let mut chain = vec![p];
    let mut d = p;
    while d > 1 {
        let intermediate: Vec<u64> = (2..d).filter(|v| d.is_multiple_of(*v)).collect();
        d = if !intermediate.is_empty() && rng.chance(75) {
            *rng.pick(&intermediate)
        } else {
            1
        };
        chain.push(d);
    }
    chain
}

/// Positions realizing the chain: each drop `d -> d'` happens at an
/// exponent `s = d' m` with `gcd(m, d/d') = 1`, strictly increasing, with
/// occasional inessential positions (multiples of the current gcd) in
/// between. Returns `None` when the chain does not fit below the degree
/// cap.
fn chain_positions(rng: &mut Rng, p: u64, chain: &[u64]) -> Option<Vec<u64>> {
    let mut positions: Vec<u64> = Vec::new();
    let mut cursor = 0u64;
    for w in chain.windows(2) {
        let (d, d_next) = (w[0], w[1]);
        let ratio = d / d_next;
        let lo = if positions.is_empty() {
            p
        } else {
            cursor + 1
        };
        let m_lo = lo.div_ceil(d_next);
        let candidates: Vec<u64> = (m_lo..=MAX_DEGREE / d_next)
            .filter(|m| gcd(*m, ratio) == 1)
            .take(5)
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let s = d_next * rng.pick(&candidates);
        positions.push(s);
        cursor = s;
        // some exponents that keep the gcd where it is
        if d_next > 1 {
            for _ in 0..rng.range(0, 3) {
                let filler = cursor + d_next * rng.range(1, 2);
                if filler + d_next <= MAX_DEGREE {
                    positions.push(filler);
                    cursor = filler;
                }
            }
        }
    }
    Some(positions)
}

fn synthesize_y(
    x: &TruncSeries,
    a0: &Rational,
    p: u64,
    spec: &[(u64, Rational)],
) -> TruncSeries {
    let degree = spec.last().expect("at least one position").0;
    let h = UnitSeries::new(x.truncate(degree).shift_down(p).scale(&a0.recip()));
    let root = unit_root(&h, p);
    let w = TruncSeries::term(Rational::one(), 1).mul(root.series());

    let mut acc = TruncSeries::zero(Precision::Bound(degree));
    let mut power = TruncSeries::term(Rational::one(), 0);
    let mut reached = 0u64;
    for (s, c) in spec {
        for _ in reached..*s {
            power = power.mul(&w).truncate(degree);
        }
        reached = *s;
        acc = acc.add(&power.scale(c));
    }
    // freeze the truncation into an exact polynomial input
    TruncSeries::from_terms(Precision::Exact, acc.iter().map(|(e, c)| (e, c.clone())))
}

fn designed_case(rng: &mut Rng) -> Option<GeneratedCase> {
    let p = if rng.chance(75) {
        *rng.pick(&[4u64, 6, 8, 9, 10, 12])
    } else {
        rng.range(2, 12)
    };
    let chain = divisor_chain(rng, p);
    let positions = chain_positions(rng, p, &chain)?;
    let spec: Vec<(u64, Rational)> = positions
        .iter()
        .map(|&s| (s, rng.coefficient()))
        .collect();

    let (x, a0) = random_x(rng, p, MAX_DEGREE);
    let y = synthesize_y(&x, &a0, p, &spec);
    if support_gcd(&[&x, &y]) != 1 {
        return None;
    }
    Some(GeneratedCase {
        x,
        y,
        designed: Some(spec),
    })
}

fn generic_case(rng: &mut Rng) -> Option<GeneratedCase> {
    let p = rng.range(2, 12);
    let q = rng.range(p, 40);
    let (x, _) = random_x(rng, p, MAX_DEGREE);
    let mut used = BTreeSet::from([q]);
    let mut terms = vec![(q, rng.coefficient())];
    for _ in 0..rng.range(1, 4) {
        let e = q + rng.range(1, 20);
        if e <= 60 && used.insert(e) {
            terms.push((e, rng.coefficient()));
        }
    }
    let y = TruncSeries::from_terms(Precision::Exact, terms);
    if support_gcd(&[&x, &y]) != 1 {
        return None;
    }
    Some(GeneratedCase {
        x,
        y,
        designed: None,
    })
}

/// Deterministic case stream; roughly 60% designed multi-step cases, 40%
/// generic ones.
pub fn generate_cases(seed: u64, count: usize) -> Vec<GeneratedCase> {
    let mut rng = Rng::new(seed);
    let mut cases = Vec::with_capacity(count);
    while cases.len() < count {
        let case = if rng.chance(70) {
            designed_case(&mut rng)
        } else {
            generic_case(&mut rng)
        };
        if let Some(c) = case {
            cases.push(c);
        }
    }
    cases
}
