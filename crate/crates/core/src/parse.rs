//! Parser for series expressions in the notation `t^12 + t^13 + 37/28 t^14`.
//!
//! Grammar (whitespace insignificant between tokens):
//!
//! ```text
//! series := term (("+"|"-") term)*
//! term   := [coef ["*"]] ["t" ["^" nat]] | coef
//! coef   := ["-"] nat ["/" nat]
//! nat    := digit+
//! ```
//!
//! Duplicate exponents are summed. The result is an exact series; apply
//! [`TruncSeries::truncate`] afterwards for truncated input data.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::rational::Rational;
use crate::series::{Precision, TruncSeries};

/// Parse failure with the byte offset where it occurred.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {position}: expected {expected}")]
    SyntaxError { position: usize, expected: String },
    #[error("zero denominator at offset {position}")]
    ZeroDenominator { position: usize },
}

fn syntax(position: usize, expected: &str) -> ParseError {
    ParseError::SyntaxError {
        position,
        expected: expected.to_string(),
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn advance(&mut self) {
        self.pos += 1;
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.advance();
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn parse_digits(&mut self, expected: &str) -> Result<BigInt, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.advance();
        }
        if self.pos == start {
            return Err(syntax(start, expected));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits");
        Ok(text.parse().expect("digits form an integer"))
    }

    fn parse_exponent(&mut self) -> Result<u64, ParseError> {
        let start = self.pos;
        let n = self.parse_digits("a digit (exponent)")?;
        u64::try_from(&n).map_err(|_| syntax(start, "an exponent that fits in 64 bits"))
    }

    /// `nat ["/" nat]`; the sign is handled by the caller.
    fn parse_fraction(&mut self) -> Result<Rational, ParseError> {
        let num = self.parse_digits("a digit")?;
        let save = self.pos;
        self.skip_ws();
        if self.peek() == Some(b'/') {
            self.advance();
            self.skip_ws();
            let den_pos = self.pos;
            let den = self.parse_digits("a digit (denominator)")?;
            if den.is_zero() {
                return Err(ParseError::ZeroDenominator { position: den_pos });
            }
            Ok(Rational::new(num, den))
        } else {
            self.pos = save;
            Ok(Rational::from_int(num))
        }
    }

    /// One term: an optional signed coefficient, an optional `*`, an
    /// optional `t` power. At least a coefficient or a `t` must be present.
    fn parse_term(&mut self) -> Result<(u64, Rational), ParseError> {
        self.skip_ws();
        let mut negate = false;
        if self.peek() == Some(b'-') {
            negate = true;
            self.advance();
            self.skip_ws();
        }

        let mut coef: Option<Rational> = None;
        if matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            coef = Some(self.parse_fraction()?);
        }

        let mut saw_star = false;
        let save = self.pos;
        self.skip_ws();
        if coef.is_some() && self.peek() == Some(b'*') {
            saw_star = true;
            self.advance();
            self.skip_ws();
        }

        if self.peek() == Some(b't') {
            self.advance();
            let caret = self.pos;
            self.skip_ws();
            let exp = if self.peek() == Some(b'^') {
                self.advance();
                self.skip_ws();
                self.parse_exponent()?
            } else {
                self.pos = caret;
                1
            };
            let mut c = coef.unwrap_or_else(Rational::one);
            if negate {
                c = -c;
            }
            return Ok((exp, c));
        }

        if saw_star {
            return Err(syntax(self.pos, "`t` after `*`"));
        }
        self.pos = save;
        match coef {
            Some(c) => Ok((0, if negate { -c } else { c })),
            None => Err(syntax(self.pos, "a coefficient or `t`")),
        }
    }
}

/// Parses an expression into an exact series.
pub fn parse_series(src: &str) -> Result<TruncSeries, ParseError> {
    let mut p = Parser {
        src: src.as_bytes(),
        pos: 0,
    };
    let mut pairs = vec![p.parse_term()?];
    loop {
        p.skip_ws();
        if p.at_end() {
            break;
        }
        let sign_neg = match p.peek() {
            Some(b'+') => false,
            Some(b'-') => true,
            _ => return Err(syntax(p.pos, "`+`, `-`, or end of input")),
        };
        p.advance();
        let (e, c) = p.parse_term()?;
        pairs.push((e, if sign_neg { -c } else { c }));
    }
    Ok(TruncSeries::from_terms(Precision::Exact, pairs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_sample_notation() {
        let s = parse_series("t^12 + t^13 + 37/28 t^14").unwrap();
        assert_eq!(s.precision(), Precision::Exact);
        assert_eq!(s.coeff(12), Rational::one());
        assert_eq!(s.coeff(13), Rational::one());
        assert_eq!(s.coeff(14), Rational::new(37, 28));
        assert_eq!(s.term_count(), 3);
    }

    #[test]
    fn parses_negative_bare_terms() {
        let s = parse_series("-t^3").unwrap();
        assert_eq!(s.coeff(3), -Rational::one());
        assert_eq!(s.term_count(), 1);
    }

    #[test]
    fn rejects_double_caret_with_position() {
        assert_eq!(
            parse_series("t^^2"),
            Err(ParseError::SyntaxError {
                position: 2,
                expected: "a digit (exponent)".into()
            })
        );
    }

    #[test]
    fn rejects_zero_denominator() {
        assert!(matches!(
            parse_series("1/0"),
            Err(ParseError::ZeroDenominator { position: 2 })
        ));
        assert!(matches!(
            parse_series("t^2 + 3/0 t^4"),
            Err(ParseError::ZeroDenominator { .. })
        ));
    }

    #[test]
    fn sums_duplicate_exponents() {
        let s = parse_series("t^2 + 2*t^2 - t^2").unwrap();
        assert_eq!(s.coeff(2), Rational::from(2i64));
        let cancelled = parse_series("t^2 - t^2").unwrap();
        assert_eq!(cancelled, TruncSeries::zero_exact());
    }

    #[test]
    fn accepts_assorted_shapes() {
        for (src, exp, num, den) in [
            ("t", 1u64, 1i64, 1i64),
            ("5", 0, 5, 1),
            ("0", 0, 0, 1),
            ("  -  7/2  ", 0, -7, 2),
            ("3*t", 1, 3, 1),
            ("3 * t ^ 4", 4, 3, 1),
            ("- 5/3 t^2", 2, -5, 3),
        ] {
            let s = parse_series(src).unwrap_or_else(|e| panic!("{src}: {e}"));
            if num == 0 {
                assert_eq!(s.term_count(), 0, "{src}");
            } else {
                assert_eq!(s.coeff(exp), Rational::new(num, den), "{src}");
            }
        }
    }

    #[test]
    fn rejects_malformed_input() {
        for src in ["", "t^2 +", "2 3", "*t", "5*", "t^", "+", "3//4"] {
            assert!(
                matches!(parse_series(src), Err(ParseError::SyntaxError { .. })),
                "{src:?} should be a syntax error"
            );
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_exact_series() -> impl Strategy<Value = TruncSeries> {
            prop::collection::vec(
                (0u64..40, (-99i64..=99, 1i64..=99)),
                0..10,
            )
            .prop_map(|pairs| {
                TruncSeries::from_terms(
                    Precision::Exact,
                    pairs
                        .into_iter()
                        .map(|(e, (n, d))| (e, Rational::new(n, d))),
                )
            })
        }

        /// One grammar-valid rendering of a term, chosen among notational
        /// variants (with or without `*`, random spacing).
        fn arb_expression() -> impl Strategy<Value = String> {
            let term = (0u64..20, 1i64..=30, 1i64..=9, 0usize..4).prop_map(
                |(e, n, d, style)| {
                    let coef = if d == 1 {
                        format!("{n}")
                    } else {
                        format!("{n}/{d}")
                    };
                    match style {
                        0 => format!("{coef}*t^{e}"),
                        1 => format!("{coef} t^{e}"),
                        2 => format!("{coef} * t ^ {e}"),
                        _ => coef,
                    }
                },
            );
            (term.clone(), prop::collection::vec((prop::bool::ANY, term), 0..6)).prop_map(
                |(first, rest)| {
                    let mut out = first;
                    for (neg, t) in rest {
                        out.push_str(if neg { " - " } else { " + " });
                        out.push_str(&t);
                    }
                    out
                },
            )
        }

        proptest! {
            #[test]
            fn display_then_parse_is_identity(s in arb_exact_series()) {
                let reparsed = parse_series(&s.to_string()).unwrap();
                prop_assert_eq!(reparsed, s);
            }

            #[test]
            fn parse_render_parse_is_stable(src in arb_expression()) {
                let once = parse_series(&src).unwrap();
                let twice = parse_series(&once.to_string()).unwrap();
                prop_assert_eq!(once, twice);
            }
        }
    }
}
