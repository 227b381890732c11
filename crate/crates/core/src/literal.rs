//! Element literals.
//!
//! A literal is a signed sum of terms; each term is a product of an integer,
//! `u^s` (the residue generator) and `pi^n` or `t^n`. A trailing `O(pi^N)`
//! or `O(t^N)` sets the precision; without it the literal is exact.
//!
//! ```text
//! 17            -1 + 3*pi^2 + O(pi^10)
//! t^-3 + u*t^-1 + 1 + O(t^20)
//! ```

use num_bigint::BigInt;

use crate::element::{LocalElement, EXACT};
use crate::error::{Error, Result};
use crate::field::Field;

struct Cursor<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(' ') {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn fail<T>(&self, message: impl Into<String>, expected: &str) -> Result<T> {
        Err(Error::Parse {
            position: self.pos,
            message: message.into(),
            expected: expected.into(),
        })
    }

    fn integer(&mut self) -> Result<BigInt> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let sign_len = usize::from(rest.starts_with('-'));
        let digits = rest[sign_len..]
            .chars()
            .take_while(|c| c.is_ascii_digit())
            .count();
        if digits == 0 {
            return self.fail("expected an integer", "integer");
        }
        let text = &rest[..sign_len + digits];
        self.pos += text.len();
        Ok(text.parse().expect("digits"))
    }

    fn small(&mut self) -> Result<i64> {
        let at = self.pos;
        let n = self.integer()?;
        i64::try_from(n).or_else(|_| {
            Err(Error::Parse {
                position: at,
                message: "exponent out of range".into(),
                expected: "small integer".into(),
            })
        })
    }

    fn exponent(&mut self) -> Result<i64> {
        if self.eat("^") {
            self.small()
        } else {
            Ok(1)
        }
    }
}

/// Parse an element literal over `field`.
pub fn parse_element(field: &Field, text: &str) -> Result<LocalElement> {
    let var = if field.is_char_zero() { "pi" } else { "t" };
    let mut cur = Cursor { src: text, pos: 0 };
    let mut acc = LocalElement::zero(field);
    let mut prec = EXACT;
    let mut first = true;
    loop {
        let negate = if first {
            cur.eat("-")
        } else if cur.eat("+") {
            false
        } else if cur.eat("-") {
            true
        } else if cur.peek().is_none() {
            break;
        } else {
            return cur.fail("unexpected character", "`+`, `-` or end of input");
        };
        first = false;
        if cur.eat("O(") {
            if !cur.eat(var) {
                return cur.fail("precision term needs the uniformizer", var);
            }
            prec = cur.exponent()?;
            if !cur.eat(")") {
                return cur.fail("unclosed precision term", "`)`");
            }
            if cur.peek().is_some() {
                return cur.fail("precision term must come last", "end of input");
            }
            break;
        }
        let mut term = LocalElement::one(field);
        let mut factors = 0;
        loop {
            match cur.peek() {
                Some(c) if c.is_ascii_digit() => {
                    term = &term * &LocalElement::from_bigint(field, &cur.integer()?);
                }
                Some('u') => {
                    cur.eat("u");
                    let s = cur.exponent()?;
                    if s < 0 {
                        return cur.fail("negative power of u", "exponent >= 0");
                    }
                    let k = field.residue_field();
                    let g = k.pow(&k.generator(), s as u64);
                    term = &term * &LocalElement::lift(field, &g);
                }
                _ if cur.eat(var) => {
                    let n = cur.exponent()?;
                    term = &term * &LocalElement::uniformizer_pow(field, n)?;
                }
                _ => return cur.fail("expected a factor", &format!("integer, `u` or `{var}`")),
            }
            factors += 1;
            if !cur.eat("*") {
                break;
            }
        }
        debug_assert!(factors > 0);
        acc = if negate { &acc - &term } else { &acc + &term };
    }
    if first {
        return cur.fail("empty literal", "a term");
    }
    Ok(acc.with_precision(prec))
}
