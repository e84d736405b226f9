//! Parsers for the textual inputs: defining polynomials and the omega selector.

use refram::tower::OmegaChoice;
use thiserror::Error;

/// Highest degree accepted from user input.
pub const MAX_INPUT_DEGREE: usize = 64;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("empty input")]
    Empty,
    #[error("unexpected {found:?} at byte {at}")]
    Unexpected { found: char, at: usize },
    #[error("unexpected end of input")]
    Truncated,
    #[error("integer out of range")]
    Overflow,
    #[error("degree {0} exceeds the supported maximum")]
    DegreeTooLarge(u64),
}

struct Cursor<'a> {
    src: &'a str,
    at: usize,
}

impl<'a> Cursor<'a> {
    fn peek(&self) -> Option<char> {
        self.src[self.at..].chars().next()
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.peek() {
            if !c.is_whitespace() {
                break;
            }
            self.at += c.len_utf8();
        }
    }

    fn eat(&mut self, c: char) -> bool {
        self.skip_ws();
        if self.peek() == Some(c) {
            self.at += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn number(&mut self) -> Result<Option<u64>, ParseError> {
        self.skip_ws();
        let start = self.at;
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.at += 1;
        }
        if start == self.at {
            return Ok(None);
        }
        self.src[start..self.at].parse().map(Some).map_err(|_| ParseError::Overflow)
    }

    fn unexpected(&self) -> ParseError {
        match self.peek() {
            Some(found) => ParseError::Unexpected { found, at: self.at },
            None => ParseError::Truncated,
        }
    }
}

/// Parses an integer polynomial in `var`, such as `x^2 + 2x + 2` or `3*x - 1`,
/// into coefficients from low to high degree.
pub fn parse_polynomial(src: &str, var: char) -> Result<Vec<i64>, ParseError> {
    let mut cur = Cursor { src, at: 0 };
    cur.skip_ws();
    if cur.peek().is_none() {
        return Err(ParseError::Empty);
    }
    let mut coeffs: Vec<i64> = Vec::new();
    let mut first = true;
    loop {
        cur.skip_ws();
        if cur.peek().is_none() {
            break;
        }
        let mut sign = 1i64;
        if cur.eat('-') {
            sign = -1;
        } else if !cur.eat('+') && !first {
            return Err(cur.unexpected());
        }
        first = false;
        let coeff = cur.number()?;
        let has_var = if coeff.is_some() {
            let star = cur.eat('*');
            let v = cur.eat(var);
            if star && !v {
                return Err(cur.unexpected());
            }
            v
        } else {
            cur.eat(var)
        };
        if coeff.is_none() && !has_var {
            return Err(cur.unexpected());
        }
        let degree = if has_var {
            if cur.eat('^') {
                cur.number()?.ok_or_else(|| cur.unexpected())?
            } else {
                1
            }
        } else {
            0
        };
        if degree as usize > MAX_INPUT_DEGREE || degree > MAX_INPUT_DEGREE as u64 {
            return Err(ParseError::DegreeTooLarge(degree));
        }
        let c = i64::try_from(coeff.unwrap_or(1)).map_err(|_| ParseError::Overflow)? * sign;
        let d = degree as usize;
        if coeffs.len() <= d {
            coeffs.resize(d + 1, 0);
        }
        coeffs[d] = coeffs[d].checked_add(c).ok_or(ParseError::Overflow)?;
    }
    while coeffs.len() > 1 && coeffs.last() == Some(&0) {
        coeffs.pop();
    }
    Ok(coeffs)
}

/// Reduces integer coefficients into `[0, p)`.
pub fn reduce_mod(coeffs: &[i64], p: u64) -> Vec<u64> {
    coeffs.iter().map(|&c| c.rem_euclid(p as i64) as u64).collect()
}

/// Parses a comma-separated list of non-negative integers, optionally in brackets.
pub fn parse_list(src: &str) -> Result<Vec<u64>, ParseError> {
    let mut cur = Cursor { src, at: 0 };
    let bracketed = cur.eat('[');
    let mut out = Vec::new();
    loop {
        let n = cur.number()?.ok_or_else(|| cur.unexpected())?;
        out.push(n);
        if out.len() > MAX_INPUT_DEGREE {
            return Err(ParseError::DegreeTooLarge(out.len() as u64));
        }
        if !cur.eat(',') {
            break;
        }
    }
    if bracketed && !cur.eat(']') {
        return Err(cur.unexpected());
    }
    cur.skip_ws();
    if cur.peek().is_some() {
        return Err(cur.unexpected());
    }
    Ok(out)
}

/// `generator`, a coefficient list such as `1,1` or `[0, 1]`, or a
/// polynomial in `u` such as `u + 1`.
pub fn parse_omega(src: &str) -> Result<OmegaChoice, ParseError> {
    let s = src.trim();
    if s.is_empty() {
        return Err(ParseError::Empty);
    }
    if s.eq_ignore_ascii_case("generator") || s.eq_ignore_ascii_case("gen") {
        return Ok(OmegaChoice::Generator);
    }
    if s.contains('u') {
        let coeffs = parse_polynomial(s, 'u')?;
        if coeffs.iter().any(|&c| c < 0) {
            return Err(ParseError::Unexpected { found: '-', at: s.find('-').unwrap_or(0) });
        }
        return Ok(OmegaChoice::Coeffs(coeffs.into_iter().map(|c| c as u64).collect()));
    }
    parse_list(s).map(OmegaChoice::Coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials() {
        assert_eq!(parse_polynomial("x^2+2x+2", 'x').unwrap(), vec![2, 2, 1]);
        assert_eq!(parse_polynomial(" x^3 + 2*x + 1 ", 'x').unwrap(), vec![1, 2, 0, 1]);
        assert_eq!(parse_polynomial("-x + 3 - 1", 'x').unwrap(), vec![2, -1]);
        assert_eq!(parse_polynomial("7", 'x').unwrap(), vec![7]);
        assert_eq!(reduce_mod(&[2, -1], 3), vec![2, 2]);
        assert_eq!(parse_polynomial("", 'x'), Err(ParseError::Empty));
        assert!(parse_polynomial("x^", 'x').is_err());
        assert!(parse_polynomial("2*", 'x').is_err());
        assert!(parse_polynomial("x x", 'x').is_err());
        assert!(parse_polynomial("x^99", 'x').is_err());
        assert!(parse_polynomial("99999999999999999999", 'x').is_err());
    }

    #[test]
    fn omega_selectors() {
        assert_eq!(parse_omega("generator").unwrap(), OmegaChoice::Generator);
        assert_eq!(parse_omega("1,1").unwrap(), OmegaChoice::Coeffs(vec![1, 1]));
        assert_eq!(parse_omega("[0, 1]").unwrap(), OmegaChoice::Coeffs(vec![0, 1]));
        assert_eq!(parse_omega("u+1").unwrap(), OmegaChoice::Coeffs(vec![1, 1]));
        assert_eq!(parse_omega("2u").unwrap(), OmegaChoice::Coeffs(vec![0, 2]));
        assert!(parse_omega("").is_err());
        assert!(parse_omega("[1,2").is_err());
        assert!(parse_omega("1,,2").is_err());
        assert!(parse_omega("u-1").is_err());
    }
}
