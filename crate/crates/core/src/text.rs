//! Text form of chains: `3*c1*c2 - c2*c1`, with `T(c1,c5)` expanding to the
//! Toda cycle on the positions it covers.

use num_bigint::BigInt;
use num_traits::One;

use crate::chainops;
use crate::cycles::{toda_cycle, TodaSpec};
use crate::error::{Error, Result};
use crate::grouphom::{Chain, GroupSpec, Ring};

struct Lexer<'a> {
    s: &'a [u8],
    i: usize,
}

impl<'a> Lexer<'a> {
    fn skip_ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn digits(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.i;
        while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
            self.i += 1;
        }
        if start == self.i {
            return Err(self.error("expected digits"));
        }
        Ok(String::from_utf8_lossy(&self.s[start..self.i]).into_owned())
    }

    fn error(&self, msg: &str) -> Error {
        Error::Parse(format!("{msg} at offset {}", self.i))
    }
}

enum Factor {
    Gen(u32),
    Toda(Vec<u32>),
}

impl Factor {
    fn width(&self) -> usize {
        match self {
            Factor::Gen(_) => 1,
            Factor::Toda(g) => g.len(),
        }
    }
}

fn gen(lx: &mut Lexer) -> Result<u32> {
    if !lx.eat(b'c') {
        return Err(lx.error("expected generator 'c<degree>'"));
    }
    lx.digits()?.parse().map_err(|_| lx.error("degree out of range"))
}

fn factor(lx: &mut Lexer) -> Result<Factor> {
    if lx.eat(b'T') {
        lx.expect(b'(')?;
        let mut g = vec![gen(lx)?];
        while lx.eat(b',') {
            g.push(gen(lx)?);
        }
        lx.expect(b')')?;
        Ok(Factor::Toda(g))
    } else {
        Ok(Factor::Gen(gen(lx)?))
    }
}

fn term(lx: &mut Lexer) -> Result<(BigInt, Vec<Factor>)> {
    let mut coeff = BigInt::one();
    if lx.peek().is_some_and(|c| c.is_ascii_digit()) {
        coeff = lx.digits()?.parse().expect("digits");
        if !lx.eat(b'*') {
            return Err(lx.error("expected '*' after coefficient"));
        }
    }
    let mut fs = vec![factor(lx)?];
    while lx.eat(b'*') {
        fs.push(factor(lx)?);
    }
    Ok((coeff, fs))
}

fn realize(spec: &GroupSpec, ring: Ring, fs: &[Factor]) -> Result<Chain> {
    let width: usize = fs.iter().map(Factor::width).sum();
    if width != spec.n() {
        return Err(Error::Parse(format!("term covers {width} factors, group has {}", spec.n())));
    }
    let mut pos = 0;
    let mut acc: Option<Chain> = None;
    for f in fs {
        let sub = spec.sub(&(pos..pos + f.width()).collect::<Vec<_>>());
        let c = match f {
            Factor::Gen(d) => Chain::basis(&sub, Ring::Integers, vec![*d])?,
            Factor::Toda(g) => {
                if g.iter().any(|d| d % 2 == 0) {
                    return Err(Error::Parse("Toda entries must be odd generators".into()));
                }
                let t = TodaSpec::new(spec.p, sub.alphas.clone(), g.iter().map(|d| d.div_ceil(2)).collect())?;
                toda_cycle(&t)?
            }
        };
        pos += f.width();
        acc = Some(match acc {
            None => c,
            Some(a) => chainops::cross(&a, &c)?,
        });
    }
    Ok(acc.expect("nonempty term").with_spec(spec)?.to_ring(ring))
}

/// Parse a chain over `spec` with coefficients in `ring`.
pub fn parse_chain(spec: &GroupSpec, ring: Ring, text: &str) -> Result<Chain> {
    let mut lx = Lexer { s: text.as_bytes(), i: 0 };
    if lx.peek() == Some(b'0') {
        let save = lx.i;
        lx.i += 1;
        if lx.peek().is_none() {
            return Ok(Chain::zero(spec, ring, 0));
        }
        lx.i = save;
    }
    let mut sign = if lx.eat(b'-') {
        -1
    } else {
        lx.eat(b'+');
        1
    };
    let mut out: Option<Chain> = None;
    loop {
        let (k, fs) = term(&mut lx)?;
        let c = realize(spec, ring, &fs)?.scale(&(k * sign));
        out = Some(match out {
            None => c,
            Some(a) => a.add(&c)?,
        });
        if lx.eat(b'+') {
            sign = 1;
        } else if lx.eat(b'-') {
            sign = -1;
        } else {
            break;
        }
    }
    if lx.peek().is_some() {
        return Err(lx.error("unexpected trailing input"));
    }
    Ok(out.expect("at least one term"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_terms_and_toda_blocks() {
        let s = GroupSpec::new(3, vec![1, 1]).unwrap();
        let c = parse_chain(&s, Ring::Integers, "T(c1,c5)").unwrap();
        assert_eq!(c.to_string(), "c1*c6 + c2*c5");
        let c = parse_chain(&s, Ring::Integers, " -2*c1*c1 + c2 * c0 - c2*c0").unwrap();
        assert_eq!(c.to_string(), "-2*c1*c1");
        let s3 = GroupSpec::new(3, vec![1, 2, 3]).unwrap();
        let c = parse_chain(&s3, Ring::Integers, "c1*T(c1,c1)").unwrap();
        assert_eq!(c.to_string(), "c1*c1*c2 + 3*c1*c2*c1");
        assert!(parse_chain(&s, Ring::Integers, "c1").is_err());
        assert!(parse_chain(&s, Ring::Integers, "c1*c1 +").is_err());
        assert!(parse_chain(&s, Ring::Integers, "0").unwrap().is_zero());
    }
}
