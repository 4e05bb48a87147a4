use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::{GroupSpec, Ring};
use crate::error::{Error, Result};

/// Degree tuple `(d_1, ..., d_n)` naming the basis tensor `c_{d_1} x ... x c_{d_n}`.
pub type BasisElem = Vec<u32>;

/// Homogeneous sparse linear combination of basis tensors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "ChainRepr", try_from = "ChainRepr")]
pub struct Chain {
    pub spec: GroupSpec,
    pub ring: Ring,
    pub degree: u32,
    terms: BTreeMap<BasisElem, BigInt>,
}

impl Chain {
    pub fn zero(spec: &GroupSpec, ring: Ring, degree: u32) -> Self {
        Chain { spec: spec.clone(), ring, degree, terms: BTreeMap::new() }
    }

    pub fn basis(spec: &GroupSpec, ring: Ring, elem: BasisElem) -> Result<Self> {
        let degree = elem.iter().sum();
        let mut c = Chain::zero(spec, ring, degree);
        c.add_term(elem, &BigInt::one())?;
        Ok(c)
    }

    pub fn from_terms<I>(spec: &GroupSpec, ring: Ring, degree: u32, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (BasisElem, BigInt)>,
    {
        let mut c = Chain::zero(spec, ring, degree);
        for (e, x) in terms {
            c.add_term(e, &x)?;
        }
        Ok(c)
    }

    pub fn n(&self) -> usize {
        self.spec.n()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&BasisElem, &BigInt)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: &[u32]) -> BigInt {
        self.terms.get(e).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn add_term(&mut self, elem: BasisElem, x: &BigInt) -> Result<()> {
        if elem.len() != self.spec.n() {
            return Err(Error::Dimension(format!(
                "basis tensor of length {} in a spec with {} factors",
                elem.len(),
                self.spec.n()
            )));
        }
        let deg: u32 = elem.iter().sum();
        if deg != self.degree {
            return Err(Error::Dimension(format!("term of degree {deg} in a chain of degree {}", self.degree)));
        }
        if x.is_zero() {
            return Ok(());
        }
        let cur = self.terms.remove(&elem).unwrap_or_else(BigInt::zero);
        let v = self.ring.reduce(&(cur + x), self.spec.p);
        if !v.is_zero() {
            self.terms.insert(elem, v);
        }
        Ok(())
    }

    fn check_compatible(&self, other: &Chain) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::Dimension(format!("specs differ: {} vs {}", self.spec, other.spec)));
        }
        if self.ring != other.ring {
            return Err(Error::RingMismatch(format!("{} vs {}", self.ring, other.ring)));
        }
        if self.degree != other.degree && !self.is_zero() && !other.is_zero() {
            return Err(Error::Dimension(format!("degrees differ: {} vs {}", self.degree, other.degree)));
        }
        Ok(())
    }

    pub fn add(&self, other: &Chain) -> Result<Chain> {
        self.add_scaled(other, &BigInt::one())
    }

    pub fn sub(&self, other: &Chain) -> Result<Chain> {
        self.add_scaled(other, &-BigInt::one())
    }

    /// `self + k * other`
    pub fn add_scaled(&self, other: &Chain, k: &BigInt) -> Result<Chain> {
        self.check_compatible(other)?;
        let mut out = if self.is_zero() && self.degree != other.degree {
            Chain::zero(&self.spec, self.ring, other.degree)
        } else {
            self.clone()
        };
        for (e, x) in &other.terms {
            out.add_term(e.clone(), &(x * k))?;
        }
        Ok(out)
    }

    pub fn scale(&self, k: &BigInt) -> Chain {
        let mut out = Chain::zero(&self.spec, self.ring, self.degree);
        for (e, x) in &self.terms {
            out.add_term(e.clone(), &(x * k)).expect("same shape");
        }
        out
    }

    pub fn neg(&self) -> Chain {
        self.scale(&-BigInt::one())
    }

    /// Reinterpret coefficients in another ring (reduction from Z, or between
    /// compatible prime powers).
    pub fn to_ring(&self, ring: Ring) -> Chain {
        let mut out = Chain::zero(&self.spec, ring, self.degree);
        for (e, x) in &self.terms {
            out.add_term(e.clone(), x).expect("same shape");
        }
        out
    }

    /// Lift modular residues to integers in the symmetric range.
    pub fn lift_symmetric(&self) -> Chain {
        let mut out = Chain::zero(&self.spec, Ring::Integers, self.degree);
        let q = self.ring.modulus(self.spec.p);
        for (e, x) in &self.terms {
            let v = match &q {
                Some(q) => {
                    let r = x.mod_floor(q);
                    if &r * 2 > *q {
                        r - q
                    } else {
                        r
                    }
                }
                None => x.clone(),
            };
            out.add_term(e.clone(), &v).expect("same shape");
        }
        out
    }

    /// Coordinates in the given basis list; errors on terms outside it.
    pub fn to_vector(&self, index: &super::BasisIndex) -> Result<Vec<BigInt>> {
        let mut v = vec![BigInt::zero(); index.len()];
        for (e, x) in &self.terms {
            let i = index
                .position(e)
                .ok_or_else(|| Error::Dimension(format!("basis tensor {} outside the target basis", render_elem(e))))?;
            v[i] = x.clone();
        }
        Ok(v)
    }

    pub fn from_vector(spec: &GroupSpec, ring: Ring, degree: u32, index: &super::BasisIndex, v: &[BigInt]) -> Chain {
        let mut c = Chain::zero(spec, ring, degree);
        for (i, x) in v.iter().enumerate() {
            c.add_term(index.elem(i).clone(), x).expect("basis matches spec");
        }
        c
    }

    pub fn map_terms<F>(&self, mut f: F) -> Chain
    where
        F: FnMut(&BasisElem, &BigInt) -> Option<(BasisElem, BigInt)>,
    {
        let mut out = Chain::zero(&self.spec, self.ring, self.degree);
        for (e, x) in &self.terms {
            if let Some((e2, x2)) = f(e, x) {
                out.add_term(e2, &x2).expect("shape preserved");
            }
        }
        out
    }

    /// Keep only the terms satisfying the predicate.
    pub fn filter<F: Fn(&BasisElem) -> bool>(&self, keep: F) -> Chain {
        let mut out = self.clone();
        out.terms.retain(|e, _| keep(e));
        out
    }

    /// Same coefficients viewed in another spec with the same number of factors.
    pub fn with_spec(&self, spec: &GroupSpec) -> Result<Chain> {
        if spec.n() != self.spec.n() || spec.p != self.spec.p {
            return Err(Error::Dimension("respec requires equal factor count and prime".into()));
        }
        let mut c = self.clone();
        c.spec = spec.clone();
        Ok(c)
    }
}

/// Serialized form: coefficients as decimal strings.
#[derive(Serialize, Deserialize)]
struct ChainRepr {
    spec: GroupSpec,
    ring: Ring,
    degree: u32,
    text: String,
    terms: Vec<(BasisElem, String)>,
}

impl From<Chain> for ChainRepr {
    fn from(c: Chain) -> Self {
        ChainRepr {
            text: c.to_string(),
            terms: c.terms.iter().map(|(e, x)| (e.clone(), x.to_string())).collect(),
            spec: c.spec,
            ring: c.ring,
            degree: c.degree,
        }
    }
}

impl TryFrom<ChainRepr> for Chain {
    type Error = Error;

    fn try_from(r: ChainRepr) -> Result<Chain> {
        let mut c = Chain::zero(&r.spec, r.ring, r.degree);
        for (e, x) in r.terms {
            let v: BigInt = x.parse().map_err(|_| Error::Parse(format!("bad coefficient {x}")))?;
            c.add_term(e, &v)?;
        }
        Ok(c)
    }
}

pub fn render_elem(e: &[u32]) -> String {
    e.iter().map(|d| format!("c{d}")).collect::<Vec<_>>().join("*")
}

impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (i, (e, x)) in self.terms.iter().enumerate() {
            let neg = x.is_negative();
            let mag = x.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            write!(f, "{}", render_elem(e))?;
        }
        Ok(())
    }
}
