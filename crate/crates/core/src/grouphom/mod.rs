//! Minimal chain complexes of cyclic p-groups, their tensor products, and
//! homology.
//!
//! The complex of `Z/p^a` has one generator `c_d` per degree with
//! `d(c_d) = p^a c_{d-1}` for even `d >= 2` and zero otherwise. Tensor
//! products use the Koszul sign `d(x*y) = dx*y + (-1)^|x| x*dy`, applied
//! left to right. Basis tensors are ordered lexicographically by degree tuple.

mod chain;

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

pub use chain::{render_elem, BasisElem, Chain};

use crate::error::{Error, Result};
use crate::exactlin::{self, big_pow, IntMatrix, ModMatrix};

pub const DEFAULT_MAX_DEGREE: u32 = 24;

/// Degree cap from `PSC_MAX_DEGREE`, default 24.
pub fn max_degree() -> u32 {
    std::env::var("PSC_MAX_DEGREE").ok().and_then(|s| s.trim().parse().ok()).unwrap_or(DEFAULT_MAX_DEGREE)
}

/// Reject degrees above [`max_degree`].
pub fn check_degree(d: u32) -> Result<()> {
    let cap = max_degree();
    if d > cap {
        return Err(Error::DegreeCap { degree: d, cap });
    }
    Ok(())
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut i = 2u64;
    while i.saturating_mul(i) <= p {
        if p.is_multiple_of(i) {
            return false;
        }
        i += 1;
    }
    true
}

/// An odd prime and exponents `a_1 <= ... <= a_n`, for the group
/// `Z/p^{a_1} x ... x Z/p^{a_n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GroupSpec {
    pub p: u64,
    pub alphas: Vec<u32>,
}

impl GroupSpec {
    /// Validated constructor: odd prime, nonempty, positive, sorted.
    pub fn new(p: u64, alphas: Vec<u32>) -> Result<Self> {
        let s = Self::from_factors(p, alphas)?;
        if s.alphas.is_empty() {
            return Err(Error::InvalidSpec("at least one factor required".into()));
        }
        if !s.alphas.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::InvalidSpec("exponents must be sorted ascending".into()));
        }
        Ok(s)
    }

    /// Factors in the given order, without the sorting requirement. Used for
    /// cross products and sub-products.
    pub fn from_factors(p: u64, alphas: Vec<u32>) -> Result<Self> {
        if p == 2 || !is_prime(p) {
            return Err(Error::OddPrimeRequired);
        }
        if alphas.contains(&0) {
            return Err(Error::InvalidSpec("exponents must be positive".into()));
        }
        if p.checked_pow(alphas.iter().copied().max().unwrap_or(1)).is_none() {
            return Err(Error::InvalidSpec("exponent too large".into()));
        }
        Ok(GroupSpec { p, alphas })
    }

    pub fn cyclic(p: u64, alpha: u32) -> Result<Self> {
        Self::new(p, vec![alpha])
    }

    pub fn n(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_sorted(&self) -> bool {
        self.alphas.windows(2).all(|w| w[0] <= w[1])
    }

    pub fn equal_exponents(&self) -> bool {
        self.alphas.windows(2).all(|w| w[0] == w[1])
    }

    pub fn min_alpha(&self) -> u32 {
        self.alphas.iter().copied().min().unwrap_or(1)
    }

    /// Sub-product on the given positions, in the given order.
    pub fn sub(&self, positions: &[usize]) -> GroupSpec {
        GroupSpec { p: self.p, alphas: positions.iter().map(|&i| self.alphas[i]).collect() }
    }

    pub fn concat(&self, other: &GroupSpec) -> Result<GroupSpec> {
        if self.p != other.p {
            return Err(Error::RingMismatch(format!("primes {} and {}", self.p, other.p)));
        }
        let mut alphas = self.alphas.clone();
        alphas.extend(&other.alphas);
        Ok(GroupSpec { p: self.p, alphas })
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.alphas.iter().map(|a| a.to_string()).collect();
        write!(f, "p={} alphas=({})", self.p, a.join(","))
    }
}

/// Coefficient ring: the integers or `Z/p^l`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ring {
    Integers,
    ModPrimePower(u32),
}

impl Ring {
    pub fn modulus(&self, p: u64) -> Option<BigInt> {
        match self {
            Ring::Integers => None,
            Ring::ModPrimePower(l) => Some(big_pow(p, *l)),
        }
    }

    pub fn reduce(&self, x: &BigInt, p: u64) -> BigInt {
        match self.modulus(p) {
            None => x.clone(),
            Some(q) => x.mod_floor(&q),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Ring::ModPrimePower(0) => Err(Error::Precondition("coefficient exponent must be positive".into())),
            _ => Ok(()),
        }
    }
}

impl fmt::Display for Ring {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ring::Integers => write!(f, "Z"),
            Ring::ModPrimePower(l) => write!(f, "Z/p^{l}"),
        }
    }
}

/// All degree tuples of length `n` summing to `d`, in lexicographic order.
pub fn basis(n: usize, d: u32) -> Vec<BasisElem> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fill(n, d, 0, &mut cur, &mut out);
    out
}

/// Degree tuples with every entry at least one.
pub fn reduced_basis(n: usize, d: u32) -> Vec<BasisElem> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fill(n, d, 1, &mut cur, &mut out);
    out
}

fn fill(n: usize, d: u32, lo: u32, cur: &mut Vec<u32>, out: &mut Vec<BasisElem>) {
    if cur.len() + 1 == n {
        if d >= lo {
            cur.push(d);
            out.push(cur.clone());
            cur.pop();
        }
        return;
    }
    if n == 0 {
        if d == 0 {
            out.push(Vec::new());
        }
        return;
    }
    let rest = (n - cur.len() - 1) as u32 * lo;
    if d < rest {
        return;
    }
    for x in lo..=d - rest {
        cur.push(x);
        fill(n, d - x, lo, cur, out);
        cur.pop();
    }
}

/// A basis list with position lookup.
#[derive(Clone, Debug)]
pub struct BasisIndex {
    elems: Vec<BasisElem>,
    pos: HashMap<BasisElem, usize>,
}

impl BasisIndex {
    pub fn new(elems: Vec<BasisElem>) -> Self {
        let pos = elems.iter().enumerate().map(|(i, e)| (e.clone(), i)).collect();
        BasisIndex { elems, pos }
    }

    pub fn full(n: usize, d: u32) -> Self {
        Self::new(basis(n, d))
    }

    pub fn reduced(n: usize, d: u32) -> Self {
        Self::new(reduced_basis(n, d))
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elems.is_empty()
    }

    pub fn elem(&self, i: usize) -> &BasisElem {
        &self.elems[i]
    }

    pub fn elems(&self) -> &[BasisElem] {
        &self.elems
    }

    pub fn position(&self, e: &[u32]) -> Option<usize> {
        self.pos.get(e).copied()
    }
}

/// Boundary of a single basis tensor as (target, coefficient) pairs.
pub fn boundary_terms(spec: &GroupSpec, e: &[u32]) -> Vec<(BasisElem, BigInt)> {
    let mut out = Vec::new();
    let mut prefix = 0u32;
    for (i, &di) in e.iter().enumerate() {
        if di >= 2 && di % 2 == 0 {
            let mut t = e.to_vec();
            t[i] -= 1;
            let mut x = big_pow(spec.p, spec.alphas[i]);
            if prefix % 2 == 1 {
                x = -x;
            }
            out.push((t, x));
        }
        prefix += di;
    }
    out
}

/// Integer matrix of the boundary from degree `d` to degree `d - 1`.
pub fn boundary_matrix_int(spec: &GroupSpec, d: u32) -> IntMatrix {
    let n = spec.n();
    let src = BasisIndex::full(n, d);
    if d == 0 {
        return IntMatrix::zeros(0, src.len());
    }
    let tgt = BasisIndex::full(n, d - 1);
    let mut m = IntMatrix::zeros(tgt.len(), src.len());
    for (j, e) in src.elems().iter().enumerate() {
        for (t, x) in boundary_terms(spec, e) {
            let i = tgt.position(&t).expect("boundary stays in basis");
            m.add_to(i, j, &x);
        }
    }
    m
}

/// Boundary matrix over the integers or over `Z/p^l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BoundaryMatrix {
    Int(IntMatrix),
    Mod(ModMatrix),
}

pub fn boundary_matrix(spec: &GroupSpec, ring: Ring, d: u32) -> Result<BoundaryMatrix> {
    ring.validate()?;
    Ok(match ring {
        Ring::Integers => BoundaryMatrix::Int(boundary_matrix_int(spec, d)),
        Ring::ModPrimePower(l) => BoundaryMatrix::Mod(boundary_matrix_mod(spec, l, d)),
    })
}

/// Boundary matrix reduced mod `p^l`.
pub fn boundary_matrix_mod(spec: &GroupSpec, exponent: u32, d: u32) -> ModMatrix {
    ModMatrix::from_int(spec.p, exponent, &boundary_matrix_int(spec, d))
}

/// Boundary of a chain.
pub fn boundary(c: &Chain) -> Chain {
    let mut out = Chain::zero(&c.spec, c.ring, c.degree.saturating_sub(1));
    if c.degree == 0 {
        return out;
    }
    for (e, x) in c.terms() {
        for (t, y) in boundary_terms(&c.spec, e) {
            out.add_term(t, &(x * y)).expect("shape preserved");
        }
    }
    out
}

pub fn is_cycle(c: &Chain) -> bool {
    boundary(c).is_zero()
}

/// Invariant factors and representative cycles of one homology group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologySummary {
    pub degree: u32,
    pub invariant_factors: Vec<BigInt>,
    pub representatives: Vec<Chain>,
}

impl HomologySummary {
    /// Group order, `None` when there is a free summand.
    pub fn order(&self) -> Option<BigInt> {
        if self.invariant_factors.iter().any(|x| x.is_zero()) {
            return None;
        }
        Some(self.invariant_factors.iter().fold(BigInt::one(), |a, b| a * b))
    }
}

/// Homology of the tensor complex in degree `d` with coefficients in `ring`.
pub fn homology(spec: &GroupSpec, d: u32, ring: Ring) -> Result<HomologySummary> {
    ring.validate()?;
    let n = spec.n();
    let idx = BasisIndex::full(n, d);
    let d_out = boundary_matrix_int(spec, d);
    let d_in = boundary_matrix_int(spec, d + 1);
    let q = match ring {
        Ring::Integers => exactlin::homology_quotient(&d_in, &d_out)?,
        Ring::ModPrimePower(l) => {
            let modulus = big_pow(spec.p, l);
            let dim = idx.len();
            let scalar = IntMatrix::identity(dim).scaled(&modulus);
            let kernel_gens: Vec<Vec<BigInt>> = exactlin::kernel_mod(&ModMatrix::from_int(spec.p, l, &d_out))
                .into_iter()
                .map(|v| v.into_iter().map(BigInt::from).collect())
                .collect();
            let k = IntMatrix::from_columns(dim, &kernel_gens).hcat(&scalar)?;
            let lattice = exactlin::image_basis_int(&k);
            let sub = d_in.hcat(&scalar)?;
            exactlin::lattice_quotient(&lattice, &sub)?
        }
    };
    let representatives = q.representatives.iter().map(|v| Chain::from_vector(spec, ring, d, &idx, v)).collect();
    Ok(HomologySummary { degree: d, invariant_factors: q.invariants, representatives })
}

/// Split a chain by the set of positions carrying positive degree. Keys are
/// sorted 0-based position lists.
pub fn reduced_components(c: &Chain) -> BTreeMap<Vec<usize>, Chain> {
    let mut out: BTreeMap<Vec<usize>, Chain> = BTreeMap::new();
    for (e, x) in c.terms() {
        let key: Vec<usize> = e.iter().enumerate().filter(|(_, &d)| d > 0).map(|(i, _)| i).collect();
        out.entry(key)
            .or_insert_with(|| Chain::zero(&c.spec, c.ring, c.degree))
            .add_term(e.clone(), x)
            .expect("same shape");
    }
    out
}

/// Integral homology of one cyclic factor as a list of cyclic orders (0 = Z).
fn cyclic_homology(p: u64, alpha: u32, d: u32) -> Vec<BigInt> {
    if d == 0 {
        vec![BigInt::zero()]
    } else if d % 2 == 1 {
        vec![big_pow(p, alpha)]
    } else {
        vec![]
    }
}

fn tensor_cyclic(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() {
        b.clone()
    } else if b.is_zero() {
        a.clone()
    } else {
        a.gcd(b)
    }
}

/// Order of `H_d` by the Kunneth formula from the cyclic closed form, with
/// `0` for an infinite group. Independent of boundary matrices.
pub fn kunneth_order_oracle(spec: &GroupSpec, d: u32) -> BigInt {
    // groups[k] = cyclic decomposition of H_k of the partial product
    let mut groups: Vec<Vec<BigInt>> = (0..=d).map(|k| cyclic_homology(spec.p, spec.alphas[0], k)).collect();
    for &alpha in &spec.alphas[1..] {
        let right: Vec<Vec<BigInt>> = (0..=d).map(|k| cyclic_homology(spec.p, alpha, k)).collect();
        let mut next = vec![Vec::new(); d as usize + 1];
        for total in 0..=d as usize {
            for i in 0..=total {
                for a in &groups[i] {
                    for b in &right[total - i] {
                        next[total].push(tensor_cyclic(a, b));
                    }
                }
            }
            if total >= 1 {
                for i in 0..total {
                    for a in &groups[i] {
                        for b in &right[total - 1 - i] {
                            if !a.is_zero() && !b.is_zero() {
                                next[total].push(a.gcd(b));
                            }
                        }
                    }
                }
            }
            next[total].retain(|x| !x.is_one());
        }
        groups = next;
    }
    let g = &groups[d as usize];
    if g.iter().any(|x| x.is_zero()) {
        return BigInt::zero();
    }
    g.iter().fold(BigInt::one(), |a, b| a * b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(p: u64, a: &[u32]) -> GroupSpec {
        GroupSpec::new(p, a.to_vec()).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert_eq!(GroupSpec::new(2, vec![1]), Err(Error::OddPrimeRequired));
        assert_eq!(GroupSpec::new(9, vec![1]), Err(Error::OddPrimeRequired));
        assert!(GroupSpec::new(3, vec![2, 1]).is_err());
        assert!(GroupSpec::new(3, vec![]).is_err());
        assert!(GroupSpec::new(3, vec![1, 2]).is_ok());
    }

    #[test]
    fn basis_order_is_lexicographic() {
        assert_eq!(basis(2, 2), vec![vec![0, 2], vec![1, 1], vec![2, 0]]);
        assert_eq!(reduced_basis(2, 3), vec![vec![1, 2], vec![2, 1]]);
        assert_eq!(basis(1, 4), vec![vec![4]]);
        assert_eq!(basis(3, 0), vec![vec![0, 0, 0]]);
    }

    #[test]
    fn boundary_examples() {
        let s = spec(3, &[1]);
        let m = boundary_matrix_int(&s, 2);
        assert_eq!(m.to_dense(), vec![vec![BigInt::from(3)]]);
        assert!(boundary_matrix_int(&s, 3).is_zero());
        let s2 = spec(3, &[1, 1]);
        let m = boundary_matrix_int(&s2, 2);
        // columns: c0c2, c1c1, c2c0; rows: c0c1, c1c0
        assert_eq!(m.get(0, 0), BigInt::from(3));
        assert_eq!(m.get(1, 2), BigInt::from(3));
        assert!(m.get(0, 1).is_zero() && m.get(1, 1).is_zero());
    }

    #[test]
    fn homology_examples() {
        let s = spec(3, &[1]);
        let h = homology(&s, 3, Ring::Integers).unwrap();
        assert_eq!(h.invariant_factors, vec![BigInt::from(3)]);
        assert_eq!(h.representatives[0].to_string(), "c3");
        assert!(homology(&s, 4, Ring::Integers).unwrap().invariant_factors.is_empty());
        let s2 = spec(3, &[1, 1]);
        let h = homology(&s2, 2, Ring::Integers).unwrap();
        assert_eq!(h.invariant_factors, vec![BigInt::from(3)]);
        assert_eq!(h.representatives[0].to_string(), "c1*c1");
        assert_eq!(homology(&s2, 0, Ring::Integers).unwrap().invariant_factors, vec![BigInt::zero()]);
    }

    #[test]
    fn kunneth_examples() {
        assert_eq!(kunneth_order_oracle(&spec(3, &[1]), 5), BigInt::from(3));
        assert_eq!(kunneth_order_oracle(&spec(3, &[1, 2]), 0), BigInt::zero());
        assert_eq!(kunneth_order_oracle(&spec(3, &[1, 1]), 3), BigInt::from(27));
        assert_eq!(kunneth_order_oracle(&spec(3, &[1, 1]), 2), BigInt::from(3));
    }

    #[test]
    fn mod_homology_of_cyclic_group() {
        let s = spec(3, &[1]);
        for d in 0..6 {
            let h = homology(&s, d, Ring::ModPrimePower(1)).unwrap();
            assert_eq!(h.invariant_factors, vec![BigInt::from(3)], "degree {d}");
        }
    }

    #[test]
    fn components_split_and_reassemble() {
        let s = spec(3, &[1, 1]);
        let c =
            Chain::from_terms(&s, Ring::Integers, 1, [(vec![1, 0], BigInt::from(1)), (vec![0, 1], BigInt::from(1))])
                .unwrap();
        let comps = reduced_components(&c);
        assert_eq!(comps.keys().cloned().collect::<Vec<_>>(), vec![vec![0], vec![1]]);
        let mut sum = Chain::zero(&s, Ring::Integers, 1);
        for v in comps.values() {
            sum = sum.add(v).unwrap();
        }
        assert_eq!(sum, c);
    }
}
