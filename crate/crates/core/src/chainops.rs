//! Chain-level operations: induced maps of homomorphisms, the diagonal, cross
//! products, the Bockstein and the higher mod-p derivations.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactlin::{self, big_pow, IntMatrix, ModMatrix};
use crate::grouphom::{self, BasisElem, BasisIndex, Chain, GroupSpec, Ring};

/// Homomorphism `Z/p^a -> Z/p^b` sending the generator to `multiplier` times
/// the generator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CyclicHom {
    pub p: u64,
    pub source: u32,
    pub target: u32,
    pub multiplier: u64,
}

impl CyclicHom {
    /// Requires `p^target | multiplier * p^source`.
    pub fn new(p: u64, source: u32, target: u32, multiplier: u64) -> Result<Self> {
        let h = CyclicHom { p, source, target, multiplier };
        h.check()?;
        Ok(h)
    }

    pub fn check(&self) -> Result<()> {
        GroupSpec::from_factors(self.p, vec![self.source, self.target])?;
        if self.multiplier == 0 {
            return Err(Error::Precondition("multiplier must be positive".into()));
        }
        let v = exactlin::valuation(&BigInt::from(self.multiplier), self.p).unwrap_or(0);
        if self.target > self.source + v {
            return Err(Error::Precondition(format!(
                "homomorphism Z/{p}^{} -> Z/{p}^{} with multiplier {} is not well defined",
                self.source,
                self.target,
                self.multiplier,
                p = self.p
            )));
        }
        Ok(())
    }

    /// `multiplier * p^(source - target)`, an integer by admissibility.
    pub fn ratio(&self) -> BigInt {
        let num = BigInt::from(self.multiplier) * big_pow(self.p, self.source);
        num / big_pow(self.p, self.target)
    }

    /// Scalar by which the induced chain map acts on `c_d`.
    pub fn coefficient(&self, d: u32) -> BigInt {
        if d == 0 {
            return BigInt::one();
        }
        let r = self.ratio();
        let m = d.div_ceil(2);
        if d.is_multiple_of(2) {
            num_traits::pow(r, m as usize)
        } else {
            BigInt::from(self.multiplier) * num_traits::pow(r, (m - 1) as usize)
        }
    }

    /// `next` after `self`.
    pub fn then(&self, next: &CyclicHom) -> Result<CyclicHom> {
        if self.p != next.p || self.target != next.source {
            return Err(Error::Dimension("homomorphisms are not composable".into()));
        }
        let m = self
            .multiplier
            .checked_mul(next.multiplier)
            .ok_or_else(|| Error::Unsupported("multiplier overflow".into()))?;
        CyclicHom::new(self.p, self.source, next.target, m)
    }
}

/// A linear map between graded pieces in the canonical lexicographic bases.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OpMatrix {
    pub spec_in: GroupSpec,
    pub spec_out: GroupSpec,
    pub ring_in: Ring,
    pub ring_out: Ring,
    pub degree_in: u32,
    pub degree_out: u32,
    pub matrix: IntMatrix,
}

impl OpMatrix {
    fn from_terms<F>(
        spec_in: &GroupSpec,
        spec_out: &GroupSpec,
        rings: (Ring, Ring),
        degrees: (u32, u32),
        mut f: F,
    ) -> Result<OpMatrix>
    where
        F: FnMut(&[u32]) -> Result<Vec<(BasisElem, BigInt)>>,
    {
        let src = BasisIndex::full(spec_in.n(), degrees.0);
        let tgt = BasisIndex::full(spec_out.n(), degrees.1);
        let mut m = IntMatrix::zeros(tgt.len(), src.len());
        for (j, e) in src.elems().iter().enumerate() {
            for (t, x) in f(e)? {
                let i = tgt.position(&t).ok_or_else(|| Error::Dimension("image outside target basis".into()))?;
                let cur = m.get(i, j);
                m.set(i, j, rings.1.reduce(&(cur + x), spec_out.p));
            }
        }
        Ok(OpMatrix {
            spec_in: spec_in.clone(),
            spec_out: spec_out.clone(),
            ring_in: rings.0,
            ring_out: rings.1,
            degree_in: degrees.0,
            degree_out: degrees.1,
            matrix: m,
        })
    }

    pub fn source_basis(&self) -> BasisIndex {
        BasisIndex::full(self.spec_in.n(), self.degree_in)
    }

    pub fn target_basis(&self) -> BasisIndex {
        BasisIndex::full(self.spec_out.n(), self.degree_out)
    }

    pub fn apply(&self, c: &Chain) -> Result<Chain> {
        if c.spec != self.spec_in {
            return Err(Error::Dimension(format!("chain lives over {}, map expects {}", c.spec, self.spec_in)));
        }
        if c.degree != self.degree_in && !c.is_zero() {
            return Err(Error::Dimension(format!("chain of degree {}, map expects {}", c.degree, self.degree_in)));
        }
        let v = c.to_vector(&self.source_basis())?;
        let w = self.matrix.mul_vec(&v)?;
        Ok(Chain::from_vector(&self.spec_out, self.ring_out, self.degree_out, &self.target_basis(), &w))
    }

    /// `next` after `self`.
    pub fn then(&self, next: &OpMatrix) -> Result<OpMatrix> {
        if self.spec_out != next.spec_in || self.degree_out != next.degree_in {
            return Err(Error::Dimension("maps are not composable".into()));
        }
        let prod = next.matrix.mul(&self.matrix)?;
        let mut m = IntMatrix::zeros(prod.rows, prod.cols);
        for (&(i, j), x) in prod.entries() {
            m.set(i, j, next.ring_out.reduce(x, next.spec_out.p));
        }
        Ok(OpMatrix {
            spec_in: self.spec_in.clone(),
            spec_out: next.spec_out.clone(),
            ring_in: self.ring_in,
            ring_out: next.ring_out,
            degree_in: self.degree_in,
            degree_out: next.degree_out,
            matrix: m,
        })
    }

    /// Entries reduced mod `p^l`.
    pub fn to_mod(&self, exponent: u32) -> ModMatrix {
        ModMatrix::from_int(self.spec_out.p, exponent, &self.matrix)
    }
}

/// Sign `(-1)^(d_1 + ... + d_{i-1})`.
fn left_sign(e: &[u32], i: usize) -> i32 {
    if e[..i].iter().sum::<u32>() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Sign `(-1)^(d_{i+1} + ... + d_n)`.
fn right_sign(e: &[u32], i: usize) -> i32 {
    if e[i + 1..].iter().sum::<u32>() % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Induced map of a homomorphism of cyclic groups in degree `d`.
pub fn induced_cyclic_map(h: &CyclicHom, d: u32, ring: Ring) -> Result<OpMatrix> {
    h.check()?;
    ring.validate()?;
    let si = GroupSpec::cyclic(h.p, h.source)?;
    let so = GroupSpec::cyclic(h.p, h.target)?;
    OpMatrix::from_terms(&si, &so, (ring, ring), (d, d), |e| Ok(vec![(e.to_vec(), h.coefficient(e[0]))]))
}

/// Image of `c_d` under the diagonal.
pub fn diagonal_terms(d: u32) -> Vec<(BasisElem, BigInt)> {
    if d % 2 == 1 {
        (0..=d).map(|i| (vec![i, d - i], BigInt::one())).collect()
    } else {
        (0..=d / 2).map(|i| (vec![2 * i, d - 2 * i], BigInt::one())).collect()
    }
}

/// Diagonal `Z/p^a -> Z/p^a x Z/p^a` in degree `d`, coefficients mod `p^l`.
pub fn diagonal(p: u64, alpha: u32, ell: u32, d: u32) -> Result<OpMatrix> {
    if ell == 0 || ell > alpha {
        return Err(Error::Precondition(format!("coefficient exponent {ell} must lie in 1..={alpha}")));
    }
    let si = GroupSpec::cyclic(p, alpha)?;
    let so = GroupSpec::new(p, vec![alpha, alpha])?;
    let r = Ring::ModPrimePower(ell);
    OpMatrix::from_terms(&si, &so, (r, r), (d, d), |e| Ok(diagonal_terms(e[0])))
}

/// Tensor product of chains over the concatenated group.
pub fn cross(a: &Chain, b: &Chain) -> Result<Chain> {
    if a.ring != b.ring {
        return Err(Error::RingMismatch(format!("{} vs {}", a.ring, b.ring)));
    }
    let spec = a.spec.concat(&b.spec)?;
    let mut out = Chain::zero(&spec, a.ring, a.degree + b.degree);
    for (x, u) in a.terms() {
        for (y, v) in b.terms() {
            let mut e = x.clone();
            e.extend(y);
            out.add_term(e, &(u * v))?;
        }
    }
    Ok(out)
}

/// Koszul sign of moving factor `i` to position `perm[i]`.
pub fn permutation_sign(e: &[u32], perm: &[usize]) -> i32 {
    let mut odd = 0u32;
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            if perm[i] > perm[j] && e[i] % 2 == 1 && e[j] % 2 == 1 {
                odd += 1;
            }
        }
    }
    if odd.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::Dimension(format!("permutation of length {} on {n} factors", perm.len())));
    }
    for &q in perm {
        if q >= n || seen[q] {
            return Err(Error::Dimension("not a permutation".into()));
        }
        seen[q] = true;
    }
    Ok(())
}

/// Move factor `i` to position `perm[i]`, with the Koszul sign.
pub fn permute(c: &Chain, perm: &[usize]) -> Result<Chain> {
    check_permutation(perm, c.n())?;
    let mut alphas = vec![0; c.n()];
    for (i, &q) in perm.iter().enumerate() {
        alphas[q] = c.spec.alphas[i];
    }
    let spec = GroupSpec { p: c.spec.p, alphas };
    let mut out = Chain::zero(&spec, c.ring, c.degree);
    for (e, x) in c.terms() {
        let mut t = vec![0; e.len()];
        for (i, &q) in perm.iter().enumerate() {
            t[q] = e[i];
        }
        out.add_term(t, &(x * permutation_sign(e, perm)))?;
    }
    Ok(out)
}

/// Tensor `a` with `b` and place the factors of `a` at `positions` (sorted),
/// the factors of `b` in the remaining slots.
pub fn interleave(a: &Chain, b: &Chain, positions: &[usize]) -> Result<Chain> {
    let n = a.n() + b.n();
    if positions.len() != a.n() || !positions.windows(2).all(|w| w[0] < w[1]) || positions.iter().any(|&q| q >= n) {
        return Err(Error::Dimension("positions must be increasing and in range".into()));
    }
    let rest: Vec<usize> = (0..n).filter(|q| !positions.contains(q)).collect();
    let perm: Vec<usize> = positions.iter().chain(rest.iter()).copied().collect();
    permute(&cross(a, b)?, &perm)
}

fn bockstein_terms(spec: &GroupSpec, ell: u32, e: &[u32]) -> Vec<(BasisElem, BigInt)> {
    let mut out = Vec::new();
    for (i, &di) in e.iter().enumerate() {
        if di >= 2 && di % 2 == 0 && spec.alphas[i] == ell {
            let mut t = e.to_vec();
            t[i] -= 1;
            out.push((t, BigInt::from(left_sign(e, i))));
        }
    }
    out
}

fn check_bockstein(spec: &GroupSpec, ell: u32) -> Result<()> {
    if ell == 0 {
        return Err(Error::Precondition("coefficient exponent must be positive".into()));
    }
    if spec.alphas.iter().any(|&a| a < ell) {
        return Err(Error::Precondition(format!("Bockstein needs coefficient exponent {ell} <= every exponent")));
    }
    Ok(())
}

/// Bockstein for `0 -> Z/p -> Z/p^(l+1) -> Z/p^l -> 0` in degree `d`.
pub fn bockstein(spec: &GroupSpec, ell: u32, d: u32) -> Result<OpMatrix> {
    check_bockstein(spec, ell)?;
    OpMatrix::from_terms(
        spec,
        spec,
        (Ring::ModPrimePower(ell), Ring::ModPrimePower(1)),
        (d, d.saturating_sub(1)),
        |e| Ok(bockstein_terms(spec, ell, e)),
    )
}

/// Bockstein applied to a chain, read mod `p^l`; the result is mod `p`.
pub fn bockstein_chain(c: &Chain, ell: u32) -> Result<Chain> {
    check_bockstein(&c.spec, ell)?;
    let mut out = Chain::zero(&c.spec, Ring::ModPrimePower(1), c.degree.saturating_sub(1));
    for (e, x) in c.to_ring(Ring::ModPrimePower(ell)).terms() {
        for (t, y) in bockstein_terms(&c.spec, ell, e) {
            out.add_term(t, &(x * y))?;
        }
    }
    Ok(out)
}

/// Degree drop of the `kappa`-th derivation: `2p^kappa - 1`.
pub fn derivation_step(p: u64, kappa: u32) -> u64 {
    2 * p.pow(kappa) - 1
}

/// Terms of the mod-p derivation `c_d -> c_(d - 2p^kappa + 1)` on even
/// `d >= 2p^kappa`; `kappa = 0` is the Bockstein pattern.
pub fn derivation_terms(p: u64, kappa: u32, e: &[u32]) -> Vec<(BasisElem, i32)> {
    let step = derivation_step(p, kappa);
    let mut out = Vec::new();
    for (i, &di) in e.iter().enumerate() {
        if di % 2 == 0 && di as u64 > step {
            let mut t = e.to_vec();
            t[i] = (di as u64 - step) as u32;
            out.push((t, right_sign(e, i)));
        }
    }
    out
}

fn milnor_terms(spec: &GroupSpec, kappa: u32, ell: u32, e: &[u32]) -> Vec<(BasisElem, BigInt)> {
    let mut out = Vec::new();
    for (t, s) in derivation_terms(spec.p, kappa, e) {
        let i = (0..e.len()).find(|&i| t[i] != e[i]).expect("one factor changes");
        if spec.alphas[i] == ell {
            out.push((t, big_pow(spec.p, ell - 1) * s));
        }
    }
    out
}

fn check_milnor(kappa: u32, ell: u32, p: u64) -> Result<()> {
    if kappa == 0 || ell == 0 {
        return Err(Error::Precondition("kappa and the coefficient exponent must be positive".into()));
    }
    if p.checked_pow(kappa).is_none() {
        return Err(Error::Precondition("kappa too large".into()));
    }
    Ok(())
}

/// The derivation `c_d -> p^(a-1) c_(d - 2p^kappa + 1)` on factors with
/// exponent `a = l`, coefficients mod `p^l`.
pub fn milnor_diff(spec: &GroupSpec, kappa: u32, ell: u32, d: u32) -> Result<OpMatrix> {
    check_milnor(kappa, ell, spec.p)?;
    let step = derivation_step(spec.p, kappa);
    let r = Ring::ModPrimePower(ell);
    let d_out = (d as u64).saturating_sub(step) as u32;
    if (d as u64) < step {
        let src = BasisIndex::full(spec.n(), d);
        return Ok(OpMatrix {
            spec_in: spec.clone(),
            spec_out: spec.clone(),
            ring_in: r,
            ring_out: r,
            degree_in: d,
            degree_out: 0,
            matrix: IntMatrix::zeros(BasisIndex::full(spec.n(), 0).len(), src.len()),
        });
    }
    OpMatrix::from_terms(spec, spec, (r, r), (d, d_out), |e| Ok(milnor_terms(spec, kappa, ell, e)))
}

/// `milnor_diff` applied to a chain read mod `p^l`.
pub fn milnor_chain(c: &Chain, kappa: u32, ell: u32) -> Result<Chain> {
    check_milnor(kappa, ell, c.spec.p)?;
    let step = derivation_step(c.spec.p, kappa);
    let r = Ring::ModPrimePower(ell);
    let d_out = (c.degree as u64).saturating_sub(step) as u32;
    let mut out = Chain::zero(&c.spec, r, d_out);
    if (c.degree as u64) < step {
        return Ok(out);
    }
    for (e, x) in c.to_ring(r).terms() {
        for (t, y) in milnor_terms(&c.spec, kappa, ell, e) {
            out.add_term(t, &(x * y))?;
        }
    }
    Ok(out)
}

/// Largest `kappa` whose derivation can be nonzero in degree `d`, or 0.
pub fn kappa_max(p: u64, d: u32) -> u32 {
    let mut k = 0;
    while p.checked_pow(k + 1).is_some_and(|q| 2 * q <= d as u64) {
        k += 1;
    }
    k
}

/// Generators of the classes in `H_d(-; Z/p^l)` killed by the Bockstein and
/// by every `milnor_diff` with `1 <= kappa <= kappa_max(d)`.
pub fn rh_basis(spec: &GroupSpec, ell: u32, d: u32) -> Result<Vec<Chain>> {
    check_bockstein(spec, ell)?;
    let p = spec.p;
    let q_exp = ell;
    let ring = Ring::ModPrimePower(ell);
    let idx = BasisIndex::full(spec.n(), d);
    let cycles = exactlin::kernel_mod(&grouphom::boundary_matrix_mod(spec, ell, d));
    if cycles.is_empty() {
        return Ok(Vec::new());
    }
    let cyc_m = ModMatrix::from_columns(p, q_exp, idx.len(), &cycles);
    // blocks: [op * Z | boundary] per operator, stacked
    let mut blocks: Vec<(IntMatrix, IntMatrix, BigInt)> = Vec::new();
    if d >= 1 {
        let b = bockstein(spec, ell, d)?;
        blocks.push((b.matrix, grouphom::boundary_matrix_int(spec, d), big_pow(p, ell - 1)));
    }
    for kappa in 1..=kappa_max(p, d) {
        let m = milnor_diff(spec, kappa, ell, d)?;
        let bd = grouphom::boundary_matrix_int(spec, m.degree_out + 1);
        blocks.push((m.matrix, bd, BigInt::one()));
    }
    let extra: usize = blocks.iter().map(|b| b.1.cols).sum();
    let total_rows: usize = blocks.iter().map(|b| b.0.rows).sum();
    let ncols = cycles.len() + extra;
    let mut big = ModMatrix::zeros(p, q_exp, total_rows, ncols);
    let mut r0 = 0;
    let mut c0 = cycles.len();
    for (op, bd, scale) in &blocks {
        let opm = ModMatrix::from_int(p, q_exp, op);
        for j in 0..cycles.len() {
            let col: Vec<u64> = (0..cyc_m.rows).map(|i| cyc_m.get(i, j)).collect();
            let img = opm.mul_vec(&col)?;
            for (i, v) in img.into_iter().enumerate() {
                big.set_int(r0 + i, j, &(BigInt::from(v) * scale));
            }
        }
        for (&(i, j), v) in bd.entries() {
            big.set_int(r0 + i, c0 + j, &(v * scale));
        }
        r0 += op.rows;
        c0 += bd.cols;
    }
    let mut out: Vec<Chain> = Vec::new();
    for k in exactlin::kernel_mod(&big) {
        let a = &k[..cycles.len()];
        let v = cyc_m.mul_vec(a)?;
        let vb: Vec<BigInt> = v.into_iter().map(BigInt::from).collect();
        let c = Chain::from_vector(spec, ring, d, &idx, &vb);
        if !c.is_zero() && !out.contains(&c) {
            out.push(c);
        }
    }
    Ok(out)
}

/// Composite homomorphisms between products of cyclic groups.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Composite {
    Identity,
    /// Duplicate factor `factor` into two adjacent copies.
    Diagonal {
        factor: usize,
    },
    /// Apply a cyclic homomorphism on one factor.
    Cyclic {
        factor: usize,
        hom: CyclicHom,
    },
    /// Factor `i` moves to position `perm[i]`.
    Permutation {
        perm: Vec<usize>,
    },
    /// Coordinate inclusion: factor `i` lands at `positions[i]` of `target`.
    Include {
        positions: Vec<usize>,
        target: GroupSpec,
    },
    /// First `left_factors` factors through `left`, the rest through `right`.
    Cross {
        left: Box<Composite>,
        left_factors: usize,
        right: Box<Composite>,
    },
    /// `g_j -> sum_i rows[i][j] g_i` for equal exponents; mod prime powers only.
    Matrix {
        rows: Vec<Vec<u64>>,
    },
    /// Apply in order.
    Compose(Vec<Composite>),
}

impl Composite {
    pub fn output_spec(&self, input: &GroupSpec) -> Result<GroupSpec> {
        let p = input.p;
        match self {
            Composite::Identity => Ok(input.clone()),
            Composite::Diagonal { factor } => {
                let mut a = input.alphas.clone();
                let x = *a.get(*factor).ok_or_else(|| Error::Dimension("factor out of range".into()))?;
                a.insert(*factor, x);
                Ok(GroupSpec { p, alphas: a })
            }
            Composite::Cyclic { factor, hom } => {
                let x = *input.alphas.get(*factor).ok_or_else(|| Error::Dimension("factor out of range".into()))?;
                if hom.p != p || hom.source != x {
                    return Err(Error::Dimension("homomorphism source does not match factor".into()));
                }
                hom.check()?;
                let mut a = input.alphas.clone();
                a[*factor] = hom.target;
                Ok(GroupSpec { p, alphas: a })
            }
            Composite::Permutation { perm } => {
                check_permutation(perm, input.n())?;
                let mut a = vec![0; input.n()];
                for (i, &q) in perm.iter().enumerate() {
                    a[q] = input.alphas[i];
                }
                Ok(GroupSpec { p, alphas: a })
            }
            Composite::Include { positions, target } => {
                if target.p != p || positions.len() != input.n() {
                    return Err(Error::Dimension("inclusion does not match source".into()));
                }
                let mut seen = vec![false; target.n()];
                for (i, &q) in positions.iter().enumerate() {
                    if q >= target.n() || seen[q] || target.alphas[q] != input.alphas[i] {
                        return Err(Error::Dimension("inclusion positions invalid".into()));
                    }
                    seen[q] = true;
                }
                Ok(target.clone())
            }
            Composite::Cross { left, left_factors, right } => {
                if *left_factors > input.n() {
                    return Err(Error::Dimension("split exceeds factor count".into()));
                }
                let l = left.output_spec(&GroupSpec { p, alphas: input.alphas[..*left_factors].to_vec() })?;
                let r = right.output_spec(&GroupSpec { p, alphas: input.alphas[*left_factors..].to_vec() })?;
                l.concat(&r)
            }
            Composite::Matrix { rows } => {
                if !input.equal_exponents() {
                    return Err(Error::Unsupported("general homomorphisms need equal exponents".into()));
                }
                if rows.is_empty() || rows.iter().any(|r| r.len() != input.n()) {
                    return Err(Error::Dimension("matrix columns must match source factors".into()));
                }
                Ok(GroupSpec { p, alphas: vec![input.alphas[0]; rows.len()] })
            }
            Composite::Compose(fs) => {
                let mut s = input.clone();
                for f in fs {
                    s = f.output_spec(&s)?;
                }
                Ok(s)
            }
        }
    }

    /// Image of a chain.
    pub fn apply(&self, c: &Chain) -> Result<Chain> {
        let out_spec = self.output_spec(&c.spec)?;
        match self {
            Composite::Identity => Ok(c.clone()),
            Composite::Diagonal { factor } => map_terms_to(c, &out_spec, |e| {
                Ok(diagonal_terms(e[*factor])
                    .into_iter()
                    .map(|(pair, x)| {
                        let mut t = e[..*factor].to_vec();
                        t.extend(pair);
                        t.extend(&e[factor + 1..]);
                        (t, x)
                    })
                    .collect())
            }),
            Composite::Cyclic { factor, hom } => {
                map_terms_to(c, &out_spec, |e| Ok(vec![(e.to_vec(), hom.coefficient(e[*factor]))]))
            }
            Composite::Permutation { perm } => permute(c, perm),
            Composite::Include { positions, .. } => map_terms_to(c, &out_spec, |e| {
                let mut t = vec![0; out_spec.n()];
                for (i, &q) in positions.iter().enumerate() {
                    t[q] = e[i];
                }
                let order: Vec<usize> = {
                    let mut sorted = positions.clone();
                    sorted.sort_unstable();
                    positions.iter().map(|q| sorted.binary_search(q).expect("present")).collect()
                };
                Ok(vec![(t, BigInt::from(permutation_sign(e, &order)))])
            }),
            Composite::Cross { left, left_factors, right } => {
                let k = *left_factors;
                let ls = GroupSpec { p: c.spec.p, alphas: c.spec.alphas[..k].to_vec() };
                let rs = GroupSpec { p: c.spec.p, alphas: c.spec.alphas[k..].to_vec() };
                let mut out = Chain::zero(&out_spec, c.ring, c.degree);
                for (e, x) in c.terms() {
                    let a = left.apply(&Chain::basis(&ls, c.ring, e[..k].to_vec())?)?;
                    let b = right.apply(&Chain::basis(&rs, c.ring, e[k..].to_vec())?)?;
                    let ab = cross(&a, &b)?;
                    for (t, y) in ab.terms() {
                        out.add_term(t.clone(), &(x * y))?;
                    }
                }
                Ok(out)
            }
            Composite::Matrix { rows } => {
                let ell = match c.ring {
                    Ring::ModPrimePower(l) if l <= c.spec.alphas[0] => l,
                    _ => {
                        return Err(Error::Unsupported(
                            "general homomorphisms act only on coefficients mod p^l with l at most the exponent".into(),
                        ))
                    }
                };
                let pf = MatrixPushforward::new(c.spec.p, ell, rows.clone())?;
                pf.apply(c)
            }
            Composite::Compose(fs) => {
                let mut cur = c.clone();
                for f in fs {
                    cur = f.apply(&cur)?;
                }
                Ok(cur)
            }
        }
    }
}

fn map_terms_to<F>(c: &Chain, spec: &GroupSpec, mut f: F) -> Result<Chain>
where
    F: FnMut(&[u32]) -> Result<Vec<(BasisElem, BigInt)>>,
{
    let mut out = Chain::zero(spec, c.ring, c.degree);
    for (e, x) in c.terms() {
        for (t, y) in f(e)? {
            out.add_term(t, &(x * y))?;
        }
    }
    Ok(out)
}

/// Chain-level matrix of a composite in degree `d`.
pub fn composite_pushforward(f: &Composite, spec: &GroupSpec, d: u32, ring: Ring) -> Result<OpMatrix> {
    ring.validate()?;
    let out = f.output_spec(spec)?;
    OpMatrix::from_terms(spec, &out, (ring, ring), (d, d), |e| {
        let c = Chain::basis(spec, ring, e.to_vec())?;
        Ok(f.apply(&c)?.terms().map(|(t, x)| (t.clone(), x.clone())).collect())
    })
}

/// `(id x phi) o diagonal` from `Z/p^a1` to `Z/p^a1 x Z/p^a2`, where `phi`
/// multiplies by `gamma * p^(a2 - a1)`.
pub fn coproduct_composite(p: u64, a1: u32, a2: u32, gamma: u64) -> Result<(GroupSpec, Composite)> {
    if a1 > a2 {
        return Err(Error::Precondition("exponents must be ascending".into()));
    }
    let lambda = gamma.checked_mul(p.pow(a2 - a1)).ok_or_else(|| Error::Unsupported("multiplier overflow".into()))?;
    let hom = CyclicHom::new(p, a1, a2, lambda)?;
    Ok((
        GroupSpec::cyclic(p, a1)?,
        Composite::Compose(vec![Composite::Diagonal { factor: 0 }, Composite::Cyclic { factor: 1, hom }]),
    ))
}

/// `(phi x id) o diagonal` from `Z/p^a2` to `Z/p^a1 x Z/p^a2` with `phi`
/// the reduction `Z/p^a2 -> Z/p^a1`.
pub fn smash_composite(p: u64, a1: u32, a2: u32) -> Result<(GroupSpec, Composite)> {
    if a1 > a2 {
        return Err(Error::Precondition("exponents must be ascending".into()));
    }
    let hom = CyclicHom::new(p, a2, a1, 1)?;
    Ok((
        GroupSpec::cyclic(p, a2)?,
        Composite::Compose(vec![Composite::Diagonal { factor: 0 }, Composite::Cyclic { factor: 0, hom }]),
    ))
}

/// Homology pushforward of `g_j -> sum_i M_ij g_i` between products of equal
/// cyclic groups, with coefficients mod `p^l`. Computed by pulling back the
/// monomial basis `s^e t^m` of mod `p^l` cohomology and reading off the dual
/// coefficients.
#[derive(Clone, Debug)]
pub struct MatrixPushforward {
    p: u64,
    modulus: u64,
    exponent: u32,
    rows: Vec<Vec<u64>>,
    k: usize,
}

impl MatrixPushforward {
    pub fn new(p: u64, exponent: u32, rows: Vec<Vec<u64>>) -> Result<Self> {
        let modulus = exactlin::pow_u64(p, exponent).ok_or_else(|| Error::Unsupported("modulus overflow".into()))?;
        let k = rows.first().map(|r| r.len()).unwrap_or(0);
        if rows.is_empty() || k == 0 || rows.iter().any(|r| r.len() != k) {
            return Err(Error::Dimension("matrix must be nonempty and rectangular".into()));
        }
        let rows = rows.into_iter().map(|r| r.into_iter().map(|x| x % modulus).collect()).collect();
        Ok(MatrixPushforward { p, modulus, exponent, rows, k })
    }

    /// Coefficient of target basis tensor `b` in the image of source `e`.
    pub fn coefficient(&self, b: &[u32], e: &[u32]) -> u64 {
        let q = self.modulus;
        let bi: Vec<usize> = (0..b.len()).filter(|&i| b[i] % 2 == 1).collect();
        let ej: Vec<usize> = (0..e.len()).filter(|&j| e[j] % 2 == 1).collect();
        if bi.len() != ej.len() {
            return 0;
        }
        let det = minor_det(&self.rows, &bi, &ej, q);
        if det == 0 {
            return 0;
        }
        let a: Vec<u32> = b.iter().map(|d| d / 2).collect();
        let m: Vec<u32> = e.iter().map(|d| d / 2).collect();
        let t = self.t_coefficient(&a, &m);
        exactlin::mul_mod(det, t, q)
    }

    /// Coefficient of `t^m` in `prod_i (sum_j M_ij t_j)^(a_i)`.
    fn t_coefficient(&self, a: &[u32], m: &[u32]) -> u64 {
        if a.iter().sum::<u32>() != m.iter().sum::<u32>() {
            return 0;
        }
        let mut rem = m.to_vec();
        self.t_rec(0, a, &mut rem)
    }

    fn t_rec(&self, i: usize, a: &[u32], rem: &mut Vec<u32>) -> u64 {
        if i == a.len() {
            return if rem.iter().all(|&x| x == 0) { 1 } else { 0 };
        }
        let q = self.modulus;
        let mut total = 0u64;
        let mut cur = vec![0u32; self.k];
        self.distribute(i, a, 0, a[i], &mut cur, rem, &mut total);
        total % q
    }

    #[allow(clippy::too_many_arguments)]
    fn distribute(
        &self,
        i: usize,
        a: &[u32],
        j: usize,
        left: u32,
        cur: &mut Vec<u32>,
        rem: &mut Vec<u32>,
        total: &mut u64,
    ) {
        let q = self.modulus;
        if j + 1 == self.k {
            if left > rem[j] {
                return;
            }
            cur[j] = left;
            let mut w = multinomial_mod(a[i], cur, q);
            for (jj, &x) in cur.iter().enumerate() {
                w = exactlin::mul_mod(w, pow_mod(self.rows[i][jj], x, q), q);
            }
            if w != 0 {
                for (jj, &x) in cur.iter().enumerate() {
                    rem[jj] -= x;
                }
                let sub = self.t_rec(i + 1, a, rem);
                for (jj, &x) in cur.iter().enumerate() {
                    rem[jj] += x;
                }
                *total = exactlin::add_mod(*total, exactlin::mul_mod(w, sub, q), q);
            }
            return;
        }
        for x in 0..=left.min(rem[j]) {
            cur[j] = x;
            self.distribute(i, a, j + 1, left - x, cur, rem, total);
        }
        cur[j] = 0;
    }

    pub fn source_spec(&self) -> GroupSpec {
        GroupSpec { p: self.p, alphas: vec![self.exponent; self.k] }
    }

    /// Image of a chain; only the coefficient ring `Z/p^l` of the map is used.
    pub fn apply(&self, c: &Chain) -> Result<Chain> {
        if c.n() != self.k || c.spec.p != self.p {
            return Err(Error::Dimension("matrix columns must match source factors".into()));
        }
        let exp = c.spec.alphas[0];
        let spec = GroupSpec { p: self.p, alphas: vec![exp; self.rows.len()] };
        let ring = Ring::ModPrimePower(self.exponent);
        let mut out = Chain::zero(&spec, ring, c.degree);
        let targets = grouphom::basis(self.rows.len(), c.degree);
        for (e, x) in c.to_ring(ring).terms() {
            for b in &targets {
                let y = self.coefficient(b, e);
                if y != 0 {
                    out.add_term(b.clone(), &(x * BigInt::from(y)))?;
                }
            }
        }
        Ok(out)
    }

    /// Images of every source basis tensor in degree `d` satisfying `keep`,
    /// restricted to target tensors satisfying `target_keep`.
    pub fn images<F, G>(&self, d: u32, keep: F, target_keep: G) -> Vec<(BasisElem, BTreeMap<BasisElem, u64>)>
    where
        F: Fn(&[u32]) -> bool,
        G: Fn(&[u32]) -> bool,
    {
        let targets: Vec<BasisElem> =
            grouphom::basis(self.rows.len(), d).into_iter().filter(|b| target_keep(b)).collect();
        grouphom::basis(self.k, d)
            .into_iter()
            .filter(|e| keep(e))
            .map(|e| {
                let img = targets
                    .iter()
                    .filter_map(|b| {
                        let y = self.coefficient(b, &e);
                        (y != 0).then(|| (b.clone(), y))
                    })
                    .collect();
                (e, img)
            })
            .collect()
    }
}

fn pow_mod(b: u64, e: u32, q: u64) -> u64 {
    let mut r = 1 % q;
    let mut b = b % q;
    let mut e = e;
    while e > 0 {
        if e & 1 == 1 {
            r = exactlin::mul_mod(r, b, q);
        }
        b = exactlin::mul_mod(b, b, q);
        e >>= 1;
    }
    r
}

fn multinomial_mod(n: u32, parts: &[u32], q: u64) -> u64 {
    let mut num = BigInt::one();
    for i in 2..=n {
        num *= i;
    }
    for &x in parts {
        for i in 2..=x {
            num /= i;
        }
    }
    exactlin::reduce_big(&num, q)
}

/// Determinant of the minor on `rows x cols` mod `q`.
fn minor_det(m: &[Vec<u64>], rows: &[usize], cols: &[usize], q: u64) -> u64 {
    let r = rows.len();
    if r == 0 {
        return 1 % q;
    }
    let mut perm: Vec<usize> = (0..r).collect();
    let mut total = BigInt::zero();
    loop {
        let mut term = BigInt::one();
        for (a, &b) in perm.iter().enumerate() {
            term *= m[rows[a]][cols[b]];
        }
        let inv = (0..r).flat_map(|i| (i + 1..r).map(move |j| (i, j))).filter(|&(i, j)| perm[i] > perm[j]).count();
        if inv % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    exactlin::reduce_big(&total.mod_floor(&BigInt::from(q)), q)
}

fn next_permutation(v: &mut [usize]) -> bool {
    let n = v.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// True if the chain's coefficients are all divisible by `k`.
pub fn divisible_by(c: &Chain, k: &BigInt) -> bool {
    c.terms().all(|(_, x)| x.is_multiple_of(k))
}

/// Divide every coefficient by `k`, failing unless exact.
pub fn divide_exact(c: &Chain, k: &BigInt) -> Result<Chain> {
    if !divisible_by(c, k) {
        return Err(Error::Precondition(format!("chain is not divisible by {k}")));
    }
    Ok(c.map_terms(|e, x| Some((e.clone(), x / k))))
}

/// Representative of `x` mod `q` in the symmetric range.
pub fn symmetric_residue(x: &BigInt, q: &BigInt) -> BigInt {
    let r = x.mod_floor(q);
    if (&r * 2u32) > *q {
        r - q
    } else {
        r
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain(spec: &GroupSpec, ring: Ring, terms: &[(&[u32], i64)]) -> Chain {
        let d = terms.first().map(|t| t.0.iter().sum()).unwrap_or(0);
        Chain::from_terms(spec, ring, d, terms.iter().map(|(e, x)| (e.to_vec(), BigInt::from(*x)))).unwrap()
    }

    #[test]
    fn induced_map_examples() {
        let h = CyclicHom::new(3, 1, 2, 3).unwrap();
        let m = induced_cyclic_map(&h, 1, Ring::Integers).unwrap();
        assert_eq!(m.matrix.get(0, 0), BigInt::from(3));
        let m = induced_cyclic_map(&h, 2, Ring::Integers).unwrap();
        assert_eq!(m.matrix.get(0, 0), BigInt::from(1));
        let h = CyclicHom::new(3, 2, 1, 1).unwrap();
        let got: Vec<BigInt> = (1..=3).map(|d| h.coefficient(d)).collect();
        assert_eq!(got, vec![1.into(), 3.into(), 3.into()]);
        assert!(CyclicHom::new(3, 1, 2, 1).is_err());
    }

    #[test]
    fn diagonal_examples() {
        let m = diagonal(3, 1, 1, 1).unwrap();
        let c = Chain::basis(&m.spec_in, Ring::ModPrimePower(1), vec![1]).unwrap();
        assert_eq!(m.apply(&c).unwrap().to_string(), "c0*c1 + c1*c0");
        let c = Chain::basis(&GroupSpec::cyclic(3, 1).unwrap(), Ring::ModPrimePower(1), vec![2]).unwrap();
        let m = diagonal(3, 1, 1, 2).unwrap();
        assert_eq!(m.apply(&c).unwrap().to_string(), "c0*c2 + c2*c0");
        assert!(diagonal(3, 1, 2, 1).is_err());
    }

    #[test]
    fn bockstein_examples() {
        let s1 = GroupSpec::cyclic(3, 1).unwrap();
        let r = Ring::ModPrimePower(1);
        assert_eq!(bockstein_chain(&chain(&s1, r, &[(&[2], 1)]), 1).unwrap().to_string(), "c1");
        assert!(bockstein_chain(&chain(&s1, r, &[(&[3], 1)]), 1).unwrap().is_zero());
        let s2 = GroupSpec::new(3, vec![1, 1]).unwrap();
        assert_eq!(bockstein_chain(&chain(&s2, r, &[(&[2, 2], 1)]), 1).unwrap().to_string(), "c1*c2 + c2*c1");
        // -1 is 2 mod 3
        assert_eq!(bockstein_chain(&chain(&s2, r, &[(&[1, 2], 1)]), 1).unwrap().to_string(), "2*c1*c1");
    }

    #[test]
    fn milnor_examples() {
        let s1 = GroupSpec::cyclic(3, 1).unwrap();
        let r = Ring::ModPrimePower(1);
        assert_eq!(milnor_chain(&chain(&s1, r, &[(&[6], 1)]), 1, 1).unwrap().to_string(), "c1");
        let s2 = GroupSpec::cyclic(3, 2).unwrap();
        for d in 0..20 {
            assert!(milnor_diff(&s2, 1, 1, d).unwrap().matrix.is_zero());
        }
        let s = GroupSpec::new(3, vec![1, 1]).unwrap();
        let t = chain(&s, r, &[(&[1, 6], 1), (&[2, 5], 1)]);
        assert_eq!(milnor_chain(&t, 1, 1).unwrap().to_string(), "c1*c1");
    }

    #[test]
    fn permutation_of_odd_factors_is_signed() {
        let s = GroupSpec::new(3, vec![1, 1]).unwrap();
        let c = chain(&s, Ring::Integers, &[(&[1, 3], 1)]);
        assert_eq!(permute(&c, &[1, 0]).unwrap().to_string(), "-c3*c1");
        let c = chain(&s, Ring::Integers, &[(&[2, 3], 1)]);
        assert_eq!(permute(&c, &[1, 0]).unwrap().to_string(), "c3*c2");
    }

    #[test]
    fn matrix_pushforward_matches_diagonal_and_swap() {
        let p = 3;
        let diag = MatrixPushforward::new(p, 1, vec![vec![1], vec![1]]).unwrap();
        let swap = MatrixPushforward::new(p, 1, vec![vec![0, 1], vec![1, 0]]).unwrap();
        let s1 = GroupSpec::cyclic(p, 1).unwrap();
        let s2 = GroupSpec::new(p, vec![1, 1]).unwrap();
        let r = Ring::ModPrimePower(1);
        for d in 0..9 {
            let c = Chain::basis(&s1, r, vec![d]).unwrap();
            let want = Composite::Diagonal { factor: 0 }.apply(&c).unwrap();
            assert_eq!(diag.apply(&c).unwrap(), want, "diagonal degree {d}");
            for e in grouphom::basis(2, d) {
                let c = Chain::basis(&s2, r, e).unwrap();
                assert_eq!(swap.apply(&c).unwrap(), permute(&c, &[1, 0]).unwrap());
            }
        }
    }

    #[test]
    fn coproduct_reduced_image() {
        let (src, f) = coproduct_composite(3, 1, 1, 1).unwrap();
        let c = Chain::basis(&src, Ring::Integers, vec![3]).unwrap();
        let img = f.apply(&c).unwrap();
        assert_eq!(img.to_string(), "c0*c3 + c1*c2 + c2*c1 + c3*c0");
    }
}
