//! Toda cycles, special cycles, the span of generalized lens products and the
//! joint kernel of the mod-p derivations.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::chainops::{self, MatrixPushforward};
use crate::error::{Error, Result};
use crate::exactlin::{self, big_pow, IntMatrix, ModMatrix, SnfResult};
use crate::grouphom::{self, BasisElem, BasisIndex, Chain, GroupSpec, Ring};

/// Exponents `b_1 <= ... <= b_k` and odd generators `c_(2m_i - 1)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct TodaSpec {
    pub p: u64,
    pub exponents: Vec<u32>,
    pub ms: Vec<u32>,
}

impl TodaSpec {
    pub fn new(p: u64, exponents: Vec<u32>, ms: Vec<u32>) -> Result<Self> {
        let t = TodaSpec { p, exponents, ms };
        t.check()?;
        Ok(t)
    }

    pub fn check(&self) -> Result<()> {
        GroupSpec::from_factors(self.p, self.exponents.clone())?;
        if self.exponents.is_empty() || self.exponents.len() != self.ms.len() {
            return Err(Error::Precondition("Toda block needs matching nonempty exponents and generators".into()));
        }
        if !self.exponents.windows(2).all(|w| w[0] <= w[1]) {
            return Err(Error::Precondition("Toda exponents must be ascending".into()));
        }
        if self.ms.contains(&0) {
            return Err(Error::Precondition("Toda generators must have positive degree".into()));
        }
        Ok(())
    }

    pub fn k(&self) -> usize {
        self.ms.len()
    }

    pub fn degree(&self) -> u32 {
        self.ms.iter().map(|m| 2 * m).sum::<u32>() - 1
    }

    pub fn spec(&self) -> GroupSpec {
        GroupSpec { p: self.p, alphas: self.exponents.clone() }
    }

    /// `c_(2m_1) x ... x c_(2m_k)`.
    pub fn top_tensor(&self) -> Chain {
        Chain::basis(&self.spec(), Ring::Integers, self.ms.iter().map(|m| 2 * m).collect()).expect("valid shape")
    }
}

impl fmt::Display for TodaSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let g: Vec<String> = self.ms.iter().map(|m| format!("c{}", 2 * m - 1)).collect();
        write!(f, "T({})", g.join(","))
    }
}

/// `sum_l p^(b_l - b_1) c_(2m_1) x ... x c_(2m_l - 1) x ... x c_(2m_k)`.
pub fn toda_cycle(t: &TodaSpec) -> Result<Chain> {
    t.check()?;
    let spec = t.spec();
    let mut c = Chain::zero(&spec, Ring::Integers, t.degree());
    let top: Vec<u32> = t.ms.iter().map(|m| 2 * m).collect();
    for l in 0..t.k() {
        let mut e = top.clone();
        e[l] -= 1;
        c.add_term(e, &big_pow(t.p, t.exponents[l] - t.exponents[0]))?;
    }
    Ok(c)
}

/// A Toda block at `positions` with odd generators `c_(2m - 1)` for `m` in
/// `outer` filling the remaining positions in order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SpecialCycle {
    pub toda: TodaSpec,
    pub positions: Vec<usize>,
    pub outer: Vec<u32>,
}

impl SpecialCycle {
    pub fn n(&self) -> usize {
        self.positions.len() + self.outer.len()
    }

    pub fn degree(&self) -> u32 {
        self.toda.degree() + self.outer.iter().map(|m| 2 * m - 1).sum::<u32>()
    }

    pub fn outer_positions(&self) -> Vec<usize> {
        (0..self.n()).filter(|i| !self.positions.contains(i)).collect()
    }

    /// Odd generator degree at each outer position.
    pub fn outer_degrees(&self) -> Vec<u32> {
        self.outer.iter().map(|m| 2 * m - 1).collect()
    }
}

impl fmt::Display for SpecialCycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.outer.is_empty() {
            return write!(f, "{}", self.toda);
        }
        let pos: Vec<String> = self.positions.iter().map(|i| (i + 1).to_string()).collect();
        write!(f, "{}@{}", self.toda, pos.join(","))?;
        for (i, m) in self.outer_positions().iter().zip(&self.outer) {
            write!(f, " x c{}@{}", 2 * m - 1, i + 1)?;
        }
        Ok(())
    }
}

/// The Toda block tensored with the outer generators, moved into position
/// order with the Koszul sign.
pub fn special_cycle(spec: &GroupSpec, s: &SpecialCycle) -> Result<Chain> {
    s.toda.check()?;
    let n = spec.n();
    if s.n() != n || !s.positions.windows(2).all(|w| w[0] < w[1]) || s.positions.iter().any(|&i| i >= n) {
        return Err(Error::Precondition("positions must be increasing and partition the factors".into()));
    }
    if spec.sub(&s.positions).alphas != s.toda.exponents || spec.p != s.toda.p {
        return Err(Error::Precondition("Toda exponents must match the group at its positions".into()));
    }
    if s.outer.contains(&0) {
        return Err(Error::Precondition("outer generators must have positive degree".into()));
    }
    let block = toda_cycle(&s.toda)?;
    let rest = spec.sub(&s.outer_positions());
    let outer = Chain::basis(&rest, Ring::Integers, s.outer_degrees())?;
    chainops::interleave(&block, &outer, &s.positions)?.with_spec(spec)
}

/// Special cycles whose block contains the first factor, in degree `d`.
pub fn special_basis(spec: &GroupSpec, d: u32) -> Vec<SpecialCycle> {
    let n = spec.n();
    let mut out = Vec::new();
    if d == 0 {
        return out;
    }
    for j in 1..=n {
        for rest in subsets(n - 1, j - 1) {
            let positions: Vec<usize> = std::iter::once(0).chain(rest.iter().map(|i| i + 1)).collect();
            let units = d + 1 + (n - j) as u32;
            if units % 2 == 1 {
                continue;
            }
            for ms in compositions(units / 2, n) {
                let toda = TodaSpec { p: spec.p, exponents: spec.sub(&positions).alphas, ms: ms[..j].to_vec() };
                out.push(SpecialCycle { toda, positions: positions.clone(), outer: ms[j..].to_vec() });
            }
        }
    }
    out
}

/// Increasing `k`-subsets of `0..n` in lexicographic order.
pub fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(0, n, k, &mut Vec::new(), &mut out);
    out
}

/// Tuples of `parts` positive integers summing to `total`, lexicographic.
pub fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    grouphom::reduced_basis(parts, total)
}

/// Symmetric representative of `x` modulo `q`; `q = 0` leaves `x` unchanged.
fn symmetric(x: &BigInt, q: &BigInt) -> BigInt {
    if q.is_zero() {
        x.clone()
    } else {
        chainops::symmetric_residue(x, q)
    }
}

/// Linear algebra on homology classes in one degree: solving for classes
/// modulo boundaries and computing class orders.
pub struct ClassSolver {
    pub spec: GroupSpec,
    pub ring: Ring,
    pub degree: u32,
    index: BasisIndex,
    boundary_in: IntMatrix,
    snf: Option<SnfResult>,
}

impl ClassSolver {
    pub fn new(spec: &GroupSpec, ring: Ring, degree: u32) -> Result<Self> {
        ring.validate()?;
        let boundary_in = grouphom::boundary_matrix_int(spec, degree + 1);
        let snf = match ring {
            Ring::Integers => Some(exactlin::smith_normal_form(&boundary_in)),
            Ring::ModPrimePower(_) => None,
        };
        Ok(ClassSolver {
            spec: spec.clone(),
            ring,
            degree,
            index: BasisIndex::full(spec.n(), degree),
            boundary_in,
            snf,
        })
    }

    fn vector(&self, c: &Chain) -> Result<Vec<BigInt>> {
        if c.spec != self.spec {
            return Err(Error::Dimension(format!("chain over {} in a solver for {}", c.spec, self.spec)));
        }
        if c.degree != self.degree && !c.is_zero() {
            return Err(Error::Dimension(format!(
                "chain of degree {} in a solver for degree {}",
                c.degree, self.degree
            )));
        }
        c.to_vector(&self.index)
    }

    /// Order of the class of `c`: `Some(0)` for infinite order.
    pub fn class_order(&self, c: &Chain) -> Result<BigInt> {
        let v = self.vector(c)?;
        match (&self.snf, self.ring) {
            (Some(snf), _) => {
                let w = snf.u.mul_vec(&v)?;
                let mut order = BigInt::one();
                for (i, wi) in w.iter().enumerate() {
                    let d = snf.d.get(i).cloned().unwrap_or_else(BigInt::zero);
                    if d.is_zero() {
                        if !wi.is_zero() {
                            return Ok(BigInt::zero());
                        }
                    } else {
                        let g = d.gcd(wi);
                        order = order.lcm(&(&d / g));
                    }
                }
                Ok(order)
            }
            (None, Ring::ModPrimePower(l)) => {
                let q = big_pow(self.spec.p, l);
                for k in 0..=l {
                    let pk = big_pow(self.spec.p, k);
                    let scaled = c.to_ring(self.ring).scale(&pk);
                    if self.is_boundary(&scaled)? {
                        return Ok(pk);
                    }
                }
                Ok(q)
            }
            _ => unreachable!(),
        }
    }

    /// Whether `c` is a boundary in the solver's ring.
    pub fn is_boundary(&self, c: &Chain) -> Result<bool> {
        Ok(self.express(c, &[])?.is_some())
    }

    /// Coefficients `a` with `c - sum a_i basis_i` a boundary, or `None`.
    /// Integral coefficients are reduced to the symmetric range modulo each
    /// class order; modular ones to the symmetric range mod `p^l`.
    pub fn express(&self, c: &Chain, basis: &[Chain]) -> Result<Option<Vec<BigInt>>> {
        let target = self.vector(c)?;
        let cols: Vec<Vec<BigInt>> = basis.iter().map(|b| self.vector(b)).collect::<Result<_>>()?;
        let rows = self.index.len();
        let nb = basis.len();
        match self.ring {
            Ring::Integers => {
                let a = IntMatrix::from_columns(rows, &cols).hcat(&self.boundary_in)?;
                let Some(x) = exactlin::solve_int(&a, &target)? else { return Ok(None) };
                let mut out = Vec::with_capacity(nb);
                for (i, xi) in x.into_iter().take(nb).enumerate() {
                    let ord = self.class_order(&basis[i])?;
                    out.push(symmetric(&xi, &ord));
                }
                Ok(Some(out))
            }
            Ring::ModPrimePower(l) => {
                let p = self.spec.p;
                let q = big_pow(p, l);
                let mut a = ModMatrix::zeros(p, l, rows, nb + self.boundary_in.cols);
                for (j, col) in cols.iter().enumerate() {
                    for (i, x) in col.iter().enumerate() {
                        a.set_int(i, j, x);
                    }
                }
                for (&(i, j), x) in self.boundary_in.entries() {
                    a.set_int(i, nb + j, x);
                }
                let qq = a.modulus();
                let b: Vec<u64> = target.iter().map(|x| exactlin::reduce_big(x, qq)).collect();
                let Some(x) = exactlin::solve_mod(&a, &b)? else { return Ok(None) };
                Ok(Some(x.into_iter().take(nb).map(|v| symmetric(&BigInt::from(v), &q)).collect()))
            }
        }
    }
}

/// Express the class of `c` in the classes of `basis` modulo boundaries, over
/// `Z` (`modulus = None`) or `Z/p^l`.
pub fn express_in_basis(c: &Chain, basis: &[Chain], modulus: Option<u32>) -> Result<Option<Vec<BigInt>>> {
    if basis.iter().any(|b| b.degree != c.degree && !b.is_zero()) {
        return Err(Error::Dimension("basis chains must share the degree of the input".into()));
    }
    let ring = modulus.map_or(Ring::Integers, Ring::ModPrimePower);
    let solver = ClassSolver::new(&c.spec, ring, c.degree)?;
    let c = c.to_ring(ring);
    let basis: Vec<Chain> = basis.iter().map(|b| b.to_ring(ring)).collect();
    solver.express(&c, &basis)
}

/// Matrices `M` (`n` rows) of the lens family: `[1]` for `n = 1`, then
/// `[[M, 0], [0, 1]]` and `M` with an extra row `lambda` for each `lambda`.
pub fn lens_family(p: u64, n: usize) -> Vec<Vec<Vec<u64>>> {
    if n == 0 {
        return Vec::new();
    }
    let mut fam: Vec<Vec<Vec<u64>>> = vec![vec![vec![1]]];
    for _ in 1..n {
        let mut next = Vec::new();
        for m in &fam {
            let k = m[0].len();
            let mut bd: Vec<Vec<u64>> = m.iter().map(|r| r.iter().copied().chain([0]).collect()).collect();
            let mut last = vec![0; k + 1];
            last[k] = 1;
            bd.push(last);
            next.push(bd);
            for lam in lambda_vectors(p, k) {
                let mut ext = m.clone();
                ext.push(lam);
                next.push(ext);
            }
        }
        fam = next;
    }
    fam
}

fn lambda_vectors(p: u64, k: usize) -> Vec<Vec<u64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..p).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// One generalized lens product: the pushforward of the odd tensor `source`
/// along the matrix `rows`, projected to the fully reduced component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LensProduct {
    pub rows: Vec<Vec<u64>>,
    pub source: BasisElem,
    pub chain: Chain,
}

fn all_odd(e: &[u32]) -> bool {
    e.iter().all(|d| d % 2 == 1)
}

fn all_positive(e: &[u32]) -> bool {
    e.iter().all(|&d| d > 0)
}

fn require_equal(spec: &GroupSpec) -> Result<()> {
    if !spec.equal_exponents() {
        return Err(Error::Unsupported("lens span requires equal exponents".into()));
    }
    Ok(())
}

/// Generalized lens products in degree `d`, mod `p`, restricted to the fully
/// reduced component and pruned to a linearly independent list.
pub fn lens_products(spec: &GroupSpec, d: u32) -> Result<Vec<LensProduct>> {
    lens_products_filtered(spec, d, |_| true)
}

/// As [`lens_products`], using only source tensors accepted by `keep`.
pub fn lens_products_filtered<F: Fn(&[u32]) -> bool>(spec: &GroupSpec, d: u32, keep: F) -> Result<Vec<LensProduct>> {
    require_equal(spec)?;
    let p = spec.p;
    let idx = BasisIndex::reduced(spec.n(), d);
    let ring = Ring::ModPrimePower(1);
    let mut echelon = Echelon::new(p, idx.len());
    let mut out = Vec::new();
    for m in lens_family(p, spec.n()) {
        let pf = MatrixPushforward::new(p, 1, m.clone())?;
        for (src, img) in pf.images(d, |e| all_odd(e) && keep(e), all_positive) {
            let mut v = vec![0u64; idx.len()];
            for (b, x) in &img {
                v[idx.position(b).expect("reduced target")] = *x;
            }
            if echelon.insert(&v) {
                let chain = Chain::from_terms(spec, ring, d, img.into_iter().map(|(b, x)| (b, BigInt::from(x))))?;
                out.push(LensProduct { rows: m.clone(), source: src, chain });
            }
        }
    }
    Ok(out)
}

/// Basis of the span of generalized lens products in the fully reduced
/// degree-`d` component, mod `p`.
pub fn lens_span_basis(spec: &GroupSpec, d: u32) -> Result<Vec<Chain>> {
    Ok(lens_products(spec, d)?.into_iter().map(|l| l.chain).collect())
}

/// Incremental row echelon form over `F_p`.
#[derive(Clone, Debug)]
pub struct Echelon {
    p: u64,
    len: usize,
    rows: Vec<(usize, Vec<u64>)>,
}

impl Echelon {
    pub fn new(p: u64, len: usize) -> Self {
        Echelon { p, len, rows: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let p = self.p;
        let mut w: Vec<u64> = v.iter().map(|x| x % p).collect();
        for (piv, r) in &self.rows {
            let c = w[*piv];
            if c != 0 {
                for (wi, ri) in w.iter_mut().zip(r) {
                    *wi = exactlin::sub_mod(*wi, exactlin::mul_mod(c, *ri, p), p);
                }
            }
        }
        w
    }

    /// Add `v` if it is independent of the rows so far.
    pub fn insert(&mut self, v: &[u64]) -> bool {
        assert_eq!(v.len(), self.len);
        let w = self.reduce(v);
        let Some(piv) = w.iter().position(|&x| x != 0) else { return false };
        let inv = exactlin::inv_mod(w[piv], self.p).expect("prime modulus");
        let w: Vec<u64> = w.iter().map(|&x| exactlin::mul_mod(x, inv, self.p)).collect();
        let p = self.p;
        for (_, r) in self.rows.iter_mut() {
            let c = r[piv];
            if c != 0 {
                for (ri, wi) in r.iter_mut().zip(&w) {
                    *ri = exactlin::sub_mod(*ri, exactlin::mul_mod(c, *wi, p), p);
                }
            }
        }
        self.rows.push((piv, w));
        true
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().all(|&x| x == 0)
    }
}

/// Stacked matrix of the mod-p derivations `kappa = 0..=kappa_max(d)` on the
/// fully reduced degree-`d` component.
fn derivation_stack(spec: &GroupSpec, d: u32) -> ModMatrix {
    let p = spec.p;
    let n = spec.n();
    let src = BasisIndex::reduced(n, d);
    let mut blocks = Vec::new();
    for kappa in 0..=chainops::kappa_max(p, d) {
        let step = chainops::derivation_step(p, kappa) as u32;
        if step > d {
            continue;
        }
        let tgt = BasisIndex::reduced(n, d - step);
        let mut m = ModMatrix::zeros(p, 1, tgt.len(), src.len());
        for (j, e) in src.elems().iter().enumerate() {
            for (t, s) in chainops::derivation_terms(p, kappa, e) {
                if let Some(i) = tgt.position(&t) {
                    let cur = m.get(i, j);
                    let add = if s > 0 { 1 } else { p - 1 };
                    m.set(i, j, (cur + add) % p);
                }
            }
        }
        blocks.push(m);
    }
    let mut stacked = ModMatrix::zeros(p, 1, 0, src.len());
    for b in blocks {
        stacked = stacked.vcat(&b).expect("same width");
    }
    stacked
}

/// Basis of the joint kernel of the mod-p derivations on the fully reduced
/// degree-`d` component.
pub fn cinfty_basis(spec: &GroupSpec, d: u32) -> Result<Vec<Chain>> {
    require_equal(spec)?;
    let idx = BasisIndex::reduced(spec.n(), d);
    let ring = Ring::ModPrimePower(1);
    if idx.is_empty() {
        return Ok(Vec::new());
    }
    let m = derivation_stack(spec, d);
    Ok(exactlin::kernel_mod(&m)
        .into_iter()
        .map(|v| {
            let vb: Vec<BigInt> = v.into_iter().map(BigInt::from).collect();
            Chain::from_vector(spec, ring, d, &idx, &vb)
        })
        .collect())
}

/// Whether a mod-p chain in the fully reduced component is killed by every
/// mod-p derivation.
pub fn in_cinfty(c: &Chain) -> Result<bool> {
    let idx = BasisIndex::reduced(c.n(), c.degree);
    let v: Vec<u64> =
        c.to_ring(Ring::ModPrimePower(1)).to_vector(&idx)?.iter().map(|x| exactlin::reduce_big(x, c.spec.p)).collect();
    let m = derivation_stack(&c.spec, c.degree);
    Ok(m.mul_vec(&v)?.iter().all(|&x| x == 0))
}

/// Entry of a family: odd generators, or even generators `c_2, ..., c_(2p^k - 2)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum JEntry {
    N,
    L { k: u32 },
}

/// Sequence of entries where each `L` carries the number of `N` before it.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct JFamily {
    pub entries: Vec<JEntry>,
}

impl JFamily {
    /// Whether the reduced tuple `e` lies in this family's tensor product.
    pub fn admits(&self, p: u64, e: &[u32]) -> bool {
        e.len() == self.entries.len()
            && self.entries.iter().zip(e).all(|(j, &d)| match j {
                JEntry::N => d % 2 == 1,
                JEntry::L { k } => d % 2 == 0 && d >= 2 && (d as u64) < 2 * p.saturating_pow(*k),
            })
    }

    /// The family a reduced tuple belongs to by parity.
    pub fn of(e: &[u32]) -> JFamily {
        let mut k = 0;
        let entries = e
            .iter()
            .map(|d| {
                if d % 2 == 1 {
                    k += 1;
                    JEntry::N
                } else {
                    JEntry::L { k }
                }
            })
            .collect();
        JFamily { entries }
    }

    /// Basis tuples of degree `d`.
    pub fn tuples(&self, p: u64, d: u32) -> Vec<BasisElem> {
        grouphom::reduced_basis(self.entries.len(), d).into_iter().filter(|e| self.admits(p, e)).collect()
    }

    pub fn dimension(&self, p: u64, d: u32) -> usize {
        self.tuples(p, d).len()
    }
}

impl fmt::Display for JFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|j| match j {
                JEntry::N => "N".to_string(),
                JEntry::L { k } => format!("L<p^{k}"),
            })
            .collect();
        write!(f, "({})", parts.join(","))
    }
}

/// All families of length `n`.
pub fn jset(n: usize) -> Vec<JFamily> {
    let mut out = vec![(Vec::new(), 0u32)];
    for _ in 0..n {
        out = out
            .into_iter()
            .flat_map(|(v, k)| {
                let mut a = v.clone();
                a.push(JEntry::N);
                let mut b = v;
                b.push(JEntry::L { k });
                [(a, k + 1), (b, k)]
            })
            .collect();
    }
    out.into_iter().map(|(entries, _)| JFamily { entries }).collect()
}

/// Projection of the joint derivation kernel onto the coordinates of the
/// family tuples.
#[derive(Clone, Debug)]
pub struct StructureMap {
    pub source: Vec<Chain>,
    pub target: Vec<(JFamily, BasisElem)>,
    /// Rows indexed by `target`, columns by `source`.
    pub matrix: ModMatrix,
}

impl StructureMap {
    pub fn rank(&self) -> usize {
        self.matrix.rank()
    }

    pub fn is_bijective(&self) -> bool {
        self.source.len() == self.target.len() && self.rank() == self.source.len()
    }
}

pub fn structure_map(spec: &GroupSpec, d: u32) -> Result<StructureMap> {
    require_equal(spec)?;
    let p = spec.p;
    let source = cinfty_basis(spec, d)?;
    let target: Vec<(JFamily, BasisElem)> =
        jset(spec.n()).into_iter().flat_map(|f| f.tuples(p, d).into_iter().map(move |e| (f.clone(), e))).collect();
    let mut m = ModMatrix::zeros(p, 1, target.len(), source.len());
    for (j, c) in source.iter().enumerate() {
        for (i, (_, e)) in target.iter().enumerate() {
            m.set_int(i, j, &c.coeff(e));
        }
    }
    Ok(StructureMap { source, target, matrix: m })
}

/// Rank of the projection of the lens span on `n + 1` factors onto tuples
/// with `n` odd entries followed by an even entry below `2p^n`, and the
/// number of such tuples.
pub fn vandermonde_projection_rank(p: u64, alpha: u32, n: usize, d: u32) -> Result<(usize, usize)> {
    let spec = GroupSpec::new(p, vec![alpha; n + 1])?;
    let fam = JFamily { entries: (0..=n).map(|i| if i < n { JEntry::N } else { JEntry::L { k: n as u32 } }).collect() };
    let targets = fam.tuples(p, d);
    let mut ech = Echelon::new(p, targets.len());
    for c in lens_span_basis(&spec, d)? {
        let v: Vec<u64> = targets.iter().map(|e| exactlin::reduce_big(&c.coeff(e), p)).collect();
        ech.insert(&v);
    }
    Ok((ech.rank(), targets.len()))
}

/// Whether every coefficient has absolute value below `bound`.
pub fn coefficients_below(c: &Chain, bound: &BigInt) -> bool {
    c.terms().all(|(_, x)| x.abs() < *bound)
}
