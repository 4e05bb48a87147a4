//! Positivity certificates: rules generating positive classes, the torality
//! test, and a certifier that decomposes an atoral integral class into rule
//! instances.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::chainops::{self, Composite, MatrixPushforward};
use crate::cycles::{self, special_basis, special_cycle, toda_cycle, ClassSolver, LensProduct, SpecialCycle, TodaSpec};
use crate::error::{Error, Result};
use crate::exactlin::{self, big_pow};
use crate::grouphom::{self, BasisIndex, Chain, GroupSpec, Ring};

pub const CERTIFICATE_SCHEMA: u32 = 1;

mod big_vec {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(v: &[BigInt], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| x.to_string()).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<BigInt>, D::Error> {
        let v = Vec::<String>::deserialize(d)?;
        v.iter().map(|x| x.parse().map_err(serde::de::Error::custom)).collect()
    }
}

/// A rule producing a positive class from its parameters and children.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Rule {
    /// `c_(2m-1)` on one cyclic factor, `m >= 2`.
    LensGenerator { m: u32 },
    /// The child tensored with the cycle `other`, child factors at `positions`.
    CrossWithPositive { positions: Vec<usize>, other: Chain },
    /// Toda cycle of generators `c_(2m-1)` with every `m >= 2`.
    TodaOfPositives { ms: Vec<u32> },
    /// `p T(c1, c_(2m-1))`, or `p T(c_(2m-1), c1)` when `lens_first`.
    CalcTimesP { m: u32, lens_first: bool },
    /// `T(c1, c_(2m-1))` or `T(c_(2m-1), c1)` over `a_1 < a_2`.
    CalcMixed { m: u32, lens_first: bool },
    /// `T(c1, c1)` or `T(c1, c1, c1)`.
    DreiTriple { k: usize },
    /// `p T(...)` of odd generators over equal exponents.
    BplDivisible { ms: Vec<u32> },
    /// `T(...)` of odd generators with first exponent below the last.
    BplMixed { ms: Vec<u32> },
    /// The node chain minus the weighted children is a boundary.
    LinearCombination {
        #[serde(with = "big_vec")]
        coeffs: Vec<BigInt>,
    },
    /// Coordinate inclusion of the child's group at `positions`.
    Pushforward { positions: Vec<usize> },
    /// Integral cycle agreeing mod `p^a` with the image of
    /// `c_(2m_1-1) x ... x c_(2m_k-1)` under the matrix `rows`.
    GeneralizedLensProduct { rows: Vec<Vec<u64>>, ms: Vec<u32> },
}

impl Rule {
    pub fn tag(&self) -> &'static str {
        match self {
            Rule::LensGenerator { .. } => "LensGenerator",
            Rule::CrossWithPositive { .. } => "CrossWithPositive",
            Rule::TodaOfPositives { .. } => "TodaOfPositives",
            Rule::CalcTimesP { .. } => "CalcTimesP",
            Rule::CalcMixed { .. } => "CalcMixed",
            Rule::DreiTriple { .. } => "DreiTriple",
            Rule::BplDivisible { .. } => "BplDivisible",
            Rule::BplMixed { .. } => "BplMixed",
            Rule::LinearCombination { .. } => "LinearCombination",
            Rule::Pushforward { .. } => "Pushforward",
            Rule::GeneralizedLensProduct { .. } => "GeneralizedLensProduct",
        }
    }
}

/// One step: a positive integral cycle over `spec` and how it was obtained.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    #[serde(flatten)]
    pub rule: Rule,
    pub spec: GroupSpec,
    pub chain: Chain,
    pub children: Vec<usize>,
}

/// Flat list of nodes; children precede parents and the last node is the root.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Certificate {
    pub schema: u32,
    pub assume_bordism: bool,
    pub nodes: Vec<Node>,
}

impl Certificate {
    pub fn root(&self) -> Option<&Node> {
        self.nodes.last()
    }

    /// Rule tags in node order.
    pub fn tags(&self) -> Vec<&'static str> {
        self.nodes.iter().map(|n| n.rule.tag()).collect()
    }

    pub fn uses(&self, tag: &str) -> bool {
        self.nodes.iter().any(|n| n.rule.tag() == tag)
    }
}

/// Why no certificate was produced.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason")]
pub enum FailureReason {
    NotAtoral { subset: Vec<usize>, ell: Option<u32> },
    ObstructedByMilnorDiff { kappa: u32, ell: u32, witness: Chain },
    ObstructedByBockstein { witness: Chain },
    Incomplete { residual: Chain, explanation: String },
}

impl FailureReason {
    pub fn tag(&self) -> &'static str {
        match self {
            FailureReason::NotAtoral { .. } => "NotAtoral",
            FailureReason::ObstructedByMilnorDiff { .. } => "ObstructedByMilnorDiff",
            FailureReason::ObstructedByBockstein { .. } => "ObstructedByBockstein",
            FailureReason::Incomplete { .. } => "Incomplete",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Outcome {
    Certified(Certificate),
    Failed(FailureReason),
}

/// Result of the torality test with its witness subset (0-based) and the
/// minimal exponent over it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Torality {
    pub toral: bool,
    pub subset: Option<Vec<usize>>,
    pub ell: Option<u32>,
}

fn require_integral_cycle(spec: &GroupSpec, h: &Chain) -> Result<()> {
    if &h.spec != spec {
        return Err(Error::Dimension(format!("chain over {} but group {}", h.spec, spec)));
    }
    if h.ring != Ring::Integers {
        return Err(Error::RingMismatch("integral chain required".into()));
    }
    if !grouphom::is_cycle(h) {
        return Err(Error::NotACycle);
    }
    Ok(())
}

/// Toral iff some `d`-subset `S` has coefficient `u_S` on the tensor with
/// `c_1` at `S` and `c_0` elsewhere with `v_p(u_S) < min_{j in S} a_j`.
pub fn is_p_toral(spec: &GroupSpec, h: &Chain) -> Result<Torality> {
    require_integral_cycle(spec, h)?;
    let d = h.degree as usize;
    let n = spec.n();
    if h.is_zero() || d > n {
        return Ok(Torality { toral: false, subset: None, ell: None });
    }
    if d == 0 {
        return Ok(Torality { toral: true, subset: Some(Vec::new()), ell: None });
    }
    for s in cycles::subsets(n, d) {
        let mut e = vec![0u32; n];
        for &i in &s {
            e[i] = 1;
        }
        let u = h.coeff(&e);
        if u.is_zero() {
            continue;
        }
        let ell = s.iter().map(|&i| spec.alphas[i]).min().expect("nonempty");
        let v = exactlin::valuation(&u, spec.p).expect("nonzero");
        if v < ell {
            return Ok(Torality { toral: true, subset: Some(s), ell: Some(ell) });
        }
    }
    Ok(Torality { toral: false, subset: None, ell: None })
}

struct Builder {
    nodes: Vec<Node>,
    failure: Option<FailureReason>,
    lens_cache: HashMap<(GroupSpec, u32), Vec<LensProduct>>,
    solvers: HashMap<(GroupSpec, u32), ClassSolver>,
}

impl Builder {
    fn new() -> Self {
        Builder { nodes: Vec::new(), failure: None, lens_cache: HashMap::new(), solvers: HashMap::new() }
    }

    fn push(&mut self, rule: Rule, spec: &GroupSpec, chain: Chain, children: Vec<usize>) -> usize {
        self.nodes.push(Node { rule, spec: spec.clone(), chain, children });
        self.nodes.len() - 1
    }

    fn fail(&mut self, residual: &Chain, explanation: &str) -> Option<usize> {
        self.failure = Some(FailureReason::Incomplete { residual: residual.clone(), explanation: explanation.into() });
        None
    }

    fn solver(&mut self, spec: &GroupSpec, d: u32) -> Result<&ClassSolver> {
        let key = (spec.clone(), d);
        if !self.solvers.contains_key(&key) {
            self.solvers.insert(key.clone(), ClassSolver::new(spec, Ring::Integers, d)?);
        }
        Ok(&self.solvers[&key])
    }

    fn is_boundary(&mut self, c: &Chain) -> Result<bool> {
        if c.is_zero() {
            return Ok(true);
        }
        self.solver(&c.spec, c.degree)?.is_boundary(c)
    }

    fn lens(&mut self, spec: &GroupSpec, d: u32) -> Result<&Vec<LensProduct>> {
        let key = (spec.clone(), d);
        if !self.lens_cache.contains_key(&key) {
            let v = cycles::lens_products_filtered(spec, d, |e| e.iter().any(|&x| x >= 3))?;
            self.lens_cache.insert(key.clone(), v);
        }
        Ok(&self.lens_cache[&key])
    }
}

fn toda_on(spec: &GroupSpec, ms: &[u32]) -> Result<Chain> {
    toda_cycle(&TodaSpec::new(spec.p, spec.alphas.clone(), ms.to_vec())?)
}

fn lens_chain(spec: &GroupSpec, m: u32) -> Result<Chain> {
    Chain::basis(spec, Ring::Integers, vec![2 * m - 1])
}

fn calc_ms(m: u32, lens_first: bool) -> Vec<u32> {
    if lens_first {
        vec![m, 1]
    } else {
        vec![1, m]
    }
}

/// Block rule making the Toda cycle of `ms` over `spec` positive, if any.
fn block_rule(spec: &GroupSpec, ms: &[u32]) -> Option<Rule> {
    let k = ms.len();
    let first = spec.alphas[0];
    let last = spec.alphas[k - 1];
    if k == 1 {
        return (ms[0] >= 2).then_some(Rule::LensGenerator { m: ms[0] });
    }
    if ms.iter().all(|&m| m == 1) && k <= 3 {
        Some(Rule::DreiTriple { k })
    } else if ms.iter().all(|&m| m >= 2) {
        Some(Rule::TodaOfPositives { ms: ms.to_vec() })
    } else if k == 2 && first < last {
        let lens_first = ms[1] == 1;
        Some(Rule::CalcMixed { m: if lens_first { ms[0] } else { ms[1] }, lens_first })
    } else if first < last {
        Some(Rule::BplMixed { ms: ms.to_vec() })
    } else {
        None
    }
}

fn is_direct(spec: &GroupSpec, s: &SpecialCycle) -> bool {
    block_rule(&spec.sub(&s.positions), &s.toda.ms).is_some() || s.outer.iter().any(|&m| m >= 2)
}

/// Node whose chain is the Toda cycle of `ms` over `spec`, if a block rule applies.
fn block_node(b: &mut Builder, spec: &GroupSpec, ms: &[u32]) -> Result<Option<usize>> {
    let Some(rule) = block_rule(spec, ms) else { return Ok(None) };
    let chain = toda_on(spec, ms)?;
    Ok(Some(b.push(rule, spec, chain, Vec::new())))
}

/// Node whose chain is `p` times the Toda cycle of `ms`.
fn p_block_node(b: &mut Builder, spec: &GroupSpec, ms: &[u32]) -> Result<Option<usize>> {
    let k = ms.len();
    if k < 2 {
        return Ok(None);
    }
    let rule = if k == 2 && (ms[0] == 1 || ms[1] == 1) {
        let lens_first = ms[1] == 1 && ms[0] != 1;
        Rule::CalcTimesP { m: if lens_first { ms[0] } else { ms[1] }, lens_first }
    } else if spec.equal_exponents() {
        Rule::BplDivisible { ms: ms.to_vec() }
    } else {
        return Ok(None);
    };
    let chain = toda_on(spec, ms)?.scale(&BigInt::from(spec.p));
    Ok(Some(b.push(rule, spec, chain, Vec::new())))
}

/// Cross a block node with the outer generators of `s`.
fn cross_outer(b: &mut Builder, spec: &GroupSpec, s: &SpecialCycle, block: usize) -> Result<usize> {
    if s.outer.is_empty() {
        return Ok(block);
    }
    let other = Chain::basis(&spec.sub(&s.outer_positions()), Ring::Integers, s.outer_degrees())?;
    let chain = chainops::interleave(&b.nodes[block].chain, &other, &s.positions)?.with_spec(spec)?;
    Ok(b.push(Rule::CrossWithPositive { positions: s.positions.clone(), other }, spec, chain, vec![block]))
}

/// A node for a special cycle positive by a block rule or an outer lens
/// generator, with the sign relating the node chain to the special cycle.
fn direct(b: &mut Builder, spec: &GroupSpec, s: &SpecialCycle, chain: &Chain) -> Result<Option<(usize, i32)>> {
    let bspec = spec.sub(&s.positions);
    if let Some(bi) = block_node(b, &bspec, &s.toda.ms)? {
        let idx = cross_outer(b, spec, s, bi)?;
        return Ok(Some((idx, 1)));
    }
    let Some(t) = s.outer.iter().position(|&m| m >= 2) else { return Ok(None) };
    let outer_pos = s.outer_positions();
    let q = outer_pos[t];
    let lspec = spec.sub(&[q]);
    let lens = b.push(Rule::LensGenerator { m: s.outer[t] }, &lspec, lens_chain(&lspec, s.outer[t])?, Vec::new());
    let keep: Vec<usize> = (0..spec.n()).filter(|&i| i != q).collect();
    let rspec = spec.sub(&keep);
    let shift = |i: usize| if i > q { i - 1 } else { i };
    let mut outer = s.outer.clone();
    outer.remove(t);
    let rest = SpecialCycle { toda: s.toda.clone(), positions: s.positions.iter().map(|&i| shift(i)).collect(), outer };
    let r = special_cycle(&rspec, &rest)?;
    let x = chainops::interleave(&b.nodes[lens].chain, &r, &[q])?.with_spec(spec)?;
    let sign = if &x == chain {
        1
    } else if x == chain.neg() {
        -1
    } else {
        return Err(Error::Precondition("cross product does not reproduce the special cycle".into()));
    };
    let idx = b.push(Rule::CrossWithPositive { positions: vec![q], other: r }, spec, x, vec![lens]);
    Ok(Some((idx, sign)))
}

/// Integral cycle congruent to `y` mod `p^l` (`y` over `Z/p^l`).
pub fn integral_lift(y: &Chain) -> Result<Option<Chain>> {
    let Ring::ModPrimePower(l) = y.ring else { return Ok(Some(y.clone())) };
    let spec = &y.spec;
    let d = y.degree;
    let idx = BasisIndex::full(spec.n(), d);
    let base = y.lift_symmetric();
    let v = base.to_vector(&idx)?;
    let bd = grouphom::boundary_matrix_int(spec, d);
    let q = big_pow(spec.p, l);
    let rhs: Vec<BigInt> = bd.mul_vec(&v)?.into_iter().map(|x| -x).collect();
    if rhs.iter().all(|x| x.is_zero()) {
        return Ok(Some(base));
    }
    let Some(w) = exactlin::solve_int(&bd.scaled(&q), &rhs)? else { return Ok(None) };
    let wv: Vec<BigInt> = w.iter().map(|x| x * &q).collect();
    let corr = Chain::from_vector(spec, Ring::Integers, d, &idx, &wv);
    Ok(Some(base.add(&corr)?))
}

/// Matrix with the rows outside `omega` set to zero.
fn restrict_rows(rows: &[Vec<u64>], omega: &[usize]) -> Vec<Vec<u64>> {
    rows.iter().enumerate().map(|(i, r)| if omega.contains(&i) { r.clone() } else { vec![0; r.len()] }).collect()
}

/// Image mod `p^a` of the odd tensor `source` under `rows`, over `spec`.
fn lens_image(spec: &GroupSpec, rows: &[Vec<u64>], source: &[u32]) -> Result<Chain> {
    let alpha = spec.alphas[0];
    let pf = MatrixPushforward::new(spec.p, alpha, rows.to_vec())?;
    let sspec = pf.source_spec();
    let x = Chain::basis(&sspec, Ring::ModPrimePower(alpha), source.to_vec())?;
    pf.apply(&x)?.with_spec(spec)
}

/// Integral chain in the fully reduced component agreeing with the lens
/// product mod `p^a`, as a signed sum of lens leaves over row restrictions.
fn lens_reduced_node(b: &mut Builder, spec: &GroupSpec, lp: &LensProduct) -> Result<Option<usize>> {
    let n = spec.n();
    let ms: Vec<u32> = lp.source.iter().map(|d| d.div_ceil(2)).collect();
    let mut kids = Vec::new();
    let mut coeffs = Vec::new();
    let mut acc = Chain::zero(spec, Ring::Integers, lp.chain.degree);
    for size in 0..=n {
        for omega in cycles::subsets(n, size) {
            let rows = restrict_rows(&lp.rows, &omega);
            let y = lens_image(spec, &rows, &lp.source)?;
            if y.is_zero() {
                continue;
            }
            let Some(z) = integral_lift(&y)? else {
                return Ok(b.fail(&y.lift_symmetric(), "lens product has no integral lift"));
            };
            let sign = if (n - size).is_multiple_of(2) { BigInt::one() } else { -BigInt::one() };
            acc = acc.add_scaled(&z, &sign)?;
            let leaf = b.push(Rule::GeneralizedLensProduct { rows, ms: ms.clone() }, spec, z, Vec::new());
            kids.push(leaf);
            coeffs.push(sign);
        }
    }
    let reduced = acc.filter(|e| e.iter().all(|&x| x > 0));
    Ok(Some(b.push(Rule::LinearCombination { coeffs }, spec, reduced, kids)))
}

/// Certify a fully reduced cycle over equal exponents.
fn certify_equal(b: &mut Builder, spec: &GroupSpec, c: &Chain) -> Result<Option<usize>> {
    if b.is_boundary(c)? {
        return Ok(Some(b.push(Rule::LinearCombination { coeffs: Vec::new() }, spec, c.clone(), Vec::new())));
    }
    let p = spec.p;
    let d = c.degree;
    let idx = BasisIndex::reduced(spec.n(), d);
    let prods = b.lens(spec, d)?.clone();
    let basis = special_basis(spec, d);
    let chains: Vec<Chain> = basis.iter().map(|s| special_cycle(spec, s)).collect::<Result<_>>()?;
    let direct_ix: Vec<usize> = (0..basis.len()).filter(|&i| is_direct(spec, &basis[i])).collect();
    let target: Vec<u64> = c.to_vector(&idx)?.iter().map(|x| exactlin::reduce_big(x, p)).collect();
    let mod_p = |ch: &Chain| -> Result<Vec<u64>> {
        Ok(ch.to_vector(&idx)?.iter().map(|x| exactlin::reduce_big(x, p)).collect())
    };
    let mut cols: Vec<Vec<u64>> = prods.iter().map(|l| mod_p(&l.chain)).collect::<Result<_>>()?;
    for &i in &direct_ix {
        cols.push(mod_p(&chains[i])?);
    }
    let m = exactlin::ModMatrix::from_columns(p, 1, idx.len(), &cols);
    let Some(coef) = exactlin::solve_mod(&m, &target)? else {
        return Ok(b.fail(c, "class mod p lies outside the span of generalized lens products and rule instances"));
    };
    let mut kids = Vec::new();
    let mut coeffs = Vec::new();
    let mut rest = c.clone();
    let pb = BigInt::from(p);
    for (lp, &k) in prods.iter().zip(&coef) {
        if k == 0 {
            continue;
        }
        let Some(z) = lens_reduced_node(b, spec, lp)? else { return Ok(None) };
        let kk = chainops::symmetric_residue(&BigInt::from(k), &pb);
        rest = rest.sub(&b.nodes[z].chain.scale(&kk))?;
        kids.push(z);
        coeffs.push(kk);
    }
    for (&i, &k) in direct_ix.iter().zip(&coef[prods.len()..]) {
        if k == 0 {
            continue;
        }
        let kk = chainops::symmetric_residue(&BigInt::from(k), &pb);
        let (z, sign) = direct(b, spec, &basis[i], &chains[i])?.expect("direct special cycle");
        rest = rest.sub(&chains[i].scale(&kk))?;
        kids.push(z);
        coeffs.push(kk * sign);
    }
    let pp = BigInt::from(p);
    if !chainops::divisible_by(&rest, &pp) {
        return Ok(b.fail(&rest, "remainder after lens reduction is not divisible by p"));
    }
    let xi = chainops::divide_exact(&rest, &pp)?;
    let Some(e) = b.solver(spec, d)?.express(&xi, &chains)? else {
        return Ok(b.fail(&xi, "quotient is not a combination of special cycles"));
    };
    for ((s, sc), ej) in basis.iter().zip(&chains).zip(e) {
        if ej.is_zero() {
            continue;
        }
        let term = sc.scale(&(&ej * &pp));
        if let Some((i, sign)) = direct(b, spec, s, sc)? {
            kids.push(i);
            coeffs.push(&ej * &pp * sign);
        } else if let Some(bi) = p_block_node(b, &spec.sub(&s.positions), &s.toda.ms)? {
            let i = cross_outer(b, spec, s, bi)?;
            kids.push(i);
            coeffs.push(ej);
        } else if b.is_boundary(&term)? {
            continue;
        } else {
            return Ok(b.fail(&term, "p-multiple of a special cycle without an applicable rule"));
        }
    }
    Ok(Some(b.push(Rule::LinearCombination { coeffs }, spec, c.clone(), kids)))
}

/// Certify a fully reduced cycle over a sorted spec.
fn certify_reduced(b: &mut Builder, spec: &GroupSpec, c: &Chain) -> Result<Option<usize>> {
    let n = spec.n();
    let d = c.degree;
    let n1 = spec.alphas.iter().filter(|&&a| a == spec.alphas[0]).count();
    let basis = special_basis(spec, d);
    let chains: Vec<Chain> = basis.iter().map(|s| special_cycle(spec, s)).collect::<Result<_>>()?;
    let Some(a) = b.solver(spec, d)?.express(c, &chains)? else {
        return Ok(b.fail(c, "cycle is not a combination of special cycles"));
    };
    let espec = spec.sub(&(0..n1).collect::<Vec<_>>());
    let tail = (n - n1) as u32;
    let mut cprime = Chain::zero(&espec, Ring::Integers, d.saturating_sub(tail));
    let mut kids = Vec::new();
    let mut coeffs = Vec::new();
    for ((s, sc), ai) in basis.iter().zip(&chains).zip(a) {
        if ai.is_zero() {
            continue;
        }
        if let Some((i, sign)) = direct(b, spec, s, sc)? {
            kids.push(i);
            coeffs.push(ai * sign);
            continue;
        }
        let outer: Vec<u32> =
            s.outer_positions().iter().zip(&s.outer).filter(|(&q, _)| q < n1).map(|(_, &m)| m).collect();
        let sp = SpecialCycle { toda: s.toda.clone(), positions: s.positions.clone(), outer };
        cprime = cprime.add_scaled(&special_cycle(&espec, &sp)?, &ai)?;
    }
    if !cprime.is_zero() {
        let Some(ci) = certify_equal(b, &espec, &cprime)? else { return Ok(None) };
        let idx = if tail > 0 {
            let positions: Vec<usize> = (0..n1).collect();
            let other = Chain::basis(&spec.sub(&(n1..n).collect::<Vec<_>>()), Ring::Integers, vec![1; n - n1])?;
            let chain = chainops::interleave(&cprime, &other, &positions)?.with_spec(spec)?;
            b.push(Rule::CrossWithPositive { positions, other }, spec, chain, vec![ci])
        } else {
            ci
        };
        kids.push(idx);
        coeffs.push(BigInt::one());
    }
    Ok(Some(b.push(Rule::LinearCombination { coeffs }, spec, c.clone(), kids)))
}

/// Restrict a chain supported on the positions `omega` to those factors.
fn restrict(c: &Chain, omega: &[usize]) -> Result<Chain> {
    let spec = c.spec.sub(omega);
    let mut out = Chain::zero(&spec, c.ring, c.degree);
    for (e, x) in c.terms() {
        out.add_term(omega.iter().map(|&i| e[i]).collect(), x)?;
    }
    Ok(out)
}

fn certify_class(b: &mut Builder, spec: &GroupSpec, h: &Chain) -> Result<Option<usize>> {
    let mut kids = Vec::new();
    let mut coeffs = Vec::new();
    for (omega, comp) in grouphom::reduced_components(h) {
        if omega.is_empty() || b.is_boundary(&comp)? {
            continue;
        }
        let sub = spec.sub(&omega);
        let sc = restrict(&comp, &omega)?;
        let Some(i) = certify_reduced(b, &sub, &sc)? else { return Ok(None) };
        let idx = if omega.len() == spec.n() {
            i
        } else {
            b.push(Rule::Pushforward { positions: omega.clone() }, spec, comp.clone(), vec![i])
        };
        kids.push(idx);
        coeffs.push(BigInt::one());
    }
    Ok(Some(b.push(Rule::LinearCombination { coeffs }, spec, h.clone(), kids)))
}

/// Obstructions from the Bockstein and the derivations at `l = a_1`.
pub fn obstruction(spec: &GroupSpec, h: &Chain) -> Result<Option<FailureReason>> {
    let d = h.degree;
    let ell = spec.min_alpha();
    if d == 0 {
        return Ok(None);
    }
    let beta = chainops::bockstein_chain(h, ell)?;
    if !beta.is_zero() && !ClassSolver::new(spec, Ring::ModPrimePower(1), d - 1)?.is_boundary(&beta)? {
        return Ok(Some(FailureReason::ObstructedByBockstein { witness: beta }));
    }
    for kappa in 1..=chainops::kappa_max(spec.p, d) {
        let w = chainops::milnor_chain(h, kappa, ell)?;
        if w.is_zero() {
            continue;
        }
        if !ClassSolver::new(spec, Ring::ModPrimePower(ell), w.degree)?.is_boundary(&w)? {
            return Ok(Some(FailureReason::ObstructedByMilnorDiff { kappa, ell, witness: w }));
        }
    }
    Ok(None)
}

/// Decide an integral cycle: a verified certificate of positivity, or the
/// reason none was produced.
pub fn certify_atoral_bordism(spec: &GroupSpec, h: &Chain, assume_bordism: bool) -> Result<Outcome> {
    let t = is_p_toral(spec, h)?;
    if t.toral {
        return Ok(Outcome::Failed(FailureReason::NotAtoral { subset: t.subset.unwrap_or_default(), ell: t.ell }));
    }
    if assume_bordism {
        if let Some(f) = obstruction(spec, h)? {
            return Ok(Outcome::Failed(f));
        }
    }
    let mut b = Builder::new();
    match certify_class(&mut b, spec, h)? {
        Some(_) => Ok(Outcome::Certified(Certificate { schema: CERTIFICATE_SCHEMA, assume_bordism, nodes: b.nodes })),
        None => Ok(Outcome::Failed(b.failure.unwrap_or_else(|| FailureReason::Incomplete {
            residual: h.clone(),
            explanation: "no rule applies".into(),
        }))),
    }
}

fn check_node(nodes: &[Node], i: usize) -> Result<bool> {
    let node = &nodes[i];
    let spec = &node.spec;
    if GroupSpec::from_factors(spec.p, spec.alphas.clone()).is_err() || spec.alphas.is_empty() {
        return Ok(false);
    }
    if node.chain.spec != *spec || node.chain.ring != Ring::Integers || !grouphom::is_cycle(&node.chain) {
        return Ok(false);
    }
    if node.children.iter().any(|&c| c >= i) {
        return Ok(false);
    }
    let kids: Vec<&Node> = node.children.iter().map(|&c| &nodes[c]).collect();
    let n = spec.n();
    let leaf = kids.is_empty();
    let p = BigInt::from(spec.p);
    let ok = match &node.rule {
        Rule::LensGenerator { m } => leaf && n == 1 && *m >= 2 && node.chain == lens_chain(spec, *m)?,
        Rule::TodaOfPositives { ms } => {
            leaf && ms.len() >= 2
                && ms.len() == n
                && ms.iter().all(|&m| m >= 2)
                && spec.is_sorted()
                && node.chain == toda_on(spec, ms)?
        }
        Rule::CalcTimesP { m, lens_first } => {
            leaf && n == 2
                && *m >= 1
                && spec.is_sorted()
                && node.chain == toda_on(spec, &calc_ms(*m, *lens_first))?.scale(&p)
        }
        Rule::CalcMixed { m, lens_first } => {
            leaf && n == 2
                && *m >= 1
                && spec.alphas[0] < spec.alphas[1]
                && node.chain == toda_on(spec, &calc_ms(*m, *lens_first))?
        }
        Rule::DreiTriple { k } => {
            leaf && (*k == 2 || *k == 3) && n == *k && spec.is_sorted() && node.chain == toda_on(spec, &vec![1; *k])?
        }
        Rule::BplDivisible { ms } => {
            leaf && ms.len() >= 2
                && ms.len() == n
                && spec.equal_exponents()
                && node.chain == toda_on(spec, ms)?.scale(&p)
        }
        Rule::BplMixed { ms } => {
            leaf && ms.len() >= 2
                && ms.len() == n
                && spec.is_sorted()
                && spec.alphas[0] < spec.alphas[n - 1]
                && node.chain == toda_on(spec, ms)?
        }
        Rule::CrossWithPositive { positions, other } => {
            kids.len() == 1
                && other.ring == Ring::Integers
                && grouphom::is_cycle(other)
                && positions.len() == kids[0].spec.n()
                && positions.len() + other.n() == n
                && match chainops::interleave(&kids[0].chain, other, positions) {
                    Ok(x) => x.spec == *spec && x.with_spec(spec)? == node.chain,
                    Err(_) => false,
                }
        }
        Rule::Pushforward { positions } => {
            kids.len() == 1 && {
                let f = Composite::Include { positions: positions.clone(), target: spec.clone() };
                match f.apply(&kids[0].chain) {
                    Ok(x) => x == node.chain,
                    Err(_) => false,
                }
            }
        }
        Rule::LinearCombination { coeffs } => {
            if coeffs.len() != kids.len()
                || kids.iter().any(|k| k.spec != *spec || (k.chain.degree != node.chain.degree && !k.chain.is_zero()))
            {
                false
            } else {
                let mut rest = node.chain.clone();
                for (k, c) in kids.iter().zip(coeffs) {
                    rest = rest.sub(&k.chain.scale(c))?;
                }
                rest.is_zero() || ClassSolver::new(spec, Ring::Integers, rest.degree)?.is_boundary(&rest)?
            }
        }
        Rule::GeneralizedLensProduct { rows, ms } => {
            leaf && spec.equal_exponents()
                && rows.len() == n
                && rows.iter().all(|r| r.len() == ms.len())
                && ms.iter().all(|&m| m >= 1)
                && ms.iter().any(|&m| m >= 2)
                && {
                    let source: Vec<u32> = ms.iter().map(|m| 2 * m - 1).collect();
                    let y = lens_image(spec, rows, &source)?;
                    node.chain.degree == y.degree && node.chain.to_ring(y.ring) == y
                }
        }
    };
    Ok(ok)
}

/// Re-check every node of a certificate.
pub fn verify_certificate(cert: &Certificate) -> bool {
    if cert.schema != CERTIFICATE_SCHEMA || cert.nodes.is_empty() {
        return false;
    }
    (0..cert.nodes.len()).all(|i| matches!(check_node(&cert.nodes, i), Ok(true)))
}

/// Positive chains in degree `d` produced directly by the rules, each with a
/// one-rule certificate (plus crosses and lens assembly where needed).
pub fn axiom_instances(spec: &GroupSpec, d: u32) -> Result<Vec<(Chain, Certificate)>> {
    let mut out = Vec::new();
    let wrap = |b: Builder| Certificate { schema: CERTIFICATE_SCHEMA, assume_bordism: true, nodes: b.nodes };
    for s in special_basis(spec, d) {
        let sc = special_cycle(spec, &s)?;
        let mut b = Builder::new();
        if let Some((i, sign)) = direct(&mut b, spec, &s, &sc)? {
            if sign != 1 {
                b.push(Rule::LinearCombination { coeffs: vec![BigInt::from(sign)] }, spec, sc, vec![i]);
            }
            let c = b.nodes.last().expect("node").chain.clone();
            out.push((c, wrap(b)));
        }
        let mut b = Builder::new();
        if let Some(bi) = p_block_node(&mut b, &spec.sub(&s.positions), &s.toda.ms)? {
            let i = cross_outer(&mut b, spec, &s, bi)?;
            let c = b.nodes[i].chain.clone();
            out.push((c, wrap(b)));
        }
    }
    if spec.equal_exponents() && d >= 1 {
        let prods = cycles::lens_products_filtered(spec, d, |e| e.iter().any(|&x| x >= 3))?;
        for lp in prods {
            let mut b = Builder::new();
            if lens_reduced_node(&mut b, spec, &lp)?.is_some() {
                let c = b.nodes.last().expect("node").chain.clone();
                out.push((c, wrap(b)));
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::text::parse_chain;

    fn spec(a: &[u32]) -> GroupSpec {
        GroupSpec::new(3, a.to_vec()).unwrap()
    }

    fn parse(s: &GroupSpec, t: &str) -> Chain {
        parse_chain(s, Ring::Integers, t).unwrap()
    }

    #[test]
    fn torality_examples() {
        let s = spec(&[1, 1, 1]);
        assert!(is_p_toral(&s, &parse(&s, "c1*c1*c1")).unwrap().toral);
        let s1 = spec(&[1]);
        assert!(!is_p_toral(&s1, &parse(&s1, "c3")).unwrap().toral);
        let s2 = spec(&[1, 1]);
        assert!(!is_p_toral(&s2, &parse(&s2, "T(c1,c5)")).unwrap().toral);
        assert!(!is_p_toral(&s2, &parse(&s2, "3*c1*c1")).unwrap().toral);
        assert!(is_p_toral(&s2, &parse(&s2, "c2*c0")).is_err());
    }

    #[test]
    fn toda_c1_c5_is_obstructed() {
        let s = spec(&[1, 1]);
        let h = parse(&s, "T(c1,c5)");
        match certify_atoral_bordism(&s, &h, true).unwrap() {
            Outcome::Failed(FailureReason::ObstructedByMilnorDiff { kappa, ell, witness }) => {
                assert_eq!((kappa, ell), (1, 1));
                assert_eq!(witness.to_string(), "c1*c1");
            }
            o => panic!("unexpected {o:?}"),
        }
        match certify_atoral_bordism(&s, &h, false).unwrap() {
            Outcome::Failed(FailureReason::Incomplete { .. }) => {}
            o => panic!("unexpected {o:?}"),
        }
    }

    #[test]
    fn mixed_exponents_certify() {
        let s = spec(&[1, 2]);
        let h = parse(&s, "T(c1,c5)");
        let Outcome::Certified(c) = certify_atoral_bordism(&s, &h, true).unwrap() else { panic!() };
        assert!(c.uses("CalcMixed"));
        assert!(verify_certificate(&c));
    }

    #[test]
    fn lens_generator_pushed_forward() {
        let s = spec(&[1, 2]);
        let h = parse(&s, "c3*c0");
        let Outcome::Certified(c) = certify_atoral_bordism(&s, &h, true).unwrap() else { panic!() };
        assert!(c.uses("LensGenerator") && c.uses("Pushforward"));
        assert!(verify_certificate(&c));
        let s1 = spec(&[1]);
        let Outcome::Certified(c) = certify_atoral_bordism(&s1, &parse(&s1, "c3"), true).unwrap() else { panic!() };
        assert!(c.uses("LensGenerator"));
    }

    #[test]
    fn tampering_is_rejected() {
        let s = spec(&[1, 2]);
        let Outcome::Certified(c) = certify_atoral_bordism(&s, &parse(&s, "T(c1,c5)"), true).unwrap() else { panic!() };
        let mut t = c.clone();
        let r = t.nodes.len() - 1;
        t.nodes[r].chain = t.nodes[r].chain.scale(&BigInt::from(2));
        assert!(!verify_certificate(&t));
        let s11 = spec(&[1, 1]);
        let calc = Node {
            rule: Rule::CalcMixed { m: 3, lens_first: false },
            spec: s11.clone(),
            chain: parse(&s11, "T(c1,c5)"),
            children: vec![],
        };
        assert!(!verify_certificate(&Certificate { schema: 1, assume_bordism: true, nodes: vec![calc] }));
    }
}
