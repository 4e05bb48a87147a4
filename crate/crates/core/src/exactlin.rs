//! Exact linear algebra over the integers and over `Z/p^l`.
//!
//! Integer matrices use arbitrary-precision entries. Modular matrices carry a
//! prime power modulus and are reduced with a Smith form over the local ring
//! `Z/p^l`, which needs no coefficient growth.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Sparse integer matrix. Stored entries are nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    pub rows: usize,
    pub cols: usize,
    entries: BTreeMap<(usize, usize), BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged matrix");
            for (j, x) in row.iter().enumerate() {
                m.set(i, j, x.clone().into());
            }
        }
        m
    }

    pub fn from_dense(rows: usize, cols: usize, dense: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, row) in dense.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                if !x.is_zero() {
                    m.entries.insert((i, j), x.clone());
                }
            }
        }
        m
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length");
            for (i, x) in col.iter().enumerate() {
                m.set(i, j, x.clone());
            }
        }
        m
    }

    pub fn get(&self, r: usize, c: usize) -> BigInt {
        self.entries.get(&(r, c)).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        if v.is_zero() {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    pub fn add_to(&mut self, r: usize, c: usize, v: &BigInt) {
        let cur = self.get(r, c);
        self.set(r, c, cur + v);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &BigInt)> {
        self.entries.iter()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut d = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for (&(i, j), x) in &self.entries {
            d[i][j] = x.clone();
        }
        d
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<BigInt>> {
        let mut cols = vec![vec![BigInt::zero(); self.rows]; self.cols];
        for (&(i, j), x) in &self.entries {
            cols[j][i] = x.clone();
        }
        cols
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (&(i, j), x) in &self.entries {
            t.entries.insert((j, i), x.clone());
        }
        t
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let mut by_row: BTreeMap<usize, Vec<(usize, &BigInt)>> = BTreeMap::new();
        for (&(k, j), x) in &other.entries {
            by_row.entry(k).or_default().push((j, x));
        }
        let mut acc: BTreeMap<(usize, usize), BigInt> = BTreeMap::new();
        for (&(i, k), a) in &self.entries {
            if let Some(row) = by_row.get(&k) {
                for &(j, b) in row {
                    *acc.entry((i, j)).or_insert_with(BigInt::zero) += a * b;
                }
            }
        }
        acc.retain(|_, v| !v.is_zero());
        Ok(IntMatrix { rows: self.rows, cols: other.cols, entries: acc })
    }

    pub fn mul_vec(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        let mut out = vec![BigInt::zero(); self.rows];
        for (&(i, j), x) in &self.entries {
            out[i] += x * &v[j];
        }
        Ok(out)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.rows != other.rows {
            return Err(Error::Dimension("hcat row mismatch".into()));
        }
        let mut m = self.clone();
        m.cols += other.cols;
        for (&(i, j), x) in &other.entries {
            m.entries.insert((i, j + self.cols), x.clone());
        }
        Ok(m)
    }

    /// Vertical concatenation.
    pub fn vcat(&self, other: &IntMatrix) -> Result<IntMatrix> {
        if self.cols != other.cols {
            return Err(Error::Dimension("vcat column mismatch".into()));
        }
        let mut m = self.clone();
        m.rows += other.rows;
        for (&(i, j), x) in &other.entries {
            m.entries.insert((i + self.rows, j), x.clone());
        }
        Ok(m)
    }

    pub fn scaled(&self, k: &BigInt) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows, self.cols);
        for (&(i, j), x) in &self.entries {
            m.set(i, j, x * k);
        }
        m
    }
}

/// Result of a Smith normal form computation: `u * m * v = diag(d)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    /// Diagonal entries, `min(rows, cols)` of them, nonnegative with `d[i] | d[i+1]`.
    pub d: Vec<BigInt>,
    pub u: IntMatrix,
    pub u_inv: IntMatrix,
    pub v: IntMatrix,
    pub rows: usize,
    pub cols: usize,
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.d.iter().filter(|x| !x.is_zero()).count()
    }

    pub fn diagonal_matrix(&self) -> IntMatrix {
        let mut m = IntMatrix::zeros(self.rows, self.cols);
        for (i, x) in self.d.iter().enumerate() {
            m.set(i, i, x.clone());
        }
        m
    }

    /// Cokernel invariant factors with units dropped and `0` for free summands.
    pub fn cokernel_invariants(&self) -> Vec<BigInt> {
        let mut out: Vec<BigInt> = self.d.iter().filter(|x| !x.is_one()).cloned().collect();
        out.retain(|x| !x.is_zero());
        out.extend(std::iter::repeat_n(BigInt::zero(), self.rows - self.rank()));
        out
    }
}

struct Dense {
    a: Vec<Vec<BigInt>>,
    u: Vec<Vec<BigInt>>,
    u_inv: Vec<Vec<BigInt>>,
    v: Vec<Vec<BigInt>>,
}

impl Dense {
    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        self.a.swap(i, j);
        self.u.swap(i, j);
        for row in &mut self.u_inv {
            row.swap(i, j);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for row in &mut self.a {
            row.swap(i, j);
        }
        for row in &mut self.v {
            row.swap(i, j);
        }
    }

    /// row_i += k * row_j
    fn add_row(&mut self, i: usize, j: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        let src = self.a[j].clone();
        for (x, y) in self.a[i].iter_mut().zip(&src) {
            if !y.is_zero() {
                *x += k * y;
            }
        }
        let src = self.u[j].clone();
        for (x, y) in self.u[i].iter_mut().zip(&src) {
            if !y.is_zero() {
                *x += k * y;
            }
        }
        for row in &mut self.u_inv {
            let y = row[i].clone();
            if !y.is_zero() {
                row[j] -= k * y;
            }
        }
    }

    /// col_i += k * col_j
    fn add_col(&mut self, i: usize, j: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for row in self.a.iter_mut().chain(self.v.iter_mut()) {
            let y = row[j].clone();
            if !y.is_zero() {
                row[i] += k * y;
            }
        }
    }

    fn negate_row(&mut self, i: usize) {
        for x in self.a[i].iter_mut().chain(self.u[i].iter_mut()) {
            *x = -x.clone();
        }
        for row in &mut self.u_inv {
            row[i] = -row[i].clone();
        }
    }
}

fn identity_dense(n: usize) -> Vec<Vec<BigInt>> {
    (0..n).map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect()
}

/// Smith normal form with smallest-absolute-value pivoting, ties broken by
/// `(row, col)` order.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let (r, c) = (m.rows, m.cols);
    let mut st = Dense { a: m.to_dense(), u: identity_dense(r), u_inv: identity_dense(r), v: identity_dense(c) };
    let k = r.min(c);
    for t in 0..k {
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..r {
                for j in t..c {
                    let x = &st.a[i][j];
                    if x.is_zero() {
                        continue;
                    }
                    match best {
                        None => best = Some((i, j)),
                        Some((bi, bj)) => {
                            if x.abs() < st.a[bi][bj].abs() {
                                best = Some((i, j));
                            }
                        }
                    }
                }
            }
            let Some((pi, pj)) = best else {
                return finish(st, r, c);
            };
            st.swap_rows(t, pi);
            st.swap_cols(t, pj);
            let piv = st.a[t][t].clone();
            let mut dirty = false;
            for i in t + 1..r {
                if st.a[i][t].is_zero() {
                    continue;
                }
                let q = st.a[i][t].div_floor(&piv);
                st.add_row(i, t, &-q);
                if !st.a[i][t].is_zero() {
                    dirty = true;
                }
            }
            for j in t + 1..c {
                if st.a[t][j].is_zero() {
                    continue;
                }
                let q = st.a[t][j].div_floor(&piv);
                st.add_col(j, t, &-q);
                if !st.a[t][j].is_zero() {
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            let mut offender = None;
            'scan: for i in t + 1..r {
                for j in t + 1..c {
                    if !st.a[i][j].is_multiple_of(&piv) {
                        offender = Some(i);
                        break 'scan;
                    }
                }
            }
            match offender {
                Some(i) => st.add_row(t, i, &BigInt::one()),
                None => break,
            }
        }
        if st.a[t][t].is_negative() {
            st.negate_row(t);
        }
    }
    finish(st, r, c)
}

fn finish(st: Dense, r: usize, c: usize) -> SnfResult {
    let k = r.min(c);
    let mut st = st;
    for t in 0..k {
        if st.a[t][t].is_negative() {
            st.negate_row(t);
        }
    }
    let d = (0..k).map(|i| st.a[i][i].clone()).collect();
    SnfResult {
        d,
        u: IntMatrix::from_dense(r, r, &st.u),
        u_inv: IntMatrix::from_dense(r, r, &st.u_inv),
        v: IntMatrix::from_dense(c, c, &st.v),
        rows: r,
        cols: c,
    }
}

/// Z-basis of the integer kernel, as columns.
pub fn kernel_basis_int(m: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(m);
    let rank = snf.rank();
    let cols: Vec<Vec<BigInt>> = (rank..m.cols).map(|j| snf.v.column(j)).collect();
    IntMatrix::from_columns(m.cols, &cols)
}

/// Z-basis of the lattice spanned by the columns of `gens`.
pub fn image_basis_int(gens: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(gens);
    let mut cols = Vec::new();
    for (i, d) in snf.d.iter().enumerate() {
        if d.is_zero() {
            continue;
        }
        cols.push(snf.u_inv.column(i).into_iter().map(|x| x * d).collect());
    }
    IntMatrix::from_columns(gens.rows, &cols)
}

/// One integer solution of `m x = b`, if any.
pub fn solve_int(m: &IntMatrix, b: &[BigInt]) -> Result<Option<Vec<BigInt>>> {
    if b.len() != m.rows {
        return Err(Error::Dimension(format!("right-hand side of length {} for {} rows", b.len(), m.rows)));
    }
    let snf = smith_normal_form(m);
    Ok(solve_with_snf(&snf, b))
}

/// Solve `m x = b` over the integers given a precomputed Smith form of `m`.
pub fn solve_with_snf(snf: &SnfResult, b: &[BigInt]) -> Option<Vec<BigInt>> {
    let c = snf.u.mul_vec(b).expect("dimensions checked");
    let mut y = vec![BigInt::zero(); snf.cols];
    for (i, ci) in c.iter().enumerate() {
        let d = snf.d.get(i).cloned().unwrap_or_else(BigInt::zero);
        if d.is_zero() {
            if !ci.is_zero() {
                return None;
            }
        } else {
            let (q, rem) = ci.div_rem(&d);
            if !rem.is_zero() {
                return None;
            }
            y[i] = q;
        }
    }
    Some(snf.v.mul_vec(&y).expect("dimensions checked"))
}

/// Structure of a quotient of lattices `L1 / L2`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LatticeQuotient {
    /// Invariant factors without units; `0` marks a free summand.
    pub invariants: Vec<BigInt>,
    /// One lifted generator per invariant factor, in ambient coordinates.
    pub representatives: Vec<Vec<BigInt>>,
}

/// Quotient of the lattice with Z-basis `basis` (columns) by the sublattice
/// spanned by the columns of `sub`.
pub fn lattice_quotient(basis: &IntMatrix, sub: &IntMatrix) -> Result<LatticeQuotient> {
    if basis.rows != sub.rows {
        return Err(Error::Dimension("lattice ambient mismatch".into()));
    }
    let k = basis.cols;
    let snf_b = smith_normal_form(basis);
    let mut coords = Vec::with_capacity(sub.cols);
    for col in sub.columns() {
        let z = solve_with_snf(&snf_b, &col)
            .ok_or_else(|| Error::Precondition("sublattice is not contained in the lattice".into()))?;
        coords.push(z);
    }
    let z = IntMatrix::from_columns(k, &coords);
    let snf_z = smith_normal_form(&z);
    let mut invariants = Vec::new();
    let mut representatives = Vec::new();
    for i in 0..k {
        let d = snf_z.d.get(i).cloned().unwrap_or_else(BigInt::zero);
        if d.is_one() {
            continue;
        }
        let gen = snf_z.u_inv.column(i);
        let mut rep = basis.mul_vec(&gen)?;
        if rep.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
            rep.iter_mut().for_each(|x| *x = -&*x);
        }
        representatives.push(rep);
        invariants.push(d);
    }
    Ok(LatticeQuotient { invariants, representatives })
}

/// Invariant factors of `ker(d_out) / im(d_in)`.
pub fn quotient_invariants(d_in: &IntMatrix, d_out: &IntMatrix) -> Result<Vec<BigInt>> {
    Ok(homology_quotient(d_in, d_out)?.invariants)
}

/// `ker(d_out) / im(d_in)` with representatives.
pub fn homology_quotient(d_in: &IntMatrix, d_out: &IntMatrix) -> Result<LatticeQuotient> {
    if d_in.rows != d_out.cols {
        return Err(Error::Dimension(format!(
            "incoming map has {} rows but outgoing map has {} columns",
            d_in.rows, d_out.cols
        )));
    }
    if !d_out.mul(d_in)?.is_zero() {
        return Err(Error::Composition);
    }
    let ker = kernel_basis_int(d_out);
    lattice_quotient(&ker, d_in)
}

/// `x^e` for machine integers, checked.
pub fn pow_u64(x: u64, e: u32) -> Option<u64> {
    x.checked_pow(e)
}

pub fn big_pow(p: u64, e: u32) -> BigInt {
    num_traits::pow(BigInt::from(p), e as usize)
}

/// p-adic valuation; `None` for zero.
pub fn valuation(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    let mut v = 0;
    let mut y = x.abs();
    loop {
        let (q, r) = y.div_rem(&p);
        if !r.is_zero() {
            return Some(v);
        }
        y = q;
        v += 1;
    }
}

/// Sparse matrix over `Z/p^l`. Stored entries are nonzero residues.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMatrix {
    pub prime: u64,
    pub exponent: u32,
    pub rows: usize,
    pub cols: usize,
    entries: BTreeMap<(usize, usize), u64>,
}

impl ModMatrix {
    pub fn zeros(prime: u64, exponent: u32, rows: usize, cols: usize) -> Self {
        assert!(exponent >= 1, "modulus exponent must be positive");
        let modulus = prime.checked_pow(exponent).expect("modulus fits in 64 bits");
        assert!(modulus > 1);
        ModMatrix { prime, exponent, rows, cols, entries: BTreeMap::new() }
    }

    pub fn modulus(&self) -> u64 {
        self.prime.pow(self.exponent)
    }

    pub fn from_rows(prime: u64, exponent: u32, rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(prime, exponent, rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                m.set_int(i, j, &BigInt::from(x));
            }
        }
        m
    }

    /// Reduce an integer matrix.
    pub fn from_int(prime: u64, exponent: u32, m: &IntMatrix) -> Self {
        let mut out = Self::zeros(prime, exponent, m.rows, m.cols);
        for (&(i, j), x) in m.entries() {
            out.set_int(i, j, x);
        }
        out
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries.get(&(r, c)).copied().unwrap_or(0)
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        assert!(r < self.rows && c < self.cols, "index out of range");
        let v = v % self.modulus();
        if v == 0 {
            self.entries.remove(&(r, c));
        } else {
            self.entries.insert((r, c), v);
        }
    }

    pub fn set_int(&mut self, r: usize, c: usize, v: &BigInt) {
        let v = reduce_big(v, self.modulus());
        self.set(r, c, v);
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &u64)> {
        self.entries.iter()
    }

    pub fn to_dense(&self) -> Vec<Vec<u64>> {
        let mut d = vec![vec![0; self.cols]; self.rows];
        for (&(i, j), &x) in &self.entries {
            d[i][j] = x;
        }
        d
    }

    pub fn from_dense(prime: u64, exponent: u32, rows: usize, cols: usize, dense: &[Vec<u64>]) -> Self {
        let mut m = Self::zeros(prime, exponent, rows, cols);
        for (i, row) in dense.iter().enumerate() {
            for (j, &x) in row.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn from_columns(prime: u64, exponent: u32, rows: usize, columns: &[Vec<u64>]) -> Self {
        let mut m = Self::zeros(prime, exponent, rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for (i, &x) in col.iter().enumerate() {
                m.set(i, j, x);
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &[u64]) -> Result<Vec<u64>> {
        if v.len() != self.cols {
            return Err(Error::Dimension(format!("vector of length {} for {} columns", v.len(), self.cols)));
        }
        let q = self.modulus();
        let mut out = vec![0u64; self.rows];
        for (&(i, j), &x) in &self.entries {
            out[i] = add_mod(out[i], mul_mod(x, v[j], q), q);
        }
        Ok(out)
    }

    pub fn vcat(&self, other: &ModMatrix) -> Result<ModMatrix> {
        if self.cols != other.cols || self.modulus() != other.modulus() {
            return Err(Error::Dimension("vcat mismatch".into()));
        }
        let mut m = self.clone();
        m.rows += other.rows;
        for (&(i, j), &x) in &other.entries {
            m.entries.insert((i + self.rows, j), x);
        }
        Ok(m)
    }

    pub fn rank(&self) -> usize {
        mod_snf(self).rank()
    }
}

pub fn reduce_big(v: &BigInt, q: u64) -> u64 {
    let r = v.mod_floor(&BigInt::from(q));
    u64::try_from(r).expect("residue below modulus")
}

pub fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 + b as u128) % q as u128) as u64
}

pub fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 + q as u128 - (b % q) as u128) % q as u128) as u64
}

pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

/// Inverse of a unit modulo `q`.
pub fn inv_mod(a: u64, q: u64) -> Option<u64> {
    let e = BigInt::from(a).extended_gcd(&BigInt::from(q));
    if !e.gcd.is_one() {
        return None;
    }
    Some(reduce_big(&e.x, q))
}

fn val_u64(x: u64, p: u64, cap: u32) -> u32 {
    if x == 0 {
        return cap;
    }
    let mut v = 0;
    let mut y = x;
    while y.is_multiple_of(p) && v < cap {
        y /= p;
        v += 1;
    }
    v
}

/// Smith form over the local ring `Z/p^l`: `u * m * v = diag(p^{vals})`.
#[derive(Clone, Debug)]
pub struct ModSnf {
    pub prime: u64,
    pub exponent: u32,
    /// Valuations of the nonzero diagonal entries, ascending.
    pub vals: Vec<u32>,
    pub u: Vec<Vec<u64>>,
    pub v: Vec<Vec<u64>>,
    pub rows: usize,
    pub cols: usize,
}

impl ModSnf {
    pub fn rank(&self) -> usize {
        self.vals.iter().filter(|&&v| v == 0).count()
    }
}

pub fn mod_snf(m: &ModMatrix) -> ModSnf {
    let (p, l) = (m.prime, m.exponent);
    let q = m.modulus();
    let (r, c) = (m.rows, m.cols);
    let mut a = m.to_dense();
    let mut u: Vec<Vec<u64>> = (0..r).map(|i| (0..r).map(|j| u64::from(i == j)).collect()).collect();
    let mut v: Vec<Vec<u64>> = (0..c).map(|i| (0..c).map(|j| u64::from(i == j)).collect()).collect();
    let mut vals = Vec::new();
    for t in 0..r.min(c) {
        let mut best: Option<(u32, usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x == 0 {
                    continue;
                }
                let vx = val_u64(x, p, l);
                if best.is_none_or(|(bv, _, _)| vx < bv) {
                    best = Some((vx, i, j));
                }
            }
        }
        let Some((pv, pi, pj)) = best else { break };
        a.swap(t, pi);
        u.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        for row in v.iter_mut() {
            row.swap(t, pj);
        }
        let pp = p.pow(pv);
        let unit = a[t][t] / pp;
        let uinv = inv_mod(unit % q, q).expect("unit part is invertible");
        for x in a[t].iter_mut().chain(u[t].iter_mut()) {
            *x = mul_mod(*x, uinv, q);
        }
        // a[t][t] == p^pv now
        for i in 0..r {
            if i == t || a[i][t] == 0 {
                continue;
            }
            let k = (a[i][t] / pp) % q;
            let (src_a, src_u) = (a[t].clone(), u[t].clone());
            for (x, y) in a[i].iter_mut().zip(&src_a) {
                *x = sub_mod(*x, mul_mod(k, *y, q), q);
            }
            for (x, y) in u[i].iter_mut().zip(&src_u) {
                *x = sub_mod(*x, mul_mod(k, *y, q), q);
            }
        }
        for j in t + 1..c {
            if a[t][j] == 0 {
                continue;
            }
            let k = (a[t][j] / pp) % q;
            for row in a.iter_mut() {
                let y = row[t];
                row[j] = sub_mod(row[j], mul_mod(k, y, q), q);
            }
            for row in v.iter_mut() {
                let y = row[t];
                row[j] = sub_mod(row[j], mul_mod(k, y, q), q);
            }
        }
        vals.push(pv);
    }
    ModSnf { prime: p, exponent: l, vals, u, v, rows: r, cols: c }
}

/// Generators of `{x : m x = 0 mod p^l}`.
pub fn kernel_mod(m: &ModMatrix) -> Vec<Vec<u64>> {
    let q = m.modulus();
    let snf = mod_snf(m);
    let mut out = Vec::new();
    for j in 0..m.cols {
        let scale = match snf.vals.get(j) {
            Some(&0) => continue,
            Some(&vj) => m.prime.pow(m.exponent - vj),
            None => 1,
        };
        let col: Vec<u64> = (0..m.cols).map(|i| mul_mod(snf.v[i][j], scale, q)).collect();
        if col.iter().any(|&x| x != 0) {
            out.push(col);
        }
    }
    out
}

/// One solution of `m x = b mod p^l`, or `None` when the system is inconsistent.
pub fn solve_mod(m: &ModMatrix, b: &[u64]) -> Result<Option<Vec<u64>>> {
    if b.len() != m.rows {
        return Err(Error::Dimension(format!("right-hand side of length {} for {} rows", b.len(), m.rows)));
    }
    let snf = mod_snf(m);
    Ok(solve_with_mod_snf(&snf, b))
}

pub fn solve_with_mod_snf(snf: &ModSnf, b: &[u64]) -> Option<Vec<u64>> {
    let (p, l) = (snf.prime, snf.exponent);
    let q = p.pow(l);
    let c: Vec<u64> = snf
        .u
        .iter()
        .map(|row| row.iter().zip(b).fold(0u64, |acc, (&x, &y)| add_mod(acc, mul_mod(x, y % q, q), q)))
        .collect();
    let mut y = vec![0u64; snf.cols];
    for (i, &ci) in c.iter().enumerate() {
        match snf.vals.get(i) {
            Some(&vi) => {
                if val_u64(ci, p, l) < vi {
                    return None;
                }
                y[i] = ci / p.pow(vi);
            }
            None => {
                if ci != 0 {
                    return None;
                }
            }
        }
    }
    Some(
        snf.v
            .iter()
            .map(|row| row.iter().zip(&y).fold(0u64, |acc, (&x, &yy)| add_mod(acc, mul_mod(x, yy, q), q)))
            .collect(),
    )
}

/// Rank over F_p of the span of the given vectors.
pub fn span_rank_mod(prime: u64, exponent: u32, len: usize, vectors: &[Vec<u64>]) -> usize {
    if vectors.is_empty() {
        return 0;
    }
    let m = ModMatrix::from_columns(prime, exponent, len, vectors);
    m.rank()
}
