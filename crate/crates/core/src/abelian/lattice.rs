//! Integer row lattices: Hermite normal form, kernels, indices, Smith form.
//!
//! A matrix here always stands for the Z-span of its rows. The HNF is
//! row-style with positive pivots, entries above each pivot reduced into
//! `[0, pivot)` and zero rows dropped, so two matrices span the same lattice
//! exactly when their HNFs are equal.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerMatrix {
    pub cols: usize,
    pub rows: Vec<Vec<BigInt>>,
}

impl IntegerMatrix {
    pub fn new(cols: usize, rows: Vec<Vec<BigInt>>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), cols, "row length does not match column count");
        }
        IntegerMatrix { cols, rows }
    }

    pub fn empty(cols: usize) -> Self {
        IntegerMatrix { cols, rows: Vec::new() }
    }

    pub fn from_i64(rows: &[Vec<i64>]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        IntegerMatrix::new(
            cols,
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
            .collect();
        IntegerMatrix { cols: n, rows }
    }

    pub fn scaled_identity(n: usize, d: &BigInt) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).map(|j| if i == j { d.clone() } else { BigInt::zero() }).collect())
            .collect();
        IntegerMatrix { cols: n, rows }
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn to_i64(&self) -> Option<Vec<Vec<i64>>> {
        use num_traits::ToPrimitive;
        self.rows
            .iter()
            .map(|r| r.iter().map(|x| x.to_i64()).collect())
            .collect()
    }

    /// Rows as decimal strings, used by reports.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.rows.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
    }

    pub fn mul(&self, other: &IntegerMatrix) -> IntegerMatrix {
        assert_eq!(self.cols, other.nrows());
        let rows = self
            .rows
            .iter()
            .map(|r| {
                (0..other.cols)
                    .map(|j| {
                        let mut acc = BigInt::zero();
                        for (k, a) in r.iter().enumerate() {
                            if !a.is_zero() {
                                acc += a * &other.rows[k][j];
                            }
                        }
                        acc
                    })
                    .collect()
            })
            .collect();
        IntegerMatrix { cols: other.cols, rows }
    }

    pub fn transpose(&self) -> IntegerMatrix {
        let rows = (0..self.cols)
            .map(|j| self.rows.iter().map(|r| r[j].clone()).collect())
            .collect();
        IntegerMatrix { cols: self.nrows(), rows }
    }
}

/// Incremental row echelon form over Z.
///
/// Rows are kept sorted by pivot column. `insert` merges a vector into the
/// lattice with extended-gcd row operations, which are unimodular, so the
/// span is always exactly the span of everything inserted.
///
/// Once the lattice has full rank it contains `P·Z^n` for `P` the product of
/// the pivots. From then on entries right of the pivots are kept reduced
/// modulo `P`: the rows stay triangular with the same pivots, hence span the
/// same lattice, and coefficients cannot grow.
#[derive(Debug, Clone)]
pub struct Echelon {
    cols: usize,
    rows: Vec<Vec<BigInt>>,
    pivot_cols: Vec<usize>,
    modulus: Option<BigInt>,
}

fn leading(v: &[BigInt]) -> Option<usize> {
    v.iter().position(|x| !x.is_zero())
}

fn axpy(dst: &mut [BigInt], a: &BigInt, src: &[BigInt], from: usize) {
    for k in from..dst.len() {
        if !src[k].is_zero() {
            dst[k] -= a * &src[k];
        }
    }
}

fn reduce_tail(v: &mut [BigInt], from: usize, m: &BigInt) {
    for x in v[from..].iter_mut() {
        if x.is_negative() || &*x >= m {
            *x = x.mod_floor(m);
        }
    }
}

impl Echelon {
    pub fn new(cols: usize) -> Self {
        Echelon { cols, rows: Vec::new(), pivot_cols: Vec::new(), modulus: None }
    }

    /// Echelon of `m·Z^n`, for building a lattice known to contain it.
    pub fn with_modulus(cols: usize, m: &BigInt) -> Self {
        assert!(m.is_positive());
        let rows = (0..cols)
            .map(|i| (0..cols).map(|j| if i == j { m.clone() } else { BigInt::zero() }).collect())
            .collect();
        Echelon { cols, rows, pivot_cols: (0..cols).collect(), modulus: Some(m.clone()) }
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    fn update_modulus(&mut self) {
        if self.rows.len() != self.cols || self.cols == 0 {
            return;
        }
        let mut p = BigInt::one();
        for (row, &c) in self.rows.iter().zip(&self.pivot_cols) {
            p *= &row[c];
        }
        if self.modulus.as_ref() != Some(&p) {
            for (row, &c) in self.rows.iter_mut().zip(&self.pivot_cols) {
                reduce_tail(row, c + 1, &p);
            }
            self.modulus = Some(p);
        }
    }

    /// Inserts `v`; returns true when the lattice grew.
    pub fn insert(&mut self, mut v: Vec<BigInt>) -> bool {
        assert_eq!(v.len(), self.cols);
        if let Some(m) = &self.modulus {
            reduce_tail(&mut v, 0, m);
        }
        let changed = self.insert_inner(v);
        if changed {
            self.update_modulus();
        }
        changed
    }

    fn insert_inner(&mut self, mut v: Vec<BigInt>) -> bool {
        let mut changed = false;
        let mut start = 0;
        loop {
            let c = match v[start..].iter().position(|x| !x.is_zero()) {
                Some(off) => start + off,
                None => return changed,
            };
            match self.pivot_cols.binary_search(&c) {
                Err(pos) => {
                    if v[c].is_negative() {
                        for x in v.iter_mut() {
                            *x = -&*x;
                        }
                    }
                    self.rows.insert(pos, v);
                    self.pivot_cols.insert(pos, c);
                    return true;
                }
                Ok(pos) => {
                    let a = self.rows[pos][c].clone();
                    let b = v[c].clone();
                    if (&b % &a).is_zero() {
                        let q = &b / &a;
                        let row = &self.rows[pos];
                        axpy(&mut v, &q, row, c);
                        if let Some(m) = &self.modulus {
                            reduce_tail(&mut v, c + 1, m);
                        }
                    } else {
                        let eg = a.extended_gcd(&b);
                        let (g, x, y) = (eg.gcd, eg.x, eg.y);
                        let row = std::mem::take(&mut self.rows[pos]);
                        let mut newrow: Vec<BigInt> = Vec::with_capacity(self.cols);
                        let mut newv: Vec<BigInt> = Vec::with_capacity(self.cols);
                        let ag = &a / &g;
                        let bg = &b / &g;
                        for k in 0..self.cols {
                            if k < c {
                                newrow.push(BigInt::zero());
                                newv.push(BigInt::zero());
                                continue;
                            }
                            newrow.push(&x * &row[k] + &y * &v[k]);
                            newv.push(&ag * &v[k] - &bg * &row[k]);
                        }
                        if let Some(m) = &self.modulus {
                            reduce_tail(&mut newrow, c + 1, m);
                            reduce_tail(&mut newv, c + 1, m);
                        }
                        self.rows[pos] = newrow;
                        v = newv;
                        changed = true;
                    }
                    start = c + 1;
                    debug_assert!(v[c].is_zero());
                }
            }
        }
    }

    /// Reduces `v` against the echelon rows. Returns the coordinates when `v`
    /// lies in the lattice.
    pub fn solve(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut w = v.to_vec();
        let mut coords = Vec::with_capacity(self.rows.len());
        for (row, &c) in self.rows.iter().zip(&self.pivot_cols) {
            if let Some(l) = leading(&w) {
                if l < c {
                    return None;
                }
            }
            let (q, r) = w[c].div_rem(&row[c]);
            if !r.is_zero() {
                return None;
            }
            axpy(&mut w, &q, row, c);
            coords.push(q);
        }
        if w.iter().all(|x| x.is_zero()) {
            Some(coords)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.solve(v).is_some()
    }

    /// Canonical HNF of the current lattice.
    pub fn into_hnf(mut self) -> IntegerMatrix {
        let n = self.rows.len();
        for j in 0..n {
            let c = self.pivot_cols[j];
            let (upper, lower) = self.rows.split_at_mut(j);
            let prow = &lower[0];
            let p = &prow[c];
            for row in upper.iter_mut() {
                let q = row[c].div_floor(p);
                if !q.is_zero() {
                    axpy(row, &q, prow, c);
                }
            }
        }
        IntegerMatrix { cols: self.cols, rows: self.rows }
    }

    pub fn to_hnf(&self) -> IntegerMatrix {
        self.clone().into_hnf()
    }

    pub fn pivots(&self) -> &[usize] {
        &self.pivot_cols
    }
}

/// Row-style Hermite normal form of the row lattice of `m`.
pub fn hnf(m: &IntegerMatrix) -> IntegerMatrix {
    let mut e = Echelon::new(m.cols);
    for r in &m.rows {
        e.insert(r.clone());
    }
    e.into_hnf()
}

pub fn rank(m: &IntegerMatrix) -> usize {
    let mut e = Echelon::new(m.cols);
    for r in &m.rows {
        e.insert(r.clone());
    }
    e.rank()
}

/// HNF basis of the integer left kernel `{x : xM = 0}`.
pub fn kernel_lattice(m: &IntegerMatrix) -> IntegerMatrix {
    let n = m.nrows();
    let width = m.cols + n;
    let mut e = Echelon::new(width);
    for (i, r) in m.rows.iter().enumerate() {
        let mut v = r.clone();
        v.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
        e.insert(v);
    }
    let mut k = Echelon::new(n);
    for (row, &c) in e.rows.iter().zip(&e.pivot_cols) {
        if c >= m.cols {
            k.insert(row[m.cols..].to_vec());
        }
    }
    k.into_hnf()
}

/// Basis of `{a ∈ Z^r : Σ a_j w_j ∈ L}` for a lattice `L` that contains `m·Z^n`.
///
/// Works in the full-rank lattice spanned by `[L | 0]`, `[w_j | e_j]` and
/// `m·Z^{n+r}`, so every coefficient stays below `m`.
pub fn kernel_modulo(w: &[Vec<BigInt>], l: &IntegerMatrix, m: &BigInt) -> IntegerMatrix {
    let n = l.cols;
    let r = w.len();
    let mut e = Echelon::with_modulus(n + r, m);
    for row in &l.rows {
        let mut v = row.clone();
        v.resize(n + r, BigInt::zero());
        e.insert(v);
    }
    for (j, row) in w.iter().enumerate() {
        let mut v = row.clone();
        v.extend((0..r).map(|k| if k == j { BigInt::one() } else { BigInt::zero() }));
        e.insert(v);
    }
    let rows = e
        .rows
        .iter()
        .zip(&e.pivot_cols)
        .filter(|(_, &c)| c >= n)
        .map(|(row, _)| row[n..].to_vec())
        .collect();
    IntegerMatrix { cols: r, rows }
}

/// Result of [`lattice_index`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Index {
    Finite(BigInt),
    Infinite,
}

/// Index `[L1 : L2]`; `L2` must lie in `L1`.
pub fn lattice_index(l1: &IntegerMatrix, l2: &IntegerMatrix) -> Result<Index> {
    assert_eq!(l1.cols, l2.cols);
    let mut e = Echelon::new(l1.cols);
    for r in &l1.rows {
        e.insert(r.clone());
    }
    let mut coords = Vec::with_capacity(l2.nrows());
    for r in &l2.rows {
        match e.solve(r) {
            Some(c) => coords.push(c),
            None => {
                return Err(Error::NotContained { witness: r.iter().map(|x| x.to_string()).collect() })
            }
        }
    }
    let r1 = e.rank();
    let c = IntegerMatrix { cols: r1, rows: coords };
    let h = hnf(&c);
    if h.nrows() != r1 {
        return Ok(Index::Infinite);
    }
    let mut d = BigInt::one();
    for (i, row) in h.rows.iter().enumerate() {
        d *= &row[i];
    }
    Ok(Index::Finite(d.abs()))
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(m: &IntegerMatrix) -> BigInt {
    let n = m.nrows();
    assert_eq!(n, m.cols);
    if n == 0 {
        return BigInt::one();
    }
    let mut a = m.rows.clone();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
            a[i][k] = BigInt::zero();
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

/// Smith normal form `P·M·Q = D` with unimodular `P`, `Q`.
#[derive(Debug, Clone)]
pub struct Smith {
    pub diagonal: Vec<BigInt>,
    pub p: IntegerMatrix,
    pub q: IntegerMatrix,
}

pub fn smith(m: &IntegerMatrix) -> Smith {
    let rows = m.nrows();
    let cols = m.cols;
    let mut a = m.rows.clone();
    let mut p = IntegerMatrix::identity(rows).rows;
    let mut q = IntegerMatrix::identity(cols).rows;
    let mut diag = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pick smallest nonzero entry in the remaining block
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !a[i][j].is_zero() {
                    match best {
                        None => best = Some((i, j)),
                        Some((bi, bj)) if a[i][j].abs() < a[bi][bj].abs() => best = Some((i, j)),
                        _ => {}
                    }
                }
            }
        }
        let Some((bi, bj)) = best else { break };
        a.swap(t, bi);
        p.swap(t, bi);
        for r in a.iter_mut() {
            r.swap(t, bj);
        }
        for r in q.iter_mut() {
            r.swap(t, bj);
        }
        loop {
            let mut dirty = false;
            for i in t + 1..rows {
                if !a[i][t].is_zero() {
                    let f = a[i][t].div_floor(&a[t][t]);
                    for j in 0..cols {
                        let v = &f * &a[t][j];
                        a[i][j] -= v;
                    }
                    for j in 0..rows {
                        let v = &f * &p[t][j];
                        p[i][j] -= v;
                    }
                    if !a[i][t].is_zero() {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                if !a[t][j].is_zero() {
                    let f = a[t][j].div_floor(&a[t][t]);
                    for i in 0..rows {
                        let v = &f * &a[i][t];
                        a[i][j] -= v;
                    }
                    for i in 0..cols {
                        let v = &f * &q[i][t];
                        q[i][j] -= v;
                    }
                    if !a[t][j].is_zero() {
                        dirty = true;
                    }
                }
            }
            if !dirty {
                // divisibility of the remaining block by the pivot
                let mut bad = None;
                'outer: for i in t + 1..rows {
                    for j in t + 1..cols {
                        if !(&a[i][j] % &a[t][t]).is_zero() {
                            bad = Some(i);
                            break 'outer;
                        }
                    }
                }
                match bad {
                    None => break,
                    Some(i) => {
                        for j in 0..cols {
                            let v = a[i][j].clone();
                            a[t][j] += v;
                        }
                        for j in 0..rows {
                            let v = p[i][j].clone();
                            p[t][j] += v;
                        }
                        continue;
                    }
                }
            }
            // move smallest entry of row/col t to the pivot
            let mut best = (t, t);
            for i in t..rows {
                if !a[i][t].is_zero() && a[i][t].abs() < a[best.0][best.1].abs() {
                    best = (i, t);
                }
            }
            for j in t..cols {
                if !a[t][j].is_zero() && a[t][j].abs() < a[best.0][best.1].abs() {
                    best = (t, j);
                }
            }
            if best.0 != t {
                a.swap(t, best.0);
                p.swap(t, best.0);
            }
            if best.1 != t {
                for r in a.iter_mut() {
                    r.swap(t, best.1);
                }
                for r in q.iter_mut() {
                    r.swap(t, best.1);
                }
            }
        }
        if a[t][t].is_negative() {
            for j in 0..cols {
                a[t][j] = -&a[t][j];
            }
            for j in 0..rows {
                p[t][j] = -&p[t][j];
            }
        }
        diag.push(a[t][t].clone());
        t += 1;
    }
    Smith {
        diagonal: diag,
        p: IntegerMatrix { cols: rows, rows: p },
        q: IntegerMatrix { cols, rows: q },
    }
}

/// Inverse of a unimodular matrix.
pub fn unimodular_inverse(m: &IntegerMatrix) -> IntegerMatrix {
    let n = m.nrows();
    assert_eq!(n, m.cols);
    let mut e = Echelon::new(2 * n);
    for (i, r) in m.rows.iter().enumerate() {
        let mut v = r.clone();
        v.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
        e.insert(v);
    }
    let h = e.into_hnf();
    assert_eq!(h.nrows(), n, "matrix is not invertible");
    for (i, r) in h.rows.iter().enumerate() {
        assert!(r[i].is_one(), "matrix is not unimodular");
    }
    IntegerMatrix { cols: n, rows: h.rows.into_iter().map(|r| r[n..].to_vec()).collect() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[Vec<i64>]) -> IntegerMatrix {
        IntegerMatrix::from_i64(rows)
    }

    #[test]
    fn hnf_small_example() {
        let h = hnf(&m(&[vec![2, 0], vec![0, 2], vec![1, 1]]));
        assert_eq!(h, m(&[vec![1, 1], vec![0, 2]]));
    }

    #[test]
    fn hnf_identity_and_zero_row() {
        assert_eq!(hnf(&IntegerMatrix::identity(3)), IntegerMatrix::identity(3));
        let z = hnf(&m(&[vec![0, 0]]));
        assert!(z.is_empty());
        assert_eq!(z.cols, 2);
    }

    #[test]
    fn kernel_examples() {
        assert_eq!(kernel_lattice(&m(&[vec![2], vec![1]])), m(&[vec![1, -2]]));
        assert!(kernel_lattice(&IntegerMatrix::identity(2)).is_empty());
        assert_eq!(kernel_lattice(&m(&[vec![0, 0], vec![0, 0]])), IntegerMatrix::identity(2));
    }

    #[test]
    fn index_examples() {
        let z2 = IntegerMatrix::identity(2);
        let two = m(&[vec![2, 0], vec![0, 2]]);
        assert_eq!(lattice_index(&z2, &two).unwrap(), Index::Finite(BigInt::from(4)));
        assert_eq!(lattice_index(&z2, &z2).unwrap(), Index::Finite(BigInt::from(1)));
        let l1 = m(&[vec![1, 1], vec![0, 2]]);
        assert_eq!(lattice_index(&l1, &two).unwrap(), Index::Finite(BigInt::from(2)));
        assert_eq!(lattice_index(&z2, &m(&[vec![1, 0]])).unwrap(), Index::Infinite);
        assert!(lattice_index(&two, &z2).is_err());
    }

    #[test]
    fn smith_diag() {
        let a = m(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]]);
        let s = smith(&a);
        assert_eq!(s.diagonal, vec![BigInt::from(2), BigInt::from(6), BigInt::from(12)]);
        let d = s.p.mul(&a).mul(&s.q);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert_eq!(d.rows[i][j], s.diagonal[i]);
                } else {
                    assert!(d.rows[i][j].is_zero());
                }
            }
        }
    }

    #[test]
    fn determinant_matches() {
        assert_eq!(determinant(&m(&[vec![2, 1], vec![1, 3]])), BigInt::from(5));
        assert_eq!(determinant(&m(&[vec![0, 1], vec![1, 0]])), BigInt::from(-1));
    }
}
