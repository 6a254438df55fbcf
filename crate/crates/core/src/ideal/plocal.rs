//! Certified p-local normal forms of full-rank lattices.
//!
//! A lattice `L ⊆ Z^n` is reduced into `(Z/p^A)^n` and brought to Howell form
//! with pivots `p^{e_j}`. When `Σ e_j < A`, every `e_j < A`, so
//! `p^A Z^n ⊆ p·M` for `M = L + p^A Z^n`; Nakayama then gives `M = L` over
//! `Z_(p)`. The form is therefore exact, not an approximation, and it also
//! proves that `L` has full rank. Otherwise the precision is raised.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};

/// Canonical echelon form of `L ⊗ Z_(p)`: row `j` has pivot `p^{e_j}` in column `j`
/// and its entry in column `k > j` is reduced into `[0, p^{e_k})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PLocalForm {
    pub p: u64,
    pub exponents: Vec<u32>,
    pub rows: Vec<Vec<u64>>,
}

impl PLocalForm {
    /// `v_p([Z^n : L])`.
    pub fn index_exponent(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn is_everything(&self) -> bool {
        self.exponents.iter().all(|&e| e == 0)
    }

    /// Whether `v` (an integer vector) lies in `L ⊗ Z_(p)`.
    pub fn contains(&self, v: &[BigInt]) -> bool {
        let e_max = self.exponents.iter().copied().max().unwrap_or(0);
        let a = e_max + 1;
        let m = self.p.pow(a);
        let ar = Arith { m };
        let mut w: Vec<u64> = v.iter().map(|x| reduce(x, m)).collect();
        for j in 0..w.len() {
            if w[j] == 0 {
                continue;
            }
            let pe = self.p.pow(self.exponents[j]);
            if !w[j].is_multiple_of(pe) {
                return false;
            }
            let q = w[j] / pe;
            for k in j..w.len() {
                w[k] = ar.sub(w[k], ar.mul(q, self.rows[j][k] % m));
            }
        }
        true
    }
}

fn reduce(x: &BigInt, m: u64) -> u64 {
    x.mod_floor(&BigInt::from(m)).to_u64().expect("residue fits")
}

#[derive(Clone, Copy)]
struct Arith {
    m: u64,
}

impl Arith {
    #[inline]
    fn mul(&self, a: u64, b: u64) -> u64 {
        if self.m < (1 << 32) {
            (a * b) % self.m
        } else {
            ((a as u128 * b as u128) % self.m as u128) as u64
        }
    }
    #[inline]
    fn sub(&self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + (self.m - b)
        }
    }
    fn inv(&self, a: u64) -> u64 {
        let e = (a as i128).extended_gcd(&(self.m as i128));
        debug_assert_eq!(e.gcd, 1);
        e.x.rem_euclid(self.m as i128) as u64
    }
}

fn valuation(mut x: u64, p: u64) -> u32 {
    let mut v = 0;
    while x.is_multiple_of(p) {
        x /= p;
        v += 1;
    }
    v
}

struct Howell {
    p: u64,
    a: u32,
    ar: Arith,
    n: usize,
    exps: Vec<u32>,
    rows: Vec<Vec<u64>>,
    pows: Vec<u64>,
}

impl Howell {
    fn new(p: u64, a: u32, n: usize) -> Self {
        let pows = (0..=a).map(|k| p.pow(k)).collect();
        Howell { p, a, ar: Arith { m: p.pow(a) }, n, exps: vec![a; n], rows: vec![Vec::new(); n], pows }
    }

    fn everything(&self) -> bool {
        self.exps.iter().all(|&e| e == 0)
    }

    fn insert(&mut self, v: Vec<u64>) {
        let mut stack = vec![v];
        while let Some(mut v) = stack.pop() {
            let mut j = 0;
            while j < self.n {
                if v[j] == 0 {
                    j += 1;
                    continue;
                }
                let f = valuation(v[j], self.p);
                let e = self.exps[j];
                if f >= e {
                    let q = v[j] / self.pows[e as usize];
                    let row = &self.rows[j];
                    for k in j..self.n {
                        if row[k] != 0 {
                            v[k] = self.ar.sub(v[k], self.ar.mul(q, row[k]));
                        }
                    }
                    debug_assert_eq!(v[j], 0);
                    j += 1;
                    continue;
                }
                let u = v[j] / self.pows[f as usize];
                let uinv = self.ar.inv(u);
                for x in v[j..].iter_mut() {
                    *x = self.ar.mul(*x, uinv);
                }
                let shift = self.pows[(self.a - f) as usize];
                let closure: Vec<u64> = v.iter().map(|&x| self.ar.mul(x, shift)).collect();
                let old = std::mem::replace(&mut self.rows[j], v);
                let old_e = std::mem::replace(&mut self.exps[j], f);
                if closure.iter().any(|&x| x != 0) {
                    stack.push(closure);
                }
                if old_e < self.a {
                    let c = self.pows[(old_e - f) as usize];
                    let new = &self.rows[j];
                    let rest: Vec<u64> = old
                        .iter()
                        .zip(new)
                        .map(|(&o, &w)| self.ar.sub(o, self.ar.mul(c, w)))
                        .collect();
                    if rest.iter().any(|&x| x != 0) {
                        stack.push(rest);
                    }
                }
                break;
            }
        }
    }

    fn canonical(mut self) -> PLocalForm {
        let n = self.n;
        for i in 0..n {
            for j in i + 1..n {
                let pe = self.pows[self.exps[j] as usize];
                let x = self.rows[i][j];
                if x >= pe {
                    let q = x / pe;
                    let (top, bottom) = self.rows.split_at_mut(j);
                    let row_j = &bottom[0];
                    let row_i = &mut top[i];
                    for k in j..n {
                        if row_j[k] != 0 {
                            row_i[k] = self.ar.sub(row_i[k], self.ar.mul(q, row_j[k]));
                        }
                    }
                }
            }
        }
        PLocalForm { p: self.p, exponents: self.exps, rows: self.rows }
    }
}

/// Largest `A` with `p^A < 2^62`.
fn max_precision(p: u64) -> u32 {
    let mut a = 0;
    let mut x: u128 = 1;
    while x * (p as u128) < (1u128 << 62) {
        x *= p as u128;
        a += 1;
    }
    a
}

/// Certified p-local form of the row lattice spanned by `vectors` in `Z^n`.
pub fn plocal_form(vectors: &[Vec<BigInt>], n: usize, p: u64) -> Result<PLocalForm> {
    let limit = max_precision(p);
    let mut a = 6.min(limit);
    loop {
        let mut h = Howell::new(p, a, n);
        for v in vectors {
            if h.everything() {
                break;
            }
            let m = h.ar.m;
            let r: Vec<u64> = v.iter().map(|x| reduce(x, m)).collect();
            if r.iter().any(|&x| x != 0) {
                h.insert(r);
            }
        }
        let total: u32 = h.exps.iter().sum();
        if total < a || n == 0 {
            return Ok(h.canonical());
        }
        if a == limit {
            return Err(Error::Precision(format!(
                "lattice in dimension {n} not certified at {p}^{a}; it may not have full rank"
            )));
        }
        a = (a * 2).min(limit);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn unit_and_scaled() {
        let id = vec![v(&[1, 0]), v(&[0, 1])];
        assert!(plocal_form(&id, 2, 3).unwrap().is_everything());
        let f = plocal_form(&[v(&[3, 0]), v(&[0, 9])], 2, 3).unwrap();
        assert_eq!(f.exponents, vec![1, 2]);
        // 2 is a unit at 3
        let g = plocal_form(&[v(&[2, 0]), v(&[0, 2])], 2, 3).unwrap();
        assert!(g.is_everything());
    }

    #[test]
    fn same_lattice_different_generators() {
        let a = plocal_form(&[v(&[3, 1]), v(&[0, 3])], 2, 3).unwrap();
        let b = plocal_form(&[v(&[6, 2]), v(&[3, 4]), v(&[9, 0])], 2, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(&v(&[3, 1])));
        assert!(!a.contains(&v(&[1, 0])));
    }

    #[test]
    fn rank_deficient_fails() {
        assert!(matches!(plocal_form(&[v(&[1, 1])], 2, 5), Err(Error::Precision(_))));
    }
}
