//! Invariants over random inputs.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use equifit::abelian::{hnf, kernel_lattice, lattice_index, subgroup_from_generators, FiniteAbelianGroup, Index, IntegerMatrix};
use equifit::fitting::{fitt0, PresentedModule};
use equifit::ideal::Ring;
use equifit::stickelberger::{theta_for_field, AbelianField, AbelianFieldSpec, Place};

fn matrix(rows: &[Vec<i64>]) -> IntegerMatrix {
    IntegerMatrix::from_i64(rows)
}

fn rows(r: usize, c: usize) -> impl Strategy<Value = Vec<Vec<i64>>> {
    prop::collection::vec(prop::collection::vec(-6i64..=6, c), r)
}

fn det3(a: &[Vec<i64>]) -> i64 {
    a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) - a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0])
        + a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0])
}

fn combine(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    a.iter().map(|r| (0..b[0].len()).map(|j| r.iter().zip(b).map(|(x, row)| x * row[j]).sum()).collect()).collect()
}

/// `Q(ζ_f)` for the CM conductors up to 30.
fn cm_conductor() -> impl Strategy<Value = u64> {
    prop::sample::select((3u64..=30).filter(|f| f % 4 != 2).collect::<Vec<_>>())
}

fn places(s: &[Place]) -> BTreeSet<Place> {
    s.iter().copied().collect()
}

/// `S = {∞} ∪ {ℓ | f}`.
fn level_s(f: u64) -> BTreeSet<Place> {
    let mut s = BTreeSet::from([Place::Infinite]);
    s.extend((2..=f).filter(|l| f.is_multiple_of(*l) && (2..*l).all(|d| l % d != 0)).map(Place::Prime));
    s
}

const SMALL_PRIMES: [u64; 10] = [3, 5, 7, 11, 13, 17, 19, 23, 29, 31];

fn coprime_primes(f: u64) -> Vec<u64> {
    SMALL_PRIMES.iter().copied().filter(|l| !f.is_multiple_of(*l)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn hnf_is_idempotent_and_ignores_row_order(m in rows(4, 3), seed in any::<u64>()) {
        let a = matrix(&m);
        let h = hnf(&a);
        prop_assert_eq!(hnf(&h), h.clone());
        let mut shuffled = m.clone();
        let n = shuffled.len();
        for i in (1..n).rev() {
            shuffled.swap(i, (seed as usize).wrapping_mul(i + 7) % (i + 1));
        }
        prop_assert_eq!(hnf(&matrix(&shuffled)), h);
    }

    #[test]
    fn kernel_rows_annihilate(m in rows(5, 3)) {
        let a = matrix(&m);
        let k = kernel_lattice(&a);
        for row in &k.rows {
            for j in 0..3 {
                let s: BigInt = row.iter().zip(&a.rows).map(|(x, r)| x * &r[j]).sum();
                prop_assert_eq!(s, BigInt::from(0));
            }
        }
        // rank-nullity over Q
        prop_assert_eq!(k.nrows() + equifit::abelian::rank(&a), 5);
    }

    #[test]
    fn index_is_multiplicative(l in rows(3, 3), a in rows(3, 3), b in rows(3, 3)) {
        prop_assume!(det3(&l) != 0 && det3(&a) != 0 && det3(&b) != 0);
        let l2 = combine(&a, &l);
        let l3 = combine(&b, &l2);
        let idx = |x: &[Vec<i64>], y: &[Vec<i64>]| match lattice_index(&matrix(x), &matrix(y)).unwrap() {
            Index::Finite(d) => d,
            Index::Infinite => panic!("full-rank sublattice"),
        };
        let (i12, i23, i13) = (idx(&l, &l2), idx(&l2, &l3), idx(&l, &l3));
        prop_assert_eq!(&i12, &BigInt::from(det3(&a).abs()));
        prop_assert_eq!(&i23, &BigInt::from(det3(&b).abs()));
        prop_assert_eq!(i13, i12 * i23);
    }

    #[test]
    fn generated_subgroups_are_closed(parts in prop::sample::select(vec![vec![12u64], vec![2, 6], vec![3, 3], vec![2, 2, 4], vec![5, 5]]), picks in prop::collection::vec(any::<usize>(), 0..3)) {
        let g = FiniteAbelianGroup::new(&parts).unwrap().into_arc();
        let gens: Vec<usize> = picks.iter().map(|p| p % g.order()).collect();
        let h = subgroup_from_generators(&g, &gens).unwrap();
        for &x in h.elements() {
            prop_assert!(h.contains(g.inv(x)));
            for &y in h.elements() {
                prop_assert!(h.contains(g.mul(x, y)));
            }
        }
        prop_assert!(gens.iter().all(|&x| h.contains(x)));
        prop_assert_eq!(g.order() % h.order(), 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn theta_is_minus_pure(f in cm_conductor(), t in prop::sample::select(SMALL_PRIMES.to_vec())) {
        prop_assume!(f % t != 0);
        let v = theta_for_field(&AbelianFieldSpec::cyclotomic(f), &level_s(f), &places(&[Place::Prime(t)])).unwrap();
        prop_assert!(v.is_minus_pure());
    }

    #[test]
    fn t_factors_multiply(f in cm_conductor(), i in 0usize..10, j in 0usize..10) {
        let ps = coprime_primes(f);
        let (a, b) = (ps[i % ps.len()], ps[j % ps.len()]);
        prop_assume!(a != b);
        let spec = AbelianFieldSpec::cyclotomic(f);
        let s = level_s(f);
        let th = |t: &[Place]| theta_for_field(&spec, &s, &places(t)).unwrap().value;
        let both = th(&[Place::Prime(a), Place::Prime(b)]).try_mul(&th(&[])).unwrap();
        let split = th(&[Place::Prime(a)]).try_mul(&th(&[Place::Prime(b)])).unwrap();
        prop_assert_eq!(both, split);
    }

    #[test]
    fn enlarging_s_adds_euler_factor(f in cm_conductor(), i in 0usize..10) {
        let ps = coprime_primes(f);
        let l = ps[i % ps.len()];
        let spec = AbelianFieldSpec::cyclotomic(f);
        let field = AbelianField::new(&spec).unwrap();
        let g = field.group().clone();
        let s = level_s(f);
        let mut bigger = s.clone();
        bigger.insert(Place::Prime(l));
        let base = theta_for_field(&spec, &s, &BTreeSet::new()).unwrap().value;
        let big = theta_for_field(&spec, &bigger, &BTreeSet::new()).unwrap().value;
        let phi_inv = g.inv(field.sigma(l as i64).unwrap());
        let mut factor = vec![BigRational::from_integer(0.into()); g.order()];
        factor[g.identity()] += BigRational::from_integer(1.into());
        factor[phi_inv] -= BigRational::from_integer(1.into());
        let factor = equifit::group_ring::GroupRingElement::from_coeffs(&g, factor).unwrap();
        prop_assert_eq!(big, factor.try_mul(&base).unwrap());
    }

    #[test]
    fn redundant_relation_keeps_fitting_ideal(
        n in 2usize..=4,
        x in prop::collection::vec(-3i64..=3, 4),
        y in prop::collection::vec(-3i64..=3, 4),
        k in 2i64..=5,
    ) {
        let g = FiniteAbelianGroup::new(&[n as u64]).unwrap().into_arc();
        let ring = Ring::full(&g);
        let elt = |c: &[i64]| -> Vec<BigRational> { c[..n].iter().map(|&v| BigRational::from_integer(v.into())).collect() };
        let (x, y) = (elt(&x), elt(&y));
        let kk = ring.integer(k);
        let gens = vec![x.clone(), kk.clone()];
        let combo: Vec<BigRational> = ring.mul(&y, &x).iter().zip(&kk).map(|(a, b)| a + b * BigRational::from_integer(3.into())).collect();
        let base = fitt0(&PresentedModule::cyclic(&ring, gens.clone()).unwrap()).unwrap();
        let mut more = gens;
        more.push(combo);
        let redundant = fitt0(&PresentedModule::cyclic(&ring, more).unwrap()).unwrap();
        prop_assert_eq!(base, redundant);
    }
}
