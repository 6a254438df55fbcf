//! One PASS/FAIL line per acceptance criterion. Runs without the libtest
//! harness so the lines always reach stdout.

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use equifit::abelian::{abelian_groups_of_order, FiniteAbelianGroup, Group, Subgroup};
use equifit::fitting::cyclic_decompositions;
use equifit::harness::{
    calj_independence_sweep, end_to_end_kurihara, norm_compatibility_suite, shifted_fitting_sweep,
    standard_tower_specs, tower_check, KuriharaConfig, Verdict,
};
use equifit::ritter_weiss::{local_cases, verify_local_case};
use equifit::stickelberger::{integrality_sweep, parse_places, theta_for_field, AbelianFieldSpec, Place};

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn groups(max: u64) -> Vec<Group> {
    (1..=max).flat_map(abelian_groups_of_order).map(|p| FiniteAbelianGroup::new(&p).unwrap().into_arc()).collect()
}

/// Subgroups by closing every set of at most four elements; no abelian group
/// of order at most 16 needs more generators.
fn brute_subgroups(g: &Group) -> Vec<BTreeSet<usize>> {
    let mut seen: BTreeSet<BTreeSet<usize>> = BTreeSet::new();
    let n = g.order();
    let close = |gens: &[usize]| -> BTreeSet<usize> {
        let mut s: BTreeSet<usize> = BTreeSet::from([g.identity()]);
        loop {
            let next: BTreeSet<usize> = s.iter().flat_map(|&a| gens.iter().map(move |&b| g.mul(a, b))).chain(s.iter().copied()).collect();
            if next.len() == s.len() {
                return s;
            }
            s = next;
        }
    };
    for a in 0..n {
        for b in a..n {
            for c in b..n {
                for d in c..n {
                    seen.insert(close(&[a, b, c, d]));
                }
            }
        }
    }
    seen.into_iter().collect()
}

/// `#{(I, D, σ)}`: `σ ∈ D` whose class generates `D/I`, for cyclic `D/I`.
fn independent_case_count(g: &Group) -> usize {
    let subs = brute_subgroups(g);
    let mut count = 0;
    for d in &subs {
        for i in subs.iter().filter(|i| i.is_subset(d)) {
            let index = d.len() / i.len();
            // order of σ modulo I
            count += d
                .iter()
                .filter(|&&s| {
                    let mut x = s;
                    let mut k = 1;
                    while !i.contains(&x) {
                        x = g.mul(x, s);
                        k += 1;
                    }
                    k == index
                })
                .count();
        }
    }
    count
}

fn criterion_1() -> Outcome {
    let s = shifted_fitting_sweep(16).map_err(|e| e.to_string())?;
    let expected: usize = groups(16).iter().map(independent_case_count).sum();
    ensure(s.cases == expected, format!("{} cases swept, {expected} enumerated independently", s.cases))?;
    ensure(s.pass(), format!("{} of {} cases fail", s.cases - s.passed, s.cases))?;
    Ok(format!("{} configurations over {} groups, all equal as canonical lattices", s.cases, s.rows.len()))
}

fn criterion_2() -> Outcome {
    let klein = FiniteAbelianGroup::new(&[2, 2]).unwrap().into_arc();
    let nine = FiniteAbelianGroup::new(&[3, 3]).unwrap().into_arc();
    // ordered pairs (a, b) with ⟨a⟩ × ⟨b⟩ = I: 3·2 and 8·6
    ensure(cyclic_decompositions(&Subgroup::whole(&klein)).len() == 6, "C2×C2 decompositions")?;
    ensure(cyclic_decompositions(&Subgroup::whole(&nine)).len() == 48, "C3×C3 decompositions")?;
    let s = calj_independence_sweep(36).map_err(|e| e.to_string())?;
    ensure(s.pass(), format!("{:?}", s.failures))?;
    Ok(format!("{} (G, I, D) triples in groups of order ≤ 36", s.cases))
}

fn local_reports() -> Result<Vec<(Group, usize, usize, equifit::ritter_weiss::LocalCaseReport)>, String> {
    let mut out = Vec::new();
    for g in groups(12) {
        for d in local_cases(&g) {
            let r = verify_local_case(&d).map_err(|e| e.to_string())?;
            out.push((g.clone(), d.inertia.order(), g.order() / d.inertia.order(), r));
        }
    }
    Ok(out)
}

fn criterion_3() -> Outcome {
    let reports = local_reports()?;
    let mut unramified = 0;
    for (g, i, f, r) in &reports {
        // |Z[C_f]/(1 − φ^{-1} + e)| = ∏_ζ (1 + e − ζ) = (1 + e)^f − 1
        let expected = BigInt::from(1 + *i as u64).pow(*f as u32) - BigInt::one();
        let ctx = format!("G={:?} |I|={i} φ={}", g.parts(), r.frobenius);
        ensure(r.f_map.injective, format!("f_w not injective at {ctx}"))?;
        ensure(r.f_map.cokernel_order == expected.to_string(), format!("cokernel order {} ≠ {expected} at {ctx}", r.f_map.cokernel_order))?;
        ensure(r.f_map.matches_stated_quotient && r.f_map.exact, format!("cokernel module differs at {ctx}"))?;
        if let Some(iota) = &r.iota {
            unramified += 1;
            ensure(iota.unimodular && iota.equivariant, format!("ι_w not unimodular at {ctx}"))?;
        }
    }
    Ok(format!("{} local cases with |G_w| ≤ 12, {unramified} unramified", reports.len()))
}

fn criterion_4() -> Outcome {
    let reports = local_reports()?;
    for (g, _, _, r) in &reports {
        let c = &r.generator;
        ensure(
            c.free_of_rank_one && c.reconstructs_basis && c.f_certificate && c.j_certificate,
            format!("certificate fails at G={:?} I={:?} φ={}", g.parts(), r.inertia, r.frobenius),
        )?;
    }
    Ok(format!("{} rank-1 certificates with f_w(gen) = h_v and j_w(gen) = 1 − e_Iφ^-1", reports.len()))
}

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

/// `Σ_{a mod f} (1/2 − a/f)·σ_a^{-1}` pushed to `H` and multiplied by
/// `∏_{ℓ∈T}(1 − ℓσ_ℓ^{-1})`, keyed by the smallest residue of each class.
fn hurwitz_theta(f: u64, level: u64, kernel: &[u64], t: &[u64]) -> Vec<(String, String)> {
    let units: Vec<u64> = (1..level).filter(|a| num_integer::gcd(*a, level) == 1).collect();
    let kset: BTreeSet<u64> = {
        let mut s = BTreeSet::from([1 % f]);
        loop {
            let n: BTreeSet<u64> = s.iter().flat_map(|&x| kernel.iter().map(move |&k| x * k % f)).chain(s.iter().copied()).collect();
            if n.len() == s.len() {
                break s;
            }
            s = n;
        }
    };
    let class_rep = |a: u64| -> u64 { (1..f).filter(|r| num_integer::gcd(*r, f) == 1).find(|r| kset.iter().any(|k| r * k % f == a % f)).unwrap() };
    let inv = |a: u64| -> u64 { (1..level).find(|b| a * b % level == 1).unwrap() };
    let mut theta: std::collections::BTreeMap<u64, BigRational> = Default::default();
    for &a in &units {
        *theta.entry(class_rep(inv(a))).or_insert_with(BigRational::zero) += rat(1, 2) - rat(a as i64, level as i64);
    }
    for &l in t {
        let mut out: std::collections::BTreeMap<u64, BigRational> = Default::default();
        let li = class_rep(inv(l % level));
        for (&r, c) in &theta {
            *out.entry(r).or_insert_with(BigRational::zero) += c.clone();
            *out.entry(class_rep(r * li)).or_insert_with(BigRational::zero) -= c * rat(l as i64, 1);
        }
        theta = out;
    }
    theta.into_iter().map(|(r, c)| (format!("sigma_{r}"), c.to_string())).collect()
}

fn criterion_5() -> Outcome {
    let lib = |f: u64, k: &[u64], s: &str, t: &str| -> Vec<(String, String)> {
        let v = theta_for_field(&AbelianFieldSpec::new(f, k), &parse_places(s).unwrap(), &parse_places(t).unwrap()).unwrap();
        v.to_json().coeffs.unwrap().0
    };
    let cases = [
        ("Θ_{2,∞}(Q(i))", lib(4, &[], "2,inf", ""), hurwitz_theta(4, 4, &[], &[])),
        ("Θ_{3,∞}(Q(ζ_3))", lib(3, &[], "3,inf", ""), hurwitz_theta(3, 3, &[], &[])),
        ("level-12 restriction route", lib(12, &[5], "2,3,inf", ""), hurwitz_theta(4, 12, &[], &[])),
        ("Euler-factor route", lib(4, &[], "2,3,inf", ""), hurwitz_theta(4, 12, &[], &[])),
        ("Θ_{2,∞}^{5}(Q(i))", lib(4, &[], "2,inf", "5"), hurwitz_theta(4, 4, &[], &[5])),
    ];
    for (name, a, b) in &cases {
        // the level-12 field labels classes by residues mod 12
        let b: Vec<(String, String)> = if name.starts_with("level") {
            b.iter().map(|(k, v)| (if k == "sigma_3" { "sigma_7".into() } else { k.clone() }, v.clone())).collect()
        } else {
            b.clone()
        };
        ensure(*a == b, format!("{name}: {a:?} vs {b:?}"))?;
    }
    let frozen = [("sigma_1", "1/4"), ("sigma_3", "-1/4")];
    ensure(cases[0].1.iter().zip(frozen).all(|((k, v), (a, b))| k == a && v == b), "1/4 − c/4")?;
    ensure(cases[4].1 == vec![("sigma_1".to_string(), "-1".to_string()), ("sigma_3".into(), "1".into())], "−1 + c")?;
    ensure(cases[2].1 == vec![("sigma_1".to_string(), "1/2".to_string()), ("sigma_7".into(), "-1/2".into())], "1/2 − c/2")?;
    Ok("1/4 − c/4, 1/6 − c/6, both routes 1/2 − c/2, −1 + c".into())
}

fn criterion_6() -> Outcome {
    let s = integrality_sweep(40, &[3, 5, 7]).map_err(|e| e.to_string())?;
    ensure(s.pass(), format!("{:?}", s.failures))?;
    ensure(s.fields == 133 && s.configurations == 55617 && s.hypotheses_hold == 52802, format!("counts moved: {s:?}"))?;
    Ok(format!("{} fields, {} configurations, {} under the hypotheses, zero failures", s.fields, s.configurations, s.hypotheses_hold))
}

fn criterion_7() -> Outcome {
    let rs = norm_compatibility_suite(2).map_err(|e| e.to_string())?;
    for r in &rs {
        ensure(r.pass && r.transitions.len() == 2, format!("p={} S={:?} T={:?}: {:?}", r.p, r.s, r.t, r.transitions))?;
    }
    let max = rs.iter().flat_map(|r| r.conductors.iter().copied()).max().unwrap_or(0);
    Ok(format!("{} (H, p, S, T) chains through n = 2, top conductor {max}", rs.len()))
}

/// Odd part of `|(2h/w)·(1 − ℓ·χ(ℓ))|` for an imaginary quadratic `H` and
/// `T = {ℓ}`; `χ(ℓ) = 1` exactly when `ℓ mod f` lies in the kernel.
fn quadratic_rhs_scale(f: u64, kernel_gens: &[u64], h: i64, w: i64, l: u64) -> String {
    let mut kernel = BTreeSet::from([1 % f]);
    for _ in 0..f {
        kernel = kernel.iter().flat_map(|&x| kernel_gens.iter().map(move |&k| x * k % f)).chain(kernel.iter().copied()).collect();
    }
    let chi = if kernel.contains(&(l % f)) { 1 } else { -1 };
    let v = rat(2 * h, w) * rat(1 - l as i64 * chi, 1);
    let mut n = v.numer().clone() * v.denom().clone();
    n = if n < BigInt::zero() { -n } else { n };
    while &n % 2u32 == BigInt::zero() {
        n /= 2u32;
    }
    n.to_string()
}

fn criterion_8() -> Outcome {
    // (conductor, kernel, h, w, expected |A^{T,−}_3|), T = {5}, p = 3
    let cases: [(u64, Vec<u64>, i64, i64, &str); 3] = [(4, vec![], 1, 4, "1"), (3, vec![], 1, 6, "1"), (23, vec![2], 3, 2, "9")];
    for (f, k, h, w, order) in cases {
        let cfg = KuriharaConfig { conductor: f, subgroup_gens: k.clone(), p: 3, t: vec![Place::Prime(5)] };
        let r = end_to_end_kurihara(&cfg).map_err(|e| e.to_string())?;
        ensure(r.verdict == Verdict::Pass, format!("f={f}: {}", r.to_json()))?;
        let check = r.checks.iter().find(|c| c.name == "kurihara_p_local_equality").ok_or("no equality check")?;
        ensure(check.verdict == Verdict::Pass, format!("f={f}: {}", check.detail))?;
        ensure(check.detail["oracle_order"] == order, format!("f={f}: oracle order {}", check.detail["oracle_order"]))?;
        let rhs = r.ideals.iter().find(|i| i.name == "kurihara_rhs").ok_or("no formula ideal")?;
        let scale = quadratic_rhs_scale(f, &k, h, w, 5);
        ensure(rhs.scale == scale && rhs.hnf == vec![vec!["1".to_string()]], format!("f={f}: formula side {rhs:?}, expected scale {scale}"))?;
    }
    Ok("Q(i), Q(ζ_3): unit = unit; Q(√−23): Fitt = (9), Θ^T = 18 ~ (9)".into())
}

fn criterion_9() -> Outcome {
    let mut lines = Vec::new();
    for (spec, n0) in standard_tower_specs(4).iter().zip([0usize, 1]) {
        let t = tower_check(spec).map_err(|e| e.to_string())?;
        ensure(t.n0 == n0, format!("n0 = {} for conductor {}", t.n0, t.conductor))?;
        for f in &t.families {
            ensure(f.containment.iter().all(|&b| b), format!("{}: containment {:?}", f.family, f.containment))?;
            ensure(f.decay.iter().all(|d| d.exact && d.limit_agreement), format!("{}: decay {:?}", f.family, f.decay))?;
            ensure(f.pass, format!("{} fails", f.family))?;
        }
        lines.push(format!("H={} p={}: {} families", t.conductor, t.p, t.families.len()));
    }
    Ok(lines.join("; "))
}

fn criterion_10() -> Outcome {
    for spec in standard_tower_specs(4) {
        let t = tower_check(&spec).map_err(|e| e.to_string())?;
        let rhs = t.families.iter().find(|f| f.family == "main_rhs").ok_or("no main_rhs family")?;
        ensure(rhs.pass && rhs.generators > 0, "main_rhs coherence")?;
        let defects: Vec<_> = t.rationalization.iter().filter(|r| !r.defects.is_empty()).collect();
        ensure(defects.is_empty(), format!("rationalization defects {defects:?}"))?;
        ensure(t.rationalization.iter().any(|r| r.family == "main_rhs"), "main_rhs rationalization not checked")?;
        ensure(t.pass, "tower report fails")?;
    }
    Ok("T = {5} and {7}: assembled at layers 0..4, π-coherent, full minus algebra at every odd character".into())
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("shifted Fitting formula, |G| ≤ 16", criterion_1),
        ("𝒥(I) decomposition independence", criterion_2),
        ("local sequence exactness, |G_w| ≤ 12", criterion_3),
        ("rational generator certificates", criterion_4),
        ("Stickelberger values", criterion_5),
        ("minus-part integrality, f ≤ 40", criterion_6),
        ("norm compatibility along towers", criterion_7),
        ("Kurihara instances end to end", criterion_8),
        ("tower stability to depth 4", criterion_9),
        ("main right-hand side assembly", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let out = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t0.elapsed().as_secs_f64();
        match out {
            Ok(detail) => println!("PASS criterion {}: {name}: {detail} ({secs:.1}s)", k + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name}: {why} ({secs:.1}s)", k + 1);
            }
        }
    }
    println!("{} of {} criteria pass", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
