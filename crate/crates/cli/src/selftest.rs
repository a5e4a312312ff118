//! Oracle suites behind `galdist selftest`, scaled by a depth factor.

use galdist_core::distinction::{decide, necessary_condition, CuspidalDatum, DecideOptions, UnitaryFlag};
use galdist_core::forms::Case;
use galdist_core::localfield::{hilbert_oracle, hilbert_rat, reciprocity_check, Prime, QuadExtension, SquareClass};
use galdist_core::models::bundled_models;
use galdist_core::numfield::{in_isometry_group, in_symmetric_space, is_fixed_by, Involution};
use galdist_core::prasad::{self, GroupDescriptor};
use galdist_core::symspace::{classify_x_auto, gamma_index_data, orbit_invariants, ClassicalPair, XComponent};
use galdist_core::weyl::{self, Composition};
use galdist_core::QMatrix;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Serialize)]
pub struct SuiteReport {
    pub name: &'static str,
    pub checks: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub first_failures: Vec<String>,
}

struct Tally {
    name: &'static str,
    checks: usize,
    failures: Vec<String>,
}

impl Tally {
    fn new(name: &'static str) -> Self {
        Tally { name, checks: 0, failures: Vec::new() }
    }

    fn check(&mut self, ok: bool, what: impl FnOnce() -> String) {
        self.checks += 1;
        if !ok {
            self.failures.push(what());
        }
    }

    fn finish(self) -> SuiteReport {
        let failures = self.failures.len();
        SuiteReport { name: self.name, checks: self.checks, failures, first_failures: self.failures.into_iter().take(3).collect() }
    }
}

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

pub fn run(depth: usize) -> Vec<SuiteReport> {
    vec![hilbert(), reciprocity(depth), involutions(depth), representatives(), distinction(), spinor(depth), prasad_table(), models()]
}

fn hilbert() -> SuiteReport {
    let mut t = Tally::new("hilbert_vs_oracle");
    let vals = [-10i64, -7, -5, -3, -2, -1, 1, 2, 3, 5, 7, 10];
    for p in [2u64, 3, 5, 7] {
        let prime = Prime::new(p).unwrap();
        for &a in &vals {
            for &b in &vals {
                let ok = matches!((hilbert_rat(&q(a), &q(b), prime), hilbert_oracle(a, b, prime)), (Ok(x), Ok(y)) if x == y);
                t.check(ok, || format!("({a},{b})_{p}"));
            }
        }
    }
    t.finish()
}

fn reciprocity(depth: usize) -> SuiteReport {
    let mut t = Tally::new("hilbert_reciprocity");
    let mut rng = ChaCha8Rng::seed_from_u64(0x1001);
    for _ in 0..100 * depth {
        let mut r = || loop {
            let n: i64 = rng.gen_range(-100..=100);
            if n != 0 {
                break BigRational::new(n.into(), rng.gen_range(1..=100i64).into());
            }
        };
        let (a, b) = (r(), r());
        let ok = reciprocity_check(&a, &b).map(|v| v.iter().map(|s| s.symbol as i32).product::<i32>() == 1);
        t.check(ok == Ok(true), || format!("{a}, {b}"));
    }
    t.finish()
}

fn involutions(depth: usize) -> SuiteReport {
    let mut t = Tally::new("involution_enumeration");
    let max_k = (2 + depth).min(5);
    for k in 1..=max_k {
        for mask in 0..(1u32 << k) {
            let parts: Vec<usize> = (0..k).map(|i| 1 + ((mask >> i) & 1) as usize).collect();
            let c = Composition::new(parts.clone(), 0).unwrap();
            for circ in [false, true] {
                t.check(weyl::enumerate_involutions(&c, circ) == weyl::enumerate_involutions_brute(&c, circ), || {
                    format!("{parts:?} circ={circ}")
                });
            }
        }
    }
    t.finish()
}

fn small_pairs() -> Vec<ClassicalPair> {
    vec![
        ClassicalPair::from_ints(Case::Symplectic, 3, -1, None, &[], 2).unwrap(),
        ClassicalPair::from_ints(Case::Orthogonal, 3, -1, None, &[1], 2).unwrap(),
        ClassicalPair::from_ints(Case::Orthogonal, 3, -1, None, &[], 2).unwrap(),
        ClassicalPair::from_ints(Case::Unitary, 3, -1, Some(3), &[1], 2).unwrap(),
    ]
}

fn representatives() -> SuiteReport {
    let mut t = Tally::new("representatives");
    for pair in small_pairs() {
        for c in Composition::enumerate(&pair, 2, 2) {
            for w in weyl::admissible_involutions(&pair, &c) {
                let tw = weyl::build_tw(&c, &w, &pair).unwrap();
                t.check(is_fixed_by(&tw, Involution::Sigma), || format!("t_w not σ-fixed {c:?} {w:?}"));
                t.check(in_isometry_group(&tw, &pair.j_matrix(), pair.case()).unwrap_or(false), || {
                    format!("t_w not in G {c:?} {w:?}")
                });
                for (bits, z) in weyl::xw_choices(&c, &w, &pair).unwrap() {
                    let ok = weyl::build_xw(&c, &w, &bits, &z, &pair).is_ok_and(|xw| {
                        in_symmetric_space(&xw.x, &pair.j_matrix(), pair.case()).unwrap_or(false)
                            && classify_x_auto(&xw.x, &pair).ok() == Some(xw.predicted)
                    });
                    t.check(ok, || format!("x_w {c:?} {w:?} {bits:?} {z}"));
                }
            }
        }
    }
    t.finish()
}

fn distinction() -> SuiteReport {
    let mut t = Tally::new("distinction_soundness");
    for pair in small_pairs() {
        let component = if pair.case() == Case::Orthogonal { XComponent::Sx } else { XComponent::Full };
        for c in Composition::enumerate(&pair, 2, 2) {
            let k = c.k();
            let mut d = CuspidalDatum { labels: (1..=k).map(|i| format!("pi{i}")).collect(), ..Default::default() };
            d.linear_dist = (1..=k).filter(|i| i % 2 == 1).collect();
            d.unitary_dist = (1..=k).flat_map(|i| [0, 1].map(|bit| UnitaryFlag { index: i, bit })).collect();
            if k == 2 && c.parts[0] == c.parts[1] {
                d.conj_dual.push([1, 2]);
            }
            d.pi0_dist = orbit_invariants(&pair.with_n(c.r), XComponent::Full).unwrap();
            for target in orbit_invariants(&pair, component).unwrap() {
                let Ok(v) = decide(&pair, &c, &d, &target, &DecideOptions::default()) else {
                    t.check(false, || format!("decide failed {c:?} {target}"));
                    continue;
                };
                if let Some(wit) = v.witness {
                    t.check(necessary_condition(&d, &wit.w), || format!("necessary condition {c:?} {target}"));
                    let ok = weyl::build_xw(&c, &wit.w, &wit.bits_vec(), &wit.z_orbit, &pair)
                        .is_ok_and(|xw| classify_x_auto(&xw.x, &pair).ok() == Some(target));
                    t.check(ok, || format!("witness orbit {c:?} {target}"));
                }
            }
        }
    }
    t.finish()
}

fn spinor(depth: usize) -> SuiteReport {
    let mut t = Tally::new("spinor_norm");
    let p = Prime::new(3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5a);
    for _ in 0..20 * depth {
        let n = rng.gen_range(1..=2usize);
        let h = loop {
            let m = QMatrix::from_fn(n, n, &q(0), |_, _| q(rng.gen_range(-4..=4)));
            if m.det() != q(0) {
                break m;
            }
        };
        let w = QMatrix::antidiagonal(n, &q(0));
        let star = w.mul(&h.transpose().inverse().unwrap()).mul(&w);
        let g = QMatrix::block_diag(&[h.clone(), star], &q(0));
        let gram = QMatrix::antidiagonal(2 * n, &q(0));
        let ok = prasad::spinor_norm(&g, &gram, p).ok() == SquareClass::reduce(&h.det(), p).ok();
        t.check(ok, || format!("siegel {h:?}"));
    }
    let gram = QMatrix::antidiagonal(2, &q(0));
    for tval in 1..=10i64 {
        let g = QMatrix::diagonal(&[q(tval), BigRational::new(1.into(), tval.into())], &q(0));
        let ok = prasad::spinor_norm(&g, &gram, p).ok() == SquareClass::from_int(tval, p).ok();
        t.check(ok, || format!("torus {tval}"));
    }
    t.finish()
}

fn prasad_table() -> SuiteReport {
    let mut t = Tally::new("prasad_table");
    let e = QuadExtension::from_int(-1, Prime::new(3).unwrap()).unwrap();
    let rows: [(GroupDescriptor, bool); 5] = [
        (GroupDescriptor::Gl { m: 2 }, false),
        (GroupDescriptor::Gl { m: 3 }, true),
        (GroupDescriptor::Unitary { m: 2, k: None }, true),
        (GroupDescriptor::Sp { m: 2 }, true),
        (GroupDescriptor::So { m: 5, form: None }, false),
    ];
    for (y, trivial) in rows {
        let got = prasad::prasad_character(&y, &e).map(|c| c.is_trivial());
        t.check(got == Ok(trivial), || format!("{y:?}"));
        let back = prasad::opposition_group(&y, &e).and_then(|o| prasad::opposition_group(&o, &e));
        t.check(back == y.normalized(&e), || format!("opposition {y:?}"));
    }
    t.finish()
}

fn models() -> SuiteReport {
    let mut t = Tally::new("bundled_models");
    for m in bundled_models() {
        if m.b.is_none() {
            t.check(m.pair(Case::Orthogonal, &[], 1).is_ok(), || m.name.clone());
            continue;
        }
        let ok = m
            .pair(Case::Unitary, &[], 1)
            .ok()
            .and_then(|p| gamma_index_data(&p).ok())
            .is_some_and(|g| Some(g.minus_one_bit) == m.minus_one_bit && Some(g.y_parity) == m.y_parity);
        t.check(ok, || m.name.clone());
    }
    t.finish()
}
