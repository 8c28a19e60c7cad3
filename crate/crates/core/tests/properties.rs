//! Invariants checked on every small level with a rational newform of odd
//! root number.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::ToPrimitive;
use shimura_core::brandt::{self, expected_mass};
use shimura_core::lift::{self, LiftProfile};
use shimura_core::linalg::Rat;
use shimura_core::numth::{is_prime, prime_divisors, squarefree_split};
use shimura_core::pipeline::{self, Selection};
use shimura_core::theta::{self, hecke_check};
use shimura_core::{compute_basis, Basis, JobConfig};

const LEVELS: [u64; 6] = [11, 15, 21, 33, 35, 37];

fn good_primes(level: u64, k: usize) -> Vec<u64> {
    (3..).filter(|&p| is_prime(p) && level % p != 0).take(k).collect()
}

fn selection(level: u64) -> Selection {
    pipeline::select(&JobConfig::new(level, 40), 40).unwrap()
}

fn basis(level: u64, prec: u64) -> Basis {
    compute_basis(&JobConfig::new(level, prec)).unwrap()
}

#[test]
fn g_is_in_the_kohnen_space() {
    for n in LEVELS {
        let b = basis(n, 40);
        assert!(!b.g.is_zero(), "N={n}");
        assert_eq!(b.g.kohnen_violation(), None, "N={n}");
    }
}

#[test]
fn brandt_matrix_structure() {
    for n in LEVELS {
        let sel = selection(n);
        let m = &sel.module;
        assert!(brandt::is_identity(&m.matrix(1).unwrap()));
        for p in (2..).filter(|&p| is_prime(p) && n % p != 0).take(3) {
            let b = m.matrix(p).unwrap();
            assert!(brandt::row_sums(&b).iter().all(|&s| s == p as i64 + 1), "N={n} p={p}");
        }
        let mats: Vec<_> = (1..=12).map(|k| m.matrix(k).unwrap()).collect();
        for a in &mats {
            assert!(brandt::is_self_adjoint(a, &m.classes.unit_counts), "N={n} B({})", a.n);
            for b in &mats {
                assert!(brandt::commute(a, b), "N={n} B({}) B({})", a.n, b.n);
            }
        }
    }
}

#[test]
fn mass_formula() {
    for n in LEVELS {
        let sel = selection(n);
        let d = sel.algebra.discriminant();
        let total: Rat = sel.module.classes.unit_counts.iter().map(|&e| Rat::new(BigInt::from(2), BigInt::from(e))).sum();
        assert_eq!(total, expected_mass(n, d), "N={n}");
    }
}

#[test]
fn eigenvalues_respect_hasse_bound() {
    for n in LEVELS {
        let e = selection(n).eigenform;
        for (&p, &b) in &e.eigenvalues {
            if n % p != 0 {
                assert!((b * b) as u64 <= 4 * p, "N={n} b_{p}={b}");
            } else {
                assert_eq!(b.abs(), 1);
                assert_eq!(e.al_signs[&p], -(b as i32));
            }
        }
        let sign: i32 = e.al_signs.values().product();
        assert_eq!(sign, -1, "N={n}");
    }
}

#[test]
fn ternary_gram_determinant() {
    for n in LEVELS {
        let sel = selection(n);
        for o in &sel.module.classes.right_orders {
            let r = theta::trace_zero_lattice(o).unwrap();
            assert_eq!(r.gram_determinant(), Rat::from_integer(BigInt::from(4 * n * n)), "N={n}");
        }
    }
}

#[test]
fn hecke_relations_on_g_and_h() {
    for n in LEVELS {
        let ps = good_primes(n, 2);
        let prec = 4 * ps[1] * ps[1];
        let b = basis(n, prec);
        for p in ps {
            let bp = b.eigenform.eigenvalues[&p];
            assert!(hecke_check(&b.g, bp, p).unwrap(), "g N={n} p={p}");
            assert!(hecke_check(&b.h, bp, p).unwrap(), "h N={n} p={p}");
        }
    }
}

#[test]
fn h_is_integral_and_nonzero() {
    for n in LEVELS {
        let b = basis(n, 40);
        assert!(b.h.is_integral(), "N={n}");
        assert!(!b.h.is_zero(), "N={n}");
    }
}

#[test]
fn tiers_agree_at_s_zero() {
    for n in LEVELS {
        let prec = 60;
        let b = basis(n, prec);
        let profile = LiftProfile::from_eigenform(n, &b.eigenform).unwrap();
        let thetas = theta::class_thetas(&selection(n).module.classes, 4 * prec).unwrap();
        let g4 = theta::kohnen_form_for(&b.eigenform, &thetas).unwrap();
        assert_eq!(g4.truncate(prec), b.g);
        for m in 1..=prec {
            let sp = squarefree_split(m).unwrap();
            let only_bad = prime_divisors(sp.y).iter().all(|p| n % p == 0);
            if !only_bad {
                continue;
            }
            let t2 = lift::tier2(&g4, &profile, sp.n_sf, sp.y).unwrap();
            assert_eq!(t2, b.h.coeff(m), "N={n} m={m}");
            if sp.y == 1 {
                assert_eq!(lift::tier1(&g4, &profile, m).unwrap(), t2, "N={n} m={m}");
            }
        }
    }
}

#[test]
fn h_matches_the_local_factor_formula() {
    for n in LEVELS {
        let prec = 60;
        let b = basis(n, prec);
        let profile = LiftProfile::from_eigenform(n, &b.eigenform).unwrap();
        let thetas = theta::class_thetas(&selection(n).module.classes, 4 * prec).unwrap();
        let g4 = theta::kohnen_form_for(&b.eigenform, &thetas).unwrap();
        let (f1, f2) = lift::f1_f2_diagnostic(&g4, &profile, prec).unwrap();
        for (k, (a, c)) in f1.iter().zip(&f2).enumerate() {
            let m = k as u64 + 1;
            let z: Complex64 = (a + c) * std::f64::consts::SQRT_2;
            let exact = b.h.coeff(m).to_f64().unwrap();
            assert!((z.re - exact).abs() < 1e-8 && z.im.abs() < 1e-8, "N={n} m={m}: {z} vs {exact}");
        }
    }
}

#[test]
fn output_is_independent_of_worker_count() {
    let run = |threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| shimura_core::cmd_basis(&JobConfig::new(33, 40)).unwrap())
    };
    assert_eq!(run(1), run(4));
}
