use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use proptest::prelude::*;
use shimura_core::lift::PowerSumSeq;
use shimura_core::linalg::Rat;
use shimura_core::numth::{
    fundamental_discriminant, hilbert, hilbert_inf, is_prime, kronecker, primes_up_to, squarefree_split,
};
use shimura_core::theta::QExpansion;
use shimura_core::Selector;

/// `a^((p-1)/2) mod p` as a sign.
fn euler(a: i64, p: u64) -> i32 {
    let p = p as i128;
    let mut base = (a as i128).rem_euclid(p);
    if base == 0 {
        return 0;
    }
    let (mut e, mut acc) = ((p - 1) / 2, 1i128);
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        e >>= 1;
    }
    if acc == 1 { 1 } else { -1 }
}

proptest! {
    #[test]
    fn kronecker_matches_euler(a in -10_000i64..10_000, k in 1usize..60) {
        let p = primes_up_to(300)[k];
        prop_assert_eq!(kronecker(a, p as i64), euler(a, p));
    }

    #[test]
    fn hilbert_is_symmetric_and_bimultiplicative(
        a in -60i64..60, b in -60i64..60, c in -60i64..60, k in 0usize..8,
    ) {
        prop_assume!(a != 0 && b != 0 && c != 0);
        let p = primes_up_to(20)[k];
        prop_assert_eq!(hilbert(a, b, p), hilbert(b, a, p));
        prop_assert_eq!(hilbert(a, b * c, p), hilbert(a, b, p) * hilbert(a, c, p));
        prop_assert_eq!(hilbert(a, -a, p), 1);
    }

    #[test]
    fn product_formula(a in -500i64..500, b in -500i64..500) {
        prop_assume!(a != 0 && b != 0);
        let mut prod = hilbert_inf(a, b);
        for p in primes_up_to(500) {
            prod *= hilbert(a, b, p);
        }
        prop_assert_eq!(prod, 1);
    }

    #[test]
    fn fundamental_discriminants(t in 1u64..100_000) {
        let sf = squarefree_split(t).unwrap().n_sf;
        let d = fundamental_discriminant(sf).unwrap();
        prop_assert_eq!(d.t, sf);
        prop_assert!(d.abs() == sf || d.abs() == 4 * sf);
        prop_assert!(d.delta < 0);
        let m = d.delta.rem_euclid(4);
        prop_assert!(m == 1 || (m == 0 && [8, 12].contains(&d.delta.rem_euclid(16))));
    }

    #[test]
    fn power_sums_track_root_powers(b2 in -5i64..=5, s in 0u32..=30) {
        let x = b2 as f64 / 2f64.sqrt();
        let disc = Complex64::new(x * x - 4.0, 0.0).sqrt();
        let (a, a2) = ((x + disc) / 2.0, (x - disc) / 2.0);
        let t = PowerSumSeq::new(b2, 31).get(s as usize) as f64;
        let z = (a.powu(s) + a2.powu(s)) * 2f64.powf(s as f64 / 2.0);
        prop_assert!((z.re - t).abs() <= 1e-9 * t.abs().max(1.0) && z.im.abs() <= 1e-9 * t.abs().max(1.0));
    }

    #[test]
    fn qexpansion_json_round_trip(
        coeffs in proptest::collection::btree_map(1u64..200, (-1000i64..1000, 1i64..50), 0..40),
        prec in 1u64..200,
    ) {
        let q = QExpansion::from_coeffs(
            prec,
            coeffs.iter().map(|(&n, &(a, d))| (n, Rat::new(BigInt::from(a), BigInt::from(d)))),
        );
        let s = serde_json::to_string(&q).unwrap();
        let back: QExpansion = serde_json::from_str(&s).unwrap();
        prop_assert_eq!(back, q);
    }

    #[test]
    fn selector_round_trip(m in proptest::collection::btree_map(0usize..25, -10i64..10, 1..6)) {
        let primes = primes_up_to(100);
        let prefix: BTreeMap<u64, i64> = m.into_iter().map(|(k, b)| (primes[k], b)).collect();
        let s = Selector::Prefix(prefix);
        prop_assert_eq!(s.to_string().parse::<Selector>().unwrap(), s);
    }
}

#[test]
fn primes_are_primes() {
    let ps = primes_up_to(1000);
    assert_eq!(ps.len(), 168);
    assert!(ps.iter().all(|&p| is_prime(p)));
}
