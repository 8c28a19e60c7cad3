//! Elementary number theory on machine integers: valuations, square-free
//! decompositions, Kronecker and Hilbert symbols, fundamental discriminants.

use thiserror::Error;

/// Default trial-division bound used by [`factorize`].
pub const DEFAULT_TRIAL_BOUND: u64 = 1 << 32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NumthError {
    #[error("argument must be positive")]
    Zero,
    #[error("{0} is not square-free")]
    NotSquarefree(u64),
    #[error("cannot factor {n}: trial division bound {bound} exceeded")]
    FactorizationFailed { n: u64, bound: u64 },
}

/// `n = u * p^(2h)` with `v_p(u)` in `{0, 1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PAdicSplit {
    pub u: u64,
    pub h: u32,
    pub p: u64,
}

/// `n = n_sf * y^2` with `n_sf` square-free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SquarefreeSplit {
    pub n_sf: u64,
    pub y: u64,
}

/// Discriminant of `Q(sqrt(-t))`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FundamentalDiscriminant {
    pub delta: i64,
    pub t: u64,
}

impl FundamentalDiscriminant {
    pub fn abs(&self) -> u64 {
        self.delta.unsigned_abs()
    }
}

/// p-adic valuation of a nonzero integer.
pub fn valuation(n: i128, p: u64) -> u32 {
    assert!(n != 0, "valuation of zero");
    let p = p as i128;
    let mut n = n;
    let mut v = 0;
    while n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

pub fn padic_split(n: u64, p: u64) -> Result<PAdicSplit, NumthError> {
    if n == 0 {
        return Err(NumthError::Zero);
    }
    let mut u = n;
    let mut h = 0;
    let p2 = p * p;
    while u % p2 == 0 {
        u /= p2;
        h += 1;
    }
    Ok(PAdicSplit { u, h, p })
}

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

pub fn primes_up_to(bound: u64) -> Vec<u64> {
    (2..=bound).filter(|&n| is_prime(n)).collect()
}

/// Prime factorization by trial division up to `DEFAULT_TRIAL_BOUND`.
pub fn factorize(n: u64) -> Result<Vec<(u64, u32)>, NumthError> {
    factorize_with_bound(n, DEFAULT_TRIAL_BOUND)
}

pub fn factorize_with_bound(n: u64, bound: u64) -> Result<Vec<(u64, u32)>, NumthError> {
    if n == 0 {
        return Err(NumthError::Zero);
    }
    let mut out = Vec::new();
    let mut m = n;
    let mut d = 2u64;
    while d.saturating_mul(d) <= m {
        if d > bound {
            return Err(NumthError::FactorizationFailed { n, bound });
        }
        if m % d == 0 {
            let mut e = 0;
            while m % d == 0 {
                m /= d;
                e += 1;
            }
            out.push((d, e));
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > 1 {
        out.push((m, 1));
    }
    Ok(out)
}

pub fn prime_divisors(n: u64) -> Vec<u64> {
    factorize(n)
        .map(|f| f.into_iter().map(|(p, _)| p).collect())
        .unwrap_or_default()
}

pub fn is_squarefree(n: u64) -> bool {
    n > 0 && factorize(n).map(|f| f.iter().all(|&(_, e)| e == 1)).unwrap_or(false)
}

pub fn squarefree_split(n: u64) -> Result<SquarefreeSplit, NumthError> {
    squarefree_split_with_bound(n, DEFAULT_TRIAL_BOUND)
}

pub fn squarefree_split_with_bound(n: u64, bound: u64) -> Result<SquarefreeSplit, NumthError> {
    let mut n_sf = 1;
    let mut y = 1;
    for (p, e) in factorize_with_bound(n, bound)? {
        if e % 2 == 1 {
            n_sf *= p;
        }
        y *= p.pow(e / 2);
    }
    Ok(SquarefreeSplit { n_sf, y })
}

pub fn fundamental_discriminant(t: u64) -> Result<FundamentalDiscriminant, NumthError> {
    if t == 0 {
        return Err(NumthError::Zero);
    }
    if !is_squarefree(t) {
        return Err(NumthError::NotSquarefree(t));
    }
    let delta = if t % 4 == 3 { -(t as i64) } else { -4 * t as i64 };
    Ok(FundamentalDiscriminant { delta, t })
}

/// Jacobi symbol `(a/n)` for odd positive `n`.
fn jacobi(a: i128, n: i128) -> i32 {
    debug_assert!(n > 0 && n % 2 == 1);
    let mut a = a.rem_euclid(n);
    let mut n = n;
    let mut result = 1;
    while a != 0 {
        while a % 2 == 0 {
            a /= 2;
            let r = n % 8;
            if r == 3 || r == 5 {
                result = -result;
            }
        }
        std::mem::swap(&mut a, &mut n);
        if a % 4 == 3 && n % 4 == 3 {
            result = -result;
        }
        a %= n;
    }
    if n == 1 {
        result
    } else {
        0
    }
}

/// Kronecker symbol `(a/n)`.
pub fn kronecker(a: i64, n: i64) -> i32 {
    let (a, mut n) = (a as i128, n as i128);
    if n == 0 {
        return if a == 1 || a == -1 { 1 } else { 0 };
    }
    let mut result = 1;
    if n < 0 {
        n = -n;
        if a < 0 {
            result = -result;
        }
    }
    let mut v = 0;
    while n % 2 == 0 {
        n /= 2;
        v += 1;
    }
    if v > 0 {
        if a % 2 == 0 {
            return 0;
        }
        if v % 2 == 1 {
            let r = a.rem_euclid(8);
            if r == 3 || r == 5 {
                result = -result;
            }
        }
    }
    result * jacobi(a, n)
}

/// Legendre symbol for an odd prime `p`.
pub fn legendre(a: i64, p: u64) -> i32 {
    jacobi(a as i128, p as i128)
}

fn strip_two(x: i64) -> (u32, i64) {
    let v = x.trailing_zeros();
    (v, x >> v)
}

/// Hilbert symbol `(a, b)_2`.
pub fn hilbert2(a: i64, b: i64) -> i32 {
    assert!(a != 0 && b != 0, "Hilbert symbol of zero");
    let (alpha, s) = strip_two(a);
    let (beta, t) = strip_two(b);
    let eps = |x: i64| (x - 1).rem_euclid(4) / 2;
    let omega = |x: i64| {
        let r = x.rem_euclid(8);
        i64::from(r == 3 || r == 5)
    };
    let e = eps(s) * eps(t) + alpha as i64 * omega(t) + beta as i64 * omega(s);
    if e % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Hilbert symbol `(a, b)_p` at an odd prime via the tame formula.
pub fn hilbert_odd(a: i64, b: i64, p: u64) -> i32 {
    assert!(a != 0 && b != 0, "Hilbert symbol of zero");
    assert!(p % 2 == 1, "hilbert_odd needs an odd prime");
    let alpha = valuation(a as i128, p);
    let beta = valuation(b as i128, p);
    let pp = p as i64;
    let u = a / pp.pow(alpha);
    let v = b / pp.pow(beta);
    let mut sign = 1;
    if alpha % 2 == 1 && beta % 2 == 1 && p % 4 == 3 {
        sign = -1;
    }
    if beta % 2 == 1 {
        sign *= legendre(u, p);
    }
    if alpha % 2 == 1 {
        sign *= legendre(v, p);
    }
    sign
}

/// Hilbert symbol at any prime `p`.
pub fn hilbert(a: i64, b: i64, p: u64) -> i32 {
    if p == 2 {
        hilbert2(a, b)
    } else {
        hilbert_odd(a, b, p)
    }
}

/// Hilbert symbol at the real place.
pub fn hilbert_inf(a: i64, b: i64) -> i32 {
    if a < 0 && b < 0 {
        -1
    } else {
        1
    }
}

pub fn euler_phi_squarefree(n: u64) -> u64 {
    prime_divisors(n).iter().map(|p| p - 1).product()
}

pub fn dedekind_psi_squarefree(n: u64) -> u64 {
    prime_divisors(n).iter().map(|p| p + 1).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_split(n: u64, p: u64) -> (u64, u32) {
        let mut best = (n, 0);
        let mut h = 0;
        let mut pw = 1u64;
        while n % pw == 0 {
            let u = n / pw;
            if u % (p * p) != 0 {
                best = (u, h);
                break;
            }
            h += 1;
            pw *= p * p;
        }
        best
    }

    #[test]
    fn padic_split_examples() {
        assert_eq!(padic_split(18, 3).unwrap(), PAdicSplit { u: 2, h: 1, p: 3 });
        assert_eq!(padic_split(7, 5).unwrap(), PAdicSplit { u: 7, h: 0, p: 5 });
        assert_eq!(padic_split(16, 2).unwrap(), PAdicSplit { u: 1, h: 2, p: 2 });
        assert_eq!(padic_split(0, 2), Err(NumthError::Zero));
        for n in 1..500 {
            for p in [2, 3, 5, 7] {
                let s = padic_split(n, p).unwrap();
                assert_eq!((s.u, s.h), brute_split(n, p));
                assert_eq!(s.u * p.pow(2 * s.h), n);
                assert!(s.u % (p * p) != 0);
            }
        }
    }

    #[test]
    fn squarefree_split_examples() {
        let brute = |n: u64| {
            let y = (1..=n).filter(|y| n % (y * y) == 0).max().unwrap();
            (n / (y * y), y)
        };
        assert_eq!(brute(12), (3, 2));
        assert_eq!(brute(68), (17, 2));
        for n in [1, 12, 68, 72, 1000, 97, 360] {
            let s = squarefree_split(n).unwrap();
            assert_eq!((s.n_sf, s.y), brute(n));
        }
        assert_eq!(
            squarefree_split_with_bound(1_000_003 * 1_000_033, 1000),
            Err(NumthError::FactorizationFailed { n: 1_000_003 * 1_000_033, bound: 1000 })
        );
    }

    #[test]
    fn fundamental_discriminant_examples() {
        assert_eq!(fundamental_discriminant(3).unwrap().delta, -3);
        assert_eq!(fundamental_discriminant(2).unwrap().delta, -8);
        assert_eq!(fundamental_discriminant(5).unwrap().delta, -20);
        assert_eq!(fundamental_discriminant(1).unwrap().delta, -4);
        assert_eq!(fundamental_discriminant(12), Err(NumthError::NotSquarefree(12)));
        for t in 1..300u64 {
            if !is_squarefree(t) {
                continue;
            }
            let d = fundamental_discriminant(t).unwrap().delta;
            let r16 = d.rem_euclid(16);
            assert!(d.rem_euclid(4) == 1 || r16 == 8 || r16 == 12, "t={t} d={d}");
            for p in primes_up_to(40).into_iter().skip(1) {
                assert!(d % (p * p) as i64 != 0);
            }
        }
    }

    #[test]
    fn kronecker_examples() {
        assert_eq!(kronecker(-3, 5), -1);
        assert_eq!(kronecker(-68, 3), 1);
        assert_eq!(kronecker(4, 7), 1);
        assert_eq!(kronecker(-8, 3), 1);
        assert_eq!(kronecker(5, 2), -1);
        assert_eq!(kronecker(-7, 2), 1);
        assert_eq!(kronecker(6, 3), 0);
        // Legendre symbols against squares mod p.
        for p in primes_up_to(50).into_iter().skip(1) {
            let squares: Vec<u64> = (1..p).map(|x| x * x % p).collect();
            for a in -60i64..60 {
                let r = a.rem_euclid(p as i64) as u64;
                let expect = if r == 0 {
                    0
                } else if squares.contains(&r) {
                    1
                } else {
                    -1
                };
                assert_eq!(kronecker(a, p as i64), expect);
            }
        }
    }

    #[test]
    fn kronecker_periodic_for_fundamental() {
        for t in 1..60u64 {
            if !is_squarefree(t) {
                continue;
            }
            let d = fundamental_discriminant(t).unwrap().delta;
            let m = d.abs();
            for n in 1..80i64 {
                assert_eq!(kronecker(d, n), kronecker(d, n + m));
            }
        }
    }

    #[test]
    fn kronecker_multiplicative() {
        for a in [-20i64, -7, -3, 5, 12] {
            for m in 1..30i64 {
                for n in 1..30i64 {
                    assert_eq!(kronecker(a, m * n), kronecker(a, m) * kronecker(a, n));
                }
            }
        }
    }

    #[test]
    fn hilbert_examples() {
        assert_eq!(hilbert2(2, 3), -1);
        assert_eq!(hilbert2(-1, -1), -1);
        assert_eq!(hilbert2(3, -1), -1);
        assert_eq!(hilbert2(2, 15), 1);
        for b in [-7, -1, 1, 2, 3, 6, 10] {
            assert_eq!(hilbert2(1, b), 1);
            assert_eq!(hilbert_odd(1, b, 5), 1);
        }
        assert_eq!(hilbert_odd(5, 7, 3), 1);
        // (3,3)_3 = (3,-1)_3 = (-1/3) = -1
        assert_eq!(hilbert_odd(3, 3, 3), -1);
        assert_eq!(hilbert_odd(-2, -5, 5), -1);
    }

    #[test]
    fn factorize_small() {
        assert_eq!(factorize(360).unwrap(), vec![(2, 3), (3, 2), (5, 1)]);
        assert_eq!(factorize(1).unwrap(), vec![]);
        assert_eq!(euler_phi_squarefree(15), 8);
        assert_eq!(dedekind_psi_squarefree(15), 24);
        assert!(is_prime(37) && !is_prime(35));
    }
}
