//! Definite rational quaternion algebras `B = (-a, -b)` with basis
//! `1, i, j, k`, `i^2 = -a`, `j^2 = -b`, `k = ij = -ji`.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Rat;
use crate::numth::{hilbert, hilbert_inf, is_squarefree, prime_divisors};

/// Largest `a * b` examined when searching for a presentation.
pub const PRESENTATION_SEARCH_BOUND: i64 = 1 << 22;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum QuatError {
    #[error("product of Atkin-Lehner signs is +1; L(F, 1/2) vanishes for sign reasons")]
    EvenRootNumber,
    #[error("no presentation (-a, -b) ramified exactly at {0:?} with a*b below the search bound")]
    SearchExhausted(Vec<u64>),
    #[error("elements belong to different algebras {0:?} and {1:?}")]
    MixedAlgebras(Presentation, Presentation),
    #[error("(-{a}, -{b}) is ramified at {actual:?}, not at {expected:?}")]
    WrongRamification { a: i64, b: i64, expected: Vec<u64>, actual: Vec<u64> },
    #[error("invalid level {0}: must be odd and square-free")]
    BadLevel(u64),
    #[error("missing Atkin-Lehner sign for p = {0}")]
    MissingSign(u64),
    #[error("presentation parameters must be positive")]
    NotDefinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Presentation {
    pub a: i64,
    pub b: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuaternionAlgebra {
    pub a: i64,
    pub b: i64,
    pub ramified: Vec<u64>,
}

/// Finite primes at which `(-a, -b)` ramifies.
pub fn ramified_primes(a: i64, b: i64) -> Vec<u64> {
    let mut candidates = prime_divisors((2 * a * b) as u64);
    candidates.sort_unstable();
    candidates.into_iter().filter(|&p| hilbert(-a, -b, p) == -1).collect()
}

impl QuaternionAlgebra {
    pub fn new(a: i64, b: i64) -> Result<Self, QuatError> {
        if a <= 0 || b <= 0 {
            return Err(QuatError::NotDefinite);
        }
        Ok(QuaternionAlgebra { a, b, ramified: ramified_primes(a, b) })
    }

    /// A specific presentation, checked against the expected ramification.
    pub fn with_ramification(a: i64, b: i64, expected: &[u64]) -> Result<Self, QuatError> {
        let alg = Self::new(a, b)?;
        let mut exp = expected.to_vec();
        exp.sort_unstable();
        if alg.ramified != exp {
            return Err(QuatError::WrongRamification { a, b, expected: exp, actual: alg.ramified });
        }
        Ok(alg)
    }

    /// The first presentation in the search order (increasing `a*b`, then
    /// increasing `a`) ramified exactly at `ramified` and infinity.
    pub fn ramified_at(ramified: &[u64]) -> Result<Self, QuatError> {
        Self::ramified_at_skipping(ramified, 0)
    }

    /// Like [`Self::ramified_at`] but returns the `skip`-th valid presentation.
    pub fn ramified_at_skipping(ramified: &[u64], skip: usize) -> Result<Self, QuatError> {
        let mut target = ramified.to_vec();
        target.sort_unstable();
        let mut seen = 0;
        for m in 1..=PRESENTATION_SEARCH_BOUND {
            let mut a = 1;
            while a * a <= m {
                if m % a == 0 {
                    let b = m / a;
                    if ramified_primes(a, b) == target {
                        if seen == skip {
                            return Ok(QuaternionAlgebra { a, b, ramified: target });
                        }
                        seen += 1;
                    }
                }
                a += 1;
            }
        }
        Err(QuatError::SearchExhausted(target))
    }

    pub fn presentation(&self) -> Presentation {
        Presentation { a: self.a, b: self.b }
    }

    /// Product of the finite ramified primes.
    pub fn discriminant(&self) -> u64 {
        self.ramified.iter().product()
    }

    pub fn element(&self, coords: [Rat; 4]) -> Quaternion {
        Quaternion { coords, pres: self.presentation() }
    }

    pub fn from_ints(&self, c: [i64; 4]) -> Quaternion {
        self.element(c.map(|x| Rat::from_integer(BigInt::from(x))))
    }

    pub fn one(&self) -> Quaternion {
        self.from_ints([1, 0, 0, 0])
    }

    pub fn zero(&self) -> Quaternion {
        self.from_ints([0, 0, 0, 0])
    }

    /// Hilbert symbol of the presentation at every place; `None` is infinity.
    pub fn local_invariants(&self) -> Vec<(Option<u64>, i32)> {
        let mut out = vec![(None, hilbert_inf(-self.a, -self.b))];
        let mut ps = prime_divisors((2 * self.a * self.b) as u64);
        ps.sort_unstable();
        out.extend(ps.into_iter().map(|p| (Some(p), hilbert(-self.a, -self.b, p))));
        out
    }
}

/// The definite algebra ramified at `{p | N : w_p = -1}`.
pub fn algebra_for_level(
    level: u64,
    atkin_lehner: &BTreeMap<u64, i32>,
) -> Result<QuaternionAlgebra, QuatError> {
    if level % 2 == 0 || !is_squarefree(level) {
        return Err(QuatError::BadLevel(level));
    }
    let mut ram = Vec::new();
    let mut sign = 1;
    for p in prime_divisors(level) {
        let w = *atkin_lehner.get(&p).ok_or(QuatError::MissingSign(p))?;
        sign *= w;
        if w == -1 {
            ram.push(p);
        }
    }
    if sign == 1 {
        return Err(QuatError::EvenRootNumber);
    }
    QuaternionAlgebra::ramified_at(&ram)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Quaternion {
    pub coords: [Rat; 4],
    pres: Presentation,
}

impl fmt::Debug for Quaternion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = &self.coords;
        write!(f, "({}) + ({})i + ({})j + ({})k", c[0], c[1], c[2], c[3])
    }
}

impl Quaternion {
    pub fn new(coords: [Rat; 4], pres: Presentation) -> Quaternion {
        Quaternion { coords, pres }
    }

    pub fn presentation(&self) -> Presentation {
        self.pres
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(Zero::is_zero)
    }

    pub fn try_mul(&self, other: &Quaternion) -> Result<Quaternion, QuatError> {
        if self.pres != other.pres {
            return Err(QuatError::MixedAlgebras(self.pres, other.pres));
        }
        let alpha = Rat::from_integer(BigInt::from(-self.pres.a));
        let beta = Rat::from_integer(BigInt::from(-self.pres.b));
        let [x0, x1, x2, x3] = &self.coords;
        let [y0, y1, y2, y3] = &other.coords;
        let ab = &alpha * &beta;
        let c0 = x0 * y0 + &alpha * (x1 * y1) + &beta * (x2 * y2) - &ab * (x3 * y3);
        let c1 = x0 * y1 + x1 * y0 - &beta * (x2 * y3) + &beta * (x3 * y2);
        let c2 = x0 * y2 + x2 * y0 + &alpha * (x1 * y3) - &alpha * (x3 * y1);
        let c3 = x0 * y3 + x3 * y0 + x1 * y2 - x2 * y1;
        Ok(Quaternion { coords: [c0, c1, c2, c3], pres: self.pres })
    }

    pub fn conj(&self) -> Quaternion {
        let [x0, x1, x2, x3] = &self.coords;
        Quaternion { coords: [x0.clone(), -x1.clone(), -x2.clone(), -x3.clone()], pres: self.pres }
    }

    /// Reduced norm `x0^2 + a x1^2 + b x2^2 + ab x3^2`.
    pub fn norm(&self) -> Rat {
        let a = Rat::from_integer(BigInt::from(self.pres.a));
        let b = Rat::from_integer(BigInt::from(self.pres.b));
        let [x0, x1, x2, x3] = &self.coords;
        x0 * x0 + &a * (x1 * x1) + &b * (x2 * x2) + &a * &b * (x3 * x3)
    }

    /// Reduced trace `2 x0`.
    pub fn trace(&self) -> Rat {
        &self.coords[0] * Rat::from_integer(BigInt::from(2))
    }

    /// Reduced bilinear form `trd(x conj(y))`.
    pub fn pair(&self, other: &Quaternion) -> Rat {
        let a = Rat::from_integer(BigInt::from(self.pres.a));
        let b = Rat::from_integer(BigInt::from(self.pres.b));
        let x = &self.coords;
        let y = &other.coords;
        let two = Rat::from_integer(BigInt::from(2));
        two * (&x[0] * &y[0] + &a * (&x[1] * &y[1]) + &b * (&x[2] * &y[2]) + &a * &b * (&x[3] * &y[3]))
    }

    pub fn inverse(&self) -> Option<Quaternion> {
        let n = self.norm();
        if n.is_zero() {
            return None;
        }
        Some(self.conj().scale(&n.recip()))
    }

    pub fn scale(&self, s: &Rat) -> Quaternion {
        Quaternion { coords: self.coords.clone().map(|c| c * s), pres: self.pres }
    }

    pub fn is_integral(&self) -> bool {
        self.trace().is_integer() && self.norm().is_integer()
    }

    pub fn is_one(&self) -> bool {
        self.coords[0].is_one() && self.coords[1..].iter().all(Zero::is_zero)
    }
}

impl Mul for &Quaternion {
    type Output = Quaternion;
    fn mul(self, rhs: &Quaternion) -> Quaternion {
        self.try_mul(rhs).expect("quaternions from different algebras")
    }
}

impl Add for &Quaternion {
    type Output = Quaternion;
    fn add(self, rhs: &Quaternion) -> Quaternion {
        assert_eq!(self.pres, rhs.pres, "quaternions from different algebras");
        let coords = std::array::from_fn(|t| &self.coords[t] + &rhs.coords[t]);
        Quaternion { coords, pres: self.pres }
    }
}

impl Sub for &Quaternion {
    type Output = Quaternion;
    fn sub(self, rhs: &Quaternion) -> Quaternion {
        self + &(-rhs)
    }
}

impl Neg for &Quaternion {
    type Output = Quaternion;
    fn neg(self) -> Quaternion {
        Quaternion { coords: self.coords.clone().map(|c| -c), pres: self.pres }
    }
}
