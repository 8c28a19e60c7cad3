//! Ternary theta series of trace-zero lattices and the weight 3/2 form `g`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::brandt::{EigenformData, IdealClassSet};
use crate::lattice::{self, hnf::hnf, Lattice4, LatticeError, Order};
use crate::linalg::{self, Rat, RatMatrix};
use crate::numth::kronecker;
use crate::quat::Quaternion;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ThetaError {
    #[error("precision {prec} too small: need at least {needed}")]
    InsufficientPrecision { prec: u64, needed: u64 },
    #[error("odd representation count {count} at n = {n}")]
    OddCount { n: u64, count: u64 },
    #[error("Kohnen condition fails at n = {0}")]
    KohnenViolation(u64),
    #[error("eigenvector length {found} does not match class number {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("missing Hecke eigenvalue b_{0}")]
    MissingEigenvalue(u64),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Sparse truncated q-series `sum_{1 <= n <= prec} a_n q^n`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct QExpansion {
    pub prec: u64,
    coeffs: BTreeMap<u64, Rat>,
}

impl QExpansion {
    pub fn zero(prec: u64) -> Self {
        QExpansion { prec, coeffs: BTreeMap::new() }
    }

    /// Builds a series from `(n, a_n)` pairs, dropping zeros and `n > prec`.
    pub fn from_coeffs<I: IntoIterator<Item = (u64, Rat)>>(prec: u64, it: I) -> Self {
        let coeffs = it.into_iter().filter(|(n, a)| *n >= 1 && *n <= prec && !a.is_zero()).collect();
        QExpansion { prec, coeffs }
    }

    pub fn from_ints(prec: u64, pairs: &[(u64, i64)]) -> Self {
        Self::from_coeffs(prec, pairs.iter().map(|&(n, a)| (n, Rat::from_integer(BigInt::from(a)))))
    }

    pub fn coeff(&self, n: u64) -> Rat {
        self.coeffs.get(&n).cloned().unwrap_or_else(Rat::zero)
    }

    pub fn set(&mut self, n: u64, a: Rat) {
        if a.is_zero() {
            self.coeffs.remove(&n);
        } else {
            self.coeffs.insert(n, a);
        }
    }

    /// Nonzero coefficients in increasing `n`.
    pub fn nonzero(&self) -> impl Iterator<Item = (u64, &Rat)> {
        self.coeffs.iter().map(|(n, a)| (*n, a))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn truncate(&self, prec: u64) -> QExpansion {
        let prec = prec.min(self.prec);
        QExpansion {
            prec,
            coeffs: self.coeffs.range(..=prec).map(|(n, a)| (*n, a.clone())).collect(),
        }
    }

    pub fn scale(&self, s: &Rat) -> QExpansion {
        QExpansion::from_coeffs(self.prec, self.coeffs.iter().map(|(n, a)| (*n, a * s)))
    }

    /// `self + s * other`, at the smaller precision.
    pub fn add_scaled(&self, other: &QExpansion, s: &Rat) -> QExpansion {
        let prec = self.prec.min(other.prec);
        let mut out = self.truncate(prec);
        for (n, a) in other.coeffs.range(..=prec) {
            let v = out.coeff(*n) + a * s;
            out.set(*n, v);
        }
        out
    }

    pub fn is_integral(&self) -> bool {
        self.coeffs.values().all(|a| a.is_integer())
    }

    /// First `n` with `a_n != 0` and `n = 1, 2 mod 4`.
    pub fn kohnen_violation(&self) -> Option<u64> {
        self.coeffs.keys().copied().find(|n| n % 4 == 1 || n % 4 == 2)
    }

    /// Two-column text, one line per `1 <= n <= prec`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for n in 1..=self.prec {
            s.push_str(&format!("{} {}\n", n, self.coeff(n)));
        }
        s
    }
}

impl fmt::Display for QExpansion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (n, a) in &self.coeffs {
            let (sign, mag) = if a.is_negative() { ("-", -a.clone()) } else { ("+", a.clone()) };
            if first {
                if sign == "-" {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            if !mag.is_one() {
                write!(f, "{mag}*")?;
            }
            write!(f, "q^{n}")?;
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, " + O(q^{})", self.prec + 1)
    }
}

#[derive(Serialize, Deserialize)]
struct QExpansionRepr {
    prec: u64,
    coeffs: BTreeMap<u64, String>,
}

impl Serialize for QExpansion {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        QExpansionRepr { prec: self.prec, coeffs: self.coeffs.iter().map(|(n, a)| (*n, a.to_string())).collect() }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for QExpansion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = QExpansionRepr::deserialize(d)?;
        let mut coeffs = BTreeMap::new();
        for (n, a) in repr.coeffs {
            let v: Rat = a.parse().map_err(|_| D::Error::custom(format!("bad rational {a:?}")))?;
            coeffs.insert(n, v);
        }
        Ok(QExpansion::from_coeffs(repr.prec, coeffs))
    }
}

/// Trace-zero part of `Z + 2O`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TernaryLattice {
    pub basis: Vec<Quaternion>,
    /// `gram[i][j] = trd(x_i conj(x_j)) / 2`, so `N(sum c_i x_i) = c^T gram c`.
    pub gram: RatMatrix,
}

impl TernaryLattice {
    pub fn from_basis(basis: Vec<Quaternion>) -> Self {
        let half = Rat::new(BigInt::one(), BigInt::from(2));
        let gram = basis.iter().map(|x| basis.iter().map(|y| x.pair(y) * &half).collect()).collect();
        TernaryLattice { basis, gram }
    }

    pub fn gram_determinant(&self) -> Rat {
        linalg::det(&self.gram)
    }
}

pub fn trace_zero_lattice(o: &Order) -> Result<TernaryLattice, LatticeError> {
    let pres = o.lattice.presentation();
    let two = Rat::from_integer(BigInt::from(2));
    let mut gens: Vec<Quaternion> = o.lattice.basis().iter().map(|b| b.scale(&two)).collect();
    gens.push(Quaternion::new(std::array::from_fn(|t| if t == 0 { Rat::one() } else { Rat::zero() }), pres));
    let l = Lattice4::from_generators(pres, &gens)?;
    let basis = l.basis();
    let rows: Vec<Vec<BigInt>> = basis
        .iter()
        .enumerate()
        .map(|(k, b)| {
            let mut r = vec![b.trace().to_integer()];
            r.extend((0..4).map(|t| BigInt::from(u8::from(t == k))));
            r
        })
        .collect();
    let h = hnf(rows, 5);
    let kernel: Vec<Quaternion> = h
        .iter()
        .filter(|r| r[0].is_zero())
        .map(|r| {
            let coords = std::array::from_fn(|t| {
                basis.iter().zip(&r[1..]).fold(Rat::zero(), |acc, (b, c)| acc + &b.coords[t] * Rat::from_integer(c.clone()))
            });
            Quaternion::new(coords, pres)
        })
        .collect();
    debug_assert_eq!(kernel.len(), 3);
    Ok(TernaryLattice::from_basis(kernel))
}

/// `a_n = #{x in R : N(x) = n} / 2` for `1 <= n <= prec`.
pub fn ternary_theta(r: &TernaryLattice, prec: u64) -> Result<QExpansion, ThetaError> {
    if prec == 0 {
        return Ok(QExpansion::zero(0));
    }
    let counts = lattice::norm_counts(&r.basis, &Rat::one(), prec)?;
    let mut out = QExpansion::zero(prec);
    for (n, &c) in counts.iter().enumerate().skip(1) {
        if c % 2 != 0 {
            return Err(ThetaError::OddCount { n: n as u64, count: c });
        }
        out.set(n as u64, Rat::from_integer(BigInt::from(c / 2)));
    }
    Ok(out)
}

/// Theta series of every class, computed in parallel.
pub fn class_thetas(classes: &IdealClassSet, prec: u64) -> Result<Vec<QExpansion>, ThetaError> {
    classes
        .right_orders
        .par_iter()
        .map(|o| ternary_theta(&trace_zero_lattice(o)?, prec))
        .collect()
}

/// `g = sum_i v_i g([I_i])`, checked against the Kohnen condition.
pub fn kohnen_form(vector: &[Rat], thetas: &[QExpansion]) -> Result<QExpansion, ThetaError> {
    if vector.len() != thetas.len() {
        return Err(ThetaError::LengthMismatch { expected: thetas.len(), found: vector.len() });
    }
    let prec = thetas.iter().map(|t| t.prec).min().unwrap_or(0);
    let mut g = QExpansion::zero(prec);
    for (v, t) in vector.iter().zip(thetas) {
        if !v.is_zero() {
            g = g.add_scaled(t, v);
        }
    }
    if let Some(n) = g.kohnen_violation() {
        return Err(ThetaError::KohnenViolation(n));
    }
    Ok(g)
}

/// Convenience wrapper taking eigen-data.
pub fn kohnen_form_for(e: &EigenformData, thetas: &[QExpansion]) -> Result<QExpansion, ThetaError> {
    kohnen_form(&e.vector_rational(), thetas)
}

/// Checks `a(n p^2) = a(n) (b_p - (-n/p)) - p a(n / p^2)` for every
/// `n <= prec / p^2`.
pub fn hecke_check(g: &QExpansion, b_p: i64, p: u64) -> Result<bool, ThetaError> {
    let p2 = p * p;
    if g.prec < p2 {
        return Err(ThetaError::InsufficientPrecision { prec: g.prec, needed: p2 });
    }
    let pr = Rat::from_integer(BigInt::from(p));
    for n in 1..=g.prec / p2 {
        let chi = kronecker(-(n as i64), p as i64);
        let mut expected = g.coeff(n) * Rat::from_integer(BigInt::from(b_p - chi as i64));
        if n % p2 == 0 {
            expected -= &pr * g.coeff(n / p2);
        }
        if g.coeff(n * p2) != expected {
            return Ok(false);
        }
    }
    Ok(true)
}

/// First nonzero coefficient's sign, or zero.
pub fn leading_sign(g: &QExpansion) -> i32 {
    match g.nonzero().next() {
        Some((_, a)) if a.is_negative() => -1,
        Some(_) => 1,
        None => 0,
    }
}

pub fn to_i64_coeffs(g: &QExpansion) -> Option<Vec<(u64, i64)>> {
    g.nonzero().map(|(n, a)| if a.is_integer() { a.to_integer().to_i64().map(|v| (n, v)) } else { None }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quat::QuaternionAlgebra;

    fn r(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn json_round_trip_and_order() {
        let mut g = QExpansion::from_ints(20, &[(3, 1), (12, -4), (8, 2)]);
        g.set(5, r(-2, 3));
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"prec":20,"coeffs":{"3":"1","5":"-2/3","8":"2","12":"-4"}}"#);
        let back: QExpansion = serde_json::from_str(&s).unwrap();
        assert_eq!(back, g);
        assert!(g.to_text().starts_with("1 0\n2 0\n3 1\n"));
        assert_eq!(format!("{}", QExpansion::from_ints(9, &[(3, 1), (8, -2)])), "q^3 - 2*q^8 + O(q^10)");
    }

    #[test]
    fn empty_precision_gives_zero_series() {
        let alg = QuaternionAlgebra::new(2, 5).unwrap();
        let r1 = TernaryLattice::from_basis(vec![alg.from_ints([0, 1, 0, 0]), alg.from_ints([0, 0, 1, 0]), alg.from_ints([0, 0, 0, 1])]);
        assert!(ternary_theta(&r1, 0).unwrap().is_zero());
    }

    #[test]
    fn hecke_check_detects_tampering() {
        // a(n p^2) = a(n)(b_p - (-n/p)) with b_7 = 0 and n = 3: a(147) = -1.
        let good = QExpansion::from_ints(150, &[(3, 1), (147, -1)]);
        assert!(hecke_check(&good, 0, 7).unwrap());
        let bad = QExpansion::from_ints(150, &[(3, 1), (147, 1)]);
        assert!(!hecke_check(&bad, 0, 7).unwrap());
        assert!(hecke_check(&QExpansion::zero(10), 0, 7).is_err());
    }

    #[test]
    fn kohnen_guard() {
        let t1 = QExpansion::from_ints(10, &[(3, 1), (5, 1)]);
        let t2 = QExpansion::from_ints(10, &[(5, 1), (8, 1)]);
        let g = kohnen_form(&[Rat::one(), -Rat::one()], &[t1.clone(), t2.clone()]).unwrap();
        assert_eq!(g, QExpansion::from_ints(10, &[(3, 1), (8, -1)]));
        assert_eq!(kohnen_form(&[Rat::one(), Rat::one()], &[t1, t2]), Err(ThetaError::KohnenViolation(5)));
        let z = kohnen_form(&[Rat::zero(), Rat::zero()], &[QExpansion::zero(5), QExpansion::zero(5)]).unwrap();
        assert!(z.is_zero());
    }
}
