//! Rank-4 lattices in a definite quaternion algebra: orders, ideals and
//! vector enumeration by reduced norm.

pub mod enumerate;
pub mod hnf;

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, Rat};
use crate::numth::{prime_divisors, valuation};
use crate::quat::{Presentation, Quaternion, QuaternionAlgebra};

pub use enumerate::{count_values, for_each_short_vector, EnumError, IntGram};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("generators do not span a rank-4 lattice")]
    NotFullRank,
    #[error("lattice elements belong to different algebras")]
    MixedAlgebras,
    #[error("norm form is not integral after scaling")]
    NotIntegral,
    #[error("maximal order saturation failed at p = {0}")]
    MaximalOrderNotFound(u64),
    #[error("level {level} is not compatible with the ramification {ramified:?}")]
    IncompatibleLevel { level: u64, ramified: Vec<u64> },
    #[error("Eichler order has reduced discriminant {found}, expected {expected}")]
    WrongLevel { expected: u64, found: String },
    #[error("lattice is not an order")]
    NotAnOrder,
    #[error("integer overflow while building a Gram matrix")]
    Overflow,
    #[error(transparent)]
    Enumeration(#[from] EnumError),
}

/// Rational lattice stored as `matrix / denominator`, with `matrix` an
/// integer row Hermite normal form and `gcd(denominator, content) = 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Lattice4 {
    den: BigInt,
    rows: Vec<Vec<BigInt>>,
    pres: Presentation,
}

impl fmt::Debug for Lattice4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Lattice4(1/{}; {:?})", self.den, self.rows)
    }
}

/// Serialized lattice: common denominator and integer HNF rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeRecord {
    pub denominator: i64,
    pub matrix: Vec<Vec<i64>>,
}

fn rat_int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Non-negative generator of the fractional ideal `aZ + bZ`.
pub fn rat_gcd(a: &Rat, b: &Rat) -> Rat {
    if a.is_zero() {
        return b.abs();
    }
    if b.is_zero() {
        return a.abs();
    }
    let num = (a.numer() * b.denom()).gcd(&(b.numer() * a.denom()));
    Rat::new(num, a.denom() * b.denom())
}

impl Lattice4 {
    pub fn from_generators(pres: Presentation, gens: &[Quaternion]) -> Result<Self, LatticeError> {
        if gens.iter().any(|g| g.presentation() != pres) {
            return Err(LatticeError::MixedAlgebras);
        }
        let den = gens
            .iter()
            .flat_map(|g| g.coords.iter())
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let rows: Vec<Vec<BigInt>> = gens
            .iter()
            .map(|g| g.coords.iter().map(|c| (c * Rat::from_integer(den.clone())).to_integer()).collect())
            .collect();
        Self::from_integer_rows(pres, den, rows)
    }

    fn from_integer_rows(pres: Presentation, den: BigInt, rows: Vec<Vec<BigInt>>) -> Result<Self, LatticeError> {
        let mut h = hnf::hnf(rows, 4);
        if h.len() != 4 {
            return Err(LatticeError::NotFullRank);
        }
        let content = h.iter().flatten().fold(den.clone(), |acc, x| acc.gcd(x));
        let mut den = den;
        if !content.is_one() {
            den /= &content;
            for x in h.iter_mut().flatten() {
                *x /= &content;
            }
        }
        Ok(Lattice4 { den, rows: h, pres })
    }

    /// The lattice `Z<1, i, j, k>`.
    pub fn standard(alg: &QuaternionAlgebra) -> Self {
        let gens: Vec<Quaternion> = (0..4)
            .map(|t| {
                let mut c = [0i64; 4];
                c[t] = 1;
                alg.from_ints(c)
            })
            .collect();
        Self::from_generators(alg.presentation(), &gens).expect("standard basis has full rank")
    }

    pub fn from_record(pres: Presentation, rec: &LatticeRecord) -> Result<Self, LatticeError> {
        let rows = rec.matrix.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
        Self::from_integer_rows(pres, BigInt::from(rec.denominator), rows)
    }

    pub fn to_record(&self) -> Result<LatticeRecord, LatticeError> {
        let conv = |x: &BigInt| x.to_i64().ok_or(LatticeError::Overflow);
        Ok(LatticeRecord {
            denominator: conv(&self.den)?,
            matrix: self.rows.iter().map(|r| r.iter().map(conv).collect()).collect::<Result<_, _>>()?,
        })
    }

    pub fn presentation(&self) -> Presentation {
        self.pres
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn matrix(&self) -> &[Vec<BigInt>] {
        &self.rows
    }

    pub fn basis(&self) -> Vec<Quaternion> {
        self.rows
            .iter()
            .map(|r| {
                let coords = std::array::from_fn(|t| Rat::new(r[t].clone(), self.den.clone()));
                Quaternion::new(coords, self.pres)
            })
            .collect()
    }

    fn basis_matrix(&self) -> linalg::RatMatrix {
        self.basis().into_iter().map(|q| q.coords.to_vec()).collect()
    }

    pub fn contains(&self, x: &Quaternion) -> bool {
        if x.presentation() != self.pres {
            return false;
        }
        let scaled: Vec<Rat> = x.coords.iter().map(|c| c * Rat::from_integer(self.den.clone())).collect();
        if scaled.iter().any(|c| !c.is_integer()) {
            return false;
        }
        let mut y: Vec<BigInt> = scaled.into_iter().map(|c| c.to_integer()).collect();
        for (i, row) in self.rows.iter().enumerate() {
            let (q, r) = y[i].div_rem(&row[i]);
            if !r.is_zero() {
                return false;
            }
            for (yt, rt) in y.iter_mut().zip(row) {
                *yt -= &q * rt;
            }
        }
        true
    }

    pub fn contains_lattice(&self, other: &Lattice4) -> bool {
        other.basis().iter().all(|b| self.contains(b))
    }

    pub fn sum(&self, other: &Lattice4) -> Result<Lattice4, LatticeError> {
        let mut gens = self.basis();
        gens.extend(other.basis());
        Self::from_generators(self.pres, &gens)
    }

    /// Dual lattice with respect to `trd(x conj(y))`.
    pub fn dual(&self) -> Lattice4 {
        let p = self.pres;
        let diag = [rat_int(2), rat_int(2 * p.a), rat_int(2 * p.b), rat_int(2 * p.a * p.b)];
        let bm: linalg::RatMatrix = self
            .basis_matrix()
            .into_iter()
            .map(|r| r.into_iter().zip(&diag).map(|(x, d)| x * d).collect())
            .collect();
        let inv = linalg::inverse(&bm).expect("nondegenerate lattice");
        let gens: Vec<Quaternion> = linalg::transpose(&inv)
            .into_iter()
            .map(|r| Quaternion::new(std::array::from_fn(|t| r[t].clone()), p))
            .collect();
        Self::from_generators(p, &gens).expect("dual has full rank")
    }

    pub fn intersection(&self, other: &Lattice4) -> Result<Lattice4, LatticeError> {
        Ok(self.dual().sum(&other.dual())?.dual())
    }

    pub fn scale(&self, s: &Rat) -> Lattice4 {
        let gens: Vec<Quaternion> = self.basis().iter().map(|b| b.scale(s)).collect();
        Self::from_generators(self.pres, &gens).expect("nonzero scaling keeps rank")
    }

    pub fn conj(&self) -> Lattice4 {
        let gens: Vec<Quaternion> = self.basis().iter().map(Quaternion::conj).collect();
        Self::from_generators(self.pres, &gens).expect("conjugation keeps rank")
    }

    /// `x L`.
    pub fn left_mul(&self, x: &Quaternion) -> Result<Lattice4, LatticeError> {
        let gens: Vec<Quaternion> =
            self.basis().iter().map(|b| x.try_mul(b).map_err(|_| LatticeError::MixedAlgebras)).collect::<Result<_, _>>()?;
        Self::from_generators(self.pres, &gens)
    }

    /// `L x`.
    pub fn right_mul(&self, x: &Quaternion) -> Result<Lattice4, LatticeError> {
        let gens: Vec<Quaternion> =
            self.basis().iter().map(|b| b.try_mul(x).map_err(|_| LatticeError::MixedAlgebras)).collect::<Result<_, _>>()?;
        Self::from_generators(self.pres, &gens)
    }

    /// Lattice spanned by all products `x y`.
    pub fn product(&self, other: &Lattice4) -> Result<Lattice4, LatticeError> {
        if self.pres != other.pres {
            return Err(LatticeError::MixedAlgebras);
        }
        let a = self.basis();
        let b = other.basis();
        let gens: Vec<Quaternion> = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
        Self::from_generators(self.pres, &gens)
    }

    /// Matrix `trd(b_i conj(b_j))`.
    pub fn pair_matrix(&self) -> linalg::RatMatrix {
        let b = self.basis();
        b.iter().map(|x| b.iter().map(|y| x.pair(y)).collect()).collect()
    }

    /// Generator of the fractional ideal spanned by `{N(x) : x in L}`.
    pub fn norm(&self) -> Rat {
        let b = self.basis();
        let mut g = Rat::zero();
        for i in 0..4 {
            g = rat_gcd(&g, &b[i].norm());
            for j in (i + 1)..4 {
                g = rat_gcd(&g, &b[i].pair(&b[j]));
            }
        }
        g
    }

    /// `sqrt |det trd(b_i conj(b_j))|`.
    pub fn reduced_discriminant(&self) -> Rat {
        let d = linalg::det(&self.pair_matrix()).abs();
        let (n, m) = (d.numer().sqrt(), d.denom().sqrt());
        debug_assert_eq!(&n * &n, *d.numer());
        debug_assert_eq!(&m * &m, *d.denom());
        Rat::new(n, m)
    }

    /// Every element has integral reduced trace and norm.
    pub fn is_integral(&self) -> bool {
        let b = self.basis();
        b.iter().all(|x| x.trace().is_integer() && x.norm().is_integer())
            && (0..4).all(|i| ((i + 1)..4).all(|j| b[i].pair(&b[j]).is_integer()))
    }

    pub fn is_order(&self) -> bool {
        let one = Quaternion::new([rat_int(1), rat_int(0), rat_int(0), rat_int(0)], self.pres);
        if !self.contains(&one) || !self.is_integral() {
            return false;
        }
        let b = self.basis();
        b.iter().all(|x| b.iter().all(|y| self.contains(&(x * y))))
    }

    /// Integer Gram matrix `G` with `c^T G c = 2 N(x) / scale`.
    pub fn int_gram(&self, scale: &Rat) -> Result<IntGram, LatticeError> {
        gram_for(&self.basis(), scale)
    }

    /// `counts[n] = #{x in L : N(x) / scale = n}` for `n <= nmax`.
    pub fn norm_counts(&self, scale: &Rat, nmax: u64) -> Result<Vec<u64>, LatticeError> {
        norm_counts(&self.basis(), scale, nmax)
    }

    /// All `x` with `N(x) / scale <= bound`, paired with that value.
    pub fn enumerate_by_norm(&self, bound: &Rat, scale: &Rat) -> Result<Vec<(Quaternion, Rat)>, LatticeError> {
        enumerate_by_norm(&self.basis(), bound, scale)
    }
}

fn to_i128(x: &Rat) -> Result<i128, LatticeError> {
    if !x.is_integer() {
        return Err(LatticeError::NotIntegral);
    }
    x.to_integer().to_i128().ok_or(LatticeError::Overflow)
}

/// Integer Gram matrix of `2 N(.) / scale` on the span of `basis`.
pub fn gram_for(basis: &[Quaternion], scale: &Rat) -> Result<IntGram, LatticeError> {
    basis
        .iter()
        .map(|x| basis.iter().map(|y| to_i128(&(x.pair(y) / scale))).collect())
        .collect()
}

/// Representation counts of `N(.) / scale` on the span of `basis`, which
/// must take integral values.
pub fn norm_counts(basis: &[Quaternion], scale: &Rat, nmax: u64) -> Result<Vec<u64>, LatticeError> {
    let g = gram_for(basis, scale)?;
    if g.iter().enumerate().any(|(i, r)| r[i] % 2 != 0) {
        return Err(LatticeError::NotIntegral);
    }
    let raw = count_values(&g, 2 * nmax as i128)?;
    Ok(raw.iter().step_by(2).copied().collect())
}

/// Every lattice vector `x` with `N(x) / scale <= bound`, listed once each.
pub fn enumerate_by_norm(
    basis: &[Quaternion],
    bound: &Rat,
    scale: &Rat,
) -> Result<Vec<(Quaternion, Rat)>, LatticeError> {
    let pair: Vec<Vec<Rat>> = basis.iter().map(|x| basis.iter().map(|y| x.pair(y) / scale).collect()).collect();
    let l = pair.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    let lr = Rat::from_integer(l.clone());
    let g: IntGram = pair.iter().map(|r| r.iter().map(|x| to_i128(&(x * &lr))).collect()).collect::<Result<_, _>>()?;
    let b2 = (bound * Rat::from_integer(BigInt::from(2)) * &lr).floor().to_integer();
    let b2 = b2.to_i128().ok_or(LatticeError::Overflow)?;
    let mut out = Vec::new();
    let pres = basis[0].presentation();
    for_each_short_vector(&g, b2, |c, v| {
        let mut coords: [Rat; 4] = std::array::from_fn(|_| Rat::zero());
        for (ci, b) in c.iter().zip(basis) {
            if *ci != 0 {
                let s = rat_int(*ci);
                for t in 0..4 {
                    coords[t] += &b.coords[t] * &s;
                }
            }
        }
        out.push((Quaternion::new(coords, pres), Rat::new(BigInt::from(v), BigInt::from(2) * &l)));
    })?;
    Ok(out)
}

/// An order together with its unit count `#{x : N(x) = 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Order {
    pub lattice: Lattice4,
    pub unit_count: u64,
}

impl Order {
    pub fn new(lattice: Lattice4) -> Result<Self, LatticeError> {
        if !lattice.is_order() {
            return Err(LatticeError::NotAnOrder);
        }
        let unit_count = unit_count(&lattice)?;
        Ok(Order { lattice, unit_count })
    }

    /// The order viewed as a (principal) ideal over itself.
    pub fn as_ideal(&self) -> Ideal {
        Ideal::new(self.lattice.clone())
    }
}

pub fn unit_count(l: &Lattice4) -> Result<u64, LatticeError> {
    Ok(l.norm_counts(&Rat::one(), 1)?[1])
}

/// A lattice together with its norm.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Ideal {
    pub lattice: Lattice4,
    pub norm: Rat,
}

impl Ideal {
    pub fn new(lattice: Lattice4) -> Self {
        let norm = lattice.norm();
        Ideal { lattice, norm }
    }
}

pub fn right_order(i: &Ideal) -> Result<Order, LatticeError> {
    Order::new(stabilizer(&i.lattice, true)?)
}

pub fn left_order(i: &Ideal) -> Result<Order, LatticeError> {
    Order::new(stabilizer(&i.lattice, false)?)
}

fn stabilizer(l: &Lattice4, right: bool) -> Result<Lattice4, LatticeError> {
    let mut acc: Option<Lattice4> = None;
    for b in l.basis() {
        let inv = b.inverse().ok_or(LatticeError::NotFullRank)?;
        let piece = if right { l.left_mul(&inv)? } else { l.right_mul(&inv)? };
        acc = Some(match acc {
            None => piece,
            Some(a) => a.intersection(&piece)?,
        });
    }
    acc.ok_or(LatticeError::NotFullRank)
}

pub fn ideal_product(i: &Ideal, j: &Ideal) -> Result<Ideal, LatticeError> {
    Ok(Ideal::new(i.lattice.product(&j.lattice)?))
}

/// `conj(I) / N(I)`.
pub fn ideal_inverse(i: &Ideal) -> Ideal {
    let lattice = i.lattice.conj().scale(&i.norm.recip());
    Ideal { lattice, norm: i.norm.recip() }
}

/// Iterates `c` over `[0, p)^4 \ {0}` in lexicographic order.
fn residue_vectors(p: u64) -> impl Iterator<Item = [u64; 4]> {
    let total = p.pow(4);
    (1..total).map(move |mut m| {
        let mut c = [0u64; 4];
        for t in (0..4).rev() {
            c[t] = m % p;
            m /= p;
        }
        c
    })
}

fn combination(basis: &[Quaternion], c: &[u64; 4], den: u64) -> Quaternion {
    let d = Rat::from_integer(BigInt::from(den)).recip();
    let coords = std::array::from_fn(|t| {
        basis.iter().zip(c).fold(Rat::zero(), |acc, (b, &ci)| acc + &b.coords[t] * rat_int(ci as i64)) * &d
    });
    Quaternion::new(coords, basis[0].presentation())
}

/// Smallest ring containing `o` and `x`, or `None` once a non-integral
/// element appears.
fn ring_closure(o: &Lattice4, x: &Quaternion) -> Option<Lattice4> {
    let mut gens = o.basis();
    gens.push(x.clone());
    let mut l = Lattice4::from_generators(o.presentation(), &gens).ok()?;
    loop {
        if !l.is_integral() {
            return None;
        }
        let next = l.sum(&l.product(&l).ok()?).ok()?;
        if next == l {
            return Some(l);
        }
        l = next;
    }
}

fn disc_integer(l: &Lattice4) -> u64 {
    l.reduced_discriminant().to_integer().to_u64().expect("discriminant fits in u64")
}

/// A maximal order, reached from `Z<1,i,j,k>` by saturating one prime at a time.
pub fn maximal_order(alg: &QuaternionAlgebra) -> Result<Lattice4, LatticeError> {
    let d = alg.discriminant();
    let mut o = Lattice4::standard(alg);
    loop {
        let disc = disc_integer(&o);
        let mut primes = prime_divisors(disc);
        primes.sort_unstable();
        let Some(p) = primes.into_iter().find(|&p| valuation(disc as i128, p) > valuation(d as i128, p)) else {
            return Ok(o);
        };
        let basis = o.basis();
        let next = residue_vectors(p).find_map(|c| {
            let x = combination(&basis, &c, p);
            if !x.is_integral() {
                return None;
            }
            ring_closure(&o, &x)
        });
        o = next.ok_or(LatticeError::MaximalOrderNotFound(p))?;
    }
}

/// An Eichler order of level `level`: maximal at the ramified primes and of
/// index `p` in a maximal order at each other `p | level`.
pub fn eichler_order(alg: &QuaternionAlgebra, level: u64) -> Result<Order, LatticeError> {
    let incompatible = || LatticeError::IncompatibleLevel { level, ramified: alg.ramified.clone() };
    if level % 2 == 0 || !crate::numth::is_squarefree(level) || alg.ramified.iter().any(|q| level % q != 0) {
        return Err(incompatible());
    }
    let o = maximal_order(alg)?;
    let basis = o.basis();
    let mut e = o.clone();
    let mut primes = prime_divisors(level);
    primes.sort_unstable();
    for p in primes.into_iter().filter(|p| !alg.ramified.contains(p)) {
        let pr = rat_int(p as i64);
        let alpha = residue_vectors(p)
            .map(|c| combination(&basis, &c, 1))
            .find(|x| (x.norm() / &pr).is_integer())
            .ok_or(LatticeError::MaximalOrderNotFound(p))?;
        let mut gens: Vec<Quaternion> = basis.iter().map(|b| b.scale(&pr)).collect();
        gens.extend(basis.iter().map(|b| b * &alpha));
        let ideal = Ideal::new(Lattice4::from_generators(alg.presentation(), &gens)?);
        let other = stabilizer(&ideal.lattice, true)?;
        e = e.intersection(&other)?;
    }
    let found = e.reduced_discriminant();
    if found != rat_int(level as i64) {
        return Err(LatticeError::WrongLevel { expected: level, found: found.to_string() });
    }
    Order::new(e)
}
