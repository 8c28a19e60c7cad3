//! Left ideal classes of an Eichler order, Brandt matrices, the height
//! pairing and rational simultaneous eigenspaces of the Hecke action.
//!
//! Classes act on row vectors: `t_n [I_i] = sum_j B(n)_ij [I_j]`, so an
//! eigenvector `v` satisfies `v B(n) = b_n v`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{self, Ideal, Lattice4, LatticeError, LatticeRecord, Order};
use crate::linalg::{self, Rat, RatMatrix};
use crate::numth::{dedekind_psi_squarefree, euler_phi_squarefree, is_prime, prime_divisors};
use crate::quat::{Presentation, QuaternionAlgebra};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BrandtError {
    #[error("class enumeration reached mass {found}, expected {expected}")]
    MassMismatch { expected: String, found: String },
    #[error("Brandt matrix B({n}) requested beyond the computed bound {bound}")]
    BeyondBound { n: u64, bound: u64 },
    #[error("vector length {found} does not match class number {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("theta count {count} not divisible by unit count {units}")]
    NonIntegralEntry { count: u64, units: u64 },
    #[error("cache record does not match the algebra or level")]
    BadRecord,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Representatives of the left ideal classes of an Eichler order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdealClassSet {
    pub level: u64,
    pub order: Order,
    pub reps: Vec<Ideal>,
    pub right_orders: Vec<Order>,
    pub unit_counts: Vec<u64>,
}

/// `phi(D) psi(N / D) / 12`.
pub fn expected_mass(level: u64, disc: u64) -> Rat {
    let phi = euler_phi_squarefree(disc);
    let psi = dedekind_psi_squarefree(level / disc);
    Rat::new(BigInt::from(phi * psi), BigInt::from(12))
}

pub fn class_mass(unit_counts: &[u64]) -> Rat {
    unit_counts.iter().map(|&e| Rat::new(BigInt::from(2), BigInt::from(e))).sum()
}

/// Lattice `conj(J) I / N(J)` and its norm `N(I) / N(J)`.
fn connecting_lattice(i: &Ideal, j: &Ideal) -> Result<(Lattice4, Rat), LatticeError> {
    let l = j.lattice.conj().product(&i.lattice)?.scale(&j.norm.recip());
    Ok((l, &i.norm / &j.norm))
}

/// `I ~ J` iff `J^{-1} I` has an element whose norm equals the ideal norm.
pub fn equivalent(i: &Ideal, j: &Ideal) -> Result<bool, LatticeError> {
    let (l, n) = connecting_lattice(i, j)?;
    Ok(l.norm_counts(&n, 1)?[1] > 0)
}

fn smallest_prime_not_dividing(n: u64) -> u64 {
    (2..).find(|&p| is_prime(p) && n % p != 0).expect("primes are unbounded")
}

/// Left `O`-ideals `pI + O beta` of norm `p N(I)`, in a fixed order.
fn neighbors(o: &Order, i: &Ideal, p: u64) -> Result<Vec<Ideal>, LatticeError> {
    let basis = i.lattice.basis();
    let pr = Rat::from_integer(BigInt::from(p));
    let target = &i.norm * &pr;
    let ob = o.lattice.basis();
    let mut out: Vec<Ideal> = Vec::new();
    let total = p.pow(4);
    for mut m in 1..total {
        let mut c = [0i64; 4];
        for t in (0..4).rev() {
            c[t] = (m % p) as i64;
            m /= p;
        }
        let beta = basis
            .iter()
            .zip(&c)
            .filter(|(_, &ci)| ci != 0)
            .fold(None, |acc: Option<crate::quat::Quaternion>, (b, &ci)| {
                let term = b.scale(&Rat::from_integer(BigInt::from(ci)));
                Some(match acc {
                    None => term,
                    Some(a) => &a + &term,
                })
            })
            .expect("nonzero combination");
        if !(beta.norm() / &target).is_integer() {
            continue;
        }
        let mut gens: Vec<_> = basis.iter().map(|b| b.scale(&pr)).collect();
        gens.extend(ob.iter().map(|x| x * &beta));
        let lat = Lattice4::from_generators(o.lattice.presentation(), &gens)?;
        let j = Ideal::new(lat);
        if j.norm == target && !out.iter().any(|k| k.lattice == j.lattice) {
            out.push(j);
        }
    }
    Ok(out)
}

/// Breadth-first neighbor search from the principal class until the mass
/// formula is saturated.
pub fn ideal_classes(alg: &QuaternionAlgebra, order: &Order, level: u64) -> Result<IdealClassSet, BrandtError> {
    let target = expected_mass(level, alg.discriminant());
    let p = smallest_prime_not_dividing(level);
    let start = order.as_ideal();
    let mut reps = vec![start];
    let mut right_orders = vec![order.clone()];
    let mut units = vec![order.unit_count];
    let mut mass = class_mass(&units);
    let mut head = 0;
    while mass < target && head < reps.len() {
        let current = reps[head].clone();
        head += 1;
        for j in neighbors(order, &current, p)? {
            let ro = lattice::right_order(&j)?;
            let mut known = false;
            for (k, rep) in reps.iter().enumerate() {
                if units[k] == ro.unit_count && equivalent(&j, rep)? {
                    known = true;
                    break;
                }
            }
            if !known {
                units.push(ro.unit_count);
                right_orders.push(ro);
                reps.push(j);
                mass = class_mass(&units);
                if mass >= target {
                    break;
                }
            }
        }
    }
    if mass != target {
        return Err(BrandtError::MassMismatch { expected: target.to_string(), found: mass.to_string() });
    }
    Ok(IdealClassSet { level, order: order.clone(), reps, right_orders, unit_counts: units })
}

impl IdealClassSet {
    pub fn len(&self) -> usize {
        self.reps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reps.is_empty()
    }

    pub fn mass(&self) -> Rat {
        class_mass(&self.unit_counts)
    }

    /// The same classes listed in the order `perm[0], perm[1], ...`.
    pub fn permuted(&self, perm: &[usize]) -> IdealClassSet {
        IdealClassSet {
            level: self.level,
            order: self.order.clone(),
            reps: perm.iter().map(|&k| self.reps[k].clone()).collect(),
            right_orders: perm.iter().map(|&k| self.right_orders[k].clone()).collect(),
            unit_counts: perm.iter().map(|&k| self.unit_counts[k]).collect(),
        }
    }

    /// `(v, w) = sum_i v_i w_i e_i / 2`.
    pub fn height_pairing(&self, v: &[Rat], w: &[Rat]) -> Result<Rat, BrandtError> {
        for x in [v.len(), w.len()] {
            if x != self.len() {
                return Err(BrandtError::LengthMismatch { expected: self.len(), found: x });
            }
        }
        Ok(v.iter()
            .zip(w)
            .zip(&self.unit_counts)
            .map(|((a, b), &e)| a * b * Rat::new(BigInt::from(e), BigInt::from(2)))
            .sum())
    }
}

/// Theta counts between every pair of classes, from which all `B(n)` with
/// `n <= bound` are read off.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BrandtModule {
    pub classes: IdealClassSet,
    pub bound: u64,
    /// `counts[i][j][n] = #{x in I_j^{-1} I_i : N(x) / N(I_j^{-1} I_i) = n}`.
    counts: Vec<Vec<Vec<u64>>>,
}

/// `B(n)` as an integer matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrandtMatrix {
    pub n: u64,
    pub entries: Vec<Vec<i64>>,
}

impl BrandtMatrix {
    pub fn to_rational(&self) -> RatMatrix {
        self.entries.iter().map(|r| r.iter().map(|&x| Rat::from_integer(BigInt::from(x))).collect()).collect()
    }
}

impl BrandtModule {
    pub fn new(classes: IdealClassSet, bound: u64) -> Result<Self, BrandtError> {
        let h = classes.len();
        let pairs: Vec<(usize, usize)> = (0..h).flat_map(|i| (i..h).map(move |j| (i, j))).collect();
        let computed: Vec<Vec<u64>> = pairs
            .par_iter()
            .map(|&(i, j)| {
                let (l, n) = connecting_lattice(&classes.reps[i], &classes.reps[j])?;
                l.norm_counts(&n, bound)
            })
            .collect::<Result<_, LatticeError>>()?;
        let mut counts = vec![vec![Vec::new(); h]; h];
        for (&(i, j), c) in pairs.iter().zip(computed) {
            counts[j][i] = c.clone();
            counts[i][j] = c;
        }
        let module = BrandtModule { classes, bound, counts };
        for n in 1..=bound {
            module.matrix(n)?;
        }
        Ok(module)
    }

    pub fn matrix(&self, n: u64) -> Result<BrandtMatrix, BrandtError> {
        if n > self.bound || n == 0 {
            return Err(BrandtError::BeyondBound { n, bound: self.bound });
        }
        let e = &self.classes.unit_counts;
        let h = e.len();
        let mut entries = vec![vec![0i64; h]; h];
        for i in 0..h {
            for j in 0..h {
                let c = self.counts[i][j][n as usize];
                if c % e[j] != 0 {
                    return Err(BrandtError::NonIntegralEntry { count: c, units: e[j] });
                }
                entries[i][j] = (c / e[j]) as i64;
            }
        }
        Ok(BrandtMatrix { n, entries })
    }

    /// The same module restricted to `n <= bound`.
    pub fn truncated(&self, bound: u64) -> Result<Self, BrandtError> {
        if bound > self.bound {
            return Err(BrandtError::BeyondBound { n: bound, bound: self.bound });
        }
        let cut = (bound + 1) as usize;
        let counts = self.counts.iter().map(|r| r.iter().map(|c| c[..cut].to_vec()).collect()).collect();
        Ok(BrandtModule { classes: self.classes.clone(), bound, counts })
    }

    /// Theta series coefficients `theta_ij(n)` for `n <= bound`.
    pub fn theta_counts(&self, i: usize, j: usize) -> &[u64] {
        &self.counts[i][j]
    }

    pub fn to_record(&self, alg: &QuaternionAlgebra) -> Result<BrandtRecord, BrandtError> {
        Ok(BrandtRecord {
            algebra: alg.clone(),
            level: self.classes.level,
            order: self.classes.order.lattice.to_record()?,
            classes: self.classes.reps.iter().map(|r| r.lattice.to_record()).collect::<Result<_, _>>()?,
            unit_counts: self.classes.unit_counts.clone(),
            bound: self.bound,
            counts: self.counts.clone(),
        })
    }

    /// Rebuilds a module from a cache record, re-deriving right orders.
    pub fn from_record(rec: &BrandtRecord, alg: &QuaternionAlgebra, level: u64) -> Result<Self, BrandtError> {
        if rec.algebra != *alg || rec.level != level {
            return Err(BrandtError::BadRecord);
        }
        let pres: Presentation = alg.presentation();
        let order = Order::new(Lattice4::from_record(pres, &rec.order)?)?;
        let reps: Vec<Ideal> = rec
            .classes
            .iter()
            .map(|r| Lattice4::from_record(pres, r).map(Ideal::new))
            .collect::<Result<_, _>>()?;
        let right_orders: Vec<Order> = reps.iter().map(lattice::right_order).collect::<Result<_, _>>()?;
        let unit_counts: Vec<u64> = right_orders.iter().map(|o| o.unit_count).collect();
        let h = reps.len();
        if unit_counts != rec.unit_counts
            || rec.counts.len() != h
            || rec.counts.iter().flatten().any(|c| c.len() as u64 != rec.bound + 1)
        {
            return Err(BrandtError::BadRecord);
        }
        let classes = IdealClassSet { level, order, reps, right_orders, unit_counts };
        Ok(BrandtModule { classes, bound: rec.bound, counts: rec.counts.clone() })
    }
}

/// Cache document for one algebra presentation and level.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BrandtRecord {
    pub algebra: QuaternionAlgebra,
    pub level: u64,
    pub order: LatticeRecord,
    pub classes: Vec<LatticeRecord>,
    pub unit_counts: Vec<u64>,
    pub bound: u64,
    pub counts: Vec<Vec<Vec<u64>>>,
}

/// A simultaneous eigenspace piece of the Brandt module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Eigenspace {
    /// Row basis in class coordinates.
    pub basis: RatMatrix,
    pub eigenvalues: BTreeMap<u64, i64>,
    /// False once some operator has no rational eigenvalue on the piece.
    pub rational: bool,
}

impl Eigenspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_eisenstein(&self) -> bool {
        self.basis.iter().any(|v| !v.iter().sum::<Rat>().is_zero())
    }
}

fn restricted(basis: &RatMatrix, b: &RatMatrix) -> RatMatrix {
    linalg::mat_mul(basis, b)
        .iter()
        .map(|row| linalg::coordinates_in(basis, row).expect("piece is invariant"))
        .collect()
}

fn shifted(m: &RatMatrix, lambda: i64) -> RatMatrix {
    let l = Rat::from_integer(BigInt::from(lambda));
    m.iter()
        .enumerate()
        .map(|(i, r)| r.iter().enumerate().map(|(j, x)| if i == j { x - &l } else { x.clone() }).collect())
        .collect()
}

/// Splits the whole module into rational simultaneous eigenspaces for the
/// given operators, plus pieces with no rational eigenvalue.
pub fn decompose(h: usize, ops: &[(u64, RatMatrix)]) -> Vec<Eigenspace> {
    let mut pieces =
        vec![Eigenspace { basis: linalg::identity(h), eigenvalues: BTreeMap::new(), rational: true }];
    for (p, b) in ops {
        let bound = *p as i64 + 1;
        let mut next = Vec::new();
        for piece in pieces {
            if !piece.rational || piece.dim() == 0 {
                next.push(piece);
                continue;
            }
            let m = restricted(&piece.basis, b);
            let d = m.len();
            let mut rest = linalg::identity(d);
            for lambda in -bound..=bound {
                let s = shifted(&m, lambda);
                let k = linalg::left_nullspace(&s);
                if k.is_empty() {
                    continue;
                }
                let mut ev = piece.eigenvalues.clone();
                ev.insert(*p, lambda);
                next.push(Eigenspace { basis: linalg::mat_mul(&k, &piece.basis), eigenvalues: ev, rational: true });
                rest = linalg::mat_mul(&rest, &s);
            }
            let image = linalg::row_space(&rest);
            if !image.is_empty() {
                next.push(Eigenspace {
                    basis: linalg::mat_mul(&image, &piece.basis),
                    eigenvalues: piece.eigenvalues.clone(),
                    rational: false,
                });
            }
        }
        pieces = next;
    }
    pieces
}

/// Eigen-data of a rational newform in the Brandt module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenformData {
    pub vector: Vec<BigInt>,
    pub eigenvalues: BTreeMap<u64, i64>,
    pub al_signs: BTreeMap<u64, i32>,
}

impl EigenformData {
    pub fn vector_rational(&self) -> Vec<Rat> {
        self.vector.iter().map(|x| Rat::from_integer(x.clone())).collect()
    }

    pub fn negated(&self) -> EigenformData {
        EigenformData { vector: self.vector.iter().map(|x| -x).collect(), ..self.clone() }
    }
}

/// Eigenvalue of `B` on the row eigenvector `v`.
pub fn eigenvalue_on(v: &[Rat], b: &RatMatrix) -> Option<i64> {
    let w = linalg::vec_mat(v, b);
    let k = v.iter().position(|x| !x.is_zero())?;
    let l = &w[k] / &v[k];
    if w.iter().zip(v).any(|(a, x)| a != &(&l * x)) || !l.is_integer() {
        return None;
    }
    l.to_integer().to_i64()
}

/// Outcome of scanning one module for newform candidates.
#[derive(Debug, Clone)]
pub struct CandidateScan {
    pub candidates: Vec<EigenformData>,
    /// Some cuspidal part carries irrational eigenvalues.
    pub irrational: bool,
}

/// Operator primes: every prime up to `max(29, ...)` and every `p | N`.
pub fn operator_primes(level: u64, bound: u64) -> Vec<u64> {
    let mut ps: Vec<u64> = (2..=bound.min(29)).filter(|&p| is_prime(p)).collect();
    for p in prime_divisors(level) {
        if !ps.contains(&p) {
            ps.push(p);
        }
    }
    ps.sort_unstable();
    ps
}

/// One-dimensional rational cuspidal eigenspaces whose signs at `p | N`
/// match the ramification (`b_p = +1` exactly for ramified `p`).
pub fn candidates(module: &BrandtModule, ramified: &[u64]) -> Result<CandidateScan, BrandtError> {
    let level = module.classes.level;
    let primes = operator_primes(level, module.bound);
    let ops: Vec<(u64, RatMatrix)> =
        primes.iter().map(|&p| Ok((p, module.matrix(p)?.to_rational()))).collect::<Result<_, BrandtError>>()?;
    let pieces = decompose(module.classes.len(), &ops);
    let mut irrational = false;
    let mut out = Vec::new();
    for piece in pieces {
        if piece.dim() == 0 || piece.is_eisenstein() {
            continue;
        }
        if !piece.rational {
            irrational = true;
            continue;
        }
        if piece.dim() != 1 {
            continue;
        }
        let bad = prime_divisors(level);
        let consistent = bad.iter().all(|p| {
            let b = piece.eigenvalues[p];
            (b == 1) == ramified.contains(p) && b.abs() == 1
        });
        if !consistent {
            continue;
        }
        let vector = linalg::primitive_integer_vector(&piece.basis[0]);
        let mut eigenvalues = piece.eigenvalues.clone();
        let v: Vec<Rat> = vector.iter().map(|x| Rat::from_integer(x.clone())).collect();
        for p in (2..=module.bound).filter(|&p| is_prime(p)) {
            if let std::collections::btree_map::Entry::Vacant(e) = eigenvalues.entry(p) {
                if let Some(b) = eigenvalue_on(&v, &module.matrix(p)?.to_rational()) {
                    e.insert(b);
                }
            }
        }
        let al_signs = bad.iter().map(|&p| (p, -(eigenvalues[&p] as i32))).collect();
        out.push(EigenformData { vector, eigenvalues, al_signs });
    }
    Ok(CandidateScan { candidates: out, irrational })
}

/// Checks `e_j B_ij = e_i B_ji`, i.e. self-adjointness under the height pairing.
pub fn is_self_adjoint(b: &BrandtMatrix, units: &[u64]) -> bool {
    let h = units.len();
    (0..h).all(|i| (0..h).all(|j| units[j] as i64 * b.entries[i][j] == units[i] as i64 * b.entries[j][i]))
}

pub fn commute(a: &BrandtMatrix, b: &BrandtMatrix) -> bool {
    let (x, y) = (a.to_rational(), b.to_rational());
    linalg::mat_mul(&x, &y) == linalg::mat_mul(&y, &x)
}

pub fn is_identity(b: &BrandtMatrix) -> bool {
    b.entries.iter().enumerate().all(|(i, r)| r.iter().enumerate().all(|(j, &x)| x == i64::from(i == j)))
}

pub fn row_sums(b: &BrandtMatrix) -> Vec<i64> {
    b.entries.iter().map(|r| r.iter().sum()).collect()
}

/// Normalizes to a primitive integer vector with positive leading entry.
pub fn normalize_vector(v: &[Rat]) -> Vec<BigInt> {
    let out = linalg::primitive_integer_vector(v);
    debug_assert!(out.iter().find(|x| !x.is_zero()).is_none_or(|x| x.is_positive()));
    out
}

pub fn one_vector(h: usize) -> Vec<Rat> {
    vec![Rat::one(); h]
}
