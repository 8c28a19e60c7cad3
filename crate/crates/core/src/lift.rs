//! Local factors at 2, at `p | N` and at `p` prime to `2N`, the products
//! `K_1`, `K_2`, `K_2'`, and the exact assembly of the second basis form `h`.
//!
//! The exact path never touches floating point: powers of the 2-adic roots
//! enter only through the integer sequence `T_s = 2^{s/2}(a^s + a'^s)`, which
//! satisfies `T_s = b_2 T_{s-1} - 2 T_{s-2}`. Complex values are diagnostics.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::brandt::EigenformData;
use crate::linalg::Rat;
use crate::numth::{
    fundamental_discriminant, hilbert2, kronecker, padic_split, prime_divisors, squarefree_split, valuation,
    NumthError,
};
use crate::theta::QExpansion;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("weight parameter k = {0} is not 3 mod 4")]
    BadWeight(u32),
    #[error("missing Hecke eigenvalue b_{0}")]
    MissingEigenvalue(u64),
    #[error("g known to q^{have}, need q^{need}")]
    PrecisionShortfall { have: u64, need: u64 },
    #[error("non-integral coefficient {value} at n = {n}")]
    NonIntegral { n: u64, value: String },
    #[error("Atkin-Lehner signs multiply to +1")]
    EvenRootNumber,
    #[error(transparent)]
    Numth(#[from] NumthError),
}

/// Every scalar that enters the local factors.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftProfile {
    pub k: u32,
    pub level: u64,
    pub b2: i64,
    /// `p | N -> (b_p, w_p)`.
    pub bad: BTreeMap<u64, (i64, i32)>,
    /// Known `b_p` for every computed prime.
    pub eigen: BTreeMap<u64, i64>,
}

impl LiftProfile {
    pub fn new(level: u64, eigen: BTreeMap<u64, i64>) -> Result<Self, LiftError> {
        let b2 = *eigen.get(&2).ok_or(LiftError::MissingEigenvalue(2))?;
        let mut bad = BTreeMap::new();
        let mut sign = 1;
        for p in prime_divisors(level) {
            let b = *eigen.get(&p).ok_or(LiftError::MissingEigenvalue(p))?;
            let w = -(b.signum() as i32);
            sign *= w;
            bad.insert(p, (b, w));
        }
        if sign != -1 {
            return Err(LiftError::EvenRootNumber);
        }
        Ok(LiftProfile { k: 3, level, b2, bad, eigen })
    }

    pub fn from_eigenform(level: u64, e: &EigenformData) -> Result<Self, LiftError> {
        Self::new(level, e.eigenvalues.clone())
    }

    pub fn b(&self, p: u64) -> Result<i64, LiftError> {
        self.eigen.get(&p).copied().ok_or(LiftError::MissingEigenvalue(p))
    }

    fn check_weight(&self) -> Result<(), LiftError> {
        if self.k % 4 != 3 {
            return Err(LiftError::BadWeight(self.k));
        }
        Ok(())
    }

    /// Roots of `x^2 - b_2 2^{1-k/2} x + 1`; the first has non-negative
    /// imaginary part, or the larger real part when both are real.
    pub fn alphas(&self) -> (Complex64, Complex64) {
        let s = self.b2 as f64 * 2f64.powf(1.0 - self.k as f64 / 2.0);
        let disc = s * s - 4.0;
        if disc < 0.0 {
            let im = (-disc).sqrt() / 2.0;
            (Complex64::new(s / 2.0, im), Complex64::new(s / 2.0, -im))
        } else {
            let r = disc.sqrt() / 2.0;
            (Complex64::new(s / 2.0 + r, 0.0), Complex64::new(s / 2.0 - r, 0.0))
        }
    }

    /// `lambda_p = b_p p^{1-k/2}`.
    pub fn lambda(&self, p: u64) -> Result<f64, LiftError> {
        Ok(self.b(p)? as f64 * (p as f64).powf(1.0 - self.k as f64 / 2.0))
    }
}

/// `T_0 = 2`, `T_1 = b_2`, `T_s = b_2 T_{s-1} - 2 T_{s-2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerSumSeq {
    pub values: Vec<i128>,
}

impl PowerSumSeq {
    pub fn new(b2: i64, len: usize) -> Self {
        let mut values: Vec<i128> = Vec::with_capacity(len.max(2));
        values.push(2);
        values.push(b2 as i128);
        while values.len() < len {
            let n = values.len();
            values.push(b2 as i128 * values[n - 1] - 2 * values[n - 2]);
        }
        values.truncate(len.max(1));
        PowerSumSeq { values }
    }

    pub fn get(&self, s: usize) -> i128 {
        self.values[s]
    }
}

/// `(2, u)_2`-style sign as a float.
fn hil2(a: i64, b: i64) -> f64 {
    hilbert2(a, b) as f64
}

fn cpow(z: Complex64, e: u32) -> Complex64 {
    z.powu(e)
}

const INV_SQRT2: f64 = std::f64::consts::FRAC_1_SQRT_2;

pub fn c2_prime(delta: Complex64, n: u64) -> Complex64 {
    let sp = padic_split(n, 2).expect("n >= 1");
    let u = sp.u as i64;
    if u % 2 != 0 && hilbert2(u, -1) == -1 {
        cpow(delta, sp.h) * (delta - INV_SQRT2 * hil2(2, u))
    } else {
        cpow(delta, sp.h)
    }
}

pub fn c2_doubleprime(delta: Complex64, n: u64) -> Complex64 {
    let v = valuation(n as i128, 2);
    if v == 0 {
        if hilbert2(n as i64, -1) == -1 {
            delta
        } else {
            Complex64::zero()
        }
    } else if v == 1 {
        Complex64::zero()
    } else {
        delta * (c2_doubleprime(delta, n / 4) + c2_prime(delta, n / 4))
    }
}

/// Local factor at `p | N`, with `delta = b_p p^{1-k/2}`. The test
/// `(-u/p) = -p^{1/2} delta` is decided from the sign of `b_p`.
pub fn cp_s(delta: Complex64, b_p: i64, p: u64, n: u64) -> Complex64 {
    let sp = padic_split(n, p).expect("n >= 1");
    if sp.u % p == 0 {
        cpow(delta, sp.h)
    } else if kronecker(-(sp.u as i64), p as i64) as i64 == -b_p.signum() {
        std::f64::consts::SQRT_2 * cpow(delta, sp.h)
    } else {
        Complex64::zero()
    }
}

/// `b_h = 2^{-h} sum_i C(h+1, 2i+1) delta^{h-2i} (delta^2 - 4)^i`.
pub fn b_h(delta: Complex64, h: u32) -> Complex64 {
    let mut sum = Complex64::zero();
    let d2 = delta * delta - 4.0;
    for i in 0..=h / 2 {
        let c = binomial(h + 1, 2 * i + 1);
        sum += c * cpow(delta, h - 2 * i) * cpow(d2, i);
    }
    sum / 2f64.powi(h as i32)
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Local factor at `p` prime to `2N`.
pub fn cp_0(delta: Complex64, p: u64, n: u64) -> Complex64 {
    let sp = padic_split(n, p).expect("n >= 1");
    if sp.u % p != 0 {
        if sp.h == 0 {
            Complex64::new(1.0, 0.0)
        } else {
            let chi = kronecker(-(sp.u as i64), p as i64) as f64;
            b_h(delta, sp.h) - b_h(delta, sp.h - 1) * chi / (p as f64).sqrt()
        }
    } else {
        b_h(delta, sp.h)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KKind {
    K1,
    K2,
    K2Prime,
}

/// `K_1`, `K_2` or `K_2'` at `n`.
pub fn local_k(profile: &LiftProfile, which: KKind, n: u64) -> Result<Complex64, LiftError> {
    profile.check_weight()?;
    let (a, a2) = profile.alphas();
    let mut v = match which {
        KKind::K1 => c2_prime(a, n),
        KKind::K2 => c2_prime(a2, n),
        KKind::K2Prime => c2_doubleprime(a, n),
    };
    for (&p, &(b, _)) in &profile.bad {
        v *= cp_s(Complex64::new(profile.lambda(p)?, 0.0), b, p, n);
    }
    for (p, e) in crate::numth::factorize(n)? {
        if p == 2 || profile.level % p == 0 || e < 2 {
            continue;
        }
        v *= cp_0(Complex64::new(profile.lambda(p)?, 0.0), p, n);
    }
    Ok(v)
}

/// True iff `(Delta_{-t} / p) = w_p` for every `p | N` with `p` not dividing `Delta_{-t}`.
pub fn kronecker_gate(profile: &LiftProfile, t: u64) -> Result<bool, LiftError> {
    let d = fundamental_discriminant(t)?;
    Ok(profile
        .bad
        .iter()
        .all(|(&p, &(_, w))| d.abs() % p == 0 || kronecker(d.delta, p as i64) == w))
}

fn rat_i(x: i128) -> Rat {
    Rat::from_integer(BigInt::from(x))
}

/// The form `h`, from the coefficients of `g`, for `1 <= n <= prec`.
pub fn assemble_h(g: &QExpansion, profile: &LiftProfile, prec: u64) -> Result<QExpansion, LiftError> {
    profile.check_weight()?;
    if g.prec < 4 * prec {
        return Err(LiftError::PrecisionShortfall { have: g.prec, need: 4 * prec });
    }
    let max_s = (64 - prec.max(1).leading_zeros()) as usize + 2;
    let t = PowerSumSeq::new(profile.b2, max_s + 2);
    let mut h = QExpansion::zero(prec);
    let mut gate_cache: BTreeMap<u64, bool> = BTreeMap::new();
    for n in 1..=prec {
        let sp = squarefree_split(n)?;
        let gate = match gate_cache.get(&sp.n_sf) {
            Some(&g) => g,
            None => {
                let g = kronecker_gate(profile, sp.n_sf)?;
                gate_cache.insert(sp.n_sf, g);
                g
            }
        };
        if !gate {
            continue;
        }
        let good = prime_divisors(sp.y).into_iter().filter(|&p| p != 2 && profile.level % p != 0).min();
        let value = if let Some(p) = good {
            // a(m p^2) = a(m)(b_p - (-m/p)) - p a(m/p^2)
            let m = n / (p * p);
            let b = profile.b(p)?;
            let chi = kronecker(-(m as i64), p as i64) as i64;
            let mut v = h.coeff(m) * rat_i((b - chi) as i128);
            if m % (p * p) == 0 {
                v -= rat_i(p as i128) * h.coeff(m / (p * p));
            }
            v
        } else {
            let s = valuation(sp.y as i128, 2) as usize;
            let mut bad_factor = 1i128;
            for (&p, &(b, _)) in &profile.bad {
                let e = valuation(sp.y as i128, p);
                bad_factor *= (b as i128).pow(e);
            }
            let nsf = sp.n_sf;
            let base = if nsf % 4 == 3 {
                let sym = hilbert2(2, nsf as i64) as i128;
                g.coeff(nsf) * rat_i(t.get(s + 1) - sym * t.get(s))
            } else {
                let h_sf = g.coeff(4 * nsf) * rat_i(2);
                h_sf * Rat::new(BigInt::from(t.get(s)), BigInt::from(2))
            };
            base * rat_i(bad_factor)
        };
        if !value.is_integer() {
            return Err(LiftError::NonIntegral { n, value: value.to_string() });
        }
        h.set(n, value);
    }
    Ok(h)
}

/// Tier-1 value at a square-free `n` (zero when the gate fails).
pub fn tier1(g: &QExpansion, profile: &LiftProfile, n: u64) -> Result<Rat, LiftError> {
    if !kronecker_gate(profile, n)? {
        return Ok(Rat::zero());
    }
    Ok(if n % 4 == 3 {
        g.coeff(n) * rat_i(profile.b2 as i128 - 2 * hilbert2(2, n as i64) as i128)
    } else {
        g.coeff(4 * n) * rat_i(2)
    })
}

/// Tier-2 value at `n_sf * y^2` with `y` built from 2 and primes of `N`.
pub fn tier2(g: &QExpansion, profile: &LiftProfile, n_sf: u64, y: u64) -> Result<Rat, LiftError> {
    if !kronecker_gate(profile, n_sf)? {
        return Ok(Rat::zero());
    }
    let s = valuation(y as i128, 2) as usize;
    let t = PowerSumSeq::new(profile.b2, s + 2);
    let mut f = 1i128;
    for (&p, &(b, _)) in &profile.bad {
        f *= (b as i128).pow(valuation(y as i128, p));
    }
    let base = if n_sf % 4 == 3 {
        g.coeff(n_sf) * rat_i(t.get(s + 1) - hilbert2(2, n_sf as i64) as i128 * t.get(s))
    } else {
        tier1(g, profile, n_sf)? * Rat::new(BigInt::from(t.get(s)), BigInt::from(2))
    };
    Ok(base * rat_i(f))
}

/// `A_F(t) / r = 2^{nu_t / 2} |Delta_{-t}|^{(2-k)/4} a_{|Delta_{-t}|}(g)`, or
/// zero when the gate fails.
pub fn global_factor(g: &QExpansion, profile: &LiftProfile, t: u64) -> Result<f64, LiftError> {
    if !kronecker_gate(profile, t)? {
        return Ok(0.0);
    }
    let d = fundamental_discriminant(t)?;
    let a = d.abs();
    if g.prec < a {
        return Err(LiftError::PrecisionShortfall { have: g.prec, need: a });
    }
    let nu = profile.bad.keys().filter(|&&p| a % p != 0).count() as i32;
    let coeff = g.coeff(a).to_f64().unwrap_or(f64::NAN);
    Ok(2f64.powf(-nu as f64 / 2.0) * (a as f64).powf((2.0 - profile.k as f64) / 4.0) * coeff)
}

/// Complex coefficient lists of `f_1`, `f_2` for `1 <= n <= prec` (index `n - 1`).
pub fn f1_f2_diagnostic(
    g: &QExpansion,
    profile: &LiftProfile,
    prec: u64,
) -> Result<(Vec<Complex64>, Vec<Complex64>), LiftError> {
    let mut f1 = Vec::with_capacity(prec as usize);
    let mut f2 = Vec::with_capacity(prec as usize);
    for n in 1..=prec {
        let sp = squarefree_split(n)?;
        let af = global_factor(g, profile, sp.n_sf)?;
        if af == 0.0 {
            f1.push(Complex64::zero());
            f2.push(Complex64::zero());
            continue;
        }
        let scale = af * (n as f64).powf((profile.k as f64 - 2.0) / 4.0);
        f1.push(local_k(profile, KKind::K1, n)? * scale);
        f2.push(local_k(profile, KKind::K2, n)? * scale);
    }
    Ok((f1, f2))
}
