//! Small dense matrices over the rationals, used for lattice duals and
//! Hecke eigenspaces. Dimensions here never exceed a few dozen.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub type Rat = BigRational;
pub type RatMatrix = Vec<Vec<Rat>>;

pub fn rat(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

pub fn zeros(rows: usize, cols: usize) -> RatMatrix {
    vec![vec![Rat::zero(); cols]; rows]
}

pub fn identity(n: usize) -> RatMatrix {
    let mut m = zeros(n, n);
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = Rat::one();
    }
    m
}

pub fn from_ints(rows: &[Vec<i64>]) -> RatMatrix {
    rows.iter().map(|r| r.iter().map(|&x| rat(x)).collect()).collect()
}

pub fn transpose(m: &[Vec<Rat>]) -> RatMatrix {
    if m.is_empty() {
        return Vec::new();
    }
    (0..m[0].len()).map(|j| m.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn mat_mul(a: &[Vec<Rat>], b: &[Vec<Rat>]) -> RatMatrix {
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| {
                    let mut s = Rat::zero();
                    for k in 0..inner {
                        if !row[k].is_zero() && !b[k][j].is_zero() {
                            s += &row[k] * &b[k][j];
                        }
                    }
                    s
                })
                .collect()
        })
        .collect()
}

pub fn vec_mat(v: &[Rat], m: &[Vec<Rat>]) -> Vec<Rat> {
    let cols = if m.is_empty() { 0 } else { m[0].len() };
    (0..cols)
        .map(|j| v.iter().zip(m).fold(Rat::zero(), |acc, (x, row)| acc + x * &row[j]))
        .collect()
}

/// In-place reduced row echelon form; returns pivot columns.
pub fn rref(m: &mut RatMatrix) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for x in m[r].iter_mut() {
            *x *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<Rat>]) -> usize {
    let mut a = m.to_vec();
    rref(&mut a).len()
}

/// Basis of the row space (rows of the reduced echelon form).
pub fn row_space(m: &[Vec<Rat>]) -> RatMatrix {
    let mut a = m.to_vec();
    let k = rref(&mut a).len();
    a.truncate(k);
    a
}

/// Basis of `{x : m x = 0}` as row vectors.
pub fn nullspace(m: &[Vec<Rat>], cols: usize) -> RatMatrix {
    let mut a = m.to_vec();
    let pivots = rref(&mut a);
    let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
    free.iter()
        .map(|&f| {
            let mut v = vec![Rat::zero(); cols];
            v[f] = Rat::one();
            for (r, &pc) in pivots.iter().enumerate() {
                v[pc] = -a[r][f].clone();
            }
            v
        })
        .collect()
}

/// Basis of `{x : x m = 0}` as row vectors.
pub fn left_nullspace(m: &[Vec<Rat>]) -> RatMatrix {
    let rows = m.len();
    nullspace(&transpose(m), rows)
}

pub fn inverse(m: &[Vec<Rat>]) -> Option<RatMatrix> {
    let n = m.len();
    let mut aug: RatMatrix = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rat::one() } else { Rat::zero() }));
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.len() < n || piv[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

pub fn det(m: &[Vec<Rat>]) -> Rat {
    let n = m.len();
    let mut a = m.to_vec();
    let mut d = Rat::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return Rat::zero();
        };
        if p != c {
            a.swap(p, c);
            d = -d;
        }
        d *= &a[c][c];
        let inv = a[c][c].recip();
        for i in (c + 1)..n {
            if !a[i][c].is_zero() {
                let f = &a[i][c] * &inv;
                for j in c..n {
                    let t = &f * &a[c][j];
                    a[i][j] -= t;
                }
            }
        }
    }
    d
}

/// Solves `x basis = target` for a row vector `x`, if `target` lies in the
/// row span of `basis` (rows assumed independent).
pub fn coordinates_in(basis: &[Vec<Rat>], target: &[Rat]) -> Option<Vec<Rat>> {
    let k = basis.len();
    let n = target.len();
    // Columns of the system are basis rows; solve B^T x = target.
    let mut aug: RatMatrix = (0..n)
        .map(|j| {
            let mut r: Vec<Rat> = basis.iter().map(|b| b[j].clone()).collect();
            r.push(target[j].clone());
            r
        })
        .collect();
    let piv = rref(&mut aug);
    if piv.contains(&k) {
        return None;
    }
    let mut x = vec![Rat::zero(); k];
    for (r, &c) in piv.iter().enumerate() {
        x[c] = aug[r][k].clone();
    }
    Some(x)
}

pub fn lcm_of_denominators(v: &[Rat]) -> BigInt {
    v.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Scales a nonzero rational vector to a primitive integer vector whose
/// first nonzero entry is positive.
pub fn primitive_integer_vector(v: &[Rat]) -> Vec<BigInt> {
    let l = lcm_of_denominators(v);
    let ints: Vec<BigInt> = v.iter().map(|x| (x * &l).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return ints;
    }
    let sign = match ints.iter().find(|x| !x.is_zero()) {
        Some(x) if x.is_negative() => -BigInt::one(),
        _ => BigInt::one(),
    };
    ints.into_iter().map(|x| x / &g * &sign).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_and_det() {
        let m = from_ints(&[vec![2, 1, 0], vec![1, 3, 1], vec![0, 1, 4]]);
        assert_eq!(det(&m), rat(18));
        let inv = inverse(&m).unwrap();
        assert_eq!(mat_mul(&m, &inv), identity(3));
        let sing = from_ints(&[vec![1, 2], vec![2, 4]]);
        assert!(inverse(&sing).is_none());
        assert_eq!(det(&sing), rat(0));
    }

    #[test]
    fn kernels() {
        let m = from_ints(&[vec![1, 1, 0], vec![0, 1, 1]]);
        let k = nullspace(&m, 3);
        assert_eq!(k.len(), 1);
        assert_eq!(mat_mul(&m, &transpose(&k)), zeros(2, 1));
        let l = left_nullspace(&from_ints(&[vec![1, 2], vec![2, 4]]));
        assert_eq!(l.len(), 1);
        assert_eq!(vec_mat(&l[0], &from_ints(&[vec![1, 2], vec![2, 4]])), vec![rat(0), rat(0)]);
    }

    #[test]
    fn coordinates() {
        let b = from_ints(&[vec![1, 1, 0], vec![0, 1, 1]]);
        let t = vec![rat(2), rat(5), rat(3)];
        assert_eq!(coordinates_in(&b, &t), Some(vec![rat(2), rat(3)]));
        assert_eq!(coordinates_in(&b, &[rat(1), rat(0), rat(0)]), None);
    }

    #[test]
    fn primitive_vectors() {
        let v = vec![Rat::new(BigInt::from(-2), BigInt::from(3)), rat(2)];
        assert_eq!(primitive_integer_vector(&v), vec![BigInt::from(1), BigInt::from(-3)]);
    }
}
