//! Short-vector enumeration for positive definite integral quadratic forms.
//!
//! Forms are given by an integer symmetric matrix `g` and evaluated as
//! `c^T g c`. The walk is Fincke-Pohst over a floating Cholesky completion
//! with outward-rounded coordinate boxes; every candidate is re-evaluated in
//! exact integer arithmetic before it is reported, so counts are exact.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumError {
    #[error("Gram matrix is not positive definite")]
    NotPositiveDefinite,
    #[error("Gram matrix is not square and symmetric")]
    BadShape,
}

pub type IntGram = Vec<Vec<i128>>;

fn eval(g: &IntGram, c: &[i64]) -> i128 {
    let n = c.len();
    let mut s = 0i128;
    for i in 0..n {
        if c[i] == 0 {
            continue;
        }
        let ci = c[i] as i128;
        s += g[i][i] * ci * ci;
        for j in (i + 1)..n {
            s += 2 * g[i][j] * ci * c[j] as i128;
        }
    }
    s
}

fn check_shape(g: &IntGram) -> Result<(), EnumError> {
    let n = g.len();
    for i in 0..n {
        if g[i].len() != n {
            return Err(EnumError::BadShape);
        }
        for j in 0..n {
            if g[i][j] != g[j][i] {
                return Err(EnumError::BadShape);
            }
        }
    }
    Ok(())
}

/// `q[i][i]` and `q[i][j]` (j > i) with `c^T g c = sum_i q_ii (c_i + sum_{j>i} q_ij c_j)^2`.
fn cholesky(g: &IntGram) -> Result<Vec<Vec<f64>>, EnumError> {
    let n = g.len();
    let mut q: Vec<Vec<f64>> = g.iter().map(|r| r.iter().map(|&x| x as f64).collect()).collect();
    for i in 0..n {
        if q[i][i] <= 0.0 {
            return Err(EnumError::NotPositiveDefinite);
        }
        for j in (i + 1)..n {
            q[j][i] = q[i][j];
            q[i][j] /= q[i][i];
        }
        for k in (i + 1)..n {
            for l in k..n {
                q[k][l] -= q[k][i] * q[i][l];
            }
        }
    }
    Ok(q)
}

fn gram_of(u: &[Vec<i64>], g: &IntGram) -> IntGram {
    let n = g.len();
    let mut out = vec![vec![0i128; n]; n];
    for a in 0..n {
        for b in a..n {
            let mut s = 0i128;
            for i in 0..n {
                if u[a][i] == 0 {
                    continue;
                }
                for j in 0..n {
                    s += u[a][i] as i128 * g[i][j] * u[b][j] as i128;
                }
            }
            out[a][b] = s;
            out[b][a] = s;
        }
    }
    out
}

/// LLL-style reduction of a Gram matrix. Returns the reduced Gram matrix
/// and the unimodular transform `u` whose rows express the new basis in the
/// old one. No reduction-quality guarantee is claimed beyond what the walk
/// needs to stay fast.
pub fn reduce_gram(g: &IntGram) -> (IntGram, Vec<Vec<i64>>) {
    let n = g.len();
    let mut u: Vec<Vec<i64>> = (0..n).map(|i| (0..n).map(|j| i64::from(i == j)).collect()).collect();
    let mut cur = g.clone();
    if n < 2 {
        return (cur, u);
    }
    let gso = |m: &IntGram| -> (Vec<Vec<f64>>, Vec<f64>) {
        let mut mu = vec![vec![0.0; n]; n];
        let mut bstar = vec![0.0; n];
        for i in 0..n {
            for j in 0..i {
                let mut s = m[i][j] as f64;
                for k in 0..j {
                    s -= mu[j][k] * mu[i][k] * bstar[k];
                }
                mu[i][j] = s / bstar[j];
            }
            let mut s = m[i][i] as f64;
            for k in 0..i {
                s -= mu[i][k] * mu[i][k] * bstar[k];
            }
            bstar[i] = s;
        }
        (mu, bstar)
    };
    let mut k = 1;
    let mut guard = 0;
    while k < n && guard < 10_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (mu, _) = gso(&cur);
            let r = mu[k][j].round();
            if r != 0.0 {
                let r = r as i64;
                for t in 0..n {
                    u[k][t] -= r * u[j][t];
                }
                cur = gram_of(&u, g);
            }
        }
        let (mu, bstar) = gso(&cur);
        if bstar[k] < (0.99 - mu[k][k - 1] * mu[k][k - 1]) * bstar[k - 1] {
            u.swap(k, k - 1);
            cur = gram_of(&u, g);
            k = k.saturating_sub(1).max(1);
        } else {
            k += 1;
        }
    }
    (cur, u)
}

/// Calls `visit(coeffs, value)` for every integer vector with
/// `value = c^T g c <= bound`, including the zero vector. Coefficients are
/// with respect to the basis underlying `g`.
pub fn for_each_short_vector<F>(g: &IntGram, bound: i128, mut visit: F) -> Result<(), EnumError>
where
    F: FnMut(&[i64], i128),
{
    check_shape(g)?;
    let n = g.len();
    if n == 0 {
        visit(&[], 0);
        return Ok(());
    }
    if bound < 0 {
        return Ok(());
    }
    let (reduced, u) = reduce_gram(g);
    let q = cholesky(&reduced)?;
    let mut x = vec![0i64; n];
    let mut orig = vec![0i64; n];
    let bound_f = bound as f64;
    walk(&reduced, &q, &u, n - 1, bound_f, bound, &mut x, &mut orig, &mut visit);
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn walk<F: FnMut(&[i64], i128)>(
    g: &IntGram,
    q: &[Vec<f64>],
    u: &[Vec<i64>],
    i: usize,
    remaining: f64,
    bound: i128,
    x: &mut [i64],
    orig: &mut [i64],
    visit: &mut F,
) {
    let n = x.len();
    let center: f64 = -((i + 1)..n).map(|j| q[i][j] * x[j] as f64).sum::<f64>();
    let slack = 1e-7 * (1.0 + bound as f64);
    let radius = ((remaining.max(0.0) + slack) / q[i][i]).sqrt() + 1e-7;
    let lo = (center - radius).ceil() as i64;
    let hi = (center + radius).floor() as i64;
    for xi in lo..=hi {
        x[i] = xi;
        let d = xi as f64 - center;
        let rem = remaining - q[i][i] * d * d;
        if rem < -slack {
            continue;
        }
        if i == 0 {
            let value = eval(g, x);
            if value <= bound {
                for (t, o) in orig.iter_mut().enumerate() {
                    *o = (0..n).map(|s| x[s] * u[s][t]).sum();
                }
                visit(orig, value);
            }
        } else {
            walk(g, q, u, i - 1, rem, bound, x, orig, visit);
        }
    }
    x[i] = 0;
}

/// Number of vectors taking each value `0..=bound`.
pub fn count_values(g: &IntGram, bound: i128) -> Result<Vec<u64>, EnumError> {
    let mut counts = vec![0u64; bound.max(-1).wrapping_add(1) as usize];
    for_each_short_vector(g, bound, |_, v| counts[v as usize] += 1)?;
    Ok(counts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn brute_counts(g: &IntGram, bound: i128, box_r: i64) -> Vec<u64> {
        let n = g.len();
        let mut counts = vec![0u64; bound as usize + 1];
        let mut c = vec![-box_r; n];
        loop {
            let v = eval(g, &c);
            if v <= bound {
                counts[v as usize] += 1;
            }
            let mut t = 0;
            loop {
                if t == n {
                    return counts;
                }
                c[t] += 1;
                if c[t] > box_r {
                    c[t] = -box_r;
                    t += 1;
                } else {
                    break;
                }
            }
        }
    }

    #[test]
    fn sum_of_three_squares() {
        let g: IntGram = vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]];
        let c = count_values(&g, 10).unwrap();
        // r_3(n) for n = 0..10
        assert_eq!(c, vec![1, 6, 12, 8, 6, 24, 24, 0, 12, 30, 24]);
    }

    #[test]
    fn skewed_basis_matches_brute_force() {
        // x^2 + y^2 + z^2 + w^2 in a skewed basis.
        let u: Vec<Vec<i64>> = vec![vec![1, 5, 0, 0], vec![0, 1, 7, 0], vec![0, 0, 1, 3], vec![0, 0, 0, 1]];
        let id: IntGram = (0..4).map(|i| (0..4).map(|j| i128::from(i == j)).collect()).collect();
        let g = gram_of(&u, &id);
        let direct = count_values(&id, 12).unwrap();
        assert_eq!(count_values(&g, 12).unwrap(), direct);
        assert_eq!(direct[1], 8);
        assert_eq!(direct[2], 24);
    }

    #[test]
    fn rejects_indefinite() {
        let g: IntGram = vec![vec![1, 2], vec![2, 1]];
        assert_eq!(count_values(&g, 5), Err(EnumError::NotPositiveDefinite));
        let h: IntGram = vec![vec![1, 2], vec![0, 1]];
        assert_eq!(count_values(&h, 5), Err(EnumError::BadShape));
    }

    #[test]
    fn zero_vector_always_present() {
        let g: IntGram = vec![vec![6, 1, 0], vec![1, 4, 2], vec![0, 2, 10]];
        assert_eq!(count_values(&g, 0).unwrap(), vec![1]);
    }

    proptest! {
        #[test]
        fn counts_match_brute_force_and_are_prefix_consistent(
            a in 1i128..6, b in 1i128..6, c in 1i128..6, x in -2i128..3, y in -2i128..3
        ) {
            let g: IntGram = vec![vec![2 * a + 4, x, 0], vec![x, 2 * b + 4, y], vec![0, y, 2 * c + 4]];
            let bound = 40;
            let fast = count_values(&g, bound).unwrap();
            prop_assert_eq!(&fast, &brute_counts(&g, bound, 5));
            let short = count_values(&g, 17).unwrap();
            prop_assert_eq!(&short[..], &fast[..18]);
        }

        #[test]
        fn counts_invariant_under_unimodular_change(
            s in -3i64..4, t in -3i64..4, r in -3i64..4
        ) {
            let g: IntGram = vec![vec![4, 1, 0, 1], vec![1, 6, 2, 0], vec![0, 2, 8, 3], vec![1, 0, 3, 10]];
            let u: Vec<Vec<i64>> = vec![vec![1, s, 0, t], vec![0, 1, r, 0], vec![0, 0, 1, s], vec![0, 0, 0, 1]];
            let h = gram_of(&u, &g);
            prop_assert_eq!(count_values(&g, 60).unwrap(), count_values(&h, 60).unwrap());
        }
    }
}
