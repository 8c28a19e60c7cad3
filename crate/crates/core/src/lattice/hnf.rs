use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

/// Row-style Hermite normal form: upper echelon, positive pivots, entries
/// above each pivot reduced into `[0, pivot)`. Zero rows are dropped.
pub fn hnf(rows: Vec<Vec<BigInt>>, ncols: usize) -> Vec<Vec<BigInt>> {
    let mut a: Vec<Vec<BigInt>> = rows.into_iter().filter(|r| r.iter().any(|x| !x.is_zero())).collect();
    let mut r = 0;
    for c in 0..ncols {
        if r == a.len() {
            break;
        }
        loop {
            let piv = (r..a.len())
                .filter(|&i| !a[i][c].is_zero())
                .min_by(|&i, &j| a[i][c].abs().cmp(&a[j][c].abs()));
            let Some(piv) = piv else { break };
            a.swap(r, piv);
            let mut done = true;
            for i in (r + 1)..a.len() {
                if a[i][c].is_zero() {
                    continue;
                }
                let q = a[i][c].div_floor(&a[r][c]);
                let pivot_row = a[r].clone();
                for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
                if !a[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if a[r][c].is_zero() {
            continue;
        }
        if a[r][c].is_negative() {
            for x in a[r].iter_mut() {
                *x = -x.clone();
            }
        }
        let pivot_row = a[r].clone();
        for i in 0..r {
            let q = a[i][c].div_floor(&pivot_row[c]);
            if !q.is_zero() {
                for (x, y) in a[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
            }
        }
        r += 1;
    }
    a.truncate(r);
    a
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[i64]]) -> Vec<Vec<BigInt>> {
        rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
    }

    #[test]
    fn small_hnf() {
        let h = hnf(m(&[&[2, 4], &[3, 1], &[5, 5]]), 2);
        assert_eq!(h, m(&[&[1, 7], &[0, 10]]));
        let h2 = hnf(m(&[&[0, 0, 3], &[0, 2, 1]]), 3);
        assert_eq!(h2, m(&[&[0, 2, 1], &[0, 0, 3]]));
    }

    #[test]
    fn idempotent_and_unimodular_invariant() {
        let base = m(&[&[4, 1, 7, 2], &[0, 3, 1, 1], &[2, 2, 2, 9], &[1, 0, 5, 5]]);
        let h = hnf(base.clone(), 4);
        assert_eq!(hnf(h.clone(), 4), h);
        // Apply a unimodular change of rows.
        let mixed: Vec<Vec<BigInt>> = vec![
            base[0].iter().zip(&base[1]).map(|(a, b)| a + b * 3).collect(),
            base[1].clone(),
            base[2].iter().zip(&base[0]).map(|(a, b)| a - b).collect(),
            base[3].iter().zip(&base[2]).map(|(a, b)| a + b * 2).collect(),
        ];
        assert_eq!(hnf(mixed, 4), h);
    }
}
