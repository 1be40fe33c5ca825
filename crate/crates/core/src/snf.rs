//! Smith normal form of square integer matrices by row/column reduction.

use thiserror::Error;

use crate::matrix::IntMatrix;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SnfError {
    #[error("matrix is singular (rank {rank} < {size})")]
    SingularMatrix { rank: usize, size: usize },
}

/// Elementary divisors `d₁ | d₂ | d₃ | d₄` of a nonsingular integer 4×4 matrix.
pub fn smith_normal_form(g: &IntMatrix) -> Result<[i64; 4], SnfError> {
    let rows = g.0.iter().map(|r| r.iter().map(|&v| i128::from(v)).collect()).collect();
    let d = elementary_divisors(rows)?;
    let mut out = [0i64; 4];
    for (o, v) in out.iter_mut().zip(d) {
        *o = i64::try_from(v).expect("elementary divisor divides the determinant");
    }
    Ok(out)
}

/// Elementary divisors of a nonsingular square matrix.
pub fn elementary_divisors(mut a: Vec<Vec<i128>>) -> Result<Vec<i128>, SnfError> {
    let n = a.len();
    for t in 0..n {
        let Some((pi, pj)) = min_pivot(&a, t) else {
            return Err(SnfError::SingularMatrix { rank: t, size: n });
        };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            // Clear column t below the pivot.
            let mut dirty = false;
            for i in t + 1..n {
                let q = a[i][t].div_euclid(a[t][t]);
                if q != 0 {
                    let (top, rest) = a.split_at_mut(i);
                    for (x, &y) in rest[0][t..].iter_mut().zip(&top[t][t..]) {
                        *x -= q * y;
                    }
                }
                dirty |= a[i][t] != 0;
            }
            // Clear row t right of the pivot.
            for j in t + 1..n {
                let q = a[t][j].div_euclid(a[t][t]);
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                dirty |= a[t][j] != 0;
            }
            if !dirty {
                // Pivot must divide the remaining block; otherwise fold an offending row in.
                let p = a[t][t];
                let bad = (t + 1..n).find(|&i| (t + 1..n).any(|j| a[i][j] % p != 0));
                match bad {
                    None => break,
                    Some(i) => {
                        let (top, rest) = a.split_at_mut(i);
                        for (x, &y) in top[t][t..].iter_mut().zip(&rest[0][t..]) {
                            *x += y;
                        }
                    }
                }
            }
            // Smallest nonzero entry in row/column t becomes the new pivot.
            let (pi, pj) = min_pivot_cross(&a, t);
            a.swap(t, pi);
            for row in a.iter_mut() {
                row.swap(t, pj);
            }
        }
    }
    Ok((0..n).map(|i| a[i][i].abs()).collect())
}

fn min_pivot(a: &[Vec<i128>], t: usize) -> Option<(usize, usize)> {
    let n = a.len();
    (t..n)
        .flat_map(|i| (t..n).map(move |j| (i, j)))
        .filter(|&(i, j)| a[i][j] != 0)
        .min_by_key(|&(i, j)| a[i][j].abs())
}

fn min_pivot_cross(a: &[Vec<i128>], t: usize) -> (usize, usize) {
    let n = a.len();
    (t..n)
        .map(|i| (i, t))
        .chain((t + 1..n).map(|j| (t, j)))
        .filter(|&(i, j)| a[i][j] != 0)
        .min_by_key(|&(i, j)| a[i][j].abs())
        .unwrap_or((t, t))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::Mat4;

    #[test]
    fn identity() {
        assert_eq!(smith_normal_form(&IntMatrix::identity()).unwrap(), [1, 1, 1, 1]);
    }

    #[test]
    fn hecke_generator() {
        for p in [2, 3, 5, 7] {
            assert_eq!(smith_normal_form(&Mat4::diagonal([1, 1, p, p])).unwrap(), [1, 1, p, p]);
        }
    }

    #[test]
    fn reorders_and_splits_gcds() {
        // diag(2,6,1,1): gcd oracle gives d1=d2=1, d3=gcd(2,6)=2, d4=12/2=6
        assert_eq!(smith_normal_form(&Mat4::diagonal([2, 6, 1, 1])).unwrap(), [1, 1, 2, 6]);
        // diag(4,6,1,1): 2 and 12
        assert_eq!(smith_normal_form(&Mat4::diagonal([4, 6, 1, 1])).unwrap(), [1, 1, 2, 12]);
    }

    #[test]
    fn singular_is_reported() {
        let g = Mat4([[1, 2, 0, 0], [2, 4, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]);
        assert_eq!(smith_normal_form(&g), Err(SnfError::SingularMatrix { rank: 3, size: 4 }));
        assert_eq!(smith_normal_form(&Mat4::zero()), Err(SnfError::SingularMatrix { rank: 0, size: 4 }));
    }

    #[test]
    fn negative_entries() {
        let g = Mat4([[0, -3, 0, 0], [5, 0, 0, 0], [0, 0, -1, 0], [0, 0, 0, 1]]);
        assert_eq!(smith_normal_form(&g).unwrap(), [1, 1, 1, 15]);
    }
}
