//! Dense 4×4 matrices over an arbitrary ring, plus the standard symplectic form.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact rationals used for all global matrix arithmetic.
pub type Rational = BigRational;

/// A 4×4 matrix stored row-major. Indices are zero-based.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat4<T>(pub [[T; 4]; 4]);

/// Integer matrices used for coset representatives and Smith normal form.
pub type IntMatrix = Mat4<i64>;

impl<T: Clone + Zero> Mat4<T> {
    pub fn zero() -> Self {
        Self(std::array::from_fn(|_| std::array::from_fn(|_| T::zero())))
    }

    pub fn from_fn(mut f: impl FnMut(usize, usize) -> T) -> Self {
        Self(std::array::from_fn(|i| std::array::from_fn(|j| f(i, j))))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(|i, j| self.0[j][i].clone())
    }

    pub fn map<U>(&self, mut f: impl FnMut(&T) -> U) -> Mat4<U> {
        Mat4(std::array::from_fn(|i| std::array::from_fn(|j| f(&self.0[i][j]))))
    }

    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize), &T)> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.iter().enumerate().map(move |(j, v)| ((i, j), v)))
    }
}

impl<T: Clone + Zero + One> Mat4<T> {
    pub fn identity() -> Self {
        Self::from_fn(|i, j| if i == j { T::one() } else { T::zero() })
    }

    pub fn diagonal(d: [T; 4]) -> Self {
        Self::from_fn(|i, j| if i == j { d[i].clone() } else { T::zero() })
    }
}

impl<T> Mat4<T>
where
    T: Clone + Zero + One + std::ops::Neg<Output = T>,
{
    /// The standard form `J = [[0, 1₂], [−1₂, 0]]`.
    pub fn symplectic_form() -> Self {
        Self::from_fn(|i, j| match (i, j) {
            (0, 2) | (1, 3) => T::one(),
            (2, 0) | (3, 1) => -T::one(),
            _ => T::zero(),
        })
    }

    /// `J⁻¹ · ᵗg · J`. For `g` with similitude `μ` this equals `μ·g⁻¹`.
    pub fn symplectic_adjoint(&self) -> Self
    where
        for<'a> &'a Mat4<T>: Mul<&'a Mat4<T>, Output = Mat4<T>>,
    {
        let j = Self::symplectic_form();
        let j_inv = j.map(|v| -v.clone());
        &(&j_inv * &self.transpose()) * &j
    }

    /// `ᵗg · J · g`.
    pub fn symplectic_gram(&self) -> Self
    where
        for<'a> &'a Mat4<T>: Mul<&'a Mat4<T>, Output = Mat4<T>>,
    {
        &(&self.transpose() * &Self::symplectic_form()) * self
    }
}

impl<T> Index<(usize, usize)> for Mat4<T> {
    type Output = T;

    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.0[i][j]
    }
}

impl<T> IndexMut<(usize, usize)> for Mat4<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.0[i][j]
    }
}

impl<'a, T> Mul<&'a Mat4<T>> for &'a Mat4<T>
where
    T: Clone + Zero,
    for<'b> &'b T: Mul<&'b T, Output = T>,
{
    type Output = Mat4<T>;

    fn mul(self, rhs: &'a Mat4<T>) -> Mat4<T> {
        Mat4::from_fn(|i, j| {
            (0..4).fold(T::zero(), |acc, k| acc + &self.0[i][k] * &rhs.0[k][j])
        })
    }
}

impl<T> Mul for Mat4<T>
where
    T: Clone + Zero,
    for<'b> &'b T: Mul<&'b T, Output = T>,
{
    type Output = Mat4<T>;

    fn mul(self, rhs: Mat4<T>) -> Mat4<T> {
        &self * &rhs
    }
}

impl IntMatrix {
    pub fn to_rational(&self) -> Mat4<Rational> {
        self.map(|&v| Rational::from_integer(BigInt::from(v)))
    }
}

impl<T: fmt::Display> fmt::Display for Mat4<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            for (j, v) in row.iter().enumerate() {
                if j > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{v}")?;
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixParseError {
    #[error("expected 4 rows, found {0}")]
    RowCount(usize),
    #[error("row {row}: expected 4 entries, found {found}")]
    ColumnCount { row: usize, found: usize },
    #[error("row {row}: invalid rational `{token}`")]
    Entry { row: usize, token: String },
}

/// Parses four non-empty lines of four whitespace-separated rationals (`a/b` or integers).
impl FromStr for Mat4<Rational> {
    type Err = MatrixParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rows: Vec<&str> = s.lines().map(str::trim).filter(|l| !l.is_empty()).collect();
        if rows.len() != 4 {
            return Err(MatrixParseError::RowCount(rows.len()));
        }
        let mut out = Mat4::zero();
        for (i, line) in rows.iter().enumerate() {
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 4 {
                return Err(MatrixParseError::ColumnCount { row: i + 1, found: tokens.len() });
            }
            for (j, tok) in tokens.iter().enumerate() {
                out.0[i][j] = parse_rational(tok)
                    .ok_or_else(|| MatrixParseError::Entry { row: i + 1, token: tok.to_string() })?;
            }
        }
        Ok(out)
    }
}

/// Parses `a/b` or an integer; rejects zero denominators.
pub fn parse_rational(token: &str) -> Option<Rational> {
    match token.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            (!d.is_zero()).then(|| Rational::new(n, d))
        }
        None => token.trim().parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j_squared_is_minus_identity() {
        let j = IntMatrix::symplectic_form();
        assert_eq!(&j * &j, IntMatrix::identity().map(|v| -v));
    }

    #[test]
    fn parses_rational_literal() {
        let m: Mat4<Rational> = "1 0 0 0\n0 1 0 1/4\n0 0 1 0\n0 0 0 1".parse().unwrap();
        assert_eq!(m[(1, 3)], Rational::new(1.into(), 4.into()));
        assert_eq!(m[(0, 0)], Rational::one());
    }

    #[test]
    fn rejects_malformed_literals() {
        assert_eq!(
            "1 0 0\n0 1 0 0\n0 0 1 0\n0 0 0 1".parse::<Mat4<Rational>>(),
            Err(MatrixParseError::ColumnCount { row: 1, found: 3 })
        );
        assert!(matches!(
            "1 0 0 0\n0 1 0 0\n0 0 1 0".parse::<Mat4<Rational>>(),
            Err(MatrixParseError::RowCount(3))
        ));
        assert!(matches!(
            "1 0 0 0\n0 1 0 1/0\n0 0 1 0\n0 0 0 1".parse::<Mat4<Rational>>(),
            Err(MatrixParseError::Entry { row: 2, .. })
        ));
    }
}
