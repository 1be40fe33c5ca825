//! Satake parameters, spin Euler factors and their Dirichlet coefficients.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::matrix::{parse_rational, Rational};

/// Extra slack on the Weissauer bound `|λ| ≤ 4`.
pub const WEISSAUER_SLACK: f64 = 1e-12;

/// `(a₀, a₁, a₂)` at one prime. Serialized as `[re, im]` pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SatakeParams {
    pub a0: Complex64,
    pub a1: Complex64,
    pub a2: Complex64,
}

impl SatakeParams {
    pub fn new(a0: Complex64, a1: Complex64, a2: Complex64) -> Self {
        Self { a0, a1, a2 }
    }

    /// Trivial central character at the Satake level: `a₀² a₁ a₂ = 1`.
    pub fn has_trivial_central_character(&self, tol: f64) -> bool {
        (self.a0 * self.a0 * self.a1 * self.a2 - Complex64::one()).norm() <= tol
    }
}

/// Roots of one local spin factor `Π (1 − root·p^{−s})⁻¹`, degree at most four.
///
/// Zero roots model ramified primes where the factor has lower degree.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpinFactor<T = Complex64> {
    pub prime: u64,
    pub roots: Vec<T>,
}

impl<T> SpinFactor<T> {
    pub fn new(prime: u64, roots: Vec<T>) -> Self {
        assert!(roots.len() <= 4, "a spin factor has at most four roots");
        Self { prime, roots }
    }
}

impl<T: Zero> SpinFactor<T> {
    pub fn degree(&self) -> usize {
        self.roots.iter().filter(|r| !r.is_zero()).count()
    }
}

/// `(a₀, a₀a₁, a₀a₂, a₀a₁a₂)`.
pub fn spin_roots(prime: u64, s: &SatakeParams) -> SpinFactor {
    let SatakeParams { a0, a1, a2 } = *s;
    SpinFactor::new(prime, vec![a0, a0 * a1, a0 * a2, a0 * a1 * a2])
}

/// Ring operations needed by the coefficient recursion.
pub trait Coefficient:
    Clone + Zero + One + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
}

impl<T> Coefficient for T where
    T: Clone + Zero + One + Add<Output = T> + Sub<Output = T> + Mul<Output = T> + Neg<Output = T>
{
}

/// Elementary symmetric functions `e₀ … e_n` of `roots`.
pub fn elementary_symmetric<T: Coefficient>(roots: &[T]) -> Vec<T> {
    let mut e = vec![T::one()];
    for r in roots {
        e.push(T::zero());
        for k in (1..e.len()).rev() {
            e[k] = e[k].clone() + r.clone() * e[k - 1].clone();
        }
    }
    e
}

/// `a(p^r)` for `r = 0..=rmax`: the power series `1 / Π(1 − root·X)`.
///
/// With `Π(1 − root·X) = Σ (−1)^j e_j X^j`, inversion gives
/// `a(p^r) = Σ_{j=1}^{min(r,4)} (−1)^{j+1} e_j a(p^{r−j})`.
pub fn dirichlet_coeffs<T: Coefficient>(f: &SpinFactor<T>, rmax: usize) -> Vec<T> {
    let e = elementary_symmetric(&f.roots);
    let mut a: Vec<T> = Vec::with_capacity(rmax + 1);
    a.push(T::one());
    for r in 1..=rmax {
        let mut acc = T::zero();
        for (j, ej) in e.iter().enumerate().skip(1).take(r) {
            let term = ej.clone() * a[r - j].clone();
            acc = if j % 2 == 1 { acc + term } else { acc - term };
        }
        a.push(acc);
    }
    a
}

/// `λ(p) = Σ roots`.
pub fn lambda_p<T: Coefficient>(f: &SpinFactor<T>) -> T {
    f.roots.iter().cloned().fold(T::zero(), |acc, r| acc + r)
}

/// `| |a_j| − 1 | ≤ tol` for all three parameters.
pub fn check_ramanujan(s: &SatakeParams, tol: f64) -> bool {
    [s.a0, s.a1, s.a2].iter().all(|a| (a.norm() - 1.0).abs() <= tol)
}

/// Weissauer's bound `|λ| ≤ 4`.
pub fn check_weissauer(lambda: f64) -> bool {
    lambda.abs() <= 4.0 + WEISSAUER_SLACK
}

/// Satake parameters of a tempered Yoshida-type form from two unitary GL(2) angles.
///
/// Chooses `a₀ = e^{iθ}`, `a₁ = e^{i(φ−θ)}`, `a₂ = e^{−i(φ+θ)}`, so the spin roots
/// are `(e^{iθ}, e^{iφ}, e^{−iφ}, e^{−iθ})` and `λ = 2cos θ + 2cos φ`.
pub fn yoshida_params(theta: f64, phi: f64) -> SatakeParams {
    SatakeParams::new(
        Complex64::from_polar(1.0, theta),
        Complex64::from_polar(1.0, phi - theta),
        Complex64::from_polar(1.0, -(phi + theta)),
    )
}

/// Exact rational for JSON: serialized as the string `"a/b"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExactRational(pub Rational);

impl Serialize for ExactRational {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExactRational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        parse_rational(&s)
            .map(ExactRational)
            .ok_or_else(|| serde::de::Error::custom(format!("invalid rational `{s}`")))
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n.into(), d.into())
    }

    #[test]
    fn roots_of_trivial_params() {
        let f = spin_roots(2, &SatakeParams::new(c(1., 0.), c(1., 0.), c(1., 0.)));
        assert_eq!(f.roots, vec![c(1., 0.); 4]);
        assert_eq!(lambda_p(&f), c(4., 0.));
    }

    #[test]
    fn roots_of_i_minus_one() {
        let f = spin_roots(3, &SatakeParams::new(c(0., 1.), c(-1., 0.), c(-1., 0.)));
        assert_eq!(f.roots, vec![c(0., 1.), c(0., -1.), c(0., -1.), c(0., 1.)]);
    }

    #[test]
    fn unit_inputs_give_unit_roots() {
        let s = SatakeParams::new(Complex64::from_polar(1., 0.3), Complex64::from_polar(1., -1.1), Complex64::from_polar(1., 2.5));
        for r in spin_roots(5, &s).roots {
            assert!((r.norm() - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn all_ones_coefficients_are_binomials() {
        let f = SpinFactor::new(2, vec![q(1, 1); 4]);
        let a = dirichlet_coeffs(&f, 6);
        let expect: Vec<Rational> = [1, 4, 10, 20, 35, 56, 84].iter().map(|&v| q(v, 1)).collect();
        assert_eq!(a, expect);
    }

    #[test]
    fn zero_roots_give_trivial_factor() {
        let f = SpinFactor::new(2, vec![q(0, 1); 4]);
        assert_eq!(f.degree(), 0);
        let a = dirichlet_coeffs(&f, 5);
        assert_eq!(a[0], q(1, 1));
        assert!(a[1..].iter().all(Zero::is_zero));
    }

    #[test]
    fn rational_roots_first_coefficient() {
        let f = SpinFactor::new(7, vec![q(2, 1), q(1, 2), q(3, 1), q(1, 3)]);
        assert_eq!(dirichlet_coeffs(&f, 1)[1], q(35, 6));
        assert_eq!(lambda_p(&f), q(35, 6));
    }

    #[test]
    fn conjugate_pairs_give_real_lambda() {
        let (t, p) = (0.7, 2.1);
        let f = SpinFactor::new(
            11,
            vec![Complex64::from_polar(1., t), Complex64::from_polar(1., -t), Complex64::from_polar(1., p), Complex64::from_polar(1., -p)],
        );
        let l = lambda_p(&f);
        assert!((l.re - (2. * t.cos() + 2. * p.cos())).abs() < 1e-14);
        assert!(l.im.abs() < 1e-15);
    }

    #[test]
    fn ramified_lambda() {
        let f = SpinFactor::new(2, vec![c(0.5, 0.), c(-0.25, 0.), c(0., 0.), c(0., 0.)]);
        assert_eq!(f.degree(), 2);
        assert_eq!(lambda_p(&f), c(0.25, 0.));
    }

    #[test]
    fn ramanujan_predicate() {
        assert!(check_ramanujan(&SatakeParams::new(c(1., 0.), Complex64::from_polar(1., 0.4), Complex64::from_polar(1., 2.)), 1e-12));
        assert!(!check_ramanujan(&SatakeParams::new(c(1., 0.), c(2., 0.), c(1., 0.)), 1e-12));
        let s = yoshida_params(1.3, 0.2);
        assert!(check_ramanujan(&s, 1e-12));
        assert!(s.has_trivial_central_character(1e-12));
    }

    #[test]
    fn yoshida_params_give_two_gl2_traces() {
        let (t, p) = (PI / 5.0, 2.0);
        let l = crate::hecke::lambda_normalized(&yoshida_params(t, p));
        assert!((l.re - 2. * t.cos() - 2. * p.cos()).abs() < 1e-14 && l.im.abs() < 1e-14);
    }

    #[test]
    fn weissauer() {
        assert!(check_weissauer(4.0));
        assert!(check_weissauer(-4.0));
        assert!(!check_weissauer(4.5));
    }

    #[test]
    fn exact_rational_json() {
        let v = ExactRational(q(-3, 4));
        let s = serde_json::to_string(&v).unwrap();
        assert_eq!(s, "\"-3/4\"");
        assert_eq!(serde_json::from_str::<ExactRational>(&s).unwrap(), v);
        assert_eq!(serde_json::from_str::<ExactRational>("\"5\"").unwrap(), ExactRational(q(5, 1)));
        assert!(serde_json::from_str::<ExactRational>("\"1/0\"").is_err());
    }

    #[test]
    fn complex_json_is_pair() {
        let s = SatakeParams::new(c(1., 0.), c(0., 1.), c(-1., 0.5));
        let j = serde_json::to_value(s).unwrap();
        assert_eq!(j["a1"], serde_json::json!([0.0, 1.0]));
    }
}
