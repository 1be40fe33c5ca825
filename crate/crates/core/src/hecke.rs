//! Right-coset decomposition of the genus-2 Hecke operator `T(p)` and the
//! Satake eigenvalue formula evaluated over it.
//!
//! `Γ diag(1,1,p,p) Γ` splits into `1 + p + p² + p³` right cosets in four
//! families. Each representative is block upper triangular `[[A, B], [0, D]]`
//! and the diagonal of `D` is `(p^{d₁}, p^{d₂})`; the eigenvalue of `T(p)` is
//!
//! ```text
//! μ_F(p) = p^{2k−3/2} a₀ Σ_i (a₁ p⁻¹)^{d_{i1}} (a₂ p⁻²)^{d_{i2}}
//! ```

use std::ops::{Add, Div, Mul};

use num_complex::Complex64;
use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::IntMatrix;
use crate::satake::SatakeParams;
use crate::snf::smith_normal_form;
use crate::sums::is_prime;

/// Largest prime accepted by [`decompose_tp`]; keeps the representative list
/// (`≈ p³` matrices) inside a few tens of megabytes.
pub const MAX_DECOMPOSITION_PRIME: u64 = 97;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HeckeError {
    #[error("{0} is not prime")]
    NotPrime(u64),
    #[error("prime {0} exceeds the enumeration limit {MAX_DECOMPOSITION_PRIME}")]
    TooLarge(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum CosetFamily {
    G1,
    G2,
    G3,
    G4,
}

impl CosetFamily {
    pub const ALL: [CosetFamily; 4] = [CosetFamily::G1, CosetFamily::G2, CosetFamily::G3, CosetFamily::G4];

    /// Diagonal exponents of the `D` block.
    pub fn d_exponents(self) -> [u32; 2] {
        match self {
            CosetFamily::G1 => [0, 0],
            CosetFamily::G2 => [1, 0],
            CosetFamily::G3 => [0, 1],
            CosetFamily::G4 => [1, 1],
        }
    }

    pub fn param_count(self) -> usize {
        match self {
            CosetFamily::G1 => 0,
            CosetFamily::G2 => 1,
            CosetFamily::G3 => 2,
            CosetFamily::G4 => 3,
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// One right-coset representative `Γ g` of `T(p)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CosetRep {
    pub family: CosetFamily,
    /// `()`, `(a)`, `(α, d)` or `(a, b, d)` with residues in `0..p`.
    pub params: Vec<u64>,
    pub matrix: IntMatrix,
    /// `(d₁, d₂)`.
    pub d: [u32; 2],
}

impl CosetRep {
    /// Builds the representative of `family` with the given residues.
    pub fn new(p: u64, family: CosetFamily, params: &[u64]) -> Self {
        assert_eq!(params.len(), family.param_count(), "wrong number of residues for {family:?}");
        let p_ = p as i64;
        let r: Vec<i64> = params.iter().map(|&v| v as i64).collect();
        let rows = match family {
            CosetFamily::G1 => [[p_, 0, 0, 0], [0, p_, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]],
            CosetFamily::G2 => [[1, 0, r[0], 0], [0, p_, 0, 0], [0, 0, p_, 0], [0, 0, 0, 1]],
            CosetFamily::G3 => {
                let (alpha, d) = (r[0], r[1]);
                [[p_, 0, 0, 0], [-alpha, 1, 0, d], [0, 0, 1, alpha], [0, 0, 0, p_]]
            }
            CosetFamily::G4 => {
                let (a, b, d) = (r[0], r[1], r[2]);
                [[1, 0, a, b], [0, 1, b, d], [0, 0, p_, 0], [0, 0, 0, p_]]
            }
        };
        Self { family, params: params.to_vec(), matrix: crate::matrix::Mat4(rows), d: family.d_exponents() }
    }

    /// Lower-left 2×2 block vanishes.
    pub fn is_block_upper_triangular(&self) -> bool {
        (2..4).all(|i| (0..2).all(|j| self.matrix[(i, j)] == 0))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeckeDecomposition {
    pub prime: u64,
    pub reps: Vec<CosetRep>,
}

impl HeckeDecomposition {
    pub fn expected_len(p: u64) -> u64 {
        1 + p + p * p + p * p * p
    }

    pub fn family_counts(&self) -> [usize; 4] {
        let mut counts = [0; 4];
        for rep in &self.reps {
            counts[rep.family.index()] += 1;
        }
        counts
    }

    /// Family tags, `d` exponents and matrices agree with each other and with `prime`.
    pub fn is_well_formed(&self) -> bool {
        self.reps.iter().all(|rep| {
            rep.params.len() == rep.family.param_count()
                && rep.params.iter().all(|&v| v < self.prime)
                && rep.d == rep.family.d_exponents()
                && rep.is_block_upper_triangular()
                && *rep == CosetRep::new(self.prime, rep.family, &rep.params)
        })
    }
}

/// Enumerates the four families of right cosets of `T(p)`.
pub fn decompose_tp(p: u64) -> Result<HeckeDecomposition, HeckeError> {
    if !is_prime(p) {
        return Err(HeckeError::NotPrime(p));
    }
    if p > MAX_DECOMPOSITION_PRIME {
        return Err(HeckeError::TooLarge(p));
    }
    let mut reps = Vec::with_capacity(HeckeDecomposition::expected_len(p) as usize);
    reps.push(CosetRep::new(p, CosetFamily::G1, &[]));
    reps.extend((0..p).map(|a| CosetRep::new(p, CosetFamily::G2, &[a])));
    for alpha in 0..p {
        reps.extend((0..p).map(|d| CosetRep::new(p, CosetFamily::G3, &[alpha, d])));
    }
    for a in 0..p {
        for b in 0..p {
            reps.extend((0..p).map(|d| CosetRep::new(p, CosetFamily::G4, &[a, b, d])));
        }
    }
    Ok(HeckeDecomposition { prime: p, reps })
}

/// Integer similitude: `Some(μ)` when `ᵗgJg = μJ`.
pub fn integer_similitude(g: &IntMatrix) -> Option<i64> {
    let gram = g.symplectic_gram();
    let mu = gram[(0, 2)];
    (gram == IntMatrix::symplectic_form().map(|v| v * mu)).then_some(mu)
}

/// Whether `g_i g_j⁻¹ ∈ Sp₄(ℤ)` for two integral similitudes with the same `μ`.
///
/// `g_j⁻¹ = μ⁻¹ J⁻¹ ᵗg_j J`, so the product is `(g_i · J⁻¹ ᵗg_j J) / μ`; it
/// lies in `Sp₄(ℤ)` exactly when every entry of the integer product is
/// divisible by `μ` (the similitude of the quotient is then `μ/μ = 1`).
pub fn same_left_coset(gi: &IntMatrix, gj: &IntMatrix, mu: i64) -> bool {
    let prod = gi * &gj.symplectic_adjoint();
    let ok = prod.entries().all(|(_, v)| v % mu == 0);
    ok
}

/// No two representatives generate the same coset `Γ g`.
pub fn verify_disjoint(dec: &HeckeDecomposition) -> bool {
    let Ok(mu) = i64::try_from(dec.prime) else { return false };
    if dec.reps.iter().any(|r| integer_similitude(&r.matrix) != Some(mu)) {
        return false;
    }
    let adjoints: Vec<IntMatrix> = dec.reps.iter().map(|r| r.matrix.symplectic_adjoint()).collect();
    (0..dec.reps.len()).into_par_iter().all(|i| {
        let gi = &dec.reps[i].matrix;
        adjoints
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .all(|(_, adj)| (gi * adj).entries().any(|(_, v)| v % mu != 0))
    })
}

/// Every representative has `μ = p` and elementary divisors `(1, 1, p, p)`.
pub fn verify_double_coset(dec: &HeckeDecomposition) -> bool {
    let Ok(p) = i64::try_from(dec.prime) else { return false };
    dec.reps.par_iter().all(|rep| {
        integer_similitude(&rep.matrix) == Some(p)
            && smith_normal_form(&rep.matrix).is_ok_and(|d| d == [1, 1, p, p])
    })
}

/// A field-like scalar the eigenvalue sum can be evaluated in.
pub trait HeckeScalar:
    Clone + Zero + One + for<'a> Add<&'a Self, Output = Self> + Mul<Output = Self> + Div<Output = Self>
{
    fn from_u64(v: u64) -> Self;
}

impl HeckeScalar for Complex64 {
    fn from_u64(v: u64) -> Self {
        Complex64::new(v as f64, 0.0)
    }
}

impl HeckeScalar for crate::matrix::Rational {
    fn from_u64(v: u64) -> Self {
        Self::from_integer(v.into())
    }
}

/// `a₀ · Σ_i (a₁ p⁻¹)^{d_{i1}} (a₂ p⁻²)^{d_{i2}}` split by family.
pub fn family_contributions<T: HeckeScalar>(dec: &HeckeDecomposition, a: [&T; 3]) -> [T; 4] {
    let p = T::from_u64(dec.prime);
    let t1 = a[1].clone() / p.clone();
    let t2 = a[2].clone() / (p.clone() * p);
    let mut sums: [T; 4] = std::array::from_fn(|_| T::zero());
    for rep in &dec.reps {
        let mut term = T::one();
        if rep.d[0] == 1 {
            term = term * t1.clone();
        }
        if rep.d[1] == 1 {
            term = term * t2.clone();
        }
        let slot = &mut sums[rep.family.index()];
        *slot = slot.clone() + &term;
    }
    sums.map(|s| a[0].clone() * s)
}

/// The normalized Hecke sum `μ_F(p) / p^{2k−3/2}`, evaluated by iterating over representatives.
pub fn normalized_sum<T: HeckeScalar>(dec: &HeckeDecomposition, a: [&T; 3]) -> T {
    family_contributions(dec, a).into_iter().fold(T::zero(), |acc, v| acc + &v)
}

/// `p^{2k−3/2}`.
pub fn eigenvalue_scale(p: u64, k: i32) -> f64 {
    (p as f64).powf(2.0 * f64::from(k) - 1.5)
}

/// `μ_F(p)` from the coset decomposition.
pub fn eigenvalue_from_decomposition(dec: &HeckeDecomposition, s: &SatakeParams, k: i32) -> Complex64 {
    normalized_sum(dec, [&s.a0, &s.a1, &s.a2]) * eigenvalue_scale(dec.prime, k)
}

/// `λ_F(p) = a₀ + a₀a₁ + a₀a₂ + a₀a₁a₂`.
pub fn lambda_normalized(s: &SatakeParams) -> Complex64 {
    s.a0 + s.a0 * s.a1 + s.a0 * s.a2 + s.a0 * s.a1 * s.a2
}

/// General Satake formula for `g` with `μ(g) = p^r` in genus `n`:
///
/// `(p^{nk − n(n+1)/4} a₀)^r Σ_i Π_j (a_j p^{−j})^{d_{ij}}`.
///
/// `params` is `(a₀, a₁, …, a_n)` and `exponents[i]` lists `d_{i1}, …, d_{in}`
/// for the `i`-th coset; the caller supplies the coset data.
pub fn satake_formula(p: u64, n: u32, k: i32, r: u32, params: &[Complex64], exponents: &[Vec<u32>]) -> Complex64 {
    assert_eq!(params.len(), n as usize + 1, "need a₀..a_n");
    let pf = p as f64;
    let n_f = f64::from(n);
    let lead = Complex64::new(pf.powf(n_f * f64::from(k) - n_f * (n_f + 1.0) / 4.0), 0.0) * params[0];
    let sum: Complex64 = exponents
        .iter()
        .map(|d| {
            assert_eq!(d.len(), n as usize, "need d_{{i1}}..d_{{in}}");
            d.iter()
                .enumerate()
                .map(|(j, &e)| (params[j + 1] * pf.powi(-(j as i32 + 1))).powu(e))
                .product::<Complex64>()
        })
        .sum();
    lead.powu(r) * sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{Mat4, Rational};

    #[test]
    fn counts() {
        for (p, n) in [(2, 15), (3, 40), (5, 156)] {
            let dec = decompose_tp(p).unwrap();
            assert_eq!(dec.reps.len(), n);
            assert_eq!(dec.family_counts(), [1, p as usize, (p * p) as usize, (p * p * p) as usize]);
            assert!(dec.is_well_formed());
        }
    }

    #[test]
    fn rejects_non_primes() {
        assert_eq!(decompose_tp(4), Err(HeckeError::NotPrime(4)));
        assert_eq!(decompose_tp(1), Err(HeckeError::NotPrime(1)));
        assert_eq!(decompose_tp(101), Err(HeckeError::TooLarge(101)));
    }

    #[test]
    fn reps_are_block_triangular_with_similitude_p() {
        let dec = decompose_tp(3).unwrap();
        for rep in &dec.reps {
            assert!(rep.is_block_upper_triangular());
            assert_eq!(integer_similitude(&rep.matrix), Some(3));
        }
    }

    #[test]
    fn disjoint_and_double_coset_small_primes() {
        for p in [2, 3] {
            let dec = decompose_tp(p).unwrap();
            assert!(verify_disjoint(&dec));
            assert!(verify_double_coset(&dec));
        }
    }

    #[test]
    fn duplicate_rep_breaks_disjointness() {
        let mut dec = decompose_tp(2).unwrap();
        dec.reps.push(dec.reps[5].clone());
        assert!(!verify_disjoint(&dec));
    }

    #[test]
    fn left_translate_is_same_coset() {
        // γ·g for γ ∈ Sp₄(ℤ) lies in Γ g.
        let dec = decompose_tp(3).unwrap();
        let gamma = Mat4([[1, 0, 1, 2], [0, 1, 2, 0], [0, 0, 1, 0], [0, 0, 0, 1]]);
        let g = &dec.reps[7].matrix;
        assert!(same_left_coset(&(&gamma * g), g, 3));
        let mut dec2 = dec.clone();
        dec2.reps[7].matrix = &gamma * g;
        assert!(!verify_disjoint(&HeckeDecomposition {
            prime: 3,
            reps: vec![dec.reps[7].clone(), dec2.reps[7].clone()],
        }));
    }

    #[test]
    fn t_p_squared_cell_fails_double_coset() {
        let mut dec = decompose_tp(2).unwrap();
        dec.reps[0].matrix = Mat4::diagonal([1, 2, 4, 2]);
        assert_eq!(integer_similitude(&dec.reps[0].matrix), Some(4));
        assert!(!verify_double_coset(&dec));
    }

    #[test]
    fn all_ones_params() {
        let s = SatakeParams::new(Complex64::one(), Complex64::one(), Complex64::one());
        for p in [2, 3, 5] {
            let dec = decompose_tp(p).unwrap();
            for k in [4, 10] {
                let v = eigenvalue_from_decomposition(&dec, &s, k);
                let expect = 4.0 * eigenvalue_scale(p, k);
                assert!((v.re - expect).abs() <= 1e-12 * expect && v.im.abs() <= 1e-12 * expect);
            }
        }
        assert_eq!(lambda_normalized(&s), Complex64::new(4.0, 0.0));
    }

    #[test]
    fn per_family_monomials_exact() {
        let q = |n: i64, d: i64| Rational::new(n.into(), d.into());
        let (a0, a1, a2) = (q(3, 7), q(-2, 5), q(11, 4));
        for p in [2, 3, 5] {
            let dec = decompose_tp(p).unwrap();
            let c = family_contributions(&dec, [&a0, &a1, &a2]);
            assert_eq!(c[0], a0.clone());
            assert_eq!(c[1], &a0 * &a1);
            assert_eq!(c[2], &a0 * &a2);
            assert_eq!(c[3], &(&a0 * &a1) * &a2);
        }
    }

    #[test]
    fn vanishing_factor() {
        let s = SatakeParams::new(Complex64::new(0.3, 0.7), -Complex64::one(), Complex64::new(0.1, -2.0));
        assert!(lambda_normalized(&s).norm() < 1e-15);
    }

    #[test]
    fn general_formula_matches_enumeration_for_tp() {
        let s = SatakeParams::new(Complex64::new(0.6, 0.8), Complex64::new(0.0, 1.0), Complex64::new(-0.28, 0.96));
        let dec = decompose_tp(5).unwrap();
        let exps: Vec<Vec<u32>> = dec.reps.iter().map(|r| r.d.to_vec()).collect();
        let via_formula = satake_formula(5, 2, 6, 1, &[s.a0, s.a1, s.a2], &exps);
        let via_dec = eigenvalue_from_decomposition(&dec, &s, 6);
        assert!((via_formula - via_dec).norm() <= 1e-10 * via_dec.norm());
    }
}
