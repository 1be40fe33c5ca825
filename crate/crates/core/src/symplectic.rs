//! GSp(4) similitudes and membership in the genus-2 congruence subgroups.
//!
//! Global membership is tested over ℚ against the entry-wise lattice of each
//! subgroup. Local membership at a prime `p | N` is the same lattice read
//! through `p`-adic valuations with exponent `r_p = v_p(N)`.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{Mat4, Rational};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymplecticError {
    #[error("matrix is not a symplectic similitude: ᵗgJg is not a nonzero multiple of J")]
    NotSimilitude,
    #[error("invalid subgroup spec `{0}`; expected `kind:N` with kind in borel|siegel|klingen|paramodular")]
    BadSubgroupSpec(String),
    #[error("level must be at least 1")]
    ZeroLevel,
    #[error("prime {prime} does not divide level {level}")]
    PrimeDoesNotDivide { prime: u64, level: u64 },
    #[error("{0} is not prime")]
    NotPrime(u64),
}

/// Computes `μ` with `ᵗgJg = μJ`.
pub fn similitude(g: &Mat4<Rational>) -> Result<Rational, SymplecticError> {
    let gram = g.symplectic_gram();
    let mu = gram[(0, 2)].clone();
    if mu.is_zero() {
        return Err(SymplecticError::NotSimilitude);
    }
    let target = Mat4::<Rational>::symplectic_form().map(|v| v * &mu);
    if gram == target {
        Ok(mu)
    } else {
        Err(SymplecticError::NotSimilitude)
    }
}

/// A rational 4×4 matrix certified to lie in GSp(4, ℚ), with its similitude cached.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimilitudeMatrix {
    entries: Mat4<Rational>,
    mu: Rational,
}

impl SimilitudeMatrix {
    pub fn new(entries: Mat4<Rational>) -> Result<Self, SymplecticError> {
        let mu = similitude(&entries)?;
        Ok(Self { entries, mu })
    }

    pub fn from_integers(rows: [[i64; 4]; 4]) -> Result<Self, SymplecticError> {
        Self::new(Mat4(rows).to_rational())
    }

    pub fn identity() -> Self {
        Self { entries: Mat4::identity(), mu: Rational::one() }
    }

    pub fn entries(&self) -> &Mat4<Rational> {
        &self.entries
    }

    pub fn mu(&self) -> &Rational {
        &self.mu
    }

    /// `g⁻¹ = μ⁻¹ · J⁻¹ ᵗg J`.
    pub fn inverse(&self) -> Self {
        let scale = self.mu.recip();
        let entries = self.entries.symplectic_adjoint().map(|v| v * &scale);
        Self { entries, mu: scale }
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        Self { entries: &self.entries * &rhs.entries, mu: &self.mu * &rhs.mu }
    }

    pub fn is_integral(&self) -> bool {
        self.entries.entries().all(|(_, v)| v.is_integer())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubgroupKind {
    Borel,
    Siegel,
    Klingen,
    Paramodular,
}

/// Zero-based positions that must lie in `N·ℤ` for each subgroup.
const BOREL_SLOTS: &[(usize, usize)] = &[(0, 1), (2, 0), (2, 1), (3, 0), (3, 1), (3, 2)];
const SIEGEL_SLOTS: &[(usize, usize)] = &[(2, 0), (2, 1), (3, 0), (3, 1)];
const KLINGEN_SLOTS: &[(usize, usize)] = &[(0, 1), (2, 1), (3, 0), (3, 1), (3, 2)];

/// The paramodular slot allowed to lie in `N⁻¹·ℤ`.
pub const PARAMODULAR_DUAL_SLOT: (usize, usize) = (1, 3);

impl SubgroupKind {
    pub fn level_slots(self) -> &'static [(usize, usize)] {
        match self {
            SubgroupKind::Borel => BOREL_SLOTS,
            SubgroupKind::Siegel => SIEGEL_SLOTS,
            SubgroupKind::Klingen | SubgroupKind::Paramodular => KLINGEN_SLOTS,
        }
    }

    /// Lower bound on the entry's valuation in units of the level exponent:
    /// `1` for `N·ℤ`, `-1` for `N⁻¹·ℤ`, `0` for `ℤ`.
    fn slot_weight(self, pos: (usize, usize)) -> i64 {
        if self == SubgroupKind::Paramodular && pos == PARAMODULAR_DUAL_SLOT {
            -1
        } else if self.level_slots().contains(&pos) {
            1
        } else {
            0
        }
    }

    fn name(self) -> &'static str {
        match self {
            SubgroupKind::Borel => "borel",
            SubgroupKind::Siegel => "siegel",
            SubgroupKind::Klingen => "klingen",
            SubgroupKind::Paramodular => "paramodular",
        }
    }
}

impl FromStr for SubgroupKind {
    type Err = SymplecticError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "borel" | "b" => Ok(SubgroupKind::Borel),
            "siegel" | "gamma0" => Ok(SubgroupKind::Siegel),
            "klingen" | "q" => Ok(SubgroupKind::Klingen),
            "paramodular" | "k" => Ok(SubgroupKind::Paramodular),
            _ => Err(SymplecticError::BadSubgroupSpec(s.to_string())),
        }
    }
}

impl fmt::Display for SubgroupKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubgroupSpec {
    pub kind: SubgroupKind,
    level: u64,
}

impl SubgroupSpec {
    pub fn new(kind: SubgroupKind, level: u64) -> Result<Self, SymplecticError> {
        if level == 0 {
            return Err(SymplecticError::ZeroLevel);
        }
        Ok(Self { kind, level })
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    /// Local patterns at every prime dividing the level.
    pub fn local_patterns(&self) -> Vec<ValuationPattern> {
        factorize(self.level)
            .into_iter()
            .map(|(p, r)| ValuationPattern { prime: p, exponent: r, kind: self.kind })
            .collect()
    }
}

impl FromStr for SubgroupSpec {
    type Err = SymplecticError;

    /// `kind:N`, e.g. `paramodular:4`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || SymplecticError::BadSubgroupSpec(s.to_string());
        let (kind, level) = s.split_once(':').ok_or_else(bad)?;
        let kind: SubgroupKind = kind.parse().map_err(|_| bad())?;
        let level: u64 = level.trim().parse().map_err(|_| bad())?;
        Self::new(kind, level)
    }
}

impl fmt::Display for SubgroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.kind, self.level)
    }
}

/// Global membership in `B(N)`, `Γ₀(N)`, `Q(N)` or `K(N)`.
pub fn is_member(g: &SimilitudeMatrix, spec: &SubgroupSpec) -> bool {
    if !g.mu().is_one() {
        return false;
    }
    let n = BigInt::from(spec.level);
    g.entries().entries().all(|(pos, v)| match spec.kind.slot_weight(pos) {
        0 => v.is_integer(),
        1 => v.is_integer() && v.to_integer().is_multiple_of(&n),
        // N·v integral: the denominator divides N.
        _ => (v * Rational::from_integer(n.clone())).is_integer(),
    })
}

/// Local data `(p, r_p, kind)` describing `B_p`, `Γ²_{0,p}`, `Q_p` or `K_p`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ValuationPattern {
    prime: u64,
    exponent: u32,
    pub kind: SubgroupKind,
}

impl ValuationPattern {
    pub fn new(kind: SubgroupKind, prime: u64, exponent: u32) -> Result<Self, SymplecticError> {
        if !crate::sums::is_prime(prime) {
            return Err(SymplecticError::NotPrime(prime));
        }
        if exponent == 0 {
            return Err(SymplecticError::PrimeDoesNotDivide { prime, level: 1 });
        }
        Ok(Self { prime, exponent, kind })
    }

    /// The pattern at `p` for level `N`, with `r_p` the exact power of `p` in `N`.
    pub fn for_level(kind: SubgroupKind, level: u64, prime: u64) -> Result<Self, SymplecticError> {
        if !crate::sums::is_prime(prime) {
            return Err(SymplecticError::NotPrime(prime));
        }
        let r = valuation_u64(level, prime);
        if r == 0 {
            return Err(SymplecticError::PrimeDoesNotDivide { prime, level });
        }
        Ok(Self { prime, exponent: r, kind })
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn exponent(&self) -> u32 {
        self.exponent
    }
}

/// `p`-adic valuation of a rational; `None` stands for `+∞` (the zero entry).
pub fn padic_valuation(v: &Rational, p: u64) -> Option<i64> {
    if v.is_zero() {
        return None;
    }
    let p = BigInt::from(p);
    Some(valuation_big(v.numer(), &p) - valuation_big(v.denom(), &p))
}

fn valuation_big(n: &BigInt, p: &BigInt) -> i64 {
    let mut n = n.abs();
    let mut k = 0;
    loop {
        let (q, r) = n.div_rem(p);
        if !r.is_zero() {
            return k;
        }
        n = q;
        k += 1;
    }
}

fn valuation_u64(mut n: u64, p: u64) -> u32 {
    let mut k = 0;
    while n > 0 && n.is_multiple_of(p) {
        n /= p;
        k += 1;
    }
    k
}

/// Local membership at `p`: `μ = 1` and every entry meets its valuation lower bound.
pub fn is_local_member(g: &SimilitudeMatrix, pat: &ValuationPattern) -> bool {
    if !g.mu().is_one() {
        return false;
    }
    let r = i64::from(pat.exponent);
    g.entries().entries().all(|(pos, v)| {
        let bound = pat.kind.slot_weight(pos) * r;
        padic_valuation(v, pat.prime).is_none_or(|val| val >= bound)
    })
}

/// Prime factorization by trial division, ascending primes.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2;
    while p * p <= n {
        if n.is_multiple_of(p) {
            let mut e = 0;
            while n.is_multiple_of(p) {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}
