//! Prime sums of normalized eigenvalues: second moments, cross sums, the
//! exceedance count `#{p ≤ x : |λ_G(p)| > c}`, and the sign-change report.
//!
//! Every sum runs over `p ≤ x, p ∉ S` and is normalized by `x / ln x`.

mod sieve;

pub use sieve::{chebyshev_theta, is_prime, prime_pi, sieve, PrimeTable};

use std::collections::BTreeSet;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::eigenform::LambdaStream;
use crate::satake::WEISSAUER_SLACK;

/// Terms per parallel chunk. Chunk boundaries depend only on this constant,
/// so results do not depend on the thread count.
pub const CHUNK: usize = 1 << 14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SumsError {
    #[error("x = {x} exceeds the prime table limit {limit}")]
    OutOfRange { x: u64, limit: u64 },
    #[error("stream `{label}` has no value at p = {p}")]
    MissingCoefficient { label: String, p: u64 },
    #[error("threshold c = {0} must lie in (0, 4)")]
    BadThreshold(f64),
    #[error("cutoff x = {0} must be at least 2")]
    BadCutoff(u64),
}

/// Neumaier's compensated accumulator.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn merge(&mut self, other: Neumaier) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Compensated sum of `values` with the default chunking.
pub fn compensated_sum(values: &[f64]) -> f64 {
    compensated_sum_chunked(values, CHUNK)
}

/// Compensated sum, reduced in parallel over chunks of `chunk` terms and
/// combined sequentially in chunk order.
pub fn compensated_sum_chunked(values: &[f64], chunk: usize) -> f64 {
    let parts: Vec<Neumaier> = values
        .par_chunks(chunk.max(1))
        .map(|c| {
            let mut acc = Neumaier::default();
            c.iter().for_each(|&v| acc.add(v));
            acc
        })
        .collect();
    let mut total = Neumaier::default();
    parts.into_iter().for_each(|p| total.merge(p));
    total.value()
}

/// `x / ln x`.
pub fn normalizer(x: u64) -> f64 {
    let x = x as f64;
    x / x.ln()
}

/// A prime sum and its ratio to `x / ln x`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioSum {
    pub sum: f64,
    pub ratio: f64,
}

impl RatioSum {
    fn new(sum: f64, x: u64) -> Self {
        Self { sum, ratio: sum / normalizer(x) }
    }
}

/// The primes `p ≤ x, p ∉ S` together with the values of each stream on them.
struct Aligned {
    primes: Vec<u64>,
    columns: Vec<Vec<f64>>,
}

fn align(streams: &[&LambdaStream], t: &PrimeTable, x: u64, s: &BTreeSet<u64>) -> Result<Aligned, SumsError> {
    if x < 2 {
        return Err(SumsError::BadCutoff(x));
    }
    if x > t.limit {
        return Err(SumsError::OutOfRange { x, limit: t.limit });
    }
    let primes: Vec<u64> = t.primes_up_to(x).iter().copied().filter(|p| !s.contains(p)).collect();
    let columns = streams
        .iter()
        .map(|stream| {
            let mut it = stream.values.iter().peekable();
            primes
                .iter()
                .map(|&p| {
                    while it.next_if(|(q, _)| *q < p).is_some() {}
                    match it.peek() {
                        Some(&&(q, v)) if q == p => Ok(v),
                        _ => Err(SumsError::MissingCoefficient { label: stream.label.clone(), p }),
                    }
                })
                .collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(Aligned { primes, columns })
}

fn map_sum(a: &Aligned, f: impl Fn(usize) -> f64 + Sync + Send) -> f64 {
    let terms: Vec<f64> = (0..a.primes.len()).into_par_iter().map(f).collect();
    compensated_sum(&terms)
}

/// `Σ_{p ≤ x, p ∉ S} λ(p)²`.
pub fn sum_square(stream: &LambdaStream, t: &PrimeTable, x: u64, s: &BTreeSet<u64>) -> Result<RatioSum, SumsError> {
    let a = align(&[stream], t, x, s)?;
    let v = &a.columns[0];
    Ok(RatioSum::new(map_sum(&a, |i| v[i] * v[i]), x))
}

/// `Σ_{p ≤ x, p ∉ S} λ_F(p) λ_G(p)`.
pub fn sum_cross(
    f: &LambdaStream,
    g: &LambdaStream,
    t: &PrimeTable,
    x: u64,
    s: &BTreeSet<u64>,
) -> Result<RatioSum, SumsError> {
    let a = align(&[f, g], t, x, s)?;
    let (u, v) = (&a.columns[0], &a.columns[1]);
    Ok(RatioSum::new(map_sum(&a, |i| u[i] * v[i]), x))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Exceedance {
    pub count: usize,
    pub alpha_hat: f64,
}

fn check_threshold(c: f64) -> Result<(), SumsError> {
    if c > 0.0 && c < 4.0 {
        Ok(())
    } else {
        Err(SumsError::BadThreshold(c))
    }
}

/// `#{p ≤ x, p ∉ S : |λ(p)| > c}` (strict) and its ratio to `x / ln x`.
pub fn exceedance_count(
    stream: &LambdaStream,
    t: &PrimeTable,
    x: u64,
    c: f64,
    s: &BTreeSet<u64>,
) -> Result<Exceedance, SumsError> {
    check_threshold(c)?;
    let a = align(&[stream], t, x, s)?;
    let count = a.columns[0].par_iter().filter(|v| v.abs() > c).count();
    Ok(Exceedance { count, alpha_hat: count as f64 / normalizer(x) })
}

/// `c²(16α + m − 16) / 512`, unclamped.
pub fn density_bound(c: f64, alpha: f64, m: u32) -> f64 {
    c * c * (16.0 * alpha + m as f64 - 16.0) / 512.0
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Ratios {
    pub square_f: f64,
    pub square_g: f64,
    pub cross: f64,
    pub s_minus: f64,
}

/// Everything the sign-change argument needs at a single cutoff.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PrimeSumReport {
    pub x: u64,
    pub excluded: Vec<u64>,
    pub sum_square_f: f64,
    pub sum_square_g: f64,
    pub sum_cross: f64,
    pub s_minus: f64,
    pub count_exceed: usize,
    pub count_neg_product: usize,
    pub density: f64,
    pub bound: f64,
    pub m: u32,
    pub c: f64,
    pub alpha: f64,
    /// Number of primes summed over: `π(x) − |S ∩ [2, x]|`.
    pub prime_count: usize,
    pub ratios: Ratios,
    /// `|λ_F|, |λ_G| ≤ 4` at every prime summed.
    pub weissauer_holds: bool,
    /// `S⁻(x) ≤ 512 · #{λ_F λ_G < 0}`.
    pub proof_inequality_holds: bool,
    pub density_meets_bound: bool,
    /// `α̂ > 15/16` and both streams within the Weissauer bound.
    pub hypotheses_hold: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_at: Option<String>,
}

/// Builds the [`PrimeSumReport`] for `(F, G)` at cutoff `x`. `m` is the
/// second-moment constant of `F`, supplied by the caller.
pub fn sign_change_report(
    f: &LambdaStream,
    g: &LambdaStream,
    t: &PrimeTable,
    x: u64,
    c: f64,
    m: u32,
    s: &BTreeSet<u64>,
) -> Result<PrimeSumReport, SumsError> {
    check_threshold(c)?;
    let a = align(&[f, g], t, x, s)?;
    let (u, v) = (&a.columns[0], &a.columns[1]);
    let n = normalizer(x);

    let sum_square_f = map_sum(&a, |i| u[i] * u[i]);
    let sum_square_g = map_sum(&a, |i| v[i] * v[i]);
    let sum_cross = map_sum(&a, |i| u[i] * v[i]);
    let s_minus = map_sum(&a, |i| {
        let q = u[i] * v[i];
        q * q - 16.0 * q
    });
    let count_neg_product = (0..a.primes.len()).into_par_iter().filter(|&i| u[i] * v[i] < 0.0).count();
    let count_exceed = v.par_iter().filter(|w| w.abs() > c).count();
    let alpha = count_exceed as f64 / n;
    let density = count_neg_product as f64 / n;
    let bound = density_bound(c, alpha, m);
    let within = |w: &f64| w.abs() <= 4.0 + WEISSAUER_SLACK;
    let weissauer_holds = u.iter().all(within) && v.iter().all(within);

    Ok(PrimeSumReport {
        x,
        excluded: s.iter().copied().collect(),
        sum_square_f,
        sum_square_g,
        sum_cross,
        s_minus,
        count_exceed,
        count_neg_product,
        density,
        bound,
        m,
        c,
        alpha,
        prime_count: a.primes.len(),
        ratios: Ratios {
            square_f: sum_square_f / n,
            square_g: sum_square_g / n,
            cross: sum_cross / n,
            s_minus: s_minus / n,
        },
        weissauer_holds,
        proof_inequality_holds: s_minus <= 512.0 * count_neg_product as f64,
        density_meets_bound: density >= bound,
        hypotheses_hold: alpha > 15.0 / 16.0 && weissauer_holds,
        generated_at: None,
    })
}

/// `(p, λ_F(p), λ_G(p))` for `p ≤ x, p ∉ S`.
pub fn per_prime_rows(
    f: &LambdaStream,
    g: &LambdaStream,
    t: &PrimeTable,
    x: u64,
    s: &BTreeSet<u64>,
) -> Result<Vec<(u64, f64, f64)>, SumsError> {
    let a = align(&[f, g], t, x, s)?;
    Ok(a.primes.iter().enumerate().map(|(i, &p)| (p, a.columns[0][i], a.columns[1][i])).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ProductMomentOutcome {
    /// `Σ λ_F² λ_G² / (x / ln x)`.
    pub lhs_ratio: f64,
    /// `c²(16α̂ + m − 16)`.
    pub coefficient: f64,
    pub alpha: f64,
    pub holds: bool,
}

/// Whether `Σ λ_F² λ_G² ≥ (c²(16α̂ + m − 16) − ε) · x / ln x`.
#[allow(clippy::too_many_arguments)]
pub fn product_moment_check(
    f: &LambdaStream,
    g: &LambdaStream,
    t: &PrimeTable,
    x: u64,
    c: f64,
    m: u32,
    epsilon: f64,
    s: &BTreeSet<u64>,
) -> Result<ProductMomentOutcome, SumsError> {
    check_threshold(c)?;
    let a = align(&[f, g], t, x, s)?;
    let (u, v) = (&a.columns[0], &a.columns[1]);
    let lhs_ratio = map_sum(&a, |i| (u[i] * v[i]).powi(2)) / normalizer(x);
    let count = v.par_iter().filter(|w| w.abs() > c).count();
    let alpha = count as f64 / normalizer(x);
    let coefficient = 512.0 * density_bound(c, alpha, m);
    Ok(ProductMomentOutcome { lhs_ratio, coefficient, alpha, holds: lhs_ratio >= coefficient - epsilon })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant(v: f64, t: &PrimeTable) -> LambdaStream {
        LambdaStream::constant(v, t, t.limit)
    }

    fn none() -> BTreeSet<u64> {
        BTreeSet::new()
    }

    #[test]
    fn neumaier_recovers_cancelled_terms() {
        let v = [1.0, 1e100, 1.0, -1e100];
        assert_eq!(v.iter().sum::<f64>(), 0.0);
        assert_eq!(compensated_sum(&v), 2.0);
    }

    #[test]
    fn chunking_does_not_change_the_sum() {
        let v: Vec<f64> = (1..200_000).map(|i| ((i as f64) * 0.37).sin() / i as f64).collect();
        let reference = compensated_sum_chunked(&v, v.len());
        for chunk in [1, 7, 1000, CHUNK, 65_536] {
            let s = compensated_sum_chunked(&v, chunk);
            assert!((s - reference).abs() <= 1e-9 * reference.abs(), "chunk {chunk}");
        }
    }

    #[test]
    fn constant_one_counts_primes() {
        let t = sieve(1000);
        let r = sum_square(&constant(1.0, &t), &t, 1000, &none()).unwrap();
        assert_eq!(r.sum, 168.0);
        assert!((r.ratio - 168.0 / normalizer(1000)).abs() < 1e-12);
    }

    #[test]
    fn zero_stream_and_bilinearity() {
        let t = sieve(5000);
        let z = constant(0.0, &t);
        assert_eq!(sum_square(&z, &t, 5000, &none()).unwrap().sum, 0.0);
        let f = LambdaStream::new("f", t.primes.iter().map(|&p| (p, ((p as f64).sqrt()).cos() * 2.0)).collect());
        let g = LambdaStream::new("g", t.primes.iter().map(|&p| (p, ((p as f64) * 0.1).sin() * 3.0)).collect());
        let base = sum_cross(&f, &g, &t, 5000, &none()).unwrap().sum;
        let scaled = sum_cross(&f.scaled(-2.5), &g, &t, 5000, &none()).unwrap().sum;
        assert!((scaled + 2.5 * base).abs() < 1e-9 * base.abs().max(1.0));
        let same = sum_cross(&f, &f, &t, 5000, &none()).unwrap();
        assert_eq!(same, sum_square(&f, &t, 5000, &none()).unwrap());
    }

    #[test]
    fn missing_value_is_reported() {
        let t = sieve(100);
        let mut f = constant(1.0, &t);
        f.values.retain(|&(p, _)| p != 31);
        assert_eq!(
            sum_square(&f, &t, 100, &none()),
            Err(SumsError::MissingCoefficient { label: f.label.clone(), p: 31 })
        );
        // but fine once 31 is excluded
        assert!(sum_square(&f, &t, 100, &BTreeSet::from([31])).is_ok());
        assert_eq!(sum_square(&f, &t, 101, &none()), Err(SumsError::OutOfRange { x: 101, limit: 100 }));
    }

    #[test]
    fn exceedance_is_strict() {
        let t = sieve(10_000);
        let one = constant(1.0, &t);
        assert_eq!(exceedance_count(&one, &t, 10_000, 1.0, &none()).unwrap().count, 0);
        let e = exceedance_count(&one, &t, 10_000, 0.5, &none()).unwrap();
        assert_eq!(e.count, 1229);
        assert!(exceedance_count(&one, &t, 10_000, 4.0, &none()).is_err());
        assert!(exceedance_count(&one, &t, 10_000, 0.0, &none()).is_err());
    }

    #[test]
    fn bound_arithmetic() {
        assert_eq!(density_bound(0.5, 15.0 / 16.0, 1), 0.0);
        assert!((density_bound(0.5, 1.0, 1) - 0.25 / 512.0).abs() < 1e-18);
        assert!((density_bound(3.9, 1.0, 2) - 3.9 * 3.9 * 2.0 / 512.0).abs() < 1e-15);
    }

    #[test]
    fn opposite_streams_always_change_sign() {
        let t = sieve(20_000);
        let f = LambdaStream::new("f", t.primes.iter().map(|&p| (p, 1.0 + (p % 3) as f64)).collect());
        let g = f.scaled(-1.0);
        let s = BTreeSet::from([2, 3, 5]);
        let r = sign_change_report(&f, &g, &t, 20_000, 0.5, 1, &s).unwrap();
        assert_eq!(r.prime_count, t.primes.len() - 3);
        assert_eq!(r.count_neg_product, r.prime_count);
        assert!(r.density_meets_bound);
        assert!(r.proof_inequality_holds);
        assert_eq!(r.excluded, vec![2, 3, 5]);
    }

    #[test]
    fn equal_streams_never_change_sign() {
        let t = sieve(20_000);
        let f = LambdaStream::new("f", t.primes.iter().map(|&p| (p, (p as f64).cos())).collect());
        let r = sign_change_report(&f, &f, &t, 20_000, 0.5, 2, &none()).unwrap();
        assert_eq!(r.count_neg_product, 0);
        assert!(r.bound <= 0.0);
        assert!(r.s_minus <= 0.0);
        assert!(r.proof_inequality_holds);
        assert!(!r.hypotheses_hold);
    }

    #[test]
    fn product_moment_examples() {
        let t = sieve(10_000);
        let one = constant(1.0, &t);
        let o = product_moment_check(&one, &one, &t, 10_000, 0.5, 1, 0.0, &none()).unwrap();
        assert!((o.lhs_ratio - o.alpha).abs() < 1e-12);
        assert!((o.coefficient - 0.25 * (16.0 * o.alpha - 15.0)).abs() < 1e-12);
        assert!(o.holds);
    }

    #[test]
    fn report_serializes_camel_case() {
        let t = sieve(100);
        let one = constant(1.0, &t);
        let r = sign_change_report(&one, &one, &t, 100, 0.5, 1, &none()).unwrap();
        let json = serde_json::to_value(&r).unwrap();
        for key in ["sumSquareF", "sumSquareG", "sumCross", "sMinus", "countExceed", "countNegProduct", "density", "bound"] {
            assert!(json.get(key).is_some(), "{key}");
        }
        assert!(json.get("generatedAt").is_none());
    }
}
