//! q-expansion of the discriminant `Δ = q Π_{n≥1} (1 − qⁿ)²⁴`.

use super::EigenformError;

/// Largest supported `nterms`; the series products are quadratic in it.
pub const MAX_DELTA_TERMS: usize = 20_000;

/// `Π (1 − qⁿ)` truncated to `len` terms, from the pentagonal number theorem:
/// `Σ_k (−1)^k q^{k(3k−1)/2}` over all integers `k`.
pub fn euler_product(len: usize) -> Vec<i128> {
    let mut out = vec![0i128; len];
    if len == 0 {
        return out;
    }
    out[0] = 1;
    for k in 1usize.. {
        let sign = if k % 2 == 0 { 1 } else { -1 };
        let lo = k * (3 * k - 1) / 2;
        let hi = k * (3 * k + 1) / 2;
        if lo >= len {
            break;
        }
        out[lo] += sign;
        if hi < len {
            out[hi] += sign;
        }
    }
    out
}

fn mul_truncated(a: &[i128], b: &[i128]) -> Result<Vec<i128>, EigenformError> {
    let len = a.len().min(b.len());
    let mut out = vec![0i128; len];
    for (i, &x) in a.iter().enumerate().take(len) {
        if x == 0 {
            continue;
        }
        for (j, &y) in b.iter().enumerate().take(len - i) {
            if y == 0 {
                continue;
            }
            let term = x.checked_mul(y).ok_or(EigenformError::CoefficientOverflow)?;
            out[i + j] = out[i + j].checked_add(term).ok_or(EigenformError::CoefficientOverflow)?;
        }
    }
    Ok(out)
}

/// `τ(n)` for `0 ≤ n ≤ nterms`, with `τ(0) = 0`.
pub fn delta_qexp(nterms: usize) -> Result<Vec<i128>, EigenformError> {
    if nterms == 0 || nterms > MAX_DELTA_TERMS {
        return Err(EigenformError::BadTermCount(nterms));
    }
    // τ(n) is the coefficient of q^{n−1} in Π(1 − qⁿ)²⁴.
    let p1 = euler_product(nterms);
    let p2 = mul_truncated(&p1, &p1)?;
    let p4 = mul_truncated(&p2, &p2)?;
    let p8 = mul_truncated(&p4, &p4)?;
    let p16 = mul_truncated(&p8, &p8)?;
    let p24 = mul_truncated(&p16, &p8)?;
    let mut tau = Vec::with_capacity(nterms + 1);
    tau.push(0);
    tau.extend(p24);
    Ok(tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent route: multiply out Π_{n ≤ L} (1 − qⁿ) factor by factor, 24 times.
    fn naive_eta24(len: usize) -> Vec<i128> {
        let mut s = vec![0i128; len];
        s[0] = 1;
        for _ in 0..24 {
            for n in 1..len {
                for i in (n..len).rev() {
                    s[i] -= s[i - n];
                }
            }
        }
        s
    }

    #[test]
    fn pentagonal_matches_direct_product() {
        let len = 60;
        let mut direct = vec![0i128; len];
        direct[0] = 1;
        for n in 1..len {
            for i in (n..len).rev() {
                direct[i] -= direct[i - n];
            }
        }
        assert_eq!(euler_product(len), direct);
    }

    #[test]
    fn leading_coefficients_match_eta_product_oracle() {
        let oracle = naive_eta24(12);
        let tau = delta_qexp(12).unwrap();
        assert_eq!(&tau[1..], &oracle[..]);
        assert_eq!(tau[1], 1);
        assert_eq!(tau[2], -24);
        assert_eq!(tau[3], 252);
    }

    #[test]
    fn term_count_bounds() {
        assert_eq!(delta_qexp(0), Err(EigenformError::BadTermCount(0)));
        assert!(delta_qexp(MAX_DELTA_TERMS + 1).is_err());
        assert_eq!(delta_qexp(1).unwrap(), vec![0, 1]);
    }
}
