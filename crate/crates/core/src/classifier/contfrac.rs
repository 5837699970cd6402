//! Commensurability of floating-point differences by continued fractions.
//!
//! A ratio `r` is accepted when some `s ≤ max_den` has `|s·r − p| ≤ tol` for
//! an integer `p`. Asking only that `|r − p/s| ≤ tol` would accept nearly
//! every real at these defaults (Dirichlet gives `|r − p/s| < 1/(s·max_den)`),
//! including `log 3/log 2`. The smallest such `s` is always a convergent
//! denominator, so only convergents are tried.

use crate::error::{Error, Result};

/// Convergents `p/s` of `x ≥ 0` with `s ≤ max_den`.
pub fn convergents(x: f64, max_den: u64) -> Vec<(u128, u64)> {
    let mut out = Vec::new();
    if !(x.is_finite() && x >= 0.0) {
        return out;
    }
    let (mut p0, mut s0, mut p1, mut s1) = (0u128, 1u128, 1u128, 0u128);
    let mut rest = x;
    for _ in 0..64 {
        let a = rest.floor();
        if a > 1e30 {
            break;
        }
        let a = a as u128;
        let (p2, s2) = (a.saturating_mul(p1).saturating_add(p0), a.saturating_mul(s1).saturating_add(s0));
        if s2 > u128::from(max_den) {
            break;
        }
        out.push((p2, s2 as u64));
        (p0, s0, p1, s1) = (p1, s1, p2, s2);
        let frac = rest - rest.floor();
        if frac < 1e-300 {
            break;
        }
        rest = 1.0 / frac;
    }
    out
}

/// Smallest `s ≤ max_den` with `|s·r − p| ≤ tol`.
pub fn integer_relation(r: f64, max_den: u64, tol: f64) -> Option<(u128, u64)> {
    convergents(r, max_den).into_iter().find(|&(_, s)| {
        let sr = s as f64 * r;
        (sr - sr.round()).abs() <= tol
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FloatCommensurability {
    /// `δ_min / lcm(s_i)`.
    pub generator: f64,
    /// Smallest positive difference.
    pub base: f64,
    /// `(p_i, s_i)` with `δ_i/δ_min ≈ p_i/s_i`, per positive difference.
    pub relations: Vec<(u128, u64)>,
    pub lcm: u64,
    /// Some relation needed a denominator above `max_den/10`.
    pub low_confidence: bool,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Lattice generator for `deltas`, if every nonzero ratio has an integer
/// relation with denominator at most `max_den` and their lcm stays within
/// `max_den`.
pub fn commensurability_float(deltas: &[f64], max_den: u64, tol: f64) -> Result<Option<FloatCommensurability>> {
    if max_den == 0 {
        return Err(Error::NonPositiveParameter { name: "max_den" });
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::NonPositiveParameter { name: "tol" });
    }
    if let Some(bad) = deltas.iter().find(|d| !d.is_finite()) {
        return Err(Error::InvalidArgument(format!("non-finite difference {bad}")));
    }
    let mut positive: Vec<f64> = deltas.iter().map(|d| d.abs()).filter(|&d| d > 0.0).collect();
    if positive.is_empty() {
        return Ok(None);
    }
    positive.sort_by(f64::total_cmp);
    positive.dedup();
    let base = positive[0];
    let mut relations = Vec::with_capacity(positive.len());
    let mut lcm = 1u64;
    for d in &positive {
        let Some((p, s)) = integer_relation(d / base, max_den, tol) else { return Ok(None) };
        lcm = match (lcm / gcd(lcm, s)).checked_mul(s) {
            Some(l) if l <= max_den => l,
            _ => return Ok(None),
        };
        relations.push((p, s));
    }
    let low_confidence = relations.iter().any(|&(_, s)| s > max_den / 10);
    Ok(Some(FloatCommensurability { generator: base / lcm as f64, base, relations, lcm, low_confidence }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn convergents_of_known_numbers() {
        assert_eq!(convergents(std::f64::consts::PI, 1000), vec![(3, 1), (22, 7), (333, 106), (355, 113)]);
        assert_eq!(convergents(2.5, 100), vec![(2, 1), (5, 2)]);
        assert_eq!(convergents(1.0, 10), vec![(1, 1)]);
    }

    #[test]
    fn log_ratio_has_no_relation() {
        let r = 3f64.ln() / 2f64.ln();
        // the plain distance test is fooled by a large convergent
        let (p, s) = convergents(r, 1_000_000).into_iter().last().unwrap();
        assert!((r - p as f64 / s as f64).abs() < 1e-9);
        assert_eq!(integer_relation(r, 1_000_000, 1e-9), None);
        let l = 2f64.ln();
        assert_eq!(commensurability_float(&[-3f64.ln(), -l, 0.0, l, 3f64.ln()], 1_000_000, 1e-9).unwrap(), None);
    }

    #[test]
    fn exact_multiples() {
        let c = commensurability_float(&[-2.1, -1.4, -0.7, 0.0, 0.7, 1.4, 2.1], 1_000_000, 1e-9).unwrap().unwrap();
        assert!((c.generator - 0.7).abs() < 1e-12);
        assert_eq!(c.relations, vec![(1, 1), (2, 1), (3, 1)]);
        assert!(!c.low_confidence);

        let golden = (5f64.sqrt() - 1.0) / 2.0;
        let g = -golden.ln();
        let c = commensurability_float(&[-2.0 * g, -g, 0.0, g, 2.0 * g], 1_000_000, 1e-9).unwrap().unwrap();
        assert!((c.generator - g).abs() < 1e-12);

        let l = 2f64.ln();
        let c = commensurability_float(&[0.0, l, 2.0 * l, -l, -2.0 * l], 1_000_000, 1e-9).unwrap().unwrap();
        assert!((c.generator - l).abs() < 1e-12);
    }

    #[test]
    fn refines_to_the_lattice_generator() {
        // 0.5 and 0.75: generator 0.25
        let c = commensurability_float(&[0.0, 0.5, 0.75], 1_000_000, 1e-9).unwrap().unwrap();
        assert!((c.generator - 0.25).abs() < 1e-15);
        assert_eq!(c.lcm, 2);
    }

    #[test]
    fn low_confidence_and_lcm_limit() {
        let c = commensurability_float(&[1.0, 1.0 + 1.0 / 200_001.0], 1_000_000, 1e-9).unwrap().unwrap();
        assert!(c.low_confidence);
        assert_eq!(commensurability_float(&[1.0, 1.0 + 1.0 / 999_983.0, 1.0 + 1.0 / 999_979.0], 1_000_000, 1e-9).unwrap(), None);
    }

    #[test]
    fn degenerate_and_invalid() {
        assert_eq!(commensurability_float(&[0.0], 10, 1e-9).unwrap(), None);
        assert_eq!(commensurability_float(&[], 10, 1e-9).unwrap(), None);
        assert!(commensurability_float(&[1.0], 0, 1e-9).is_err());
        assert!(commensurability_float(&[1.0], 10, 0.0).is_err());
        assert!(commensurability_float(&[f64::NAN], 10, 1e-9).is_err());
    }
}
