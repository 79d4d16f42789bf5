//! Closed-form competitive-ratio bounds.
//!
//! The iROBD upper bounds hold up to an unspecified constant; the values
//! returned here are the expressions inside the `O(·)`.

use serde::Serialize;

use crate::error::{Error, Result};

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be positive and finite, got {x}")))
    }
}

fn non_negative(name: &str, x: f64) -> Result<()> {
    if x >= 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be non-negative and finite, got {x}")))
    }
}

/// `max{1/λ, (m + λ)/(m + (1 − β)λ)}`, requiring `m + (1 − β)λ > 0`.
fn robd_factor(m: f64, beta: f64, lambda: f64) -> Result<f64> {
    let den = m + (1.0 - beta) * lambda;
    if !(den > 0.0) {
        return Err(Error::invalid(format!(
            "weight {lambda} is outside the admissible range (denominator {den:e})"
        )));
    }
    Ok((1.0 / lambda).max((m + lambda) / den))
}

/// ROBD ratio for scalar-Lipschitz `δ` with `Lip(δ) = 1 + L`:
/// `max{1/λ, (m + λ)/(m − L(L + 2)λ)}`.
pub fn bound_cor1(m: f64, l: f64, lambda: f64) -> Result<f64> {
    positive("m", m)?;
    non_negative("L", l)?;
    positive("lambda", lambda)?;
    robd_factor(m, (1.0 + l).powi(2), lambda)
}

/// The minimizing weight of [`bound_cor1`] and the resulting value.
pub fn bound_cor1_opt(m: f64, l: f64) -> Result<(f64, f64)> {
    positive("m", m)?;
    non_negative("L", l)?;
    let a = m + 2.0 * l + l * l;
    // Rationalized root of λ² + aλ − m = 0, stable for large a.
    let lambda = 2.0 * m / (a + (a * a + 4.0 * m).sqrt());
    let r = (2.0 * l + l * l) / m;
    let value = 0.5 * (1.0 + r + ((1.0 + r).powi(2) + 4.0 / m).sqrt());
    Ok((lambda, value))
}

/// `(l + 2p²L²)^k · max{1/λ, (m + λ)/(m + (1 − p²L²)λ)}`.
pub fn bound_thm1(m: f64, l: f64, p: usize, lip: f64, k: usize, lambda: f64) -> Result<f64> {
    positive("m", m)?;
    positive("l", l)?;
    non_negative("L", lip)?;
    positive("lambda", lambda)?;
    if p == 0 {
        return Err(Error::invalid("memory length must be at least 1"));
    }
    let b = (p * p) as f64 * lip * lip;
    Ok((l + 2.0 * b).powi(k as i32) * robd_factor(m, b, lambda)?)
}

/// `(l + 2α²)^k · max{1/λ, (m + λ)/(m + (1 − α²)λ)}`.
pub fn bound_thm2(m: f64, l: f64, alpha: f64, k: usize, lambda: f64) -> Result<f64> {
    positive("m", m)?;
    positive("l", l)?;
    non_negative("alpha", alpha)?;
    positive("lambda", lambda)?;
    let b = alpha * alpha;
    Ok((l + 2.0 * b).powi(k as i32) * robd_factor(m, b, lambda)?)
}

/// `m(α^{2k} − 1)/(α² − 1)`, summed directly when `α` is close to 1.
pub fn lower_bound_thm3(m: f64, alpha: f64, k: usize) -> Result<f64> {
    positive("m", m)?;
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::invalid(format!("alpha must exceed 1, got {alpha}")));
    }
    if k == 0 {
        return Err(Error::invalid("delay must be at least 1"));
    }
    let a2 = alpha * alpha;
    if a2 - 1.0 < 1e-4 {
        let mut term = 1.0;
        let mut sum = 0.0;
        for _ in 0..k {
            sum += term;
            term *= a2;
        }
        Ok(m * sum)
    } else {
        Ok(m * (a2.powi(k as i32) - 1.0) / (a2 - 1.0))
    }
}

/// `½(1 + (α² − 1)/m + √((1 + (α² − 1)/m)² + 4/m))`.
pub fn robd_linear_ratio_prior(m: f64, alpha: f64) -> Result<f64> {
    positive("m", m)?;
    non_negative("alpha", alpha)?;
    let r = (alpha * alpha - 1.0) / m;
    Ok(0.5 * (1.0 + r + ((1.0 + r).powi(2) + 4.0 / m).sqrt()))
}

/// A named bound evaluation, for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct BoundValue {
    pub name: &'static str,
    pub value: f64,
    /// Weight at which the value is attained, for the optimized forms.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
    /// False for the `O(·)` expressions whose constant is not fixed.
    pub exact: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cor1_known_values() {
        let (lam, v) = bound_cor1_opt(1.0, 0.0).unwrap();
        assert!((lam - (5f64.sqrt() - 1.0) / 2.0).abs() < 1e-15);
        assert!((v - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        let (_, v) = bound_cor1_opt(1.0, 1.0).unwrap();
        assert!((v - (2.0 + 5f64.sqrt())).abs() < 1e-12);
    }

    #[test]
    fn branches_balance_at_optimum() {
        for &(m, l) in &[(1.0, 0.0), (2.0, 0.5), (0.5, 1.0), (4.0, 0.3)] {
            let (lam, v) = bound_cor1_opt(m, l).unwrap();
            let a = 1.0 / lam;
            let b = (m + lam) / (m - l * (l + 2.0) * lam);
            assert!((a - b).abs() < 1e-12 * a.max(1.0), "{m} {l}: {a} {b}");
            assert!((bound_cor1(m, l, lam).unwrap() - v).abs() < 1e-12 * v);
        }
    }

    #[test]
    fn thm3_near_one_is_continuous() {
        let a = lower_bound_thm3(2.0, 1.0 + 1e-9, 5).unwrap();
        assert!((a - 10.0).abs() < 1e-6);
        let b = lower_bound_thm3(2.0, 1.0 + 5e-5 + 1e-9, 5).unwrap();
        let c = lower_bound_thm3(2.0, 1.0 + 5e-5 - 1e-9, 5).unwrap();
        assert!((b - c).abs() < 1e-6);
    }

    #[test]
    fn domain_errors() {
        assert!(bound_cor1(1.0, 1.0, 1.0).is_err());
        assert!(bound_thm1(1.0, 1.0, 1, 2.0, 1, 1.0).is_err());
        assert!(lower_bound_thm3(1.0, 1.0, 2).is_err());
    }
}
