//! Distribution helpers shared by the randomness and no-signaling checks.

use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Two-sided p-value of a standard normal statistic, erfc(|z|/√2).
pub fn normal_two_sided(z: f64) -> f64 {
    libm::erfc(z.abs() / std::f64::consts::SQRT_2).min(1.0)
}

/// Two-sided p-value of a Student-t statistic with `dof` degrees of freedom.
pub fn student_t_two_sided(t: f64, dof: f64) -> Result<f64> {
    let d = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::domain(format!("Student t with {dof} dof: {e}")))?;
    Ok((2.0 * d.sf(t.abs())).min(1.0))
}

/// Upper-tail probability of a χ² statistic.
pub fn chi_squared_sf(x: f64, dof: f64) -> Result<f64> {
    let d = ChiSquared::new(dof).map_err(|e| Error::domain(format!("chi-squared: {e}")))?;
    Ok(d.sf(x))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample Kolmogorov–Smirnov test of `samples` against Uniform(0, 1),
/// with the asymptotic Kolmogorov distribution and Stephens' small-sample
/// correction of the scaling.
pub fn ks_uniform(samples: &[f64]) -> Result<KsResult> {
    if samples.is_empty() {
        return Err(Error::InsufficientData("KS test needs at least one sample".into()));
    }
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    let d = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let x = x.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - x).max(x - i as f64 / n)
        })
        .fold(0.0, f64::max);
    let root = n.sqrt();
    let lambda = (root + 0.12 + 0.11 / root) * d;
    Ok(KsResult {
        statistic: d,
        p_value: kolmogorov_sf(lambda),
    })
}

/// Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} exp(−2k²λ²).
fn kolmogorov_sf(lambda: f64) -> f64 {
    if lambda < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let term = sign * (-2.0 * (k * k) as f64 * lambda * lambda).exp();
        sum += term;
        if term.abs() < 1e-16 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}
