//! Predictability budget of the setting generator.
//!
//! τ₁ comes from the largest observed bias. τ₂ adds the worst-case bias
//! excursions caused by comparator-threshold noise and by temperature drift
//! of the threshold. Voltages are in millivolts.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest observed bias over all measurements and its standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasComponent {
    pub max_bias: f64,
    pub sigma: f64,
}

/// Bias as a function of the comparator threshold, B(v) = c0 + c1·v + c2·v².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BiasCurve {
    pub c0: f64,
    pub c1: f64,
    pub c2: f64,
}

impl BiasCurve {
    /// Quadratic with its extremum at `vertex_mv`.
    pub fn centred(vertex_mv: f64, curvature: f64) -> Self {
        BiasCurve {
            c0: curvature * vertex_mv * vertex_mv,
            c1: -2.0 * curvature * vertex_mv,
            c2: curvature,
        }
    }

    pub fn eval(&self, v: f64) -> f64 {
        self.c0 + v * (self.c1 + v * self.c2)
    }

    pub fn slope(&self, v: f64) -> f64 {
        self.c1 + 2.0 * self.c2 * v
    }

    /// Largest |B(v) − B(v_ref)| over v ∈ [lo, hi].
    pub fn max_deviation(&self, v_ref: f64, lo: f64, hi: f64) -> f64 {
        let b_ref = self.eval(v_ref);
        let mut candidates = vec![lo, hi];
        if self.c2 != 0.0 {
            let vertex = -self.c1 / (2.0 * self.c2);
            if (lo..=hi).contains(&vertex) {
                candidates.push(vertex);
            }
        }
        candidates
            .into_iter()
            .map(|v| (self.eval(v) - b_ref).abs())
            .fold(0.0, f64::max)
    }
}

/// Electrical noise around the threshold set point, described by error
/// functions a·(erf((μ − v)/(√2σ)) + 1) fitted to its rising and falling
/// slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdNoise {
    pub mu_rising_mv: f64,
    pub sigma_rising_mv: f64,
    pub mu_falling_mv: f64,
    pub sigma_falling_mv: f64,
    /// Threshold set point; defaults to the midpoint of the two means.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub set_point_mv: Option<f64>,
    pub curve: BiasCurve,
}

impl ThresholdNoise {
    pub fn set_point(&self) -> f64 {
        self.set_point_mv
            .unwrap_or(0.5 * (self.mu_rising_mv + self.mu_falling_mv))
    }

    /// Threshold range reachable within `confidence` standard deviations:
    /// [μ₁ − cσ₁, μ₂ + cσ₂].
    pub fn excursion(&self, confidence: f64) -> (f64, f64) {
        (
            self.mu_rising_mv - confidence * self.sigma_rising_mv,
            self.mu_falling_mv + confidence * self.sigma_falling_mv,
        )
    }

    /// Worst-case bias change inside the excursion range.
    pub fn predictability(&self, confidence: f64) -> f64 {
        let (lo, hi) = self.excursion(confidence);
        self.curve.max_deviation(self.set_point(), lo, hi)
    }
}

/// Threshold drift from temperature.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemperatureDrift {
    /// Temperature coefficients of every element shifting the threshold,
    /// in V/°C; they are assumed to add up.
    pub coefficients_v_per_c: Vec<f64>,
    /// Largest temperature excursion, °C.
    pub excursion_c: f64,
    /// Local bias-vs-threshold slope at the set point, per mV.
    pub bias_slope_per_mv: f64,
}

impl TemperatureDrift {
    /// Threshold shift in mV.
    pub fn threshold_shift_mv(&self) -> f64 {
        let total: f64 = self.coefficients_v_per_c.iter().map(|c| c.abs()).sum();
        total * 1e3 * self.excursion_c
    }

    pub fn predictability(&self) -> f64 {
        self.bias_slope_per_mv.abs() * self.threshold_shift_mv()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictabilityBudget {
    pub bias: BiasComponent,
    pub threshold: ThresholdNoise,
    pub temperature: TemperatureDrift,
    /// Sigma multiplier on the bias measurement.
    pub bias_confidence: f64,
    /// Sigma multiplier on the threshold noise.
    pub noise_confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetResult {
    /// Bias-only predictability.
    pub tau1: f64,
    pub threshold_component: f64,
    pub temperature_component: f64,
    /// τ₁ plus both physical components.
    pub tau2: f64,
}

impl PredictabilityBudget {
    /// The published device: bias and erf parameters as measured, the
    /// bias-vs-threshold curve as a quadratic centred at the set point.
    ///
    /// The curve itself is not tabulated; its curvature and the local slope
    /// are calibration inputs chosen to match the quoted worst-case
    /// components of 6.12e-4 (5σ noise) and 6.7e-6 (temperature).
    pub fn reference() -> Self {
        let (mu1, s1, mu2, s2) = (-9.09, 0.13, -8.48, 0.25);
        let set = 0.5 * (mu1 + mu2);
        PredictabilityBudget {
            bias: BiasComponent {
                max_bias: 8.74e-6,
                sigma: 8.33e-7,
            },
            threshold: ThresholdNoise {
                mu_rising_mv: mu1,
                sigma_rising_mv: s1,
                mu_falling_mv: mu2,
                sigma_falling_mv: s2,
                set_point_mv: Some(set),
                curve: BiasCurve::centred(set, 2.531e-4),
            },
            temperature: TemperatureDrift {
                coefficients_v_per_c: vec![1e-5, 1e-5],
                excursion_c: 0.15,
                bias_slope_per_mv: 2.233e-3,
            },
            bias_confidence: 2.0,
            noise_confidence: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("max bias", self.bias.max_bias),
            ("bias sigma", self.bias.sigma),
            ("rising sigma", self.threshold.sigma_rising_mv),
            ("falling sigma", self.threshold.sigma_falling_mv),
            ("temperature excursion", self.temperature.excursion_c),
            ("bias confidence", self.bias_confidence),
            ("noise confidence", self.noise_confidence),
        ];
        for (name, v) in nonneg {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be non-negative, got {v}")));
            }
        }
        if self.temperature.coefficients_v_per_c.iter().any(|c| !(*c >= 0.0)) {
            return Err(Error::domain("temperature coefficients must be non-negative"));
        }
        Ok(())
    }
}

/// τ₁ = max bias + confidence·σ; τ₂ = τ₁ + threshold + temperature
/// components. The components are summed, which assumes their effects add.
pub fn predictability_budget(budget: &PredictabilityBudget) -> Result<BudgetResult> {
    budget.validate()?;
    let tau1 = budget.bias.max_bias + budget.bias_confidence * budget.bias.sigma;
    let threshold_component = budget.threshold.predictability(budget.noise_confidence);
    let temperature_component = budget.temperature.predictability();
    let tau2 = tau1 + threshold_component + temperature_component;
    if tau2 > 0.5 {
        return Err(Error::domain(format!("total predictability {tau2} exceeds 1/2")));
    }
    Ok(BudgetResult {
        tau1,
        threshold_component,
        temperature_component,
        tau2,
    })
}

/// Predictability left after XOR-ing `depth` independent bits of
/// predictability τ each: 2^(k−1)·τ^k.
pub fn xor_reduction(tau: f64, depth: u32) -> Result<f64> {
    if !(0.0..=0.5).contains(&tau) {
        return Err(Error::domain(format!("tau {tau} outside [0, 1/2]")));
    }
    if depth < 1 {
        return Err(Error::domain("XOR depth must be at least 1"));
    }
    Ok(0.5 * (2.0 * tau).powi(depth as i32))
}
