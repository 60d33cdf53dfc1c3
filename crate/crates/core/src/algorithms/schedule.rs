//! Step-size schedules `α_k` and inner-tracking weights `β_k`.

use crate::error::{config_err, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepSize {
    /// `α_k = a`.
    Constant(f64),
    /// `α_k = a / √K` for a fixed horizon `K`.
    ConstantSqrtK { a: f64, horizon: usize },
    /// `α_k = a / (k + b)^exponent`.
    Polynomial { a: f64, b: f64, exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BetaRule {
    /// `β_k = β α_k`.
    Proportional(f64),
    /// `β_k = β`.
    Constant(f64),
    /// `β_k = scale / (k + offset)^exponent`.
    Polynomial { scale: f64, offset: f64, exponent: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepSchedule {
    pub alpha: StepSize,
    pub beta: BetaRule,
}

impl StepSchedule {
    pub fn new(alpha: StepSize, beta: BetaRule) -> Result<Self> {
        let s = Self { alpha, beta };
        s.validate()?;
        Ok(s)
    }

    /// Constant `α` with the default tracking weight `β_k = α_k / n`.
    pub fn constant_default(alpha: f64, agents: usize) -> Result<Self> {
        Self::new(StepSize::Constant(alpha), BetaRule::Proportional(1.0 / agents.max(1) as f64))
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                config_err(format!("{name} must be positive and finite, got {v}"))
            }
        };
        let nonneg = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                config_err(format!("{name} must be nonnegative and finite, got {v}"))
            }
        };
        match self.alpha {
            StepSize::Constant(a) => pos("alpha", a)?,
            StepSize::ConstantSqrtK { a, horizon } => {
                pos("alpha_a", a)?;
                if horizon == 0 {
                    return config_err("alpha horizon must be at least 1");
                }
            }
            StepSize::Polynomial { a, b, exponent } => {
                pos("alpha_a", a)?;
                nonneg("alpha_b", b)?;
                nonneg("alpha_exponent", exponent)?;
            }
        }
        match self.beta {
            BetaRule::Proportional(b) | BetaRule::Constant(b) => pos("beta", b)?,
            BetaRule::Polynomial { scale, offset, exponent } => {
                pos("beta_scale", scale)?;
                nonneg("beta_offset", offset)?;
                nonneg("beta_exponent", exponent)?;
            }
        }
        Ok(())
    }

    pub fn alpha(&self, k: usize) -> f64 {
        let k = k as f64;
        match self.alpha {
            StepSize::Constant(a) => a,
            StepSize::ConstantSqrtK { a, horizon } => a / (horizon as f64).sqrt(),
            StepSize::Polynomial { a, b, exponent } => a / (k + b).powf(exponent),
        }
    }

    /// `β_k` before clamping.
    pub fn beta_raw(&self, k: usize) -> f64 {
        match self.beta {
            BetaRule::Proportional(b) => b * self.alpha(k),
            BetaRule::Constant(b) => b,
            BetaRule::Polynomial { scale, offset, exponent } => scale / (k as f64 + offset).powf(exponent),
        }
    }

    /// `β_k` clamped to at most 1.
    pub fn beta(&self, k: usize) -> f64 {
        self.beta_raw(k).min(1.0)
    }

    /// Polynomial exponent of `α_k` if the schedule is of that form.
    pub fn polynomial_exponent(&self) -> Option<f64> {
        match self.alpha {
            StepSize::Polynomial { exponent, .. } => Some(exponent),
            _ => None,
        }
    }
}

/// `α_k = a/(k+b)`, `β_k = β α_k` satisfying the `O(1/k)` conditions
/// `2n/(uᵀv μ) < a ≤ n(b+1)/(uᵀv μ) · min{1, 2/L}` and `1 < βa ≤ 1 + b`.
///
/// `mu` is the strong-convexity modulus of `h`, `smoothness` the product
/// `C_g² L_f + C_f L_g` and `uv = uᵀv`. Chooses `a` at 1.5× its lower bound,
/// the smallest integer `b` allowed, and `βa = 2`.
pub fn strongly_convex_schedule(mu: f64, smoothness: f64, uv: f64, agents: usize) -> Result<StepSchedule> {
    if !(mu > 0.0 && smoothness > 0.0 && uv > 0.0) {
        return config_err(format!("need mu, smoothness, uTv > 0; got {mu}, {smoothness}, {uv}"));
    }
    let unit = agents as f64 / (uv * mu);
    let a = 3.0 * unit;
    let cap = (2.0 / smoothness).min(1.0);
    // a ≤ unit (b+1) cap  ⇔  b ≥ a/(unit cap) − 1
    let b = (a / (unit * cap) - 1.0).ceil().max(1.0);
    StepSchedule::new(StepSize::Polynomial { a, b, exponent: 1.0 }, BetaRule::Proportional(2.0 / a))
}

/// `α_k = a/(k+b)^e`, `β_k = β α_k` with `a = n/(uᵀv μ)`, the smallest
/// integer `b` satisfying `a/(1+b)^e ≤ n/(uᵀv μ) · min{1, 2/L}` and
/// `β = 1/(2a)`.
pub fn asymptotic_schedule(mu: f64, smoothness: f64, uv: f64, agents: usize, exponent: f64) -> Result<StepSchedule> {
    if !(mu > 0.0 && smoothness > 0.0 && uv > 0.0) {
        return config_err(format!("need mu, smoothness, uTv > 0; got {mu}, {smoothness}, {uv}"));
    }
    if !(exponent > 0.5 && exponent < 1.0) {
        return config_err(format!("exponent must lie in (1/2, 1), got {exponent}"));
    }
    let a = agents as f64 / (uv * mu);
    let cap = (2.0 / smoothness).min(1.0);
    // (1+b)^e ≥ 1/cap
    let b = (cap.recip().powf(1.0 / exponent) - 1.0).max(0.0).ceil();
    StepSchedule::new(StepSize::Polynomial { a, b, exponent }, BetaRule::Proportional(0.5 / a))
}
