use serde::{Deserialize, Serialize};

use super::{LatticeWindow, SequencePair};
use crate::error::{Error, Result};

/// Closed-form rule that defines a weight on the whole lattice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "rule")]
pub enum WeightRule {
    /// `w(n) = 1`.
    Uniform,
    /// `w(n) = 1 + |n|`.
    OnePlusAbs,
    /// `w(n) = (1 + n)^exponent` for `n > 0`, `1` otherwise.
    PowerTail { exponent: f64 },
    /// Explicit values starting at `n_min`; continued by the nearest stored value.
    Explicit { n_min: i64, values: Vec<f64> },
    /// `w(n) = base(n)^power`.
    Power { base: Box<WeightRule>, power: f64 },
}

impl WeightRule {
    pub fn eval(&self, n: i64) -> f64 {
        match self {
            WeightRule::Uniform => 1.0,
            WeightRule::OnePlusAbs => 1.0 + n.unsigned_abs() as f64,
            WeightRule::PowerTail { exponent } => {
                if n > 0 {
                    (1.0 + n as f64).powf(*exponent)
                } else {
                    1.0
                }
            }
            WeightRule::Explicit { n_min, values } => {
                let i = (n - n_min).clamp(0, values.len() as i64 - 1) as usize;
                values[i]
            }
            WeightRule::Power { base, power } => base.eval(n).powf(*power),
        }
    }
}

/// A weight `w(n) >= 1` sampled on a window, together with its shift-ratio bound
/// `sup_n (w(n+1)/w(n) + w(n)/w(n+1))` over the window and one site beyond each end.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Weight {
    window: LatticeWindow,
    rule: WeightRule,
    values: Vec<f64>,
    shift_ratio_bound: f64,
}

impl Weight {
    pub fn new(window: LatticeWindow, rule: WeightRule) -> Result<Self> {
        if let WeightRule::Explicit { values, .. } = &rule {
            if values.is_empty() {
                return Err(Error::Validation("explicit weight has no values".into()));
            }
        }
        let values: Vec<f64> = window.sites().map(|n| rule.eval(n)).collect();
        if let Some((i, w)) = values
            .iter()
            .enumerate()
            .find(|(_, w)| !(w.is_finite() && **w >= 1.0))
        {
            return Err(Error::Validation(format!(
                "weight must satisfy w(n) >= 1, got w({}) = {w}",
                window.site_at(i)
            )));
        }
        let shift_ratio_bound = ((window.n_min() - 1)..=window.n_max())
            .map(|n| {
                let (w0, w1) = (rule.eval(n), rule.eval(n + 1));
                w1 / w0 + w0 / w1
            })
            .fold(0.0, f64::max);
        Ok(Self {
            window,
            rule,
            values,
            shift_ratio_bound,
        })
    }

    pub fn uniform(window: LatticeWindow) -> Self {
        Self::new(window, WeightRule::Uniform).expect("uniform weight is valid")
    }

    /// Explicit weight from a function of the site; continued by nearest value.
    pub fn from_fn(window: LatticeWindow, f: impl Fn(i64) -> f64) -> Result<Self> {
        let values = window.sites().map(f).collect();
        Self::new(
            window,
            WeightRule::Explicit {
                n_min: window.n_min(),
                values,
            },
        )
    }

    pub fn window(&self) -> &LatticeWindow {
        &self.window
    }

    pub fn rule(&self) -> &WeightRule {
        &self.rule
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn shift_ratio_bound(&self) -> f64 {
        self.shift_ratio_bound
    }

    pub fn at(&self, site: i64) -> f64 {
        self.rule.eval(site)
    }

    /// The same rule sampled on another window.
    pub fn on(&self, window: LatticeWindow) -> Result<Self> {
        Self::new(window, self.rule.clone())
    }

    /// `w(n)^2`, the weight used by the `p = infinity` branch of the asymptotics norms.
    pub fn squared(&self) -> Self {
        Self::new(
            self.window,
            WeightRule::Power {
                base: Box::new(self.rule.clone()),
                power: 2.0,
            },
        )
        .expect("square of a weight >= 1 is a weight")
    }
}

/// Exponent of the weighted norms: finite `p >= 1` or infinity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormExponent {
    Finite(f64),
    Infinity,
}

impl NormExponent {
    pub fn finite(p: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::Validation(format!("norm exponent must satisfy p >= 1, got {p}")));
        }
        Ok(NormExponent::Finite(p))
    }

    /// Exponent applied to the shift-ratio bound in the shift continuity estimate.
    pub fn shift_bound_exponent(&self) -> f64 {
        match self {
            NormExponent::Finite(p) => 1.0 / p,
            NormExponent::Infinity => 1.0,
        }
    }
}

/// `(sum_n w(n) (|alpha(n)|^p + |beta(n)|^p))^(1/p)`, or `sup_n w(n) (|alpha(n)| + |beta(n)|)`.
pub fn weighted_norm(pair: &SequencePair, weight: &Weight, p: NormExponent) -> Result<f64> {
    if !pair.window().same_sites(weight.window()) {
        return Err(Error::Dimension(format!(
            "pair on [{}, {}] but weight on [{}, {}]",
            pair.window().n_min(),
            pair.window().n_max(),
            weight.window().n_min(),
            weight.window().n_max()
        )));
    }
    Ok(weighted_norm_over(pair, weight, p, pair.window().sites()))
}

/// Weighted norm restricted to a range of sites (typically a window interior).
pub fn weighted_norm_over(
    pair: &SequencePair,
    weight: &Weight,
    p: NormExponent,
    sites: std::ops::RangeInclusive<i64>,
) -> f64 {
    let terms = sites.map(|n| {
        let (a, b) = pair.value_at(n);
        (weight.at(n), a.norm(), b.norm())
    });
    match p {
        NormExponent::Infinity => terms.map(|(w, a, b)| w * (a + b)).fold(0.0, f64::max),
        NormExponent::Finite(p) => terms
            .map(|(w, a, b)| w * (a.powf(p) + b.powf(p)))
            .sum::<f64>()
            .powf(1.0 / p),
    }
}

/// Weighted norm of the spatial difference `(alpha - alpha^+, beta - beta^+)`.
pub fn difference_norm(pair: &SequencePair, weight: &Weight, p: NormExponent) -> Result<f64> {
    let diff = pair.difference(&pair.shift(1))?;
    weighted_norm(&diff, weight, p)
}
