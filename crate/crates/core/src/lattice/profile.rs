use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{LatticeWindow, SequencePair};
use crate::error::{Error, Result};

/// `|1 - alpha beta|` below this is treated as `alpha beta = 1`.
pub const PRODUCT_ONE_TOL: f64 = 1e-12;

/// Initial-data families used by the experiments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Profile {
    /// `alpha(n) = a / n^delta`, `beta(n) = b / n^delta` for `n > 0`, zero for `n <= 0`.
    PowerTail { a: Complex64, b: Complex64, delta: f64 },
    /// Constant on `n < 0` and on `n >= 0`.
    Steplike {
        alpha_left: Complex64,
        alpha_right: Complex64,
        beta_left: Complex64,
        beta_right: Complex64,
    },
    /// Values on `start, start + 1, ...`; zero elsewhere.
    Compact {
        start: i64,
        alpha: Vec<Complex64>,
        beta: Vec<Complex64>,
    },
    /// `alpha = a g(n) e^{ikn}`, `beta = b g(n) e^{-ikn}` with `g(n) = exp(-((n - center)/width)^2)`.
    Gaussian {
        a: Complex64,
        b: Complex64,
        width: f64,
        #[serde(default)]
        center: f64,
        #[serde(default)]
        wavenumber: f64,
    },
}

impl Profile {
    /// Defocusing Gaussian, `beta = conj(alpha)`.
    pub fn gaussian(amplitude: f64, width: f64) -> Self {
        Profile::Gaussian {
            a: Complex64::new(amplitude, 0.0),
            b: Complex64::new(amplitude, 0.0),
            width,
            center: 0.0,
            wavenumber: 0.0,
        }
    }

    pub fn power_tail(a: Complex64, b: Complex64, delta: f64) -> Self {
        Profile::PowerTail { a, b, delta }
    }

    /// Single-site alpha bump, beta identically zero.
    pub fn alpha_delta(site: i64, value: f64) -> Self {
        Profile::Compact {
            start: site,
            alpha: vec![Complex64::new(value, 0.0)],
            beta: vec![Complex64::default()],
        }
    }

    fn validate(&self, window: &LatticeWindow) -> Result<()> {
        match self {
            Profile::PowerTail { delta, .. } if !(*delta >= 0.0 && delta.is_finite()) => Err(
                Error::Validation(format!("power_tail requires delta >= 0, got {delta}")),
            ),
            Profile::Compact { start, alpha, beta } => {
                if alpha.len() != beta.len() || alpha.is_empty() {
                    return Err(Error::Validation(format!(
                        "compact profile needs equal nonempty alpha/beta, got {} and {}",
                        alpha.len(),
                        beta.len()
                    )));
                }
                let end = start + alpha.len() as i64 - 1;
                if !(window.contains(*start) && window.contains(end)) {
                    return Err(Error::Validation(format!(
                        "compact support [{start}, {end}] leaves the window [{}, {}]",
                        window.n_min(),
                        window.n_max()
                    )));
                }
                Ok(())
            }
            Profile::Gaussian { width, .. } if !(*width > 0.0) => Err(Error::Validation(format!(
                "gaussian width must be positive, got {width}"
            ))),
            _ => Ok(()),
        }
    }

    pub fn value(&self, n: i64) -> (Complex64, Complex64) {
        let zero = Complex64::default();
        match self {
            Profile::PowerTail { a, b, delta } => {
                if n > 0 {
                    let s = (n as f64).powf(-delta);
                    (a * s, b * s)
                } else {
                    (zero, zero)
                }
            }
            Profile::Steplike {
                alpha_left,
                alpha_right,
                beta_left,
                beta_right,
            } => {
                if n < 0 {
                    (*alpha_left, *beta_left)
                } else {
                    (*alpha_right, *beta_right)
                }
            }
            Profile::Compact { start, alpha, beta } => {
                let i = n - start;
                if (0..alpha.len() as i64).contains(&i) {
                    (alpha[i as usize], beta[i as usize])
                } else {
                    (zero, zero)
                }
            }
            Profile::Gaussian {
                a,
                b,
                width,
                center,
                wavenumber,
            } => {
                let x = (n as f64 - center) / width;
                let g = (-x * x).exp();
                let phase = Complex64::from_polar(1.0, wavenumber * n as f64);
                (a * g * phase, b * g * phase.conj())
            }
        }
    }

    /// Samples the profile on `window`; rejects data with `alpha beta = 1` at some site.
    pub fn build(&self, window: LatticeWindow) -> Result<SequencePair> {
        self.validate(&window)?;
        let pair = SequencePair::from_fn(window, |n| self.value(n));
        pair.ensure_transfer_regular(PRODUCT_ONE_TOL)
            .map_err(|e| Error::Validation(format!("profile produces alpha*beta = 1: {e}")))?;
        Ok(pair)
    }
}

/// `make_profile` in functional form.
pub fn make_profile(profile: &Profile, window: LatticeWindow) -> Result<SequencePair> {
    profile.build(window)
}
