//! Hand-coded right-hand sides: the AL system and the printed members
//! AL_(0,0), AL_(1,1), AL_(2,2) of the hierarchy, solved for the time derivatives.
//!
//! These formulas are independent of the coefficient recursions in
//! [`crate::hierarchy`] and serve as its oracle.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hierarchy::FlowSpec;
use crate::lattice::{LatticeWindow, SequencePair};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// `(alpha_t, beta_t)` on the window of the state it was computed from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlowDerivative {
    window: LatticeWindow,
    pub dalpha: Vec<Complex64>,
    pub dbeta: Vec<Complex64>,
}

impl FlowDerivative {
    pub fn new(window: LatticeWindow, dalpha: Vec<Complex64>, dbeta: Vec<Complex64>) -> Result<Self> {
        if dalpha.len() != window.len() || dbeta.len() != window.len() {
            return Err(Error::Dimension(format!(
                "derivative needs {} sites, got {} and {}",
                window.len(),
                dalpha.len(),
                dbeta.len()
            )));
        }
        Ok(Self { window, dalpha, dbeta })
    }

    pub fn window(&self) -> &LatticeWindow {
        &self.window
    }

    /// `(alpha_t(site), beta_t(site))`; zero outside the window.
    pub fn at(&self, site: i64) -> (Complex64, Complex64) {
        match self.window.index_of(site) {
            Some(i) => (self.dalpha[i], self.dbeta[i]),
            None => (Complex64::default(), Complex64::default()),
        }
    }

    /// Largest componentwise deviation from `other`.
    pub fn max_abs_diff(&self, other: &FlowDerivative) -> f64 {
        self.dalpha
            .iter()
            .zip(&other.dalpha)
            .chain(self.dbeta.iter().zip(&other.dbeta))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.dalpha.iter().chain(&self.dbeta).map(|z| z.norm()).fold(0.0, f64::max)
    }
}

/// An autonomous lattice vector field.
pub trait Flow: Sync {
    fn derivative(&self, pair: &SequencePair) -> Result<FlowDerivative>;

    /// Number of neighbours on each side the right-hand side couples to.
    fn reach(&self) -> usize;

    fn name(&self) -> String;
}

/// `-i alpha_t - (1 - alpha beta)(alpha^- + alpha^+) + 2 alpha = 0` and its beta partner.
#[derive(Debug, Clone, Copy, Default)]
pub struct AlSystem;

impl Flow for AlSystem {
    fn derivative(&self, pair: &SequencePair) -> Result<FlowDerivative> {
        Ok(al_system_rhs(pair))
    }

    fn reach(&self) -> usize {
        1
    }

    fn name(&self) -> String {
        "al_system".into()
    }
}

pub fn al_system_rhs(pair: &SequencePair) -> FlowDerivative {
    let window = *pair.window();
    let (dalpha, dbeta) = window
        .sites()
        .map(|n| {
            let (a, b) = pair.value_at(n);
            let (am, bm) = pair.value_at(n - 1);
            let (ap, bp) = pair.value_at(n + 1);
            let gamma = ONE - a * b;
            (
                I * (gamma * (am + ap) - 2.0 * a),
                -I * (gamma * (bm + bp) - 2.0 * b),
            )
        })
        .unzip();
    FlowDerivative { window, dalpha, dbeta }
}

/// One of the explicitly printed flows AL_(0,0), AL_(1,1), AL_(2,2).
#[derive(Debug, Clone)]
pub struct ExplicitFlow {
    spec: FlowSpec,
}

impl ExplicitFlow {
    pub fn new(spec: FlowSpec) -> Result<Self> {
        check_explicit(&spec)?;
        Ok(Self { spec })
    }

    pub fn spec(&self) -> &FlowSpec {
        &self.spec
    }
}

impl Flow for ExplicitFlow {
    fn derivative(&self, pair: &SequencePair) -> Result<FlowDerivative> {
        al_explicit_rhs(pair, &self.spec)
    }

    fn reach(&self) -> usize {
        self.spec.r_minus().max(self.spec.r_plus())
    }

    fn name(&self) -> String {
        format!("explicit_al_({},{})", self.spec.r_minus(), self.spec.r_plus())
    }
}

fn check_explicit(spec: &FlowSpec) -> Result<()> {
    match (spec.r_minus(), spec.r_plus()) {
        (0, 0) | (1, 1) | (2, 2) => Ok(()),
        (r_minus, r_plus) => Err(Error::UnsupportedFlow { r_minus, r_plus }),
    }
}

/// Evaluates the printed formula for `spec.r()` in {(0,0), (1,1), (2,2)}.
pub fn al_explicit_rhs(pair: &SequencePair, spec: &FlowSpec) -> Result<FlowDerivative> {
    check_explicit(spec)?;
    let cr = spec.c_r();
    let cp = spec.c_plus();
    let cm = spec.c_minus();
    let window = *pair.window();
    let at = |n| pair.value_at(n);
    let gamma = |n| {
        let (a, b) = at(n);
        ONE - a * b
    };

    let mut dalpha = Vec::with_capacity(window.len());
    let mut dbeta = Vec::with_capacity(window.len());
    for n in window.sites() {
        let (a, b) = at(n);
        // x and y are the non-derivative parts of the two components: -i alpha_t + x = 0.
        let (x, y) = match spec.r_minus() {
            0 => (-cr * a, cr * b),
            1 => {
                let (am, bm) = at(n - 1);
                let (ap, bp) = at(n + 1);
                let g = gamma(n);
                (
                    -g * (cm[0] * am + cp[0] * ap) - cr * a,
                    g * (cp[0] * bm + cm[0] * bp) + cr * b,
                )
            }
            _ => {
                let (am, bm) = at(n - 1);
                let (ap, bp) = at(n + 1);
                let (amm, bmm) = at(n - 2);
                let (app, bpp) = at(n + 2);
                let (g, gm, gp) = (gamma(n), gamma(n - 1), gamma(n + 1));
                let cross = cp[0] * ap * bm + cm[0] * am * bp;
                let x = -g
                    * (cp[0] * app * gp + cm[0] * amm * gm
                        - a * cross
                        - b * (cm[0] * am * am + cp[0] * ap * ap))
                    - g * (cm[1] * am + cp[1] * ap)
                    - cr * a;
                let y = g
                    * (cm[0] * bpp * gp + cp[0] * bmm * gm
                        - b * cross
                        - a * (cp[0] * bm * bm + cm[0] * bp * bp))
                    + g * (cp[1] * bm + cm[1] * bp)
                    + cr * b;
                (x, y)
            }
        };
        dalpha.push(-I * x);
        dbeta.push(-I * y);
    }
    Ok(FlowDerivative { window, dalpha, dbeta })
}

/// `(alpha, beta) -> (c alpha, beta / c)`.
pub fn scaling_transform(pair: &SequencePair, c: Complex64) -> Result<SequencePair> {
    if c == Complex64::default() {
        return Err(Error::InvalidScale);
    }
    let alpha = pair.alpha().iter().map(|a| c * a).collect();
    let beta = pair.beta().iter().map(|b| b / c).collect();
    SequencePair::new(*pair.window(), alpha, beta)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::lattice::{BoundaryMode, Profile};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_pair(seed: u64, mode: BoundaryMode) -> SequencePair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = LatticeWindow::new(-16, 15, mode).unwrap();
        let mut draw = || c(rng.random_range(-0.35..0.35), rng.random_range(-0.35..0.35));
        SequencePair::from_fn(w, |_| (draw(), draw()))
    }

    #[test]
    fn zero_is_a_fixed_point() {
        let w = LatticeWindow::new(0, 9, BoundaryMode::PadZero).unwrap();
        assert_eq!(al_system_rhs(&SequencePair::zeros(w)).max_abs(), 0.0);
    }

    #[test]
    fn constant_data_rotates() {
        let (a, b) = (c(0.3, 0.1), c(-0.2, 0.25));
        let w = LatticeWindow::new(0, 9, BoundaryMode::Periodic).unwrap();
        let d = al_system_rhs(&SequencePair::from_fn(w, |_| (a, b)));
        for i in 0..w.len() {
            assert!((d.dalpha[i] - (-2.0 * I * a * a * b)).norm() < 1e-15);
            assert!((d.dbeta[i] - (2.0 * I * a * b * b)).norm() < 1e-15);
        }
    }

    #[test]
    fn single_site_stencil() {
        let w = LatticeWindow::new(-5, 5, BoundaryMode::PadZero).unwrap();
        let d = al_system_rhs(&Profile::alpha_delta(0, 0.5).build(w).unwrap());
        assert!((d.at(0).0 - c(0.0, -1.0)).norm() < 1e-15);
        assert!((d.at(1).0 - c(0.0, 0.5)).norm() < 1e-15);
        assert!((d.at(-1).0 - c(0.0, 0.5)).norm() < 1e-15);
        assert_eq!(d.at(2).0, Complex64::default());
        assert_eq!(d.max_abs_diff(&al_system_rhs(&SequencePair::zeros(w))), 1.0);
    }

    #[test]
    fn explicit_00_is_a_phase_rotation() {
        let cc = c(0.7, -0.2);
        let spec = FlowSpec::new(vec![cc], vec![cc]).unwrap();
        let p = random_pair(1, BoundaryMode::PadZero);
        let d = al_explicit_rhs(&p, &spec).unwrap();
        for i in 0..p.window().len() {
            assert!((d.dalpha[i] - I * cc * p.alpha()[i]).norm() < 1e-15);
            assert!((d.dbeta[i] + I * cc * p.beta()[i]).norm() < 1e-15);
        }
    }

    #[test]
    fn explicit_11_matches_al_system() {
        for seed in 0..5 {
            let p = random_pair(seed, BoundaryMode::Periodic);
            let d = al_explicit_rhs(&p, &FlowSpec::al_system()).unwrap();
            assert!(d.max_abs_diff(&al_system_rhs(&p)) <= 1e-14);
        }
    }

    #[test]
    fn explicit_22_without_constants_vanishes() {
        let zero = c(0.0, 0.0);
        let spec = FlowSpec::new(vec![zero; 3], vec![zero; 3]).unwrap();
        let p = random_pair(3, BoundaryMode::PadZero);
        assert_eq!(al_explicit_rhs(&p, &spec).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn unsupported_orders_are_rejected() {
        let one = c(1.0, 0.0);
        let spec = FlowSpec::new(vec![one; 2], vec![one; 3]).unwrap();
        let p = random_pair(0, BoundaryMode::PadZero);
        assert!(matches!(
            al_explicit_rhs(&p, &spec),
            Err(Error::UnsupportedFlow { r_minus: 1, r_plus: 2 })
        ));
    }

    #[test]
    fn scaling_examples() {
        let w = LatticeWindow::new(0, 9, BoundaryMode::PadZero).unwrap();
        let p = SequencePair::from_fn(w, |_| (c(0.1, 0.0), c(0.1, 0.0)));
        assert_eq!(scaling_transform(&p, c(1.0, 0.0)).unwrap(), p);
        let s = scaling_transform(&p, c(2.0, 0.0)).unwrap();
        assert!((s.alpha()[3] - c(0.2, 0.0)).norm() < 1e-16);
        assert!((s.beta()[3] - c(0.05, 0.0)).norm() < 1e-16);
        assert!(matches!(scaling_transform(&p, c(0.0, 0.0)), Err(Error::InvalidScale)));
    }

    #[test]
    fn scaling_keeps_products_and_inverts() {
        let p = random_pair(7, BoundaryMode::PadZero);
        let k = c(-1.3, 0.4);
        let s = scaling_transform(&p, k).unwrap();
        for i in 0..p.window().len() {
            let before = p.alpha()[i] * p.beta()[i];
            let after = s.alpha()[i] * s.beta()[i];
            assert!((before - after).norm() < 1e-15);
        }
        let back = scaling_transform(&s, ONE / k).unwrap();
        assert!(back.max_abs_diff(&p).unwrap() < 1e-15);
    }

    #[test]
    fn rhs_is_scaling_equivariant() {
        let p = random_pair(11, BoundaryMode::PadZero);
        let k = c(0.6, 0.8);
        let d = al_system_rhs(&p);
        let ds = al_system_rhs(&scaling_transform(&p, k).unwrap());
        for i in 0..p.window().len() {
            assert!((ds.dalpha[i] - k * d.dalpha[i]).norm() < 1e-15);
            assert!((ds.dbeta[i] - d.dbeta[i] / k).norm() < 1e-15);
        }
    }

    #[test]
    fn defocusing_and_focusing_reductions_close() {
        for sign in [1.0, -1.0] {
            let mut p = random_pair(5, BoundaryMode::PadZero);
            let conj: Vec<_> = p.alpha().iter().map(|a| sign * a.conj()).collect();
            p.beta_mut().copy_from_slice(&conj);
            let d = al_system_rhs(&p);
            for i in 0..p.window().len() {
                assert!((d.dbeta[i] - sign * d.dalpha[i].conj()).norm() < 1e-15);
            }
        }
    }
}
