use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{BoundaryMode, LatticeWindow};
use crate::error::{Error, Result};

/// The state `(alpha, beta)` of the lattice on a finite window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequencePair {
    window: LatticeWindow,
    alpha: Vec<Complex64>,
    beta: Vec<Complex64>,
}

/// Summary of where `alpha * beta` sits relative to the excluded values 0 and 1.
#[derive(Debug, Clone, Serialize)]
pub struct ProductReport {
    /// Sites with `alpha * beta == 0`. Recorded, not rejected.
    pub zero_product_sites: usize,
    /// `min_n |1 - alpha(n) beta(n)|`.
    pub min_one_minus_product: f64,
    /// Site attaining the minimum.
    pub argmin_site: i64,
    /// `max_n |alpha(n) beta(n)|`.
    pub max_product: f64,
}

impl SequencePair {
    pub fn new(window: LatticeWindow, alpha: Vec<Complex64>, beta: Vec<Complex64>) -> Result<Self> {
        if alpha.len() != window.len() || beta.len() != window.len() {
            return Err(Error::Dimension(format!(
                "window has {} sites but alpha has {} and beta has {}",
                window.len(),
                alpha.len(),
                beta.len()
            )));
        }
        Ok(Self {
            window,
            alpha,
            beta,
        })
    }

    pub fn zeros(window: LatticeWindow) -> Self {
        let n = window.len();
        Self {
            window,
            alpha: vec![Complex64::new(0.0, 0.0); n],
            beta: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    /// Builds a pair by evaluating `f(site) -> (alpha, beta)` on every site.
    pub fn from_fn(window: LatticeWindow, mut f: impl FnMut(i64) -> (Complex64, Complex64)) -> Self {
        let (alpha, beta) = window.sites().map(&mut f).unzip();
        Self {
            window,
            alpha,
            beta,
        }
    }

    pub fn window(&self) -> &LatticeWindow {
        &self.window
    }

    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    pub fn beta(&self) -> &[Complex64] {
        &self.beta
    }

    pub fn alpha_mut(&mut self) -> &mut [Complex64] {
        &mut self.alpha
    }

    pub fn beta_mut(&mut self) -> &mut [Complex64] {
        &mut self.beta
    }

    pub fn into_parts(self) -> (LatticeWindow, Vec<Complex64>, Vec<Complex64>) {
        (self.window, self.alpha, self.beta)
    }

    /// Same data, different continuation rule.
    pub fn with_boundary(&self, boundary: BoundaryMode) -> Result<Self> {
        Ok(Self {
            window: self.window.with_boundary(boundary)?,
            alpha: self.alpha.clone(),
            beta: self.beta.clone(),
        })
    }

    /// `(alpha(site), beta(site))` for any site, continued by the window's mode.
    pub fn value_at(&self, site: i64) -> (Complex64, Complex64) {
        self.value_with(site, self.window.boundary())
    }

    pub fn alpha_at(&self, site: i64) -> Complex64 {
        self.value_at(site).0
    }

    pub fn beta_at(&self, site: i64) -> Complex64 {
        self.value_at(site).1
    }

    fn value_with(&self, site: i64, mode: BoundaryMode) -> (Complex64, Complex64) {
        match self.window.resolve_as(site, mode) {
            Some(i) => (self.alpha[i], self.beta[i]),
            None => (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)),
        }
    }

    /// `n -> (alpha(n + j), beta(n + j))` with out-of-window values from the window's mode.
    pub fn shift(&self, j: i64) -> Self {
        self.shift_with(j, self.window.boundary())
    }

    /// Shift with an explicit continuation rule; the result keeps `self`'s window.
    pub fn shift_with(&self, j: i64, mode: BoundaryMode) -> Self {
        assert!(
            j.unsigned_abs() < self.window.len() as u64,
            "shift |{j}| must be below the window length {}",
            self.window.len()
        );
        let window = self.window;
        Self::from_fn(window, |n| self.value_with(n + j, mode))
    }

    /// `sup_n (|alpha(n)| + |beta(n)|)`.
    pub fn sup_norm(&self) -> f64 {
        self.alpha
            .iter()
            .zip(&self.beta)
            .map(|(a, b)| a.norm() + b.norm())
            .fold(0.0, f64::max)
    }

    /// `max_n max(|alpha_1 - alpha_2|, |beta_1 - beta_2|)`.
    pub fn max_abs_diff(&self, other: &SequencePair) -> Result<f64> {
        self.check_same_sites(other)?;
        Ok(self
            .alpha
            .iter()
            .zip(&other.alpha)
            .chain(self.beta.iter().zip(&other.beta))
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max))
    }

    pub fn is_finite(&self) -> bool {
        self.alpha
            .iter()
            .chain(&self.beta)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Pointwise difference `(alpha - other.alpha, beta - other.beta)`.
    pub fn difference(&self, other: &SequencePair) -> Result<Self> {
        self.check_same_sites(other)?;
        Ok(Self {
            window: self.window,
            alpha: self.alpha.iter().zip(&other.alpha).map(|(x, y)| x - y).collect(),
            beta: self.beta.iter().zip(&other.beta).map(|(x, y)| x - y).collect(),
        })
    }

    pub fn product_report(&self) -> ProductReport {
        let mut report = ProductReport {
            zero_product_sites: 0,
            min_one_minus_product: f64::INFINITY,
            argmin_site: self.window.n_min(),
            max_product: 0.0,
        };
        for (site, (a, b)) in self.window.sites().zip(self.alpha.iter().zip(&self.beta)) {
            let p = a * b;
            if p == Complex64::new(0.0, 0.0) {
                report.zero_product_sites += 1;
            }
            let gap = (Complex64::new(1.0, 0.0) - p).norm();
            if gap < report.min_one_minus_product {
                report.min_one_minus_product = gap;
                report.argmin_site = site;
            }
            report.max_product = report.max_product.max(p.norm());
        }
        report
    }

    /// Rejects data with `|1 - alpha(n) beta(n)| <= rho_tol` at some site.
    pub fn ensure_transfer_regular(&self, rho_tol: f64) -> Result<()> {
        let report = self.product_report();
        if report.min_one_minus_product <= rho_tol {
            return Err(Error::NearSingularTransfer {
                site: report.argmin_site,
                modulus: report.min_one_minus_product,
            });
        }
        Ok(())
    }

    pub(crate) fn check_same_sites(&self, other: &SequencePair) -> Result<()> {
        if !self.window.same_sites(&other.window) {
            return Err(Error::Dimension(format!(
                "windows [{}, {}] and [{}, {}] differ",
                self.window.n_min(),
                self.window.n_max(),
                other.window.n_min(),
                other.window.n_max()
            )));
        }
        Ok(())
    }

    /// Restriction to a sub-range of sites, as plain vectors.
    pub fn restrict(&self, sites: std::ops::RangeInclusive<i64>) -> (Vec<Complex64>, Vec<Complex64>) {
        sites.map(|n| self.value_at(n)).unzip()
    }
}
