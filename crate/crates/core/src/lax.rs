//! Zero-curvature pair `(U, V)`, the five-diagonal Lax operator `L` and its companion `P`.
//!
//! Row `s` of `L` is indexed by the lattice site. Even sites carry the row
//! `(-alpha(s) rho(s-1), -beta(s-1) alpha(s), -alpha(s+1) rho(s), rho(s) rho(s+1))` on
//! columns `s-1..=s+2`; odd sites carry
//! `(rho(s-2) rho(s-1), beta(s-2) rho(s-1), -beta(s-1) alpha(s), beta(s-1) rho(s))` on
//! columns `s-2..=s+1`. With this alignment `L` factors into two block-diagonal
//! unitary-like factors, and the Lax equation holds with `Q_d(s) = (-1)^(s+1)`.
//!
//! Truncation: periodic windows (even length) wrap couplings around; other modes drop
//! columns outside the window. A pad-zero truncation of `L` is singular, because a
//! row at each end loses its only order-one entry, so `P` and the Lax residual need
//! periodic windows.

use nalgebra::{DMatrix, Matrix2, Schur};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flows::FlowDerivative;
use crate::lattice::{BoundaryMode, LatticeWindow, SequencePair, PRODUCT_ONE_TOL};

const I: Complex64 = Complex64::new(0.0, 1.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `L * L^-1` further than this from the identity counts as singular.
pub const INVERSE_TOL: f64 = 1e-6;

/// `U(z)` or `V(z)` at one site.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferMatrix {
    pub entries: Matrix2<Complex64>,
    pub site: i64,
    pub z: Complex64,
}

impl TransferMatrix {
    pub fn det(&self) -> Complex64 {
        self.entries.determinant()
    }
}

fn check_z(z: Complex64) -> Result<()> {
    if z == ZERO || !z.is_finite() {
        return Err(Error::InvalidParameter);
    }
    Ok(())
}

/// `U(z) = ((z, alpha), (beta z, 1))` at site `n`.
pub fn build_u(pair: &SequencePair, n: i64, z: Complex64) -> Result<TransferMatrix> {
    check_z(z)?;
    let (a, b) = pair.value_at(n);
    Ok(TransferMatrix {
        entries: Matrix2::new(z, a, b * z, ONE),
        site: n,
        z,
    })
}

/// `V(z) = i ((z - 1 - alpha beta^-, alpha - alpha^- / z), (beta^- z - beta, 1 + alpha^- beta - 1/z))`.
pub fn build_v(pair: &SequencePair, n: i64, z: Complex64) -> Result<TransferMatrix> {
    check_z(z)?;
    let (a, b) = pair.value_at(n);
    let (am, bm) = pair.value_at(n - 1);
    let zi = z.inv();
    Ok(TransferMatrix {
        entries: Matrix2::new(z - ONE - a * bm, a - am * zi, bm * z - b, ONE + am * b - zi) * I,
        site: n,
        z,
    })
}

/// `|| U_t(n) + U(n) V(n) - V(n+1) U(n) ||_F` with `U_t = ((0, alpha_t), (beta_t z, 0))`.
pub fn zc_residual(pair: &SequencePair, deriv: &FlowDerivative, z: Complex64, n: i64) -> Result<f64> {
    let u = build_u(pair, n, z)?.entries;
    let v = build_v(pair, n, z)?.entries;
    let v1 = build_v(pair, n + 1, z)?.entries;
    let (da, db) = deriv.at(n);
    let ut = Matrix2::new(ZERO, da, db * z, ZERO);
    Ok((ut + u * v - v1 * u).norm())
}

/// Value and time derivative carried together through the stencil products.
#[derive(Debug, Clone, Copy)]
struct Dual {
    v: Complex64,
    d: Complex64,
}

impl std::ops::Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual {
            v: self.v * o.v,
            d: self.d * o.v + self.v * o.d,
        }
    }
}

impl std::ops::Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual { v: -self.v, d: -self.d }
    }
}

/// The four nonzero entries of row `s` as `(column site, entry)`.
fn stencil(s: i64, at: &impl Fn(i64) -> (Dual, Dual, Dual)) -> [(i64, Dual); 4] {
    let alpha = |n| at(n).0;
    let beta = |n| at(n).1;
    let rho = |n| at(n).2;
    if s.rem_euclid(2) == 0 {
        [
            (s - 1, -(alpha(s) * rho(s - 1))),
            (s, -(beta(s - 1) * alpha(s))),
            (s + 1, -(alpha(s + 1) * rho(s))),
            (s + 2, rho(s) * rho(s + 1)),
        ]
    } else {
        [
            (s - 2, rho(s - 2) * rho(s - 1)),
            (s - 1, beta(s - 2) * rho(s - 1)),
            (s, -(beta(s - 1) * alpha(s))),
            (s + 1, beta(s - 1) * rho(s)),
        ]
    }
}

fn column(window: &LatticeWindow, site: i64) -> Option<usize> {
    match window.boundary() {
        BoundaryMode::Periodic => Some((site - window.n_min()).rem_euclid(window.len() as i64) as usize),
        _ => window.index_of(site),
    }
}

/// Assembles `L` (from `.v`) and `dL/dt` (from `.d`).
fn assemble(window: &LatticeWindow, at: impl Fn(i64) -> (Dual, Dual, Dual)) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let n = window.len();
    let mut l = DMatrix::zeros(n, n);
    let mut dl = DMatrix::zeros(n, n);
    for (row, s) in window.sites().enumerate() {
        for (col_site, e) in stencil(s, &at) {
            if let Some(col) = column(window, col_site) {
                l[(row, col)] += e.v;
                dl[(row, col)] += e.d;
            }
        }
    }
    (l, dl)
}

fn is_on_branch_cut(x: Complex64) -> bool {
    x.re < 0.0 && x.im.abs() <= 1e-14 * x.norm()
}

/// Truncated `L` with the parts `P` is built from.
#[derive(Debug, Clone)]
pub struct LaxBundle {
    pub window: LatticeWindow,
    pub l: DMatrix<Complex64>,
    /// Diagonal of `Q_d`, `(-1)^(site + 1)`.
    pub qd: Vec<f64>,
    pub lplus: DMatrix<Complex64>,
    pub lminus: DMatrix<Complex64>,
    pub linv: Option<DMatrix<Complex64>>,
    /// `max |L L^-1 - 1|`, when an inverse was formed.
    pub inverse_residual: Option<f64>,
    pub rho: Vec<Complex64>,
    /// Sites where `1 - alpha beta` sits on the negative real axis.
    pub branch_sites: Vec<i64>,
}

fn strict_part(m: &DMatrix<Complex64>, upper: bool) -> DMatrix<Complex64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        if (upper && j > i) || (!upper && j < i) {
            m[(i, j)]
        } else {
            ZERO
        }
    })
}

fn rho_at(pair: &SequencePair, site: i64) -> Complex64 {
    let (a, b) = pair.value_at(site);
    (ONE - a * b).sqrt()
}

/// Dense truncation of `L` on the pair's window.
pub fn build_l(pair: &SequencePair) -> Result<LaxBundle> {
    let window = *pair.window();
    if window.boundary() == BoundaryMode::Periodic && window.len() % 2 == 1 {
        return Err(Error::Validation(format!(
            "periodic Lax operator needs an even window, got {} sites",
            window.len()
        )));
    }
    pair.ensure_transfer_regular(PRODUCT_ONE_TOL)?;
    let (l, _) = assemble(&window, |n| {
        let (a, b) = pair.value_at(n);
        let d = |v| Dual { v, d: ZERO };
        (d(a), d(b), d(rho_at(pair, n)))
    });
    let n = window.len();
    let (linv, inverse_residual) = match l.clone().lu().try_inverse() {
        Some(inv) => {
            let res = (&l * &inv - DMatrix::<Complex64>::identity(n, n))
                .iter()
                .map(|x| x.norm())
                .fold(0.0, f64::max);
            if res.is_finite() && res <= INVERSE_TOL {
                (Some(inv), Some(res))
            } else {
                (None, Some(res))
            }
        }
        None => (None, None),
    };
    let rho = window.sites().map(|s| rho_at(pair, s)).collect();
    let branch_sites = window
        .sites()
        .filter(|&s| {
            let (a, b) = pair.value_at(s);
            is_on_branch_cut(ONE - a * b)
        })
        .collect();
    Ok(LaxBundle {
        window,
        qd: window.sites().map(|s| if s.rem_euclid(2) == 0 { -1.0 } else { 1.0 }).collect(),
        lplus: strict_part(&l, true),
        lminus: strict_part(&l, false),
        l,
        linv,
        inverse_residual,
        rho,
        branch_sites,
    })
}

/// `P = (i/2)(L_+ - L_- + (L^-1)_- - (L^-1)_+ + 2 Q_d)` on the truncation.
pub fn build_p(bundle: &LaxBundle) -> Result<DMatrix<Complex64>> {
    let inv = bundle.linv.as_ref().ok_or_else(|| {
        Error::SingularOperator(format!(
            "truncated L on [{}, {}] has no usable inverse (residual {:?})",
            bundle.window.n_min(),
            bundle.window.n_max(),
            bundle.inverse_residual
        ))
    })?;
    let n = bundle.window.len();
    let qd = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(2.0 * bundle.qd[i], 0.0) } else { ZERO });
    let m = &bundle.lplus - &bundle.lminus + strict_part(inv, false) - strict_part(inv, true) + qd;
    Ok(m * Complex64::new(0.0, 0.5))
}

/// Smallest interior margin `lax_residual` accepts.
pub const MIN_LAX_MARGIN: usize = 4;

/// `max |dL/dt - (P L - L P)|` over rows at least `margin` sites from both window ends,
/// with `dL/dt` from the chain rule and `rho_t = -(alpha_t beta + alpha beta_t) / (2 rho)`.
pub fn lax_residual(pair: &SequencePair, deriv: &FlowDerivative, bundle: &LaxBundle, margin: usize) -> Result<f64> {
    let window = bundle.window;
    if !pair.window().same_sites(&window) || !deriv.window().same_sites(&window) {
        return Err(Error::Dimension("pair, derivative and bundle must share one window".into()));
    }
    if margin < MIN_LAX_MARGIN || 2 * margin >= window.len() {
        return Err(Error::Validation(format!(
            "interior margin must be in {MIN_LAX_MARGIN}..{}, got {margin}",
            window.len() / 2
        )));
    }
    let p = build_p(bundle)?;
    let rate = |site: i64| match window.boundary() {
        BoundaryMode::Periodic => deriv.at(window.site_at(window.resolve(site).expect("periodic sites always resolve"))),
        _ => deriv.at(site),
    };
    let (_, dl) = assemble(&window, |n| {
        let (a, b) = pair.value_at(n);
        let (da, db) = rate(n);
        let r = rho_at(pair, n);
        let dr = -(da * b + a * db) / (2.0 * r);
        (Dual { v: a, d: da }, Dual { v: b, d: db }, Dual { v: r, d: dr })
    });
    let comm = &p * &bundle.l - &bundle.l * &p;
    let near_cut = |s: i64| bundle.branch_sites.iter().any(|&c| (c - s).abs() <= 2);
    let mut worst = 0.0f64;
    for s in window.interior(margin) {
        if near_cut(s) {
            continue;
        }
        let row = (s - window.n_min()) as usize;
        for col in 0..window.len() {
            worst = worst.max((dl[(row, col)] - comm[(row, col)]).norm());
        }
    }
    Ok(worst)
}

fn lex(a: &Complex64, b: &Complex64) -> std::cmp::Ordering {
    a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im))
}

/// Eigenvalues of the truncated `L`, sorted by real then imaginary part.
pub fn spectrum(bundle: &LaxBundle) -> Result<Vec<Complex64>> {
    let n = bundle.window.len();
    let schur = Schur::try_new(bundle.l.clone(), f64::EPSILON, 1000 * n)
        .ok_or_else(|| Error::Numerical("Schur iteration did not converge".into()))?;
    let mut ev: Vec<Complex64> = schur
        .eigenvalues()
        .ok_or_else(|| Error::Numerical("Schur form is not triangular".into()))?
        .iter()
        .copied()
        .collect();
    if ev.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numerical("non-finite eigenvalue".into()));
    }
    ev.sort_by(lex);
    Ok(ev)
}

/// Minimum-cost perfect matching (rows to columns) of a square cost matrix.
fn assignment(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let (mut u, mut v) = (vec![0.0; n + 1], vec![0.0; n + 1]);
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0;
        let mut minv = vec![f64::INFINITY; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = f64::INFINITY;
            let mut j1 = 0;
            for j in 1..=n {
                if !used[j] {
                    let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                    if cur < minv[j] {
                        minv[j] = cur;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut out = vec![0; n];
    for j in 1..=n {
        if p[j] > 0 {
            out[p[j] - 1] = j - 1;
        }
    }
    out
}

/// Largest distance within the pairing of two spectra that minimises total distance.
pub fn eigenvalue_drift(before: &[Complex64], after: &[Complex64]) -> Result<f64> {
    if before.len() != after.len() {
        return Err(Error::Dimension(format!(
            "spectra of sizes {} and {} cannot be paired",
            before.len(),
            after.len()
        )));
    }
    let cost: Vec<Vec<f64>> = before
        .iter()
        .map(|x| after.iter().map(|y| (x - y).norm()).collect())
        .collect();
    let pairing = assignment(&cost);
    Ok(pairing.iter().enumerate().map(|(i, &j)| cost[i][j]).fold(0.0, f64::max))
}

/// Summary of one spectrum comparison, as written by `al spectrum`.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub window_len: usize,
    pub boundary: BoundaryMode,
    pub max_unit_circle_deviation: f64,
    pub eigenvalues: Vec<Complex64>,
}

impl SpectrumReport {
    pub fn new(bundle: &LaxBundle, eigenvalues: Vec<Complex64>) -> Self {
        Self {
            window_len: bundle.window.len(),
            boundary: bundle.window.boundary(),
            max_unit_circle_deviation: eigenvalues.iter().map(|x| (x.norm() - 1.0).abs()).fold(0.0, f64::max),
            eigenvalues,
        }
    }
}
