//! AL_r right-hand sides for arbitrary `r = (r_-, r_+)` from the coefficient recursions.
//!
//! The homogeneous ladders (`c_{0,±} = 1`, all higher constants zero) are built with the
//! local product recursion
//!
//! ```text
//! g_{l+1} = sum_{k=0}^{l} f_{l-k} h_k - sum_{k=1}^{l} g_{l+1-k} g_k
//! ```
//!
//! followed by the `f`/`h` updates of each sign. General summation constants enter by
//! convolution, `f_l = sum_k c_{l-k} f^_k` and likewise for `g`, `h`. The first-difference
//! relations for `g` are never integrated, so no boundary-dependent constants appear.
//!
//! Each recursion level couples one more neighbour on each side. Ladders are computed on
//! the window extended by `order + 2` sites (values supplied by the boundary mode), which
//! makes every level exact on the whole window.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flows::{Flow, FlowDerivative};
use crate::lattice::SequencePair;

const I: Complex64 = Complex64::new(0.0, 1.0);
const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const HALF: Complex64 = Complex64::new(0.5, 0.0);

/// Tolerance of [`check_constraint`].
pub const CONSTRAINT_TOL: f64 = 1e-14;

/// Selects one equation AL_r of the hierarchy: `c_minus = [c_{0,-}, ..., c_{r_-,-}]`,
/// `c_plus = [c_{0,+}, ..., c_{r_+,+}]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowSpec {
    c_minus: Vec<Complex64>,
    c_plus: Vec<Complex64>,
}

impl FlowSpec {
    pub fn new(c_minus: Vec<Complex64>, c_plus: Vec<Complex64>) -> Result<Self> {
        if c_minus.is_empty() || c_plus.is_empty() {
            return Err(Error::Validation(
                "summation constants need at least c_{0,+} and c_{0,-}".into(),
            ));
        }
        Ok(Self { c_minus, c_plus })
    }

    /// The AL system: `r = (1,1)`, `c_{0,±} = 1`, `c_(1,1) = -2`.
    pub fn al_system() -> Self {
        let (one, two) = (Complex64::new(1.0, 0.0), Complex64::new(-2.0, 0.0));
        Self {
            c_minus: vec![one, two],
            c_plus: vec![one, two],
        }
    }

    /// Discrete NLS hierarchy member `r = (r, r)`: `c_{0,±} = 1`, all other constants zero.
    pub fn dnls(r: usize) -> Self {
        let mut c = vec![ZERO; r + 1];
        c[0] = Complex64::new(1.0, 0.0);
        Self {
            c_minus: c.clone(),
            c_plus: c,
        }
    }

    /// Schur flow `r = (1,1)`: `c_{0,±} = ∓i`, `c_r = 0`.
    pub fn schur() -> Self {
        Self {
            c_minus: vec![I, ZERO],
            c_plus: vec![-I, ZERO],
        }
    }

    /// Pure phase flow AL_(0,0) with `c_(0,0) = c`.
    pub fn phase(c: Complex64) -> Self {
        Self {
            c_minus: vec![c],
            c_plus: vec![c],
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        match name {
            "al_system" => Some(Self::al_system()),
            "dnls_1" => Some(Self::dnls(1)),
            "dnls_2" => Some(Self::dnls(2)),
            "schur" => Some(Self::schur()),
            _ => None,
        }
    }

    pub fn r_minus(&self) -> usize {
        self.c_minus.len() - 1
    }

    pub fn r_plus(&self) -> usize {
        self.c_plus.len() - 1
    }

    pub fn c_minus(&self) -> &[Complex64] {
        &self.c_minus
    }

    pub fn c_plus(&self) -> &[Complex64] {
        &self.c_plus
    }

    /// `c_r = (c_{r_-,-} + c_{r_+,+}) / 2`.
    pub fn c_r(&self) -> Complex64 {
        (self.c_minus[self.r_minus()] + self.c_plus[self.r_plus()]) * 0.5
    }

    /// Width of the frozen edge band that shields the interior from one step.
    pub fn frozen_band(&self) -> usize {
        self.r_minus().max(self.r_plus()) + 1
    }
}

impl Flow for FlowSpec {
    fn derivative(&self, pair: &SequencePair) -> Result<FlowDerivative> {
        al_r_rhs(pair, self)
    }

    fn reach(&self) -> usize {
        self.r_minus().max(self.r_plus())
    }

    fn name(&self) -> String {
        format!("al_({},{})", self.r_minus(), self.r_plus())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    Plus,
    Minus,
}

/// One coefficient ladder: `g_0..=g_order`, `f_0..f_order`, `h_0..h_order` (exclusive),
/// stored on the extended range `lo..lo + len`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Ladder {
    sign: Sign,
    lo: i64,
    valid_interior: (i64, i64),
    f: Vec<Vec<Complex64>>,
    g: Vec<Vec<Complex64>>,
    h: Vec<Vec<Complex64>>,
}

impl Ladder {
    pub fn sign(&self) -> Sign {
        self.sign
    }

    /// Highest `g` level held.
    pub fn order(&self) -> usize {
        self.g.len() - 1
    }

    /// Sites on which every level is exact.
    pub fn valid_interior(&self) -> std::ops::RangeInclusive<i64> {
        self.valid_interior.0..=self.valid_interior.1
    }

    fn idx(&self, site: i64) -> usize {
        let i = site - self.lo;
        assert!(
            (0..self.g[0].len() as i64).contains(&i),
            "site {site} outside the ladder's extended range"
        );
        i as usize
    }

    pub fn f(&self, level: usize, site: i64) -> Complex64 {
        self.f[level][self.idx(site)]
    }

    pub fn g(&self, level: usize, site: i64) -> Complex64 {
        self.g[level][self.idx(site)]
    }

    pub fn h(&self, level: usize, site: i64) -> Complex64 {
        self.h[level][self.idx(site)]
    }

    /// Level `level` of `f` restricted to the valid interior.
    pub fn f_level(&self, level: usize) -> Vec<Complex64> {
        self.valid_interior().map(|n| self.f(level, n)).collect()
    }

    pub fn g_level(&self, level: usize) -> Vec<Complex64> {
        self.valid_interior().map(|n| self.g(level, n)).collect()
    }

    pub fn h_level(&self, level: usize) -> Vec<Complex64> {
        self.valid_interior().map(|n| self.h(level, n)).collect()
    }
}

/// Both ladders of one flow, combined with its summation constants.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HierarchyCoeffs {
    pub plus: Ladder,
    pub minus: Ladder,
}

impl HierarchyCoeffs {
    pub fn valid_interior(&self) -> std::ops::RangeInclusive<i64> {
        self.plus.valid_interior()
    }
}

/// Homogeneous ladder of the given sign up to `g_order` (`f`, `h` up to `order - 1`).
pub fn homogeneous_coeffs(pair: &SequencePair, order: usize, sign: Sign) -> Result<Ladder> {
    let window = pair.window();
    let n = window.len();
    if 2 * (order + 1) >= n {
        return Err(Error::InsufficientWindow { order, len: n });
    }
    let margin = order as i64 + 2;
    let lo = window.n_min() - margin;
    let len = n + 2 * margin as usize;
    let (a, b): (Vec<_>, Vec<_>) = (0..len).map(|i| pair.value_at(lo + i as i64)).unzip();
    let at = |v: &[Complex64], i: isize| -> Complex64 {
        if i >= 0 && (i as usize) < v.len() {
            v[i as usize]
        } else {
            ZERO
        }
    };

    let (f0, h0): (Vec<_>, Vec<_>) = match sign {
        Sign::Plus => (0..len as isize).map(|i| (-at(&a, i + 1), at(&b, i))).unzip(),
        Sign::Minus => (0..len as isize).map(|i| (at(&a, i), -at(&b, i + 1))).unzip(),
    };
    let mut f = vec![f0];
    let mut h = vec![h0];
    let mut g = vec![vec![HALF; len]];

    for l in 0..order {
        let next: Vec<Complex64> = (0..len)
            .map(|i| {
                let fh: Complex64 = (0..=l).map(|k| f[l - k][i] * h[k][i]).sum();
                let gg: Complex64 = (1..=l).map(|k| g[l + 1 - k][i] * g[k][i]).sum();
                fh - gg
            })
            .collect();
        if l + 1 < order {
            let (fl, hl) = (&f[l], &h[l]);
            let pair_sum = |i: isize| at(&next, i) + at(&next, i - 1);
            let (fn_, hn): (Vec<_>, Vec<_>) = match sign {
                Sign::Plus => (0..len as isize)
                    .map(|i| {
                        (
                            at(fl, i + 1) - at(&a, i + 1) * pair_sum(i + 1),
                            at(hl, i - 1) + at(&b, i) * pair_sum(i),
                        )
                    })
                    .unzip(),
                Sign::Minus => (0..len as isize)
                    .map(|i| {
                        (
                            at(fl, i - 1) + at(&a, i) * pair_sum(i),
                            at(hl, i + 1) - at(&b, i + 1) * pair_sum(i + 1),
                        )
                    })
                    .unzip(),
            };
            f.push(fn_);
            h.push(hn);
        }
        g.push(next);
    }
    f.truncate(order);
    h.truncate(order);

    Ok(Ladder {
        sign,
        lo,
        valid_interior: (window.n_min(), window.n_max()),
        f,
        g,
        h,
    })
}

fn convolve(levels: &[Vec<Complex64>], c: &[Complex64], count: usize) -> Vec<Vec<Complex64>> {
    (0..count)
        .map(|l| {
            let len = levels[0].len();
            let mut out = vec![ZERO; len];
            for k in 0..=l {
                let ck = c[l - k];
                if ck != ZERO {
                    for (o, x) in out.iter_mut().zip(&levels[k]) {
                        *o += ck * x;
                    }
                }
            }
            out
        })
        .collect()
}

fn combine(hom: &Ladder, c: &[Complex64], sign: Sign) -> Result<Ladder> {
    if hom.sign != sign {
        return Err(Error::Validation(format!("expected a {sign:?} ladder, got {:?}", hom.sign)));
    }
    let r = c.len() - 1;
    if hom.order() < r {
        return Err(Error::InsufficientOrder { have: hom.order(), need: r });
    }
    Ok(Ladder {
        sign,
        lo: hom.lo,
        valid_interior: hom.valid_interior,
        f: convolve(&hom.f, c, r),
        g: convolve(&hom.g, c, r + 1),
        h: convolve(&hom.h, c, r),
    })
}

/// Applies the summation constants of `spec` to homogeneous ladders of both signs.
pub fn general_coeffs(plus: &Ladder, minus: &Ladder, spec: &FlowSpec) -> Result<HierarchyCoeffs> {
    if plus.lo != minus.lo || plus.valid_interior != minus.valid_interior {
        return Err(Error::Dimension("plus and minus ladders live on different windows".into()));
    }
    Ok(HierarchyCoeffs {
        plus: combine(plus, spec.c_plus(), Sign::Plus)?,
        minus: combine(minus, spec.c_minus(), Sign::Minus)?,
    })
}

/// Homogeneous ladders of the orders `spec` needs, combined with its constants.
pub fn coefficients(pair: &SequencePair, spec: &FlowSpec) -> Result<HierarchyCoeffs> {
    // Both ladders share one extended range so they can be combined site by site.
    let order = spec.r_minus().max(spec.r_plus());
    let plus = homogeneous_coeffs(pair, order, Sign::Plus)?;
    let minus = homogeneous_coeffs(pair, order, Sign::Minus)?;
    general_coeffs(&plus, &minus, spec)
}

/// The AL_r components solved for `(alpha_t, beta_t)`.
pub fn al_r_rhs(pair: &SequencePair, spec: &FlowSpec) -> Result<FlowDerivative> {
    let coeffs = coefficients(pair, spec)?;
    let (rm, rp) = (spec.r_minus(), spec.r_plus());
    let (p, m) = (&coeffs.plus, &coeffs.minus);
    let window = *pair.window();
    let (dalpha, dbeta) = window
        .sites()
        .map(|n| {
            let (a, b) = pair.value_at(n);
            let mut x = -a * (p.g(rp, n) + m.g(rm, n - 1));
            let mut y = b * (p.g(rp, n - 1) + m.g(rm, n));
            if rp > 0 {
                x += p.f(rp - 1, n);
                y += p.h(rp - 1, n - 1);
            }
            if rm > 0 {
                x -= m.f(rm - 1, n - 1);
                y -= m.h(rm - 1, n);
            }
            (-I * x, -I * y)
        })
        .unzip();
    FlowDerivative::new(window, dalpha, dbeta)
}

/// Largest violation of the first-difference relations linking consecutive levels,
/// over the valid interior. For the plus sign:
///
/// ```text
/// g_{l+1} - g_{l+1}^- = alpha h_l^- + beta f_l
/// f_{l+1}^- = f_l - alpha (g_{l+1} + g_{l+1}^-)
/// h_{l+1} = h_l^- + beta (g_{l+1} + g_{l+1}^-)
/// ```
///
/// and for the minus sign:
///
/// ```text
/// g_{l+1} - g_{l+1}^- = alpha h_l + beta f_l^-
/// f_{l+1} = f_l^- + alpha (g_{l+1} + g_{l+1}^-)
/// h_{l+1}^- = h_l - beta (g_{l+1} + g_{l+1}^-)
/// ```
pub fn recursion_residual(pair: &SequencePair, ladder: &Ladder) -> f64 {
    let mut worst = 0.0f64;
    for n in ladder.valid_interior() {
        let (a, b) = pair.value_at(n);
        for l in 0..ladder.order() {
            let gsum = ladder.g(l + 1, n) + ladder.g(l + 1, n - 1);
            let dg = ladder.g(l + 1, n) - ladder.g(l + 1, n - 1);
            let mut r = match ladder.sign {
                Sign::Plus => vec![dg - a * ladder.h(l, n - 1) - b * ladder.f(l, n)],
                Sign::Minus => vec![dg - a * ladder.h(l, n) - b * ladder.f(l, n - 1)],
            };
            if l + 1 < ladder.order() {
                match ladder.sign {
                    Sign::Plus => {
                        r.push(ladder.f(l + 1, n - 1) - ladder.f(l, n) + a * gsum);
                        r.push(ladder.h(l + 1, n) - ladder.h(l, n - 1) - b * gsum);
                    }
                    Sign::Minus => {
                        r.push(ladder.f(l + 1, n) - ladder.f(l, n - 1) - a * gsum);
                        r.push(ladder.h(l + 1, n - 1) - ladder.h(l, n) + b * gsum);
                    }
                }
            }
            worst = r.iter().map(|x| x.norm()).fold(worst, f64::max);
        }
    }
    worst
}

/// Outcome of the summation-constant constraint for decaying solutions of AL_r.
#[derive(Debug, Clone, Serialize)]
pub struct ConstraintCheck {
    /// `r != (0,0)`; the constraint only applies to those flows.
    pub applicable: bool,
    /// `sum_{j<r_+} c_{j,+} + sum_{j<r_-} c_{j,-}`.
    pub residual: Complex64,
    pub satisfied: bool,
    /// The same sum plus `c_r`.
    pub residual_with_cr: Complex64,
    pub satisfied_with_cr: bool,
}

pub fn check_constraint(spec: &FlowSpec) -> ConstraintCheck {
    let residual: Complex64 = spec.c_plus()[..spec.r_plus()].iter().sum::<Complex64>()
        + spec.c_minus()[..spec.r_minus()].iter().sum::<Complex64>();
    let residual_with_cr = residual + spec.c_r();
    ConstraintCheck {
        applicable: (spec.r_minus(), spec.r_plus()) != (0, 0),
        residual,
        satisfied: residual.norm() <= CONSTRAINT_TOL,
        residual_with_cr,
        satisfied_with_cr: residual_with_cr.norm() <= CONSTRAINT_TOL,
    }
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::flows::{al_explicit_rhs, al_system_rhs, scaling_transform};
    use crate::lattice::{BoundaryMode, LatticeWindow};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_pair(seed: u64, mode: BoundaryMode) -> SequencePair {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = LatticeWindow::new(-20, 19, mode).unwrap();
        let mut draw = || c(rng.random_range(-0.35..0.35), rng.random_range(-0.35..0.35));
        SequencePair::from_fn(w, |_| (draw(), draw()))
    }

    #[test]
    fn level_zero_plus() {
        let p = random_pair(2, BoundaryMode::PadZero);
        let l = homogeneous_coeffs(&p, 1, Sign::Plus).unwrap();
        for n in p.window().sites() {
            assert_eq!(l.f(0, n), -p.alpha_at(n + 1));
            assert_eq!(l.g(0, n), HALF);
            assert_eq!(l.h(0, n), p.beta_at(n));
        }
    }

    #[test]
    fn level_one_plus_product_and_difference() {
        let p = random_pair(4, BoundaryMode::PadZero);
        let l = homogeneous_coeffs(&p, 1, Sign::Plus).unwrap();
        for n in p.window().sites() {
            let expect = -p.alpha_at(n + 1) * p.beta_at(n);
            assert!((l.g(1, n) - expect).norm() < 1e-16);
            let lhs = l.g(1, n) - l.g(1, n - 1);
            let rhs = p.alpha_at(n) * l.h(0, n - 1) + p.beta_at(n) * l.f(0, n);
            assert!((lhs - rhs).norm() < 1e-15);
        }
    }

    #[test]
    fn zero_data_ladders() {
        let w = LatticeWindow::new(-10, 10, BoundaryMode::PadZero).unwrap();
        let z = SequencePair::zeros(w);
        for sign in [Sign::Plus, Sign::Minus] {
            let l = homogeneous_coeffs(&z, 4, sign).unwrap();
            for n in w.sites() {
                assert_eq!(l.g(0, n), HALF);
                for lev in 1..=4 {
                    assert_eq!(l.g(lev, n), ZERO);
                }
                for lev in 0..4 {
                    assert_eq!(l.f(lev, n), ZERO);
                    assert_eq!(l.h(lev, n), ZERO);
                }
            }
        }
    }

    #[test]
    fn order_exhausting_window_is_rejected() {
        let w = LatticeWindow::new(0, 9, BoundaryMode::PadZero).unwrap();
        let z = SequencePair::zeros(w);
        assert!(matches!(
            homogeneous_coeffs(&z, 4, Sign::Plus),
            Err(Error::InsufficientWindow { order: 4, len: 10 })
        ));
        assert!(homogeneous_coeffs(&z, 3, Sign::Plus).is_ok());
    }

    #[test]
    fn combination_with_unit_leading_constant_is_identity() {
        let p = random_pair(9, BoundaryMode::Periodic);
        let one = c(1.0, 0.0);
        let spec = FlowSpec::new(vec![one, ZERO, ZERO], vec![one, ZERO, ZERO]).unwrap();
        let plus = homogeneous_coeffs(&p, 2, Sign::Plus).unwrap();
        let minus = homogeneous_coeffs(&p, 2, Sign::Minus).unwrap();
        let gen = general_coeffs(&plus, &minus, &spec).unwrap();
        assert_eq!(gen.plus, plus);
        assert_eq!(gen.minus, minus);
    }

    #[test]
    fn doubling_leading_constant_doubles_everything() {
        let p = random_pair(10, BoundaryMode::PadZero);
        let plus = homogeneous_coeffs(&p, 3, Sign::Plus).unwrap();
        let minus = homogeneous_coeffs(&p, 3, Sign::Minus).unwrap();
        let base = [c(1.0, 0.0), c(0.3, -0.2), c(-0.5, 0.1), c(0.2, 0.0)];
        let doubled: Vec<_> = base.iter().map(|x| 2.0 * x).collect();
        let s1 = FlowSpec::new(base.to_vec(), base.to_vec()).unwrap();
        let s2 = FlowSpec::new(doubled.clone(), doubled).unwrap();
        let g1 = general_coeffs(&plus, &minus, &s1).unwrap();
        let g2 = general_coeffs(&plus, &minus, &s2).unwrap();
        for (l1, l2) in [(&g1.plus, &g2.plus), (&g1.minus, &g2.minus)] {
            for n in p.window().sites() {
                for lev in 0..3 {
                    assert!((2.0 * l1.f(lev, n) - l2.f(lev, n)).norm() < 1e-15);
                    assert!((2.0 * l1.h(lev, n) - l2.h(lev, n)).norm() < 1e-15);
                }
                for lev in 0..=3 {
                    assert!((2.0 * l1.g(lev, n) - l2.g(lev, n)).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn short_ladder_is_rejected() {
        let p = random_pair(1, BoundaryMode::PadZero);
        let plus = homogeneous_coeffs(&p, 1, Sign::Plus).unwrap();
        let minus = homogeneous_coeffs(&p, 1, Sign::Minus).unwrap();
        let spec = FlowSpec::dnls(2);
        assert!(matches!(
            general_coeffs(&plus, &minus, &spec),
            Err(Error::InsufficientOrder { have: 1, need: 2 })
        ));
        assert!(general_coeffs(&minus, &plus, &FlowSpec::dnls(1)).is_err());
    }

    #[test]
    fn al_system_preset_matches_hand_coded_rhs() {
        for seed in 0..4 {
            let p = random_pair(seed, BoundaryMode::PadZero);
            let d = al_r_rhs(&p, &FlowSpec::al_system()).unwrap();
            assert!(d.max_abs_diff(&al_system_rhs(&p)) < 1e-15);
        }
    }

    #[test]
    fn second_order_matches_printed_flow_with_general_constants() {
        let spec = FlowSpec::new(
            vec![c(0.6, -0.1), c(-0.3, 0.0), c(0.2, 0.0)],
            vec![c(1.3, 0.2), c(0.4, 0.0), c(0.7, 0.0)],
        )
        .unwrap();
        let p = random_pair(17, BoundaryMode::Periodic);
        let d = al_r_rhs(&p, &spec).unwrap();
        assert!(d.max_abs_diff(&al_explicit_rhs(&p, &spec).unwrap()) < 1e-14);
    }

    #[test]
    fn zero_data_zero_derivative() {
        let w = LatticeWindow::new(-10, 10, BoundaryMode::PadZero).unwrap();
        let z = SequencePair::zeros(w);
        for spec in [FlowSpec::dnls(1), FlowSpec::dnls(3), FlowSpec::schur(), FlowSpec::al_system()] {
            assert_eq!(al_r_rhs(&z, &spec).unwrap().max_abs(), 0.0);
        }
    }

    #[test]
    fn g_levels_depend_only_on_products() {
        let p = random_pair(21, BoundaryMode::PadZero);
        let s = scaling_transform(&p, c(1.7, -0.9)).unwrap();
        for sign in [Sign::Plus, Sign::Minus] {
            let a = homogeneous_coeffs(&p, 4, sign).unwrap();
            let b = homogeneous_coeffs(&s, 4, sign).unwrap();
            for lev in 0..=4 {
                for n in p.window().sites() {
                    let scale = a.g(lev, n).norm().max(1e-3);
                    assert!((a.g(lev, n) - b.g(lev, n)).norm() / scale < 1e-13);
                }
            }
        }
    }

    #[test]
    fn difference_relations_hold_on_both_ladders() {
        for seed in 0..3 {
            let p = random_pair(seed + 30, BoundaryMode::PadZero);
            for sign in [Sign::Plus, Sign::Minus] {
                let l = homogeneous_coeffs(&p, 4, sign).unwrap();
                assert!(recursion_residual(&p, &l) < 1e-14);
            }
            let spec = FlowSpec::new(vec![c(0.5, 0.5), c(-1.0, 0.2), c(0.3, 0.0)], vec![c(1.0, 0.0), c(0.0, 2.0)]).unwrap();
            let g = coefficients(&p, &spec).unwrap();
            assert!(recursion_residual(&p, &g.plus) < 1e-14);
            assert!(recursion_residual(&p, &g.minus) < 1e-14);
        }
    }

    #[test]
    fn broken_ladder_is_detected() {
        let p = random_pair(5, BoundaryMode::PadZero);
        let mut l = homogeneous_coeffs(&p, 3, Sign::Minus).unwrap();
        let i = l.idx(0);
        l.g[2][i] += c(1e-6, 0.0);
        assert!(recursion_residual(&p, &l) > 1e-7);
    }

    #[test]
    fn constraint_examples() {
        let one = c(1.0, 0.0);
        let ok11 = FlowSpec::new(vec![-one, ZERO], vec![one, ZERO]).unwrap();
        let chk = check_constraint(&ok11);
        assert!(chk.applicable && chk.satisfied);

        let ok01 = FlowSpec::new(vec![one], vec![ZERO, one]).unwrap();
        assert!(check_constraint(&ok01).satisfied);

        let bad = check_constraint(&FlowSpec::dnls(1));
        assert!(!bad.satisfied);
        assert!((bad.residual - c(2.0, 0.0)).norm() < 1e-15);

        // AL system: c_{0,+} + c_{0,-} + c_(1,1) = 0
        let al = check_constraint(&FlowSpec::al_system());
        assert!(!al.satisfied && al.satisfied_with_cr);

        assert!(!check_constraint(&FlowSpec::phase(one)).applicable);
    }
}
