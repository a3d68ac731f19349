//! Finite lattice windows, the state pair `(alpha, beta)`, weights and weighted norms.
//!
//! A window stands in for the doubly infinite lattice. Values past its ends are
//! supplied by a [`BoundaryMode`]; statements "for all n" are checked on window
//! interiors and re-run on a doubled window to expose boundary effects.

mod pair;
mod profile;
mod weight;
mod window;

pub use pair::{ProductReport, SequencePair};
pub use profile::{make_profile, Profile, PRODUCT_ONE_TOL};
pub use weight::{difference_norm, weighted_norm, weighted_norm_over, NormExponent, Weight, WeightRule};
pub use window::{BoundaryMode, LatticeWindow, MIN_WINDOW_LEN};

/// `shift` in functional form: `n -> (alpha(n + j), beta(n + j))`.
pub fn shift(pair: &SequencePair, j: i64, mode: BoundaryMode) -> SequencePair {
    pair.shift_with(j, mode)
}

#[cfg(test)]
mod tests {
    use num_complex::Complex64;
    use proptest::prelude::*;

    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_shift_is_identity() {
        let w = LatticeWindow::new(-5, 5, BoundaryMode::PadZero).unwrap();
        let p = SequencePair::from_fn(w, |n| (c(n as f64, 1.0), c(0.5, -(n as f64))));
        assert_eq!(shift(&p, 0, BoundaryMode::PadZero), p);
    }

    #[test]
    fn single_site_shift_pad_zero() {
        let w = LatticeWindow::new(-5, 5, BoundaryMode::PadZero).unwrap();
        let p = Profile::alpha_delta(0, 1.0).build(w).unwrap();
        let s = shift(&p, 1, BoundaryMode::PadZero);
        for n in w.sites() {
            let expect = if n == -1 { 1.0 } else { 0.0 };
            assert_eq!(s.alpha_at(n), c(expect, 0.0));
        }
    }

    #[test]
    fn constant_is_shift_invariant_periodic() {
        let w = LatticeWindow::new(0, 11, BoundaryMode::Periodic).unwrap();
        let p = SequencePair::from_fn(w, |_| (c(0.2, 0.3), c(0.1, 0.0)));
        for j in [-11, -3, 1, 7, 11] {
            assert_eq!(shift(&p, j, BoundaryMode::Periodic), p);
        }
    }

    #[test]
    fn frozen_edges_clamp() {
        let w = LatticeWindow::new(0, 9, BoundaryMode::FrozenEdges { band: 1 }).unwrap();
        let p = SequencePair::from_fn(w, |n| (c(n as f64, 0.0), c(0.0, 0.0)));
        let s = p.shift(3);
        assert_eq!(s.alpha_at(9), c(9.0, 0.0));
        assert_eq!(s.alpha_at(6), c(9.0, 0.0));
        assert_eq!(p.shift(-2).alpha_at(0), c(0.0, 0.0));
    }

    #[test]
    fn product_report_counts_zero_sites() {
        let w = LatticeWindow::new(0, 9, BoundaryMode::PadZero).unwrap();
        let p = SequencePair::from_fn(w, |n| if n < 3 { (c(0.5, 0.0), c(0.5, 0.0)) } else { (c(0.5, 0.0), c(0.0, 0.0)) });
        let r = p.product_report();
        assert_eq!(r.zero_product_sites, 7);
        assert!((r.min_one_minus_product - 0.75).abs() < 1e-15);
        assert!((r.max_product - 0.25).abs() < 1e-15);
    }

    fn arb_pair(len: usize, mode: BoundaryMode) -> impl Strategy<Value = SequencePair> {
        let w = LatticeWindow::new(-(len as i64) / 2, (len as i64 + 1) / 2 - 1, mode).unwrap();
        prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), len).prop_map(
            move |v| {
                let (alpha, beta) = v.into_iter().map(|(a, b, c_, d)| (c(a, b), c(c_, d))).unzip();
                SequencePair::new(w, alpha, beta).unwrap()
            },
        )
    }

    fn arb_exponent() -> impl Strategy<Value = NormExponent> {
        prop_oneof![
            (1.0..6.0f64).prop_map(NormExponent::Finite),
            Just(NormExponent::Infinity)
        ]
    }

    proptest! {
        #[test]
        fn periodic_shift_inverts(pair in arb_pair(16, BoundaryMode::Periodic), j in -15i64..15) {
            prop_assert_eq!(pair.shift(j).shift(-j), pair);
        }

        #[test]
        fn norm_is_monotone_in_weight(pair in arb_pair(16, BoundaryMode::PadZero), p in arb_exponent(), k in 0.0..2.0f64) {
            let w = *pair.window();
            let small = Weight::new(w, WeightRule::OnePlusAbs).unwrap();
            let large = Weight::new(w, WeightRule::Power { base: Box::new(WeightRule::OnePlusAbs), power: 1.0 + k }).unwrap();
            let lhs = weighted_norm(&pair, &small, p).unwrap();
            let rhs = weighted_norm(&pair, &large, p).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-14));
        }

        #[test]
        fn shift_is_bounded(pair in arb_pair(16, BoundaryMode::PadZero), p in arb_exponent(), up in any::<bool>(), e in 0.5..2.0f64) {
            let w = *pair.window();
            let weight = Weight::new(w, WeightRule::Power { base: Box::new(WeightRule::OnePlusAbs), power: e }).unwrap();
            let shifted = pair.shift(if up { 1 } else { -1 });
            let bound = weight.shift_ratio_bound().powf(p.shift_bound_exponent());
            let lhs = weighted_norm(&shifted, &weight, p).unwrap();
            let rhs = bound * weighted_norm(&pair, &weight, p).unwrap();
            prop_assert!(lhs <= rhs * (1.0 + 1e-14));
        }

        #[test]
        fn sup_norm_is_the_brute_force_max(pair in arb_pair(16, BoundaryMode::PadZero)) {
            let w = *pair.window();
            let weight = Weight::new(w, WeightRule::OnePlusAbs).unwrap();
            let mut brute = 0.0f64;
            for (i, n) in w.sites().enumerate() {
                brute = brute.max((1.0 + n.unsigned_abs() as f64) * (pair.alpha()[i].norm() + pair.beta()[i].norm()));
            }
            prop_assert_eq!(weighted_norm(&pair, &weight, NormExponent::Infinity).unwrap(), brute);
        }
    }
}
