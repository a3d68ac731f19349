//! Classical fixed-step RK4 for any [`Flow`].
//!
//! In frozen-edge mode the derivative is zeroed on the edge band at every stage, so
//! band sites end each step exactly at their pre-step values.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flows::{AlSystem, Flow, FlowDerivative};
use crate::hierarchy::FlowSpec;
use crate::lattice::{BoundaryMode, SequencePair};

/// Sup norm above which a run is treated as blown up.
pub const BLOWUP_SUP_NORM: f64 = 1e6;

/// The hand-coded AL system for the preset, the general recursion otherwise.
pub fn flow_for(spec: &FlowSpec) -> Box<dyn Flow> {
    if *spec == FlowSpec::al_system() {
        Box::new(AlSystem)
    } else {
        Box::new(spec.clone())
    }
}

fn freeze_band(d: &mut FlowDerivative) {
    if let BoundaryMode::FrozenEdges { band } = d.window().boundary() {
        let n = d.dalpha.len();
        for i in (0..band).chain(n - band..n) {
            d.dalpha[i] = Complex64::default();
            d.dbeta[i] = Complex64::default();
        }
    }
}

fn rate(flow: &dyn Flow, x: &SequencePair) -> Result<FlowDerivative> {
    let mut d = flow.derivative(x)?;
    freeze_band(&mut d);
    Ok(d)
}

fn axpy(x: &SequencePair, s: f64, k: &FlowDerivative) -> SequencePair {
    let mut out = x.clone();
    for (a, da) in out.alpha_mut().iter_mut().zip(&k.dalpha) {
        *a += da * s;
    }
    for (b, db) in out.beta_mut().iter_mut().zip(&k.dbeta) {
        *b += db * s;
    }
    out
}

fn check_h(h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(Error::Validation(format!("time step must be positive, got {h}")));
    }
    Ok(())
}

fn guard(state: SequencePair, previous: &SequencePair, time: f64) -> Result<SequencePair> {
    let sup = state.sup_norm();
    if !state.is_finite() || !(sup <= BLOWUP_SUP_NORM) {
        return Err(Error::Blowup {
            time,
            sup_norm: sup,
            last_state: Box::new(previous.clone()),
        });
    }
    Ok(state)
}

fn rk4(flow: &dyn Flow, x: &SequencePair, h: f64) -> Result<SequencePair> {
    let k1 = rate(flow, x)?;
    let k2 = rate(flow, &axpy(x, h / 2.0, &k1))?;
    let k3 = rate(flow, &axpy(x, h / 2.0, &k2))?;
    let k4 = rate(flow, &axpy(x, h, &k3))?;
    let mut out = x.clone();
    let w = h / 6.0;
    for (i, a) in out.alpha_mut().iter_mut().enumerate() {
        *a += (k1.dalpha[i] + 2.0 * (k2.dalpha[i] + k3.dalpha[i]) + k4.dalpha[i]) * w;
    }
    for (i, b) in out.beta_mut().iter_mut().enumerate() {
        *b += (k1.dbeta[i] + 2.0 * (k2.dbeta[i] + k3.dbeta[i]) + k4.dbeta[i]) * w;
    }
    Ok(out)
}

/// One RK4 step of size `h`.
pub fn step(pair: &SequencePair, flow: &dyn Flow, h: f64) -> Result<SequencePair> {
    step_at(pair, flow, h, h)
}

fn step_at(pair: &SequencePair, flow: &dyn Flow, h: f64, time: f64) -> Result<SequencePair> {
    check_h(h)?;
    guard(rk4(flow, pair, h)?, pair, time)
}

/// A recorded observable value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Observation {
    Real(f64),
    Complex(Complex64),
}

/// Named function of `(t, state)` sampled along a run.
pub struct Observer<'a> {
    pub name: String,
    pub f: Box<dyn Fn(f64, &SequencePair) -> Observation + Send + Sync + 'a>,
}

impl<'a> Observer<'a> {
    pub fn new(name: impl Into<String>, f: impl Fn(f64, &SequencePair) -> Observation + Send + Sync + 'a) -> Self {
        Self {
            name: name.into(),
            f: Box::new(f),
        }
    }
}

#[derive(Default)]
pub struct EvolveOptions<'a> {
    /// Sample states and observers every `sample_every` steps (and at the final time); 0 means 1.
    pub sample_every: usize,
    pub observers: Vec<Observer<'a>>,
}

/// Sampled integral curve together with the per-step sup norm.
#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<SequencePair>,
    pub observables: BTreeMap<String, Vec<Observation>>,
    pub step_times: Vec<f64>,
    pub sup_norms: Vec<f64>,
}

impl Trajectory {
    pub fn final_state(&self) -> &SequencePair {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("trajectory holds the initial time")
    }
}

/// Number of steps of size `h` covering `[t0, t1]`; `h` must divide the interval.
pub fn step_count(t0: f64, t1: f64, h: f64) -> Result<usize> {
    check_h(h)?;
    let span = t1 - t0;
    if !(span > 0.0 && span.is_finite()) {
        return Err(Error::Validation(format!("need t1 > t0, got [{t0}, {t1}]")));
    }
    let n = (span / h).round();
    if n < 1.0 || (n * h - span).abs() > 1e-9 * span {
        return Err(Error::Validation(format!("step {h} does not divide the interval length {span}")));
    }
    Ok(n as usize)
}

/// Integrates from `t0` to `t1` with fixed step `h`.
pub fn evolve(
    pair: &SequencePair,
    flow: &dyn Flow,
    t0: f64,
    t1: f64,
    h: f64,
    options: &EvolveOptions,
) -> Result<Trajectory> {
    let steps = step_count(t0, t1, h)?;
    let every = options.sample_every.max(1);
    let mut traj = Trajectory {
        times: Vec::new(),
        states: Vec::new(),
        observables: options.observers.iter().map(|o| (o.name.clone(), Vec::new())).collect(),
        step_times: vec![t0],
        sup_norms: vec![pair.sup_norm()],
    };
    let record = |traj: &mut Trajectory, t: f64, x: &SequencePair| {
        traj.times.push(t);
        traj.states.push(x.clone());
        for o in &options.observers {
            let v = (o.f)(t, x);
            traj.observables.get_mut(&o.name).expect("observer registered").push(v);
        }
    };
    record(&mut traj, t0, pair);
    let mut x = pair.clone();
    for k in 1..=steps {
        let t = if k == steps { t1 } else { t0 + k as f64 * h };
        x = step_at(&x, flow, h, t)?;
        traj.step_times.push(t);
        traj.sup_norms.push(x.sup_norm());
        if k % every == 0 || k == steps {
            record(&mut traj, t, &x);
        }
    }
    Ok(traj)
}

/// Final state only, without sampling.
pub fn evolve_final(pair: &SequencePair, flow: &dyn Flow, t0: f64, t1: f64, h: f64) -> Result<SequencePair> {
    let steps = step_count(t0, t1, h)?;
    let mut x = pair.clone();
    for k in 1..=steps {
        x = step_at(&x, flow, h, t0 + k as f64 * h)?;
    }
    Ok(x)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceRow {
    pub h: f64,
    /// Distance to the exact solution, or to the next finer run.
    pub error: f64,
    /// `log2` ratio of this error to the next one, scaled by `log2(h_i / h_{i+1})`.
    pub order: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// Order estimated from the two finest rows.
    pub observed_order: Option<f64>,
}

/// Step-halving study at `t1` (starting from `t = 0`). With `exact`, errors are measured
/// against it; otherwise each run is compared with the next finer one. Runs execute
/// concurrently.
pub fn convergence_report(
    pair: &SequencePair,
    flow: &dyn Flow,
    t1: f64,
    h_list: &[f64],
    exact: Option<&SequencePair>,
) -> Result<ConvergenceReport> {
    if h_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::Validation("h_list must be strictly decreasing".into()));
    }
    if h_list.len() < 2 && exact.is_none() {
        return Ok(ConvergenceReport {
            rows: Vec::new(),
            observed_order: None,
        });
    }
    let finals: Vec<Result<SequencePair>> = std::thread::scope(|s| {
        let handles: Vec<_> = h_list
            .iter()
            .map(|&h| s.spawn(move || evolve_final(pair, flow, 0.0, t1, h)))
            .collect();
        handles.into_iter().map(|j| j.join().expect("convergence run panicked")).collect()
    });
    let finals = finals.into_iter().collect::<Result<Vec<_>>>()?;
    let errors: Vec<(f64, f64)> = match exact {
        Some(e) => h_list
            .iter()
            .zip(&finals)
            .map(|(&h, x)| Ok((h, x.max_abs_diff(e)?)))
            .collect::<Result<_>>()?,
        None => h_list
            .windows(2)
            .zip(finals.windows(2))
            .map(|(h, x)| Ok((h[0], x[0].max_abs_diff(&x[1])?)))
            .collect::<Result<_>>()?,
    };
    let mut rows: Vec<ConvergenceRow> = errors
        .iter()
        .map(|&(h, error)| ConvergenceRow { h, error, order: None })
        .collect();
    for i in 0..rows.len().saturating_sub(1) {
        let (h0, e0) = errors[i];
        let (h1, e1) = errors[i + 1];
        if e0 > 0.0 && e1 > 0.0 {
            rows[i].order = Some((e0 / e1).log2() / (h0 / h1).log2());
        }
    }
    let observed_order = rows.iter().rev().find_map(|r| r.order);
    Ok(ConvergenceReport { rows, observed_order })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flows::scaling_transform;
    use crate::lattice::{LatticeWindow, Profile};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn gaussian(len: usize, mode: BoundaryMode) -> SequencePair {
        Profile::gaussian(0.3, 5.0).build(LatticeWindow::centered(len, mode).unwrap()).unwrap()
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let w = LatticeWindow::new(-8, 8, BoundaryMode::PadZero).unwrap();
        let z = SequencePair::zeros(w);
        assert_eq!(step(&z, &AlSystem, 0.1).unwrap(), z);
    }

    #[test]
    fn phase_flow_one_step() {
        let p = gaussian(32, BoundaryMode::PadZero);
        let x = step(&p, &FlowSpec::phase(c(1.0, 0.0)), 0.1).unwrap();
        let rot = Complex64::from_polar(1.0, 0.1);
        for n in p.window().sites() {
            let bound = p.alpha_at(n).norm() * 1e-5 / 120.0 * 2.0;
            assert!((x.alpha_at(n) - p.alpha_at(n) * rot).norm() <= bound + 1e-18);
        }
    }

    #[test]
    fn single_site_spreads_at_first_order() {
        let w = LatticeWindow::new(-8, 8, BoundaryMode::PadZero).unwrap();
        let p = Profile::alpha_delta(0, 0.5).build(w).unwrap();
        let x = step(&p, &AlSystem, 1e-3).unwrap();
        for s in [-1, 1] {
            assert!((1e-4..=1e-3).contains(&x.alpha_at(s).norm()));
        }
    }

    #[test]
    fn bad_steps_are_rejected() {
        let p = gaussian(16, BoundaryMode::PadZero);
        assert!(step(&p, &AlSystem, 0.0).is_err());
        assert!(step(&p, &AlSystem, f64::NAN).is_err());
        assert!(step_count(0.0, 1.0, 0.3).is_err());
        assert!(step_count(1.0, 1.0, 0.1).is_err());
        assert_eq!(step_count(0.0, 1.0, 1e-3).unwrap(), 1000);
    }

    #[test]
    fn blowup_carries_the_last_finite_state() {
        let w = LatticeWindow::new(-4, 4, BoundaryMode::PadZero).unwrap();
        let p = SequencePair::from_fn(w, |_| (c(1.0, 0.0), c(0.0, 0.0)));
        let spec = FlowSpec::phase(c(0.0, -30.0));
        match evolve(&p, &spec, 0.0, 1.0, 0.01, &EvolveOptions::default()) {
            Err(Error::Blowup { time, sup_norm, last_state }) => {
                assert!(sup_norm > BLOWUP_SUP_NORM && time <= 1.0);
                assert!(last_state.is_finite() && last_state.sup_norm() <= BLOWUP_SUP_NORM);
            }
            other => panic!("expected blowup, got {other:?}"),
        }
    }

    #[test]
    fn frozen_band_does_not_move() {
        let w = LatticeWindow::centered(24, BoundaryMode::FrozenEdges { band: 2 }).unwrap();
        let p = SequencePair::from_fn(w, |n| (c(0.2, 0.0), c(if n > 0 { 0.1 } else { 0.0 }, 0.0)));
        let x = evolve_final(&p, &AlSystem, 0.0, 0.1, 0.01).unwrap();
        for i in [0, 1, 22, 23] {
            assert_eq!(x.alpha()[i], p.alpha()[i]);
            assert_eq!(x.beta()[i], p.beta()[i]);
        }
        assert_ne!(x.alpha()[5], p.alpha()[5]);
    }

    #[test]
    fn observers_and_sampling() {
        let p = gaussian(16, BoundaryMode::PadZero);
        let options = EvolveOptions {
            sample_every: 4,
            observers: vec![Observer::new("sup", |_, x| Observation::Real(x.sup_norm()))],
        };
        let t = evolve(&p, &AlSystem, 0.0, 1.0, 0.1, &options).unwrap();
        assert_eq!(t.times.len(), 4);
        assert_eq!(t.final_time(), 1.0);
        assert_eq!(t.sup_norms.len(), 11);
        assert_eq!(t.observables["sup"].len(), 4);
        assert!(t.times.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn defocusing_is_preserved() {
        let p = gaussian(40, BoundaryMode::PadZero);
        let x = evolve_final(&p, &AlSystem, 0.0, 1.0, 1e-2).unwrap();
        for n in p.window().sites() {
            assert!((x.beta_at(n) - x.alpha_at(n).conj()).norm() < 1e-9);
        }
    }

    #[test]
    fn scaling_commutes_with_evolution() {
        let p = gaussian(32, BoundaryMode::PadZero);
        let k = c(2.0, 0.0);
        for spec in [FlowSpec::al_system(), FlowSpec::dnls(2)] {
            let a = evolve_final(&p, &spec, 0.0, 0.5, 0.01).unwrap();
            let b = evolve_final(&scaling_transform(&p, k).unwrap(), &spec, 0.0, 0.5, 0.01).unwrap();
            let back = scaling_transform(&b, k.inv()).unwrap();
            assert!(a.max_abs_diff(&back).unwrap() < 1e-12);
        }
    }

    #[test]
    fn convergence_orders() {
        let p = gaussian(32, BoundaryMode::Periodic);
        let single = convergence_report(&p, &AlSystem, 1.0, &[0.1], None).unwrap();
        assert!(single.rows.is_empty());

        let rep = convergence_report(&p, &AlSystem, 1.0, &[0.1, 0.05, 0.025, 0.0125], None).unwrap();
        assert_eq!(rep.rows.len(), 3);
        assert!((rep.observed_order.unwrap() - 4.0).abs() < 0.3, "{rep:?}");

        let spec = FlowSpec::phase(c(2.0, 0.0));
        let rot = Complex64::from_polar(1.0, 2.0);
        let exact = SequencePair::from_fn(*p.window(), |n| {
            let (a, b) = p.value_at(n);
            (a * rot, b * rot.conj())
        });
        let rep = convergence_report(&p, &spec, 1.0, &[0.1, 0.05, 0.025], Some(&exact)).unwrap();
        assert!((rep.observed_order.unwrap() - 4.0).abs() < 0.2, "{rep:?}");
        assert!(convergence_report(&p, &spec, 1.0, &[0.05, 0.1], None).is_err());
    }
}
