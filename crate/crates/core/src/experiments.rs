//! Numerical experiments: two-solution closeness with a Gronwall envelope, preservation
//! of power-law asymptotics, and spreading of compactly supported data.

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::flows::Flow;
use crate::hierarchy::{check_constraint, ConstraintCheck, FlowSpec};
use crate::integrator::{evolve, flow_for, step, EvolveOptions, Trajectory};
use crate::lattice::{
    difference_norm, weighted_norm, weighted_norm_over, BoundaryMode, LatticeWindow, NormExponent, Profile,
    SequencePair, Weight, WeightRule,
};

/// Relative slack allowed above the fitted envelope.
pub const ENVELOPE_SLACK: f64 = 0.1;
/// Window-doubling ratio below which a norm counts as window independent.
pub const STABILITY_RATIO_MAX: f64 = 1.2;

fn run_pair(a: &SequencePair, b: &SequencePair, flow: &dyn Flow, t1: f64, h: f64, every: usize) -> Result<(Trajectory, Trajectory)> {
    let opts = EvolveOptions {
        sample_every: every,
        observers: Vec::new(),
    };
    let (ra, rb) = std::thread::scope(|s| {
        let ja = s.spawn(|| evolve(a, flow, 0.0, t1, h, &opts));
        let jb = s.spawn(|| evolve(b, flow, 0.0, t1, h, &opts));
        (ja.join().expect("trajectory panicked"), jb.join().expect("trajectory panicked"))
    });
    Ok((ra?, rb?))
}

/// Sites the experiments measure on: the frozen band is excluded.
fn measured_sites(window: &LatticeWindow) -> std::ops::RangeInclusive<i64> {
    match window.boundary() {
        BoundaryMode::FrozenEdges { band } => window.interior(band),
        _ => window.sites(),
    }
}

/// Fitted Gronwall envelope `E(t) = d0 e^{Ct} + (D/C)(e^{Ct} - 1)`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct GronwallFit {
    pub c: f64,
    pub d: f64,
    pub delta0: f64,
    pub envelope_ok: bool,
    /// `max_t delta(t) / E(t)`.
    pub max_ratio: f64,
    /// `D <= 0.01 d0 (1 + C)`.
    pub d_negligible: bool,
}

impl GronwallFit {
    pub fn envelope(&self, t: f64) -> f64 {
        envelope(self.delta0, self.c, self.d, t)
    }
}

/// `(e^{Ct} - 1) / C`, continuous at `C = 0`.
fn phi(c: f64, t: f64) -> f64 {
    if (c * t).abs() < 1e-12 {
        t
    } else {
        (c * t).exp_m1() / c
    }
}

fn envelope(d0: f64, c: f64, d: f64, t: f64) -> f64 {
    d0 * (c * t).exp() + d * phi(c, t)
}

/// Minimises `f` over the plane from `x0`.
fn nelder_mead(f: impl Fn([f64; 2]) -> f64, x0: [f64; 2], scale: f64) -> [f64; 2] {
    let mut simplex = [x0, [x0[0] + scale, x0[1]], [x0[0], x0[1] + scale]];
    let mut vals = simplex.map(&f);
    for _ in 0..2000 {
        let mut idx = [0, 1, 2];
        idx.sort_by(|&i, &j| vals[i].total_cmp(&vals[j]));
        simplex = idx.map(|i| simplex[i]);
        vals = idx.map(|i| vals[i]);
        if (vals[2] - vals[0]).abs() <= 1e-14 * (1.0 + vals[0].abs()) {
            break;
        }
        let centroid = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let towards = |t: f64| {
            [
                centroid[0] + t * (simplex[2][0] - centroid[0]),
                centroid[1] + t * (simplex[2][1] - centroid[1]),
            ]
        };
        let r = towards(-1.0);
        let fr = f(r);
        if fr < vals[0] {
            let e = towards(-2.0);
            let fe = f(e);
            (simplex[2], vals[2]) = if fe < fr { (e, fe) } else { (r, fr) };
        } else if fr < vals[1] {
            (simplex[2], vals[2]) = (r, fr);
        } else {
            let k = if fr < vals[2] { towards(-0.5) } else { towards(0.5) };
            let fk = f(k);
            if fk < vals[2].min(fr) {
                (simplex[2], vals[2]) = (k, fk);
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        (simplex[0][0] + simplex[i][0]) / 2.0,
                        (simplex[0][1] + simplex[i][1]) / 2.0,
                    ];
                    vals[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&i, &j| vals[i].total_cmp(&vals[j])).expect("non-empty simplex");
    simplex[best]
}

/// Least-squares fit of `log` of the running maximum of `delta` to `log E(t)`, with
/// `C >= 0` and `D >= 0`. A zero series gives `C = D = 0` and `envelope_ok`.
pub fn gronwall_fit(times: &[f64], delta: &[f64]) -> Result<GronwallFit> {
    if times.len() != delta.len() || times.is_empty() {
        return Err(Error::Dimension(format!(
            "{} times for {} norm samples",
            times.len(),
            delta.len()
        )));
    }
    if delta.iter().any(|d| !(d.is_finite() && *d >= 0.0)) {
        return Err(Error::Validation("norm series must be finite and nonnegative".into()));
    }
    let d0 = delta[0];
    if delta.iter().all(|&d| d == 0.0) {
        return Ok(GronwallFit {
            c: 0.0,
            d: 0.0,
            delta0: 0.0,
            envelope_ok: true,
            max_ratio: 0.0,
            d_negligible: true,
        });
    }
    if d0 == 0.0 {
        return Err(Error::Validation("norm series vanishes at t = 0 but not later".into()));
    }
    let t0 = times[0];
    let ts: Vec<f64> = times.iter().map(|t| t - t0).collect();
    let mut running = 0.0f64;
    let ys: Vec<f64> = delta
        .iter()
        .map(|&d| {
            running = running.max(d);
            (running / d0).ln()
        })
        .collect();

    // D = 0 has the closed form C = sum t y / sum t^2.
    let tt: f64 = ts.iter().map(|t| t * t).sum();
    let c_hom = if tt > 0.0 { ts.iter().zip(&ys).map(|(t, y)| t * y).sum::<f64>() / tt } else { 0.0 };
    let loss = |[u, v]: [f64; 2]| {
        let (c, s) = (u.abs(), v * v);
        ts.iter()
            .zip(&ys)
            .map(|(&t, &y)| {
                let r = ((c * t).exp() + s * phi(c, t)).ln() - y;
                r * r
            })
            .sum::<f64>()
    };
    let starts = [[c_hom.max(0.0), 0.0], [c_hom.max(0.0), 0.3], [0.0, 1.0]];
    let best = starts
        .iter()
        .map(|&x0| nelder_mead(loss, x0, 0.1))
        .min_by(|a, b| loss(*a).total_cmp(&loss(*b)))
        .expect("at least one start");
    let (c, d) = (best[0].abs(), best[1] * best[1] * d0);

    let max_ratio = ts
        .iter()
        .zip(delta)
        .map(|(&t, &x)| x / envelope(d0, c, d, t))
        .fold(0.0, f64::max);
    Ok(GronwallFit {
        c,
        d,
        delta0: d0,
        envelope_ok: max_ratio <= 1.0 + ENVELOPE_SLACK,
        max_ratio,
        d_negligible: d <= 0.01 * d0 * (1.0 + c),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosenessReport {
    pub times: Vec<f64>,
    pub delta_norm: Vec<f64>,
    pub fitted_c: f64,
    pub fitted_d: f64,
    pub envelope_ok: bool,
    pub max_envelope_ratio: f64,
    pub d_negligible: bool,
}

/// Evolves both solutions side by side and fits an envelope to `||a(t) - b(t)||_{w,p}`.
/// `samples` caps the number of recorded times (0 records every step).
pub fn closeness_run(
    pair_a: &SequencePair,
    pair_b: &SequencePair,
    weight: &Weight,
    p: NormExponent,
    flow: &dyn Flow,
    t1: f64,
    h: f64,
    samples: usize,
) -> Result<ClosenessReport> {
    if !pair_a.window().same_sites(pair_b.window()) || !pair_a.window().same_sites(weight.window()) {
        return Err(Error::Dimension("closeness needs both pairs and the weight on one window".into()));
    }
    let steps = crate::integrator::step_count(0.0, t1, h)?;
    let every = if samples == 0 { 1 } else { steps.div_ceil(samples).max(1) };
    let (ta, tb) = run_pair(pair_a, pair_b, flow, t1, h, every)?;
    let sites = measured_sites(pair_a.window());
    let delta_norm = ta
        .states
        .iter()
        .zip(&tb.states)
        .map(|(x, y)| Ok(weighted_norm_over(&x.difference(y)?, weight, p, sites.clone())))
        .collect::<Result<Vec<f64>>>()?;
    let fit = gronwall_fit(&ta.times, &delta_norm)?;
    Ok(ClosenessReport {
        times: ta.times,
        delta_norm,
        fitted_c: fit.c,
        fitted_d: fit.d,
        envelope_ok: fit.envelope_ok,
        max_envelope_ratio: fit.max_ratio,
        d_negligible: fit.d_negligible,
    })
}

/// Norms the asymptotics statement assumes finite, on one window at `t = 0`.
#[derive(Debug, Clone, Serialize)]
pub struct HypothesisNorms {
    pub window_len: usize,
    /// `||(alpha_0, beta_0)||_{w,inf}`.
    pub data_norm: f64,
    /// `||(alpha_0 - alpha_0^+, beta_0 - beta_0^+)||_{w^2,inf}`.
    pub difference_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AsymptoticsReport {
    pub delta: f64,
    pub weight_exponent: f64,
    pub p: NormExponent,
    pub times: Vec<f64>,
    pub window_sizes: Vec<usize>,
    /// One residual series per window.
    pub residual_norm_t: Vec<Vec<f64>>,
    /// Final residual on the last window over the first.
    pub stability_ratio: f64,
    pub stable: bool,
    pub hypothesis: Vec<HypothesisNorms>,
    /// Hypothesis norms are window independent (doubling ratio at most 1.2).
    pub in_hypothesis: bool,
    pub constraint: ConstraintCheck,
    pub warnings: Vec<String>,
}

fn ratio(large: f64, small: f64) -> f64 {
    if small == 0.0 {
        if large == 0.0 {
            1.0
        } else {
            f64::INFINITY
        }
    } else {
        large / small
    }
}

/// Evolves power-law data `alpha = a n^-delta`, `beta = b n^-delta` (`n > 0`) on centred
/// frozen-edge windows of the given sizes and tracks `(alpha(t) - alpha_0, beta(t) - beta_0)`
/// in the weighted norm: `w^2` with the sup norm, `w` for finite `p`, where
/// `w(n) = (1+n)^min(delta, (delta+1)/2)` for `n > 0`. Residuals are taken over the middle
/// half of each window, away from the frozen edges.
#[allow(clippy::too_many_arguments)]
pub fn asymptotics_run(
    a: Complex64,
    b: Complex64,
    delta: f64,
    spec: &FlowSpec,
    t1: f64,
    h: f64,
    windows: &[usize],
    p: NormExponent,
    samples: usize,
) -> Result<AsymptoticsReport> {
    if windows.is_empty() {
        return Err(Error::Validation("asymptotics needs at least one window size".into()));
    }
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::Validation(format!("delta must be >= 0, got {delta}")));
    }
    let mut warnings = Vec::new();
    let constraint = check_constraint(spec);
    if *spec != FlowSpec::al_system() && !(constraint.applicable && (constraint.satisfied || constraint.satisfied_with_cr)) {
        warnings.push(format!(
            "flow {} is outside the scope of the asymptotics statement (constraint residual {})",
            crate::flows::Flow::name(spec),
            constraint.residual
        ));
    }
    let exponent = delta.min((delta + 1.0) / 2.0);
    let rule = WeightRule::PowerTail { exponent };
    let profile = Profile::power_tail(a, b, delta);
    let flow = flow_for(spec);
    let band = spec.frozen_band();
    let steps = crate::integrator::step_count(0.0, t1, h)?;
    let every = if samples == 0 { 1 } else { steps.div_ceil(samples).max(1) };

    let runs = std::thread::scope(|s| {
        let handles: Vec<_> = windows
            .iter()
            .map(|&len| {
                let (rule, profile, flow) = (&rule, &profile, &*flow);
                s.spawn(move || -> Result<(Vec<f64>, Vec<f64>, HypothesisNorms)> {
                    let window = LatticeWindow::centered(len, BoundaryMode::FrozenEdges { band })?;
                    let x0 = profile.build(window)?;
                    let w = Weight::new(window, rule.clone())?;
                    let w_res = match p {
                        NormExponent::Infinity => w.squared(),
                        NormExponent::Finite(_) => w.clone(),
                    };
                    let hyp = HypothesisNorms {
                        window_len: len,
                        data_norm: weighted_norm(&x0, &w, NormExponent::Infinity)?,
                        difference_norm: difference_norm(&x0, &w.squared(), NormExponent::Infinity)?,
                    };
                    let traj = evolve(&x0, flow, 0.0, t1, h, &EvolveOptions { sample_every: every, observers: Vec::new() })?;
                    let sites = window.middle_half();
                    let res = traj
                        .states
                        .iter()
                        .map(|x| Ok(weighted_norm_over(&x.difference(&x0)?, &w_res, p, sites.clone())))
                        .collect::<Result<Vec<_>>>()?;
                    Ok((traj.times, res, hyp))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|j| j.join().expect("asymptotics run panicked"))
            .collect::<Vec<_>>()
    });
    let runs = runs.into_iter().collect::<Result<Vec<_>>>()?;
    let times = runs[0].0.clone();
    let residual_norm_t: Vec<Vec<f64>> = runs.iter().map(|r| r.1.clone()).collect();
    let hypothesis: Vec<HypothesisNorms> = runs.into_iter().map(|r| r.2).collect();
    let last = |v: &Vec<f64>| *v.last().expect("residual series is non-empty");
    let stability_ratio = ratio(last(residual_norm_t.last().unwrap()), last(&residual_norm_t[0]));
    let (h_first, h_last) = (&hypothesis[0], hypothesis.last().unwrap());
    let in_hypothesis = [
        (h_last.data_norm, h_first.data_norm),
        (h_last.difference_norm, h_first.difference_norm),
    ]
    .iter()
    .all(|&(l, s)| l.is_finite() && ratio(l, s) <= STABILITY_RATIO_MAX);
    if !in_hypothesis {
        warnings.push("initial data grow with the window in the hypothesis norms".into());
    }
    Ok(AsymptoticsReport {
        delta,
        weight_exponent: exponent,
        p,
        times,
        window_sizes: windows.to_vec(),
        stable: stability_ratio.is_finite() && stability_ratio <= STABILITY_RATIO_MAX,
        residual_norm_t,
        stability_ratio,
        hypothesis,
        in_hypothesis,
        constraint,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct SupportSpreadReport {
    /// First and last site with nonzero data; `None` for zero data.
    pub support: Option<(i64, i64)>,
    pub h: f64,
    pub initial_sup_norm: f64,
    /// `1e-2 h sup|x_0|`.
    pub threshold: f64,
    /// `(site, |alpha|, |beta|)` at the two neighbours of the support after one step.
    pub left: Option<(i64, f64, f64)>,
    pub right: Option<(i64, f64, f64)>,
    pub spread: bool,
}

/// One step from compactly supported data; reports what appeared just outside the support.
pub fn support_spread_run(pair: &SequencePair, flow: &dyn Flow, h: f64) -> Result<SupportSpreadReport> {
    let window = *pair.window();
    let nonzero: Vec<i64> = window
        .sites()
        .filter(|&n| {
            let (a, b) = pair.value_at(n);
            a.norm() > 0.0 || b.norm() > 0.0
        })
        .collect();
    let sup0 = pair.sup_norm();
    let threshold = 1e-2 * h * sup0;
    let (Some(&lo), Some(&hi)) = (nonzero.first(), nonzero.last()) else {
        let x = step(pair, flow, h)?;
        return Ok(SupportSpreadReport {
            support: None,
            h,
            initial_sup_norm: 0.0,
            threshold,
            left: None,
            right: None,
            spread: x.sup_norm() > 0.0,
        });
    };
    if lo <= window.n_min() || hi >= window.n_max() {
        return Err(Error::Validation(format!(
            "support [{lo}, {hi}] must lie strictly inside [{}, {}]",
            window.n_min(),
            window.n_max()
        )));
    }
    let x = step(pair, flow, h)?;
    let probe = |n: i64| {
        let (a, b) = x.value_at(n);
        (n, a.norm(), b.norm())
    };
    let (left, right) = (probe(lo - 1), probe(hi + 1));
    let exceeds = |(_, a, b): (i64, f64, f64)| a.max(b) > threshold;
    Ok(SupportSpreadReport {
        support: Some((lo, hi)),
        h,
        initial_sup_norm: sup0,
        threshold,
        left: Some(left),
        right: Some(right),
        spread: exceeds(left) && exceeds(right),
    })
}
