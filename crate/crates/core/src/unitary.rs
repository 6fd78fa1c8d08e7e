//! Pure-state evolution in the doublet and its kinematic geometric phase.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{CVec, C64};
use crate::model::{eigensystem, Branch, JcParams, PureState2};
use crate::phase::{kinematic_series, PhaseSeries};

/// Default lower bound on samples per pseudo-period for [`propagate`].
pub const MIN_STEPS_PER_PERIOD: f64 = 1000.0;

/// Sampling-density contract between consecutive samples.
pub const MIN_CONSECUTIVE_OVERLAP: f64 = 0.99;

#[derive(Debug, Clone, PartialEq)]
pub struct PureTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<PureState2>,
    pub step: f64,
}

impl PureTrajectory {
    pub fn new(times: Vec<f64>, states: Vec<PureState2>) -> Result<Self> {
        if times.is_empty() || times.len() != states.len() {
            return Err(Error::model("trajectory needs matching, non-empty times and states"));
        }
        for s in &states {
            if (s.norm() - 1.0).abs() > 1e-10 {
                return Err(Error::model(format!("trajectory state has norm {}", s.norm())));
            }
        }
        for (k, w) in states.windows(2).enumerate() {
            let ov = w[0].overlap(&w[1]).norm();
            if ov <= MIN_CONSECUTIVE_OVERLAP {
                return Err(Error::model(format!(
                    "samples {k} and {} violate the sampling contract (|overlap| = {ov:.4})",
                    k + 1
                )));
            }
        }
        let step = if times.len() > 1 { times[1] - times[0] } else { 0.0 };
        Ok(Self { times, states, step })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn vectors(&self) -> Vec<CVec<2>> {
        self.states.iter().map(PureState2::as_array).collect()
    }
}

/// `n + 1` uniformly spaced times on `[0, t_final]` with spacing at most
/// `max_step`. The grid always ends exactly at `t_final`.
pub fn uniform_grid(t_final: f64, max_step: f64) -> Result<Vec<f64>> {
    if !(t_final > 0.0 && t_final.is_finite()) {
        return Err(Error::model(format!("t_final must be positive, got {t_final}")));
    }
    if !(max_step > 0.0 && max_step.is_finite()) {
        return Err(Error::model(format!("step must be positive, got {max_step}")));
    }
    let n = ((t_final / max_step) - 1e-9).ceil().max(1.0) as usize;
    Ok((0..=n).map(|k| t_final * k as f64 / n as f64).collect())
}

/// exp(−iHt)|ψ⟩ from the spectral form cos(Ωt/2)·1 − i sin(Ωt/2)·H/(Ω/2).
pub fn evolve(params: &JcParams, initial: &PureState2, t: f64) -> PureState2 {
    let omega = params.rabi_frequency();
    let (sin, cos) = (0.5 * omega * t).sin_cos();
    let c = params.cos_theta();
    let s = 2.0 * params.coupling() / omega;
    let [a, b] = initial.as_array();
    let minus_i_sin = C64::new(0.0, -sin);
    PureState2 { amp_e_n: a * cos + minus_i_sin * (a * c + b * s), amp_g_n1: b * cos + minus_i_sin * (a * s - b * c) }
}

/// Propagate with the default sampling bound step ≤ τ/1000.
pub fn propagate(params: &JcParams, initial: &PureState2, t_final: f64, step: f64) -> Result<PureTrajectory> {
    propagate_with(params, initial, t_final, step, MIN_STEPS_PER_PERIOD)
}

/// Propagate on a uniform grid; `step` must not exceed τ/`min_steps_per_period`.
pub fn propagate_with(
    params: &JcParams,
    initial: &PureState2,
    t_final: f64,
    step: f64,
    min_steps_per_period: f64,
) -> Result<PureTrajectory> {
    PureState2::new(initial.amp_e_n, initial.amp_g_n1)?;
    let limit = params.period() / min_steps_per_period;
    if step > limit * (1.0 + 1e-12) {
        return Err(Error::model(format!("step {step:.3e} exceeds tau/{min_steps_per_period} = {limit:.3e}")));
    }
    let times = uniform_grid(t_final, step)?;
    let states = times.iter().map(|&t| evolve(params, initial, t)).collect();
    PureTrajectory::new(times, states)
}

/// Discrete kinematic geometric phase of a pure trajectory.
///
/// Samples where ⟨ψ(0)|ψ(t)⟩ vanishes are flagged undefined.
pub fn kinematic_gp(traj: &PureTrajectory) -> PhaseSeries {
    kinematic_series(&traj.times, &traj.vectors(), &vec![false; traj.len()])
}

/// Closed-form kinematic phase for the initial state |e,n⟩:
///
/// ```text
/// φ(t) = π cos θₙ (t/τ) − π[t/τ + 1/2] − arctan{cos θₙ tan(π t/τ)}
/// ```
///
/// The integer part and the arctan branch are evaluated jointly as
/// `kπ + atan2(cos θₙ sin y, cos y)` with `k = round(t/τ)` and
/// `y = π t/τ − kπ ∈ [−π/2, π/2]`, which is continuous in `t` whenever
/// cos θₙ ≠ 0.
pub fn closed_form_gp(params: &JcParams, t: f64) -> f64 {
    let c = params.cos_theta();
    let s = t / params.period();
    let k = s.round();
    let y = PI * (s - k);
    let (sin_y, cos_y) = y.sin_cos();
    PI * c * s - (k * PI + (c * sin_y).atan2(cos_y))
}

/// The loop R(φ)|Φₙ^±⟩, φ ∈ [0, 2π], traced when the field phase is cycled.
/// Sample times are the phase values φ.
pub fn phase_shift_loop(params: &JcParams, branch: Branch, samples: usize) -> Result<PureTrajectory> {
    if samples < 2 {
        return Err(Error::model("phase-shift loop needs at least two samples"));
    }
    let start = eigensystem(params).state(branch);
    let n = f64::from(params.n);
    let (times, states): (Vec<f64>, Vec<PureState2>) = (0..samples)
        .map(|k| {
            let phi = 2.0 * PI * k as f64 / (samples - 1) as f64;
            let state = PureState2 {
                amp_e_n: start.amp_e_n * C64::from_polar(1.0, -phi * n),
                amp_g_n1: start.amp_g_n1 * C64::from_polar(1.0, -phi * (n + 1.0)),
            };
            (phi, state)
        })
        .unzip();
    PureTrajectory::new(times, states)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::berry_phase;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn p(delta: f64) -> JcParams {
        JcParams::new(delta, 1.0).unwrap()
    }

    #[test]
    fn eigenstate_ray_is_stationary() {
        let params = p(1.3);
        let es = eigensystem(&params);
        let tau = params.period();
        let traj = propagate(&params, &es.state_plus, 2.0 * tau, tau / 1000.0).unwrap();
        for (t, s) in traj.times.iter().zip(&traj.states) {
            let expected = es.state_plus.with_phase(-es.energy_plus * t);
            assert!((s.amp_e_n - expected.amp_e_n).norm() < 1e-12);
            assert!((s.amp_g_n1 - expected.amp_g_n1).norm() < 1e-12);
        }
        assert!(kinematic_gp(&traj).values().iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn resonant_half_period_transfers_population() {
        let params = p(0.0);
        let s = evolve(&params, &PureState2::excited(), params.period() / 2.0);
        assert!(s.amp_e_n.norm() < 1e-15);
        assert!((s.amp_g_n1 - C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn full_period_is_cyclic() {
        for delta in [0.0, 0.3, 2.0, 5.0] {
            let params = p(delta).with_sector(1).unwrap();
            let s = evolve(&params, &PureState2::excited(), params.period());
            assert!((s.amp_e_n.norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn norm_is_preserved() {
        let params = p(0.7);
        let init = PureState2::normalized(C64::new(0.3, 0.2), C64::new(-0.5, 0.4)).unwrap();
        let traj = propagate(&params, &init, 5.0 * params.period(), params.period() / 1000.0).unwrap();
        assert!(traj.states.iter().all(|s| (s.norm() - 1.0).abs() < 1e-12));
    }

    #[test]
    fn rejects_bad_inputs() {
        let params = p(0.0);
        let bad = PureState2 { amp_e_n: C64::new(1.0, 0.0), amp_g_n1: C64::new(1.0, 0.0) };
        assert!(propagate(&params, &bad, 1.0, 1e-4).is_err());
        assert!(propagate(&params, &PureState2::excited(), 1.0, params.period() / 10.0).is_err());
    }

    #[test]
    fn grid_ends_exactly() {
        let g = uniform_grid(3.0, 0.7).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(*g.last().unwrap(), 3.0);
        assert_eq!(uniform_grid(1.0, 0.25).unwrap().len(), 5);
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(closed_form_gp(&p(2.0), 0.0), 0.0);
        let params = p(2.0);
        let quarter = closed_form_gp(&params, params.period() / 4.0);
        let expected = PI * FRAC_1_SQRT_2 * 0.25 - (FRAC_1_SQRT_2).atan();
        assert!((quarter - expected).abs() < 1e-14);
        assert!((quarter + 0.0601).abs() < 1e-4);
        for delta in [0.0, 0.5, 1.0, 2.0, 5.0] {
            let params = p(delta);
            let full = closed_form_gp(&params, params.period());
            assert!((full + PI * (1.0 - params.cos_theta())).abs() < 1e-12);
        }
    }

    #[test]
    fn closed_form_is_continuous_off_resonance() {
        let params = p(0.05);
        let tau = params.period();
        let mut prev = 0.0;
        for k in 1..=30_000 {
            let v = closed_form_gp(&params, 3.0 * tau * k as f64 / 30_000.0);
            assert!((v - prev).abs() < 0.1, "jump at sample {k}");
            prev = v;
        }
    }

    #[test]
    fn discrete_phase_at_one_period() {
        let params = p(2.0);
        let tau = params.period();
        let traj = propagate(&params, &PureState2::excited(), tau, tau / 1e4).unwrap();
        let phi = kinematic_gp(&traj).last().unwrap();
        assert!((phi + PI * (1.0 - FRAC_1_SQRT_2)).abs() < 1e-6);
        assert!((phi + 0.9202).abs() < 1e-4);
    }

    #[test]
    fn resonant_phase_is_minus_pi() {
        let params = p(0.0);
        let tau = params.period();
        let traj = propagate(&params, &PureState2::excited(), tau, tau / 2000.0).unwrap();
        let gp = kinematic_gp(&traj);
        assert!((gp.last().unwrap() + PI).abs() < 1e-9);
        // ⟨ψ(0)|ψ(τ/2)⟩ = 0: that sample has no phase.
        assert_eq!(gp.value(1000), None);
    }

    #[test]
    fn phase_at_period_is_minus_berry_phase() {
        for n in 0..3 {
            for delta in [0.0, 0.5, 1.0, 2.0, 5.0] {
                let params = p(delta).with_sector(n).unwrap();
                let tau = params.period();
                let traj = propagate(&params, &PureState2::excited(), tau, tau / 4000.0).unwrap();
                let phi = kinematic_gp(&traj).last().unwrap();
                let k = (phi + berry_phase(&params, Branch::Plus)) / (2.0 * PI);
                assert!((k - k.round()).abs() < 1e-6, "delta {delta} n {n}: {phi}");
            }
        }
    }

    #[test]
    fn phase_shift_loop_closes() {
        let params = p(1.0);
        let traj = phase_shift_loop(&params, Branch::Plus, 400).unwrap();
        let first = traj.states[0];
        let last = *traj.states.last().unwrap();
        assert!((first.overlap(&last).norm() - 1.0).abs() < 1e-12);
        let phi = kinematic_gp(&traj).last().unwrap();
        let k = (phi - berry_phase(&params, Branch::Plus)) / (2.0 * PI);
        assert!((k - k.round()).abs() < 1e-4);
    }
}
