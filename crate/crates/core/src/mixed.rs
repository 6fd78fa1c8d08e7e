//! Mixed-state geometric phase along master-equation trajectories, and the
//! environment-induced correction δφ = φg − φu.
//!
//! Two independent routes are provided for a pure initial state |e,0⟩:
//! the kinematic phase of the gauge-continuous dominant eigenvector
//! ([`mixed_gp_pure_init`]) and the quadrature of the closed-form integrand
//! built from the density-matrix elements ([`mixed_gp_integral`]).

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{continuity_gauge, eigenvalues_2x2, inner, CMat, CVec, Herm2, C64, DEGENERACY_TOL};
use crate::lindblad::{default_step, integrate_master, raw_rhs, rk4_step, Density3, MixedTrajectory};
use crate::model::{JcParams, PureState2};
use crate::phase::{kinematic_series, PhaseSeries, UNDEFINED_OVERLAP};
use crate::unitary::{kinematic_gp, propagate};

/// Quadrature samples with (ρ₂₂ − ε₊)² + |ρ₁₂|² below this are skipped.
pub const INTEGRAND_FLOOR: f64 = 1e-14;

/// Default sampling density of mixed-state runs.
pub const DEFAULT_STEPS_PER_TAU: f64 = 2000.0;

/// Eigen-decomposition of ρ(t) = ρ₀₀ ⊕ ρ̃(t) along a trajectory.
///
/// `vector_plus` is gauge-continuous: ⟨Ψ₊(t_k)|Ψ₊(t_{k+1})⟩ is real and
/// positive between consecutive non-degenerate samples. Vectors live in the
/// {|1⟩, |2⟩} block.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenTrack {
    pub times: Vec<f64>,
    pub eps0: Vec<f64>,
    pub eps_plus: Vec<f64>,
    pub eps_minus: Vec<f64>,
    pub vector_plus: Vec<CVec<2>>,
    pub vector_minus: Vec<CVec<2>>,
    pub degenerate: Vec<bool>,
}

impl EigenTrack {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn initial_weights(&self) -> [f64; 3] {
        [self.eps0[0], self.eps_plus[0], self.eps_minus[0]]
    }

    pub fn states_plus(&self) -> Vec<PureState2> {
        self.vector_plus.iter().map(|v| PureState2::from_array(*v)).collect()
    }
}

fn block(rho: &Density3) -> Herm2 {
    Herm2::symmetrized(&[[rho.get(1, 1), rho.get(1, 2)], [rho.get(2, 1), rho.get(2, 2)]])
}

pub fn eigen_track(traj: &MixedTrajectory) -> EigenTrack {
    let n = traj.len();
    let mut track = EigenTrack {
        times: traj.times.clone(),
        eps0: Vec::with_capacity(n),
        eps_plus: Vec::with_capacity(n),
        eps_minus: Vec::with_capacity(n),
        vector_plus: Vec::with_capacity(n),
        vector_minus: Vec::with_capacity(n),
        degenerate: Vec::with_capacity(n),
    };
    let mut previous: Option<CVec<2>> = None;
    for rho in &traj.densities {
        let (plus, minus) = eigenvalues_2x2(rho.rho11(), rho.rho22(), rho.rho12());
        let [pair, _] = block(rho).eigensystem();
        let mut degenerate = plus - minus < DEGENERACY_TOL;
        let mut v = pair.vector;
        if !degenerate {
            if let Some(prev) = previous {
                match continuity_gauge(&prev, &v) {
                    Ok(fixed) => v = fixed,
                    Err(_) => degenerate = true,
                }
            }
        }
        if !degenerate {
            previous = Some(v);
        }
        track.eps0.push(rho.rho00());
        track.eps_plus.push(plus);
        track.eps_minus.push(minus);
        track.vector_plus.push(v);
        track.vector_minus.push([-v[1].conj(), v[0].conj()]);
        track.degenerate.push(degenerate);
    }
    track
}

/// Running Pancharatnam sum Σ arg⟨Ψ(t_j)|Ψ(t_{j+1})⟩ over non-skipped samples.
fn transport_phases(vectors: &[CVec<2>], skip: &[bool]) -> Vec<f64> {
    let mut out = Vec::with_capacity(vectors.len());
    let mut acc = 0.0;
    let mut last: Option<usize> = None;
    for (k, v) in vectors.iter().enumerate() {
        if !skip[k] {
            if let Some(j) = last {
                acc += inner(&vectors[j], v).arg();
            }
            last = Some(k);
        }
        out.push(acc);
    }
    out
}

/// Mixed-state geometric phase for arbitrary initial weights:
///
/// ```text
/// φ(t) = arg Σ_k √(ε_k(0) ε_k(t)) ⟨Ψ_k(0)|Ψ_k(t)⟩ exp(−i Σ_j arg⟨Ψ_k(t_j)|Ψ_k(t_{j+1})⟩)
/// ```
///
/// over the three eigenvectors |0⟩, Ψ₊, Ψ₋. Degenerate samples are masked.
pub fn mixed_gp_general(track: &EigenTrack, weights_at_zero: [f64; 3]) -> PhaseSeries {
    let n = track.len();
    if n == 0 || track.degenerate[0] {
        return PhaseSeries::from_raw(track.times.clone(), &vec![0.0; n], vec![true; n]);
    }
    let skip = &track.degenerate;
    let t_plus = transport_phases(&track.vector_plus, skip);
    let t_minus = transport_phases(&track.vector_minus, skip);
    let (p0, m0) = (track.vector_plus[0], track.vector_minus[0]);
    let w = weights_at_zero.map(|x| x.max(0.0));
    let mut raw = Vec::with_capacity(n);
    let mut mask = Vec::with_capacity(n);
    let mut previous = 0.0;
    for k in 0..n {
        let mut z = C64::new((w[0] * track.eps0[k].max(0.0)).sqrt(), 0.0);
        z += (w[1] * track.eps_plus[k].max(0.0)).sqrt()
            * inner(&p0, &track.vector_plus[k])
            * C64::from_polar(1.0, -t_plus[k]);
        z += (w[2] * track.eps_minus[k].max(0.0)).sqrt()
            * inner(&m0, &track.vector_minus[k])
            * C64::from_polar(1.0, -t_minus[k]);
        if skip[k] || z.norm() < UNDEFINED_OVERLAP {
            raw.push(previous);
            mask.push(true);
        } else {
            previous = z.arg();
            raw.push(previous);
            mask.push(false);
        }
    }
    PhaseSeries::from_raw(track.times.clone(), &raw, mask)
}

/// Kinematic phase of the dominant eigenvector, valid when ρ(0) is pure.
pub fn mixed_gp_pure_init(track: &EigenTrack) -> Result<PhaseSeries> {
    if track.is_empty() || (track.eps_plus[0] - 1.0).abs() > 1e-9 {
        return Err(Error::model("initial state is not pure (largest eigenvalue != 1)"));
    }
    Ok(kinematic_series(&track.times, &track.vector_plus, &track.degenerate))
}

/// Phase from the element-wise integrand for ρ(0) = |e,0⟩⟨e,0|:
///
/// ```text
/// φ(t) = ∫₀ᵗ Im(ρ̇₁₂ ρ₂₁) / ((ρ₂₂ − ε₊)² + ρ₁₂ρ₂₁) dt′
/// ```
///
/// with ρ̇₁₂ taken from the master equation and trapezoidal quadrature. The
/// integrand is the connection of the eigenvector in the gauge
/// Ψ₊ ∝ (ε₊ − ρ₂₂, ρ₂₁), which is singular where Ψ₊ passes the antipode of
/// |e,0⟩. Intervals where that gauge turns by more than π/3 are integrated
/// through the gauge-vector overlap instead; an exact half turn contributes −π.
pub fn mixed_gp_integral(traj: &MixedTrajectory) -> Result<PhaseSeries> {
    let Some(rho0) = traj.densities.first() else {
        return Err(Error::model("empty trajectory"));
    };
    let start = Density3::basis_state(1);
    let dev = crate::linalg::frobenius(&crate::linalg::mat_sub(rho0.matrix().entries(), start.matrix().entries()));
    if dev > 1e-9 {
        return Err(Error::model("integral route requires rho(0) = |e,0><e,0|"));
    }
    let n = traj.len();
    let samples: Vec<Option<Sample>> =
        traj.densities.iter().map(|rho| Sample::at(&traj.params, rho.matrix().entries())).collect();

    let mut raw = vec![0.0; n];
    let mut acc = 0.0;
    let mut last: Option<usize> = samples[0].is_some().then_some(0);
    for k in 1..n {
        if let Some(b) = &samples[k] {
            if let Some(j) = last {
                let a = samples[j].as_ref().expect("last defined sample");
                let h = traj.times[k] - traj.times[j];
                acc += interval_phase(&traj.params, traj.densities[j].matrix().entries(), a, b, h);
            }
            last = Some(k);
        }
        raw[k] = acc;
    }
    let mask = samples.iter().map(Option::is_none).collect();
    Ok(PhaseSeries::from_raw(traj.times.clone(), &raw, mask))
}

/// Integrand value and gauge vector Ψ₊ ∝ (ε₊ − ρ₂₂, ρ₂₁) at one density.
struct Sample {
    integrand: f64,
    gauge: CVec<2>,
}

impl Sample {
    fn at(params: &JcParams, r: &CMat<3>) -> Option<Self> {
        let (r11, r22, r12) = (r[1][1].re, r[2][2].re, r[1][2]);
        let (eps_plus, _) = eigenvalues_2x2(r11, r22, r12);
        let denom = (r22 - eps_plus).powi(2) + r12.norm_sqr();
        if denom < INTEGRAND_FLOOR {
            return None;
        }
        let rate = raw_rhs(params, r)[1][2];
        let s = denom.sqrt();
        Some(Self {
            integrand: (rate * r12.conj()).im / denom,
            gauge: [C64::new((eps_plus - r22) / s, 0.0), r12.conj() / s],
        })
    }
}

/// Gauge rotation per sub-interval below which the trapezoid rule is used
/// without refinement.
const SMOOTH_TURN: f64 = 0.02;
const MAX_BISECTIONS: u32 = 24;
const REFINE_TOL: f64 = 1e-7;

fn connection_turn(a: &Sample, b: &Sample) -> f64 {
    inner(&a.gauge, &b.gauge).arg()
}

/// Phase accumulated between two defined samples a time `h` apart, starting
/// from density `r`. Intervals over which the gauge turns quickly are bisected
/// by re-integrating the master equation from the left endpoint.
fn interval_phase(params: &JcParams, r: &CMat<3>, a: &Sample, b: &Sample, h: f64) -> f64 {
    bisect(params, r, a, b, h, MAX_BISECTIONS)
}

fn bisect(params: &JcParams, r: &CMat<3>, a: &Sample, b: &Sample, h: f64, depth: u32) -> f64 {
    let turn = connection_turn(a, b);
    let trapezoid = 0.5 * h * (a.integrand + b.integrand);
    // The overlap connection and the trapezoid differ at third order in h on
    // smooth stretches, so a larger gap flags an under-resolved interval.
    if depth == 0 || (turn.abs() <= SMOOTH_TURN && (trapezoid + turn).abs() <= REFINE_TOL * h) {
        return sub_interval(a, b, h);
    }
    let mid_state = rk4_step(params, r, 0.5 * h);
    match Sample::at(params, &mid_state) {
        Some(mid) => {
            bisect(params, r, a, &mid, 0.5 * h, depth - 1) + bisect(params, &mid_state, &mid, b, 0.5 * h, depth - 1)
        }
        None => sub_interval(a, b, h),
    }
}

fn sub_interval(a: &Sample, b: &Sample, dt: f64) -> f64 {
    let turn = connection_turn(a, b);
    if turn.abs() > PI / 3.0 {
        // Unresolved passage near the antipode: use the transported overlap.
        -(if turn.abs() > PI - 1e-9 { PI } else { turn })
    } else {
        0.5 * dt * (a.integrand + b.integrand)
    }
}

/// Unitary and dissipative phases from the same pure state on a shared time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PhasePair {
    pub unitary: PhaseSeries,
    pub mixed: PhaseSeries,
    pub trajectory: MixedTrajectory,
    pub track: EigenTrack,
}

impl PhasePair {
    /// δφ at sample `k`, if both phases are defined there.
    pub fn correction(&self, k: usize) -> Option<f64> {
        Some(self.mixed.value(k)? - self.unitary.value(k)?)
    }
}

/// Runs both evolutions from the pure state `initial` to `t_final` with
/// `steps_per_tau` samples per period (capped by the integrator's step bound).
pub fn phase_pair(params: &JcParams, initial: &PureState2, t_final: f64, steps_per_tau: f64) -> Result<PhasePair> {
    let step = default_step(params, steps_per_tau);
    let trajectory = integrate_master(params, &Density3::from_pure(initial)?, t_final, step)?;
    let track = eigen_track(&trajectory);
    let mixed = mixed_gp_pure_init(&track)?;
    let pure = propagate(&params.closed(), initial, t_final, step)?;
    let unitary = kinematic_gp(&pure);
    debug_assert_eq!(pure.times, trajectory.times);
    Ok(PhasePair { unitary, mixed, trajectory, track })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Correction {
    pub t: f64,
    pub phi_u: f64,
    pub phi_g: f64,
    pub delta_phi: f64,
    pub defined: bool,
}

/// δφ(t) = φg(t) − φu(t), both accumulated continuously from t = 0.
pub fn phase_correction(params: &JcParams, t: f64) -> Result<Correction> {
    let pair = phase_pair(params, &PureState2::excited(), t, DEFAULT_STEPS_PER_TAU)?;
    let k = pair.trajectory.len() - 1;
    Ok(correction_at(&pair, k))
}

fn correction_at(pair: &PhasePair, k: usize) -> Correction {
    let phi_u = pair.unitary.phase[k].value;
    let phi_g = pair.mixed.phase[k].value;
    let defined = !pair.unitary.undefined_mask[k] && !pair.mixed.undefined_mask[k];
    Correction { t: pair.trajectory.times[k], phi_u, phi_g, delta_phi: phi_g - phi_u, defined }
}

/// One row of a correction table. Times are in units of τ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepRow {
    pub delta_over_lambda: f64,
    pub gamma_over_lambda: f64,
    pub p_over_lambda: f64,
    pub t_over_tau: f64,
    pub phi_u: f64,
    pub phi_g: f64,
    pub delta_phi: f64,
    pub defined: bool,
}

/// δφ for every grid point at every requested t/τ.
///
/// Rows come back in grid order (then `observe_at` order) regardless of
/// scheduling; a failing point yields undefined rows instead of an error.
/// Runs on the current rayon pool.
pub fn correction_sweep(grid: &[JcParams], observe_at: &[f64], steps_per_tau: f64) -> Vec<SweepRow> {
    let t_max = observe_at.iter().copied().fold(0.0_f64, f64::max);
    grid.par_iter()
        .map(|params| sweep_point(params, observe_at, t_max, steps_per_tau))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

fn sweep_point(params: &JcParams, observe_at: &[f64], t_max: f64, steps_per_tau: f64) -> Vec<SweepRow> {
    let tau = params.period();
    let row = |t_over_tau: f64, c: Option<Correction>| SweepRow {
        delta_over_lambda: params.delta / params.lambda,
        gamma_over_lambda: params.gamma / params.lambda,
        p_over_lambda: params.pump / params.lambda,
        t_over_tau,
        phi_u: c.map_or(f64::NAN, |c| c.phi_u),
        phi_g: c.map_or(f64::NAN, |c| c.phi_g),
        delta_phi: c.map_or(f64::NAN, |c| c.delta_phi),
        defined: c.is_some_and(|c| c.defined),
    };
    match phase_pair(params, &PureState2::excited(), t_max * tau, steps_per_tau) {
        Ok(pair) => {
            let last = pair.trajectory.len() - 1;
            observe_at
                .iter()
                .map(|&t| {
                    let k = ((t / t_max) * last as f64).round() as usize;
                    row(t, Some(correction_at(&pair, k.min(last))))
                })
                .collect()
        }
        Err(e) => {
            log::warn!("sweep point {params:?} failed: {e}");
            observe_at.iter().map(|&t| row(t, None)).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Herm3;
    use crate::lindblad::integrate_master;

    fn sc(delta: f64) -> JcParams {
        JcParams::ratios(delta, 0.1, 0.005).unwrap()
    }

    fn run(params: &JcParams, rho0: &Density3, periods: f64) -> MixedTrajectory {
        let step = default_step(params, DEFAULT_STEPS_PER_TAU);
        integrate_master(params, rho0, periods * params.period(), step).unwrap()
    }

    #[test]
    fn track_of_excited_state() {
        let traj = run(&sc(1.0), &Density3::basis_state(1), 0.01);
        let track = eigen_track(&traj);
        assert_eq!(track.eps0[0], 0.0);
        assert_eq!(track.eps_plus[0], 1.0);
        assert_eq!(track.eps_minus[0], 0.0);
        assert_eq!(track.vector_plus[0], [C64::new(1.0, 0.0), C64::new(0.0, 0.0)]);
    }

    #[test]
    fn maximally_mixed_block_is_degenerate() {
        let rho = Density3::diagonal([0.0, 0.5, 0.5]).unwrap();
        let traj = MixedTrajectory { params: sc(0.0), times: vec![0.0], densities: vec![rho], step: 0.0 };
        let track = eigen_track(&traj);
        assert!(track.degenerate[0]);
        assert_eq!((track.eps_plus[0], track.eps_minus[0]), (0.5, 0.5));
    }

    #[test]
    fn closed_form_block_eigenvalues() {
        let e = [
            [C64::new(0.2, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)],
            [C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(0.0, 0.1)],
            [C64::new(0.0, 0.0), C64::new(0.0, -0.1), C64::new(0.3, 0.0)],
        ];
        let rho = Density3::from_entries(e).unwrap();
        let traj = MixedTrajectory { params: sc(0.0), times: vec![0.0], densities: vec![rho], step: 0.0 };
        let track = eigen_track(&traj);
        let brute = Herm3::new(e).unwrap().eigensystem();
        assert!((track.eps0[0] - 0.2).abs() < 1e-15);
        assert!((track.eps_plus[0] - brute[0].value).abs() < 1e-12);
        assert!((track.eps_minus[0] - brute[1].value).abs() < 1e-12);
        assert!((track.eps_plus[0] - 0.5414).abs() < 1e-4);
        assert!((track.eps_minus[0] - 0.2586).abs() < 1e-4);
    }

    #[test]
    fn track_invariants() {
        let traj = run(&sc(0.8), &Density3::diagonal([0.1, 0.6, 0.3]).unwrap(), 3.0);
        let track = eigen_track(&traj);
        for k in 0..track.len() {
            let sum = track.eps0[k] + track.eps_plus[k] + track.eps_minus[k];
            assert!((sum - 1.0).abs() < 1e-9);
            assert!(track.eps_plus[k] >= track.eps_minus[k]);
            if k > 0 {
                let ov = inner(&track.vector_plus[k - 1], &track.vector_plus[k]);
                assert!(ov.re > 0.0 && ov.im.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn general_reduces_to_pure_init() {
        let traj = run(&sc(0.4), &Density3::basis_state(1), 3.0);
        let track = eigen_track(&traj);
        let general = mixed_gp_general(&track, track.initial_weights());
        let pure = mixed_gp_pure_init(&track).unwrap();
        for k in 0..track.len() {
            if let (Some(a), Some(b)) = (general.value(k), pure.value(k)) {
                assert!((a - b).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pure_init_rejects_mixed_start() {
        let traj = run(&sc(0.4), &Density3::diagonal([0.0, 0.6, 0.4]).unwrap(), 0.1);
        assert!(mixed_gp_pure_init(&eigen_track(&traj)).is_err());
        assert!(mixed_gp_integral(&traj).is_err());
    }

    #[test]
    fn unitary_limit_of_mixed_routes() {
        let params = JcParams::ratios(0.0, 0.0, 0.0).unwrap();
        let tau = params.period();
        let traj = run(&params, &Density3::basis_state(1), 1.0);
        let track = eigen_track(&traj);
        let eig = mixed_gp_pure_init(&track).unwrap();
        let int = mixed_gp_integral(&traj).unwrap();
        assert!((traj.times.last().unwrap() - tau).abs() < 1e-12);
        assert!((eig.last().unwrap() + PI).abs() < 1e-7);
        assert!((int.last().unwrap() + PI).abs() < 1e-7);
        assert_eq!(int.value(0), Some(0.0));
    }

    #[test]
    fn closed_system_has_no_correction() {
        let c = phase_correction(&JcParams::ratios(1.3, 0.0, 0.0).unwrap(), 2.0).unwrap();
        assert!(c.defined);
        assert!(c.delta_phi.abs() < 1e-7, "{c:?}");
    }

    fn max_route_gap(params: &JcParams) -> f64 {
        let traj = run(params, &Density3::basis_state(1), 3.0);
        let a = mixed_gp_pure_init(&eigen_track(&traj)).unwrap();
        let b = mixed_gp_integral(&traj).unwrap();
        (0..a.len()).filter_map(|k| Some((a.value(k)? - b.value(k)?).abs())).fold(0.0, f64::max)
    }

    #[test]
    fn routes_agree_off_and_near_resonance() {
        for (delta, gamma) in [(1.7, 0.3), (0.4, 0.9), (0.01, 0.6), (1e-3, 0.15)] {
            let gap = max_route_gap(&JcParams::ratios(delta, gamma, 0.005).unwrap());
            assert!(gap < 1e-5, "delta={delta} gamma={gamma} gap={gap:e}");
        }
    }

    #[test]
    fn correction_grows_with_damping() {
        let mut last = 0.0;
        for gamma in [0.02, 0.05, 0.1, 0.2] {
            let params = JcParams::ratios(1.0, gamma, 0.005).unwrap();
            let c = phase_correction(&params, 3.0 * params.period()).unwrap();
            assert!(c.defined && c.delta_phi.abs() > last, "gamma={gamma} {c:?}");
            last = c.delta_phi.abs();
        }
    }

    #[test]
    fn sweep_preserves_order_and_flags_failures() {
        let mut grid: Vec<_> = [2.0, 0.0, 1.0].iter().map(|&d| sc(d)).collect();
        grid.insert(1, sc(0.5).with_sector(1).unwrap());
        let rows = correction_sweep(&grid, &[1.0, 2.0], 2000.0);
        assert_eq!(rows.len(), 8);
        let deltas: Vec<f64> = rows.iter().map(|r| r.delta_over_lambda).collect();
        assert_eq!(deltas, vec![2.0, 2.0, 0.5, 0.5, 0.0, 0.0, 1.0, 1.0]);
        let defined: Vec<bool> = rows.iter().map(|r| r.defined).collect();
        assert_eq!(defined, vec![true, true, false, false, true, true, true, true]);
        assert_eq!(rows[1].t_over_tau, 2.0);
        let single = phase_correction(&sc(1.0), 2.0 * sc(1.0).period()).unwrap();
        assert!((rows[7].delta_phi - single.delta_phi).abs() < 1e-12);
    }
}
