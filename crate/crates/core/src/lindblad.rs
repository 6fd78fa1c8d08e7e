//! Master equation on {|g,0⟩, |e,0⟩, |g,1⟩} with photon leakage γ and
//! incoherent pumping p, integrated with fixed-step RK4.
//!
//! The generator is the component form
//!
//! ```text
//! ρ̇₀₀ = −p ρ₀₀ + γ ρ₂₂
//! ρ̇₁₁ = −iλ(ρ₂₁ − ρ₁₂) + p ρ₀₀
//! ρ̇₂₂ = −iλ(ρ₁₂ − ρ₂₁) − γ ρ₂₂
//! ρ̇₁₂ = −iλ(ρ₂₂ − ρ₁₁) − iΔ ρ₁₂ − (γ/2) ρ₁₂
//! ρ̇₀₁ = −(p/2) ρ₀₁ + i(Δ ρ₀₁ + λ ρ₀₂)
//! ρ̇₀₂ = iλ ρ₀₁ − ((p + γ)/2) ρ₀₂
//! ```
//!
//! with ρⱼᵢ = ρᵢⱼ*. The pump only feeds |g,0⟩ → |e,0⟩; the leak of |g,1⟩
//! into |e,1⟩ lies outside the truncated basis and is dropped.

use crate::error::{Error, Result};
use crate::linalg::{frobenius, mat_add, mat_scale, outer, trace, CMat, Herm3, HermitianMatrix, C64};
use crate::model::{JcParams, PureState2};
use crate::unitary::uniform_grid;

/// Tolerances carried by every [`Density3`].
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-10;

/// A negative eigenvalue below this aborts integration.
pub const POSITIVITY_FAILURE: f64 = 1e-8;

/// Per-step symmetrization or trace corrections above this abort integration.
pub const MAX_STEP_CORRECTION: f64 = 1e-9;

/// A density matrix on the ordered basis |0⟩ = |g,0⟩, |1⟩ = |e,0⟩, |2⟩ = |g,1⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Density3 {
    matrix: Herm3,
}

impl Density3 {
    pub fn new(matrix: Herm3) -> Result<Self> {
        let tr = matrix.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::model(format!("density matrix trace is {tr}")));
        }
        let min = matrix.eigensystem()[2].value;
        if min < -POSITIVITY_TOL {
            return Err(Error::model(format!("density matrix has eigenvalue {min:.3e}")));
        }
        Ok(Self { matrix })
    }

    pub fn from_entries(entries: CMat<3>) -> Result<Self> {
        Self::new(Herm3::new(entries)?)
    }

    pub fn diagonal(populations: [f64; 3]) -> Result<Self> {
        Self::new(Herm3::diagonal(populations))
    }

    pub fn basis_state(k: usize) -> Self {
        let mut p = [0.0; 3];
        p[k] = 1.0;
        Self { matrix: Herm3::diagonal(p) }
    }

    /// |ψ⟩⟨ψ| for a doublet state a|e,0⟩ + b|g,1⟩.
    pub fn from_pure(state: &PureState2) -> Result<Self> {
        let v = [C64::new(0.0, 0.0), state.amp_e_n, state.amp_g_n1];
        Self::new(Herm3::symmetrized(&outer(&v)))
    }

    pub fn matrix(&self) -> &Herm3 {
        &self.matrix
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.matrix.get(i, j)
    }

    pub fn rho00(&self) -> f64 {
        self.get(0, 0).re
    }

    pub fn rho11(&self) -> f64 {
        self.get(1, 1).re
    }

    pub fn rho22(&self) -> f64 {
        self.get(2, 2).re
    }

    pub fn rho12(&self) -> C64 {
        self.get(1, 2)
    }

    /// Largest of |ρ₀₁|, |ρ₀₂|.
    pub fn off_block(&self) -> f64 {
        self.get(0, 1).norm().max(self.get(0, 2).norm())
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.matrix.eigensystem()[2].value
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    StrongCoupling,
    WeakCoupling,
}

/// Strong coupling iff γ < λ; the boundary γ = λ counts as weak coupling.
pub fn classify_regime(params: &JcParams) -> Regime {
    if params.gamma < params.lambda {
        Regime::StrongCoupling
    } else {
        Regime::WeakCoupling
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedTrajectory {
    pub params: JcParams,
    pub times: Vec<f64>,
    pub densities: Vec<Density3>,
    pub step: f64,
}

impl MixedTrajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

pub(crate) fn raw_rhs(params: &JcParams, r: &CMat<3>) -> CMat<3> {
    let JcParams { delta, lambda, gamma, pump, .. } = *params;
    let i = C64::new(0.0, 1.0);
    let (r00, r11, r22) = (r[0][0], r[1][1], r[2][2]);
    let (r01, r02, r12) = (r[0][1], r[0][2], r[1][2]);
    let r21 = r12.conj();

    let d00 = -pump * r00 + gamma * r22;
    let d11 = -i * lambda * (r21 - r12) + pump * r00;
    let d22 = -i * lambda * (r12 - r21) - gamma * r22;
    let d12 = -i * lambda * (r22 - r11) - i * delta * r12 - 0.5 * gamma * r12;
    let d01 = -0.5 * pump * r01 + i * (delta * r01 + lambda * r02);
    let d02 = i * lambda * r01 - 0.5 * (pump + gamma) * r02;

    [
        [C64::new(d00.re, 0.0), d01, d02],
        [d01.conj(), C64::new(d11.re, 0.0), d12],
        [d02.conj(), d12.conj(), C64::new(d22.re, 0.0)],
    ]
}

/// Right-hand side of the master equation, assembled as a Hermitian matrix.
pub fn lindblad_rhs(params: &JcParams, rho: &Density3) -> Herm3 {
    HermitianMatrix::symmetrized(&raw_rhs(params, rho.matrix().entries()))
}

pub(crate) fn rk4_step(params: &JcParams, r: &CMat<3>, h: f64) -> CMat<3> {
    let half = C64::new(0.5 * h, 0.0);
    let k1 = raw_rhs(params, r);
    let k2 = raw_rhs(params, &mat_add(r, &mat_scale(&k1, half)));
    let k3 = raw_rhs(params, &mat_add(r, &mat_scale(&k2, half)));
    let k4 = raw_rhs(params, &mat_add(r, &mat_scale(&k3, C64::new(h, 0.0))));
    let mut sum = mat_add(&k1, &k4);
    sum = mat_add(&sum, &mat_scale(&mat_add(&k2, &k3), C64::new(2.0, 0.0)));
    mat_add(r, &mat_scale(&sum, C64::new(h / 6.0, 0.0)))
}

/// Integrator settings. The default requires
/// `step ≤ min(τ, 1/γ, 1/p) / 1000`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    pub min_steps_per_scale: f64,
    /// Check the smallest eigenvalue after every step.
    pub check_positivity: bool,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        Self { min_steps_per_scale: 1000.0, check_positivity: true }
    }
}

/// Shortest physical time scale: min(τ, 1/γ, 1/p).
pub fn shortest_scale(params: &JcParams) -> f64 {
    let mut scale = params.period();
    if params.gamma > 0.0 {
        scale = scale.min(1.0 / params.gamma);
    }
    if params.pump > 0.0 {
        scale = scale.min(1.0 / params.pump);
    }
    scale
}

/// Largest step accepted by [`integrate_master`].
pub fn max_step(params: &JcParams) -> f64 {
    shortest_scale(params) / IntegratorOptions::default().min_steps_per_scale
}

/// Default step for `steps_per_tau` samples per period, capped by [`max_step`].
pub fn default_step(params: &JcParams, steps_per_tau: f64) -> f64 {
    (params.period() / steps_per_tau).min(max_step(params))
}

pub fn integrate_master(params: &JcParams, rho0: &Density3, t_final: f64, step: f64) -> Result<MixedTrajectory> {
    integrate_master_with(params, rho0, t_final, step, &IntegratorOptions::default())
}

/// Classical RK4 on a uniform grid ending exactly at `t_final`. Each step is
/// followed by symmetrization and trace renormalization.
pub fn integrate_master_with(
    params: &JcParams,
    rho0: &Density3,
    t_final: f64,
    step: f64,
    options: &IntegratorOptions,
) -> Result<MixedTrajectory> {
    if params.n != 0 {
        return Err(Error::model("the master equation is restricted to the n = 0 sector"));
    }
    let limit = shortest_scale(params) / options.min_steps_per_scale;
    if step > limit * (1.0 + 1e-12) {
        return Err(Error::model(format!(
            "step {step:.3e} exceeds min(tau, 1/gamma, 1/p)/{} = {limit:.3e}",
            options.min_steps_per_scale
        )));
    }
    let times = uniform_grid(t_final, step)?;
    let h = times[1] - times[0];
    let mut densities = Vec::with_capacity(times.len());
    densities.push(*rho0);
    let mut current = *rho0.matrix().entries();
    for &t in &times[1..] {
        let next = rk4_step(params, &current, h);
        let sym = Herm3::symmetrized(&next);
        let asym = frobenius(&crate::linalg::mat_sub(&next, sym.entries()));
        let tr = sym.trace();
        let trace_fix = (tr - 1.0).abs();
        if asym > MAX_STEP_CORRECTION || trace_fix > MAX_STEP_CORRECTION {
            return Err(Error::IntegratorFailure {
                time: t,
                reason: format!("step correction too large (hermiticity {asym:.3e}, trace {trace_fix:.3e})"),
                suggested_step: 0.5 * h,
            });
        }
        if asym > 0.0 || trace_fix > 0.0 {
            log::trace!("t = {t:.6}: symmetrization {asym:.3e}, trace correction {trace_fix:.3e}");
        }
        let fixed = Herm3::symmetrized(&mat_scale(sym.entries(), C64::new(1.0 / tr, 0.0)));
        if options.check_positivity {
            let min = fixed.eigensystem()[2].value;
            if min < -POSITIVITY_FAILURE {
                return Err(Error::IntegratorFailure {
                    time: t,
                    reason: format!("negative eigenvalue {min:.3e}"),
                    suggested_step: 0.5 * h,
                });
            }
        }
        current = *fixed.entries();
        densities.push(Density3 { matrix: fixed });
    }
    Ok(MixedTrajectory { params: *params, times, densities, step: h })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyStateOptions {
    /// Give up after this much simulated time.
    pub horizon: f64,
    /// Steps per shortest time scale; coarser than trajectory integration
    /// because only the fixed point matters.
    pub steps_per_scale: f64,
    /// Converged once ‖ρ̇‖_F drops below this.
    pub residual: f64,
}

impl Default for SteadyStateOptions {
    fn default() -> Self {
        Self { horizon: 1e5, steps_per_scale: 100.0, residual: 1e-12 }
    }
}

pub fn steady_state(params: &JcParams) -> Result<Density3> {
    steady_state_with(params, &SteadyStateOptions::default())
}

/// Integrates from the maximally mixed state until ‖ρ̇‖ < `residual`.
pub fn steady_state_with(params: &JcParams, options: &SteadyStateOptions) -> Result<Density3> {
    if params.gamma <= 0.0 && params.pump <= 0.0 {
        return Err(Error::model("a steady state needs gamma > 0 or p > 0"));
    }
    if params.n != 0 {
        return Err(Error::model("the master equation is restricted to the n = 0 sector"));
    }
    let h = shortest_scale(params) / options.steps_per_scale;
    let mut current = *Herm3::diagonal([1.0 / 3.0; 3]).entries();
    let mut t = 0.0;
    let mut residual = f64::INFINITY;
    while t < options.horizon {
        residual = frobenius(&raw_rhs(params, &current));
        if residual < options.residual {
            let tr = trace(&current).re;
            let matrix = Herm3::symmetrized(&mat_scale(&current, C64::new(1.0 / tr, 0.0)));
            return Density3::new(matrix);
        }
        current = rk4_step(params, &current, h);
        t += h;
    }
    Err(Error::Timeout { horizon: options.horizon, residual })
}
