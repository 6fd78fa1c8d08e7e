//! Parameters, Hamiltonian and closed-form spectrum of the Jaynes-Cummings
//! doublet {|e,n⟩, |g,n+1⟩}.
//!
//! Frequencies are in units of the coupling λ. The cavity and atom
//! frequencies ω and ε are carried for bookkeeping only: the rotating frame
//! removes them, and only the detuning Δ = ε − ω enters the dynamics.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::linalg::{inner, CVec, Herm2, C64};

/// Tolerance on ‖ψ‖ = 1 for [`PureState2`].
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcParams {
    /// Atom-field detuning Δ = ε − ω.
    pub delta: f64,
    /// Atom-field coupling λ.
    pub lambda: f64,
    /// Photon leakage rate γ.
    pub gamma: f64,
    /// Incoherent pump rate p.
    pub pump: f64,
    /// Photon sector: the doublet is {|e,n⟩, |g,n+1⟩}.
    pub n: u32,
    pub omega: Option<f64>,
    pub epsilon: Option<f64>,
}

impl JcParams {
    /// Closed system with the given detuning and coupling, vacuum sector.
    pub fn new(delta: f64, lambda: f64) -> Result<Self> {
        Self { delta, lambda, gamma: 0.0, pump: 0.0, n: 0, omega: None, epsilon: None }.validated()
    }

    /// Parameters in units of λ = 1, as used in every figure.
    pub fn ratios(delta: f64, gamma: f64, pump: f64) -> Result<Self> {
        Self::new(delta, 1.0)?.with_dissipation(gamma, pump)
    }

    /// Detuning derived from the bare atom and cavity frequencies.
    pub fn from_frequencies(omega: f64, epsilon: f64, lambda: f64) -> Result<Self> {
        Self { omega: Some(omega), epsilon: Some(epsilon), ..Self::new(epsilon - omega, lambda)? }.validated()
    }

    pub fn with_dissipation(self, gamma: f64, pump: f64) -> Result<Self> {
        Self { gamma, pump, ..self }.validated()
    }

    pub fn with_sector(self, n: u32) -> Result<Self> {
        Self { n, ..self }.validated()
    }

    pub fn closed(self) -> Self {
        Self { gamma: 0.0, pump: 0.0, ..self }
    }

    pub fn validated(self) -> Result<Self> {
        let finite = [self.delta, self.lambda, self.gamma, self.pump]
            .iter()
            .chain(self.omega.iter())
            .chain(self.epsilon.iter())
            .all(|x| x.is_finite());
        if !finite {
            return Err(Error::model("parameters must be finite"));
        }
        if self.lambda <= 0.0 {
            return Err(Error::model(format!("lambda must be positive, got {}", self.lambda)));
        }
        if self.gamma < 0.0 {
            return Err(Error::model(format!("gamma must be non-negative, got {}", self.gamma)));
        }
        if self.pump < 0.0 {
            return Err(Error::model(format!("pump must be non-negative, got {}", self.pump)));
        }
        if let (Some(w), Some(e)) = (self.omega, self.epsilon) {
            if ((e - w) - self.delta).abs() > 1e-12 * (1.0 + self.delta.abs()) {
                return Err(Error::model("delta must equal epsilon - omega"));
            }
        }
        Ok(self)
    }

    /// λ√(n+1), the off-diagonal element of the doublet Hamiltonian.
    pub fn coupling(&self) -> f64 {
        self.lambda * f64::from(self.n + 1).sqrt()
    }

    /// Ωₙ = √(Δ² + 4λ²(n+1)).
    pub fn rabi_frequency(&self) -> f64 {
        self.delta.hypot(2.0 * self.coupling())
    }

    /// Pseudo-period τ = 2π/Ωₙ.
    pub fn period(&self) -> f64 {
        2.0 * PI / self.rabi_frequency()
    }

    /// cos θₙ = Δ/Ωₙ.
    pub fn cos_theta(&self) -> f64 {
        self.delta / self.rabi_frequency()
    }
}

/// A normalized state a|e,n⟩ + b|g,n+1⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureState2 {
    pub amp_e_n: C64,
    pub amp_g_n1: C64,
}

impl PureState2 {
    pub fn new(amp_e_n: C64, amp_g_n1: C64) -> Result<Self> {
        let s = Self { amp_e_n, amp_g_n1 };
        let norm = s.norm();
        if !norm.is_finite() || (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::model(format!("state is not normalized (norm {norm})")));
        }
        Ok(s)
    }

    /// Normalizes `(a, b)`; fails only for the zero vector.
    pub fn normalized(a: C64, b: C64) -> Result<Self> {
        let n = a.norm().hypot(b.norm());
        if n == 0.0 || !n.is_finite() {
            return Err(Error::model("cannot normalize a zero or non-finite vector"));
        }
        Ok(Self { amp_e_n: a / n, amp_g_n1: b / n })
    }

    pub fn excited() -> Self {
        Self { amp_e_n: C64::new(1.0, 0.0), amp_g_n1: C64::new(0.0, 0.0) }
    }

    pub fn from_array(v: CVec<2>) -> Self {
        Self { amp_e_n: v[0], amp_g_n1: v[1] }
    }

    pub fn as_array(&self) -> CVec<2> {
        [self.amp_e_n, self.amp_g_n1]
    }

    pub fn norm(&self) -> f64 {
        self.amp_e_n.norm().hypot(self.amp_g_n1.norm())
    }

    pub fn overlap(&self, other: &Self) -> C64 {
        inner(&self.as_array(), &other.as_array())
    }

    pub fn with_phase(&self, phase: f64) -> Self {
        let f = C64::from_polar(1.0, phase);
        Self { amp_e_n: self.amp_e_n * f, amp_g_n1: self.amp_g_n1 * f }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcEigensystem {
    pub energy_plus: f64,
    pub energy_minus: f64,
    /// Mixing angle θₙ ∈ [0, π].
    pub theta_n: f64,
    pub state_plus: PureState2,
    pub state_minus: PureState2,
}

impl JcEigensystem {
    pub fn state(&self, branch: Branch) -> PureState2 {
        match branch {
            Branch::Plus => self.state_plus,
            Branch::Minus => self.state_minus,
        }
    }
}

/// E±⁽ⁿ⁾ = ±Ωₙ/2 with
/// |Φ⁺⟩ = cos(θₙ/2)|e,n⟩ + sin(θₙ/2)|g,n+1⟩,
/// |Φ⁻⟩ = sin(θₙ/2)|e,n⟩ − cos(θₙ/2)|g,n+1⟩.
pub fn eigensystem(params: &JcParams) -> JcEigensystem {
    let omega = params.rabi_frequency();
    // atan2 keeps θ accurate near both poles.
    let theta = (2.0 * params.coupling()).atan2(params.delta);
    let (s, c) = (0.5 * theta).sin_cos();
    let re = |x: f64| C64::new(x, 0.0);
    JcEigensystem {
        energy_plus: 0.5 * omega,
        energy_minus: -0.5 * omega,
        theta_n: theta,
        state_plus: PureState2 { amp_e_n: re(c), amp_g_n1: re(s) },
        state_minus: PureState2 { amp_e_n: re(s), amp_g_n1: re(-c) },
    }
}

pub fn rabi_frequency(params: &JcParams) -> f64 {
    params.rabi_frequency()
}

/// Doublet Hamiltonian with the field phase-shifted by `phase`:
/// `[[Δ/2, λ√(n+1) e^{iφ}], [λ√(n+1) e^{−iφ}, −Δ/2]]`.
pub fn hamiltonian_matrix(params: &JcParams, phase: f64) -> Herm2 {
    let g = C64::from_polar(params.coupling(), phase);
    let half = 0.5 * params.delta;
    Herm2::symmetrized(&[[C64::new(half, 0.0), g], [g.conj(), C64::new(-half, 0.0)]])
}

/// Berry phase picked up by |Φₙ^±⟩ when the field phase is cycled adiabatically:
/// π[1 ∓ cos θₙ] + 2nπ.
pub fn berry_phase(params: &JcParams, branch: Branch) -> f64 {
    let c = params.cos_theta();
    let sign = match branch {
        Branch::Plus => -1.0,
        Branch::Minus => 1.0,
    };
    PI * (1.0 + sign * c) + 2.0 * f64::from(params.n) * PI
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::mat_vec;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn residual(params: &JcParams, state: &PureState2, energy: f64) -> f64 {
        let h = hamiltonian_matrix(params, 0.0);
        let v = state.as_array();
        let hv = mat_vec(h.entries(), &v);
        hv.iter().zip(&v).map(|(x, y)| (x - y * energy).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn resonant_eigenstates_are_bell_states() {
        let p = JcParams::new(0.0, 1.0).unwrap();
        let es = eigensystem(&p);
        assert!((es.energy_plus - 1.0).abs() < 1e-15);
        assert!((es.energy_minus + 1.0).abs() < 1e-15);
        let r = FRAC_1_SQRT_2;
        assert!((es.state_plus.amp_e_n.re - r).abs() < 1e-12);
        assert!((es.state_plus.amp_g_n1.re - r).abs() < 1e-12);
        assert!((es.state_minus.amp_e_n.re - r).abs() < 1e-12);
        assert!((es.state_minus.amp_g_n1.re + r).abs() < 1e-12);
    }

    #[test]
    fn detuned_eigensystem() {
        let p = JcParams::new(2.0, 1.0).unwrap();
        let es = eigensystem(&p);
        assert!((es.energy_plus - 2.0_f64.sqrt()).abs() < 1e-14);
        assert!((es.theta_n.cos() - FRAC_1_SQRT_2).abs() < 1e-12);
        assert!(residual(&p, &es.state_plus, es.energy_plus) < 1e-12);
        assert!(residual(&p, &es.state_minus, es.energy_minus) < 1e-12);
    }

    #[test]
    fn large_detuning_decouples() {
        let p = JcParams::new(1e3, 1.0).unwrap();
        let es = eigensystem(&p);
        assert!((es.state_plus.amp_e_n.re - 1.0).abs() < 1e-3);
        assert!(es.state_plus.amp_g_n1.norm() < 2e-3);
    }

    #[test]
    fn eigenpairs_for_many_parameters() {
        for n in 0..4 {
            for k in 0..40 {
                let delta = -10.0 + 0.5 * k as f64;
                let p = JcParams::new(delta, 0.7).unwrap().with_sector(n).unwrap();
                let es = eigensystem(&p);
                assert_eq!(es.energy_plus, -es.energy_minus);
                assert!(
                    (es.theta_n.cos() - p.delta / (4.0 * 0.49 * f64::from(n + 1) + delta * delta).sqrt()).abs() < 1e-12
                );
                assert!(es.state_plus.overlap(&es.state_minus).norm() < 1e-15);
                assert!(residual(&p, &es.state_plus, es.energy_plus) < 1e-12);
                assert!(residual(&p, &es.state_minus, es.energy_minus) < 1e-12);
            }
        }
    }

    #[test]
    fn rabi_frequency_examples() {
        assert_eq!(JcParams::new(0.0, 1.0).unwrap().rabi_frequency(), 2.0);
        assert!((JcParams::new(2.0, 1.0).unwrap().rabi_frequency() - 2.0 * 2.0_f64.sqrt()).abs() < 1e-15);
        let p = JcParams::new(0.0, 1.0).unwrap().with_sector(3).unwrap();
        assert_eq!(p.rabi_frequency(), 4.0);
    }

    #[test]
    fn rabi_frequency_matches_matrix() {
        for delta in [0.0, 0.3, 2.0, 5.0] {
            for phase in [0.0, 0.4, 2.0] {
                let p = JcParams::new(delta, 1.3).unwrap().with_sector(2).unwrap();
                let h = hamiltonian_matrix(&p, phase);
                let off = h.get(0, 1).norm();
                let lhs = p.rabi_frequency().powi(2);
                assert!((lhs - (delta * delta + 4.0 * off * off)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hamiltonian_examples() {
        let h = hamiltonian_matrix(&JcParams::new(0.0, 1.0).unwrap(), 0.0);
        assert_eq!(h.get(0, 0), C64::new(0.0, 0.0));
        assert_eq!(h.get(0, 1), C64::new(1.0, 0.0));
        let h = hamiltonian_matrix(&JcParams::new(2.0, 1.0).unwrap(), 0.0);
        assert_eq!(h.get(0, 0).re, 1.0);
        assert_eq!(h.get(1, 1).re, -1.0);
        assert_eq!(h.get(1, 0), C64::new(1.0, 0.0));
        let h = hamiltonian_matrix(&JcParams::new(0.0, 1.0).unwrap(), PI / 2.0);
        assert!((h.get(0, 1) - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((h.get(1, 0) - C64::new(0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn berry_phase_examples() {
        assert_eq!(berry_phase(&JcParams::new(0.0, 1.0).unwrap(), Branch::Plus), PI);
        let b = berry_phase(&JcParams::new(2.0, 1.0).unwrap(), Branch::Plus);
        assert!((b - PI * (1.0 - FRAC_1_SQRT_2)).abs() < 1e-12);
        assert!((b - 0.9202).abs() < 1e-4);
        assert!(berry_phase(&JcParams::new(1e9, 1.0).unwrap(), Branch::Plus) < 1e-8);
    }

    #[test]
    fn berry_branches_sum() {
        for n in 0..5 {
            for delta in [-3.0, 0.0, 0.5, 4.0] {
                let p = JcParams::new(delta, 1.0).unwrap().with_sector(n).unwrap();
                let sum = berry_phase(&p, Branch::Plus) + berry_phase(&p, Branch::Minus);
                assert!((sum - 2.0 * PI * f64::from(1 + 2 * n)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn berry_plus_decreases_with_detuning() {
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let p = JcParams::new(-10.0 + 0.1 * k as f64, 1.0).unwrap();
            let b = berry_phase(&p, Branch::Plus);
            assert!(b < prev);
            prev = b;
        }
    }

    #[test]
    fn validation() {
        assert!(JcParams::new(0.0, 0.0).is_err());
        assert!(JcParams::ratios(0.0, -0.1, 0.0).is_err());
        assert!(JcParams::ratios(0.0, 0.1, -0.1).is_err());
        assert!(JcParams::new(f64::NAN, 1.0).is_err());
        let p = JcParams::from_frequencies(10.0, 12.5, 1.0).unwrap();
        assert_eq!(p.delta, 2.5);
        assert!(JcParams { delta: 1.0, ..p }.validated().is_err());
        assert!(PureState2::new(C64::new(1.0, 0.0), C64::new(0.1, 0.0)).is_err());
    }
}
