//! Continuous phase curves and the discrete kinematic (Pancharatnam) phase.

use std::f64::consts::{PI, TAU};

use crate::linalg::{inner, CVec};

/// Overlaps ⟨ψ(0)|ψ(t)⟩ smaller than this leave the phase undefined.
pub const UNDEFINED_OVERLAP: f64 = 1e-8;

/// Principal value in (−π, π].
pub fn principal(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

/// An angle that is not reduced mod 2π.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UnwrappedAngle {
    pub value: f64,
    pub winding: i64,
}

impl UnwrappedAngle {
    pub fn new(value: f64) -> Self {
        let winding = ((value - principal(value)) / TAU).round() as i64;
        Self { value, winding }
    }

    pub fn principal(&self) -> f64 {
        principal(self.value)
    }
}

/// Shift `next` by a multiple of 2π so that `next − anchor ∈ [−π, π)`.
///
/// A jump of exactly ±π is resolved downwards, which is the same branch the
/// integer-part term of the closed-form unitary phase picks.
fn continue_from(anchor: f64, next: f64) -> f64 {
    let diff = next - anchor;
    next - TAU * ((diff + PI) / TAU).floor()
}

/// Remove 2π jumps from a sequence of angles.
///
/// Requires consecutive true angles to differ by less than π; `output[k]` is
/// congruent to `input[k]` mod 2π.
pub fn unwrap(series: &[f64]) -> Vec<UnwrappedAngle> {
    let mut out = Vec::with_capacity(series.len());
    let mut anchor = None;
    for &x in series {
        let v = match anchor {
            None => x,
            Some(a) => continue_from(a, x),
        };
        anchor = Some(v);
        out.push(UnwrappedAngle::new(v));
    }
    out
}

/// A time-ordered geometric-phase curve.
///
/// Defined samples are continuous (consecutive defined values differ by less
/// than π). Masked samples carry the last defined value and must not be used.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeries {
    pub times: Vec<f64>,
    pub phase: Vec<UnwrappedAngle>,
    pub undefined_mask: Vec<bool>,
}

impl PhaseSeries {
    /// Build from raw (possibly wrapped) phases. Continuity is carried across
    /// masked samples and re-anchored at the next defined one.
    pub fn from_raw(times: Vec<f64>, raw: &[f64], undefined_mask: Vec<bool>) -> Self {
        assert_eq!(times.len(), raw.len());
        assert_eq!(times.len(), undefined_mask.len());
        let mut anchor: Option<f64> = None;
        let phase = raw
            .iter()
            .zip(&undefined_mask)
            .map(|(&x, &masked)| {
                if masked {
                    return UnwrappedAngle::new(anchor.unwrap_or(0.0));
                }
                let v = match anchor {
                    None => x,
                    Some(a) => continue_from(a, x),
                };
                anchor = Some(v);
                UnwrappedAngle::new(v)
            })
            .collect();
        Self { times, phase, undefined_mask }
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn values(&self) -> Vec<f64> {
        self.phase.iter().map(|p| p.value).collect()
    }

    pub fn value(&self, k: usize) -> Option<f64> {
        (!self.undefined_mask[k]).then(|| self.phase[k].value)
    }

    pub fn last(&self) -> Option<f64> {
        self.len().checked_sub(1).and_then(|k| self.value(k))
    }

    pub fn defined_count(&self) -> usize {
        self.undefined_mask.iter().filter(|m| !**m).count()
    }
}

/// Discrete kinematic phase of a lifted curve:
///
/// ```text
/// φ(t_K) = arg⟨ψ_0|ψ_K⟩ − Σ_{k<K} arg⟨ψ_k|ψ_{k+1}⟩
/// ```
///
/// The sum telescopes any per-sample phase dressing, so the result depends on
/// the ray-space curve only. Samples flagged in `skip` are left out of the
/// product (the neighbouring defined samples are connected directly) and are
/// reported as undefined, as are samples where ⟨ψ_0|ψ_K⟩ vanishes.
pub fn kinematic_series<const N: usize>(times: &[f64], states: &[CVec<N>], skip: &[bool]) -> PhaseSeries {
    assert_eq!(times.len(), states.len());
    assert_eq!(times.len(), skip.len());
    let mut raw = Vec::with_capacity(states.len());
    let mut mask = Vec::with_capacity(states.len());
    let Some(first) = states.iter().zip(skip).position(|(_, s)| !*s) else {
        return PhaseSeries::from_raw(times.to_vec(), &vec![0.0; times.len()], vec![true; times.len()]);
    };
    let reference = states[first];
    let mut last = first;
    let mut transported = 0.0;
    let mut previous_raw = 0.0;
    for (k, state) in states.iter().enumerate() {
        if k < first || skip[k] {
            raw.push(previous_raw);
            mask.push(true);
            continue;
        }
        if k > last {
            transported += inner(&states[last], state).arg();
            last = k;
        }
        let overlap = inner(&reference, state);
        if overlap.norm() < UNDEFINED_OVERLAP {
            raw.push(previous_raw);
            mask.push(true);
            continue;
        }
        previous_raw = overlap.arg() - transported;
        raw.push(previous_raw);
        mask.push(false);
    }
    PhaseSeries::from_raw(times.to_vec(), &raw, mask)
}
