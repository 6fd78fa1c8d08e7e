//! Ray-space geometry on the two-level Bloch sphere of a JC doublet.
//!
//! The north pole is |e,n⟩. With a = amp_e_n and b = amp_g_n1 the map is
//! x = 2Re(a*b), y = 2Im(a*b), z = |a|² − |b|².

use std::f64::consts::PI;
use std::io::Write;

use crate::csv::CsvTable;
use crate::error::{Error, Result};
use crate::linalg::{inner, CVec, C64};
use crate::model::PureState2;
use crate::phase::{kinematic_series, principal};

/// Lifted overlaps passing closer than this to zero count as an antipode
/// crossing.
pub const ANTIPODE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochPoint {
    pub const NORTH: Self = Self { x: 0.0, y: 0.0, z: 1.0 };

    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(&self, o: &Self) -> Self {
        Self::new(self.y * o.z - self.z * o.y, self.z * o.x - self.x * o.z, self.x * o.y - self.y * o.x)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    pub fn add(&self, o: &Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }

    pub fn antipode(&self) -> Self {
        self.scaled(-1.0)
    }

    /// Great-circle distance in radians.
    pub fn distance(&self, o: &Self) -> f64 {
        self.cross(o).norm().atan2(self.dot(o))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlochCurve {
    pub times: Vec<f64>,
    pub points: Vec<BlochPoint>,
}

impl BlochCurve {
    pub fn from_states(times: &[f64], states: &[CVec<2>]) -> Self {
        Self { times: times.to_vec(), points: states.iter().map(bloch_map).collect() }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Largest great-circle distance between consecutive samples.
    pub fn max_gap(&self) -> f64 {
        self.points.windows(2).map(|w| w[0].distance(&w[1])).fold(0.0, f64::max)
    }

    /// A phase-free lift of every point back to a state vector.
    pub fn lift(&self) -> Vec<CVec<2>> {
        self.points.iter().map(|p| bloch_to_state(p).as_array()).collect()
    }
}

pub fn bloch_map(state: &CVec<2>) -> BlochPoint {
    let [a, b] = *state;
    let ab = a.conj() * b;
    BlochPoint::new(2.0 * ab.re, 2.0 * ab.im, a.norm_sqr() - b.norm_sqr())
}

/// The state (cos θ/2, e^{iφ} sin θ/2) whose image is `p`.
pub fn bloch_to_state(p: &BlochPoint) -> PureState2 {
    let r = p.norm();
    let z = (p.z / r).clamp(-1.0, 1.0);
    let half = 0.5 * z.acos();
    let phi = p.y.atan2(p.x);
    PureState2::from_array([C64::new(half.cos(), 0.0), C64::from_polar(half.sin(), phi)])
}

/// Signed solid angle of one geodesic triangle (Van Oosterom and Strackee).
fn triangle(pole: &BlochPoint, a: &BlochPoint, b: &BlochPoint) -> Option<f64> {
    let num = pole.dot(&a.cross(b));
    let den = 1.0 + pole.dot(a) + a.dot(b) + b.dot(pole);
    (num.abs() > 1e-12 || den > 1e-12).then(|| 2.0 * num.atan2(den))
}

/// Centroid of the distinct samples if usable, otherwise the oriented-area
/// direction Σ pₖ × pₖ₊₁. A pole is usable when no sample sits at its
/// antipode, where the triangle fan degenerates.
fn reference_pole(pts: &[BlochPoint], edges: &[(usize, usize)]) -> Result<BlochPoint> {
    let zero = BlochPoint::new(0.0, 0.0, 0.0);
    let distinct =
        if pts.len() > 2 && pts[0].distance(&pts[pts.len() - 1]) < 1e-9 { &pts[..pts.len() - 1] } else { pts };
    let centroid = distinct.iter().fold(zero, |acc, p| acc.add(p));
    let swept = edges.iter().fold(zero, |acc, &(i, j)| acc.add(&pts[i].cross(&pts[j])));
    let mut worst = 0;
    for candidate in [centroid, swept] {
        let n = candidate.norm();
        if n < 1e-9 {
            continue;
        }
        let pole = candidate.scaled(1.0 / n);
        let (k, lowest) = pts.iter().map(|p| p.dot(&pole)).enumerate().fold((0, f64::INFINITY), |(bk, bv), (k, v)| {
            if v < bv {
                (k, v)
            } else {
                (bk, bv)
            }
        });
        if lowest > -1.0 + 1e-9 {
            return Ok(pole);
        }
        worst = k;
    }
    Err(Error::AmbiguousTriangulation { index: worst })
}

/// Signed spherical area enclosed by the curve, positive for counterclockwise
/// circulation about the reference pole.
///
/// The pole is the normalized centroid of the samples; for curves whose
/// centroid vanishes (great circles) or lies opposite one of the samples, the
/// mean orientation Σ pₖ × pₖ₊₁ is used.
/// With `close` the last point is joined back to the first by a geodesic.
pub fn solid_angle(curve: &BlochCurve, close: bool) -> Result<f64> {
    let pts = &curve.points;
    if pts.len() < 2 {
        return Ok(0.0);
    }
    let mut edges: Vec<(usize, usize)> = (0..pts.len() - 1).map(|k| (k, k + 1)).collect();
    if close {
        edges.push((pts.len() - 1, 0));
    }
    for &(i, j) in &edges {
        if pts[i].add(&pts[j]).norm() < 1e-8 {
            return Err(Error::AmbiguousTriangulation { index: i });
        }
    }
    let pole = reference_pole(pts, &edges)?;
    let mut total = 0.0;
    for &(i, j) in &edges {
        total += triangle(&pole, &pts[i], &pts[j]).ok_or(Error::AmbiguousTriangulation { index: i })?;
    }
    Ok(total)
}

/// Minor great-circle arc from `p` to `q` with `samples` uniformly spaced
/// points, endpoints included.
pub fn geodesic_arc(p: &BlochPoint, q: &BlochPoint, samples: usize) -> Result<BlochCurve> {
    if p.add(q).norm() <= 1e-8 {
        return Err(Error::NoUniqueGeodesic);
    }
    let samples = samples.max(2);
    let angle = p.distance(q);
    let mut points = Vec::with_capacity(samples);
    let mut times = Vec::with_capacity(samples);
    for k in 0..samples {
        let s = k as f64 / (samples - 1) as f64;
        let point = if angle < 1e-12 {
            *p
        } else {
            let (wa, wb) = (((1.0 - s) * angle).sin(), (s * angle).sin());
            p.scaled(wa).add(&q.scaled(wb)).scaled(1.0 / angle.sin())
        };
        points.push(point.scaled(1.0 / point.norm()));
        times.push(s);
    }
    Ok(BlochCurve { times, points })
}

/// Arc of the great circle through `start` perpendicular to `axis`, turned by
/// `angle` counterclockwise about `axis`.
pub fn great_circle_arc(start: &BlochPoint, axis: &BlochPoint, angle: f64, samples: usize) -> BlochCurve {
    let k = axis.scaled(1.0 / axis.norm());
    let samples = samples.max(2);
    let mut curve = BlochCurve::default();
    for i in 0..samples {
        let a = angle * i as f64 / (samples - 1) as f64;
        // Rodrigues rotation about k.
        let v =
            start.scaled(a.cos()).add(&k.cross(start).scaled(a.sin())).add(&k.scaled(k.dot(start) * (1.0 - a.cos())));
        curve.times.push(a);
        curve.points.push(v);
    }
    curve
}

/// Lifted overlaps ⟨ψ_start|ψ̃(t)⟩ along a parallel-transported lift.
fn transported_overlaps(curve: &BlochCurve, start: &BlochPoint) -> Vec<C64> {
    let reference = bloch_to_state(start).as_array();
    let mut out = Vec::with_capacity(curve.len());
    let mut previous: Option<CVec<2>> = None;
    for p in &curve.points {
        let mut psi = bloch_to_state(p).as_array();
        if let Some(prev) = previous {
            let ov = inner(&prev, &psi);
            if ov.norm() > 0.0 {
                let phase = C64::from_polar(1.0, -ov.arg());
                psi = psi.map(|x| x * phase);
            }
        }
        out.push(inner(&reference, &psi));
        previous = Some(psi);
    }
    out
}

fn segment_distance_to_origin(a: C64, b: C64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return a.norm();
    }
    let s = (-(a.conj() * d).re / len2).clamp(0.0, 1.0);
    (a + d * s).norm()
}

/// Earliest time at which the curve passes the point antipodal to `start`.
///
/// Works on the parallel-transported lift ψ̃: its overlap with the start state
/// is continuous and vanishes only at the antipode, where its real part
/// changes sign. A crossing is reported when the sampled overlap segment
/// passes within [`ANTIPODE_TOL`] of zero with such a sign change; the time is
/// linearly interpolated between the bracketing samples.
pub fn antipode_crossing(curve: &BlochCurve, start: &BlochPoint) -> Option<f64> {
    let ov = transported_overlaps(curve, start);
    for k in 0..ov.len().saturating_sub(1) {
        let (a, b) = (ov[k], ov[k + 1]);
        let changes_sign = (a.re > 0.0 && b.re <= 0.0) || (a.re < 0.0 && b.re >= 0.0);
        if changes_sign && segment_distance_to_origin(a, b) < ANTIPODE_TOL {
            let s = a.re / (a.re - b.re);
            return Some(curve.times[k] + s * (curve.times[k + 1] - curve.times[k]));
        }
    }
    None
}

/// Geometric phase of the curve closed by the geodesic from its end back to
/// its start (the Pancharatnam phase of the open curve). `None` when the end
/// point is antipodal to the start.
pub fn closed_curve_gp(curve: &BlochCurve) -> Option<f64> {
    let states = curve.lift();
    let skip = vec![false; states.len()];
    kinematic_series(&curve.times, &states, &skip).last().map(principal)
}

/// Largest jump of the geodesic-closed phase between consecutive members of
/// a curve family, as a magnitude in [0, π].
pub fn gp_jump_detect(family: &[BlochCurve]) -> f64 {
    let phases: Vec<Option<f64>> = family.iter().map(closed_curve_gp).collect();
    phases.windows(2).filter_map(|w| Some(principal(w[1]? - w[0]?).abs())).fold(0.0, f64::max)
}

/// Trajectory table `t_over_tau,x,y,z`, with times divided by `tau`.
pub fn curve_table(curve: &BlochCurve, tau: f64) -> CsvTable {
    let mut table = CsvTable::new(&["t_over_tau", "x", "y", "z"]);
    for (t, p) in curve.times.iter().zip(&curve.points) {
        table.push_numbers(&[t / tau, p.x, p.y, p.z]);
    }
    table
}

pub fn export_curve<W: Write>(curve: &BlochCurve, tau: f64, w: &mut W) -> Result<()> {
    curve_table(curve, tau).write_to(w)
}

/// Half of the spherical cap area, for reference in tests and reports.
pub fn cap_area(polar_angle: f64) -> f64 {
    2.0 * PI * (1.0 - polar_angle.cos())
}
