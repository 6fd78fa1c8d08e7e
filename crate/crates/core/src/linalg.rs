//! Complex vectors and Hermitian matrices at dimensions 2 and 3.
//!
//! Everything here is small and stack allocated. The 2×2 eigenproblem is
//! solved in closed form; the 3×3 one uses the block structure
//! `diag(m00, M̃)` whenever the first row is decoupled, and falls back to
//! cyclic complex Jacobi rotations otherwise.

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// A column vector of `N` complex amplitudes.
pub type CVec<const N: usize> = [C64; N];

/// A dense `N×N` complex matrix, row-major.
pub type CMat<const N: usize> = [[C64; N]; N];

/// Maximum tolerated |m_ij − conj(m_ji)| (relative to the largest entry)
/// before a matrix is rejected as non-Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Eigenvalue gaps below this are treated as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-10;

/// Overlap magnitudes below this are treated as orthogonal.
pub const ORTHOGONAL_TOL: f64 = 1e-12;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// ⟨a|b⟩, conjugate-linear in the first argument.
pub fn inner<const N: usize>(a: &CVec<N>, b: &CVec<N>) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm<const N: usize>(v: &CVec<N>) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn scale<const N: usize>(v: &CVec<N>, s: C64) -> CVec<N> {
    v.map(|x| x * s)
}

pub fn normalize<const N: usize>(v: &CVec<N>) -> CVec<N> {
    let n = norm(v);
    v.map(|x| x / n)
}

pub fn basis<const N: usize>(k: usize) -> CVec<N> {
    let mut v = [ZERO; N];
    v[k] = ONE;
    v
}

pub fn zeros<const N: usize>() -> CMat<N> {
    [[ZERO; N]; N]
}

pub fn identity<const N: usize>() -> CMat<N> {
    let mut m = zeros::<N>();
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ONE;
    }
    m
}

pub fn mat_add<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut out = *a;
    for i in 0..N {
        for j in 0..N {
            out[i][j] += b[i][j];
        }
    }
    out
}

pub fn mat_sub<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut out = *a;
    for i in 0..N {
        for j in 0..N {
            out[i][j] -= b[i][j];
        }
    }
    out
}

pub fn mat_scale<const N: usize>(a: &CMat<N>, s: C64) -> CMat<N> {
    a.map(|row| row.map(|x| x * s))
}

pub fn mat_mul<const N: usize>(a: &CMat<N>, b: &CMat<N>) -> CMat<N> {
    let mut out = zeros::<N>();
    for i in 0..N {
        for k in 0..N {
            let aik = a[i][k];
            for j in 0..N {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

pub fn mat_vec<const N: usize>(a: &CMat<N>, v: &CVec<N>) -> CVec<N> {
    let mut out = [ZERO; N];
    for i in 0..N {
        out[i] = a[i].iter().zip(v).map(|(x, y)| x * y).sum();
    }
    out
}

pub fn adjoint<const N: usize>(a: &CMat<N>) -> CMat<N> {
    let mut out = zeros::<N>();
    for i in 0..N {
        for j in 0..N {
            out[i][j] = a[j][i].conj();
        }
    }
    out
}

/// |v⟩⟨v|
pub fn outer<const N: usize>(v: &CVec<N>) -> CMat<N> {
    let mut out = zeros::<N>();
    for i in 0..N {
        for j in 0..N {
            out[i][j] = v[i] * v[j].conj();
        }
    }
    out
}

pub fn frobenius<const N: usize>(a: &CMat<N>) -> f64 {
    a.iter().flat_map(|row| row.iter()).map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

pub fn trace<const N: usize>(a: &CMat<N>) -> C64 {
    (0..N).map(|i| a[i][i]).sum()
}

/// A Hermitian matrix of dimension 2 or 3.
///
/// Construction symmetrizes `(m + m†)/2`, so `entries[i][j] == conj(entries[j][i])`
/// holds exactly afterwards.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianMatrix<const N: usize> {
    entries: CMat<N>,
}

pub type Herm2 = HermitianMatrix<2>;
pub type Herm3 = HermitianMatrix<3>;

/// One eigenvalue with its unit eigenvector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenPair<const N: usize> {
    pub value: f64,
    pub vector: CVec<N>,
}

impl<const N: usize> HermitianMatrix<N> {
    pub fn new(entries: CMat<N>) -> Result<Self> {
        assert!(N == 2 || N == 3, "HermitianMatrix supports dimension 2 or 3");
        let mut scale = 1.0_f64;
        for row in &entries {
            for x in row {
                if !x.re.is_finite() || !x.im.is_finite() {
                    return Err(Error::model("matrix has non-finite entries"));
                }
                scale = scale.max(x.norm());
            }
        }
        let deviation = hermiticity_defect(&entries);
        if deviation > HERMITIAN_TOL * scale {
            return Err(Error::model(format!("matrix is not Hermitian (defect {deviation:.3e})")));
        }
        Ok(Self::symmetrized(&entries))
    }

    /// `(m + m†)/2` without any tolerance check.
    pub fn symmetrized(m: &CMat<N>) -> Self {
        let mut entries = zeros::<N>();
        for i in 0..N {
            entries[i][i] = C64::new(m[i][i].re, 0.0);
            for j in (i + 1)..N {
                let upper = (m[i][j] + m[j][i].conj()) * 0.5;
                entries[i][j] = upper;
                entries[j][i] = upper.conj();
            }
        }
        Self { entries }
    }

    pub fn diagonal(values: [f64; N]) -> Self {
        let mut entries = zeros::<N>();
        for (i, v) in values.iter().enumerate() {
            entries[i][i] = C64::new(*v, 0.0);
        }
        Self { entries }
    }

    pub fn entries(&self) -> &CMat<N> {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[i][j]
    }

    pub fn trace(&self) -> f64 {
        trace(&self.entries).re
    }

    pub fn apply(&self, v: &CVec<N>) -> CVec<N> {
        mat_vec(&self.entries, v)
    }

    /// Σ ε_k |v_k⟩⟨v_k|
    pub fn from_spectrum(pairs: &[EigenPair<N>]) -> Self {
        let mut m = zeros::<N>();
        for p in pairs {
            m = mat_add(&m, &mat_scale(&outer(&p.vector), C64::new(p.value, 0.0)));
        }
        Self::symmetrized(&m)
    }
}

impl HermitianMatrix<2> {
    /// Closed-form eigensystem, descending by eigenvalue, gauge-fixed.
    pub fn eigensystem(&self) -> [EigenPair<2>; 2] {
        let [a, b] = [self.entries[0][0].re, self.entries[1][1].re];
        let c = self.entries[0][1];
        let (plus, minus) = eigenvalues_2x2(a, b, c);
        if plus - minus < DEGENERACY_TOL * (1.0 + plus.abs()) && c.norm() == 0.0 {
            return [EigenPair { value: plus, vector: basis(0) }, EigenPair { value: minus, vector: basis(1) }];
        }
        let v_plus = fix_gauge(&eigenvector_2x2(a, b, c, plus));
        // Orthogonal complement in C², gauge-fixed independently.
        let v_minus = fix_gauge(&[-v_plus[1].conj(), v_plus[0].conj()]);
        [EigenPair { value: plus, vector: v_plus }, EigenPair { value: minus, vector: v_minus }]
    }
}

impl HermitianMatrix<3> {
    /// Eigensystem, descending by eigenvalue, gauge-fixed.
    ///
    /// When the first row and column vanish off the diagonal (the physical
    /// density matrices of this crate always have that shape) the problem
    /// splits into `m00` plus a closed-form 2×2 block.
    pub fn eigensystem(&self) -> [EigenPair<3>; 3] {
        let m = &self.entries;
        let scale = frobenius(m).max(1.0);
        let mut pairs = if m[0][1].norm() <= 1e-14 * scale && m[0][2].norm() <= 1e-14 * scale {
            let block = Herm2::symmetrized(&[[m[1][1], m[1][2]], [m[2][1], m[2][2]]]);
            let [p, q] = block.eigensystem();
            let embed = |v: CVec<2>| [ZERO, v[0], v[1]];
            [
                EigenPair { value: m[0][0].re, vector: basis(0) },
                EigenPair { value: p.value, vector: embed(p.vector) },
                EigenPair { value: q.value, vector: embed(q.vector) },
            ]
        } else {
            jacobi_3x3(m)
        };
        pairs.sort_by(|x, y| y.value.total_cmp(&x.value));
        pairs
    }
}

#[allow(clippy::needless_range_loop)]
fn hermiticity_defect<const N: usize>(m: &CMat<N>) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..N {
        for j in i..N {
            worst = worst.max((m[i][j] - m[j][i].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of `[[a, c], [c*, b]]`, larger first.
pub fn eigenvalues_2x2(a: f64, b: f64, c: C64) -> (f64, f64) {
    let mean = 0.5 * (a + b);
    let half_gap = (0.5 * (a - b)).hypot(c.norm());
    (mean + half_gap, mean - half_gap)
}

/// Unnormalized-then-normalized eigenvector of `[[a, c], [c*, b]]` for `value`.
///
/// Two algebraically equivalent forms exist, `(c, ε − a)` and `(ε − b, c*)`;
/// the one with larger norm is used.
fn eigenvector_2x2(a: f64, b: f64, c: C64, value: f64) -> CVec<2> {
    let first = [c, C64::new(value - a, 0.0)];
    let second = [C64::new(value - b, 0.0), c.conj()];
    if norm(&first) >= norm(&second) {
        normalize(&first)
    } else {
        normalize(&second)
    }
}

/// Deterministic gauge: the largest-magnitude component (first one on ties)
/// is made real and positive.
pub fn fix_gauge<const N: usize>(v: &CVec<N>) -> CVec<N> {
    let max = v.iter().map(|x| x.norm()).fold(0.0_f64, f64::max);
    if max == 0.0 {
        return *v;
    }
    let pivot = v.iter().position(|x| x.norm() >= max * (1.0 - 1e-12)).unwrap_or(0);
    let phase = v[pivot].conj() / v[pivot].norm();
    let mut out = scale(v, phase);
    out[pivot] = C64::new(out[pivot].norm(), 0.0);
    out
}

/// Cyclic Jacobi for a general 3×3 Hermitian matrix.
fn jacobi_3x3(m: &CMat<3>) -> [EigenPair<3>; 3] {
    let mut a = *m;
    let mut v = identity::<3>();
    let scale = frobenius(m).max(f64::MIN_POSITIVE);
    for _sweep in 0..64 {
        let off = (a[0][1].norm_sqr() + a[0][2].norm_sqr() + a[1][2].norm_sqr()).sqrt();
        if off <= 1e-16 * scale {
            break;
        }
        for (p, q) in [(0, 1), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq.norm() <= 1e-300 {
                continue;
            }
            // Phase rotation making a_pq real, followed by a real Givens rotation.
            let phase = apq.conj() / apq.norm();
            let app = a[p][p].re;
            let aqq = a[q][q].re;
            let zeta = (aqq - app) / (2.0 * apq.norm());
            let t = zeta.signum() / (zeta.abs() + (zeta * zeta + 1.0).sqrt());
            let cos = 1.0 / (t * t + 1.0).sqrt();
            let sin = t * cos;
            let mut u = identity::<3>();
            u[p][p] = C64::new(cos, 0.0);
            u[q][q] = phase * cos;
            u[p][q] = C64::new(sin, 0.0);
            u[q][p] = -phase * sin;
            a = mat_mul(&adjoint(&u), &mat_mul(&a, &u));
            v = mat_mul(&v, &u);
        }
    }
    let column = |k: usize| fix_gauge(&normalize(&[v[0][k], v[1][k], v[2][k]]));
    [
        EigenPair { value: a[0][0].re, vector: column(0) },
        EigenPair { value: a[1][1].re, vector: column(1) },
        EigenPair { value: a[2][2].re, vector: column(2) },
    ]
}

/// Re-phase `current` so that ⟨previous|out⟩ is real and positive.
///
/// Vectors whose overlap phase is already below 1e-14 are returned unchanged,
/// which makes the operation idempotent in floating point.
pub fn continuity_gauge<const N: usize>(previous: &CVec<N>, current: &CVec<N>) -> Result<CVec<N>> {
    let overlap = inner(previous, current);
    let magnitude = overlap.norm();
    if magnitude <= ORTHOGONAL_TOL {
        return Err(Error::GaugeDiscontinuity { overlap: magnitude });
    }
    if overlap.re > 0.0 && overlap.im.abs() <= 1e-14 * magnitude {
        return Ok(*current);
    }
    Ok(scale(current, overlap.conj() / magnitude))
}
