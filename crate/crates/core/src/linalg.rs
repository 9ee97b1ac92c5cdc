//! Complex linear algebra on 4-dimensional Hermitian operators.
//!
//! Every state and operator in the protocols lives in a space of dimension at
//! most four, so this module works with fixed-size arrays and a cyclic Jacobi
//! eigensolver instead of a general dense-matrix library.

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dimension of every operator handled here.
pub const DIM: usize = 4;

/// Maximum tolerated `|M_ij - conj(M_ji)|` for an input to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Jacobi stops once the off-diagonal Frobenius mass falls below this
/// fraction of the matrix's Frobenius norm.
pub const JACOBI_TOL: f64 = 1e-13;

/// Hard cap on Jacobi sweeps.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Relative cutoff `λ > SUPPORT_CUTOFF · λ_max` defining the support of a PSD operator.
pub const SUPPORT_CUTOFF: f64 = 1e-10;

/// Eigenvalues in `[-PSD_CLAMP, 0)` are treated as rounding noise and clamped to zero.
pub const PSD_CLAMP: f64 = 1e-10;

/// Trace tolerance for density operators.
pub const TRACE_TOL: f64 = 1e-10;

/// A complex 4-vector.
pub type Vector4 = [Complex64; DIM];

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Inner product `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn inner(a: &Vector4, b: &Vector4) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Euclidean norm of a vector.
pub fn norm(v: &Vector4) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Dense 4×4 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Matrix4(pub [[Complex64; DIM]; DIM]);

impl Default for Matrix4 {
    fn default() -> Self {
        Self::zeros()
    }
}

impl Matrix4 {
    pub fn zeros() -> Self {
        Matrix4([[ZERO; DIM]; DIM])
    }

    pub fn identity() -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            m.0[i][i] = ONE;
        }
        m
    }

    pub fn from_real_diagonal(d: [f64; DIM]) -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            m.0[i][i] = Complex64::new(d[i], 0.0);
        }
        m
    }

    /// The outer product `|a⟩⟨b|`.
    pub fn outer(a: &Vector4, b: &Vector4) -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = a[i] * b[j].conj();
            }
        }
        m
    }

    /// The rank-one operator `|v⟩⟨v|`.
    pub fn projector(v: &Vector4) -> Self {
        Self::outer(v, v)
    }

    pub fn adjoint(&self) -> Self {
        let mut m = Self::zeros();
        for i in 0..DIM {
            for j in 0..DIM {
                m.0[i][j] = self.0[j][i].conj();
            }
        }
        m
    }

    pub fn trace(&self) -> Complex64 {
        (0..DIM).map(|i| self.0[i][i]).sum()
    }

    pub fn scale(&self, s: f64) -> Self {
        let mut m = *self;
        m.0.iter_mut().flatten().for_each(|z| *z *= s);
        m
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Largest entry of `|M - M†|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..DIM {
            for j in i..DIM {
                worst = worst.max((self.0[i][j] - self.0[j][i].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    /// `(M + M†) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let mut m = *self;
        for i in 0..DIM {
            m.0[i][i] = Complex64::new(self.0[i][i].re, 0.0);
            for j in (i + 1)..DIM {
                let z = (self.0[i][j] + self.0[j][i].conj()) * 0.5;
                m.0[i][j] = z;
                m.0[j][i] = z.conj();
            }
        }
        m
    }

    pub fn mul_vec(&self, v: &Vector4) -> Vector4 {
        let mut out = [ZERO; DIM];
        for (i, row) in self.0.iter().enumerate() {
            out[i] = row.iter().zip(v).map(|(a, b)| a * b).sum();
        }
        out
    }

    /// `⟨v|M|v⟩`.
    pub fn expectation(&self, v: &Vector4) -> Complex64 {
        inner(v, &self.mul_vec(v))
    }

    /// `Tr(self · other)` without forming the product.
    pub fn trace_product(&self, other: &Matrix4) -> Complex64 {
        let mut acc = ZERO;
        for i in 0..DIM {
            for k in 0..DIM {
                acc += self.0[i][k] * other.0[k][i];
            }
        }
        acc
    }
}

impl Index<(usize, usize)> for Matrix4 {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.0[i][j]
    }
}

impl IndexMut<(usize, usize)> for Matrix4 {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.0[i][j]
    }
}

impl Add for Matrix4 {
    type Output = Matrix4;
    fn add(mut self, rhs: Matrix4) -> Matrix4 {
        self += rhs;
        self
    }
}

impl AddAssign for Matrix4 {
    fn add_assign(&mut self, rhs: Matrix4) {
        for i in 0..DIM {
            for j in 0..DIM {
                self.0[i][j] += rhs.0[i][j];
            }
        }
    }
}

impl Sub for Matrix4 {
    type Output = Matrix4;
    fn sub(mut self, rhs: Matrix4) -> Matrix4 {
        for i in 0..DIM {
            for j in 0..DIM {
                self.0[i][j] -= rhs.0[i][j];
            }
        }
        self
    }
}

impl Neg for Matrix4 {
    type Output = Matrix4;
    fn neg(self) -> Matrix4 {
        self.scale(-1.0)
    }
}

impl Mul for Matrix4 {
    type Output = Matrix4;
    fn mul(self, rhs: Matrix4) -> Matrix4 {
        let mut m = Matrix4::zeros();
        for i in 0..DIM {
            for k in 0..DIM {
                let a = self.0[i][k];
                if a == ZERO {
                    continue;
                }
                for j in 0..DIM {
                    m.0[i][j] += a * rhs.0[k][j];
                }
            }
        }
        m
    }
}

impl Mul<f64> for Matrix4 {
    type Output = Matrix4;
    fn mul(self, s: f64) -> Matrix4 {
        self.scale(s)
    }
}

/// Eigenvalues sorted descending with matching orthonormal eigenvectors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenSystem {
    pub values: [f64; DIM],
    pub vectors: [Vector4; DIM],
}

impl EigenSystem {
    /// `Σ_k g(λ_k) |v_k⟩⟨v_k|`.
    pub fn map_spectrum(&self, mut g: impl FnMut(f64) -> f64) -> Matrix4 {
        let mut m = Matrix4::zeros();
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = g(*lambda);
            if w != 0.0 {
                m += Matrix4::projector(v).scale(w);
            }
        }
        m
    }

    pub fn reconstruct(&self) -> Matrix4 {
        self.map_spectrum(|l| l)
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    pub fn min_value(&self) -> f64 {
        self.values[DIM - 1]
    }
}

/// Eigendecomposition of a Hermitian matrix.
///
/// Rejects inputs whose Hermitian deviation exceeds [`HERMITIAN_TOL`].
pub fn eig_hermitian(m: &Matrix4) -> Result<EigenSystem> {
    let dev = m.hermitian_deviation();
    if dev > HERMITIAN_TOL {
        return Err(Error::NonHermitianInput(dev));
    }
    Ok(jacobi(&m.hermitian_part()))
}

/// Cyclic complex Jacobi on an exactly Hermitian matrix.
///
/// Each rotation first removes the phase of the pivot `a_pq = |a_pq| e^{iφ}`
/// with `diag(1, e^{-iφ})` and then applies the real symmetric Jacobi
/// rotation that annihilates the now-real pivot.
pub(crate) fn jacobi(m: &Matrix4) -> EigenSystem {
    let mut a = *m;
    let mut v = Matrix4::identity();
    let scale = m.frobenius_norm();

    if scale > 0.0 {
        for _ in 0..JACOBI_MAX_SWEEPS {
            if off_diagonal_norm(&a) <= JACOBI_TOL * scale {
                break;
            }
            for p in 0..DIM - 1 {
                for q in (p + 1)..DIM {
                    rotate(&mut a, &mut v, p, q);
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..DIM).collect();
    // stable: equal eigenvalues keep their first-occurrence order
    order.sort_by(|&i, &j| a.0[j][j].re.total_cmp(&a.0[i][i].re));

    let mut values = [0.0; DIM];
    let mut vectors = [[ZERO; DIM]; DIM];
    for (slot, &k) in order.iter().enumerate() {
        values[slot] = a.0[k][k].re;
        for r in 0..DIM {
            vectors[slot][r] = v.0[r][k];
        }
    }
    EigenSystem { values, vectors }
}

fn off_diagonal_norm(a: &Matrix4) -> f64 {
    let mut s = 0.0;
    for i in 0..DIM {
        for j in 0..DIM {
            if i != j {
                s += a.0[i][j].norm_sqr();
            }
        }
    }
    s.sqrt()
}

fn rotate(a: &mut Matrix4, v: &mut Matrix4, p: usize, q: usize) {
    let b = a.0[p][q];
    let abs_b = b.norm();
    if abs_b == 0.0 || !abs_b.is_finite() {
        return;
    }
    let phase = (b / abs_b).conj();
    let app = a.0[p][p].re;
    let aqq = a.0[q][q].re;

    let tau = (aqq - app) / (2.0 * abs_b);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;

    // G = diag(1, phase) · [[c, s], [-s, c]]
    let g_pp = Complex64::new(c, 0.0);
    let g_pq = Complex64::new(s, 0.0);
    let g_qp = phase * (-s);
    let g_qq = phase * c;

    for k in 0..DIM {
        let akp = a.0[k][p];
        let akq = a.0[k][q];
        a.0[k][p] = akp * g_pp + akq * g_qp;
        a.0[k][q] = akp * g_pq + akq * g_qq;

        let vkp = v.0[k][p];
        let vkq = v.0[k][q];
        v.0[k][p] = vkp * g_pp + vkq * g_qp;
        v.0[k][q] = vkp * g_pq + vkq * g_qq;
    }
    for k in 0..DIM {
        let apk = a.0[p][k];
        let aqk = a.0[q][k];
        a.0[p][k] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a.0[q][k] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a.0[p][q] = ZERO;
    a.0[q][p] = ZERO;
    a.0[p][p] = Complex64::new(a.0[p][p].re, 0.0);
    a.0[q][q] = Complex64::new(a.0[q][q].re, 0.0);
}

/// Trace norm `Tr|M| = Σ |λ_k|`.
pub fn trace_norm(m: &Matrix4) -> Result<f64> {
    Ok(eig_hermitian(m)?.values.iter().map(|l| l.abs()).sum())
}

fn psd_eigen(m: &Matrix4) -> Result<EigenSystem> {
    let mut eig = eig_hermitian(m)?;
    let min = eig.min_value();
    if min < -PSD_CLAMP {
        return Err(Error::NegativeEigenvalue(min));
    }
    eig.values.iter_mut().for_each(|l| *l = l.max(0.0));
    Ok(eig)
}

/// Inverse square root on the support of a PSD matrix.
///
/// Eigenvalues `λ_k ≤ threshold · λ_max` are treated as outside the support
/// and contribute nothing.
pub fn psd_sqrt_pinv(m: &Matrix4, threshold: f64) -> Result<Matrix4> {
    let eig = psd_eigen(m)?;
    let cut = threshold * eig.max_value();
    Ok(eig.map_spectrum(|l| {
        if l > cut && l > 0.0 {
            l.powf(-0.5)
        } else {
            0.0
        }
    }))
}

/// Square root of a PSD matrix, with eigenvalues below the support cutoff set to zero.
pub fn psd_sqrt(m: &Matrix4) -> Result<Matrix4> {
    let eig = psd_eigen(m)?;
    Ok(sqrt_on_support(&eig))
}

fn sqrt_on_support(eig: &EigenSystem) -> Matrix4 {
    let cut = SUPPORT_CUTOFF * eig.max_value();
    eig.map_spectrum(|l| if l > cut && l > 0.0 { l.sqrt() } else { 0.0 })
}

/// Projector onto the span of eigenvectors with eigenvalue above the support cutoff.
pub fn support_projector(m: &Matrix4) -> Result<Matrix4> {
    let eig = psd_eigen(m)?;
    let cut = SUPPORT_CUTOFF * eig.max_value();
    Ok(eig.map_spectrum(|l| if l > cut && l > 0.0 { 1.0 } else { 0.0 }))
}

/// A validated density operator: Hermitian, positive semidefinite, unit trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityOperator(Matrix4);

impl DensityOperator {
    pub fn new(m: Matrix4) -> Result<Self> {
        let dev = m.hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::InvalidDensityOperator(format!(
                "not Hermitian (deviation {dev:e})"
            )));
        }
        let m = m.hermitian_part();
        let tr = m.trace().re;
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensityOperator(format!("trace {tr} != 1")));
        }
        let min = jacobi(&m).min_value();
        if min < -PSD_CLAMP {
            return Err(Error::InvalidDensityOperator(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(DensityOperator(m))
    }

    /// `|ψ⟩⟨ψ|` for a vector normalized within [`TRACE_TOL`].
    pub fn pure(psi: &Vector4) -> Result<Self> {
        Self::new(Matrix4::projector(psi))
    }

    /// Convex combination `Σ w_i ρ_i`; weights must be non-negative and sum to one.
    pub fn mixture(parts: &[(f64, &DensityOperator)]) -> Result<Self> {
        let total: f64 = parts.iter().map(|(w, _)| w).sum();
        if parts.iter().any(|(w, _)| *w < 0.0) || (total - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidDensityOperator(format!(
                "mixture weights must be non-negative and sum to 1 (sum {total})"
            )));
        }
        let mut m = Matrix4::zeros();
        for (w, rho) in parts {
            m += rho.0.scale(*w);
        }
        Self::new(m)
    }

    pub fn matrix(&self) -> &Matrix4 {
        &self.0
    }

    pub fn eigen(&self) -> EigenSystem {
        jacobi(&self.0)
    }

    /// Number of eigenvalues above the absolute threshold.
    pub fn rank(&self, threshold: f64) -> usize {
        self.eigen()
            .values
            .iter()
            .filter(|&&l| l > threshold)
            .count()
    }

    /// Born probability `Tr(E ρ)` for a measurement element `E`.
    pub fn probability(&self, element: &Matrix4) -> f64 {
        element.trace_product(&self.0).re
    }
}

/// Square-root fidelity `Tr[(√ρ0 ρ1 √ρ0)^{1/2}]`, in `[0, 1]`.
pub fn fidelity(rho0: &DensityOperator, rho1: &DensityOperator) -> f64 {
    let s = sqrt_on_support(&clamped(rho0.eigen()));
    let inner = (s * *rho1.matrix() * s).hermitian_part();
    let eig = clamped(jacobi(&inner));
    let cut = SUPPORT_CUTOFF * eig.max_value();
    let f: f64 = eig
        .values
        .iter()
        .filter(|&&l| l > cut && l > 0.0)
        .map(|l| l.sqrt())
        .sum();
    f.clamp(0.0, 1.0)
}

fn clamped(mut eig: EigenSystem) -> EigenSystem {
    eig.values.iter_mut().for_each(|l| *l = l.max(0.0));
    eig
}
