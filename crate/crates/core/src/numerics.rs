//! Dense complex linear algebra and projection kernels.
//!
//! Everything here is sized for the jammer array (at most 64 elements), so the
//! matrices are plain row-major `Vec`s and the eigensolver is cyclic Jacobi.

use std::fmt;
use std::ops::Index;

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex<f64>;

/// Largest dimension accepted by [`eig_hermitian`].
pub const MAX_EIG_DIM: usize = 64;
/// Off-diagonal Frobenius norm (relative to ‖A‖_F) at which Jacobi stops.
pub const JACOBI_TOL: f64 = 1e-12;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Relative entrywise tolerance for the Hermitian check.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Dense complex column vector with at least one finite entry.
#[derive(Clone, PartialEq)]
pub struct ComplexVec(Vec<C64>);

impl ComplexVec {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::Validation("complex vector must be non-empty".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("complex vector has non-finite entries".into()));
        }
        Ok(ComplexVec(entries))
    }

    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "dimension must be positive");
        ComplexVec(vec![C64::new(0.0, 0.0); n])
    }

    pub fn from_fn(n: usize, f: impl FnMut(usize) -> C64) -> Self {
        assert!(n > 0, "dimension must be positive");
        ComplexVec((0..n).map(f).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, C64> {
        self.0.iter()
    }

    /// `selfᴴ · other`.
    pub fn inner(&self, other: &ComplexVec) -> C64 {
        debug_assert_eq!(self.len(), other.len());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn scaled(&self, s: C64) -> ComplexVec {
        ComplexVec(self.0.iter().map(|z| z * s).collect())
    }

    pub fn scaled_real(&self, s: f64) -> ComplexVec {
        ComplexVec(self.0.iter().map(|z| z * s).collect())
    }

    pub fn conj(&self) -> ComplexVec {
        ComplexVec(self.0.iter().map(|z| z.conj()).collect())
    }

    /// Rescales to unit norm when the norm exceeds one.
    pub fn clamp_norm(&self, cap: f64) -> ComplexVec {
        let n = self.norm();
        if n > cap {
            self.scaled_real(cap / n)
        } else {
            self.clone()
        }
    }

    /// `v vᴴ`.
    pub fn outer(&self) -> HermitianMatrix {
        let n = self.len();
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(self.0[i] * self.0[j].conj());
            }
        }
        HermitianMatrix { n, data }
    }
}

impl Index<usize> for ComplexVec {
    type Output = C64;

    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl fmt::Debug for ComplexVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.0.iter()).finish()
    }
}

/// Dense Hermitian matrix stored row-major.
///
/// The constructor symmetrizes its input after the tolerance check, so every
/// value of this type is exactly Hermitian.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    pub fn new(n: usize, data: Vec<C64>) -> Result<Self> {
        if n == 0 || data.len() != n * n {
            return Err(Error::Validation(format!(
                "expected {n}x{n} entries, got {}",
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::Validation("matrix has non-finite entries".into()));
        }
        let scale = data.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let tol = HERMITIAN_TOL * scale.max(f64::MIN_POSITIVE);
        for i in 0..n {
            for j in i..n {
                let a = data[i * n + j];
                let b = data[j * n + i].conj();
                if (a - b).norm() > tol {
                    return Err(Error::Validation(format!(
                        "matrix is not Hermitian at ({i}, {j})"
                    )));
                }
            }
        }
        let mut out = HermitianMatrix { n, data };
        out.symmetrize();
        Ok(out)
    }

    pub fn zeros(n: usize) -> Self {
        HermitianMatrix {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real_diagonal(&vec![1.0; n])
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n);
        for (i, d) in diag.iter().enumerate() {
            m.data[i * n + i] = C64::new(*d, 0.0);
        }
        m
    }

    fn symmetrize(&mut self) {
        let n = self.n;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in i + 1..n {
                let avg = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                self.data[i * n + j] = avg;
                self.data[j * n + i] = avg.conj();
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i].re).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `vᴴ A v`, real for Hermitian `A`.
    pub fn quad_form(&self, v: &ComplexVec) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for i in 0..n {
            let row = &self.data[i * n..(i + 1) * n];
            let av: C64 = row.iter().zip(v.iter()).map(|(a, x)| a * x).sum();
            acc += (v[i].conj() * av).re;
        }
        acc
    }

    /// `Re tr(A B)`, the real inner product on Hermitian matrices.
    pub fn inner_product(&self, other: &HermitianMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    /// `self + s·other`.
    pub fn add_scaled(&self, other: &HermitianMatrix, s: f64) -> HermitianMatrix {
        assert_eq!(self.n, other.n);
        HermitianMatrix {
            n: self.n,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b * s)
                .collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    /// Entries as `[re₀₀, im₀₀, re₀₁, im₀₁, …]`, row-major. The Euclidean
    /// inner product of two such vectors is `Re tr(A B)`.
    pub fn to_real_vec(&self) -> Vec<f64> {
        self.data.iter().flat_map(|z| [z.re, z.im]).collect()
    }

    pub fn from_real_vec(n: usize, x: &[f64]) -> Result<Self> {
        if x.len() != 2 * n * n {
            return Err(Error::Validation(format!(
                "expected {} reals for a {n}x{n} matrix, got {}",
                2 * n * n,
                x.len()
            )));
        }
        Self::new(n, x.chunks_exact(2).map(|c| C64::new(c[0], c[1])).collect())
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &HermitianMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<_> = self.data.chunks(self.n).collect();
        f.debug_struct("HermitianMatrix")
            .field("n", &self.n)
            .field("rows", &rows)
            .finish()
    }
}

/// Spectral decomposition `A = V Λ Vᴴ` with eigenvalues sorted descending.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    /// Orthonormal eigenvectors, one per eigenvalue, in the same order.
    pub eigenvectors: Vec<ComplexVec>,
}

impl EigenDecomposition {
    /// `Σ λᵢ vᵢ vᵢᴴ` for arbitrary replacement eigenvalues.
    pub fn reconstruct_with(&self, eigenvalues: &[f64]) -> HermitianMatrix {
        let n = self.eigenvectors[0].len();
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        for (lambda, v) in eigenvalues.iter().zip(&self.eigenvectors) {
            if *lambda == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = v[i] * *lambda;
                for j in 0..n {
                    data[i * n + j] += vi * v[j].conj();
                }
            }
        }
        let mut m = HermitianMatrix { n, data };
        m.symmetrize();
        m
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(&self.eigenvalues)
    }
}

fn off_diagonal_norm(m: &[C64], n: usize) -> f64 {
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += m[i * n + j].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// Cyclic complex Jacobi eigensolver.
///
/// Each rotation first removes the phase of the pivot `a_pq`, then applies
/// the real symmetric Jacobi rotation that zeroes it.
pub fn eig_hermitian(a: &HermitianMatrix) -> Result<EigenDecomposition> {
    let n = a.dim();
    if n > MAX_EIG_DIM {
        return Err(Error::Validation(format!(
            "eigensolver supports dimension <= {MAX_EIG_DIM}, got {n}"
        )));
    }
    let mut m = a.data.clone();
    let mut v = HermitianMatrix::identity(n).data;
    let scale = a.frobenius_norm();

    let mut converged = scale == 0.0;
    for _ in 0..JACOBI_MAX_SWEEPS {
        if converged {
            break;
        }
        if off_diagonal_norm(&m, n) <= JACOBI_TOL * scale {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                let mag = apq.norm();
                if mag == 0.0 {
                    continue;
                }
                let app = m[p * n + p].re;
                let aqq = m[q * n + q].re;
                let phase = apq / mag;
                let zeta = (aqq - app) / (2.0 * mag);
                let t = if zeta >= 0.0 {
                    1.0 / (zeta + (1.0 + zeta * zeta).sqrt())
                } else {
                    -1.0 / (-zeta + (1.0 + zeta * zeta).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                let sp = phase.conj() * s; // s·e^{-iθ}
                let cp = phase.conj() * c; // c·e^{-iθ}

                // A ← A G
                for k in 0..n {
                    let akp = m[k * n + p];
                    let akq = m[k * n + q];
                    m[k * n + p] = akp * c - sp * akq;
                    m[k * n + q] = akp * s + cp * akq;
                }
                // A ← Gᴴ A
                for k in 0..n {
                    let apk = m[p * n + k];
                    let aqk = m[q * n + k];
                    m[p * n + k] = apk * c - sp.conj() * aqk;
                    m[q * n + k] = apk * s + cp.conj() * aqk;
                }
                m[p * n + q] = C64::new(0.0, 0.0);
                m[q * n + p] = C64::new(0.0, 0.0);
                m[p * n + p].im = 0.0;
                m[q * n + q].im = 0.0;
                // V ← V G
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = vkp * c - sp * vkq;
                    v[k * n + q] = vkp * s + cp * vkq;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&m, n) > JACOBI_TOL * scale {
        return Err(Error::Numeric(format!(
            "Jacobi did not converge in {JACOBI_MAX_SWEEPS} sweeps (n = {n})"
        )));
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[j * n + j].re.total_cmp(&m[i * n + i].re));
    let eigenvalues = order.iter().map(|&i| m[i * n + i].re).collect();
    let eigenvectors = order
        .iter()
        .map(|&col| ComplexVec((0..n).map(|row| v[row * n + col]).collect()))
        .collect();
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Euclidean projection of a descending-sorted vector onto
/// `{λ ≥ 0, Σλ = cap}` by the sorted-threshold rule.
fn project_capped_simplex(sorted_desc: &[f64], cap: f64) -> Vec<f64> {
    let mut cumulative = 0.0;
    let mut theta = 0.0;
    for (j, &u) in sorted_desc.iter().enumerate() {
        cumulative += u;
        let candidate = (cumulative - cap) / (j + 1) as f64;
        if u - candidate > 0.0 {
            theta = candidate;
        }
    }
    sorted_desc.iter().map(|u| (u - theta).max(0.0)).collect()
}

/// Frobenius-nearest point of `{X ⪰ 0, tr X ≤ trace_cap}`.
pub fn project_psd_trace(a: &HermitianMatrix, trace_cap: f64) -> Result<HermitianMatrix> {
    if !(trace_cap > 0.0) {
        return Err(Error::Validation(format!(
            "trace cap must be positive, got {trace_cap}"
        )));
    }
    let eig = eig_hermitian(a)?;
    let clipped: Vec<f64> = eig.eigenvalues.iter().map(|l| l.max(0.0)).collect();
    let lambdas = if clipped.iter().sum::<f64>() <= trace_cap {
        clipped
    } else {
        project_capped_simplex(&eig.eigenvalues, trace_cap)
    };
    Ok(eig.reconstruct_with(&lambdas))
}

/// Deterministic generator for one `(seed, stream)` pair.
///
/// Streams let per-slot randomness stay independent of the order in which
/// slots are processed.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// I.i.d. circularly-symmetric complex Gaussian entries with unit variance.
pub fn sample_complex_gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> ComplexVec {
    let scale = std::f64::consts::FRAC_1_SQRT_2;
    ComplexVec::from_fn(n, |_| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// Nearest point of the closed Euclidean ball.
pub fn project_ball(x: &[f64], center: &[f64], radius: f64) -> Vec<f64> {
    debug_assert_eq!(x.len(), center.len());
    let dist = x
        .iter()
        .zip(center)
        .map(|(a, c)| (a - c) * (a - c))
        .sum::<f64>()
        .sqrt();
    if dist <= radius {
        return x.to_vec();
    }
    let k = radius / dist;
    x.iter().zip(center).map(|(a, c)| c + (a - c) * k).collect()
}
