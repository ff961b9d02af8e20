//! Two-qubit state algebra.
//!
//! Dense complex matrices (2x2 and 4x4), validated density operators, the
//! Bloch/Pauli decomposition, the canonical-form map that normalizes Bob's
//! marginal, and the random/Werner state generators used to build datasets.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::rng::rng_from_seed;

/// Tolerance for validation identities (hermiticity, unit trace, reconstruction).
pub const TOL_VALID: f64 = 1e-12;
/// Slack allowed below zero for the smallest eigenvalue of a PSD operator.
pub const TOL_PSD: f64 = 1e-10;

/// Dense complex matrix in row-major order. Everything in this crate is 2x2
/// or 4x4; access is bounds-checked.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, Complex64::new(1.0, 0.0));
        }
        m
    }

    /// Builds from a row-major slice of entries.
    pub fn from_rows(rows: usize, cols: usize, entries: &[Complex64]) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "expected {}x{}={} entries, got {}",
                rows,
                cols,
                rows * cols,
                entries.len()
            )));
        }
        Ok(Self {
            rows,
            cols,
            data: entries.to_vec(),
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Complex64) {
        assert!(r < self.rows && c < self.cols, "index ({r},{c}) out of bounds");
        self.data[r * self.cols + c] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn scale_re(&self, s: f64) -> Self {
        self.scale(Complex64::new(s, 0.0))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self.data[i * self.cols + k];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out.data[i * other.cols + j] += aik * other.data[k * other.cols + j];
                }
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.set(c, r, self.get(r, c).conj());
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        assert_eq!(self.rows, self.cols);
        (0..self.rows).map(|i| self.data[i * self.cols + i]).sum()
    }

    /// Kronecker product `self (x) other`.
    pub fn kron(&self, other: &Self) -> Self {
        let mut out = Self::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self.get(i, j);
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        out.set(i * other.rows + k, j * other.cols + l, a * other.get(k, l));
                    }
                }
            }
        }
        out
    }

    /// Largest entrywise absolute difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.rows == self.cols && self.max_abs_diff(&self.adjoint()) <= tol
    }

    /// Eigenvalues of a Hermitian matrix, ascending, by cyclic Jacobi sweeps
    /// with complex plane rotations.
    pub fn hermitian_eigenvalues(&self) -> Vec<f64> {
        assert!(self.rows == self.cols, "eigenvalues need a square matrix");
        let n = self.rows;
        let mut h = self.clone();
        // Symmetrize once so round-off in the input cannot stall the sweeps.
        for r in 0..n {
            for c in 0..n {
                let avg = (h.get(r, c) + h.get(c, r).conj()) * 0.5;
                h.set(r, c, avg);
            }
        }
        for _sweep in 0..60 {
            let mut off = 0.0_f64;
            for p in 0..n {
                for q in (p + 1)..n {
                    off += h.get(p, q).norm_sqr();
                }
            }
            if off <= 1e-30 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = h.get(p, q);
                    let r = apq.norm();
                    if r <= 1e-300 {
                        continue;
                    }
                    let phase = apq / r;
                    let app = h.get(p, p).re;
                    let aqq = h.get(q, q).re;
                    // Angle of the real Jacobi rotation after the phase is
                    // factored out of the off-diagonal entry.
                    let theta = 0.5 * (2.0 * r).atan2(app - aqq);
                    let (s, c) = theta.sin_cos();
                    // Column update with U: col_p' = c*col_p + s*phase*col_q,
                    // col_q' = -s*conj(phase)*col_p ... applied as H <- U^H H U.
                    let up = Complex64::new(c, 0.0);
                    let uq = phase * s;
                    for i in 0..n {
                        let hip = h.get(i, p);
                        let hiq = h.get(i, q);
                        h.set(i, p, hip * up + hiq * uq.conj());
                        h.set(i, q, -hip * uq + hiq * up);
                    }
                    for j in 0..n {
                        let hpj = h.get(p, j);
                        let hqj = h.get(q, j);
                        h.set(p, j, hpj * up + hqj * uq);
                        h.set(q, j, -hpj * uq.conj() + hqj * up);
                    }
                }
            }
        }
        let mut eigs: Vec<f64> = (0..n).map(|i| h.get(i, i).re).collect();
        eigs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        eigs
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.hermitian_eigenvalues()[0]
    }
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Pauli matrix by index 1..=3 (x, y, z).
pub fn pauli(k: usize) -> ComplexMatrix {
    let entries = match k {
        1 => [c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)],
        2 => [c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)],
        3 => [c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)],
        _ => panic!("Pauli index must be 1, 2 or 3"),
    };
    ComplexMatrix::from_rows(2, 2, &entries).unwrap()
}

/// `n . sigma` for a real 3-vector.
pub fn dot_sigma(n: [f64; 3]) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2, 2);
    for (k, nk) in n.iter().enumerate() {
        out = out.add(&pauli(k + 1).scale_re(*nk));
    }
    out
}

fn check_state(mat: &ComplexMatrix, dim: usize, what: &str) -> Result<()> {
    if mat.rows() != dim || mat.cols() != dim {
        return Err(Error::InvalidDensity(format!(
            "{what} must be {dim}x{dim}, got {}x{}",
            mat.rows(),
            mat.cols()
        )));
    }
    let herm = mat.max_abs_diff(&mat.adjoint());
    if herm > TOL_VALID {
        return Err(Error::InvalidDensity(format!(
            "{what} not Hermitian (max deviation {herm:.3e})"
        )));
    }
    let tr = mat.trace();
    if (tr.re - 1.0).abs() > TOL_VALID || tr.im.abs() > TOL_VALID {
        return Err(Error::InvalidDensity(format!(
            "{what} trace {tr} differs from 1"
        )));
    }
    let min_eig = mat.min_eigenvalue();
    if min_eig < -TOL_PSD {
        return Err(Error::InvalidDensity(format!(
            "{what} not PSD (min eigenvalue {min_eig:.3e})"
        )));
    }
    Ok(())
}

/// Validated 4x4 density operator: Hermitian, unit trace, PSD.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        check_state(&mat, 4, "density matrix")?;
        Ok(Self { mat })
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn purity(&self) -> f64 {
        self.mat.mul(&self.mat).trace().re
    }

    /// Convex mixture of states; weights must sum to 1.
    pub fn mix(parts: &[(f64, DensityMatrix)]) -> Result<Self> {
        let mut acc = ComplexMatrix::zeros(4, 4);
        for (w, rho) in parts {
            if *w < -TOL_VALID {
                return Err(Error::InvalidParameter(format!("negative weight {w}")));
            }
            acc = acc.add(&rho.mat.scale_re(*w));
        }
        Self::new(acc)
    }
}

/// Validated 2x2 density operator.
#[derive(Clone, Debug, PartialEq)]
pub struct QubitDensity {
    mat: ComplexMatrix,
}

impl QubitDensity {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        check_state(&mat, 2, "qubit density matrix")?;
        Ok(Self { mat })
    }

    pub fn mat(&self) -> &ComplexMatrix {
        &self.mat
    }

    /// Eigenvalues (ascending) via the closed-form 2x2 Hermitian solver.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let (lo, hi, _, _) = eig2(&self.mat);
        [lo, hi]
    }
}

/// Parameters of the generalized Werner state
/// `alpha |psi_chi><psi_chi| + (1-alpha) I/2 (x) rho_B`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WernerParams {
    alpha: f64,
    chi: f64,
}

impl WernerParams {
    pub fn new(alpha: f64, chi: f64) -> Result<Self> {
        if !alpha.is_finite() || !chi.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "non-finite Werner parameters alpha={alpha}, chi={chi}"
            )));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha={alpha} outside [0, 1]"
            )));
        }
        if chi <= 0.0 || chi > std::f64::consts::FRAC_PI_4 {
            return Err(Error::InvalidParameter(format!(
                "chi={chi} outside (0, pi/4]"
            )));
        }
        Ok(Self { alpha, chi })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }
}

/// Local Bloch vectors and the 3x3 correlation matrix of a two-qubit state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochDecomposition {
    pub x: [f64; 3],
    pub y: [f64; 3],
    pub t: [[f64; 3]; 3],
}

impl BlochDecomposition {
    /// Rebuilds `1/4 (I + sum x_i s_i(x)I + sum y_j I(x)s_j + sum t_kl s_k(x)s_l)`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let id2 = ComplexMatrix::identity(2);
        let mut acc = ComplexMatrix::identity(4);
        for i in 0..3 {
            acc = acc.add(&pauli(i + 1).kron(&id2).scale_re(self.x[i]));
            acc = acc.add(&id2.kron(&pauli(i + 1)).scale_re(self.y[i]));
        }
        for k in 0..3 {
            for l in 0..3 {
                acc = acc.add(&pauli(k + 1).kron(&pauli(l + 1)).scale_re(self.t[k][l]));
            }
        }
        acc.scale_re(0.25)
    }
}

/// Which local filter `canonical_form` applies on Bob's side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum CanonicalMode {
    /// Conjugate by `I (x) sqrt(rho_B)`, then renormalize.
    #[serde(rename = "as-written")]
    AsWritten,
    /// Conjugate by `I (x) rho_B^{-1/2}`, mapping Bob's marginal to I/2.
    #[serde(rename = "inverse-sqrt-normalized")]
    InverseSqrtNormalized,
}

impl std::fmt::Display for CanonicalMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CanonicalMode::AsWritten => write!(f, "as-written"),
            CanonicalMode::InverseSqrtNormalized => write!(f, "inverse-sqrt-normalized"),
        }
    }
}

impl std::str::FromStr for CanonicalMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "as-written" => Ok(CanonicalMode::AsWritten),
            "inverse-sqrt-normalized" => Ok(CanonicalMode::InverseSqrtNormalized),
            other => Err(Error::InvalidParameter(format!(
                "unknown canonical mode '{other}'"
            ))),
        }
    }
}

/// Random density matrix `H/tr(H)` with `H = (A+iB)(A+iB)^dagger`, where A and
/// B carry independent standard-normal entries. Deterministic per seed.
pub fn random_density(seed: u64) -> DensityMatrix {
    let mat = ginibre_density(seed, 4);
    DensityMatrix::new(mat).expect("H/tr(H) is Hermitian PSD with unit trace")
}

/// 2x2 analogue of [`random_density`]; used to assemble separable mixtures.
pub fn random_qubit_density(seed: u64) -> QubitDensity {
    let mat = ginibre_density(seed, 2);
    QubitDensity::new(mat).expect("H/tr(H) is Hermitian PSD with unit trace")
}

fn ginibre_density(seed: u64, n: usize) -> ComplexMatrix {
    let mut rng = rng_from_seed(seed);
    let mut a = vec![0.0_f64; n * n];
    let mut b = vec![0.0_f64; n * n];
    for v in a.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    for v in b.iter_mut() {
        *v = rng.sample(StandardNormal);
    }
    let mut g = ComplexMatrix::zeros(n, n);
    for r in 0..n {
        for col in 0..n {
            g.set(r, col, c(a[r * n + col], b[r * n + col]));
        }
    }
    let h = g.mul(&g.adjoint());
    let tr = h.trace().re;
    let mut rho = h.scale_re(1.0 / tr);
    // Force exact Hermitian symmetry; products of conjugates can drift by ulps.
    for r in 0..n {
        for col in (r + 1)..n {
            let avg = (rho.get(r, col) + rho.get(col, r).conj()) * 0.5;
            rho.set(r, col, avg);
            rho.set(col, r, avg.conj());
        }
        let d = rho.get(r, r);
        rho.set(r, r, c(d.re, 0.0));
    }
    rho
}

/// Exact matrix of the generalized Werner state for validated parameters.
pub fn werner_state(p: &WernerParams) -> DensityMatrix {
    let (cos_chi, sin_chi) = (p.chi.cos(), p.chi.sin());
    // |psi_chi> = cos chi |00> + sin chi |11>
    let mut proj = ComplexMatrix::zeros(4, 4);
    proj.set(0, 0, c(cos_chi * cos_chi, 0.0));
    proj.set(0, 3, c(cos_chi * sin_chi, 0.0));
    proj.set(3, 0, c(cos_chi * sin_chi, 0.0));
    proj.set(3, 3, c(sin_chi * sin_chi, 0.0));
    // rho_B = tr_A |psi><psi| = diag(cos^2 chi, sin^2 chi)
    let mut rho_b = ComplexMatrix::zeros(2, 2);
    rho_b.set(0, 0, c(cos_chi * cos_chi, 0.0));
    rho_b.set(1, 1, c(sin_chi * sin_chi, 0.0));
    let background = ComplexMatrix::identity(2).scale_re(0.5).kron(&rho_b);
    let mat = proj.scale_re(p.alpha).add(&background.scale_re(1.0 - p.alpha));
    DensityMatrix::new(mat).expect("Werner state is a valid density matrix")
}

/// Bob's reduced state `tr_A rho`.
pub fn partial_trace_a(rho: &DensityMatrix) -> QubitDensity {
    let m = rho.mat();
    let mut out = ComplexMatrix::zeros(2, 2);
    for j in 0..2 {
        for l in 0..2 {
            let v = m.get(j, l) + m.get(2 + j, 2 + l);
            out.set(j, l, v);
        }
    }
    // Same ulp-level symmetrization as the constructors.
    let off = (out.get(0, 1) + out.get(1, 0).conj()) * 0.5;
    out.set(0, 1, off);
    out.set(1, 0, off.conj());
    out.set(0, 0, c(out.get(0, 0).re, 0.0));
    out.set(1, 1, c(out.get(1, 1).re, 0.0));
    QubitDensity::new(out).expect("partial trace of a state is a state")
}

/// Pauli expectations `x_i = tr[(s_i (x) I) rho]`, `y_j = tr[(I (x) s_j) rho]`,
/// `t_kl = tr[(s_k (x) s_l) rho]`.
pub fn bloch_decompose(rho: &DensityMatrix) -> BlochDecomposition {
    let id2 = ComplexMatrix::identity(2);
    let re_trace = |op: &ComplexMatrix| op.mul(rho.mat()).trace().re;
    let mut x = [0.0; 3];
    let mut y = [0.0; 3];
    let mut t = [[0.0; 3]; 3];
    for i in 0..3 {
        x[i] = re_trace(&pauli(i + 1).kron(&id2));
        y[i] = re_trace(&id2.kron(&pauli(i + 1)));
        for j in 0..3 {
            t[i][j] = re_trace(&pauli(i + 1).kron(&pauli(j + 1)));
        }
    }
    BlochDecomposition { x, y, t }
}

/// Closed-form eigendecomposition of a 2x2 Hermitian matrix.
/// Returns (lo, hi, v_lo, v_hi) with unit-norm eigenvectors.
fn eig2(m: &ComplexMatrix) -> (f64, f64, [Complex64; 2], [Complex64; 2]) {
    let a = m.get(0, 0).re;
    let d = m.get(1, 1).re;
    let b = m.get(0, 1);
    let mean = 0.5 * (a + d);
    let delta = 0.5 * (a - d);
    let r = (delta * delta + b.norm_sqr()).sqrt();
    let (lo, hi) = (mean - r, mean + r);
    if b.norm() <= 1e-300 {
        // Already diagonal; order eigenvectors to match (lo, hi).
        let e0 = [c(1.0, 0.0), c(0.0, 0.0)];
        let e1 = [c(0.0, 0.0), c(1.0, 0.0)];
        return if a <= d { (lo, hi, e0, e1) } else { (lo, hi, e1, e0) };
    }
    let normalize = |v: [Complex64; 2]| {
        let n = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        [v[0] / n, v[1] / n]
    };
    // (M - lambda I) v = 0  =>  v = (b, lambda - a) works whenever b != 0.
    let v_lo = normalize([b, c(lo - a, 0.0)]);
    let v_hi = normalize([b, c(hi - a, 0.0)]);
    (lo, hi, v_lo, v_hi)
}

/// Spectral function of a 2x2 Hermitian PSD matrix: applies `f` to the
/// (clamped non-negative) eigenvalues.
fn herm2_apply(m: &ComplexMatrix, f: impl Fn(f64) -> f64) -> ComplexMatrix {
    let (lo, hi, v_lo, v_hi) = eig2(m);
    let flo = f(lo.max(0.0));
    let fhi = f(hi.max(0.0));
    let mut out = ComplexMatrix::zeros(2, 2);
    for r in 0..2 {
        for cidx in 0..2 {
            let proj_lo = v_lo[r] * v_lo[cidx].conj();
            let proj_hi = v_hi[r] * v_hi[cidx].conj();
            out.set(r, cidx, proj_lo * flo + proj_hi * fhi);
        }
    }
    out
}

/// Hermitian PSD square root via the closed-form 2x2 eigendecomposition;
/// `matrix_sqrt(q)^2 == q` within 1e-12.
pub fn matrix_sqrt(q: &QubitDensity) -> ComplexMatrix {
    herm2_apply(q.mat(), f64::sqrt)
}

/// Local filter on Bob's side followed by renormalization to unit trace.
///
/// `AsWritten` conjugates by `I (x) sqrt(rho_B)`; `InverseSqrtNormalized`
/// conjugates by `I (x) rho_B^{-1/2}`, which maps Bob's marginal to I/2 and
/// fails with `SingularMarginal` when `rho_B` is rank-deficient.
pub fn canonical_form(rho: &DensityMatrix, mode: CanonicalMode) -> Result<DensityMatrix> {
    let rho_b = partial_trace_a(rho);
    let filter = match mode {
        CanonicalMode::AsWritten => matrix_sqrt(&rho_b),
        CanonicalMode::InverseSqrtNormalized => {
            let min_eig = rho_b.eigenvalues()[0];
            if min_eig <= TOL_PSD {
                return Err(Error::SingularMarginal { min_eig });
            }
            herm2_apply(rho_b.mat(), |lambda| 1.0 / lambda.sqrt())
        }
    };
    let full = ComplexMatrix::identity(2).kron(&filter);
    let mapped = full.mul(rho.mat()).mul(&full);
    let tr = mapped.trace().re;
    let mut out = mapped.scale_re(1.0 / tr);
    for r in 0..4 {
        for cidx in (r + 1)..4 {
            let avg = (out.get(r, cidx) + out.get(cidx, r).conj()) * 0.5;
            out.set(r, cidx, avg);
            out.set(cidx, r, avg.conj());
        }
        let d = out.get(r, r);
        out.set(r, r, c(d.re, 0.0));
    }
    DensityMatrix::new(out)
}
