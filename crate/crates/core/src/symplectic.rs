//! Covariance-matrix data model and symplectic linear algebra.
//!
//! Conventions: `2n x 2n` real symmetric matrices in `(x1..xn, p1..pn)`
//! ordering, dimensionless with vacuum variance 1 (the CM of any coherent
//! state is the identity). The symplectic form is `[[0, -I], [I, 0]]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{GaussError, Result};
use crate::tol;

pub type RMat = DMatrix<f64>;
pub type CMat = DMatrix<Complex64>;

/// Covariance matrix of an n-mode state, `(x..x, p..p)` ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    n: usize,
    entries: RMat,
}

/// The symplectic form `[[0, -I], [I, 0]]`.
#[derive(Debug, Clone)]
pub struct SymplecticForm {
    pub n: usize,
    pub delta: RMat,
}

/// Williamson output: `gamma = S * diag(nu, nu) * S^T` with `S` symplectic.
#[derive(Debug, Clone)]
pub struct SymplecticDecomposition {
    pub s: RMat,
    /// Symplectic eigenvalues, sorted descending.
    pub nu: Vec<f64>,
}

/// n-mode symmetric Gaussian state: `H_n(a, c1) (+) H_n(b, -c2)` where
/// `H_n(x, y)` has diagonal `x` and off-diagonal `y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SymmetricSpec {
    pub n: usize,
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

/// Two-mode standard form: `gamma_x = [[a, c1], [c1, b]]`,
/// `gamma_p = [[a, -c2], [-c2, b]]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwoModeStandardForm {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
}

/// On-disk JSON schema for covariance matrices.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CmFile {
    pub n: usize,
    pub ordering: String,
    pub matrix: Vec<Vec<f64>>,
}

impl CovarianceMatrix {
    /// Validates symmetry and dimension, stores the symmetrized part.
    pub fn new(n: usize, entries: RMat) -> Result<Self> {
        if n == 0 {
            return Err(GaussError::InvalidArgument("mode count must be >= 1".into()));
        }
        if entries.nrows() != 2 * n || entries.ncols() != 2 * n {
            return Err(GaussError::InvalidArgument(format!(
                "expected {0}x{0} matrix, got {1}x{2}",
                2 * n,
                entries.nrows(),
                entries.ncols()
            )));
        }
        for i in 0..2 * n {
            for j in 0..i {
                let (a, b) = (entries[(i, j)], entries[(j, i)]);
                if (a - b).abs() > tol::SYMMETRY_REL * f64::max(1.0, a.abs()) {
                    return Err(GaussError::InvalidArgument(format!(
                        "matrix not symmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
            }
        }
        let sym = (&entries + entries.transpose()) * 0.5;
        Ok(Self { n, entries: sym })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn entries(&self) -> &RMat {
        &self.entries
    }

    /// Single-mode CM from `[[a, c], [c, b]]`.
    pub fn single_mode(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::new(1, RMat::from_row_slice(2, 2, &[a, c, c, b]))
    }

    pub fn from_file_schema(file: &CmFile) -> Result<Self> {
        if file.ordering != "xxpp" {
            return Err(GaussError::InvalidArgument(format!(
                "unsupported ordering {:?}, expected \"xxpp\"",
                file.ordering
            )));
        }
        let d = 2 * file.n;
        if file.matrix.len() != d || file.matrix.iter().any(|r| r.len() != d) {
            return Err(GaussError::InvalidArgument(format!(
                "matrix must be {d}x{d} for n = {}",
                file.n
            )));
        }
        let flat: Vec<f64> = file.matrix.iter().flatten().copied().collect();
        Self::new(file.n, RMat::from_row_slice(d, d, &flat))
    }

    pub fn to_file_schema(&self) -> CmFile {
        let d = 2 * self.n;
        CmFile {
            n: self.n,
            ordering: "xxpp".into(),
            matrix: (0..d)
                .map(|i| (0..d).map(|j| self.entries[(i, j)]).collect())
                .collect(),
        }
    }
}

/// The symplectic form for n modes.
pub fn symplectic_form(n: usize) -> Result<SymplecticForm> {
    if n == 0 {
        return Err(GaussError::InvalidArgument("mode count must be >= 1".into()));
    }
    let mut delta = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        delta[(i, n + i)] = -1.0;
        delta[(n + i, i)] = 1.0;
    }
    Ok(SymplecticForm { n, delta })
}

fn to_complex(m: &RMat) -> CMat {
    m.map(|x| Complex64::new(x, 0.0))
}

/// Eigenvalues of a Hermitian complex matrix, ascending.
pub(crate) fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    let eig = m.clone().symmetric_eigen();
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    vals
}

/// Physicality report: verdict plus the smallest eigenvalue of `gamma + i*Delta`.
#[derive(Debug, Clone, Copy)]
pub struct PhysicalityReport {
    pub physical: bool,
    pub min_eigenvalue: f64,
}

/// Schroedinger-Robertson check: `gamma + i*Delta >= 0`.
pub fn is_physical(gamma: &CovarianceMatrix) -> PhysicalityReport {
    let delta = symplectic_form(gamma.n()).unwrap().delta;
    let mut h = to_complex(gamma.entries());
    let d = 2 * gamma.n();
    for i in 0..d {
        for j in 0..d {
            h[(i, j)] += Complex64::new(0.0, delta[(i, j)]);
        }
    }
    let min = hermitian_eigenvalues(&h)[0];
    PhysicalityReport {
        physical: min >= -tol::PSD_ABS,
        min_eigenvalue: min,
    }
}

/// Eigendecomposition-based symmetric matrix power for SPD input.
fn spd_power(m: &RMat, exponent: f64) -> Result<RMat> {
    let eig = m.clone().symmetric_eigen();
    if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
        return Err(GaussError::InvalidArgument(
            "matrix is not positive definite".into(),
        ));
    }
    let d = DVector::from_iterator(
        eig.eigenvalues.len(),
        eig.eigenvalues.iter().map(|&l| l.powf(exponent)),
    );
    Ok(&eig.eigenvectors * RMat::from_diagonal(&d) * eig.eigenvectors.transpose())
}

/// The n positive symplectic eigenvalues of `gamma`, sorted descending.
pub fn symplectic_eigenvalues(gamma: &CovarianceMatrix) -> Result<Vec<f64>> {
    let n = gamma.n();
    let m = spd_power(gamma.entries(), 0.5)?;
    let delta = symplectic_form(n)?.delta;
    // i * M Delta M is Hermitian with eigenvalues -nu_i, +nu_i.
    let a = &m * &delta * &m;
    let h = a.map(|x| Complex64::new(0.0, x));
    let vals = hermitian_eigenvalues(&h);
    let mut nus: Vec<f64> = vals.into_iter().filter(|&v| v > 0.0).collect();
    if nus.len() != n {
        return Err(GaussError::InvalidArgument(format!(
            "expected {n} positive symplectic eigenvalues, found {}",
            nus.len()
        )));
    }
    nus.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(nus)
}

/// Williamson decomposition of a positive definite CM.
///
/// Builds the Hermitian matrix `i * gamma^{-1/2} Delta gamma^{-1/2}` whose
/// eigenpairs give an orthogonal basis pairing each mode's x and p
/// directions; the symplectic factor is `gamma^{1/2} O diag(nu,nu)^{-1/2}`.
pub fn williamson(gamma: &CovarianceMatrix) -> Result<SymplecticDecomposition> {
    let n = gamma.n();
    let d = 2 * n;
    let m_half = spd_power(gamma.entries(), 0.5)?;
    let m_inv_half = spd_power(gamma.entries(), -0.5)?;
    let delta = symplectic_form(n)?.delta;
    let a = &m_inv_half * &delta * &m_inv_half;
    let h = a.map(|x| Complex64::new(0.0, x));
    let eig = h.symmetric_eigen();

    // Collect eigenpairs with positive eigenvalue lambda = 1/nu.
    let mut pairs: Vec<(f64, Vec<Complex64>)> = Vec::new();
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 0.0 {
            let col: Vec<Complex64> = eig.eigenvectors.column(k).iter().copied().collect();
            pairs.push((1.0 / lam, col));
        }
    }
    if pairs.len() != n {
        return Err(GaussError::InvalidArgument(format!(
            "expected {n} positive eigenvalues in Williamson pairing, found {}",
            pairs.len()
        )));
    }
    // nu descending; fixed phase convention for determinism.
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut o = RMat::zeros(d, d);
    let mut nu = Vec::with_capacity(n);
    for (j, (nu_j, u)) in pairs.iter().enumerate() {
        nu.push(*nu_j);
        // Rotate the global phase so the largest-magnitude entry is real
        // positive; this fixes the (x, y) split of u = x + i y.
        let (kmax, _) = u
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.norm().partial_cmp(&b.1.norm()).unwrap())
            .unwrap();
        let phase = u[kmax].conj() / u[kmax].norm();
        let sqrt2 = std::f64::consts::SQRT_2;
        for i in 0..d {
            let v = u[i] * phase;
            o[(i, j)] = sqrt2 * v.re;
            o[(i, n + j)] = sqrt2 * v.im;
        }
    }

    let mut d_inv_half = RMat::zeros(d, d);
    for j in 0..n {
        let s = nu[j].sqrt();
        d_inv_half[(j, j)] = 1.0 / s;
        d_inv_half[(n + j, n + j)] = 1.0 / s;
    }
    let s = m_half * o * d_inv_half;
    Ok(SymplecticDecomposition { s, nu })
}

impl SymplecticDecomposition {
    /// `diag(nu..., nu...)`.
    pub fn diagonal_cm(&self) -> RMat {
        let n = self.nu.len();
        let mut d = RMat::zeros(2 * n, 2 * n);
        for j in 0..n {
            d[(j, j)] = self.nu[j];
            d[(n + j, n + j)] = self.nu[j];
        }
        d
    }
}

/// Orthogonal symplectic `X (+) X` with `X` the Helmert-style basis that
/// diagonalizes every `H_n(x, y)` block simultaneously. Row 0 is the
/// collective mode `(1, .., 1)/sqrt(n)`.
pub fn symmetric_diagonalizer(n: usize) -> Result<RMat> {
    if n < 2 {
        return Err(GaussError::InvalidArgument(
            "symmetric diagonalizer needs n >= 2".into(),
        ));
    }
    let mut x = RMat::zeros(n, n);
    for j in 0..n {
        x[(0, j)] = 1.0 / (n as f64).sqrt();
    }
    for k in 1..n {
        let norm = ((k * (k + 1)) as f64).sqrt();
        for j in 0..k {
            x[(k, j)] = 1.0 / norm;
        }
        x[(k, k)] = -(k as f64) / norm;
    }
    let mut s = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = x[(i, j)];
            s[(n + i, n + j)] = x[(i, j)];
        }
    }
    Ok(s)
}

fn h_n(n: usize, diag: f64, off: f64) -> RMat {
    RMat::from_fn(n, n, |i, j| if i == j { diag } else { off })
}

impl SymmetricSpec {
    pub fn expand(&self) -> Result<CovarianceMatrix> {
        if self.n < 2 {
            return Err(GaussError::InvalidArgument("symmetric spec needs n >= 2".into()));
        }
        let n = self.n;
        let gx = h_n(n, self.a, self.c1);
        let gp = h_n(n, self.b, -self.c2);
        let mut g = RMat::zeros(2 * n, 2 * n);
        g.view_mut((0, 0), (n, n)).copy_from(&gx);
        g.view_mut((n, n), (n, n)).copy_from(&gp);
        CovarianceMatrix::new(n, g)
    }

    /// Diagonal variances after the symmetric-diagonalizer rotation:
    /// `(a+(n-1)c1, b-(n-1)c2)` for the collective mode and
    /// `(a-c1, b+c2)` for each of the n-1 relative modes.
    pub fn rotated_modes(&self) -> ((f64, f64), (f64, f64)) {
        let m = (self.n - 1) as f64;
        (
            (self.a + m * self.c1, self.b - m * self.c2),
            (self.a - self.c1, self.b + self.c2),
        )
    }

    /// CV-GHZ state in a thermal environment: squeezing `r`, noise `eta`
    /// (`2N+1 = e^{2 eta}`).
    pub fn ghz(n: usize, r: f64, eta: f64) -> Self {
        let nf = n as f64;
        let scale = (2.0 * eta).exp();
        let a = scale / nf * ((2.0 * r).exp() + (nf - 1.0) * (-2.0 * r).exp());
        let c = scale / nf * ((2.0 * r).exp() - (-2.0 * r).exp());
        let b = a + (nf - 2.0) * c;
        Self { n, a, b, c1: c, c2: c }
    }
}

impl TwoModeStandardForm {
    pub fn expand(&self) -> Result<CovarianceMatrix> {
        let mut g = RMat::zeros(4, 4);
        g[(0, 0)] = self.a;
        g[(1, 1)] = self.b;
        g[(2, 2)] = self.a;
        g[(3, 3)] = self.b;
        g[(0, 1)] = self.c1;
        g[(1, 0)] = self.c1;
        g[(2, 3)] = -self.c2;
        g[(3, 2)] = -self.c2;
        CovarianceMatrix::new(2, g)
    }

    /// Squeezed thermal state `S2(r) (tau_{nu1} x tau_{nu2}) S2(r)^dag`.
    pub fn squeezed_thermal(nu1: f64, nu2: f64, r: f64) -> Self {
        let np = 0.5 * (nu1 + nu2);
        let nm = 0.5 * (nu1 - nu2);
        let c = np * (2.0 * r).sinh();
        Self {
            a: np * (2.0 * r).cosh() + nm,
            b: np * (2.0 * r).cosh() - nm,
            c1: c,
            c2: c,
        }
    }
}

/// `L = (1/sqrt(2)) [[-iI, -I], [iI, -I]]`.
pub fn l_matrix(n: usize) -> CMat {
    let mut l = CMat::zeros(2 * n, 2 * n);
    let s = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let i = Complex64::new(0.0, 1.0);
    for k in 0..n {
        l[(k, k)] = -i * s;
        l[(k, n + k)] = -s;
        l[(n + k, k)] = i * s;
        l[(n + k, n + k)] = -s;
    }
    l
}

/// `sigma_1 (x) I`.
pub fn sigma1_kron(n: usize) -> CMat {
    let mut m = CMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(k, n + k)] = Complex64::new(1.0, 0.0);
        m[(n + k, k)] = Complex64::new(1.0, 0.0);
    }
    m
}

/// `sigma_3 (x) I`.
pub fn sigma3_kron(n: usize) -> CMat {
    let mut m = CMat::zeros(2 * n, 2 * n);
    for k in 0..n {
        m[(k, k)] = Complex64::new(1.0, 0.0);
        m[(n + k, n + k)] = Complex64::new(-1.0, 0.0);
    }
    m
}

/// Complex-covariance transform output.
#[derive(Debug, Clone)]
pub struct ComplexBeta {
    pub beta: CMat,
    /// `|det beta|^{1/2} = 2^n det(gamma + I)^{-1/2}`.
    pub normalization: f64,
}

/// `beta = (s3 (x) I) (tilde{gamma}/2 + s1 (x) I/2)^{-1} (s3 (x) I)` with
/// `tilde{gamma} = L gamma L^T`.
pub fn complex_beta(gamma: &CovarianceMatrix) -> Result<ComplexBeta> {
    beta_from_real(gamma.n(), gamma.entries())
}

pub(crate) fn beta_from_real(n: usize, gamma: &RMat) -> Result<ComplexBeta> {
    let l = l_matrix(n);
    let gc = gamma.map(|x| Complex64::new(x, 0.0));
    let tilde = &l * gc * l.transpose();
    let mid = (tilde + sigma1_kron(n)) * Complex64::new(0.5, 0.0);
    let inv = mid
        .try_inverse()
        .ok_or_else(|| GaussError::SingularState("gamma + I is singular".into()))?;
    let s3 = sigma3_kron(n);
    let beta = &s3 * inv * &s3;
    let det = beta.clone().lu().determinant();
    Ok(ComplexBeta {
        normalization: det.norm().sqrt(),
        beta,
    })
}

/// Recovers the real CM from a complex beta matrix:
/// `tilde{gamma} = 2 (s3 (x) I) beta^{-1} (s3 (x) I) - s1 (x) I`, then
/// `gamma = L^dag tilde{gamma} L^*`. Fails if the result has a significant
/// imaginary residue.
pub fn gamma_from_beta(n: usize, beta: &CMat) -> Result<RMat> {
    let inv = beta
        .clone()
        .try_inverse()
        .ok_or_else(|| GaussError::SingularState("beta is singular".into()))?;
    gamma_from_beta_inverse(n, &inv)
}

/// `gamma_from_beta` for a beta given in factored form
/// `beta = D (x) h (x) D - s1` with `D = diag(1/w)`: equivalently
/// `beta^{-1} = diag(w) h^{-1} diag(w)` where `h` is the rescaled kernel.
/// Inverting `h` instead of beta itself stays accurate when the weights
/// `w` are tiny (free states pinned near a pure normal mode).
pub(crate) fn gamma_from_scaled_kernel(n: usize, h: &CMat, w: &[f64]) -> Result<RMat> {
    let hinv = h
        .clone()
        .try_inverse()
        .ok_or_else(|| GaussError::SingularState("kernel is singular".into()))?;
    let mut inv = hinv;
    for i in 0..2 * n {
        for j in 0..2 * n {
            inv[(i, j)] *= Complex64::new(w[i % n] * w[j % n], 0.0);
        }
    }
    gamma_from_beta_inverse(n, &inv)
}

fn gamma_from_beta_inverse(n: usize, inv: &CMat) -> Result<RMat> {
    let s3 = sigma3_kron(n);
    let tilde = &s3 * inv * &s3 * Complex64::new(2.0, 0.0) - sigma1_kron(n);
    let l = l_matrix(n);
    let g = l.adjoint() * tilde * l.conjugate();
    let scale = g.iter().map(|z| z.norm()).fold(1.0, f64::max);
    let imag_max = g.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if imag_max > tol::IMAG_RESIDUE * scale {
        return Err(GaussError::SingularState(format!(
            "reconstructed CM has imaginary residue {imag_max:.3e}"
        )));
    }
    let re = g.map(|z| z.re);
    Ok((&re + re.transpose()) * 0.5)
}

fn sample_normal<R: rand::Rng>(rng: &mut R) -> f64 {
    // Box-Muller; avoids pulling in rand_distr for one distribution.
    let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Haar-ish random orthogonal symplectic matrix (from a random unitary).
pub fn random_orthogonal_symplectic<R: rand::Rng>(n: usize, rng: &mut R) -> RMat {
    let z = CMat::from_fn(n, n, |_, _| {
        Complex64::new(sample_normal(rng), sample_normal(rng))
    });
    let qr = z.qr();
    let q = qr.q();
    let r = qr.r();
    // Fix phases so the distribution is Haar.
    let mut u = q;
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            u[(i, j)] *= ph;
        }
    }
    let mut o = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            o[(i, j)] = u[(i, j)].re;
            o[(i, n + j)] = -u[(i, j)].im;
            o[(n + i, j)] = u[(i, j)].im;
            o[(n + i, n + j)] = u[(i, j)].re;
        }
    }
    o
}

/// Random physical CM built as `S diag(nu, nu) S^T` with random squeezings,
/// rotations and symplectic eigenvalues in `[1, nu_max]`.
pub fn random_physical_cm<R: rand::Rng>(
    n: usize,
    nu_max: f64,
    r_max: f64,
    rng: &mut R,
) -> CovarianceMatrix {
    let o1 = random_orthogonal_symplectic(n, rng);
    let o2 = random_orthogonal_symplectic(n, rng);
    let mut sq = RMat::zeros(2 * n, 2 * n);
    for j in 0..n {
        let r: f64 = rng.gen_range(-r_max..r_max);
        sq[(j, j)] = r.exp();
        sq[(n + j, n + j)] = (-r).exp();
    }
    let s = o1 * sq * o2;
    let mut d = RMat::zeros(2 * n, 2 * n);
    for j in 0..n {
        let nu: f64 = rng.gen_range(1.0..nu_max);
        d[(j, j)] = nu;
        d[(n + j, n + j)] = nu;
    }
    let g = &s * d * s.transpose();
    CovarianceMatrix::new(n, (&g + g.transpose()) * 0.5).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn max_abs(m: &RMat) -> f64 {
        m.iter().map(|x| x.abs()).fold(0.0, f64::max)
    }

    #[test]
    fn symplectic_form_n1() {
        let d = symplectic_form(1).unwrap().delta;
        assert_eq!(d, RMat::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]));
    }

    #[test]
    fn symplectic_form_n2_entries_and_square() {
        let d = symplectic_form(2).unwrap().delta;
        assert_eq!(d[(0, 2)], -1.0);
        assert_eq!(d[(2, 0)], 1.0);
        let sq = &d * &d;
        assert_abs_diff_eq!(sq, -RMat::identity(4, 4), epsilon = 0.0);
    }

    #[test]
    fn symplectic_form_rejects_zero_modes() {
        assert!(symplectic_form(0).is_err());
    }

    #[test]
    fn vacuum_is_physical() {
        let g = CovarianceMatrix::new(1, RMat::identity(2, 2)).unwrap();
        let rep = is_physical(&g);
        assert!(rep.physical);
        assert!(rep.min_eigenvalue.abs() < 1e-12);
    }

    #[test]
    fn pure_squeezed_is_physical() {
        let g = CovarianceMatrix::single_mode((2.0f64).exp(), (-2.0f64).exp(), 0.0).unwrap();
        assert!(is_physical(&g).physical);
    }

    #[test]
    fn sub_vacuum_is_unphysical() {
        let g = CovarianceMatrix::single_mode(0.5, 0.5, 0.0).unwrap();
        let rep = is_physical(&g);
        assert!(!rep.physical);
        assert_abs_diff_eq!(rep.min_eigenvalue, -0.5, epsilon = 1e-12);
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let m = RMat::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(CovarianceMatrix::new(1, m).is_err());
    }

    #[test]
    fn thermal_symplectic_eigenvalue() {
        let g = CovarianceMatrix::single_mode(3.0, 3.0, 0.0).unwrap();
        let nu = symplectic_eigenvalues(&g).unwrap();
        assert_eq!(nu.len(), 1);
        assert_abs_diff_eq!(nu[0], 3.0, epsilon = 1e-10);
    }

    #[test]
    fn squeezing_preserves_symplectic_eigenvalue() {
        let (nu, r) = (2.0f64, 0.7f64);
        let g = CovarianceMatrix::single_mode(nu * (2.0 * r).exp(), nu * (-2.0 * r).exp(), 0.0)
            .unwrap();
        let e = symplectic_eigenvalues(&g).unwrap();
        assert_abs_diff_eq!(e[0], 2.0, epsilon = 1e-10);
    }

    #[test]
    fn squeezed_thermal_two_mode_symplectic_eigenvalues() {
        let g = TwoModeStandardForm::squeezed_thermal(1.5, 2.5, 0.4)
            .expand()
            .unwrap();
        let e = symplectic_eigenvalues(&g).unwrap();
        assert_abs_diff_eq!(e[0], 2.5, epsilon = 1e-9);
        assert_abs_diff_eq!(e[1], 1.5, epsilon = 1e-9);
    }

    #[test]
    fn non_pd_rejected() {
        let g = CovarianceMatrix::single_mode(1.0, -1.0, 0.0).unwrap();
        assert!(symplectic_eigenvalues(&g).is_err());
    }

    #[test]
    fn williamson_single_mode_squeezed_thermal() {
        let (nu, r) = (2.0f64, 0.7f64);
        let g = CovarianceMatrix::single_mode(nu * (2.0 * r).exp(), nu * (-2.0 * r).exp(), 0.0)
            .unwrap();
        let dec = williamson(&g).unwrap();
        assert_abs_diff_eq!(dec.nu[0], nu, epsilon = 1e-10);
        let delta = symplectic_form(1).unwrap().delta;
        assert!(max_abs(&(&dec.s * &delta * dec.s.transpose() - &delta)) < 1e-9);
        assert!(max_abs(&(&dec.s * dec.diagonal_cm() * dec.s.transpose() - g.entries())) < 1e-9);
    }

    #[test]
    fn williamson_already_diagonal() {
        let g = CovarianceMatrix::new(2, RMat::identity(4, 4) * 3.0).unwrap();
        let dec = williamson(&g).unwrap();
        assert_abs_diff_eq!(dec.nu[0], 3.0, epsilon = 1e-10);
        assert_abs_diff_eq!(dec.nu[1], 3.0, epsilon = 1e-10);
        assert!(max_abs(&(&dec.s * dec.diagonal_cm() * dec.s.transpose() - g.entries())) < 1e-9);
    }

    #[test]
    fn williamson_round_trip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 1..=3usize {
            let delta = symplectic_form(n).unwrap().delta;
            for _ in 0..100 {
                let g = random_physical_cm(n, 3.0, 1.0, &mut rng);
                let dec = williamson(&g).unwrap();
                assert!(
                    max_abs(&(&dec.s * &delta * dec.s.transpose() - &delta)) < 1e-9,
                    "symplecticity residual too large, n={n}"
                );
                assert!(
                    max_abs(&(&dec.s * dec.diagonal_cm() * dec.s.transpose() - g.entries()))
                        < 1e-9,
                    "round-trip residual too large, n={n}"
                );
            }
        }
    }

    #[test]
    fn symplectic_eigenvalues_invariant_under_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let g = random_physical_cm(2, 3.0, 1.0, &mut rng);
            let other = random_physical_cm(2, 2.0, 0.8, &mut rng);
            let s = williamson(&other).unwrap().s;
            let conj = CovarianceMatrix::new(2, &s * g.entries() * s.transpose()).unwrap();
            let e0 = symplectic_eigenvalues(&g).unwrap();
            let e1 = symplectic_eigenvalues(&conj).unwrap();
            for (a, b) in e0.iter().zip(&e1) {
                assert_abs_diff_eq!(a, b, epsilon = 1e-8);
            }
        }
    }

    #[test]
    fn symmetric_diagonalizer_n2() {
        let s = symmetric_diagonalizer(2).unwrap();
        let v = 0.5f64.sqrt();
        assert_abs_diff_eq!(s[(0, 0)], v, epsilon = 1e-15);
        assert_abs_diff_eq!(s[(0, 1)], v, epsilon = 1e-15);
        assert_abs_diff_eq!(s[(1, 0)], v, epsilon = 1e-15);
        assert_abs_diff_eq!(s[(1, 1)], -v, epsilon = 1e-15);
    }

    #[test]
    fn symmetric_diagonalizer_is_orthogonal_symplectic_and_diagonalizes() {
        for n in 2..=5usize {
            let s = symmetric_diagonalizer(n).unwrap();
            let eye = RMat::identity(2 * n, 2 * n);
            assert!(max_abs(&(&s * s.transpose() - &eye)) < 1e-12);
            let delta = symplectic_form(n).unwrap().delta;
            assert!(max_abs(&(&s * &delta * s.transpose() - &delta)) < 1e-12);

            let spec = SymmetricSpec { n, a: 1.7, b: 2.1, c1: 0.4, c2: 0.2 };
            let g = spec.expand().unwrap();
            let rotated = &s * g.entries() * s.transpose();
            let m = (n - 1) as f64;
            let mut expect = RMat::zeros(2 * n, 2 * n);
            expect[(0, 0)] = spec.a + m * spec.c1;
            for j in 1..n {
                expect[(j, j)] = spec.a - spec.c1;
            }
            expect[(n, n)] = spec.b - m * spec.c2;
            for j in 1..n {
                expect[(n + j, n + j)] = spec.b + spec.c2;
            }
            assert!(max_abs(&(rotated - expect)) < 1e-10);
        }
    }

    #[test]
    fn symmetric_diagonalizer_identity_block_invariant() {
        let s = symmetric_diagonalizer(3).unwrap();
        let spec = SymmetricSpec { n: 3, a: 1.0, b: 2.0, c1: 0.0, c2: 0.3 };
        let g = spec.expand().unwrap();
        let rotated = &s * g.entries() * s.transpose();
        for i in 0..3 {
            assert_abs_diff_eq!(rotated[(i, i)], 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn standard_form_expansion() {
        let g = TwoModeStandardForm { a: 2.4, b: 2.0, c1: 1.8, c2: 0.5 }
            .expand()
            .unwrap();
        let e = g.entries();
        assert_eq!(e[(0, 1)], 1.8);
        assert_eq!(e[(2, 3)], -0.5);
        assert_eq!(e[(0, 0)], 2.4);
        assert_eq!(e[(1, 1)], 2.0);
        assert_eq!(e[(2, 2)], 2.4);
        assert_eq!(e[(3, 3)], 2.0);
        assert_eq!(e[(0, 2)], 0.0);
    }

    #[test]
    fn ghz_diagonal_parameter() {
        let spec = SymmetricSpec::ghz(3, 0.3, 0.0);
        let expect = ((0.6f64).exp() + 2.0 * (-0.6f64).exp()) / 3.0;
        assert_abs_diff_eq!(spec.a, expect, epsilon = 1e-14);
    }

    #[test]
    fn complex_beta_vacuum_normalization() {
        let g = CovarianceMatrix::new(1, RMat::identity(2, 2)).unwrap();
        let b = complex_beta(&g).unwrap();
        assert_abs_diff_eq!(b.normalization, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn complex_beta_thermal_normalization_matches_ground_occupation() {
        let g = CovarianceMatrix::single_mode(3.0, 3.0, 0.0).unwrap();
        let b = complex_beta(&g).unwrap();
        assert_abs_diff_eq!(b.normalization, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn complex_beta_normalization_identity_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for n in 1..=3usize {
            for _ in 0..20 {
                let g = random_physical_cm(n, 3.0, 1.0, &mut rng);
                let b = complex_beta(&g).unwrap();
                let gp = g.entries() + RMat::identity(2 * n, 2 * n);
                let expect = 2f64.powi(n as i32) / gp.determinant().sqrt();
                assert!(
                    (b.normalization - expect).abs() <= 1e-10 * expect,
                    "normalization identity violated: {} vs {}",
                    b.normalization,
                    expect
                );
            }
        }
    }

    #[test]
    fn beta_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let g = random_physical_cm(2, 3.0, 1.0, &mut rng);
            let b = complex_beta(&g).unwrap();
            let back = gamma_from_beta(2, &b.beta).unwrap();
            assert!(max_abs(&(back - g.entries())) < 1e-8);
        }
    }

    #[test]
    fn cm_file_schema_round_trip_and_validation() {
        let g = TwoModeStandardForm { a: 2.4, b: 2.0, c1: 1.8, c2: 0.5 }
            .expand()
            .unwrap();
        let file = g.to_file_schema();
        let back = CovarianceMatrix::from_file_schema(&file).unwrap();
        assert_eq!(g, back);

        let mut bad = g.to_file_schema();
        bad.matrix.pop();
        assert!(CovarianceMatrix::from_file_schema(&bad).is_err());
        let mut bad2 = g.to_file_schema();
        bad2.ordering = "xpxp".into();
        assert!(CovarianceMatrix::from_file_schema(&bad2).is_err());
    }

    #[test]
    fn random_orthogonal_symplectic_is_both() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for n in 1..=3usize {
            let o = random_orthogonal_symplectic(n, &mut rng);
            let eye = RMat::identity(2 * n, 2 * n);
            assert!(max_abs(&(&o * o.transpose() - &eye)) < 1e-10);
            let delta = symplectic_form(n).unwrap().delta;
            assert!(max_abs(&(&o * &delta * o.transpose() - &delta)) < 1e-10);
        }
    }
}
