//! Truncated-Fock-space oracle: brute-force construction of Gaussian
//! states and witness operators as dense matrices over a cutoff Fock
//! basis. Everything here is deliberately independent of the
//! covariance-level formulas in `bounds`, so the two can check each other.

use num_complex::Complex64;

use crate::criteria::FreeStateParams;
use crate::error::{GaussError, Result};
use crate::symplectic::{
    beta_from_real, complex_beta, sigma1_kron, williamson, CMat, CovarianceMatrix, RMat,
    SymmetricSpec,
};

/// Hard cap on the dense Fock dimension `k_cut^n`.
pub const MAX_FOCK_DIM: usize = 4096;

/// Default per-mode cutoff giving stable eigenvalues at reasonable cost.
pub fn default_cutoff(n: usize) -> usize {
    match n {
        1 => 40,
        2 => 12,
        _ => 4,
    }
}

/// Dense matrix of a multimode operator on the truncated Fock basis,
/// row/column index = multi-index `(k_1..k_n)` flattened row-major.
#[derive(Debug, Clone)]
pub struct FockTensor {
    pub n: usize,
    pub cutoff: usize,
    pub elements: CMat,
}

impl FockTensor {
    pub fn dim(&self) -> usize {
        self.elements.nrows()
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim()).map(|i| self.elements[(i, i)].re).sum()
    }

    pub fn trace_deficit(&self) -> f64 {
        1.0 - self.trace()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        let d = self.dim();
        let mut r = 0.0f64;
        for i in 0..d {
            for j in 0..d {
                r = r.max((self.elements[(i, j)] - self.elements[(j, i)].conj()).norm());
            }
        }
        r
    }
}

/// Normalized product pure state, one coefficient vector per mode.
#[derive(Debug, Clone)]
pub struct ProductPureState {
    pub coeffs: Vec<Vec<Complex64>>,
}

impl ProductPureState {
    pub fn vacuum(n: usize, cutoff: usize) -> Self {
        let mut c = vec![Complex64::new(0.0, 0.0); cutoff];
        c[0] = Complex64::new(1.0, 0.0);
        Self { coeffs: vec![c; n] }
    }

    /// Overlap with the vacuum component, `prod_j |c^{(j)}_0|`.
    pub fn vacuum_overlap(&self) -> f64 {
        self.coeffs.iter().map(|c| c[0].norm()).product()
    }
}

fn check_dims(n: usize, cutoff: usize) -> Result<usize> {
    if cutoff < 1 {
        return Err(GaussError::InvalidArgument("cutoff must be >= 1".into()));
    }
    let mut dim = 1usize;
    for _ in 0..n {
        dim = dim
            .checked_mul(cutoff)
            .filter(|&d| d <= MAX_FOCK_DIM)
            .ok_or_else(|| {
                GaussError::Unsupported(format!(
                    "Fock dimension {cutoff}^{n} exceeds the {MAX_FOCK_DIM} guard"
                ))
            })?;
    }
    Ok(dim)
}

fn ln_factorial(k: usize) -> f64 {
    (2..=k).map(|i| (i as f64).ln()).sum()
}

/// Taylor coefficients of `exp(z^T q z / 2)` over `2n` variables, each
/// truncated below `cutoff`. The result is indexed like a flattened
/// `(2n)`-dimensional degree array, last variable fastest.
fn exp_quadratic_coefficients(n: usize, cutoff: usize, q: &CMat) -> Vec<Complex64> {
    let vars = 2 * n;
    let size = cutoff.pow(vars as u32);
    let mut strides = vec![0usize; vars];
    let mut s = 1;
    for v in (0..vars).rev() {
        strides[v] = s;
        s *= cutoff;
    }
    // Upper-triangle monomials of the quadratic form z^T q z / 2.
    let mut terms: Vec<(usize, usize, Complex64)> = Vec::new();
    for a in 0..vars {
        for b in a..vars {
            let c = if a == b {
                q[(a, a)] * 0.5
            } else {
                (q[(a, b)] + q[(b, a)]) * 0.5
            };
            if c.norm() > 0.0 {
                terms.push((a, b, c));
            }
        }
    }
    let mut sum = vec![Complex64::new(0.0, 0.0); size];
    sum[0] = Complex64::new(1.0, 0.0);
    let mut power = sum.clone();
    let p_max = n * (cutoff - 1);
    for p in 1..=p_max {
        let mut next = vec![Complex64::new(0.0, 0.0); size];
        for idx in 0..size {
            let c0 = power[idx];
            if c0.norm() == 0.0 {
                continue;
            }
            for &(a, b, q_ab) in &terms {
                let da = (idx / strides[a]) % cutoff;
                let db = (idx / strides[b]) % cutoff;
                let room = if a == b { da + 2 < cutoff } else { da + 1 < cutoff && db + 1 < cutoff };
                if room {
                    next[idx + strides[a] + strides[b]] += c0 * q_ab;
                }
            }
        }
        let inv_p = Complex64::new(1.0 / p as f64, 0.0);
        next.iter_mut().for_each(|v| *v *= inv_p);
        for (s, v) in sum.iter_mut().zip(&next) {
            *s += v;
        }
        power = next;
    }
    sum
}

/// Dense Fock tensor of a Gaussian operator from the matrix `m` of its
/// exponential generating function `exp((t,t') m (t,t')^T / 2)` and a
/// scalar prefactor: element `(l, m)` is the Taylor coefficient at
/// `t^l t'^m` times `sqrt(prod l_i! m_i!)`.
fn gaussian_tensor(n: usize, cutoff: usize, m: &CMat, prefactor: f64) -> Result<FockTensor> {
    let dim = check_dims(n, cutoff)?;
    let coeffs = exp_quadratic_coefficients(n, cutoff, m);
    let lf: Vec<f64> = (0..cutoff).map(ln_factorial).collect();
    // Row multi-index (l) maps to the first n variables, column (m) to the
    // last n; both flattened row-major with the same stride pattern.
    let mut half_lf = vec![0.0f64; dim];
    for (row, w) in half_lf.iter_mut().enumerate() {
        let mut rest = row;
        for _ in 0..n {
            *w += 0.5 * lf[rest % cutoff];
            rest /= cutoff;
        }
    }
    let mut elements = CMat::zeros(dim, dim);
    for row in 0..dim {
        for col in 0..dim {
            let scale = (half_lf[row] + half_lf[col]).exp() * prefactor;
            elements[(row, col)] = coeffs[row * dim + col] * scale;
        }
    }
    Ok(FockTensor { n, cutoff, elements })
}

/// Fock matrix of an n-mode Gaussian state with CM `gamma`.
pub fn fock_elements(gamma: &CovarianceMatrix, cutoff: usize) -> Result<FockTensor> {
    let n = gamma.n();
    let cb = complex_beta(gamma)?;
    let m = &cb.beta + sigma1_kron(n);
    gaussian_tensor(n, cutoff, &m, cb.normalization)
}

/// Fock matrix of a single-mode Gaussian state with diagonal CM, computed
/// by the explicit series (independent of `fock_elements`): only `l - m`
/// even contributes, with `l = k + 2j`, `m = k + 2i`.
pub fn fock_elements_single_mode(gamma: &CovarianceMatrix, cutoff: usize) -> Result<FockTensor> {
    if gamma.n() != 1 {
        return Err(GaussError::InvalidArgument(
            "single-mode series needs n = 1".into(),
        ));
    }
    let dim = check_dims(1, cutoff)?;
    let g = gamma.entries();
    if g[(0, 1)].abs() > 1e-12 {
        return Err(GaussError::InvalidArgument(
            "single-mode series needs a diagonal CM".into(),
        ));
    }
    // For gamma_+ = diag(p, q), the complex CM is [[d, s], [s, d]] with
    // d = (q - p)/2, s = (p + q)/2; its half-inverse gives [[B, A], [A, B]].
    let (p, q) = (g[(0, 0)] + 1.0, g[(1, 1)] + 1.0);
    let (d, s) = (0.5 * (q - p), 0.5 * (p + q));
    let det = 0.25 * (d * d - s * s);
    let (b_el, a_el) = (0.5 * d / det, -0.5 * s / det);
    let norm = (a_el * a_el - b_el * b_el).sqrt();
    let lf: Vec<f64> = (0..2 * dim).map(ln_factorial).collect();
    let mut elements = CMat::zeros(dim, dim);
    for l in 0..dim {
        for m in 0..dim {
            if (l + m) % 2 != 0 {
                continue;
            }
            let mut acc = 0.0f64;
            let k0 = l.min(m) % 2;
            for k in (k0..=l.min(m)).step_by(2) {
                let (i, j) = ((m - k) / 2, (l - k) / 2);
                let ln_comb = 0.5 * (lf[m] + lf[l]) - lf[k] - lf[i] - lf[j];
                acc += ln_comb.exp() * (1.0 - a_el).powi(k as i32) * (0.5 * b_el).powi((i + j) as i32);
            }
            elements[(l, m)] = Complex64::new(norm * acc, 0.0);
        }
    }
    Ok(FockTensor { n: 1, cutoff, elements })
}

fn top_eigenvalue(t: &CMat) -> f64 {
    t.clone()
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Largest eigenvalue of `sigma^{-1/2} rho sigma^{-1/2}` at one cutoff:
/// rotate the state into the free state's normal-mode frame, build its
/// Fock tensor, and conjugate elementwise by the thermal weights.
fn conjugated_top_eigenvalue(
    gamma_prime: &RMat,
    u: &[f64],
    cutoff: usize,
) -> Result<f64> {
    let n = u.len();
    let cm = CovarianceMatrix::new(n, gamma_prime.clone())?;
    let rho = fock_elements(&cm, cutoff)?;
    let dim = rho.dim();
    let mut weights = vec![0.0f64; dim];
    for (idx, w) in weights.iter_mut().enumerate() {
        let mut rest = idx;
        let mut ln_w = 0.0;
        for v in (0..n).rev() {
            ln_w -= 0.5 * ((rest % cutoff) as f64) * u[v].ln();
            rest /= cutoff;
        }
        *w = ln_w;
    }
    let pref: f64 = u.iter().map(|ui| 1.0 - ui).product::<f64>().recip();
    let mut t = rho.elements;
    for row in 0..dim {
        for col in 0..dim {
            t[(row, col)] *= Complex64::new(pref * (weights[row] + weights[col]).exp(), 0.0);
        }
    }
    Ok(top_eigenvalue(&t))
}

/// Outcome of the brute-force eigenvalue ladder.
#[derive(Debug, Clone)]
pub enum LambdaVerdict {
    /// Stable top eigenvalue, with the last two cutoffs used.
    Converged { value: f64, cutoffs: (usize, usize) },
    /// Eigenvalue kept growing with the cutoff; the rescaled operator is
    /// unbounded for this free state.
    Divergent { values: Vec<f64> },
}

/// Brute-force check of the largest-eigenvalue formula: top eigenvalue of
/// the conjugated state over an increasing ladder of cutoffs ending at
/// `cutoff`. Growth above 2% between consecutive cutoffs twice in a row is
/// reported as divergence.
pub fn brute_force_lambda(
    gamma: &CovarianceMatrix,
    sigma_params: &FreeStateParams,
    cutoff: usize,
) -> Result<LambdaVerdict> {
    let sigma = sigma_params.expand()?;
    brute_force_lambda_cm(gamma, &sigma, cutoff)
}

pub fn brute_force_lambda_cm(
    gamma: &CovarianceMatrix,
    sigma: &CovarianceMatrix,
    cutoff: usize,
) -> Result<LambdaVerdict> {
    let n = gamma.n();
    if sigma.n() != n {
        return Err(GaussError::InvalidArgument(
            "mode count mismatch between state and free state".into(),
        ));
    }
    let dec = williamson(sigma)?;
    let u: Vec<f64> = dec.nu.iter().map(|nu| (nu - 1.0) / (nu + 1.0)).collect();
    if u.iter().any(|&ui| ui <= 0.0) {
        return Err(GaussError::InvalidArgument(
            "free state has a pure normal mode".into(),
        ));
    }
    let s_inv = dec
        .s
        .try_inverse()
        .ok_or_else(|| GaussError::SingularState("singular symplectic factor".into()))?;
    let gamma_prime = &s_inv * gamma.entries() * s_inv.transpose();

    let step = (cutoff / 6).max(2);
    let mut cutoffs: Vec<usize> = (0..4)
        .map(|i| cutoff.saturating_sub(step * (3 - i)).max(2))
        .collect();
    cutoffs.dedup();
    let mut values = Vec::with_capacity(cutoffs.len());
    for &k in &cutoffs {
        values.push(conjugated_top_eigenvalue(&gamma_prime, &u, k)?);
    }
    let mut growth_streak = 0;
    for w in values.windows(2) {
        if w[1] > w[0] * 1.02 {
            growth_streak += 1;
            if growth_streak >= 2 {
                return Ok(LambdaVerdict::Divergent { values });
            }
        } else {
            growth_streak = 0;
        }
    }
    Ok(LambdaVerdict::Converged {
        value: *values.last().unwrap(),
        cutoffs: (cutoffs[cutoffs.len() - 2], cutoffs[cutoffs.len() - 1]),
    })
}

/// Presqueezing parameter nullifying the diagonal of the witness matrix
/// `sigma_1 (x) I + beta(y)`: the unique positive root of
/// `-y/(a+y) + 1/(cy+1) - (n-1)y/(b+y) + (n-1)/(dy+1) = 0`,
/// where `(a, b)` and `(c, d)` are the collective/relative eigenvalues of
/// the witness CM's x and p blocks. The same `y` maximizes `det beta(y)`.
pub fn presqueeze_nullify(a: f64, b: f64, c: f64, d: f64, n: usize) -> Result<f64> {
    if a <= 0.0 || b <= 0.0 || c <= 0.0 || d <= 0.0 {
        return Err(GaussError::InvalidArgument(
            "block eigenvalues must be positive".into(),
        ));
    }
    let nm1 = (n - 1) as f64;
    let f = |y: f64| {
        -y / (a + y) + 1.0 / (c * y + 1.0) - nm1 * y / (b + y) + nm1 / (d * y + 1.0)
    };
    // f(0) = n > 0 and f -> -n as y -> inf; each term is decreasing, so
    // the root is unique. Expand the bracket, then bisect.
    let mut hi = 1.0;
    while f(hi) > 0.0 {
        hi *= 2.0;
        if hi > 1e12 {
            return Err(GaussError::RootNotFound(
                "no sign change on (0, 1e12] for the presqueeze equation".into(),
            ));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 * hi.max(1.0) {
            break;
        }
    }
    let y = 0.5 * (lo + hi);
    if f(y).abs() > 1e-12 {
        return Err(GaussError::RootNotFound(format!(
            "presqueeze residual {:.3e} at y = {y}",
            f(y)
        )));
    }
    Ok(y)
}

/// Presqueeze parameter for a symmetric witness spec, via the block
/// eigenvalue relabeling `(a + (n-1)c1, a - c1; b - (n-1)c2, b + c2)`.
pub fn presqueeze_for_spec(spec: &SymmetricSpec) -> Result<f64> {
    let m = (spec.n - 1) as f64;
    presqueeze_nullify(
        spec.a + m * spec.c1,
        spec.a - spec.c1,
        spec.b - m * spec.c2,
        spec.b + spec.c2,
        spec.n,
    )
}

/// Complex beta matrix of the presqueezed witness CM
/// `(1/y) gamma_x (+) y gamma_p`.
pub fn presqueezed_witness_beta(spec: &SymmetricSpec, y: f64) -> Result<CMat> {
    let n = spec.n;
    let g = spec.expand()?;
    let mut scaled = g.entries().clone();
    for i in 0..n {
        for j in 0..n {
            scaled[(i, j)] /= y;
            scaled[(n + i, n + j)] *= y;
        }
    }
    Ok(beta_from_real(n, &scaled)?.beta)
}

/// Fock matrix of a presqueezed Gaussian witness from its beta matrix,
/// with prefactor `sqrt(det beta(y))`. Requires the diagonal of
/// `sigma_1 (x) I + beta` to be nullified.
pub fn witness_fock(beta: &CMat, cutoff: usize) -> Result<FockTensor> {
    let vars = beta.nrows();
    if vars % 2 != 0 || beta.ncols() != vars {
        return Err(GaussError::InvalidArgument("beta must be 2n x 2n".into()));
    }
    let n = vars / 2;
    let m = beta + sigma1_kron(n);
    let diag_max = (0..vars).map(|i| m[(i, i)].norm()).fold(0.0, f64::max);
    if diag_max > 1e-10 {
        return Err(GaussError::InvalidArgument(format!(
            "witness diagonal not nullified: max |entry| = {diag_max:.3e}"
        )));
    }
    let det = beta.clone().lu().determinant();
    gaussian_tensor(n, cutoff, &m, det.norm().sqrt())
}

/// Result of the alternating product-state maximization.
#[derive(Debug, Clone)]
pub struct ProductMeanResult {
    pub value: f64,
    pub state: ProductPureState,
    pub converged: bool,
}

/// Maximum of `<psi| omega |psi>` over normalized product pure states, by
/// alternating per-mode eigenvector updates from `starts` fixed random
/// starts plus the vacuum.
pub fn max_product_mean(omega: &FockTensor, starts: usize) -> Result<ProductMeanResult> {
    use rand::{Rng, SeedableRng};
    let (n, cutoff) = (omega.n, omega.cutoff);
    let mut best: Option<ProductMeanResult> = None;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
    for start in 0..=starts {
        let state = if start == 0 {
            ProductPureState::vacuum(n, cutoff)
        } else {
            let coeffs = (0..n)
                .map(|_| {
                    let mut c: Vec<Complex64> = (0..cutoff)
                        .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                        .collect();
                    let norm: f64 = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    c.iter_mut().for_each(|z| *z /= norm);
                    c
                })
                .collect();
            ProductPureState { coeffs }
        };
        let r = alternate_maximize(omega, state)?;
        if best.as_ref().is_none_or(|b| r.value > b.value) {
            best = Some(r);
        }
    }
    Ok(best.unwrap())
}

fn product_vector(state: &ProductPureState, cutoff: usize) -> Vec<Complex64> {
    let n = state.coeffs.len();
    let dim = cutoff.pow(n as u32);
    (0..dim)
        .map(|idx| {
            let mut rest = idx;
            let mut z = Complex64::new(1.0, 0.0);
            for v in (0..n).rev() {
                z *= state.coeffs[v][rest % cutoff];
                rest /= cutoff;
            }
            z
        })
        .collect()
}

fn alternate_maximize(omega: &FockTensor, mut state: ProductPureState) -> Result<ProductMeanResult> {
    let (n, cutoff, dim) = (omega.n, omega.cutoff, omega.dim());
    let mut last = f64::NEG_INFINITY;
    let mut converged = false;
    for _ in 0..500 {
        for j in 0..n {
            // Quadratic form in mode j's coefficients with the others fixed.
            let stride_j = cutoff.pow((n - 1 - j) as u32);
            let row_w: Vec<Complex64> = (0..dim)
                .map(|idx| partial_weight(&state, cutoff, idx, j))
                .collect();
            let mut q = CMat::zeros(cutoff, cutoff);
            for row in 0..dim {
                let a = (row / stride_j) % cutoff;
                for col in 0..dim {
                    let b = (col / stride_j) % cutoff;
                    q[(a, b)] += row_w[row].conj() * omega.elements[(row, col)] * row_w[col];
                }
            }
            let q = (&q + q.adjoint()) * Complex64::new(0.5, 0.0);
            let eig = q.symmetric_eigen();
            let (mut k_max, mut v_max) = (0, f64::NEG_INFINITY);
            for (k, &ev) in eig.eigenvalues.iter().enumerate() {
                if ev > v_max {
                    v_max = ev;
                    k_max = k;
                }
            }
            let col = eig.eigenvectors.column(k_max);
            state.coeffs[j] = col.iter().copied().collect();
        }
        let psi = product_vector(&state, cutoff);
        let mut mean = Complex64::new(0.0, 0.0);
        for row in 0..dim {
            for col in 0..dim {
                mean += psi[row].conj() * omega.elements[(row, col)] * psi[col];
            }
        }
        let value = mean.re;
        if (value - last).abs() < 1e-10 * value.abs().max(1.0) {
            last = value;
            converged = true;
            break;
        }
        last = value;
    }
    Ok(ProductMeanResult { value: last, state, converged })
}

fn partial_weight(state: &ProductPureState, cutoff: usize, idx: usize, skip: usize) -> Complex64 {
    let n = state.coeffs.len();
    let mut rest = idx;
    let mut z = Complex64::new(1.0, 0.0);
    for v in (0..n).rev() {
        let k = rest % cutoff;
        rest /= cutoff;
        if v != skip {
            z *= state.coeffs[v][k];
        }
    }
    z
}

/// Two-mode PPT separability verdict: flip the sign of p2 and test
/// physicality of the result. Physical after the flip means separable.
pub fn ppt_partial_transpose_check(gamma: &CovarianceMatrix) -> Result<bool> {
    if gamma.n() != 2 {
        return Err(GaussError::InvalidArgument(
            "PPT check is defined for two modes".into(),
        ));
    }
    let mut g = gamma.entries().clone();
    for i in 0..4 {
        g[(i, 3)] = -g[(i, 3)];
        g[(3, i)] = -g[(3, i)];
    }
    let flipped = CovarianceMatrix::new(2, g)?;
    Ok(crate::symplectic::is_physical(&flipped).physical)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{lambda_upper_cm, LambdaOutcome};
    use crate::criteria::classical_boundary_expand;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn diag_cm(nu: f64, r: f64) -> CovarianceMatrix {
        CovarianceMatrix::single_mode(nu * (2.0 * r).exp(), nu * (-2.0 * r).exp(), 0.0).unwrap()
    }

    #[test]
    fn thermal_elements_single_mode() {
        let t = fock_elements_single_mode(&diag_cm(3.0, 0.0), 6).unwrap();
        assert_abs_diff_eq!(t.elements[(0, 0)].re, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(t.elements[(1, 1)].re, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(t.elements[(2, 0)].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.elements[(0, 1)].norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn vacuum_elements() {
        let t = fock_elements_single_mode(&diag_cm(1.0, 0.0), 5).unwrap();
        assert_abs_diff_eq!(t.elements[(0, 0)].re, 1.0, epsilon = 1e-12);
        let rest: f64 = t
            .elements
            .iter()
            .map(|z| z.norm())
            .sum::<f64>();
        assert_abs_diff_eq!(rest, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn squeezed_vacuum_cross_implementation() {
        let g = diag_cm(1.0, 0.3);
        let series = fock_elements_single_mode(&g, 12).unwrap();
        let general = fock_elements(&g, 12).unwrap();
        let diff = (&series.elements - &general.elements)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10, "cross-implementation diff {diff}");
    }

    #[test]
    fn general_matches_series_on_random_single_mode() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            use rand::Rng;
            let nu = rng.gen_range(1.0..2.5);
            let r = rng.gen_range(-0.8..0.8);
            let g = diag_cm(nu, r);
            let series = fock_elements_single_mode(&g, 10).unwrap();
            let general = fock_elements(&g, 10).unwrap();
            let diff = (&series.elements - &general.elements)
                .iter()
                .map(|z| z.norm())
                .fold(0.0, f64::max);
            assert!(diff < 1e-9, "diff {diff} at nu={nu}, r={r}");
        }
    }

    #[test]
    fn tmsv_schmidt_diagonal() {
        let r = 0.4f64;
        let f = crate::symplectic::TwoModeStandardForm::squeezed_thermal(1.0, 1.0, r);
        let g = f.expand().unwrap();
        let t = fock_elements(&g, 8).unwrap();
        let th = r.tanh();
        for k in 0..6 {
            let idx = k * 8 + k;
            let expect = (1.0 - th * th) * th.powi(2 * k as i32);
            assert_abs_diff_eq!(t.elements[(idx, idx)].re, expect, epsilon = 1e-10);
        }
        assert!(t.hermiticity_residual() < 1e-10);
    }

    #[test]
    fn thermal_trace_deficit_monotone() {
        let g = diag_cm(1.5, 0.0);
        let mut deficits = Vec::new();
        for cutoff in [4, 8, 12] {
            deficits.push(fock_elements(&g, cutoff).unwrap().trace_deficit());
        }
        assert!(deficits[0] > deficits[1] && deficits[1] > deficits[2]);
        assert!(deficits[2].abs() < 1e-6);
    }

    #[test]
    fn brute_force_matches_lambda_single_mode() {
        let (r, nu) = (0.8f64, 1.2f64);
        let g = diag_cm(nu, r);
        // Boundary free state near the optimal s.
        let s = 0.25 * ((4.0 * r).exp() * nu * nu + nu - 1.0).ln().max(0.1);
        let sigma =
            classical_boundary_expand(1, &[(2.0 * s).exp().powi(2)], &[1.0], &[1.0]).unwrap();
        let formula = match lambda_upper_cm(&g, &sigma).unwrap() {
            LambdaOutcome::Exists(c) => c.lambda,
            other => panic!("unexpected {other:?}"),
        };
        match brute_force_lambda_cm(&g, &sigma, 40).unwrap() {
            LambdaVerdict::Converged { value, .. } => {
                assert_abs_diff_eq!(value, formula, epsilon = 1e-3 * formula);
            }
            LambdaVerdict::Divergent { values } => panic!("divergent: {values:?}"),
        }
    }

    #[test]
    fn brute_force_divergence_on_weak_free_state() {
        let g = diag_cm(1.0, 1.0);
        // Far too little squeezing in the free state: the conjugated
        // operator is unbounded and the eigenvalue grows with the cutoff.
        let sigma = classical_boundary_expand(1, &[(0.2f64).exp()], &[1.0], &[1.0]).unwrap();
        assert!(matches!(
            lambda_upper_cm(&g, &sigma).unwrap(),
            LambdaOutcome::Nonexistent { .. }
        ));
        match brute_force_lambda_cm(&g, &sigma, 40).unwrap() {
            LambdaVerdict::Divergent { values } => {
                assert!(values.last().unwrap() > values.first().unwrap());
            }
            LambdaVerdict::Converged { value, .. } => panic!("converged at {value}"),
        }
    }

    #[test]
    fn brute_force_identity_on_classical_state() {
        let g = CovarianceMatrix::single_mode(3.0, 3.0, 0.0).unwrap();
        match brute_force_lambda_cm(&g, &g, 40).unwrap() {
            LambdaVerdict::Converged { value, .. } => {
                assert_abs_diff_eq!(value, 1.0, epsilon = 1e-6);
            }
            LambdaVerdict::Divergent { values } => panic!("divergent: {values:?}"),
        }
    }

    #[test]
    fn presqueeze_symmetric_and_balanced() {
        let y = presqueeze_nullify(2.0, 2.0, 0.5, 0.5, 3).unwrap();
        assert_abs_diff_eq!(y, 2.0, epsilon = 1e-10);
        let y = presqueeze_nullify(1.0, 1.0, 1.0, 1.0, 4).unwrap();
        assert_abs_diff_eq!(y, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn presqueeze_maximizes_det_beta() {
        let spec = SymmetricSpec { n: 3, a: 1.9, b: 1.4, c1: 0.3, c2: 0.2 };
        let y = presqueeze_for_spec(&spec).unwrap();
        let det_at = |y: f64| {
            presqueezed_witness_beta(&spec, y)
                .unwrap()
                .lu()
                .determinant()
                .norm()
        };
        let d0 = det_at(y);
        assert!(det_at(y - 1e-4) < d0 && det_at(y + 1e-4) < d0);
    }

    #[test]
    fn witness_vacuum_element_and_hermiticity() {
        let spec = SymmetricSpec { n: 3, a: 1.9, b: 1.4, c1: 0.3, c2: 0.2 };
        let y = presqueeze_for_spec(&spec).unwrap();
        let beta = presqueezed_witness_beta(&spec, y).unwrap();
        let w = witness_fock(&beta, 4).unwrap();
        let det = beta.clone().lu().determinant().norm().sqrt();
        assert_abs_diff_eq!(w.elements[(0, 0)].re, det, epsilon = 1e-10 * det);
        assert!(w.hermiticity_residual() < 1e-10);
    }

    #[test]
    fn witness_rejects_unnullified_beta() {
        let spec = SymmetricSpec { n: 3, a: 1.9, b: 1.4, c1: 0.3, c2: 0.2 };
        let beta = presqueezed_witness_beta(&spec, 1.0).unwrap();
        assert!(witness_fock(&beta, 4).is_err());
    }

    #[test]
    fn witness_single_mode_reduces_to_series() {
        // n = 1 witness with a = c: the presqueezed CM is the identity,
        // whose Fock matrix is the vacuum projector.
        let g = CovarianceMatrix::single_mode(2.0, 0.5, 0.0).unwrap();
        let y = presqueeze_nullify(2.0, 2.0, 0.5, 0.5, 1).unwrap();
        assert_abs_diff_eq!(y, 2.0, epsilon = 1e-10);
        let mut scaled = g.entries().clone();
        scaled[(0, 0)] /= y;
        scaled[(1, 1)] *= y;
        let beta = beta_from_real(1, &scaled).unwrap().beta;
        let w = witness_fock(&beta, 6).unwrap();
        let series =
            fock_elements_single_mode(&CovarianceMatrix::new(1, scaled).unwrap(), 6).unwrap();
        let diff = (&w.elements - &series.elements)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        assert!(diff < 1e-10, "diff {diff}");
    }

    #[test]
    fn product_mean_of_vacuum_projector() {
        let dim = 8usize;
        let mut e = CMat::zeros(dim, dim);
        e[(0, 0)] = Complex64::new(1.0, 0.0);
        let t = FockTensor { n: 3, cutoff: 2, elements: e };
        let r = max_product_mean(&t, 4).unwrap();
        assert!(r.converged);
        assert_abs_diff_eq!(r.value, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(r.state.vacuum_overlap(), 1.0, epsilon = 1e-8);
    }

    #[test]
    fn product_mean_below_one_for_entangled_projector() {
        // Projector onto (|00> + |11>)/sqrt(2): the best product overlap
        // is 1/2.
        let dim = 4usize;
        let mut e = CMat::zeros(dim, dim);
        let h = Complex64::new(0.5, 0.0);
        for &i in &[0usize, 3] {
            for &j in &[0usize, 3] {
                e[(i, j)] = h;
            }
        }
        let t = FockTensor { n: 2, cutoff: 2, elements: e };
        let r = max_product_mean(&t, 6).unwrap();
        assert_abs_diff_eq!(r.value, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn symmetric_witness_extremal_at_vacuum() {
        let spec = SymmetricSpec { n: 3, a: 1.9, b: 1.4, c1: 0.3, c2: 0.2 };
        let y = presqueeze_for_spec(&spec).unwrap();
        let beta = presqueezed_witness_beta(&spec, y).unwrap();
        let w = witness_fock(&beta, 4).unwrap();
        let r = max_product_mean(&w, 4).unwrap();
        let m0 = r.value / w.elements[(0, 0)].re;
        assert_abs_diff_eq!(m0, 1.0, epsilon = 1e-6);
        assert!(r.state.vacuum_overlap() > 1.0 - 1e-6);
    }

    #[test]
    fn ppt_check_examples() {
        let tmsv = crate::symplectic::TwoModeStandardForm::squeezed_thermal(1.0, 1.0, 0.5)
            .expand()
            .unwrap();
        assert!(!ppt_partial_transpose_check(&tmsv).unwrap());
        let thermal = crate::symplectic::TwoModeStandardForm { a: 2.0, b: 1.5, c1: 0.0, c2: 0.0 }
            .expand()
            .unwrap();
        assert!(ppt_partial_transpose_check(&thermal).unwrap());
        let boundary = classical_boundary_expand(2, &[1.8, 1.8], &[1.4, 1.4], &[0.9, 0.9]).unwrap();
        assert!(ppt_partial_transpose_check(&boundary).unwrap());
    }
}
