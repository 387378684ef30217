//! Classicality and separability predicates, and the boundary
//! parameterizations of the free-state sets consumed by the bound
//! optimizers.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{GaussError, Result};
use crate::symplectic::{
    is_physical, symplectic_form, CovarianceMatrix, RMat, SymmetricSpec,
};
use crate::tol;

/// Parameterization of a state on (or inside) the boundary of a free set.
#[derive(Debug, Clone, PartialEq)]
pub enum FreeStateParams {
    /// Classical-boundary family: diagonal entries per block with
    /// correlations `c_i = kappa_i * sqrt((a_i - 1)(b_i - 1))`. For `n = 1`
    /// the single pair is the (x, p) variance pair of one mode; for
    /// `n = 2` pair 0 is the x block `(a_s1, b_s1)` and pair 1 the p block
    /// `(a_s2, b_s2)` of the standard form, each with its own fraction.
    ClassicalBoundary {
        n: usize,
        a: Vec<f64>,
        b: Vec<f64>,
        kappa: Vec<f64>,
    },
    /// Two-mode separable boundary: x-block diagonal `(a1, b1)` with
    /// correlation `c1`, p-block diagonal `(a2, b2)`; the p correlation is
    /// solved so that the PPT determinant residual vanishes.
    SeparableBoundary {
        a1: f64,
        b1: f64,
        a2: f64,
        b2: f64,
        c1: f64,
    },
}

/// Classicality verdict with the smallest eigenvalue of `gamma - I`.
#[derive(Debug, Clone, Copy)]
pub struct ClassicalityReport {
    pub classical: bool,
    pub margin: f64,
}

/// A Gaussian state is classical iff `gamma - I >= 0`.
pub fn is_classical(gamma: &CovarianceMatrix) -> Result<ClassicalityReport> {
    let rep = is_physical(gamma);
    if !rep.physical {
        return Err(GaussError::InvalidArgument(format!(
            "unphysical CM (min eigenvalue of gamma + i Delta = {:.3e})",
            rep.min_eigenvalue
        )));
    }
    let d = 2 * gamma.n();
    let shifted = gamma.entries() - RMat::identity(d, d);
    let eig = shifted.symmetric_eigen();
    let margin = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(ClassicalityReport {
        classical: margin >= -tol::PSD_ABS,
        margin,
    })
}

fn is_orthogonal_symplectic(n: usize, o: &RMat) -> bool {
    let d = 2 * n;
    if o.nrows() != d || o.ncols() != d {
        return false;
    }
    let eye = RMat::identity(d, d);
    let delta = symplectic_form(n).unwrap().delta;
    let ortho = (o * o.transpose() - &eye).iter().all(|x| x.abs() < 1e-8);
    let symp = (o * &delta * o.transpose() - &delta)
        .iter()
        .all(|x| x.abs() < 1e-8);
    ortho && symp
}

/// Asserts that conjugation by an orthogonal symplectic `O` leaves the
/// classicality verdict unchanged and returns the shared verdict.
pub fn classicality_invariance_check(gamma: &CovarianceMatrix, o: &RMat) -> Result<bool> {
    let n = gamma.n();
    if !is_orthogonal_symplectic(n, o) {
        return Err(GaussError::InvalidArgument(
            "matrix is not orthogonal symplectic".into(),
        ));
    }
    let before = is_classical(gamma)?.classical;
    let rotated = CovarianceMatrix::new(n, o * gamma.entries() * o.transpose())?;
    let after = is_classical(&rotated)?.classical;
    if before != after {
        return Err(GaussError::InvalidArgument(format!(
            "classicality verdict changed under orthogonal symplectic conjugation ({before} -> {after})"
        )));
    }
    Ok(before)
}

/// PPT determinant residual for a two-mode CM: `det(PT(gamma) + i Delta)`
/// where PT flips the sign of `p_2`. Zero on the separability boundary,
/// negative for entangled states, positive strictly inside the separable
/// set.
pub fn two_mode_separable_boundary_residual(gamma: &CovarianceMatrix) -> Result<f64> {
    if gamma.n() != 2 {
        return Err(GaussError::Unsupported(
            "separable boundary residual is defined for two modes".into(),
        ));
    }
    let mut f = RMat::identity(4, 4);
    f[(3, 3)] = -1.0;
    let pt = &f * gamma.entries() * &f;
    let delta = symplectic_form(2)?.delta;
    let m = DMatrix::from_fn(4, 4, |i, j| Complex64::new(pt[(i, j)], delta[(i, j)]));
    let det = m.lu().determinant();
    let scale = f64::max(1.0, det.norm());
    if det.im.abs() > 1e-9 * scale {
        return Err(GaussError::InvalidArgument(format!(
            "PPT determinant has imaginary residue {:.3e}",
            det.im
        )));
    }
    Ok(det.re)
}

/// Fully-separable test for a symmetric free candidate:
/// `(a - c1)(b - (n-1) c2) >= 1`, boundary counted as separable.
pub fn is_fully_separable_symmetric(spec: &SymmetricSpec) -> bool {
    let m = (spec.n - 1) as f64;
    (spec.a - spec.c1) * (spec.b - m * spec.c2) >= 1.0 - tol::PSD_ABS
}

impl FreeStateParams {
    pub fn expand(&self) -> Result<CovarianceMatrix> {
        match self {
            FreeStateParams::ClassicalBoundary { n, a, b, kappa } => {
                classical_boundary_expand(*n, a, b, kappa)
            }
            FreeStateParams::SeparableBoundary { a1, b1, a2, b2, c1 } => {
                separable_boundary_expand(*a1, *b1, *a2, *b2, *c1)
            }
        }
    }
}

/// Expands classical-boundary parameters into a dense CM.
pub fn classical_boundary_expand(
    n: usize,
    a: &[f64],
    b: &[f64],
    kappa: &[f64],
) -> Result<CovarianceMatrix> {
    let pairs = match n {
        1 => 1,
        2 => 2,
        _ => {
            return Err(GaussError::Unsupported(
                "classical boundary expansion supports n in {1, 2}".into(),
            ))
        }
    };
    if a.len() != pairs || b.len() != pairs || kappa.len() != pairs {
        return Err(GaussError::InvalidArgument(format!(
            "expected {pairs} diagonal pairs for n = {n}"
        )));
    }
    for &k in kappa {
        if !(-1.0..=1.0).contains(&k) {
            return Err(GaussError::InvalidArgument(
                "kappa must be in [-1, 1]".into(),
            ));
        }
    }
    for (&ai, &bi) in a.iter().zip(b) {
        if ai < 1.0 || bi < 1.0 {
            return Err(GaussError::InvalidArgument(
                "classical-boundary diagonals must be >= 1".into(),
            ));
        }
    }
    let c: Vec<f64> = a
        .iter()
        .zip(b)
        .zip(kappa)
        .map(|((&ai, &bi), &k)| k * ((ai - 1.0) * (bi - 1.0)).sqrt())
        .collect();
    match n {
        1 => CovarianceMatrix::single_mode(a[0], b[0], c[0]),
        _ => {
            let mut g = RMat::zeros(4, 4);
            g[(0, 0)] = a[0];
            g[(1, 1)] = b[0];
            g[(0, 1)] = c[0];
            g[(1, 0)] = c[0];
            g[(2, 2)] = a[1];
            g[(3, 3)] = b[1];
            g[(2, 3)] = -c[1];
            g[(3, 2)] = -c[1];
            CovarianceMatrix::new(2, g)
        }
    }
}

/// Expands separable-boundary parameters by solving the p-block correlation
/// from the PPT determinant equality. Falls back to an error if no root
/// lies in the admissible bracket.
pub fn separable_boundary_expand(
    a1: f64,
    b1: f64,
    a2: f64,
    b2: f64,
    c1: f64,
) -> Result<CovarianceMatrix> {
    let build = |c2: f64| -> Result<CovarianceMatrix> {
        let mut g = RMat::zeros(4, 4);
        g[(0, 0)] = a1;
        g[(1, 1)] = b1;
        g[(0, 1)] = c1;
        g[(1, 0)] = c1;
        g[(2, 2)] = a2;
        g[(3, 3)] = b2;
        g[(2, 3)] = -c2;
        g[(3, 2)] = -c2;
        CovarianceMatrix::new(2, g)
    };
    let resid = |c2: f64| -> Result<f64> { two_mode_separable_boundary_residual(&build(c2)?) };
    // The residual decreases as correlations grow; bracket from c2 = 0.
    let mut lo = 0.0;
    let f_lo = resid(lo)?;
    if f_lo < 0.0 {
        return Err(GaussError::RootNotFound(
            "state is PPT-violating already at c2 = 0".into(),
        ));
    }
    let c2_max = (a2 * b2).sqrt();
    let mut hi = c2_max;
    let mut f_hi = resid(hi)?;
    if f_hi > 0.0 {
        // Entire range separable; the boundary is not reachable in c2.
        return Err(GaussError::RootNotFound(
            "no separability boundary in the admissible c2 range".into(),
        ));
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let f_mid = resid(mid)?;
        if f_mid >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
        if hi - lo < 1e-14 * (1.0 + hi.abs()) {
            break;
        }
    }
    let _ = f_hi;
    build(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symplectic::{random_physical_cm, symmetric_diagonalizer, TwoModeStandardForm};
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn coherent_state_is_classical_with_zero_margin() {
        let g = CovarianceMatrix::new(1, RMat::identity(2, 2)).unwrap();
        let rep = is_classical(&g).unwrap();
        assert!(rep.classical);
        assert!(rep.margin.abs() < 1e-12);
    }

    #[test]
    fn any_squeezing_is_nonclassical() {
        for r in [1e-4f64, 0.1, 1.0] {
            let g = CovarianceMatrix::single_mode((2.0 * r).exp(), (-2.0 * r).exp(), 0.0)
                .unwrap();
            assert!(!is_classical(&g).unwrap().classical, "r = {r}");
        }
    }

    #[test]
    fn thermal_two_mode_is_classical() {
        let g = CovarianceMatrix::new(2, RMat::identity(4, 4) * 2.0).unwrap();
        assert!(is_classical(&g).unwrap().classical);
    }

    #[test]
    fn unphysical_input_rejected() {
        let g = CovarianceMatrix::single_mode(0.5, 0.5, 0.0).unwrap();
        assert!(is_classical(&g).is_err());
    }

    #[test]
    fn invariance_check_thermal_and_squeezed() {
        let o = symmetric_diagonalizer(2).unwrap();
        let g = CovarianceMatrix::new(2, RMat::identity(4, 4) * 2.0).unwrap();
        assert!(classicality_invariance_check(&g, &o).unwrap());

        let squeezed = TwoModeStandardForm::squeezed_thermal(1.0, 1.0, 0.5)
            .expand()
            .unwrap();
        assert!(!classicality_invariance_check(&squeezed, &o).unwrap());
    }

    #[test]
    fn invariance_check_rejects_non_symplectic() {
        let g = CovarianceMatrix::new(2, RMat::identity(4, 4) * 2.0).unwrap();
        let bad = RMat::identity(4, 4) * 2.0;
        assert!(classicality_invariance_check(&g, &bad).is_err());
    }

    #[test]
    fn invariance_property_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..50 {
            let g = random_physical_cm(2, 2.5, 0.7, &mut rng);
            let o = crate::symplectic::random_orthogonal_symplectic(2, &mut rng);
            classicality_invariance_check(&g, &o).expect("verdicts must match");
        }
    }

    #[test]
    fn residual_sign_convention() {
        let id = CovarianceMatrix::new(2, RMat::identity(4, 4)).unwrap();
        assert!(two_mode_separable_boundary_residual(&id).unwrap().abs() < 1e-9);

        let tmsv = TwoModeStandardForm::squeezed_thermal(1.0, 1.0, 0.6)
            .expand()
            .unwrap();
        assert!(two_mode_separable_boundary_residual(&tmsv).unwrap() < 0.0);

        let thermal = CovarianceMatrix::new(2, RMat::identity(4, 4) * 3.0).unwrap();
        assert!(two_mode_separable_boundary_residual(&thermal).unwrap() > 0.0);
    }

    #[test]
    fn residual_requires_two_modes() {
        let g = CovarianceMatrix::new(1, RMat::identity(2, 2)).unwrap();
        assert!(two_mode_separable_boundary_residual(&g).is_err());
    }

    #[test]
    fn fully_separable_symmetric_examples() {
        assert!(is_fully_separable_symmetric(&SymmetricSpec {
            n: 3, a: 2.0, b: 2.0, c1: 0.5, c2: 0.1
        }));
        assert!(is_fully_separable_symmetric(&SymmetricSpec {
            n: 3, a: 1.0, b: 1.0, c1: 0.0, c2: 0.0
        }));
        assert!(!is_fully_separable_symmetric(&SymmetricSpec {
            n: 4, a: 1.2, b: 1.2, c1: 1.0, c2: 0.3
        }));
    }

    #[test]
    fn classical_boundary_identity() {
        let g = classical_boundary_expand(2, &[1.0, 1.0], &[1.0, 1.0], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(g.entries(), &RMat::identity(4, 4), epsilon = 1e-14);
    }

    #[test]
    fn classical_boundary_correlation_formula() {
        let g = classical_boundary_expand(2, &[2.0, 1.0], &[1.5, 1.0], &[1.0, 1.0]).unwrap();
        assert_abs_diff_eq!(g.entries()[(0, 1)], 0.5f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn classical_boundary_membership_at_kappa_one() {
        for (a, b) in [(1.8, 2.7), (3.0, 1.2), (1.0, 5.0)] {
            let g = classical_boundary_expand(2, &[a, b], &[b, a], &[1.0, 1.0]).unwrap();
            let shifted = g.entries() - RMat::identity(4, 4);
            let min = shifted
                .symmetric_eigen()
                .eigenvalues
                .iter()
                .copied()
                .fold(f64::INFINITY, f64::min);
            assert!(min.abs() < 1e-10, "boundary margin {min}");
            assert!(is_classical(&g).unwrap().classical);
        }
    }

    #[test]
    fn classical_boundary_rejects_sub_vacuum_diagonals() {
        assert!(classical_boundary_expand(1, &[0.9], &[1.5], &[1.0]).is_err());
        assert!(classical_boundary_expand(1, &[1.5], &[1.5], &[1.2]).is_err());
    }

    #[test]
    fn classical_states_are_physical_randomized() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..40 {
            let a: f64 = rng.gen_range(1.0..4.0);
            let b: f64 = rng.gen_range(1.0..4.0);
            let a2: f64 = rng.gen_range(1.0..4.0);
            let b2: f64 = rng.gen_range(1.0..4.0);
            let kx: f64 = rng.gen_range(-1.0..1.0);
            let kp: f64 = rng.gen_range(-1.0..1.0);
            let g = classical_boundary_expand(2, &[a, a2], &[b, b2], &[kx, kp]).unwrap();
            assert!(is_physical(&g).physical);
            assert!(is_classical(&g).unwrap().classical);
        }
    }

    #[test]
    fn separable_boundary_expansion_residual() {
        let g = separable_boundary_expand(2.0, 2.0, 2.0, 2.0, 0.9).unwrap();
        let r = two_mode_separable_boundary_residual(&g).unwrap();
        assert!(r.abs() < 1e-8, "residual {r}");
        assert!(is_physical(&g).physical);
    }

    use rand::Rng;
}
