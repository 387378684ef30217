// scratch probe, not for commit
use gauss_robustness::bounds::{lambda_upper_cm, LambdaOutcome};
use gauss_robustness::fock::{brute_force_lambda_cm, LambdaVerdict};
use gauss_robustness::optimizer::{global_minimize, low_discrepancy_starts};
use gauss_robustness::symplectic::CovarianceMatrix;
use gauss_robustness::TwoModeStandardForm;
use nalgebra::DMatrix;

fn block_from_eigs(phi: f64, d1: f64, d2: f64) -> [[f64; 2]; 2] {
    let (c, s) = (phi.cos(), phi.sin());
    [
        [c * c * d1 + s * s * d2, c * s * (d1 - d2)],
        [c * s * (d1 - d2), s * s * d1 + c * c * d2],
    ]
}
fn embed(sx: &[[f64; 2]; 2], sp: &[[f64; 2]; 2]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for i in 0..2 {
        for j in 0..2 {
            m[(i, j)] = sx[i][j];
            m[(2 + i, 2 + j)] = sp[i][j];
        }
    }
    m
}
fn main() {
    let f = TwoModeStandardForm::squeezed_thermal(1.3, 1.1, 0.8);
    let g = f.expand().unwrap();
    let obj = |x: &[f64]| {
        let sx = block_from_eigs(x[0], 1.0 + x[1].exp(), 1.0 + x[2].exp());
        let sp = block_from_eigs(x[3], 1.0 + x[4].exp(), 1.0 + x[5].exp());
        let sig = CovarianceMatrix::new(2, embed(&sx, &sp)).unwrap();
        match lambda_upper_cm(&g, &sig).unwrap() {
            LambdaOutcome::Exists(c) => c.lambda,
            LambdaOutcome::Nonexistent { severity, .. } => 1e4 * (1.0 + severity),
        }
    };
    let half_pi = 0.5 * std::f64::consts::PI;
    let lb = vec![-half_pi, -30.0, -30.0, -half_pi, -30.0, -30.0];
    let ub = vec![half_pi, 25.0, 25.0, half_pi, 25.0, 25.0];
    let mut starts = low_discrepancy_starts(24, &lb, &ub);
    let gx = [[f.a, f.c1], [f.c1, f.b]];
    let gp = [[f.a, -f.c2], [-f.c2, f.b]];
    let ang = |m: &[[f64; 2]; 2]| 0.5 * (2.0 * m[0][1]).atan2(m[0][0] - m[1][1]);
    let me = |m: &[[f64; 2]; 2]| {
        let tr = m[0][0] + m[1][1];
        let dt = m[0][0] * m[1][1] - m[0][1] * m[1][0];
        0.5 * (tr - (tr * tr - 4.0 * dt).max(0.0).sqrt())
    };
    let eig_seed = |m: &[[f64; 2]; 2], shift: f64| {
        let lo = me(m);
        let hi = m[0][0] + m[1][1] - lo;
        (((hi - shift).max(1e-3)).ln(), ((lo - shift).max(1e-3)).ln())
    };
    let (thx, thp) = (ang(&gx), ang(&gp));
    let (pa, pb) = eig_seed(&gp, 1.0);
    let (xa, xb) = eig_seed(&gx, 1.0);
    starts.push(vec![thx, xa, xb, thp, pa, pb]);
    for t in [0.5, 1.0, 2.0, 3.0, 4.0, 6.0, 9.0, 13.0, 18.0, 24.0] {
        starts.push(vec![thx, t, -8.0, thp, pa, pb]);
        starts.push(vec![thx, t, -16.0, thp, pa, pb]);
        starts.push(vec![thx, t, -8.0, thp, t, -8.0]);
        starts.push(vec![thx, t, t, thp, t, t]);
    }
    let res = global_minimize(obj, &lb, &ub, &starts, 8192, 16, 1e-9, 20_000);
    println!("best value {}", res.best_value);
    println!("best point {:?}", res.best_point);
    let x = &res.best_point;
    let sx = block_from_eigs(x[0], 1.0 + x[1].exp(), 1.0 + x[2].exp());
    let sp = block_from_eigs(x[3], 1.0 + x[4].exp(), 1.0 + x[5].exp());
    let sig = CovarianceMatrix::new(2, embed(&sx, &sp)).unwrap();
    println!("sigma {:?}", sig.entries());
    match lambda_upper_cm(&g, &sig).unwrap() {
        LambdaOutcome::Exists(c) => {
            println!("lambda {} nu_second {:?}", c.lambda, c.nu_second);
        }
        LambdaOutcome::Nonexistent { reason, .. } => println!("nonexistent: {reason}"),
    }
    {
        let sxb = block_from_eigs(x[0], 1.0 + x[1].exp(), 1.0 + x[2].exp());
        let spb = block_from_eigs(x[3], 1.0 + x[4].exp(), 1.0 + x[5].exp());
        let s = CovarianceMatrix::new(2, embed(&sxb, &spb)).unwrap();
        println!("s1*beta'' eigs at argmin: {:?}", kernel_eigs(&g, &s));
    }
    // known-feasible: sigma = state + 2I
    {
        let s = CovarianceMatrix::new(2, g.entries() + nalgebra::DMatrix::identity(4, 4) * 2.0).unwrap();
        println!("feasible sigma eigs: {:?}", kernel_eigs(&g, &s));
        match lambda_upper_cm(&g, &s).unwrap() {
            LambdaOutcome::Exists(c) => println!("feasible lambda {}", c.lambda),
            LambdaOutcome::Nonexistent { reason, .. } => println!("feasible?? {reason}"),
        }
    }
    let bogus = vec![0.7300695528105005f64, 1.0, -16.0, -0.7300695528105005, 1.1022978312472678, -6.907755278982137];
    println!("obj at bogus point: {}", obj(&bogus));
    for cutoff in [12, 20, 28, 36, 44] {
        match brute_force_lambda_cm(&g, &sig, cutoff).unwrap() {
            LambdaVerdict::Converged { value, .. } => println!("brute {cutoff}: {value}"),
            LambdaVerdict::Divergent { values } => println!("brute {cutoff}: divergent {values:?}"),
        }
    }
}

// appended: spectral discriminator experiments
#[allow(dead_code)]
fn kernel_eigs(g: &CovarianceMatrix, sig: &CovarianceMatrix) -> Vec<(f64, f64)> {
    use gauss_robustness::symplectic::{complex_beta, sigma1_kron, williamson};
    let n = g.n();
    let dec = williamson(sig).unwrap();
    let u: Vec<f64> = dec.nu.iter().map(|nu| (nu - 1.0) / (nu + 1.0)).collect();
    let s_inv = dec.s.clone().try_inverse().unwrap();
    let gp = &s_inv * g.entries() * s_inv.transpose();
    let bp = complex_beta(&CovarianceMatrix::new(n, gp).unwrap()).unwrap().beta;
    let s1 = sigma1_kron(n);
    let mut m = &bp + &s1;
    for i in 0..2 * n {
        for j in 0..2 * n {
            m[(i, j)] *= nalgebra::Complex::new(1.0 / (u[i % n] * u[j % n]).sqrt(), 0.0);
        }
    }
    let bpp = m - &s1;
    let q = &s1 * &bpp;
    let (_, t) = q.schur().unpack();
    (0..t.nrows()).map(|i| (t[(i, i)].re, t[(i, i)].im)).collect()
}
