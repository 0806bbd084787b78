//! Internal dense linear-algebra helpers: operator norms, matrix
//! exponentials, a Schur-based Sylvester solver, an adaptive RK45 stepper,
//! and least-squares fits.

use ndarray::Array2;
use ndarray_linalg::{Eig, SVD};

use crate::{C64, CMatrix, CVector, QblError, Result};

/// Conjugate transpose.
pub(crate) fn dagger(a: &CMatrix) -> CMatrix {
    a.t().mapv(|z| z.conj())
}

/// Largest absolute entry.
pub(crate) fn max_abs(a: &CMatrix) -> f64 {
    a.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Identity matrix of size n.
pub(crate) fn eye(n: usize) -> CMatrix {
    Array2::from_diag_elem(n, C64::new(1.0, 0.0))
}

/// Spectral norm (largest singular value).
pub fn op_norm_2(a: &CMatrix) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    let (_, s, _) = a.svd(false, false).expect("svd failed");
    s[0]
}

/// Smallest singular value.
pub fn sigma_min(a: &CMatrix) -> f64 {
    let (_, s, _) = a.svd(false, false).expect("svd failed");
    s[s.len() - 1]
}

/// Eigendecomposition of a Hermitian matrix with eigenvectors in columns,
/// eigenvalues ascending. The raw `eigh` of ndarray-linalg 0.18 hands back
/// eigenvectors of the transposed buffer on row-major input; conjugating the
/// returned matrix restores A = W diag(λ) W†.
pub(crate) fn eigh_herm(a: &CMatrix) -> Result<(Array1<f64>, CMatrix)> {
    use ndarray_linalg::{Eigh, UPLO};
    let (vals, vecs) = a.eigh(UPLO::Lower)?;
    Ok((vals, vecs.mapv(|z| z.conj())))
}

use ndarray::Array1;

/// The `count` smallest singular values with their right singular vectors,
/// ordered ascending.
pub(crate) fn smallest_singular_pairs(a: &CMatrix, count: usize) -> Result<Vec<(f64, CVector)>> {
    let (_, s, vh) = a.svd(false, true)?;
    let vh = vh.ok_or_else(|| QblError::Linalg("svd returned no right vectors".into()))?;
    let n = s.len();
    let take = count.min(n);
    let mut out = Vec::with_capacity(take);
    for i in 0..take {
        let row = n - 1 - i; // singular values are descending
        let v = vh.row(row).mapv(|z| z.conj());
        out.push((s[row], v));
    }
    Ok(out)
}

/// 1-norm (max column sum), used for the exponential scaling parameter.
fn norm_1(a: &CMatrix) -> f64 {
    let mut best = 0.0f64;
    for col in a.columns() {
        let sum: f64 = col.iter().map(|z| z.norm()).sum();
        best = best.max(sum);
    }
    best
}

/// Matrix exponential by scaling-and-squaring with a Padé(13) approximant
/// (Higham 2005).
pub(crate) fn expm(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 1 {
        let mut r = Array2::zeros((1, 1));
        r[[0, 0]] = a[[0, 0]].exp();
        return r;
    }

    const THETA_13: f64 = 5.371_920_351_148_152;
    let norm = norm_1(a);
    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil() as u32
    } else {
        0
    };
    let scale = C64::new((0.5f64).powi(s as i32), 0.0);
    let a1 = a.mapv(|z| z * scale);

    const B: [f64; 14] = [
        64_764_752_532_480_000.0,
        32_382_376_266_240_000.0,
        7_771_770_303_897_600.0,
        1_187_353_796_428_800.0,
        129_060_195_264_000.0,
        10_559_470_521_600.0,
        670_442_572_800.0,
        33_522_128_640.0,
        1_323_241_920.0,
        40_840_800.0,
        960_960.0,
        16_380.0,
        182.0,
        1.0,
    ];
    let c = |k: usize| C64::new(B[k], 0.0);

    let id = eye(n);
    let a2 = a1.dot(&a1);
    let a4 = a2.dot(&a2);
    let a6 = a2.dot(&a4);

    let w1 = &a6 * c(13) + &a4 * c(11) + &a2 * c(9);
    let w2 = a6.dot(&w1) + &a6 * c(7) + &a4 * c(5) + &a2 * c(3) + &id * c(1);
    let u = a1.dot(&w2);

    let z1 = &a6 * c(12) + &a4 * c(10) + &a2 * c(8);
    let v = a6.dot(&z1) + &a6 * c(6) + &a4 * c(4) + &a2 * c(2) + &id * c(0);

    let p = &v + &u;
    let q = &v - &u;
    // Solve q * r = p column by column.
    let mut r = solve_multi(&q, &p).expect("Padé denominator is singular");
    for _ in 0..s {
        r = r.dot(&r);
    }
    r
}

/// Solve A X = B for a square A and matrix B with one LU factorization
/// (raw zgesv; ndarray-linalg 0.18's LU path burns stack on matrices past
/// ~100×100).
pub(crate) fn solve_multi(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let n = a.nrows();
    if a.ncols() != n || b.nrows() != n {
        return Err(QblError::InvalidParameter("solve_multi dimension mismatch".into()));
    }
    let nrhs = b.ncols();
    let mut af = to_col_major(a);
    let mut bf = to_col_major(b);
    let mut ipiv = vec![0i32; n];
    let mut info = 0i32;
    unsafe {
        lapack::zgesv(n as i32, nrhs as i32, &mut af, n as i32, &mut ipiv, &mut bf, n as i32, &mut info);
    }
    if info != 0 {
        return Err(QblError::Linalg(format!("zgesv failed (info = {info})")));
    }
    Ok(from_col_major(&bf, n, nrhs))
}

/// Solve A x = b for a single right-hand side.
pub(crate) fn solve_vec(a: &CMatrix, b: &CVector) -> Result<CVector> {
    let col = b.clone().insert_axis(ndarray::Axis(1));
    let x = solve_multi(a, &col)?;
    Ok(x.column(0).to_owned())
}

/// Matrix inverse via zgesv against the identity.
pub(crate) fn inverse(a: &CMatrix) -> Result<CMatrix> {
    solve_multi(a, &eye(a.nrows()))
}

fn to_col_major(a: &CMatrix) -> Vec<lapack::c64> {
    let n = a.nrows();
    let m = a.ncols();
    let mut v = Vec::with_capacity(n * m);
    for j in 0..m {
        for i in 0..n {
            v.push(a[[i, j]]);
        }
    }
    v
}

fn from_col_major(v: &[lapack::c64], n: usize, m: usize) -> CMatrix {
    let mut a = Array2::zeros((n, m));
    for j in 0..m {
        for i in 0..n {
            a[[i, j]] = v[j * n + i];
        }
    }
    a
}

/// Complex Schur factorization A = Z T Z† (T upper triangular).
pub(crate) fn schur(a: &CMatrix) -> Result<(CMatrix, CMatrix)> {
    let n = a.nrows() as i32;
    if n == 0 {
        return Err(QblError::InvalidParameter("schur of empty matrix".into()));
    }
    let mut af = to_col_major(a);
    let mut sdim = 0i32;
    let mut w = vec![C64::new(0.0, 0.0); n as usize];
    let mut vs = vec![C64::new(0.0, 0.0); (n * n) as usize];
    let mut rwork = vec![0.0f64; n as usize];
    let mut bwork = vec![0i32; n as usize];
    let mut info = 0i32;

    // Workspace query, then the real call.
    let mut query = [C64::new(0.0, 0.0)];
    unsafe {
        lapack::zgees(
            b'V', b'N', None, n, &mut af, n, &mut sdim, &mut w, &mut vs, n, &mut query, -1,
            &mut rwork, &mut bwork, &mut info,
        );
    }
    if info != 0 {
        return Err(QblError::Linalg(format!("zgees workspace query failed (info = {info})")));
    }
    let lwork = query[0].re as i32;
    let mut work = vec![C64::new(0.0, 0.0); lwork.max(1) as usize];
    unsafe {
        lapack::zgees(
            b'V', b'N', None, n, &mut af, n, &mut sdim, &mut w, &mut vs, n, &mut work, lwork,
            &mut rwork, &mut bwork, &mut info,
        );
    }
    if info != 0 {
        return Err(QblError::Linalg(format!("zgees failed (info = {info})")));
    }
    let t = from_col_major(&af, n as usize, n as usize);
    let z = from_col_major(&vs, n as usize, n as usize);
    Ok((t, z))
}

/// Solve the Sylvester-like equation `G Q − Q G† = C` by Bartels–Stewart:
/// Schur-factorize G once, solve the triangular problem with `ztrsyl`, and
/// polish with residual-based iterative refinement.
pub(crate) fn solve_gq_minus_qgh(g: &CMatrix, c: &CMatrix) -> Result<CMatrix> {
    let n = g.nrows();
    let (t, z) = schur(g)?;
    let zh = dagger(&z);

    let tri_solve = |rhs: &CMatrix| -> Result<CMatrix> {
        let ni = n as i32;
        let af = to_col_major(&t);
        let bf = af.clone();
        let mut cf = to_col_major(rhs);
        let mut scale = [1.0f64];
        let mut info = 0i32;
        let isgn = [-1i32];
        unsafe {
            lapack::ztrsyl(b'N', b'C', &isgn, ni, ni, &af, ni, &bf, ni, &mut cf, ni, &mut scale, &mut info);
        }
        if info < 0 {
            return Err(QblError::Linalg(format!("ztrsyl failed (info = {info})")));
        }
        let y = from_col_major(&cf, n, n);
        Ok(y.mapv(|v| v / scale[0]))
    };

    let solve_once = |rhs: &CMatrix| -> Result<CMatrix> {
        let ct = zh.dot(rhs).dot(&z);
        let y = tri_solve(&ct)?;
        Ok(z.dot(&y).dot(&zh))
    };

    let gh = dagger(g);
    let mut q = solve_once(c)?;
    for _ in 0..3 {
        let resid = c - &(g.dot(&q) - q.dot(&gh));
        let scale = max_abs(c).max(max_abs(&q)).max(1.0);
        if max_abs(&resid) < 1e-14 * scale {
            break;
        }
        let dq = solve_once(&resid)?;
        q = q + dq;
    }
    Ok(q)
}

/// Eigenvalues only.
pub(crate) fn eigenvalues(a: &CMatrix) -> Result<CVector> {
    let (vals, _) = a.eig()?;
    Ok(vals)
}

const RK_ATOL: f64 = 1e-12;
const RK_RTOL: f64 = 1e-10;

/// Adaptive Dormand–Prince 5(4) integration of an autonomous matrix ODE
/// `Y' = f(Y)`, returning the state at each requested time. Times must start
/// at 0 and be strictly increasing.
pub(crate) fn rk45<F>(y0: &CMatrix, rhs: F, times: &[f64]) -> Result<Vec<CMatrix>>
where
    F: Fn(&CMatrix) -> CMatrix,
{
    // Dormand–Prince coefficients.
    const A21: f64 = 1.0 / 5.0;
    const A31: f64 = 3.0 / 40.0;
    const A32: f64 = 9.0 / 40.0;
    const A41: f64 = 44.0 / 45.0;
    const A42: f64 = -56.0 / 15.0;
    const A43: f64 = 32.0 / 9.0;
    const A51: f64 = 19372.0 / 6561.0;
    const A52: f64 = -25360.0 / 2187.0;
    const A53: f64 = 64448.0 / 6561.0;
    const A54: f64 = -212.0 / 729.0;
    const A61: f64 = 9017.0 / 3168.0;
    const A62: f64 = -355.0 / 33.0;
    const A63: f64 = 46732.0 / 5247.0;
    const A64: f64 = 49.0 / 176.0;
    const A65: f64 = -5103.0 / 18656.0;
    const B1: f64 = 35.0 / 384.0;
    const B3: f64 = 500.0 / 1113.0;
    const B4: f64 = 125.0 / 192.0;
    const B5: f64 = -2187.0 / 6784.0;
    const B6: f64 = 11.0 / 84.0;
    // Embedded 4th-order weights.
    const E1: f64 = 5179.0 / 57600.0;
    const E3: f64 = 7571.0 / 16695.0;
    const E4: f64 = 393.0 / 640.0;
    const E5: f64 = -92097.0 / 339200.0;
    const E6: f64 = 187.0 / 2100.0;
    const E7: f64 = 1.0 / 40.0;

    if times.is_empty() || times[0] != 0.0 {
        return Err(QblError::InvalidParameter("time grid must start at 0".into()));
    }
    let c = |x: f64| C64::new(x, 0.0);

    let mut out = Vec::with_capacity(times.len());
    out.push(y0.clone());
    let mut y = y0.clone();
    let mut t = 0.0f64;
    let mut h = (times[times.len() - 1] / 200.0).max(1e-6);
    let mut k1 = rhs(&y);

    for &target in &times[1..] {
        while t < target {
            let h_step = h.min(target - t);
            let y2 = &y + &(&k1 * c(h_step * A21));
            let k2 = rhs(&y2);
            let y3 = &y + &(&k1 * c(h_step * A31)) + &(&k2 * c(h_step * A32));
            let k3 = rhs(&y3);
            let y4 = &y + &(&k1 * c(h_step * A41)) + &(&k2 * c(h_step * A42)) + &(&k3 * c(h_step * A43));
            let k4 = rhs(&y4);
            let y5 = &y
                + &(&k1 * c(h_step * A51))
                + &(&k2 * c(h_step * A52))
                + &(&k3 * c(h_step * A53))
                + &(&k4 * c(h_step * A54));
            let k5 = rhs(&y5);
            let y6 = &y
                + &(&k1 * c(h_step * A61))
                + &(&k2 * c(h_step * A62))
                + &(&k3 * c(h_step * A63))
                + &(&k4 * c(h_step * A64))
                + &(&k5 * c(h_step * A65));
            let k6 = rhs(&y6);
            let y_new = &y
                + &(&k1 * c(h_step * B1))
                + &(&k3 * c(h_step * B3))
                + &(&k4 * c(h_step * B4))
                + &(&k5 * c(h_step * B5))
                + &(&k6 * c(h_step * B6));
            let k7 = rhs(&y_new);
            let y_low = &y
                + &(&k1 * c(h_step * E1))
                + &(&k3 * c(h_step * E3))
                + &(&k4 * c(h_step * E4))
                + &(&k5 * c(h_step * E5))
                + &(&k6 * c(h_step * E6))
                + &(&k7 * c(h_step * E7));

            let scale_ref = max_abs(&y).max(max_abs(&y_new));
            let err = max_abs(&(&y_new - &y_low)) / (RK_ATOL + RK_RTOL * scale_ref);

            if err <= 1.0 {
                t += h_step;
                y = y_new;
                k1 = k7; // FSAL
                let grow = if err == 0.0 { 5.0 } else { 0.9 * err.powf(-0.2) };
                h = (h_step * grow.clamp(0.2, 5.0)).max(1e-12);
            } else {
                h = (h_step * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0)).max(1e-12);
                if h < 1e-11 * target.max(1.0) {
                    return Err(QblError::Numerical(format!(
                        "step-size underflow at t = {t:.6e}"
                    )));
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

/// Least-squares line fit with coefficient of determination.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Fit `y = slope · x + intercept` by ordinary least squares.
pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    assert!(n >= 2.0, "need at least two points");
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|xi| (xi - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(xi, yi)| (xi - mx) * (yi - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(xi, yi)| (yi - slope * xi - intercept).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|yi| (yi - my).powi(2)).sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    LinearFit { slope, intercept, r2 }
}

/// Uniform time grid `0..=t_max` with `n_steps` intervals.
pub(crate) fn time_grid(t_max: f64, n_steps: usize) -> Vec<f64> {
    let dt = t_max / n_steps as f64;
    (0..=n_steps).map(|i| i as f64 * dt).collect()
}
