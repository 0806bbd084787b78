//! Two-time correlators, susceptibility, steady-state power spectra, and
//! the zero-frequency edge-mode signature scan.
//!
//! The steady-state correlator of two linear forms is
//! C_{α,β}(∞, τ) = α† τ3 e^{−iGτ} Q_ss τ3 β; its one-sided Fourier
//! transform is evaluated analytically through the resolvent,
//! S_{α,β}(ω) = α† τ3 χ_N(ω) Q_ss τ3 β with χ_N(ω) = i(ω·1 − G)^{−1}, so no
//! time-domain quadrature enters. Normalizing by C_{α,β}(∞, 0) gives S̃.

use crate::dynamics::steady_state;
use crate::linalg::{expm, linear_fit, op_norm_2, sigma_min};
use crate::models::{self, Boundary, ModelSpec};
use crate::nambu::{tau3_mul_vec, DynamicalMatrix, ModeVector};
use crate::{C64, CMatrix, CVector, QblError, Result};

/// Resolvent condition numbers above this are treated as singular.
pub const CONDITION_LIMIT: f64 = 1e14;

/// χ_N(ω) = i(ω·1 − G)^{−1} with its condition number σ_max/σ_min.
#[derive(Debug, Clone)]
pub struct Susceptibility {
    pub omega: f64,
    pub matrix: CMatrix,
    pub condition: f64,
}

fn omega_shift(g: &DynamicalMatrix, omega: f64) -> CMatrix {
    let mut a = g.matrix().mapv(|z| -z);
    for i in 0..a.nrows() {
        a[[i, i]] += C64::new(omega, 0.0);
    }
    a
}

/// Susceptibility matrix at a real frequency.
pub fn susceptibility(g: &DynamicalMatrix, omega: f64) -> Result<Susceptibility> {
    let a = omega_shift(g, omega);
    let smin = sigma_min(&a);
    let smax = op_norm_2(&a);
    let condition = smax / smin.max(1e-300);
    if condition > CONDITION_LIMIT {
        return Err(QblError::Numerical(format!(
            "resolvent near-singular at omega = {omega}: condition {condition:.3e}"
        )));
    }
    let inv = crate::linalg::inverse(&a)?;
    Ok(Susceptibility { omega, matrix: inv.mapv(|z| z * C64::i()), condition })
}

/// ‖χ_N(ω)‖₂ = 1/σ_min(ω·1 − G), without forming the inverse.
pub fn susceptibility_norm(g: &DynamicalMatrix, omega: f64) -> f64 {
    1.0 / sigma_min(&omega_shift(g, omega)).max(1e-300)
}

/// Steady-state two-time correlator C_{α,β}(t, τ) = α† τ3 e^{−iGτ} Q τ3 β
/// for a state with second moments `q`.
pub fn two_time_correlator(
    alpha: &ModeVector,
    beta: &ModeVector,
    q: &CMatrix,
    g: &DynamicalMatrix,
    tau: f64,
) -> C64 {
    let prop = expm(&g.matrix().mapv(|z| z * C64::new(0.0, -tau)));
    let right = prop.dot(&q.dot(&tau3_mul_vec(beta.coefficients())));
    alpha
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            a.conj() * C64::new(sign, 0.0) * right[i]
        })
        .sum()
}

/// Power spectrum S_{α,β}(ω) on a frequency grid, with its normalized
/// version S̃ = S / C_{α,β}(∞, 0).
#[derive(Debug, Clone)]
pub struct PowerSpectrum {
    pub omega: Vec<f64>,
    pub values: Vec<C64>,
    pub normalized: Vec<C64>,
    pub normalization: C64,
}

/// Evaluate S through the resolvent at each frequency: one linear solve per
/// ω against the fixed right-hand side Q_ss τ3 β.
pub fn power_spectrum(
    alpha: &ModeVector,
    beta: &ModeVector,
    spec: &ModelSpec,
    omegas: &[f64],
) -> Result<PowerSpectrum> {
    if spec.bc != Boundary::Obc {
        return Err(QblError::InvalidParameter("power spectrum requires the OBC steady state".into()));
    }
    let g = models::dynamical_matrix(spec)?;
    let bath = models::build_bath(spec)?;
    let qss = steady_state(&g, &bath)?.covariance;
    power_spectrum_in(alpha, beta, &g, &qss, omegas)
}

/// Power spectrum from explicit G and steady-state covariance.
pub fn power_spectrum_in(
    alpha: &ModeVector,
    beta: &ModeVector,
    g: &DynamicalMatrix,
    qss: &CMatrix,
    omegas: &[f64],
) -> Result<PowerSpectrum> {
    let rhs = qss.dot(&tau3_mul_vec(beta.coefficients()));
    let alpha_row: CVector = alpha
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            a.conj() * C64::new(sign, 0.0)
        })
        .collect();

    let normalization: C64 = alpha_row.iter().zip(rhs.iter()).map(|(a, b)| a * b).sum();
    let scale = op_norm_2(qss) * alpha.norm() * beta.norm();
    if normalization.norm() < 1e-14 * scale.max(1e-300) {
        return Err(QblError::Numerical(
            "vanishing normalization C_{alpha,beta}(inf, 0); normalized spectrum undefined".into(),
        ));
    }

    let mut values = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let a = omega_shift(g, w);
        let y = crate::linalg::solve_vec(&a, &rhs)?;
        let s: C64 = alpha_row.iter().zip(y.iter()).map(|(a, b)| a * b).sum();
        values.push(s * C64::i());
    }
    let normalized = values.iter().map(|v| v / normalization).collect();
    Ok(PowerSpectrum { omega: omegas.to_vec(), values, normalized, normalization })
}

/// Default frequency grid: 401 points over [−2‖G‖₂, 2‖G‖₂] merged with an
/// 81-point refinement window around ω = 0 that resolves the narrow
/// zero-frequency peak.
pub fn default_omega_grid(g: &DynamicalMatrix) -> Vec<f64> {
    let w = 2.0 * op_norm_2(g.matrix());
    let mut out: Vec<f64> = (0..401).map(|i| -w + 2.0 * w * i as f64 / 400.0).collect();
    let fine = w / 20.0;
    out.extend((0..81).map(|i| -fine + 2.0 * fine * i as f64 / 80.0));
    out.sort_by(|a, b| a.partial_cmp(b).unwrap());
    out.dedup_by(|a, b| (*a - *b).abs() < 1e-12 * w.max(1.0));
    out
}

/// Observable families for scans parametrized by chain length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableRule {
    /// x̂ on the last site.
    XLast,
    /// x̂ on the first site.
    XFirst,
    /// p̂ on the last site.
    PLast,
    /// p̂ on the first site.
    PFirst,
}

impl ObservableRule {
    pub fn resolve(&self, n: usize) -> ModeVector {
        match self {
            ObservableRule::XLast => ModeVector::x_form(n, n),
            ObservableRule::XFirst => ModeVector::x_form(1, n),
            ObservableRule::PLast => ModeVector::p_form(n, n),
            ObservableRule::PFirst => ModeVector::p_form(1, n),
        }
    }
}

/// |S̃(0)| against chain length, with a log-log fit of the growth law.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ZeroFrequencyScan {
    pub n: Vec<usize>,
    pub s0_abs: Vec<f64>,
    pub loglog_slope: f64,
    pub loglog_r2: f64,
}

/// Scan |S̃_{α,α}(0)| over chain lengths for the observable family.
pub fn zero_frequency_scan(
    base: &ModelSpec,
    n_list: &[usize],
    rule: ObservableRule,
) -> Result<ZeroFrequencyScan> {
    if n_list.len() < 2 {
        return Err(QblError::InvalidParameter("need at least two sizes".into()));
    }
    let mut s0 = Vec::with_capacity(n_list.len());
    for &n in n_list {
        let spec = base.with_n(n).with_bc(Boundary::Obc);
        let obs = rule.resolve(n);
        let ps = power_spectrum(&obs, &obs, &spec, &[0.0])?;
        s0.push(ps.normalized[0].norm());
    }
    let xs: Vec<f64> = n_list.iter().map(|&n| (n as f64).ln()).collect();
    let ys: Vec<f64> = s0.iter().map(|v| v.max(1e-300).ln()).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(ZeroFrequencyScan { n: n_list.to_vec(), s0_abs: s0, loglog_slope: fit.slope, loglog_r2: fit.r2 })
}
