//! Moment evolution, Gaussian steady states, propagator norms, the linear
//! mixing time, and the transient-amplification experiment.
//!
//! First moments follow Φ̇ = −iGΦ; second moments Q = ⟨ΦΦ†⟩ follow
//! Q̇ = −i(GQ − QG†) + τ3 M τ3. For Hurwitz −iG the unique steady state has
//! m = 0 and Q solving the Sylvester equation GQ − QG† = −i τ3 M τ3.

use ndarray::{Array1, Array2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::{dagger, expm, max_abs, op_norm_2, rk45, solve_gq_minus_qgh};
use crate::nambu::{
    self, is_conjugate_symmetric, mean_from_quadrature, tau3_mul_left, tau3_mul_right, DynamicalMatrix,
    ModeVector,
};
use crate::spectral::rapidities;
use crate::{C64, CMatrix, CVector, QblError, Result};

/// First and second moments of a Gaussian state: m = ⟨Φ⟩ and Q = ⟨ΦΦ†⟩.
#[derive(Debug, Clone)]
pub struct GaussianState {
    pub mean: CVector,
    pub covariance: CMatrix,
}

impl GaussianState {
    /// Validate Hermiticity of Q, the canonical-commutation constraint
    /// Q − τ1 Qᵀ τ1 = τ3, positive semidefiniteness, and the conjugate
    /// structure of the mean. Tolerances scale with ‖Q‖ so that highly
    /// occupied states near instability remain checkable.
    pub fn new(mean: CVector, covariance: CMatrix) -> Result<Self> {
        let state = Self { mean, covariance };
        state.check(1e-9)?;
        Ok(state)
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn check(&self, tol: f64) -> Result<()> {
        let q = &self.covariance;
        let n = self.mean.len();
        if q.nrows() != n || q.ncols() != n {
            return Err(QblError::Structure("mean/covariance dimensions differ".into()));
        }
        let scale = max_abs(q).max(1.0);
        if max_abs(&(q - &dagger(q))) > tol * scale {
            return Err(QblError::Structure("Q is not Hermitian".into()));
        }
        let qt = q.t().to_owned();
        let comm = q - &nambu::tau1_mul_left(&nambu::tau1_mul_right(&qt));
        let tau3 = nambu::block_pauli(3, n / 2)?.matrix;
        if max_abs(&(&comm - &tau3)) > tol.max(1e-8) * scale {
            return Err(QblError::Structure(format!(
                "canonical commutation violated by {:.3e}",
                max_abs(&(&comm - &tau3))
            )));
        }
        let (evals, _) = crate::linalg::eigh_herm(q)?;
        let min = evals.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -1e-9 * scale {
            return Err(QblError::Structure(format!("Q has negative eigenvalue {min:.3e}")));
        }
        if !is_conjugate_symmetric(&self.mean, 1e-8) {
            return Err(QblError::Structure("mean lacks the conjugate structure m = τ1 m*".into()));
        }
        Ok(())
    }
}

/// τ3 M τ3, the Gaussian noise term of the covariance flow.
fn noise_term(m: &CMatrix) -> CMatrix {
    tau3_mul_left(&tau3_mul_right(m))
}

/// Solve for the unique Gaussian steady state of a Hurwitz chain: m = 0 and
/// −i(G Q − Q G†) + τ3 M τ3 = 0, via Schur-based Sylvester solve with
/// residual polish.
pub fn steady_state(g: &DynamicalMatrix, m: &CMatrix) -> Result<GaussianState> {
    Ok(steady_state_report(g, m)?.0)
}

/// Steady-state solve plus diagnostics (max-norm residual of the Sylvester
/// equation and a crude condition estimate ‖Q‖₂·‖G‖₂/‖C‖₂ that grows as the
/// spectral gap closes).
pub fn steady_state_report(g: &DynamicalMatrix, m: &CMatrix) -> Result<(GaussianState, SteadyStateReport)> {
    let spec = rapidities(g)?;
    if !spec.hurwitz {
        return Err(QblError::Numerical(format!(
            "no unique steady state: max Re rapidity = {:.3e}",
            spec.max_re()
        )));
    }
    // G Q − Q G† = −i τ3 M τ3
    let c = noise_term(m).mapv(|z| z * C64::new(0.0, -1.0));
    let q = solve_gq_minus_qgh(g.matrix(), &c)?;
    // Symmetrize: the exact solution is Hermitian.
    let q = (&q + &dagger(&q)).mapv(|z| z * C64::new(0.5, 0.0));

    let resid = {
        let gq = g.matrix().dot(&q);
        let qgh = q.dot(&dagger(g.matrix()));
        let r = (&gq - &qgh).mapv(|z| z * C64::new(0.0, -1.0)) + noise_term(m);
        max_abs(&r)
    };
    let scale = max_abs(&q).max(1.0);
    if resid > 1e-10 * scale {
        return Err(QblError::Numerical(format!(
            "steady-state residual {resid:.3e} exceeds tolerance at scale {scale:.3e}"
        )));
    }
    let condition = op_norm_2(&q) * op_norm_2(g.matrix()) / op_norm_2(&c).max(1e-300);
    let mean = Array1::zeros(g.matrix().nrows());
    let state = GaussianState::new(mean, q)?;
    Ok((state, SteadyStateReport { residual: resid, condition }))
}

#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct SteadyStateReport {
    pub residual: f64,
    pub condition: f64,
}

/// Propagators e^{−iGt} on a uniform time grid, built once by
/// scaling-and-squaring and advanced by repeated multiplication. The grid
/// spacing is internally subdivided so that each applied factor has modest
/// norm (‖G‖·dt ≤ 1), keeping state-vector roundoff proportional to the
/// state itself.
pub struct PropagatorGrid {
    times: Vec<f64>,
    step: CMatrix,
    substep: CMatrix,
    subs: usize,
}

impl PropagatorGrid {
    /// `times` must be uniform starting at 0.
    pub fn new(g: &DynamicalMatrix, times: &[f64]) -> Result<Self> {
        if times.len() < 2 || times[0] != 0.0 {
            return Err(QblError::InvalidParameter("need a uniform grid starting at 0".into()));
        }
        let dt = times[1] - times[0];
        if dt <= 0.0 {
            return Err(QblError::InvalidParameter("time grid must increase".into()));
        }
        for w in times.windows(2) {
            if ((w[1] - w[0]) - dt).abs() > 1e-9 * dt {
                return Err(QblError::InvalidParameter("time grid must be uniform".into()));
            }
        }
        let gnorm = op_norm_2(g.matrix());
        let subs = (dt * gnorm).ceil().max(1.0) as usize;
        let substep = expm(&g.matrix().mapv(|z| z * C64::new(0.0, -dt / subs as f64)));
        let mut step = substep.clone();
        for _ in 1..subs {
            step = substep.dot(&step);
        }
        Ok(Self { times: times.to_vec(), step, substep, subs })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn step(&self) -> &CMatrix {
        &self.step
    }

    /// Visit e^{−iGt_k} for every grid point in order. The matrix powers
    /// carry the full transient scale; use [`PropagatorGrid::for_each_state`]
    /// when applying to bounded initial data.
    pub fn for_each<F: FnMut(usize, &CMatrix)>(&self, mut f: F) {
        let n = self.step.nrows();
        let mut p = Array2::from_diag_elem(n, C64::new(1.0, 0.0));
        f(0, &p);
        for k in 1..self.times.len() {
            for _ in 0..self.subs {
                p = self.substep.dot(&p);
            }
            f(k, &p);
        }
    }

    /// Step the columns of `m0` through the grid, visiting the state at each
    /// time. Each applied factor has modest norm, so roundoff stays
    /// proportional to the evolving state rather than to the peak propagator
    /// norm.
    pub fn for_each_state<F: FnMut(usize, &CMatrix)>(&self, m0: &CMatrix, mut f: F) {
        let mut state = m0.clone();
        f(0, &state);
        for k in 1..self.times.len() {
            for _ in 0..self.subs {
                state = self.substep.dot(&state);
            }
            f(k, &state);
        }
    }

    /// d_lin(t) = ‖e^{−iGt}‖₂ on the grid.
    pub fn norms(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.times.len()];
        self.for_each(|k, p| out[k] = op_norm_2(p));
        out
    }
}

/// ‖e^{−iGt}‖₂ on a uniform time grid.
pub fn propagator_norms(g: &DynamicalMatrix, times: &[f64]) -> Result<Vec<f64>> {
    Ok(PropagatorGrid::new(g, times)?.norms())
}

/// Mean trajectory m(t) = e^{−iGt} m0 at the requested times (any strictly
/// increasing grid starting at 0; uniform grids reuse a single exponential).
///
/// The flow maps the conjugate-symmetric subspace m = τ1 m* to itself, so
/// each output is projected back onto it; this strips the roundoff
/// component that large non-normal transients would otherwise leave in the
/// unphysical half of the space.
pub fn propagate_mean(g: &DynamicalMatrix, m0: &CVector, times: &[f64]) -> Result<Vec<CVector>> {
    if !is_conjugate_symmetric(m0, 1e-8) {
        return Err(QblError::Structure("initial mean lacks conjugate structure".into()));
    }
    if times.is_empty() || times[0] != 0.0 {
        return Err(QblError::InvalidParameter("time grid must start at 0".into()));
    }
    let project = |m: CVector| -> CVector {
        let w = nambu::tau1_mul_vec(&m.mapv(|z| z.conj()));
        m.iter()
            .zip(w.iter())
            .map(|(a, b)| (a + b) * C64::new(0.5, 0.0))
            .collect()
    };
    let uniform = times.len() >= 2 && {
        let dt = times[1] - times[0];
        dt > 0.0 && times.windows(2).all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt)
    };
    let mut out = Vec::with_capacity(times.len());
    if uniform {
        let grid = PropagatorGrid::new(g, times)?;
        let col = m0.clone().insert_axis(ndarray::Axis(1));
        grid.for_each_state(&col, |_, s| out.push(project(s.column(0).to_owned())));
    } else {
        for &t in times {
            if t == 0.0 {
                out.push(m0.clone());
                continue;
            }
            let grid = PropagatorGrid::new(g, &[0.0, t])?;
            let col = m0.clone().insert_axis(ndarray::Axis(1));
            let mut last = None;
            grid.for_each_state(&col, |k, s| {
                if k == 1 {
                    last = Some(s.column(0).to_owned());
                }
            });
            out.push(project(last.unwrap()));
        }
    }
    Ok(out)
}

/// Covariance trajectory. For Hurwitz G uses the closed form
/// Q(t) = e^{−iGt}(Q0 − Q_ss)e^{iG†t} + Q_ss; otherwise integrates the flow
/// with the adaptive stepper.
pub fn evolve_covariance(
    g: &DynamicalMatrix,
    m_bath: &CMatrix,
    q0: &CMatrix,
    times: &[f64],
) -> Result<Vec<CMatrix>> {
    if rapidities(g)?.hurwitz {
        let qss = steady_state(g, m_bath)?.covariance;
        let uniform_ok = times.len() >= 2 && times[0] == 0.0;
        if uniform_ok {
            if let Ok(grid) = PropagatorGrid::new(g, times) {
                let mut out = Vec::with_capacity(times.len());
                let dq = q0 - &qss;
                grid.for_each(|_, p| {
                    let ph = dagger(p);
                    out.push(p.dot(&dq).dot(&ph) + &qss);
                });
                return Ok(out);
            }
        }
        let mut out = Vec::with_capacity(times.len());
        let dq = q0 - &qss;
        for &t in times {
            let p = expm(&g.matrix().mapv(|z| z * C64::new(0.0, -t)));
            out.push(p.dot(&dq).dot(&dagger(&p)) + &qss);
        }
        Ok(out)
    } else {
        evolve_covariance_integrated(g, m_bath, q0, times)
    }
}

/// Covariance trajectory by direct adaptive integration of
/// Q̇ = −i(GQ − QG†) + τ3 M τ3 (works for non-Hurwitz chains over short
/// horizons).
pub fn evolve_covariance_integrated(
    g: &DynamicalMatrix,
    m_bath: &CMatrix,
    q0: &CMatrix,
    times: &[f64],
) -> Result<Vec<CMatrix>> {
    let noise = noise_term(m_bath);
    let gm = g.matrix().clone();
    let gh = dagger(&gm);
    let rhs = move |q: &CMatrix| -> CMatrix {
        let gq = gm.dot(q);
        let qgh = q.dot(&gh);
        (&gq - &qgh).mapv(|z| z * C64::new(0.0, -1.0)) + &noise
    };
    rk45(q0, rhs, times)
}

/// d_lin curve with the linear mixing time t_lin(δ): the first grid time
/// after the global peak at which d_lin < δ with no later re-crossing.
#[derive(Debug, Clone)]
pub struct MixingReport {
    pub delta: f64,
    pub times: Vec<f64>,
    pub d_lin: Vec<f64>,
    pub t_lin: f64,
    pub peak_time: f64,
    pub peak_value: f64,
}

/// Sample d_lin(t) = ‖e^{−iGt}‖₂ on a uniform grid and locate t_lin(δ).
pub fn linear_mixing_time(g: &DynamicalMatrix, delta: f64, horizon: f64, n_steps: usize) -> Result<MixingReport> {
    if !(0.0 < delta && delta < 1.0) {
        return Err(QblError::InvalidParameter("delta must lie in (0, 1)".into()));
    }
    let times = crate::linalg::time_grid(horizon, n_steps.max(8));
    let d_lin = propagator_norms(g, &times)?;
    let (peak_idx, peak_value) = d_lin
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
    // last grid point still at or above δ; the crossing right after it is
    // final by construction
    let last_ge = d_lin.iter().rposition(|&v| v >= delta);
    let t_lin = match last_ge {
        Some(i) if i + 1 < times.len() => times[i + 1],
        _ => {
            return Err(QblError::Numerical(format!(
                "horizon too short: d_lin ends at {:.3e}, still above delta = {delta}",
                d_lin.last().unwrap()
            )));
        }
    };
    Ok(MixingReport {
        delta,
        times,
        d_lin,
        t_lin,
        peak_time: 0.0f64.max(peak_idx as f64 * (horizon / n_steps.max(8) as f64)),
        peak_value,
    })
}

/// Peak statistics of ⟨observable⟩(t) over randomly sampled unit initial
/// means.
#[derive(Debug, Clone)]
pub struct PeakStatistics {
    pub n_modes: usize,
    pub n_samples: usize,
    pub mean_peak_time: f64,
    pub std_peak_time: f64,
    pub mean_peak_value: f64,
    pub times: Vec<f64>,
    /// Mean of |⟨observable⟩(t)| over the samples.
    pub mean_abs_curve: Vec<f64>,
}

/// Evolve `n_samples` initial means drawn uniformly from the unit sphere of
/// real quadrature coefficient vectors (so ‖m0‖ = 1 with the conjugate
/// structure), record ⟨observable⟩(t), and collect the peak statistics of
/// |⟨observable⟩|. One propagator step is built once and shared by all
/// samples.
pub fn amplification_experiment(
    g: &DynamicalMatrix,
    observable: &ModeVector,
    n_samples: usize,
    times: &[f64],
    seed: u64,
) -> Result<PeakStatistics> {
    if n_samples == 0 {
        return Err(QblError::InvalidParameter("need at least one sample".into()));
    }
    let dim = g.matrix().nrows();
    if observable.coefficients().len() != dim {
        return Err(QblError::InvalidParameter("observable dimension mismatch".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    // initial means as columns
    let mut m0 = Array2::zeros((dim, n_samples));
    for s in 0..n_samples {
        let mut u: CVector = Array1::zeros(dim);
        loop {
            let mut norm2 = 0.0;
            for z in u.iter_mut() {
                let x: f64 = rng.sample(rand_distr::StandardNormal);
                *z = C64::new(x, 0.0);
                norm2 += x * x;
            }
            if norm2 > 1e-12 {
                let norm = norm2.sqrt();
                u.mapv_inplace(|z| z / norm);
                break;
            }
        }
        let m = mean_from_quadrature(&u);
        m0.column_mut(s).assign(&m);
    }

    // row vector v†τ3 applied to the evolving mean columns
    let obs_row: CVector = observable
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            c.conj() * C64::new(sign, 0.0)
        })
        .collect();

    let grid = PropagatorGrid::new(g, times)?;
    let mut peak_value = vec![f64::NEG_INFINITY; n_samples];
    let mut peak_time = vec![0.0; n_samples];
    let mut mean_abs_curve = vec![0.0; times.len()];
    grid.for_each_state(&m0, |k, current| {
        for s in 0..n_samples {
            let val: C64 = obs_row
                .iter()
                .zip(current.column(s).iter())
                .map(|(a, b)| a * b)
                .sum();
            let v = val.norm();
            mean_abs_curve[k] += v / n_samples as f64;
            if v > peak_value[s] {
                peak_value[s] = v;
                peak_time[s] = times[k];
            }
        }
    });

    let n = n_samples as f64;
    let mean_peak_time = peak_time.iter().sum::<f64>() / n;
    let var = peak_time.iter().map(|t| (t - mean_peak_time).powi(2)).sum::<f64>() / n;
    let mean_peak_value = peak_value.iter().sum::<f64>() / n;
    Ok(PeakStatistics {
        n_modes: dim / 2,
        n_samples,
        mean_peak_time,
        std_peak_time: var.sqrt(),
        mean_peak_value,
        times: times.to_vec(),
        mean_abs_curve,
    })
}
