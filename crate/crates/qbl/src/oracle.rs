//! Brute-force truncated-Fock-space Lindblad integrator for chains of up to
//! three modes: the independent ground truth for the moment equations,
//! steady states, commutator conventions, Weyl displacements, and
//! regression-theorem correlators.
//!
//! Everything here works directly with dense density matrices on the
//! truncated Fock space, with no input from the Gaussian machinery, so an
//! agreement between the two paths certifies every sign convention in the
//! crate.

use ndarray::{Array1, Array2};

use crate::linalg::{dagger, expm, rk45};
use crate::models::{self, ModelSpec};
use crate::nambu::ModeVector;
use crate::{C64, CMatrix, CVector, QblError, Result};

/// Truncation: per-mode photon cutoff `n_max`, Fock dimension
/// (n_max+1)^n_modes capped at 4096.
#[derive(Debug, Clone, Copy)]
pub struct FockConfig {
    pub n_modes: usize,
    pub n_max: usize,
}

impl FockConfig {
    pub fn new(n_modes: usize, n_max: usize) -> Result<Self> {
        let cfg = Self { n_modes, n_max };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn dim(&self) -> usize {
        (self.n_max + 1).pow(self.n_modes as u32)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.n_modes) {
            return Err(QblError::InvalidParameter("oracle supports 1 to 3 modes".into()));
        }
        if self.n_max < 2 {
            return Err(QblError::InvalidParameter("n_max must be at least 2".into()));
        }
        if self.dim() > 4096 {
            return Err(QblError::InvalidParameter(format!(
                "Fock dimension {} exceeds the 4096 cap",
                self.dim()
            )));
        }
        Ok(())
    }
}

/// Accepted runs must keep the population of the cutoff shell below this.
pub const LEAKAGE_TOL: f64 = 1e-6;

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = Array2::zeros((ar * br, ac * bc));
    for i in 0..ar {
        for j in 0..ac {
            let aij = a[[i, j]];
            if aij.norm_sqr() == 0.0 {
                continue;
            }
            for k in 0..br {
                for l in 0..bc {
                    out[[i * br + k, j * bc + l]] = aij * b[[k, l]];
                }
            }
        }
    }
    out
}

fn single_mode_annihilation(n_max: usize) -> CMatrix {
    let d = n_max + 1;
    let mut a = Array2::zeros((d, d));
    for n in 1..d {
        a[[n - 1, n]] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

/// A QBL realized on the truncated Fock space.
pub struct FockModel {
    cfg: FockConfig,
    /// Annihilation operator of each mode.
    ann: Vec<CMatrix>,
    h_op: CMatrix,
    lindblads: Vec<CMatrix>,
    /// Σ_k L_k† L_k, cached for the dissipator.
    gossip: CMatrix,
}

impl FockModel {
    /// Realize a model spec (N ≤ 3) on the truncated space.
    pub fn new(spec: &ModelSpec, cfg: FockConfig) -> Result<Self> {
        if spec.n != cfg.n_modes {
            return Err(QblError::InvalidParameter("spec and Fock configuration disagree on N".into()));
        }
        let h = models::build_hamiltonian(spec)?;
        let vectors = models::lindblad_vectors(spec)?;
        Self::from_parts(&h, &vectors, cfg)
    }

    /// Realize an arbitrary quadratic Hamiltonian matrix (2N×2N, Nambu
    /// ordering) plus linear Lindblad coefficient vectors.
    pub fn from_parts(h: &CMatrix, lindblad_vectors: &[CVector], cfg: FockConfig) -> Result<Self> {
        cfg.validate()?;
        let n = cfg.n_modes;
        if h.nrows() != 2 * n {
            return Err(QblError::InvalidParameter("Hamiltonian dimension mismatch".into()));
        }
        let d = cfg.dim();
        let a1 = single_mode_annihilation(cfg.n_max);
        let id1 = Array2::from_diag_elem(cfg.n_max + 1, C64::new(1.0, 0.0));
        let mut ann = Vec::with_capacity(n);
        for mode in 0..n {
            let mut op: Option<CMatrix> = None;
            for slot in 0..n {
                let factor = if slot == mode { &a1 } else { &id1 };
                op = Some(match op {
                    None => factor.clone(),
                    Some(acc) => kron(&acc, factor),
                });
            }
            ann.push(op.unwrap());
        }

        // Φ_I operators in the flat Nambu order.
        let nambu_op = |flat: usize| -> CMatrix {
            let site = flat / 2;
            if flat % 2 == 0 {
                ann[site].clone()
            } else {
                dagger(&ann[site])
            }
        };

        // H = ½ Φ† H Φ (the scalar ordering constant does not affect
        // commutators).
        let mut h_op: CMatrix = Array2::zeros((d, d));
        for i in 0..2 * n {
            for j in 0..2 * n {
                let coeff = h[[i, j]] * C64::new(0.5, 0.0);
                if coeff.norm_sqr() == 0.0 {
                    continue;
                }
                let term = dagger(&nambu_op(i)).dot(&nambu_op(j));
                h_op = h_op + term.mapv(|z| z * coeff);
            }
        }

        let mut lindblads = Vec::with_capacity(lindblad_vectors.len());
        for l in lindblad_vectors {
            if l.len() != 2 * n {
                return Err(QblError::InvalidParameter("Lindblad vector dimension mismatch".into()));
            }
            let mut op: CMatrix = Array2::zeros((d, d));
            for (i, c) in l.iter().enumerate() {
                if c.norm_sqr() == 0.0 {
                    continue;
                }
                op = op + nambu_op(i).mapv(|z| z * *c);
            }
            lindblads.push(op);
        }
        let mut gossip: CMatrix = Array2::zeros((d, d));
        for l in &lindblads {
            gossip = gossip + dagger(l).dot(l);
        }
        Ok(Self { cfg, ann, h_op, lindblads, gossip })
    }

    pub fn config(&self) -> FockConfig {
        self.cfg
    }

    pub fn dim(&self) -> usize {
        self.cfg.dim()
    }

    /// Φ_I as a Fock operator.
    pub fn nambu_operator(&self, flat: usize) -> CMatrix {
        let site = flat / 2;
        if flat % 2 == 0 {
            self.ann[site].clone()
        } else {
            dagger(&self.ann[site])
        }
    }

    /// The linear form v̂ = v† τ3 Φ as a Fock operator.
    pub fn linear_form_operator(&self, v: &ModeVector) -> CMatrix {
        let d = self.dim();
        let mut op: CMatrix = Array2::zeros((d, d));
        for (i, c) in v.coefficients().iter().enumerate() {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let coeff = c.conj() * C64::new(sign, 0.0);
            if coeff.norm_sqr() == 0.0 {
                continue;
            }
            op = op + self.nambu_operator(i).mapv(|z| z * coeff);
        }
        op
    }

    /// Schrödinger-picture generator: ρ̇ = −i[H, ρ] + Σ (LρL† − ½{L†L, ρ}).
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let hr = self.h_op.dot(rho);
        let rh = rho.dot(&self.h_op);
        let mut out = (&hr - &rh).mapv(|z| z * C64::new(0.0, -1.0));
        for l in &self.lindblads {
            let lr = l.dot(rho);
            out = out + lr.dot(&dagger(l));
        }
        let sr = self.gossip.dot(rho);
        let rs = rho.dot(&self.gossip);
        out - (&sr + &rs).mapv(|z| z * C64::new(0.5, 0.0))
    }

    /// Heisenberg-picture generator: L*(A) = i[H, A] + Σ (L†AL − ½{L†L, A}).
    pub fn apply_adjoint(&self, a: &CMatrix) -> CMatrix {
        let ha = self.h_op.dot(a);
        let ah = a.dot(&self.h_op);
        let mut out = (&ha - &ah).mapv(|z| z * C64::new(0.0, 1.0));
        for l in &self.lindblads {
            out = out + dagger(l).dot(&a.dot(l));
        }
        let sa = self.gossip.dot(a);
        let as_ = a.dot(&self.gossip);
        out - (&sa + &as_).mapv(|z| z * C64::new(0.5, 0.0))
    }

    /// Dense superoperator matrix acting on column-stacked ρ. Only for
    /// dim ≤ 64 (the matrix has dim² rows).
    pub fn superoperator(&self) -> Result<CMatrix> {
        let d = self.dim();
        if d > 64 {
            return Err(QblError::InvalidParameter(format!(
                "dense superoperator limited to dim <= 64, got {d}"
            )));
        }
        let d2 = d * d;
        let mut sup = Array2::zeros((d2, d2));
        let mut basis: CMatrix = Array2::zeros((d, d));
        for col in 0..d2 {
            let (j, i) = (col / d, col % d);
            basis[[i, j]] = C64::new(1.0, 0.0);
            let image = self.apply(&basis);
            basis[[i, j]] = C64::new(0.0, 0.0);
            for jj in 0..d {
                for ii in 0..d {
                    sup[[jj * d + ii, col]] = image[[ii, jj]];
                }
            }
        }
        Ok(sup)
    }

    /// First moments m_I = tr(Φ_I ρ) and second moments Q_IJ = tr(Φ_I Φ_J† ρ).
    pub fn moments(&self, rho: &CMatrix) -> (CVector, CMatrix) {
        let n2 = 2 * self.cfg.n_modes;
        let ops: Vec<CMatrix> = (0..n2).map(|i| self.nambu_operator(i)).collect();
        let mut m: CVector = Array1::zeros(n2);
        for i in 0..n2 {
            m[i] = trace_of_product(&ops[i], rho);
        }
        let mut q: CMatrix = Array2::zeros((n2, n2));
        for i in 0..n2 {
            for j in 0..n2 {
                let op = ops[i].dot(&dagger(&ops[j]));
                q[[i, j]] = trace_of_product(&op, rho);
            }
        }
        (m, q)
    }

    /// Population of the cutoff shell: total weight of basis states with any
    /// mode at n_max.
    pub fn leakage(&self, rho: &CMatrix) -> f64 {
        let d = self.dim();
        let base = self.cfg.n_max + 1;
        let mut leak = 0.0;
        for idx in 0..d {
            let mut rest = idx;
            let mut on_edge = false;
            for _ in 0..self.cfg.n_modes {
                if rest % base == self.cfg.n_max {
                    on_edge = true;
                    break;
                }
                rest /= base;
            }
            if on_edge {
                leak += rho[[idx, idx]].re;
            }
        }
        leak
    }

    /// Vacuum density matrix.
    pub fn vacuum(&self) -> CMatrix {
        let d = self.dim();
        let mut rho = Array2::zeros((d, d));
        rho[[0, 0]] = C64::new(1.0, 0.0);
        rho
    }

    /// Product-of-coherent-states density matrix |α⟩⟨α| via displacement of
    /// the vacuum.
    pub fn coherent(&self, alphas: &[C64]) -> Result<CMatrix> {
        if alphas.len() != self.cfg.n_modes {
            return Err(QblError::InvalidParameter("one amplitude per mode required".into()));
        }
        let d = self.dim();
        let mut disp: CMatrix = Array2::zeros((d, d));
        for (mode, &alpha) in alphas.iter().enumerate() {
            let ad = dagger(&self.ann[mode]);
            disp = disp + ad.mapv(|z| z * alpha) - self.ann[mode].mapv(|z| z * alpha.conj());
        }
        let u = expm(&disp);
        let rho = u.dot(&self.vacuum()).dot(&dagger(&u));
        Ok(rho)
    }

    /// Fock product state |n_1, …⟩⟨…| with the given occupations.
    pub fn number_state(&self, occupations: &[usize]) -> Result<CMatrix> {
        if occupations.len() != self.cfg.n_modes {
            return Err(QblError::InvalidParameter("one occupation per mode required".into()));
        }
        let base = self.cfg.n_max + 1;
        let mut idx = 0;
        // kron ordering: the first mode varies slowest
        for &occ in occupations {
            if occ > self.cfg.n_max {
                return Err(QblError::InvalidParameter("occupation exceeds cutoff".into()));
            }
            idx = idx * base + occ;
        }
        let d = self.dim();
        let mut rho = Array2::zeros((d, d));
        rho[[idx, idx]] = C64::new(1.0, 0.0);
        Ok(rho)
    }

    /// Weyl displacement ρ ↦ e^{−iθγ} ρ e^{iθγ} by the Hermitian linear form
    /// γ = v̂.
    pub fn weyl_displace(&self, rho: &CMatrix, mode: &ModeVector, theta: f64) -> Result<CMatrix> {
        if !mode.is_hermitian_form(1e-8) {
            return Err(QblError::InvalidParameter("Weyl generator must be a Hermitian form".into()));
        }
        let gamma = self.linear_form_operator(mode);
        let u = expm(&gamma.mapv(|z| z * C64::new(0.0, -theta)));
        Ok(u.dot(rho).dot(&dagger(&u)))
    }

    /// Heisenberg-evolve an observable with the adjoint generator,
    /// Ȧ = L*(A), returning A at the requested times. Used for
    /// regression-theorem cross-checks.
    pub fn evolve_observable(&self, a0: &CMatrix, times: &[f64]) -> Result<Vec<CMatrix>> {
        rk45(a0, |a| self.apply_adjoint(a), times)
    }

    /// Integrate ρ̇ = L(ρ) and return the state at the requested times,
    /// monitoring trace, positivity drift, and cutoff leakage. The run is
    /// rejected when leakage exceeds [`LEAKAGE_TOL`].
    pub fn evolve(&self, rho0: &CMatrix, times: &[f64]) -> Result<OracleTrajectory> {
        let states = rk45(rho0, |r| self.apply(r), times)?;
        let mut max_leak = 0.0f64;
        let mut max_trace_err = 0.0f64;
        for rho in &states {
            max_leak = max_leak.max(self.leakage(rho));
            let tr: C64 = (0..self.dim()).map(|i| rho[[i, i]]).sum();
            max_trace_err = max_trace_err.max((tr - C64::new(1.0, 0.0)).norm());
        }
        if max_leak > LEAKAGE_TOL {
            return Err(QblError::Numerical(format!(
                "cutoff leakage {max_leak:.3e} exceeds {LEAKAGE_TOL:.1e}; raise n_max or shorten the horizon"
            )));
        }
        Ok(OracleTrajectory { times: times.to_vec(), states, max_leakage: max_leak, max_trace_error: max_trace_err })
    }
}

fn trace_of_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.nrows();
    let mut s = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            s += a[[i, k]] * b[[k, i]];
        }
    }
    s
}

/// Integrated density matrices with accumulated diagnostics.
pub struct OracleTrajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMatrix>,
    pub max_leakage: f64,
    pub max_trace_error: f64,
}

impl OracleTrajectory {
    /// Moment trajectories extracted from the stored states.
    pub fn moments(&self, model: &FockModel) -> (Vec<CVector>, Vec<CMatrix>) {
        let mut ms = Vec::with_capacity(self.states.len());
        let mut qs = Vec::with_capacity(self.states.len());
        for rho in &self.states {
            let (m, q) = model.moments(rho);
            ms.push(m);
            qs.push(q);
        }
        (ms, qs)
    }
}
