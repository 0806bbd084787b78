//! Nambu-space conventions shared by every other module.
//!
//! Modes are collected in the interleaved Nambu array
//! Φ = (a_1, a_1†, …, a_N, a_N†), so matrices act on C^{2N} with 2×2 blocks
//! per site. The block Pauli matrices are τ_j = 1_N ⊗ σ_j. Linear forms are
//! parametrized as v̂ = v† τ3 Φ; quadratures follow the convention
//! x_j = (a_j + a_j†)/√2, p_j = i(a_j† − a_j)/√2, so that [x_j, p_j] = i.

use ndarray::{Array1, Array2};

use crate::linalg::{dagger, max_abs};
use crate::{C64, CMatrix, CVector, QblError, Result};

/// Absolute tolerance for structural invariants on O(1)-normalized matrices.
pub const STRUCTURE_TOL: f64 = 1e-12;
/// Eigenvalues of a positive-semidefinite matrix may dip this far below zero.
pub const PSD_TOL: f64 = 1e-10;

/// Which of the two operators at a site an index refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Species {
    Annihilation,
    Creation,
}

/// Index into the Nambu array: a site (1-based) and a species.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NambuIndex {
    pub site: usize,
    pub species: Species,
}

impl NambuIndex {
    pub fn new(site: usize, species: Species) -> Self {
        Self { site, species }
    }

    /// Flattened position in [0, 2N).
    pub fn flat(&self) -> usize {
        2 * (self.site - 1)
            + match self.species {
                Species::Annihilation => 0,
                Species::Creation => 1,
            }
    }

    /// Inverse of [`NambuIndex::flat`].
    pub fn from_flat(idx: usize) -> Self {
        let species = if idx % 2 == 0 {
            Species::Annihilation
        } else {
            Species::Creation
        };
        Self { site: idx / 2 + 1, species }
    }

    /// Particle-hole partner (τ1 action): same site, other species.
    pub fn partner(&self) -> Self {
        let species = match self.species {
            Species::Annihilation => Species::Creation,
            Species::Creation => Species::Annihilation,
        };
        Self { site: self.site, species }
    }
}

/// A block Pauli matrix τ_j = 1_N ⊗ σ_j.
#[derive(Debug, Clone)]
pub struct BlockPauli {
    pub j: u8,
    pub n_modes: usize,
    pub matrix: CMatrix,
}

/// Build τ_j for j ∈ {1, 2, 3} on `n_modes` sites.
pub fn block_pauli(j: u8, n_modes: usize) -> Result<BlockPauli> {
    if !(1..=3).contains(&j) {
        return Err(QblError::InvalidParameter(format!("block Pauli index must be 1, 2 or 3, got {j}")));
    }
    if n_modes == 0 {
        return Err(QblError::InvalidParameter("mode count must be at least 1".into()));
    }
    let dim = 2 * n_modes;
    let mut m = Array2::zeros((dim, dim));
    for s in 0..n_modes {
        let (a, c) = (2 * s, 2 * s + 1);
        match j {
            1 => {
                m[[a, c]] = C64::new(1.0, 0.0);
                m[[c, a]] = C64::new(1.0, 0.0);
            }
            2 => {
                m[[a, c]] = C64::new(0.0, -1.0);
                m[[c, a]] = C64::new(0.0, 1.0);
            }
            3 => {
                m[[a, a]] = C64::new(1.0, 0.0);
                m[[c, c]] = C64::new(-1.0, 0.0);
            }
            _ => unreachable!(),
        }
    }
    Ok(BlockPauli { j, n_modes, matrix: m })
}

/// τ3 · A (negates creation rows).
pub fn tau3_mul_left(a: &CMatrix) -> CMatrix {
    let mut out = a.clone();
    for (i, mut row) in out.rows_mut().into_iter().enumerate() {
        if i % 2 == 1 {
            row.mapv_inplace(|z| -z);
        }
    }
    out
}

/// A · τ3 (negates creation columns).
pub fn tau3_mul_right(a: &CMatrix) -> CMatrix {
    let mut out = a.clone();
    for (j, mut col) in out.columns_mut().into_iter().enumerate() {
        if j % 2 == 1 {
            col.mapv_inplace(|z| -z);
        }
    }
    out
}

/// τ1 · A (swaps the two rows of every site block).
pub fn tau1_mul_left(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let mut out = a.clone();
    for s in (0..n).step_by(2) {
        for j in 0..a.ncols() {
            out[[s, j]] = a[[s + 1, j]];
            out[[s + 1, j]] = a[[s, j]];
        }
    }
    out
}

/// A · τ1 (swaps the two columns of every site block).
pub fn tau1_mul_right(a: &CMatrix) -> CMatrix {
    let m = a.ncols();
    let mut out = a.clone();
    for s in (0..m).step_by(2) {
        for i in 0..a.nrows() {
            out[[i, s]] = a[[i, s + 1]];
            out[[i, s + 1]] = a[[i, s]];
        }
    }
    out
}

/// τ3 · v.
pub fn tau3_mul_vec(v: &CVector) -> CVector {
    let mut out = v.clone();
    for (i, z) in out.iter_mut().enumerate() {
        if i % 2 == 1 {
            *z = -*z;
        }
    }
    out
}

/// τ1 · v.
pub fn tau1_mul_vec(v: &CVector) -> CVector {
    let n = v.len();
    let mut out = Array1::zeros(n);
    for s in (0..n).step_by(2) {
        out[s] = v[s + 1];
        out[s + 1] = v[s];
    }
    out
}

fn check_square_even(a: &CMatrix, what: &str) -> Result<usize> {
    let n = a.nrows();
    if a.ncols() != n || n == 0 || n % 2 != 0 {
        return Err(QblError::Structure(format!("{what} must be square of even dimension, got {}×{}", n, a.ncols())));
    }
    Ok(n / 2)
}

/// The pair (H, M) defining a quadratic bosonic Lindbladian: the Hamiltonian
/// matrix of H = ½ Φ† H Φ and the positive-semidefinite bath matrix built
/// from the Lindblad coefficient vectors.
#[derive(Debug, Clone)]
pub struct BdGPair {
    h: CMatrix,
    m: CMatrix,
    n_modes: usize,
}

impl BdGPair {
    /// Validate and wrap the pair. Checks H = H†, H = τ1 H* τ1, M = M† and
    /// M ⪰ 0 (eigenvalues above −[`PSD_TOL`], relative to ‖M‖).
    pub fn new(h: CMatrix, m: CMatrix) -> Result<Self> {
        let n_modes = check_square_even(&h, "H")?;
        if m.nrows() != h.nrows() || m.ncols() != h.ncols() {
            return Err(QblError::Structure("H and M dimensions differ".into()));
        }
        let scale_h = max_abs(&h).max(1.0);
        if max_abs(&(&h - &dagger(&h))) > STRUCTURE_TOL * scale_h {
            return Err(QblError::Structure("H is not Hermitian".into()));
        }
        let h_ph = tau1_mul_left(&tau1_mul_right(&h.mapv(|z| z.conj())));
        if max_abs(&(&h - &h_ph)) > STRUCTURE_TOL * scale_h {
            return Err(QblError::Structure("H does not satisfy H = τ1 H* τ1".into()));
        }
        let scale_m = max_abs(&m).max(1.0);
        if max_abs(&(&m - &dagger(&m))) > STRUCTURE_TOL * scale_m {
            return Err(QblError::Structure("M is not Hermitian".into()));
        }
        use ndarray_linalg::{Eigh, UPLO};
        let (evals, _) = m.eigh(UPLO::Lower)?;
        if evals.iter().any(|&v| v < -PSD_TOL * scale_m) {
            return Err(QblError::Structure(format!(
                "M is not positive semidefinite (min eigenvalue {:.3e})",
                evals.iter().cloned().fold(f64::INFINITY, f64::min)
            )));
        }
        Ok(Self { h, m, n_modes })
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.h
    }

    pub fn bath(&self) -> &CMatrix {
        &self.m
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// The dynamical matrix G = τ3 H − (i/2) τ3 (M − τ1 Mᵀ τ1).
    pub fn dynamical_matrix(&self) -> Result<DynamicalMatrix> {
        let mt = self.m.t().to_owned();
        let m_ph = tau1_mul_left(&tau1_mul_right(&mt));
        let diff = &self.m - &m_ph;
        let g = tau3_mul_left(&self.h) + tau3_mul_left(&diff).mapv(|z| z * C64::new(0.0, -0.5));
        DynamicalMatrix::new(g)
    }
}

/// The generator G of first-moment dynamics, Φ̇ = −iGΦ.
#[derive(Debug, Clone)]
pub struct DynamicalMatrix {
    g: CMatrix,
    n_modes: usize,
}

impl DynamicalMatrix {
    /// Validate the particle-hole constraint G = −τ1 G* τ1 and wrap.
    pub fn new(g: CMatrix) -> Result<Self> {
        let n_modes = check_square_even(&g, "G")?;
        let scale = max_abs(&g).max(1.0);
        let g_ph = tau1_mul_left(&tau1_mul_right(&g.mapv(|z| z.conj())));
        if max_abs(&(&g + &g_ph)) > STRUCTURE_TOL * scale {
            return Err(QblError::Structure("G does not satisfy G = −τ1 G* τ1".into()));
        }
        Ok(Self { g, n_modes })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.g
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    /// −iG, whose eigenvalues are the rapidities.
    pub fn neg_i(&self) -> CMatrix {
        self.g.mapv(|z| z * C64::new(0.0, -1.0))
    }

    /// The adjoint-picture generator G̃ = τ3 G† τ3 acting on linear-form
    /// coefficients. Applying twice returns G.
    pub fn adjoint_generator(&self) -> DynamicalMatrix {
        let g = tau3_mul_left(&tau3_mul_right(&dagger(&self.g)));
        // G̃ inherits the particle-hole constraint, so this cannot fail.
        DynamicalMatrix { g, n_modes: self.n_modes }
    }
}

/// Coefficients v of a linear form v̂ = v† τ3 Φ.
#[derive(Debug, Clone)]
pub struct ModeVector {
    v: CVector,
}

impl ModeVector {
    pub fn new(v: CVector) -> Result<Self> {
        if v.len() % 2 != 0 || v.is_empty() {
            return Err(QblError::Structure("mode vector length must be even and nonzero".into()));
        }
        Ok(Self { v })
    }

    pub fn coefficients(&self) -> &CVector {
        &self.v
    }

    pub fn n_modes(&self) -> usize {
        self.v.len() / 2
    }

    pub fn norm(&self) -> f64 {
        self.v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(&self) -> ModeVector {
        let n = self.norm();
        ModeVector { v: self.v.mapv(|z| z / n) }
    }

    /// Whether v̂ is Hermitian, i.e. τ1 v* = −v within `tol` (relative to ‖v‖).
    pub fn is_hermitian_form(&self, tol: f64) -> bool {
        let w = tau1_mul_vec(&self.v.mapv(|z| z.conj()));
        let diff: f64 = w
            .iter()
            .zip(self.v.iter())
            .map(|(a, b)| (a + b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        diff <= tol * self.norm().max(1.0)
    }

    /// Project onto the Hermitian-form subspace after choosing the global
    /// phase that maximizes the projection, and renormalize. Numerical
    /// singular vectors carry an arbitrary phase; this removes it.
    pub fn hermitized(&self) -> Result<ModeVector> {
        let w = tau1_mul_vec(&self.v.mapv(|z| z.conj()));
        // maximize ‖e^{iθ}v − e^{−iθ}w‖ over θ: e^{−2iθ} <v, w> = −|<v, w>|
        let inner: C64 = self.v.iter().zip(w.iter()).map(|(a, b)| a.conj() * b).sum();
        let theta = if inner.norm() > 0.0 {
            (inner.arg() - std::f64::consts::PI) / 2.0
        } else {
            0.0
        };
        let phase = C64::from_polar(1.0, theta);
        let proj: CVector = self
            .v
            .iter()
            .zip(w.iter())
            .map(|(a, b)| (phase * a - phase.conj() * b) * C64::new(0.5, 0.0))
            .collect();
        let norm = proj.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 * self.norm() {
            return Err(QblError::Numerical("vector has no Hermitian-form component".into()));
        }
        Ok(ModeVector { v: proj.mapv(|z| z / norm) })
    }

    /// The coefficient vector of x̂_site (1-based site index).
    pub fn x_form(site: usize, n_modes: usize) -> ModeVector {
        let mut v = Array1::zeros(2 * n_modes);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        v[2 * (site - 1)] = C64::new(r, 0.0);
        v[2 * (site - 1) + 1] = C64::new(-r, 0.0);
        ModeVector { v }
    }

    /// The coefficient vector of p̂_site.
    pub fn p_form(site: usize, n_modes: usize) -> ModeVector {
        let mut v = Array1::zeros(2 * n_modes);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        v[2 * (site - 1)] = C64::new(0.0, r);
        v[2 * (site - 1) + 1] = C64::new(0.0, r);
        ModeVector { v }
    }

    /// Expansion coefficients in the quadrature forms, interleaved
    /// (x_1, p_1, …, x_N, p_N). Hermitian forms give real coefficients.
    pub fn to_quadrature(&self) -> CVector {
        let n = self.n_modes();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut c = Array1::zeros(2 * n);
        for s in 0..n {
            let va = self.v[2 * s];
            let vc = self.v[2 * s + 1];
            c[2 * s] = (va - vc) * C64::new(r, 0.0);
            c[2 * s + 1] = (va + vc) * C64::new(0.0, -r);
        }
        c
    }

    /// Inverse of [`ModeVector::to_quadrature`].
    pub fn from_quadrature(c: &CVector) -> Result<ModeVector> {
        if c.len() % 2 != 0 || c.is_empty() {
            return Err(QblError::Structure("quadrature vector length must be even and nonzero".into()));
        }
        let n = c.len() / 2;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut v = Array1::zeros(2 * n);
        for s in 0..n {
            let cx = c[2 * s];
            let cp = c[2 * s + 1];
            v[2 * s] = (cx + C64::i() * cp) * C64::new(r, 0.0);
            v[2 * s + 1] = (-cx + C64::i() * cp) * C64::new(r, 0.0);
        }
        Ok(ModeVector { v })
    }

    /// Expectation value ⟨v̂⟩ = v† τ3 m in the state with first moments m.
    pub fn expectation(&self, mean: &CVector) -> C64 {
        self.v
            .iter()
            .zip(mean.iter())
            .enumerate()
            .map(|(i, (c, m))| {
                let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
                c.conj() * m * C64::new(sign, 0.0)
            })
            .sum()
    }

    /// Per-site weights |v_{a,j}|² + |v_{c,j}|².
    pub fn site_weights(&self) -> Vec<f64> {
        (0..self.n_modes())
            .map(|s| self.v[2 * s].norm_sqr() + self.v[2 * s + 1].norm_sqr())
            .collect()
    }
}

/// Whether a first-moment vector has the conjugate structure m = τ1 m*.
pub fn is_conjugate_symmetric(m: &CVector, tol: f64) -> bool {
    let w = tau1_mul_vec(&m.mapv(|z| z.conj()));
    let scale = m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1.0);
    let diff: f64 = w
        .iter()
        .zip(m.iter())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    diff <= tol * scale
}

/// Quadrature means (⟨x_1⟩, ⟨p_1⟩, …) of a Nambu mean vector.
pub fn mean_to_quadrature(m: &CVector) -> CVector {
    let n = m.len() / 2;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut u = Array1::zeros(2 * n);
    for s in 0..n {
        let ma = m[2 * s];
        let mc = m[2 * s + 1];
        u[2 * s] = (ma + mc) * C64::new(r, 0.0);
        u[2 * s + 1] = (mc - ma) * C64::new(0.0, r);
    }
    u
}

/// Nambu mean vector with quadrature means `u`; real `u` gives a vector with
/// the conjugate structure m = τ1 m*.
pub fn mean_from_quadrature(u: &CVector) -> CVector {
    let n = u.len() / 2;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = Array1::zeros(2 * n);
    for s in 0..n {
        let ux = u[2 * s];
        let up = u[2 * s + 1];
        m[2 * s] = (ux + C64::i() * up) * C64::new(r, 0.0);
        m[2 * s + 1] = (ux - C64::i() * up) * C64::new(r, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn block_pauli_small_cases() {
        let t3 = block_pauli(3, 1).unwrap();
        assert_eq!(t3.matrix, array![[C64::new(1.0, 0.0), C64::new(0.0, 0.0)], [C64::new(0.0, 0.0), C64::new(-1.0, 0.0)]]);

        let t2 = block_pauli(2, 1).unwrap();
        assert_eq!(t2.matrix[[0, 1]], C64::new(0.0, -1.0));
        assert_eq!(t2.matrix[[1, 0]], C64::new(0.0, 1.0));

        let t1 = block_pauli(1, 2).unwrap();
        for s in 0..2 {
            assert_eq!(t1.matrix[[2 * s, 2 * s + 1]], C64::new(1.0, 0.0));
            assert_eq!(t1.matrix[[2 * s + 1, 2 * s]], C64::new(1.0, 0.0));
        }
        assert_eq!(t1.matrix[[0, 2]], C64::new(0.0, 0.0));

        assert!(block_pauli(0, 1).is_err());
        assert!(block_pauli(4, 1).is_err());
    }

    #[test]
    fn block_pauli_algebra() {
        for j in 1..=3u8 {
            let t = block_pauli(j, 3).unwrap().matrix;
            let sq = t.dot(&t);
            let id = Array2::from_diag_elem(6, C64::new(1.0, 0.0));
            assert!(max_abs(&(&sq - &id)) < 1e-15);
            assert!(max_abs(&(&t - &dagger(&t))) < 1e-15);
        }
        let t1 = block_pauli(1, 2).unwrap().matrix;
        let t3 = block_pauli(3, 2).unwrap().matrix;
        let anti = t1.dot(&t3) + t3.dot(&t1);
        assert!(max_abs(&anti) < 1e-15);
    }

    #[test]
    fn nambu_index_round_trip_and_partner() {
        for idx in 0..10 {
            let ni = NambuIndex::from_flat(idx);
            assert_eq!(ni.flat(), idx);
            let p = ni.partner();
            assert_eq!(p.site, ni.site);
            assert_ne!(p.species, ni.species);
            assert_eq!(p.partner(), ni);
        }
    }

    #[test]
    fn tau_helpers_match_explicit_products() {
        let n = 3;
        let mut a: CMatrix = Array2::zeros((2 * n, 2 * n));
        for (k, v) in a.iter_mut().enumerate() {
            *v = C64::new(k as f64 * 0.37 - 1.0, (k % 7) as f64 * 0.11);
        }
        let t1 = block_pauli(1, n).unwrap().matrix;
        let t3 = block_pauli(3, n).unwrap().matrix;
        assert!(max_abs(&(&tau3_mul_left(&a) - &t3.dot(&a))) < 1e-15);
        assert!(max_abs(&(&tau3_mul_right(&a) - &a.dot(&t3))) < 1e-15);
        assert!(max_abs(&(&tau1_mul_left(&a) - &t1.dot(&a))) < 1e-15);
        assert!(max_abs(&(&tau1_mul_right(&a) - &a.dot(&t1))) < 1e-15);
    }

    #[test]
    fn single_lossy_mode_dynamical_matrix() {
        // H = 0, M = 2κ diag(1, 0): G = −iκ 1₂.
        let kappa = 0.4;
        let h = Array2::zeros((2, 2));
        let mut m = Array2::zeros((2, 2));
        m[[0, 0]] = C64::new(2.0 * kappa, 0.0);
        let pair = BdGPair::new(h, m).unwrap();
        let g = pair.dynamical_matrix().unwrap();
        let expected = Array2::from_diag_elem(2, C64::new(0.0, -kappa));
        assert!(max_abs(&(g.matrix() - &expected)) < 1e-15);

        // G̃ = τ3 G† τ3 = +iκ 1₂ for this diagonal case, and the adjoint is
        // an involution.
        let gt = g.adjoint_generator();
        let expected_adj = Array2::from_diag_elem(2, C64::new(0.0, kappa));
        assert!(max_abs(&(gt.matrix() - &expected_adj)) < 1e-15);
        assert!(max_abs(&(gt.adjoint_generator().matrix() - g.matrix())) < 1e-15);
    }

    #[test]
    fn quadrature_forms_on_one_site() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let x = ModeVector::x_form(1, 1);
        assert!((x.coefficients()[0] - C64::new(r, 0.0)).norm() < 1e-15);
        assert!((x.coefficients()[1] - C64::new(-r, 0.0)).norm() < 1e-15);
        let p = ModeVector::p_form(1, 1);
        assert!((p.coefficients()[0] - C64::new(0.0, r)).norm() < 1e-15);
        assert!((p.coefficients()[1] - C64::new(0.0, r)).norm() < 1e-15);
        assert!(x.is_hermitian_form(1e-14));
        assert!(p.is_hermitian_form(1e-14));

        // Quadrature coefficients of x̂_1 are (1, 0), of p̂_1 are (0, 1).
        let cx = x.to_quadrature();
        assert!((cx[0] - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(cx[1].norm() < 1e-14);
        let cp = p.to_quadrature();
        assert!(cp[0].norm() < 1e-14);
        assert!((cp[1] - C64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn hermitization_strips_phase() {
        let x = ModeVector::x_form(2, 3);
        let phase = C64::from_polar(1.0, 1.234);
        let rotated = ModeVector::new(x.coefficients().mapv(|z| z * phase)).unwrap();
        assert!(!rotated.is_hermitian_form(1e-6));
        let fixed = rotated.hermitized().unwrap();
        assert!(fixed.is_hermitian_form(1e-12));
        let overlap: C64 = fixed
            .coefficients()
            .iter()
            .zip(x.coefficients().iter())
            .map(|(a, b)| a.conj() * b)
            .sum();
        assert!((overlap.norm() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn quadrature_round_trip_is_identity(seed in 0u64..500) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..6usize);
            let v: CVector = (0..2 * n)
                .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect();
            let mv = ModeVector::new(v.clone()).unwrap();
            let c = mv.to_quadrature();
            let back = ModeVector::from_quadrature(&c).unwrap();
            let diff: f64 = back
                .coefficients()
                .iter()
                .zip(v.iter())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>()
                .sqrt();
            prop_assert!(diff < 1e-14);
            // basis change preserves the norm
            let cn = c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            prop_assert!((cn - mv.norm()).abs() < 1e-14);
        }

        #[test]
        fn hermitian_forms_have_real_quadrature_coefficients(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..5usize);
            // random real quadrature coefficients -> Hermitian form
            let c: CVector = (0..2 * n).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
            let mv = ModeVector::from_quadrature(&c).unwrap();
            prop_assert!(mv.is_hermitian_form(1e-13));
            let c_back = mv.to_quadrature();
            for z in c_back.iter() {
                prop_assert!(z.im.abs() < 1e-14);
            }
        }

        #[test]
        fn mean_quadrature_round_trip(seed in 0u64..200) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let n = rng.gen_range(1..5usize);
            let u: CVector = (0..2 * n).map(|_| C64::new(rng.gen_range(-1.0..1.0), 0.0)).collect();
            let m = mean_from_quadrature(&u);
            prop_assert!(is_conjugate_symmetric(&m, 1e-13));
            let u_back = mean_to_quadrature(&m);
            let diff: f64 = u_back.iter().zip(u.iter()).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
            prop_assert!(diff < 1e-14);
        }
    }
}
