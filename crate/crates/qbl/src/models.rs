//! Lattice models: the bosonic Kitaev chain with onsite loss (Model 1),
//! with additional next-nearest-neighbor damping (Model 2), and custom
//! stencil-defined chains, under periodic or open boundary conditions, with
//! optional quenched disorder. Also the Bloch symbol of the bulk generator.

use ndarray::{Array1, Array2};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::linalg::max_abs;
use crate::nambu::{BdGPair, DynamicalMatrix};
use crate::{C64, CMatrix, CVector, QblError, Result};

/// Which model family a spec describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Model1,
    Model2,
    Custom,
}

/// Boundary conditions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    #[serde(rename = "PBC")]
    Pbc,
    #[serde(rename = "OBC")]
    Obc,
}

/// Parameters that disorder may act on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DisorderTarget {
    #[serde(rename = "J")]
    J,
    #[serde(rename = "mu")]
    Mu,
    #[serde(rename = "kappa")]
    Kappa,
}

/// Independent uniform disorder of half-width `W` on the chosen parameters,
/// drawn from a seeded generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DisorderSpec {
    pub target: Vec<DisorderTarget>,
    #[serde(rename = "W")]
    pub width: f64,
    pub seed: u64,
}

/// One 2×2 Hamiltonian block coupling site j to site j + offset. Complex
/// entries are written as [re, im] pairs; `block[r][c]` indexes
/// (annihilation, creation) rows and columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HStencilBlock {
    pub offset: i64,
    pub block: [[[f64; 2]; 2]; 2],
}

/// One coefficient of a Lindblad stencil: at site j + offset the operator
/// picks up `a`·a + `a_dag`·a†.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladTerm {
    pub offset: i64,
    #[serde(default)]
    pub a: [f64; 2],
    #[serde(default)]
    pub a_dag: [f64; 2],
}

/// A translation-invariant family of Lindblad operators, one per anchor site
/// whose terms all fit on the chain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LindbladStencil {
    pub terms: Vec<LindbladTerm>,
}

/// Chain parameters. Serializes to/from JSON with exactly these field names;
/// unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    pub family: Family,
    #[serde(rename = "J")]
    pub j: f64,
    #[serde(rename = "Delta")]
    pub delta: f64,
    #[serde(default)]
    pub mu: f64,
    pub kappa: f64,
    #[serde(rename = "Gamma", default)]
    pub gamma: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub bc: Boundary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub disorder: Option<DisorderSpec>,
    /// Relative phase of the next-nearest-neighbor damping of Model 2.
    #[serde(default)]
    pub phi: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h_stencil: Option<Vec<HStencilBlock>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lindblad_stencils: Option<Vec<LindbladStencil>>,
}

impl ModelSpec {
    pub fn model1(j: f64, delta: f64, mu: f64, kappa: f64, n: usize, bc: Boundary) -> Self {
        Self {
            family: Family::Model1,
            j,
            delta,
            mu,
            kappa,
            gamma: 0.0,
            n,
            bc,
            disorder: None,
            phi: 0.0,
            h_stencil: None,
            lindblad_stencils: None,
        }
    }

    pub fn model2(j: f64, delta: f64, mu: f64, kappa: f64, gamma: f64, n: usize, bc: Boundary) -> Self {
        Self {
            family: Family::Model2,
            gamma,
            ..Self::model1(j, delta, mu, kappa, n, bc)
        }
    }

    pub fn with_bc(&self, bc: Boundary) -> Self {
        Self { bc, ..self.clone() }
    }

    pub fn with_n(&self, n: usize) -> Self {
        Self { n, ..self.clone() }
    }

    pub fn with_disorder(&self, disorder: DisorderSpec) -> Self {
        Self { disorder: Some(disorder), ..self.clone() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.j >= self.delta && self.delta >= 0.0) {
            return Err(QblError::InvalidParameter(format!(
                "require J >= Delta >= 0, got J = {}, Delta = {}",
                self.j, self.delta
            )));
        }
        if !(self.kappa > 0.0) {
            return Err(QblError::InvalidParameter("kappa must be positive".into()));
        }
        if self.gamma < 0.0 {
            return Err(QblError::InvalidParameter("Gamma must be nonnegative".into()));
        }
        if self.n == 0 || self.n > 64 {
            return Err(QblError::InvalidParameter(format!(
                "N must be in [1, 64], got {}",
                self.n
            )));
        }
        if self.n < 2 && (self.j != 0.0 || self.delta != 0.0) {
            return Err(QblError::InvalidParameter("bond couplings require N >= 2".into()));
        }
        if self.bc == Boundary::Pbc && self.n < 2 {
            return Err(QblError::InvalidParameter("PBC requires N >= 2".into()));
        }
        if let Some(d) = &self.disorder {
            if d.width < 0.0 {
                return Err(QblError::InvalidParameter("disorder width must be nonnegative".into()));
            }
            if d.target.contains(&DisorderTarget::Kappa) && self.kappa - d.width <= 0.0 {
                return Err(QblError::InvalidParameter(
                    "disorder drives kappa_j <= 0; reduce W".into(),
                ));
            }
        }
        match self.family {
            Family::Custom => {
                if self.h_stencil.is_none() && self.lindblad_stencils.is_none() {
                    return Err(QblError::InvalidParameter(
                        "custom family requires h_stencil or lindblad_stencils".into(),
                    ));
                }
                if self.disorder.is_some() {
                    return Err(QblError::InvalidParameter(
                        "disorder is not supported for custom stencils".into(),
                    ));
                }
            }
            _ => {
                if self.h_stencil.is_some() || self.lindblad_stencils.is_some() {
                    return Err(QblError::InvalidParameter(
                        "stencils are only allowed for family = custom".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn translation_invariant(&self) -> bool {
        self.disorder.as_ref().map_or(true, |d| d.width == 0.0)
    }
}

/// Site- and bond-resolved parameters after (optional) disorder sampling.
struct SiteParams {
    n: usize,
    bc: Boundary,
    j_bonds: Vec<f64>,
    delta: f64,
    mu: Vec<f64>,
    kappa: Vec<f64>,
}

impl SiteParams {
    /// `stream` distinguishes parallel realizations drawn from one seed.
    fn sample(spec: &ModelSpec, stream: u64) -> Result<Self> {
        let n = spec.n;
        let n_bonds = match spec.bc {
            Boundary::Pbc => n,
            Boundary::Obc => n.saturating_sub(1),
        };
        let mut j_bonds = vec![spec.j; n_bonds];
        let mut mu = vec![spec.mu; n];
        let mut kappa = vec![spec.kappa; n];

        if let Some(d) = &spec.disorder {
            let mut rng = ChaCha8Rng::seed_from_u64(d.seed);
            rng.set_stream(stream);
            let mut targets = d.target.clone();
            targets.sort();
            targets.dedup();
            let dist = rand::distributions::Uniform::new_inclusive(-d.width, d.width);
            for t in targets {
                match t {
                    DisorderTarget::J => {
                        for v in j_bonds.iter_mut() {
                            *v += rng.sample(dist);
                        }
                    }
                    DisorderTarget::Mu => {
                        for v in mu.iter_mut() {
                            *v += rng.sample(dist);
                        }
                    }
                    DisorderTarget::Kappa => {
                        for v in kappa.iter_mut() {
                            *v += rng.sample(dist);
                        }
                    }
                }
            }
            if kappa.iter().any(|&k| k <= 0.0) {
                return Err(QblError::InvalidParameter("sampled kappa_j <= 0".into()));
            }
        }
        Ok(Self { n, bc: spec.bc, j_bonds, delta: spec.delta, mu, kappa })
    }
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Hamiltonian matrix of the (possibly disordered) chain: the bosonic Kitaev
/// chain H = (i/2) Σ_j (J a†_{j+1} a_j + Δ a†_{j+1} a†_j) + (iμ/2) Σ_j (a_j†)²
/// + H.c. for the built-in families, or the user stencil for `custom`.
pub fn build_hamiltonian(spec: &ModelSpec) -> Result<CMatrix> {
    spec.validate()?;
    build_hamiltonian_from(&SiteParams::sample(spec, 0)?, spec)
}

fn build_hamiltonian_from(p: &SiteParams, spec: &ModelSpec) -> Result<CMatrix> {
    let n = p.n;
    let dim = 2 * n;
    let mut h: CMatrix = Array2::zeros((dim, dim));

    if spec.family == Family::Custom {
        if let Some(blocks) = &spec.h_stencil {
            for b in blocks {
                place_block(&mut h, b.offset, &to_block(&b.block), n, p.bc);
            }
        }
        return Ok(h);
    }

    // onsite degenerate parametric amplification: B_jj = iμ_j
    for (s, &mu) in p.mu.iter().enumerate() {
        let (a, cr) = (2 * s, 2 * s + 1);
        h[[a, cr]] += c(0.0, mu);
        h[[cr, a]] += c(0.0, -mu);
    }
    // bonds: hopping A_{j+1,j} = iJ/2 and pairing B_{j+1,j} = B_{j,j+1} = iΔ/2
    for (b, &j_b) in p.j_bonds.iter().enumerate() {
        let s = b; // bond from site s to s+1 (0-based), wrapping under PBC
        let t = (s + 1) % n;
        let (sa, sc) = (2 * s, 2 * s + 1);
        let (ta, tc) = (2 * t, 2 * t + 1);
        h[[ta, sa]] += c(0.0, j_b / 2.0);
        h[[sa, ta]] += c(0.0, -j_b / 2.0);
        h[[tc, sc]] += c(0.0, -j_b / 2.0);
        h[[sc, tc]] += c(0.0, j_b / 2.0);
        h[[sa, tc]] += c(0.0, p.delta / 2.0);
        h[[ta, sc]] += c(0.0, p.delta / 2.0);
        h[[sc, ta]] += c(0.0, -p.delta / 2.0);
        h[[tc, sa]] += c(0.0, -p.delta / 2.0);
    }
    Ok(h)
}

fn to_block(b: &[[[f64; 2]; 2]; 2]) -> [[C64; 2]; 2] {
    [
        [c(b[0][0][0], b[0][0][1]), c(b[0][1][0], b[0][1][1])],
        [c(b[1][0][0], b[1][0][1]), c(b[1][1][0], b[1][1][1])],
    ]
}

fn place_block(h: &mut CMatrix, offset: i64, block: &[[C64; 2]; 2], n: usize, bc: Boundary) {
    for s in 0..n as i64 {
        let t = s + offset;
        let t = match bc {
            Boundary::Pbc => t.rem_euclid(n as i64),
            Boundary::Obc => {
                if t < 0 || t >= n as i64 {
                    continue;
                }
                t
            }
        };
        for (r, row) in block.iter().enumerate() {
            for (cc, &val) in row.iter().enumerate() {
                h[[2 * s as usize + r, 2 * t as usize + cc]] += val;
            }
        }
    }
}

/// Lindblad coefficient vectors ℓ^k (one per operator, L_k = Σ_I ℓ^k_I Φ_I)
/// for the spec, with disorder applied when present.
pub fn lindblad_vectors(spec: &ModelSpec) -> Result<Vec<CVector>> {
    spec.validate()?;
    lindblad_vectors_from(&SiteParams::sample(spec, 0)?, spec)
}

fn lindblad_vectors_from(p: &SiteParams, spec: &ModelSpec) -> Result<Vec<CVector>> {
    let n = p.n;
    let dim = 2 * n;
    let mut out = Vec::new();

    if spec.family == Family::Custom {
        if let Some(stencils) = &spec.lindblad_stencils {
            for st in stencils {
                for anchor in 0..n as i64 {
                    let mut v: CVector = Array1::zeros(dim);
                    let mut fits = true;
                    for term in &st.terms {
                        let site = anchor + term.offset;
                        let site = match spec.bc {
                            Boundary::Pbc => site.rem_euclid(n as i64),
                            Boundary::Obc => {
                                if site < 0 || site >= n as i64 {
                                    fits = false;
                                    break;
                                }
                                site
                            }
                        };
                        v[2 * site as usize] += c(term.a[0], term.a[1]);
                        v[2 * site as usize + 1] += c(term.a_dag[0], term.a_dag[1]);
                    }
                    if fits {
                        out.push(v);
                    }
                }
            }
        }
        return Ok(out);
    }

    // Model 1: L_j = sqrt(2 κ_j) a_j on every site.
    for (s, &k) in p.kappa.iter().enumerate() {
        let mut v: CVector = Array1::zeros(dim);
        v[2 * s] = c((2.0 * k).sqrt(), 0.0);
        out.push(v);
    }
    // Model 2 adds L_j = sqrt(Γ)(a_j + e^{iφ} a_{j+2}).
    if spec.family == Family::Model2 && spec.gamma > 0.0 {
        let phase = C64::from_polar(spec.gamma.sqrt(), spec.phi);
        let anchors: Vec<i64> = match spec.bc {
            Boundary::Pbc => (0..n as i64).collect(),
            Boundary::Obc => (0..n as i64 - 2).collect(),
        };
        for s in anchors {
            let t = (s + 2).rem_euclid(n as i64);
            let mut v: CVector = Array1::zeros(dim);
            v[2 * s as usize] += c(spec.gamma.sqrt(), 0.0);
            v[2 * t as usize] += phase;
            out.push(v);
        }
    }
    Ok(out)
}

/// Bath matrix M = Σ_k (ℓ^k)* (ℓ^k)ᵀ.
pub fn build_bath(spec: &ModelSpec) -> Result<CMatrix> {
    let vectors = lindblad_vectors(spec)?;
    Ok(bath_from_vectors(&vectors, 2 * spec.n))
}

pub(crate) fn bath_from_vectors(vectors: &[CVector], dim: usize) -> CMatrix {
    let mut m: CMatrix = Array2::zeros((dim, dim));
    for l in vectors {
        for (i, li) in l.iter().enumerate() {
            if li.norm_sqr() == 0.0 {
                continue;
            }
            for (j, lj) in l.iter().enumerate() {
                if lj.norm_sqr() == 0.0 {
                    continue;
                }
                m[[i, j]] += li.conj() * lj;
            }
        }
    }
    m
}

/// Validated (H, M) for the spec (clean, or one disorder realization when a
/// [`DisorderSpec`] is present — stream 0).
pub fn bdg_pair(spec: &ModelSpec) -> Result<BdGPair> {
    bdg_pair_realization(spec, 0)
}

/// One disorder realization; `stream` selects an independent draw from the
/// same seed so parallel shards remain reproducible. Identical (seed, stream)
/// give identical matrices.
pub fn bdg_pair_realization(spec: &ModelSpec, stream: u64) -> Result<BdGPair> {
    spec.validate()?;
    let p = SiteParams::sample(spec, stream)?;
    let h = build_hamiltonian_from(&p, spec)?;
    let vectors = lindblad_vectors_from(&p, spec)?;
    let m = bath_from_vectors(&vectors, 2 * spec.n);
    BdGPair::new(h, m)
}

/// The sampled BdG pair for a spec with disorder (W = 0 reproduces the clean
/// model exactly).
pub fn apply_disorder(spec: &ModelSpec) -> Result<BdGPair> {
    if spec.disorder.is_none() {
        return Err(QblError::InvalidParameter("spec carries no disorder".into()));
    }
    bdg_pair_realization(spec, 0)
}

/// Dynamical matrix of the spec.
pub fn dynamical_matrix(spec: &ModelSpec) -> Result<DynamicalMatrix> {
    bdg_pair(spec)?.dynamical_matrix()
}

/// Coefficient blocks {G_r} of the Bloch symbol G(k) = Σ_r G_r e^{ikr}; the
/// circulant rebuilt from them is the PBC dynamical matrix.
#[derive(Debug, Clone)]
pub struct BlochSymbol {
    blocks: Vec<(i64, CMatrix)>,
}

impl BlochSymbol {
    pub fn blocks(&self) -> &[(i64, CMatrix)] {
        &self.blocks
    }

    pub fn r_max(&self) -> i64 {
        self.blocks.iter().map(|(r, _)| r.abs()).max().unwrap_or(0)
    }

    /// G(k) as a 2×2 block.
    pub fn evaluate(&self, k: f64) -> CMatrix {
        let mut g: CMatrix = Array2::zeros((2, 2));
        for (r, b) in &self.blocks {
            let phase = C64::from_polar(1.0, k * *r as f64);
            g = g + b.mapv(|z| z * phase);
        }
        g
    }

    /// −iG(k), the 2×2 whose eigenvalues trace the rapidity bands.
    pub fn neg_i_at(&self, k: f64) -> CMatrix {
        self.evaluate(k).mapv(|z| z * C64::new(0.0, -1.0))
    }

    /// Block circulant of size 2n×2n built from the coefficient blocks.
    pub fn circulant(&self, n: usize) -> CMatrix {
        let mut g: CMatrix = Array2::zeros((2 * n, 2 * n));
        for (r, b) in &self.blocks {
            for s in 0..n as i64 {
                let t = (s + r).rem_euclid(n as i64) as usize;
                for i in 0..2 {
                    for j in 0..2 {
                        g[[2 * s as usize + i, 2 * t + j]] += b[[i, j]];
                    }
                }
            }
        }
        g
    }
}

/// Bloch symbol of a translation-invariant spec (errors when disorder with
/// W > 0 is present).
pub fn bloch_symbol(spec: &ModelSpec) -> Result<BlochSymbol> {
    spec.validate()?;
    if !spec.translation_invariant() {
        return Err(QblError::InvalidParameter(
            "Bloch symbol requires a translation-invariant spec (no disorder)".into(),
        ));
    }

    // Hamiltonian blocks H_r.
    let mut h_blocks: Vec<(i64, CMatrix)> = Vec::new();
    match spec.family {
        Family::Custom => {
            if let Some(blocks) = &spec.h_stencil {
                for b in blocks {
                    let arr = to_block(&b.block);
                    let mut m: CMatrix = Array2::zeros((2, 2));
                    for i in 0..2 {
                        for j in 0..2 {
                            m[[i, j]] = arr[i][j];
                        }
                    }
                    push_block(&mut h_blocks, b.offset, &m);
                }
            }
        }
        _ => {
            let (jj, dd, mm) = (spec.j, spec.delta, spec.mu);
            let mut h0: CMatrix = Array2::zeros((2, 2));
            h0[[0, 1]] = c(0.0, mm);
            h0[[1, 0]] = c(0.0, -mm);
            push_block(&mut h_blocks, 0, &h0);
            if spec.n >= 2 || jj != 0.0 || dd != 0.0 {
                let mut h1: CMatrix = Array2::zeros((2, 2));
                h1[[0, 0]] = c(0.0, -jj / 2.0);
                h1[[1, 1]] = c(0.0, jj / 2.0);
                h1[[0, 1]] = c(0.0, dd / 2.0);
                h1[[1, 0]] = c(0.0, -dd / 2.0);
                let h1d = h1.t().mapv(|z| z.conj());
                push_block(&mut h_blocks, 1, &h1);
                push_block(&mut h_blocks, -1, &h1d);
            }
        }
    }

    // Bath blocks M_r from the Lindblad stencil coefficients.
    let mut m_blocks: Vec<(i64, CMatrix)> = Vec::new();
    let families: Vec<Vec<(i64, C64, C64)>> = match spec.family {
        Family::Custom => spec
            .lindblad_stencils
            .as_ref()
            .map(|sts| {
                sts.iter()
                    .map(|st| {
                        st.terms
                            .iter()
                            .map(|t| (t.offset, c(t.a[0], t.a[1]), c(t.a_dag[0], t.a_dag[1])))
                            .collect()
                    })
                    .collect()
            })
            .unwrap_or_default(),
        Family::Model1 => vec![vec![(0, c((2.0 * spec.kappa).sqrt(), 0.0), c(0.0, 0.0))]],
        Family::Model2 => {
            let mut fams = vec![vec![(0, c((2.0 * spec.kappa).sqrt(), 0.0), c(0.0, 0.0))]];
            if spec.gamma > 0.0 {
                fams.push(vec![
                    (0, c(spec.gamma.sqrt(), 0.0), c(0.0, 0.0)),
                    (2, C64::from_polar(spec.gamma.sqrt(), spec.phi), c(0.0, 0.0)),
                ]);
            }
            fams
        }
    };
    for fam in &families {
        for (r1, a1, c1) in fam {
            let v1 = [a1.conj(), c1.conj()];
            for (r2, a2, c2) in fam {
                let v2 = [*a2, *c2];
                let mut b: CMatrix = Array2::zeros((2, 2));
                for i in 0..2 {
                    for j in 0..2 {
                        b[[i, j]] = v1[i] * v2[j];
                    }
                }
                push_block(&mut m_blocks, r2 - r1, &b);
            }
        }
    }

    // G_r = σ3 H_r − (i/2) σ3 (M_r − σ1 M_{−r}ᵀ σ1).
    let mut offsets: Vec<i64> = h_blocks.iter().chain(m_blocks.iter()).map(|(r, _)| *r).collect();
    offsets.sort();
    offsets.dedup();
    let zero: CMatrix = Array2::zeros((2, 2));
    let find = |bl: &[(i64, CMatrix)], r: i64| -> CMatrix {
        bl.iter()
            .find(|(rr, _)| *rr == r)
            .map(|(_, b)| b.clone())
            .unwrap_or_else(|| zero.clone())
    };
    let sigma3 = |m: &CMatrix| -> CMatrix {
        let mut out = m.clone();
        out.row_mut(1).mapv_inplace(|z| -z);
        out
    };
    let sigma1_both = |m: &CMatrix| -> CMatrix {
        let mut out: CMatrix = Array2::zeros((2, 2));
        for i in 0..2 {
            for j in 0..2 {
                out[[i, j]] = m[[1 - i, 1 - j]];
            }
        }
        out
    };
    let mut blocks = Vec::new();
    for &r in &offsets {
        let hr = find(&h_blocks, r);
        let mr = find(&m_blocks, r);
        let m_neg_t = find(&m_blocks, -r).t().to_owned();
        let diff = &mr - &sigma1_both(&m_neg_t);
        let gr = sigma3(&hr) + sigma3(&diff).mapv(|z| z * c(0.0, -0.5));
        if max_abs(&gr) > 0.0 {
            blocks.push((r, gr));
        }
    }
    if blocks.is_empty() {
        blocks.push((0, zero));
    }
    Ok(BlochSymbol { blocks })
}

fn push_block(blocks: &mut Vec<(i64, CMatrix)>, r: i64, b: &CMatrix) {
    if let Some((_, existing)) = blocks.iter_mut().find(|(rr, _)| *rr == r) {
        *existing = existing.clone() + b;
    } else {
        blocks.push((r, b.clone()));
    }
}
