//! Rapidity spectra, Hurwitz/metastability classification, bulk band curves
//! of the Bloch symbol, and winding numbers.

use std::f64::consts::PI;

use crate::linalg::eigenvalues;
use crate::models::{self, BlochSymbol, Boundary, ModelSpec};
use crate::nambu::DynamicalMatrix;
use crate::{C64, QblError, Result};

/// Eigenvalues with real part strictly below −[`HURWITZ_TOL`] count as
/// stable; real parts inside (−tol, tol) raise the `marginal` flag.
pub const HURWITZ_TOL: f64 = 1e-10;

/// The rapidity spectrum σ(−iG): eigenvalue list, spectral gap, and
/// stability flags.
#[derive(Debug, Clone)]
pub struct RapiditySpectrum {
    pub eigenvalues: Vec<C64>,
    pub gap: f64,
    pub hurwitz: bool,
    pub marginal: bool,
}

impl RapiditySpectrum {
    /// Largest real part across the spectrum.
    pub fn max_re(&self) -> f64 {
        self.eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max)
    }

    /// Whether the eigenvalue list is closed under complex conjugation
    /// within `tol` (a consequence of G = −τ1 G* τ1).
    pub fn conjugation_closed(&self, tol: f64) -> bool {
        self.eigenvalues.iter().all(|z| {
            self.eigenvalues
                .iter()
                .any(|w| (w - z.conj()).norm() < tol)
        })
    }
}

/// Eigenvalues of −iG with the spectral gap Δ_L = |max Re σ(−iG)|.
pub fn rapidities(g: &DynamicalMatrix) -> Result<RapiditySpectrum> {
    let x = g.neg_i();
    let vals = eigenvalues(&x)?;
    let eigenvalues: Vec<C64> = vals.iter().cloned().collect();
    let max_re = eigenvalues.iter().map(|z| z.re).fold(f64::NEG_INFINITY, f64::max);
    let hurwitz = max_re < -HURWITZ_TOL;
    let marginal = eigenvalues.iter().any(|z| z.re.abs() <= HURWITZ_TOL);
    Ok(RapiditySpectrum { eigenvalues, gap: max_re.abs(), hurwitz, marginal })
}

/// Dynamical-stability classes of a translation-invariant chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stability {
    Unstable,
    Metastable,
    UnconditionallyStable,
}

impl std::fmt::Display for Stability {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Stability::Unstable => write!(f, "unstable"),
            Stability::Metastable => write!(f, "metastable"),
            Stability::UnconditionallyStable => write!(f, "unconditionally_stable"),
        }
    }
}

/// Classify a spec: metastable iff dynamically stable for OBC and unstable
/// for PBC; unstable iff the OBC chain itself is non-Hurwitz.
pub fn classify(spec: &ModelSpec) -> Result<Stability> {
    if spec.disorder.as_ref().is_some_and(|d| d.width > 0.0) {
        return Err(QblError::InvalidParameter(
            "classification is defined for translation-invariant specs".into(),
        ));
    }
    let obc = rapidities(&models::dynamical_matrix(&spec.with_bc(Boundary::Obc))?)?;
    if !obc.hurwitz {
        return Ok(Stability::Unstable);
    }
    let pbc = rapidities(&models::dynamical_matrix(&spec.with_bc(Boundary::Pbc))?)?;
    if !pbc.hurwitz {
        Ok(Stability::Metastable)
    } else {
        Ok(Stability::UnconditionallyStable)
    }
}

/// Rapidity band curves λ_b(k) on a uniform k grid over [0, 2π), sorted into
/// continuous branches by eigenvector overlap between adjacent k points.
#[derive(Debug, Clone)]
pub struct BandCurves {
    pub k: Vec<f64>,
    /// `bands[b][ik]` is the b-th branch at `k[ik]`.
    pub bands: Vec<Vec<C64>>,
    /// Whether each branch returns to itself after a full Brillouin-zone
    /// cycle (no band-permutation monodromy).
    pub closed: bool,
}

fn eig_small(m: &crate::CMatrix) -> Result<(Vec<C64>, Vec<Vec<C64>>)> {
    use ndarray_linalg::Eig;
    let (vals, vecs) = m.eig()?;
    let b = vals.len();
    let eigs: Vec<C64> = vals.iter().cloned().collect();
    let vectors: Vec<Vec<C64>> = (0..b).map(|k| vecs.column(k).to_vec()).collect();
    Ok((eigs, vectors))
}

fn overlap(a: &[C64], b: &[C64]) -> f64 {
    let mut s = C64::new(0.0, 0.0);
    for (x, y) in a.iter().zip(b.iter()) {
        s += x.conj() * y;
    }
    s.norm()
}

fn degenerate(vals: &[C64]) -> bool {
    let scale = vals.iter().map(|z| z.norm()).fold(1.0, f64::max);
    for (i, a) in vals.iter().enumerate() {
        for b in vals.iter().skip(i + 1) {
            if (a - b).norm() < 1e-8 * scale {
                return true;
            }
        }
    }
    false
}

fn next_permutation(p: &mut [usize]) -> bool {
    let n = p.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Choose the permutation of `curr` maximizing total squared overlap with
/// `prev`. Errors when no assignment dominates while the permuted
/// eigenvalues actually differ.
fn assign_branches(
    prev_vecs: &[Vec<C64>],
    curr_vals: &[C64],
    curr_vecs: &[Vec<C64>],
) -> Result<Vec<usize>> {
    let b = prev_vecs.len();
    if b == 1 {
        return Ok(vec![0]);
    }
    let mut perm: Vec<usize> = (0..b).collect();
    let mut best = f64::NEG_INFINITY;
    let mut second = f64::NEG_INFINITY;
    let mut best_perm = perm.clone();
    loop {
        let score: f64 = (0..b)
            .map(|i| overlap(&prev_vecs[i], &curr_vecs[perm[i]]).powi(2))
            .sum();
        if score > best {
            second = best;
            best = score;
            best_perm = perm.clone();
        } else if score > second {
            second = score;
        }
        if !next_permutation(&mut perm) {
            break;
        }
    }
    if (best - second).abs() < 1e-12 * best.abs().max(1.0) {
        let scale = curr_vals.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let swapped_differ = {
            // does the runner-up permutation change any eigenvalue materially?
            curr_vals
                .iter()
                .enumerate()
                .any(|(i, z)| curr_vals.iter().enumerate().any(|(j, w)| i != j && (z - w).norm() > 1e-10 * scale))
        };
        if swapped_differ {
            return Err(QblError::Numerical(
                "branch tracking ambiguous: overlap matrix has no dominant assignment".into(),
            ));
        }
    }
    Ok(best_perm)
}

/// Eigenvalue branches of −iG(k) over the Brillouin zone.
pub fn bulk_bands(symbol: &BlochSymbol, k_count: usize) -> Result<BandCurves> {
    if k_count < 64 {
        return Err(QblError::InvalidParameter("k_count must be at least 64".into()));
    }
    let ks: Vec<f64> = (0..k_count).map(|i| 2.0 * PI * i as f64 / k_count as f64).collect();
    let x0 = symbol.neg_i_at(ks[0]);
    let (vals0, vecs0) = eig_small(&x0)?;
    let b = vals0.len();
    let mut bands: Vec<Vec<C64>> = (0..b).map(|i| vec![vals0[i]]).collect();
    // The reference frame is only meaningful away from band crossings; when
    // the grid starts on one, adopt the frame at the first well-separated k.
    let mut have_frame = !degenerate(&vals0);
    let mut prev_vecs = vecs0;

    for &k in &ks[1..] {
        let x = symbol.neg_i_at(k);
        let (vals, vecs) = eig_small(&x)?;
        let perm = if have_frame {
            assign_branches(&prev_vecs, &vals, &vecs)?
        } else {
            (0..b).collect()
        };
        for i in 0..b {
            bands[i].push(vals[perm[i]]);
        }
        // At a band crossing the eigenvector basis is arbitrary; keep the
        // last well-separated frame as the tracking reference instead.
        if !degenerate(&vals) {
            prev_vecs = perm.iter().map(|&p| vecs[p].clone()).collect();
            have_frame = true;
        }
    }

    // Monodromy check: does each branch reconnect to itself at k = 2π?
    let x_end = symbol.neg_i_at(2.0 * PI);
    let (vals_end, vecs_end) = eig_small(&x_end)?;
    let perm = assign_branches(&prev_vecs, &vals_end, &vecs_end)?;
    let closed = (0..b).all(|i| {
        let target = vals_end[perm[i]];
        (bands[i][0] - target).norm() <= 1e-8 * target.norm().max(1.0)
    });

    Ok(BandCurves { k: ks, bands, closed })
}

/// Winding data of the bulk bands around a reference point.
///
/// `total` is the winding of det(−iG(k) − λ0). The quadrature bands of the
/// damped Kitaev chain wind with opposite orientation at μ = 0, so the
/// determinant total can cancel to zero while both bands wind; the count of
/// winding bands is the quantity tied to edge-mode multiplicity.
#[derive(Debug, Clone)]
pub struct WindingResult {
    pub band_windings: Vec<i64>,
    pub total: i64,
    pub reference: C64,
    pub min_distance: f64,
}

impl WindingResult {
    /// Number of tracked bands with nonzero winding.
    pub fn n_winding_bands(&self) -> usize {
        self.band_windings.iter().filter(|&&w| w != 0).count()
    }
}

fn accumulated_winding(values: &[C64], reference: C64, label: &str) -> Result<f64> {
    let mut phase = 0.0;
    for i in 0..values.len() {
        let a = values[i] - reference;
        let b = values[(i + 1) % values.len()] - reference;
        let step = (b / a).arg();
        if step.abs() > 0.9 * PI {
            return Err(QblError::Numerical(format!(
                "phase step near π while winding {label}; increase k_count"
            )));
        }
        phase += step;
    }
    Ok(phase / (2.0 * PI))
}

/// Winding of det(−iG(k) − λ0) (total) and of each tracked band around λ0.
pub fn winding(symbol: &BlochSymbol, lambda0: C64, k_count: usize) -> Result<WindingResult> {
    let curves = bulk_bands(symbol, k_count)?;
    let scale = curves
        .bands
        .iter()
        .flatten()
        .map(|z| z.norm())
        .fold(1.0 + lambda0.norm(), f64::max);
    let min_distance = curves
        .bands
        .iter()
        .flatten()
        .map(|z| (z - lambda0).norm())
        .fold(f64::INFINITY, f64::min);
    if min_distance < 1e-9 * scale {
        return Err(QblError::Numerical(format!(
            "a band passes within {min_distance:.3e} of the reference point; winding is ill-defined"
        )));
    }

    // Total from the accumulated argument of det(−iG(k) − λ0).
    let dets: Vec<C64> = curves
        .k
        .iter()
        .map(|&k| {
            let mut x = symbol.neg_i_at(k);
            for i in 0..x.nrows() {
                x[[i, i]] -= lambda0;
            }
            x[[0, 0]] * x[[1, 1]] - x[[0, 1]] * x[[1, 0]]
        })
        .collect();
    let total_f = accumulated_winding(&dets, C64::new(0.0, 0.0), "determinant")?;
    let total_round = total_f.round();
    if (total_f - total_round).abs() >= 0.1 {
        return Err(QblError::Numerical(format!(
            "winding residual {:.3} too large; increase k_count",
            (total_f - total_round).abs()
        )));
    }

    let mut band_windings = Vec::new();
    if curves.closed {
        for band in &curves.bands {
            let w = accumulated_winding(band, lambda0, "band")?;
            let r = w.round();
            if (w - r).abs() >= 0.1 {
                return Err(QblError::Numerical(
                    "per-band winding residual too large; increase k_count".into(),
                ));
            }
            band_windings.push(r as i64);
        }
    } else {
        // Bands permute after one cycle: only the merged cycle carries a
        // well-defined integer winding; report it as a single entry.
        band_windings.push(total_round as i64);
    }

    Ok(WindingResult {
        band_windings,
        total: total_round as i64,
        reference: lambda0,
        min_distance,
    })
}
