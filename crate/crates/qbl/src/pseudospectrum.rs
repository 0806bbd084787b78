//! ε-pseudospectra via smallest-singular-value grids, pseudospectral
//! abscissas, transient-growth lower bounds, pseudoeigenvector extraction,
//! and the bulk numerical-abscissa constant Ω.

use ndarray::Array2;
use rayon::prelude::*;

use crate::linalg::{eigenvalues, eigh_herm, sigma_min, smallest_singular_pairs};
use crate::models::BlochSymbol;
use crate::nambu::ModeVector;
use crate::{C64, CMatrix, QblError, Result};

/// Complex-plane rectangle.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Region {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Region {
    pub fn validate(&self) -> Result<()> {
        if !(self.re_max > self.re_min && self.im_max > self.im_min) {
            return Err(QblError::InvalidParameter("degenerate region".into()));
        }
        Ok(())
    }
}

/// Grid sides; both must be at least 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct GridResolution {
    pub n_re: usize,
    pub n_im: usize,
}

impl GridResolution {
    pub fn validate(&self) -> Result<()> {
        if self.n_re < 2 || self.n_im < 2 {
            return Err(QblError::InvalidParameter("resolution must be at least 2×2".into()));
        }
        Ok(())
    }
}

/// Default plotting resolution.
pub const DEFAULT_RESOLUTION: GridResolution = GridResolution { n_re: 200, n_im: 200 };

/// σ_min(A − λ·1) sampled over a rectangle; `values[[i_im, i_re]]` pairs with
/// `(re[i_re], im[i_im])`.
#[derive(Debug, Clone)]
pub struct PseudospectrumGrid {
    pub region: Region,
    pub re: Vec<f64>,
    pub im: Vec<f64>,
    pub values: Array2<f64>,
}

fn shifted(a: &CMatrix, lambda: C64) -> CMatrix {
    let mut s = a.clone();
    for i in 0..s.nrows() {
        s[[i, i]] -= lambda;
    }
    s
}

/// σ_min(A − λ) at a single point.
pub fn sigma_min_at(a: &CMatrix, lambda: C64) -> f64 {
    sigma_min(&shifted(a, lambda))
}

/// Exact smallest singular values of (A − λ·1) over the grid. Grid points
/// are independent and evaluated in parallel; assembly is by index, so the
/// result does not depend on the evaluation order.
pub fn sigma_min_grid(a: &CMatrix, region: Region, resolution: GridResolution) -> Result<PseudospectrumGrid> {
    region.validate()?;
    resolution.validate()?;
    let re: Vec<f64> = (0..resolution.n_re)
        .map(|i| region.re_min + (region.re_max - region.re_min) * i as f64 / (resolution.n_re - 1) as f64)
        .collect();
    let im: Vec<f64> = (0..resolution.n_im)
        .map(|i| region.im_min + (region.im_max - region.im_min) * i as f64 / (resolution.n_im - 1) as f64)
        .collect();
    let points: Vec<(usize, usize)> = (0..resolution.n_im)
        .flat_map(|j| (0..resolution.n_re).map(move |i| (j, i)))
        .collect();
    let flat: Vec<f64> = points
        .par_iter()
        .map(|&(j, i)| sigma_min_at(a, C64::new(re[i], im[j])))
        .collect();
    let mut values = Array2::zeros((resolution.n_im, resolution.n_re));
    for (idx, &(j, i)) in points.iter().enumerate() {
        values[[j, i]] = flat[idx];
    }
    Ok(PseudospectrumGrid { region, re, im, values })
}

/// Rectangle enclosing the eigenvalues of A, padded by `pad` of its extent
/// on every side.
pub fn eigenvalue_hull_region(a: &CMatrix, pad: f64) -> Result<Region> {
    let eigs = eigenvalues(a)?;
    let mut re_min = f64::INFINITY;
    let mut re_max = f64::NEG_INFINITY;
    let mut im_min = f64::INFINITY;
    let mut im_max = f64::NEG_INFINITY;
    for z in eigs.iter() {
        re_min = re_min.min(z.re);
        re_max = re_max.max(z.re);
        im_min = im_min.min(z.im);
        im_max = im_max.max(z.im);
    }
    // A one-line spectrum (all Re equal, the OBC vertical-line case) must
    // still produce a two-dimensional region: pad both axes by the larger
    // extent.
    let ext = (re_max - re_min).max(im_max - im_min).max(1e-3);
    Ok(Region {
        re_min: re_min - pad * ext,
        re_max: re_max + pad * ext,
        im_min: im_min - pad * ext,
        im_max: im_max + pad * ext,
    })
}

/// Pseudospectral abscissa α_ε(A) = max Re σ_ε(A), from a grid sweep plus
/// one-dimensional bisection along Re at the maximizing Im. Converges from
/// below (the result is a point verified to satisfy σ_min ≤ ε).
pub fn pseudo_abscissa(
    a: &CMatrix,
    epsilon: f64,
    region: Option<Region>,
    resolution: GridResolution,
    refine_tol: f64,
) -> Result<f64> {
    if epsilon <= 0.0 {
        return Err(QblError::InvalidParameter("epsilon must be positive".into()));
    }
    let mut region = match region {
        Some(r) => r,
        None => eigenvalue_hull_region(a, 0.2)?,
    };

    // Expand to the right until the ε-sublevel set detaches from the border.
    for _ in 0..8 {
        let edge_hit = {
            let n_im = resolution.n_im;
            (0..n_im).into_par_iter().any(|j| {
                let im = region.im_min + (region.im_max - region.im_min) * j as f64 / (n_im - 1) as f64;
                sigma_min_at(a, C64::new(region.re_max, im)) <= epsilon
            })
        };
        if !edge_hit {
            break;
        }
        region.re_max += region.re_max - region.re_min;
    }

    let grid = sigma_min_grid(a, region, resolution)?;
    let mut best: Option<(f64, f64)> = None;
    let mut consider = |re: f64, im: f64| match best {
        Some((bre, _)) if re <= bre => {}
        _ => best = Some((re, im)),
    };
    for j in 0..grid.im.len() {
        for i in 0..grid.re.len() {
            if grid.values[[j, i]] <= epsilon {
                consider(grid.re[i], grid.im[j]);
            }
        }
    }
    // Eigenvalues belong to σ_ε for every ε; seed the search with any that
    // fall inside the region (the grid can miss very small ε-disks).
    for z in eigenvalues(a)?.iter() {
        if z.re >= region.re_min && z.re <= region.re_max && z.im >= region.im_min && z.im <= region.im_max {
            consider(z.re, z.im);
        }
    }
    let (re0, im) = best.ok_or_else(|| {
        QblError::Numerical(format!(
            "epsilon = {epsilon:.3e} is below the grid minimum {:.3e}: empty pseudospectrum in region",
            grid.values.iter().cloned().fold(f64::INFINITY, f64::min)
        ))
    })?;

    // Bisect along Re at the maximizing Im for the ε-crossing.
    let dx = grid.re[1] - grid.re[0];
    let mut lo = re0;
    let mut hi = lo + dx;
    while sigma_min_at(a, C64::new(hi, im)) <= epsilon {
        lo = hi;
        hi += dx.max(refine_tol);
    }
    while hi - lo > refine_tol {
        let mid = 0.5 * (lo + hi);
        if sigma_min_at(a, C64::new(mid, im)) <= epsilon {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(lo)
}

/// Kreiss-style transient bound for one ε: (ε, α_ε, α_ε/ε).
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct TransientBoundEntry {
    pub epsilon: f64,
    pub abscissa: f64,
    pub bound: f64,
}

/// Lower bounds sup_t ‖e^{At}‖₂ ≥ α_ε(A)/ε for each ε, plus the best one.
#[derive(Debug, Clone, serde::Serialize)]
pub struct TransientBound {
    pub entries: Vec<TransientBoundEntry>,
    pub best: f64,
}

/// Evaluate α_ε/ε over the supplied ε values.
pub fn transient_bound(
    a: &CMatrix,
    epsilons: &[f64],
    region: Option<Region>,
    resolution: GridResolution,
    refine_tol: f64,
) -> Result<TransientBound> {
    if epsilons.is_empty() {
        return Err(QblError::InvalidParameter("need at least one epsilon".into()));
    }
    let mut entries = Vec::with_capacity(epsilons.len());
    for &eps in epsilons {
        let alpha = pseudo_abscissa(a, eps, region, resolution, refine_tol)?;
        entries.push(TransientBoundEntry { epsilon: eps, abscissa: alpha, bound: alpha / eps });
    }
    let best = entries.iter().map(|e| e.bound).fold(f64::NEG_INFINITY, f64::max);
    Ok(TransientBound { entries, best })
}

/// Log-spaced default ε set 1e−1 … 1e−10.
pub fn default_epsilons() -> Vec<f64> {
    (1..=10).map(|k| 10f64.powi(-k)).collect()
}

/// The size-independent constant Ω = max_k λ_max(Herm(−iG(k))): the
/// numerical abscissa of the bulk generator. Positive in metastable regimes;
/// ‖e^{−iG t}‖₂ ≤ e^{Ωt} for every OBC truncation.
pub fn omega_constant(symbol: &BlochSymbol, k_count: usize) -> Result<f64> {
    let k_count = k_count.max(64);
    let herm_max = |k: f64| -> Result<f64> {
        let x = symbol.neg_i_at(k);
        let xh = x.t().mapv(|z| z.conj());
        let h = (&x + &xh).mapv(|z| z * C64::new(0.5, 0.0));
        let (vals, _) = eigh_herm(&h)?;
        Ok(vals[vals.len() - 1])
    };
    let mut best_k = 0.0;
    let mut best = f64::NEG_INFINITY;
    for i in 0..k_count {
        let k = 2.0 * std::f64::consts::PI * i as f64 / k_count as f64;
        let v = herm_max(k)?;
        if v > best {
            best = v;
            best_k = k;
        }
    }
    // Golden-section refinement around the best grid point.
    let dk = 2.0 * std::f64::consts::PI / k_count as f64;
    let (mut lo, mut hi) = (best_k - dk, best_k + dk);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = hi - phi * (hi - lo);
    let mut x2 = lo + phi * (hi - lo);
    let mut f1 = herm_max(x1)?;
    let mut f2 = herm_max(x2)?;
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = herm_max(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = herm_max(x1)?;
        }
    }
    Ok(best.max(f1).max(f2))
}

/// A pseudoeigenpair: the right singular vector of (A − λ) for σ_min.
#[derive(Debug, Clone)]
pub struct PseudoMode {
    pub lambda: C64,
    pub sigma_min: f64,
    pub vector: ModeVector,
}

/// Extract the ε-pseudoeigenvector of A at λ.
pub fn pseudo_mode(a: &CMatrix, lambda: C64) -> Result<PseudoMode> {
    let s = shifted(a, lambda);
    let pairs = smallest_singular_pairs(&s, 1)?;
    let (sigma, v) = pairs.into_iter().next().ok_or_else(|| QblError::Linalg("empty SVD".into()))?;
    Ok(PseudoMode { lambda, sigma_min: sigma, vector: ModeVector::new(v)? })
}

/// Closed contour segments of log10 σ_min = level, by marching squares with
/// linear interpolation. Returns polylines in (re, im) coordinates.
pub fn contour_polylines(grid: &PseudospectrumGrid, level_log10: f64) -> Vec<Vec<(f64, f64)>> {
    let f = grid.values.mapv(|v| v.max(1e-300).log10());
    let (nj, ni) = (grid.im.len(), grid.re.len());
    let mut segments: Vec<((f64, f64), (f64, f64))> = Vec::new();
    let interp = |va: f64, vb: f64| (level_log10 - va) / (vb - va);
    for j in 0..nj - 1 {
        for i in 0..ni - 1 {
            let corners = [
                (f[[j, i]], grid.re[i], grid.im[j]),
                (f[[j, i + 1]], grid.re[i + 1], grid.im[j]),
                (f[[j + 1, i + 1]], grid.re[i + 1], grid.im[j + 1]),
                (f[[j + 1, i]], grid.re[i], grid.im[j + 1]),
            ];
            let mut crossings: Vec<(f64, f64)> = Vec::new();
            for e in 0..4 {
                let (va, xa, ya) = corners[e];
                let (vb, xb, yb) = corners[(e + 1) % 4];
                if (va - level_log10) * (vb - level_log10) < 0.0 {
                    let t = interp(va, vb);
                    crossings.push((xa + t * (xb - xa), ya + t * (yb - ya)));
                }
            }
            if crossings.len() == 2 {
                segments.push((crossings[0], crossings[1]));
            } else if crossings.len() == 4 {
                segments.push((crossings[0], crossings[1]));
                segments.push((crossings[2], crossings[3]));
            }
        }
    }
    segments.into_iter().map(|(a, b)| vec![a, b]).collect()
}
