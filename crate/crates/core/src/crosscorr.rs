//! Equal-time cross-correlation matrix, its spectrum and the analytic
//! Wishart (Marchenko-Pastur) null model used to screen it.
//!
//! For N uncorrelated series of length T with Q = T/N >= 1 the eigenvalue
//! density of the correlation matrix is
//!
//! ```text
//! P_rm(lambda) = Q/(2 pi) * sqrt((l_max - lambda)(lambda - l_min)) / lambda
//! l_min/max    = (1 -/+ 1/sqrt(Q))^2
//! ```
//!
//! Eigenvalues above `l_max` signal non-random structure; the largest one is
//! the market mode.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::panel::ReturnPanel;

/// Symmetric N x N matrix of time-averaged products of normalized returns.
#[derive(Debug, Clone)]
pub struct CorrelationMatrix {
    matrix: DMatrix<f64>,
}

impl CorrelationMatrix {
    pub fn n(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.matrix[(i, j)]
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Wrap a matrix that is already a valid correlation matrix (symmetric,
    /// unit diagonal, entries in [-1, 1]).
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        debug_assert_eq!(matrix.nrows(), matrix.ncols());
        Self { matrix }
    }
}

/// C_ij = <r_i(t) r_j(t)>, time-averaged over the shared axis. Symmetry is
/// enforced by averaging with the transpose; the diagonal is set to exactly 1
/// and off-diagonals clamped to [-1, 1] against rounding.
pub fn correlation_matrix(panel: &ReturnPanel) -> CorrelationMatrix {
    let t = panel.n_days() as f64;
    let r = &panel.returns;
    let mut c = r * r.transpose() / t;
    let ct = c.transpose();
    c = (&c + &ct) / 2.0;
    let n = c.nrows();
    for i in 0..n {
        c[(i, i)] = 1.0;
        for j in 0..n {
            if i != j {
                c[(i, j)] = c[(i, j)].clamp(-1.0, 1.0);
            }
        }
    }
    CorrelationMatrix { matrix: c }
}

/// Density of off-diagonal correlations plus their mean.
#[derive(Debug, Clone, Serialize)]
pub struct CijHistogram {
    /// bin edges, len = bins + 1
    pub edges: Vec<f64>,
    /// density per bin, integrates to 1
    pub density: Vec<f64>,
    pub mean: f64,
    pub n_pairs: usize,
}

/// Histogram the upper-triangle off-diagonal entries of C over [-1, 1].
pub fn cij_histogram(c: &CorrelationMatrix, bins: usize) -> CijHistogram {
    assert!(bins >= 1);
    let n = c.n();
    assert!(n >= 2, "need at least a 2x2 matrix");
    let mut values = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            values.push(c.get(i, j));
        }
    }
    let lo = -1.0;
    let hi = 1.0;
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in &values {
        let k = (((v - lo) / width) as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = values.len() as f64;
    CijHistogram {
        edges: (0..=bins).map(|k| lo + width * k as f64).collect(),
        density: counts.iter().map(|&c| c as f64 / (total * width)).collect(),
        mean: crate::stats::mean(&values),
        n_pairs: values.len(),
    }
}

/// Support of the Marchenko-Pastur eigenvalue density for aspect ratio Q = T/N.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MpBounds {
    pub q: f64,
    pub lambda_min_ran: f64,
    pub lambda_max_ran: f64,
}

/// Closed-form bounds (1 -/+ 1/sqrt(Q))^2; requires T >= N >= 1.
pub fn mp_bounds(n: usize, t: usize) -> Result<MpBounds> {
    if n == 0 || t < n {
        return Err(Error::OutOfMpRegime {
            n,
            t,
            q: if n == 0 { f64::NAN } else { t as f64 / n as f64 },
        });
    }
    let q = t as f64 / n as f64;
    let s = 1.0 / q.sqrt();
    Ok(MpBounds {
        q,
        lambda_min_ran: (1.0 - s) * (1.0 - s),
        lambda_max_ran: (1.0 + s) * (1.0 + s),
    })
}

/// Marchenko-Pastur density at `lambda`; zero outside the support.
pub fn mp_density(lambda: f64, q: f64) -> f64 {
    assert!(q >= 1.0, "mp_density is stated for Q >= 1");
    let s = 1.0 / q.sqrt();
    let lmin = (1.0 - s) * (1.0 - s);
    let lmax = (1.0 + s) * (1.0 + s);
    if lambda <= lmin || lambda >= lmax {
        return 0.0;
    }
    q / (2.0 * std::f64::consts::PI) * ((lmax - lambda) * (lambda - lmin)).sqrt() / lambda
}

/// Identifier of the eigenvector sign convention applied by
/// [`eigendecompose`]; recorded in serialized output so runs are comparable.
pub const SIGN_CONVENTION: &str = "largest-abs-component-positive";

/// Full spectrum of a correlation matrix, eigenvalues descending, with the
/// MP bounds it is screened against.
#[derive(Debug, Clone)]
pub struct CorrelationSpectrum {
    /// descending: eigenvalues[0] is the market mode
    pub eigenvalues: Vec<f64>,
    /// row alpha = eigenvector of eigenvalues[alpha]
    pub vectors: DMatrix<f64>,
    pub bounds: MpBounds,
    /// mode flagged when its eigenvalue is numerically repeated, making the
    /// eigenbasis (and any subsector built on it) basis-dependent
    pub degenerate: Vec<bool>,
}

impl CorrelationSpectrum {
    pub fn n(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Component of stock `i` in the eigenvector of mode `alpha`.
    pub fn component(&self, alpha: usize, i: usize) -> f64 {
        self.vectors[(alpha, i)]
    }

    pub fn vector(&self, alpha: usize) -> Vec<f64> {
        self.vectors.row(alpha).iter().copied().collect()
    }
}

/// Relative gap below which two adjacent eigenvalues count as degenerate.
const DEGENERACY_RTOL: f64 = 1e-10;

/// Eigendecompose a correlation matrix and screen it against the MP bounds
/// for the given panel shape (N, T).
///
/// Eigenvalues are sorted descending; each eigenvector is flipped so its
/// largest-magnitude component is positive (the +/- subsector split is only
/// defined up to a global sign).
pub fn eigendecompose(c: &CorrelationMatrix, t: usize) -> Result<CorrelationSpectrum> {
    let n = c.n();
    let bounds = mp_bounds(n, t)?;
    // implicit-shift iteration converges in a handful of sweeps per
    // eigenvalue; 100 n is a generous total budget
    let eig = SymmetricEigen::try_new(c.matrix.clone(), f64::EPSILON, 100 * n)
        .ok_or(Error::EigenConvergence { n })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .expect("eigenvalues are finite")
    });

    let mut eigenvalues = Vec::with_capacity(n);
    let mut vectors = DMatrix::zeros(n, n);
    for (alpha, &k) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[k]);
        let col = eig.eigenvectors.column(k);
        // sign convention: largest |component| positive, ties to lowest index
        let mut imax = 0;
        for i in 1..n {
            if col[i].abs() > col[imax].abs() {
                imax = i;
            }
        }
        let flip = if col[imax] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            vectors[(alpha, i)] = flip * col[i];
        }
    }

    let mut degenerate = vec![false; n];
    let scale = eigenvalues[0].abs().max(1.0);
    for a in 1..n {
        if (eigenvalues[a - 1] - eigenvalues[a]).abs() <= DEGENERACY_RTOL * scale {
            degenerate[a - 1] = true;
            degenerate[a] = true;
        }
    }

    Ok(CorrelationSpectrum {
        eigenvalues,
        vectors,
        bounds,
        degenerate,
    })
}

/// Modes whose eigenvalue exceeds the MP upper bound, in descending order.
/// Index 0, when present, is the market mode.
pub fn deviating_modes(spectrum: &CorrelationSpectrum) -> Vec<usize> {
    spectrum
        .eigenvalues
        .iter()
        .enumerate()
        .take_while(|(_, &l)| l > spectrum.bounds.lambda_max_ran)
        .map(|(a, _)| a)
        .collect()
}

/// Mode-alpha contribution to C_ij: u_i(alpha) * u_j(alpha). Weighted by
/// lambda_alpha and summed over alpha this reconstructs C_ij.
pub fn mode_correlation(
    spectrum: &CorrelationSpectrum,
    alpha: usize,
    i: usize,
    j: usize,
) -> Result<f64> {
    let n = spectrum.n();
    for idx in [alpha, i, j] {
        if idx >= n {
            return Err(Error::IndexOutOfRange { index: idx, len: n });
        }
    }
    Ok(spectrum.component(alpha, i) * spectrum.component(alpha, j))
}

/// Serialized spectrum layout: eigenvalues, bounds, row-major eigenvectors
/// and the sign convention in force.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpectrumJson {
    pub eigenvalues: Vec<f64>,
    pub bounds: MpBounds,
    /// row-major: vectors[alpha * n + i] = u_i(lambda_alpha)
    pub vectors: Vec<f64>,
    pub sign_convention: String,
    pub degenerate_modes: Vec<usize>,
}

impl SpectrumJson {
    pub fn from_spectrum(s: &CorrelationSpectrum) -> Self {
        let n = s.n();
        let mut vectors = Vec::with_capacity(n * n);
        for alpha in 0..n {
            for i in 0..n {
                vectors.push(s.vectors[(alpha, i)]);
            }
        }
        Self {
            eigenvalues: s.eigenvalues.clone(),
            bounds: s.bounds,
            vectors,
            sign_convention: SIGN_CONVENTION.to_string(),
            degenerate_modes: s
                .degenerate
                .iter()
                .enumerate()
                .filter(|(_, &d)| d)
                .map(|(a, _)| a)
                .collect(),
        }
    }

    pub fn to_spectrum(&self) -> CorrelationSpectrum {
        let n = self.eigenvalues.len();
        let vectors = DMatrix::from_row_slice(n, n, &self.vectors);
        let mut degenerate = vec![false; n];
        for &a in &self.degenerate_modes {
            degenerate[a] = true;
        }
        CorrelationSpectrum {
            eigenvalues: self.eigenvalues.clone(),
            vectors,
            bounds: self.bounds,
            degenerate,
        }
    }
}
