//! Dense symmetric eigendecomposition and the spectral statistics of random
//! graphs: Perron eigenpair, spectral ratio, delocalization of the principal
//! eigenvector, the semicircle bulk and the normalized Laplacian.

use std::f64::consts::PI;

use faer::{Mat, MatRef, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Graph, GraphModel};
use crate::io::{csv_string, fmt_f64};

/// Relative tolerance on `max |A - A^T|` accepted by [`eigendecompose`].
pub const SYMMETRY_TOLERANCE: f64 = 1e-12;

/// Relative tolerance under which two eigenvalues count as degenerate.
pub const DEGENERACY_TOLERANCE: f64 = 1e-9;

/// Full eigendecomposition of a real symmetric matrix.
///
/// Eigenvalues are sorted in non-increasing order and column `k` of the
/// eigenvector matrix belongs to eigenvalue `k`. Each eigenvector is
/// oriented so that its largest-magnitude component is positive (ties go to
/// the lowest index), which makes serialized output reproducible.
#[derive(Clone, Debug)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: Mat<f64>,
}

pub(crate) fn max_abs(a: MatRef<'_, f64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}

/// Checks that `a` is square and symmetric within [`SYMMETRY_TOLERANCE`].
pub fn check_symmetric(a: MatRef<'_, f64>) -> Result<()> {
    if a.nrows() != a.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.nrows(),
            found: a.ncols(),
        });
    }
    let n = a.nrows();
    let mut asym = 0.0f64;
    for j in 0..n {
        for i in (j + 1)..n {
            asym = asym.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    if !(asym <= SYMMETRY_TOLERANCE * max_abs(a).max(1.0)) {
        return Err(Error::NotSymmetric {
            max_asymmetry: asym,
        });
    }
    Ok(())
}

fn orient(col: &mut [f64]) {
    let peak = col.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if peak == 0.0 {
        return;
    }
    let cutoff = peak * (1.0 - 1e-12);
    let lead = col
        .iter()
        .position(|x| x.abs() >= cutoff)
        .expect("peak component exists");
    if col[lead] < 0.0 {
        col.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Eigendecomposition of a symmetric matrix.
pub fn eigendecompose(a: MatRef<'_, f64>) -> Result<Spectrum> {
    check_symmetric(a)?;
    let n = a.nrows();
    if n == 0 {
        return Ok(Spectrum {
            eigenvalues: Vec::new(),
            eigenvectors: Mat::zeros(0, 0),
        });
    }
    let evd = a
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("eigensolver did not converge: {e:?}")))?;
    let values = evd.S().column_vector();
    let vectors = evd.U();
    // faer returns ascending order; reverse it.
    let eigenvalues: Vec<f64> = (0..n).rev().map(|k| values[k]).collect();
    let mut eigenvectors = Mat::zeros(n, n);
    let mut buf = vec![0.0; n];
    for (dst, src) in (0..n).rev().enumerate() {
        for (i, b) in buf.iter_mut().enumerate() {
            *b = vectors[(i, src)];
        }
        orient(&mut buf);
        for (i, &b) in buf.iter().enumerate() {
            eigenvectors[(i, dst)] = b;
        }
    }
    Ok(Spectrum {
        eigenvalues,
        eigenvectors,
    })
}

impl Spectrum {
    /// Assembles a spectrum from given parts, checking ordering and
    /// orthonormality (`|V^T V - I| <= 1e-10`).
    pub fn from_parts(eigenvalues: Vec<f64>, eigenvectors: Mat<f64>) -> Result<Self> {
        let n = eigenvalues.len();
        if eigenvectors.nrows() != n || eigenvectors.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: eigenvectors.ncols(),
            });
        }
        if eigenvalues.windows(2).any(|w| !(w[0] >= w[1])) {
            return Err(Error::param("eigenvalues", "must be sorted non-increasing"));
        }
        let gram = eigenvectors.transpose() * &eigenvectors;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                if (gram[(i, j)] - target).abs() > 1e-10 {
                    return Err(Error::param("eigenvectors", "columns are not orthonormal"));
                }
            }
        }
        Ok(Spectrum {
            eigenvalues,
            eigenvectors,
        })
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> MatRef<'_, f64> {
        self.eigenvectors.as_ref()
    }

    /// Eigenvector `k` (0-based, in descending eigenvalue order).
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        (0..self.dim()).map(|i| self.eigenvectors[(i, k)]).collect()
    }

    /// Component `i` of eigenvector `k`, i.e. `<i|v_k>`.
    #[inline]
    pub fn component(&self, i: usize, k: usize) -> f64 {
        self.eigenvectors[(i, k)]
    }

    pub fn largest(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn smallest(&self) -> f64 {
        self.eigenvalues[self.dim() - 1]
    }

    /// Spectrum of `scale * A + shift * I` (requires `scale > 0` so the order
    /// is kept).
    pub fn affine(&self, scale: f64, shift: f64) -> Result<Spectrum> {
        if !(scale > 0.0) {
            return Err(Error::param("scale", format!("{scale} must be positive")));
        }
        Ok(Spectrum {
            eigenvalues: self.eigenvalues.iter().map(|&l| scale * l + shift).collect(),
            eigenvectors: self.eigenvectors.clone(),
        })
    }

    /// `V diag(lambda) V^T`.
    pub fn reconstruct(&self) -> Mat<f64> {
        let n = self.dim();
        let scaled = Mat::from_fn(n, n, |i, k| self.eigenvectors[(i, k)] * self.eigenvalues[k]);
        &scaled * self.eigenvectors.transpose()
    }

    /// Distinct eigenvalues with their multiplicities, descending. Values
    /// within `DEGENERACY_TOLERANCE * max(1, |lambda_1|)` of each other are merged.
    pub fn multiplicities(&self) -> Vec<(f64, usize)> {
        let Some(&first) = self.eigenvalues.first() else {
            return Vec::new();
        };
        let tol = DEGENERACY_TOLERANCE * first.abs().max(1.0);
        let mut out: Vec<(f64, usize)> = Vec::new();
        let mut anchor = f64::NAN;
        for &l in &self.eigenvalues {
            match out.last_mut() {
                Some((_, m)) if (anchor - l).abs() <= tol => *m += 1,
                _ => {
                    anchor = l;
                    out.push((l, 1));
                }
            }
        }
        out
    }

    /// CSV with columns `index,eigenvalue`; the index is 1-based.
    pub fn to_csv(&self) -> String {
        csv_string(
            &["index", "eigenvalue"],
            self.eigenvalues
                .iter()
                .enumerate()
                .map(|(k, &l)| vec![(k + 1).to_string(), fmt_f64(l)]),
        )
    }
}

/// Spectral summary of a graph's adjacency matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    pub n: usize,
    pub gamma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda_min: f64,
    /// `max(|lambda_2|, |lambda_n|) / lambda_1`; infinite when `lambda_1 <= 0`.
    #[serde(with = "nonfinite")]
    pub ratio_c: f64,
    /// `<s|v_1>` with `v_1` oriented non-negatively.
    pub alpha: f64,
    /// Lower bound on `alpha^2` from the concentration of `gamma * A`; only
    /// defined for Erdős–Rényi graphs.
    pub delocalization_rhs: Option<f64>,
    #[serde(with = "nonfinite")]
    pub wigner_radius: f64,
}

/// Serializes non-finite floats as strings so JSON stays valid.
mod nonfinite {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(x: &f64, s: S) -> Result<S::Ok, S::Error> {
        if x.is_finite() {
            s.serialize_f64(*x)
        } else {
            s.serialize_str(&x.to_string())
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Text(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(x) => Ok(x),
            Repr::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// `max(|lambda_2|, |lambda_n|) / lambda_1`.
pub fn ratio_c(spectrum: &Spectrum) -> f64 {
    let l1 = spectrum.largest();
    if !(l1 > 0.0) {
        return f64::INFINITY;
    }
    if spectrum.dim() < 2 {
        return 0.0;
    }
    let l2 = spectrum.eigenvalues()[1];
    l2.abs().max(spectrum.smallest().abs()) / l1
}

/// Overlap of the uniform state with the principal eigenvector, clamped to
/// `[0, 1]`.
pub fn principal_overlap(spectrum: &Spectrum) -> f64 {
    let n = spectrum.dim();
    let sum: f64 = (0..n).map(|i| spectrum.component(i, 0)).sum();
    (sum.abs() / (n as f64).sqrt()).min(1.0)
}

/// Edge probability used for the random-matrix formulas: the model parameter
/// for Erdős–Rényi graphs, the empirical edge density otherwise.
pub fn effective_p(g: &Graph) -> f64 {
    match g.model() {
        GraphModel::ErdosRenyi => g.param(),
        _ => g.density(),
    }
}

/// Semicircle radius of `gamma_p * A'` for `gamma_p = 1/(np)`.
pub fn wigner_radius(n: usize, p: f64) -> f64 {
    let np = n as f64 * p;
    2.0 * ((1.0 - p) / np).sqrt()
}

/// `gamma * lambda_1 - (2 + (np)^(-1/4) ln n) / sqrt(np)`.
pub fn delocalization_bound(n: usize, p: f64, gamma_lambda1: f64) -> f64 {
    let np = n as f64 * p;
    gamma_lambda1 - (2.0 + np.powf(-0.25) * (n as f64).ln()) / np.sqrt()
}

pub fn spectral_report(g: &Graph, gamma: f64) -> Result<SpectralReport> {
    let spectrum = eigendecompose(g.adjacency_matrix().as_ref())?;
    Ok(spectral_report_from(g, &spectrum, gamma))
}

/// Builds the report from an already computed adjacency spectrum.
pub fn spectral_report_from(g: &Graph, spectrum: &Spectrum, gamma: f64) -> SpectralReport {
    let n = g.n();
    let p = effective_p(g);
    let lambda1 = spectrum.largest();
    let delocalization_rhs = (g.model() == GraphModel::ErdosRenyi && p > 0.0)
        .then(|| delocalization_bound(n, p, gamma * lambda1));
    SpectralReport {
        n,
        gamma,
        lambda1,
        lambda2: if n > 1 { spectrum.eigenvalues()[1] } else { lambda1 },
        lambda_min: spectrum.smallest(),
        ratio_c: ratio_c(spectrum),
        alpha: principal_overlap(spectrum),
        delocalization_rhs,
        wigner_radius: wigner_radius(n, p),
    }
}

/// Semicircle density of the adjacency bulk of `G(n, p)`.
pub fn semicircle_density(lambda: f64, n: usize, p: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::param("n", "must be at least 1"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::param("p", format!("{p} gives a degenerate variance")));
    }
    let var = n as f64 * p * (1.0 - p);
    let radius = 2.0 * var.sqrt();
    if lambda.abs() >= radius {
        return Ok(0.0);
    }
    Ok((4.0 * var - lambda * lambda).sqrt() / (2.0 * PI * var))
}

/// A normalized histogram: `edges.len() == densities.len() + 1` and
/// `sum(density * width) == 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    pub densities: Vec<f64>,
}

impl Histogram {
    pub fn bins(&self) -> usize {
        self.densities.len()
    }

    /// Total mass `sum(density * width)`.
    pub fn mass(&self) -> f64 {
        self.densities
            .iter()
            .zip(self.edges.windows(2))
            .map(|(d, e)| d * (e[1] - e[0]))
            .sum()
    }

    /// Step-function value at `x` (zero outside the binned range).
    pub fn density_at(&self, x: f64) -> f64 {
        let last = self.edges.len() - 1;
        if x < self.edges[0] || x > self.edges[last] {
            return 0.0;
        }
        let k = self.edges.partition_point(|&e| e <= x).saturating_sub(1);
        self.densities[k.min(self.bins() - 1)]
    }

    /// CSV with columns `bin_left,bin_right,density`.
    pub fn to_csv(&self) -> String {
        csv_string(
            &["bin_left", "bin_right", "density"],
            self.densities
                .iter()
                .zip(self.edges.windows(2))
                .map(|(d, e)| vec![fmt_f64(e[0]), fmt_f64(e[1]), fmt_f64(*d)]),
        )
    }
}

/// Histogram of all eigenvalues except the largest, over their own range.
pub fn empirical_bulk_density(s: &Spectrum, bins: usize) -> Result<Histogram> {
    if bins < 2 {
        return Err(Error::param("bins", "need at least 2 bins"));
    }
    let bulk = s.eigenvalues().get(1..).unwrap_or(&[]);
    if bulk.is_empty() {
        return Err(Error::param("spectrum", "no eigenvalues besides the largest"));
    }
    let lo = bulk.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = bulk.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let (lo, hi) = if hi - lo <= 1e-12 * lo.abs().max(1.0) {
        (lo - 0.5, lo + 0.5)
    } else {
        (lo, hi)
    };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|k| lo + k as f64 * width).collect();
    let mut counts = vec![0usize; bins];
    for &l in bulk {
        let k = (((l - lo) / width).floor() as usize).min(bins - 1);
        counts[k] += 1;
    }
    let total = bulk.len() as f64;
    let densities = counts.iter().map(|&c| c as f64 / (total * width)).collect();
    Ok(Histogram { edges, densities })
}

/// `L' = I - D^(-1/2) A D^(-1/2)` with the rows and columns of isolated
/// vertices in `D^(-1/2) A D^(-1/2)` set to zero.
#[derive(Clone, Debug)]
pub struct NormalizedLaplacian {
    pub matrix: Mat<f64>,
    /// Vertices of degree zero.
    pub isolated: Vec<usize>,
}

pub fn normalized_laplacian(g: &Graph) -> NormalizedLaplacian {
    let n = g.n();
    let inv_sqrt: Vec<f64> = g
        .degrees()
        .into_iter()
        .map(|d| if d == 0 { 0.0 } else { 1.0 / (d as f64).sqrt() })
        .collect();
    let isolated = (0..n).filter(|&i| inv_sqrt[i] == 0.0).collect();
    let matrix = Mat::from_fn(n, n, |i, j| {
        let off = if g.has_edge(i, j) {
            inv_sqrt[i] * inv_sqrt[j]
        } else {
            0.0
        };
        if i == j {
            1.0 - off
        } else {
            -off
        }
    });
    NormalizedLaplacian { matrix, isolated }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, erdos_renyi, random_regular};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    fn check_invariants(a: MatRef<'_, f64>, s: &Spectrum) {
        let n = s.dim();
        assert!(s.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
        let gram = s.eigenvectors().transpose() * s.eigenvectors();
        for i in 0..n {
            for j in 0..n {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!(close(gram[(i, j)], t, 1e-10));
            }
        }
        let recon = s.reconstruct();
        let scale = max_abs(a).max(1.0);
        assert!(max_abs((&recon - a).as_ref()) <= 1e-8 * scale);
    }

    #[test]
    fn k3_and_zero_matrix() {
        let a = complete(3).unwrap().adjacency_matrix();
        let s = eigendecompose(a.as_ref()).unwrap();
        assert!(close(s.eigenvalues()[0], 2.0, 1e-12));
        assert!(close(s.eigenvalues()[1], -1.0, 1e-12));
        assert!(close(s.eigenvalues()[2], -1.0, 1e-12));
        check_invariants(a.as_ref(), &s);

        let z = Mat::<f64>::zeros(4, 4);
        let s = eigendecompose(z.as_ref()).unwrap();
        assert_eq!(s.eigenvalues(), &[0.0; 4]);
        assert_eq!(s.multiplicities(), vec![(0.0, 4)]);
    }

    #[test]
    fn star_matches_characteristic_polynomial() {
        // det(xI - A) for K_{1,3} is x^4 - 3x^2, roots +-sqrt(3), 0, 0.
        let star = Graph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]).unwrap();
        let a = star.adjacency_matrix();
        let s = eigendecompose(a.as_ref()).unwrap();
        let charpoly = |x: f64| x.powi(4) - 3.0 * x * x;
        for &l in s.eigenvalues() {
            assert!(charpoly(l).abs() < 1e-10);
        }
        let expected = [3f64.sqrt(), 0.0, 0.0, -(3f64.sqrt())];
        for (l, e) in s.eigenvalues().iter().zip(expected) {
            assert!(close(*l, e, 1e-12), "{l} vs {e}");
        }
        check_invariants(a.as_ref(), &s);
    }

    #[test]
    fn rejects_asymmetric() {
        let mut a = Mat::<f64>::zeros(3, 3);
        a[(0, 1)] = 1.0;
        assert!(matches!(
            eigendecompose(a.as_ref()),
            Err(Error::NotSymmetric { .. })
        ));
        let rect = Mat::<f64>::zeros(2, 3);
        assert!(eigendecompose(rect.as_ref()).is_err());
    }

    #[test]
    fn eigenvector_orientation_is_deterministic() {
        let g = erdos_renyi(40, 0.3, 11).unwrap();
        let a = g.adjacency_matrix();
        let s1 = eigendecompose(a.as_ref()).unwrap();
        let s2 = eigendecompose(a.as_ref()).unwrap();
        for k in 0..40 {
            let v = s1.eigenvector(k);
            let lead = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let first = v.iter().find(|x| x.abs() >= lead * (1.0 - 1e-12)).unwrap();
            assert!(*first > 0.0);
            assert_eq!(v, s2.eigenvector(k));
        }
    }

    #[test]
    fn trace_and_frobenius_identities() {
        for seed in 0..5 {
            let g = erdos_renyi(60, 0.2, seed).unwrap();
            let s = eigendecompose(g.adjacency_matrix().as_ref()).unwrap();
            let trace: f64 = s.eigenvalues().iter().sum();
            assert!(trace.abs() <= 1e-8 * 60.0);
            let sq: f64 = s.eigenvalues().iter().map(|l| l * l).sum();
            let two_e = 2.0 * g.edge_count() as f64;
            assert!((sq - two_e).abs() <= 1e-6 * two_e);
        }
    }

    #[test]
    fn regular_graph_report() {
        let g = random_regular(60, 4, 3).unwrap();
        let r = spectral_report(&g, 0.25).unwrap();
        assert!(close(r.lambda1, 4.0, 1e-9));
        assert!(close(r.alpha, 1.0, 1e-9));
        assert!(r.delocalization_rhs.is_none());
    }

    #[test]
    fn complete_graph_ratio() {
        let g = complete(100).unwrap();
        let r = spectral_report(&g, 1.0 / 99.0).unwrap();
        assert!(close(r.ratio_c, 1.0 / 99.0, 1e-12));
        assert!(close(r.alpha, 1.0, 1e-12));
    }

    #[test]
    fn empty_graph_ratio_is_infinite_and_serializes() {
        let g = erdos_renyi(5, 0.0, 0).unwrap();
        let r = spectral_report(&g, 1.0).unwrap();
        assert!(r.ratio_c.is_infinite());
        let json = serde_json::to_string(&r).unwrap();
        let back: SpectralReport = serde_json::from_str(&json).unwrap();
        assert!(back.ratio_c.is_infinite());
    }

    #[test]
    fn er_delocalization() {
        let g = erdos_renyi(1000, 0.1, 7).unwrap();
        let r = spectral_report(&g, 1.0 / 100.0).unwrap();
        let rhs = r.delocalization_rhs.unwrap();
        assert!(r.alpha >= 0.99, "alpha {}", r.alpha);
        assert!(r.alpha * r.alpha >= rhs);
        assert!(close(r.wigner_radius, 2.0 * (0.9f64 / 100.0).sqrt(), 1e-15));
    }

    #[test]
    fn semicircle_closed_form() {
        let (n, p) = (1000usize, 0.1);
        let edge = 2.0 * (n as f64 * p * (1.0 - p)).sqrt();
        assert_eq!(semicircle_density(edge, n, p).unwrap(), 0.0);
        assert_eq!(semicircle_density(edge * 1.5, n, p).unwrap(), 0.0);
        let centre = semicircle_density(0.0, n, p).unwrap();
        assert!(close(centre, 1.0 / (PI * 90f64.sqrt()), 1e-15));
        assert!(semicircle_density(0.0, n, 0.0).is_err());
        assert!(semicircle_density(0.0, n, 1.0).is_err());
    }

    #[test]
    fn bulk_histogram_degenerate_cases() {
        let z = Mat::<f64>::zeros(4, 4);
        let h = empirical_bulk_density(&eigendecompose(z.as_ref()).unwrap(), 4).unwrap();
        assert_eq!(h.densities.iter().filter(|&&d| d > 0.0).count(), 1);
        let occupied = h.densities.iter().position(|&d| d > 0.0).unwrap();
        assert!(h.edges[occupied] <= 0.0 && 0.0 <= h.edges[occupied + 1]);
        assert!(close(h.mass(), 1.0, 1e-12));

        let k3 = complete(3).unwrap().adjacency_matrix();
        let h = empirical_bulk_density(&eigendecompose(k3.as_ref()).unwrap(), 3).unwrap();
        assert!(close(h.mass(), 1.0, 1e-12));
        assert!(h.density_at(-1.0) > 0.0);
        assert_eq!(h.density_at(2.0), 0.0);

        assert!(empirical_bulk_density(&eigendecompose(k3.as_ref()).unwrap(), 1).is_err());
    }

    #[test]
    fn normalized_laplacian_cases() {
        let edge = Graph::from_edges(2, &[(0, 1)]).unwrap();
        let l = normalized_laplacian(&edge);
        assert_eq!(l.matrix[(0, 0)], 1.0);
        assert_eq!(l.matrix[(0, 1)], -1.0);
        assert_eq!(l.matrix[(1, 0)], -1.0);
        assert_eq!(l.matrix[(1, 1)], 1.0);

        // A/(n-1) has eigenvalues 1 and -1/(n-1), so L' has 0 and n/(n-1).
        let n = 7;
        let l = normalized_laplacian(&complete(n).unwrap());
        let s = eigendecompose(l.matrix.as_ref()).unwrap();
        let mult = s.multiplicities();
        assert_eq!(mult.len(), 2);
        assert!(close(mult[0].0, n as f64 / (n as f64 - 1.0), 1e-12));
        assert_eq!(mult[0].1, n - 1);
        assert!(close(mult[1].0, 0.0, 1e-12));

        let g = random_regular(20, 3, 9).unwrap();
        let l = normalized_laplacian(&g);
        for i in 0..20 {
            for j in 0..20 {
                let expected = if i == j { 1.0 } else { 0.0 } - f64::from(g.row(i)[j]) / 3.0;
                assert!(close(l.matrix[(i, j)], expected, 1e-15));
            }
        }

        let with_isolated = Graph::from_edges(3, &[(0, 1)]).unwrap();
        let l = normalized_laplacian(&with_isolated);
        assert_eq!(l.isolated, vec![2]);
        assert_eq!(l.matrix[(2, 2)], 1.0);
    }
}
