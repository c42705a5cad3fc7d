//! Unitary evolution `exp(-iHt)` of real symmetric Hamiltonians.
//!
//! The propagator is applied in the eigenbasis of `H`. Once the
//! factorization exists, a transition amplitude `<target|exp(-iHt)|psi0>`
//! costs `O(n)` per time point, which is what makes dense time grids and
//! peak refinement cheap. [`evolve_ode`] is an independent Runge–Kutta
//! integrator used to cross-check the spectral route.

use std::f64::consts::PI;
use std::sync::OnceLock;

use faer::{Mat, MatRef};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::io::{csv_string, fmt_f64, parse_csv};
use crate::par::Execution;
use crate::spectra::{check_symmetric, eigendecompose, Spectrum};

/// A normalized state vector in the vertex basis.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    /// Normalizes `amplitudes`; fails if the vector is zero.
    pub fn from_amplitudes(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::EmptySupport);
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(QuantumState { amplitudes })
    }

    /// Normalizes a real vector.
    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::from_amplitudes(values.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    /// `|s> = sum_i |i> / sqrt(n)`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::uniform_excluding(n, &[])
    }

    /// `|k>`.
    pub fn basis(n: usize, k: usize) -> Result<Self> {
        if k >= n {
            return Err(Error::param("k", format!("vertex {k} out of range for n = {n}")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); n];
        amplitudes[k] = Complex64::new(1.0, 0.0);
        Ok(QuantumState { amplitudes })
    }

    /// Equal superposition over all vertices not in `excluded`.
    pub fn uniform_excluding(n: usize, excluded: &[usize]) -> Result<Self> {
        if let Some(&v) = excluded.iter().find(|&&v| v >= n) {
            return Err(Error::param("excluded", format!("vertex {v} out of range for n = {n}")));
        }
        let mut values = vec![1.0; n];
        for &v in excluded {
            values[v] = 0.0;
        }
        Self::from_real(&values)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &QuantumState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2`.
    pub fn overlap(&self, other: &QuantumState) -> f64 {
        self.inner(other).norm_sqr()
    }

    fn real_part(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.re).collect()
    }

    fn imag_part(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.im).collect()
    }
}

/// A real symmetric Hamiltonian with a lazily computed eigendecomposition.
#[derive(Debug)]
pub struct Hamiltonian {
    matrix: Mat<f64>,
    spectrum: OnceLock<Spectrum>,
}

impl Clone for Hamiltonian {
    fn clone(&self) -> Self {
        let spectrum = OnceLock::new();
        if let Some(s) = self.spectrum.get() {
            let _ = spectrum.set(s.clone());
        }
        Hamiltonian {
            matrix: self.matrix.clone(),
            spectrum,
        }
    }
}

impl Hamiltonian {
    pub fn new(matrix: Mat<f64>) -> Result<Self> {
        check_symmetric(matrix.as_ref())?;
        Ok(Hamiltonian {
            matrix,
            spectrum: OnceLock::new(),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> MatRef<'_, f64> {
        self.matrix.as_ref()
    }

    pub fn spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = eigendecompose(self.matrix.as_ref())?;
        Ok(self.spectrum.get_or_init(|| s))
    }

    /// `<psi|H|psi>`.
    pub fn energy(&self, psi: &QuantumState) -> Result<f64> {
        self.check_dim(psi)?;
        let x = apply(self.matrix.as_ref(), &psi.real_part());
        let y = apply(self.matrix.as_ref(), &psi.imag_part());
        Ok(psi
            .amplitudes
            .iter()
            .zip(x.iter().zip(&y))
            .map(|(a, (hx, hy))| a.re * hx + a.im * hy)
            .sum())
    }

    fn check_dim(&self, psi: &QuantumState) -> Result<()> {
        if psi.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: psi.dim(),
            });
        }
        Ok(())
    }
}

fn apply(m: MatRef<'_, f64>, v: &[f64]) -> Vec<f64> {
    let col = faer::ColRef::from_slice(v);
    let out = m * col;
    out.iter().copied().collect()
}

/// `V^T v` for a complex vector, returned as complex coefficients.
fn to_eigenbasis(s: &Spectrum, psi: &QuantumState) -> Vec<Complex64> {
    let vt = s.eigenvectors().transpose();
    let re = apply(vt, &psi.real_part());
    let im = apply(vt, &psi.imag_part());
    re.into_iter()
        .zip(im)
        .map(|(r, i)| Complex64::new(r, i))
        .collect()
}

/// `exp(-iHt) psi0` through the spectral decomposition `V exp(-i lambda t) V^T`.
pub fn evolve(h: &Hamiltonian, psi0: &QuantumState, t: f64) -> Result<QuantumState> {
    h.check_dim(psi0)?;
    if !t.is_finite() {
        return Err(Error::param("t", "must be finite"));
    }
    let s = h.spectrum()?;
    let coeffs = to_eigenbasis(s, psi0);
    let (re, im): (Vec<f64>, Vec<f64>) = coeffs
        .iter()
        .zip(s.eigenvalues())
        .map(|(c, &l)| {
            let z = c * Complex64::from_polar(1.0, -l * t);
            (z.re, z.im)
        })
        .unzip();
    let v = s.eigenvectors();
    let out_re = apply(v, &re);
    let out_im = apply(v, &im);
    Ok(QuantumState {
        amplitudes: out_re
            .into_iter()
            .zip(out_im)
            .map(|(r, i)| Complex64::new(r, i))
            .collect(),
    })
}

/// Classical fourth-order Runge–Kutta integration of `dpsi/dt = -iH psi`
/// with `ceil(|t| / dt)` equal steps. The state is not renormalized.
pub fn evolve_ode(h: &Hamiltonian, psi0: &QuantumState, t: f64, dt: f64) -> Result<QuantumState> {
    h.check_dim(psi0)?;
    if !(dt > 0.0) {
        return Err(Error::param("dt", format!("{dt} must be positive")));
    }
    if !t.is_finite() {
        return Err(Error::param("t", "must be finite"));
    }
    let steps = (t.abs() / dt).ceil() as usize;
    if steps == 0 {
        return Ok(psi0.clone());
    }
    let step = t / steps as f64;
    let n = h.dim();
    let m = h.matrix();

    // psi = x + iy:  dx/dt = H y,  dy/dt = -H x.  Column 0 holds x, column 1 y.
    let mut state = Mat::from_fn(n, 2, |i, j| {
        let a = psi0.amplitudes[i];
        if j == 0 {
            a.re
        } else {
            a.im
        }
    });
    let deriv = |s: &Mat<f64>| -> Mat<f64> {
        let hs = m * s;
        Mat::from_fn(n, 2, |i, j| if j == 0 { hs[(i, 1)] } else { -hs[(i, 0)] })
    };
    let axpy = |s: &Mat<f64>, k: &Mat<f64>, c: f64| -> Mat<f64> {
        Mat::from_fn(n, 2, |i, j| s[(i, j)] + c * k[(i, j)])
    };
    for k in 0..steps {
        let k1 = deriv(&state);
        let k2 = deriv(&axpy(&state, &k1, step / 2.0));
        let k3 = deriv(&axpy(&state, &k2, step / 2.0));
        let k4 = deriv(&axpy(&state, &k3, step));
        state = Mat::from_fn(n, 2, |i, j| {
            state[(i, j)]
                + step / 6.0 * (k1[(i, j)] + 2.0 * k2[(i, j)] + 2.0 * k3[(i, j)] + k4[(i, j)])
        });
        if (0..n).any(|i| !state[(i, 0)].is_finite() || !state[(i, 1)].is_finite()) {
            return Err(Error::Integration { step: k + 1 });
        }
    }
    Ok(QuantumState {
        amplitudes: (0..n)
            .map(|i| Complex64::new(state[(i, 0)], state[(i, 1)]))
            .collect(),
    })
}

/// `t -> <target|exp(-iHt)|psi0>` evaluated in `O(n)` per call.
#[derive(Clone, Debug)]
pub struct TransitionAmplitude {
    energies: Vec<f64>,
    weights: Vec<Complex64>,
    /// `<target|psi0>`, returned exactly at `t = 0`.
    initial: Complex64,
}

impl TransitionAmplitude {
    pub fn new(h: &Hamiltonian, psi0: &QuantumState, target: &QuantumState) -> Result<Self> {
        h.check_dim(psi0)?;
        h.check_dim(target)?;
        let s = h.spectrum()?;
        let a = to_eigenbasis(s, psi0);
        let b = to_eigenbasis(s, target);
        let weights = b.iter().zip(&a).map(|(b, a)| b.conj() * a).collect();
        Ok(TransitionAmplitude {
            energies: s.eigenvalues().to_vec(),
            weights,
            initial: target.inner(psi0),
        })
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        if t == 0.0 {
            return self.initial;
        }
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(&l, w)| w * Complex64::from_polar(1.0, -l * t))
            .sum()
    }

    pub fn probability(&self, t: f64) -> f64 {
        self.amplitude(t).norm_sqr()
    }
}

/// Probability curve on a uniform time grid plus its refined maximum.
#[derive(Clone, Debug, PartialEq)]
pub struct EvolutionTrace {
    pub times: Vec<f64>,
    pub probabilities: Vec<f64>,
    pub peak_value: f64,
    pub peak_time: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub peak_value: f64,
    pub peak_time: f64,
}

impl EvolutionTrace {
    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            peak_value: self.peak_value,
            peak_time: self.peak_time,
        }
    }

    /// Linear interpolation of the sampled curve.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.times.partition_point(|&x| x <= t);
        if k == 0 {
            return self.probabilities[0];
        }
        if k >= self.times.len() {
            return *self.probabilities.last().unwrap();
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let (p0, p1) = (self.probabilities[k - 1], self.probabilities[k]);
        p0 + (p1 - p0) * (t - t0) / (t1 - t0)
    }

    /// CSV with columns `t,<column>`.
    pub fn to_csv(&self, column: &str) -> String {
        csv_string(
            &["t", column],
            self.times
                .iter()
                .zip(&self.probabilities)
                .map(|(t, p)| vec![fmt_f64(*t), fmt_f64(*p)]),
        )
    }

    /// Reads back a curve written by [`EvolutionTrace::to_csv`] together with its summary.
    pub fn from_csv(text: &str, summary: &TraceSummary) -> Result<Self> {
        let table = parse_csv(text)?;
        if table.header.len() != 2 {
            return Err(Error::Parse {
                line: 1,
                message: "expected two columns".into(),
            });
        }
        Ok(EvolutionTrace {
            times: table.rows.iter().map(|r| r[0]).collect(),
            probabilities: table.rows.iter().map(|r| r[1]).collect(),
            peak_value: summary.peak_value,
            peak_time: summary.peak_time,
        })
    }
}

/// Default grid length: two Rabi periods of the ideal search, `2 pi sqrt(n)`.
pub fn default_t_max(n: usize) -> f64 {
    2.0 * PI * (n as f64).sqrt()
}

pub const DEFAULT_STEPS: usize = 400;

/// Tolerance in `t` of the golden-section peak refinement.
pub const PEAK_TOLERANCE: f64 = 1e-6;

/// Maximizes `f` on `[a, b]` by golden-section search.
pub(crate) fn golden_max(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while (b - a).abs() > tol {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let t = (a + b) / 2.0;
    (t, f(t))
}

/// Samples a probability curve on `steps` uniform points of `[0, t_max]` and
/// refines its maximum by golden-section search within one grid step of the
/// sampled argmax.
pub fn trace_curve(
    curve: impl Fn(f64) -> f64 + Sync + Send,
    t_max: f64,
    steps: usize,
    exec: Execution,
) -> Result<EvolutionTrace> {
    if steps < 2 {
        return Err(Error::param("steps", "need at least 2 grid points"));
    }
    if !(t_max > 0.0) || !t_max.is_finite() {
        return Err(Error::param("t_max", format!("{t_max} must be positive and finite")));
    }
    let dt = t_max / (steps - 1) as f64;
    let times: Vec<f64> = (0..steps)
        .map(|k| if k == steps - 1 { t_max } else { k as f64 * dt })
        .collect();
    let probabilities = exec.map(&times, |&t| curve(t));
    let (k_best, &p_best) = probabilities
        .iter()
        .enumerate()
        .fold((0, &f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    let lo = (times[k_best] - dt).max(0.0);
    let hi = (times[k_best] + dt).min(t_max);
    let (t_ref, p_ref) = golden_max(&curve, lo, hi, PEAK_TOLERANCE);
    let (peak_time, peak_value) = if p_ref >= p_best {
        (t_ref, p_ref)
    } else {
        (times[k_best], p_best)
    };
    Ok(EvolutionTrace {
        times,
        probabilities,
        peak_value,
        peak_time,
    })
}

/// `|<target|exp(-iHt)|psi0>|^2` over `[0, t_max]`.
pub fn trace_probability(
    h: &Hamiltonian,
    psi0: &QuantumState,
    target: &QuantumState,
    t_max: f64,
    steps: usize,
) -> Result<EvolutionTrace> {
    trace_probability_with(h, psi0, target, t_max, steps, Execution::default())
}

pub fn trace_probability_with(
    h: &Hamiltonian,
    psi0: &QuantumState,
    target: &QuantumState,
    t_max: f64,
    steps: usize,
    exec: Execution,
) -> Result<EvolutionTrace> {
    let amp = TransitionAmplitude::new(h, psi0, target)?;
    trace_curve(|t| amp.probability(t), t_max, steps, exec)
}
