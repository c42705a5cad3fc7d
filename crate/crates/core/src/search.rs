//! Spatial search by continuous-time quantum walk.
//!
//! The walker starts in the uniform state `|s>` and evolves under
//! `H = -|w><w| - gamma A`. When `gamma * A` has a principal eigenvalue of 1
//! with an eigenvector close to `|s>`, and every other eigenvalue is bounded
//! away from 1 in magnitude, `|s>` and `|w>` form an isolated two-level
//! system and the walk reaches `|w>` after `O(sqrt(n))` time.
//!
//! Besides simulating the walk this module implements the rescaling
//! argument behind that statement ([`lemma1_rescaling`], [`delta_estimate`],
//! [`lemma1_search`]) and the two-level perturbative prediction
//! ([`perturbation_prediction`]).

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::dynamics::{evolve, trace_probability_with, EvolutionTrace, Hamiltonian, QuantumState};
use crate::error::{Error, Result};
use crate::graph::{Graph, GraphModel};
use crate::par::Execution;
use crate::spectra::{eigendecompose, principal_overlap, ratio_c, Spectrum};

/// Bisection tolerance on `r` in [`lemma1_rescaling`].
pub const RESCALING_TOLERANCE: f64 = 1e-12;
pub const RESCALING_MAX_ITER: usize = 200;

/// Default margin of [`check_optimality_condition`].
pub const DEFAULT_MARGIN: f64 = 0.05;

/// How the hopping rate `gamma` is chosen.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum GammaMode {
    /// `1 / lambda_1` of the adjacency matrix.
    ExactInverseLambda1,
    /// `1 / (np)` for `G(n, p)`, `1 / d` for `d`-regular graphs,
    /// `1 / (n - 1)` for `K_n`.
    MeanFieldInvNp,
    Manual(f64),
}

impl fmt::Display for GammaMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GammaMode::ExactInverseLambda1 => f.write_str("exact"),
            GammaMode::MeanFieldInvNp => f.write_str("meanfield"),
            GammaMode::Manual(x) => write!(f, "manual:{x}"),
        }
    }
}

impl FromStr for GammaMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact" => Ok(GammaMode::ExactInverseLambda1),
            "meanfield" => Ok(GammaMode::MeanFieldInvNp),
            _ => {
                let value = s
                    .strip_prefix("manual:")
                    .and_then(|x| x.parse::<f64>().ok())
                    .ok_or_else(|| {
                        Error::param("gamma", format!("`{s}` is not exact|meanfield|manual:<x>"))
                    })?;
                if !(value > 0.0) || !value.is_finite() {
                    return Err(Error::param("gamma", format!("{value} must be positive")));
                }
                Ok(GammaMode::Manual(value))
            }
        }
    }
}

impl TryFrom<String> for GammaMode {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<GammaMode> for String {
    fn from(m: GammaMode) -> String {
        m.to_string()
    }
}

fn adjacency_spectrum(g: &Graph) -> Result<Spectrum> {
    eigendecompose(g.adjacency_matrix().as_ref())
}

/// Hopping rate for `g` under `mode`. `spectrum`, if given, must be the
/// adjacency spectrum of `g` and saves a decomposition in exact mode.
pub fn choose_gamma_with(g: &Graph, mode: GammaMode, spectrum: Option<&Spectrum>) -> Result<f64> {
    let gamma = match mode {
        GammaMode::ExactInverseLambda1 => {
            let lambda1 = match spectrum {
                Some(s) => s.largest(),
                None => adjacency_spectrum(g)?.largest(),
            };
            if !(lambda1 > 0.0) {
                return Err(Error::param(
                    "gamma",
                    format!("largest adjacency eigenvalue is {lambda1}; graph has no edges"),
                ));
            }
            1.0 / lambda1
        }
        GammaMode::MeanFieldInvNp => {
            let mean_degree = match g.model() {
                GraphModel::ErdosRenyi => g.n() as f64 * g.param(),
                GraphModel::RandomRegular => g.param(),
                GraphModel::Complete => g.n() as f64 - 1.0,
                GraphModel::Custom => {
                    return Err(Error::param(
                        "gamma",
                        "mean-field gamma needs an Erdős–Rényi, regular or complete graph",
                    ))
                }
            };
            if !(mean_degree > 0.0) {
                return Err(Error::param("gamma", "mean degree is zero"));
            }
            1.0 / mean_degree
        }
        GammaMode::Manual(x) => {
            if !(x > 0.0) || !x.is_finite() {
                return Err(Error::param("gamma", format!("{x} must be positive")));
            }
            x
        }
    };
    Ok(gamma)
}

pub fn choose_gamma(g: &Graph, mode: GammaMode) -> Result<f64> {
    choose_gamma_with(g, mode, None)
}

/// A graph, a marked vertex and the hopping rate.
#[derive(Clone, Debug)]
pub struct SearchInstance {
    graph: Graph,
    w: usize,
    gamma: f64,
    gamma_mode: GammaMode,
    rescale_r: Option<f64>,
    spectrum: OnceLock<Spectrum>,
}

impl SearchInstance {
    pub fn new(graph: Graph, w: usize, mode: GammaMode) -> Result<Self> {
        if w >= graph.n() {
            return Err(Error::param(
                "w",
                format!("marked vertex {w} out of range for n = {}", graph.n()),
            ));
        }
        let spectrum = OnceLock::new();
        let gamma = if mode == GammaMode::ExactInverseLambda1 {
            let s = adjacency_spectrum(&graph)?;
            let gamma = choose_gamma_with(&graph, mode, Some(&s))?;
            let _ = spectrum.set(s);
            gamma
        } else {
            choose_gamma(&graph, mode)?
        };
        Ok(SearchInstance {
            graph,
            w,
            gamma,
            gamma_mode: mode,
            rescale_r: None,
            spectrum,
        })
    }

    /// Rescales the hopping term to `(1 + r) gamma A`. `r` must lie in
    /// `[-c/(1+c), c/(1-c)]` for the graph's spectral ratio `c`.
    pub fn with_rescale(mut self, r: f64) -> Result<Self> {
        let c = ratio_c(self.adjacency_spectrum()?);
        if !(c < 1.0) {
            return Err(Error::ConditionViolated { c });
        }
        let (lo, hi) = rescaling_bracket(c);
        if !(r >= lo - 1e-12 && r <= hi + 1e-12) {
            return Err(Error::param(
                "rescale_r",
                format!("{r} outside [{lo}, {hi}] for c = {c}"),
            ));
        }
        self.rescale_r = Some(r);
        Ok(self)
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn gamma_mode(&self) -> GammaMode {
        self.gamma_mode
    }

    pub fn rescale_r(&self) -> Option<f64> {
        self.rescale_r
    }

    /// Adjacency spectrum of the graph, computed on first use.
    pub fn adjacency_spectrum(&self) -> Result<&Spectrum> {
        if let Some(s) = self.spectrum.get() {
            return Ok(s);
        }
        let s = adjacency_spectrum(&self.graph)?;
        Ok(self.spectrum.get_or_init(|| s))
    }
}

/// `H = -|w><w| - (1 + r) gamma A`, with `r = 0` unless a rescaling is set.
/// The `-rI` shift of the rescaled Hamiltonian is dropped: it only adds a
/// global phase.
pub fn build_search_hamiltonian(si: &SearchInstance) -> Result<Hamiltonian> {
    let g = si.graph();
    let n = g.n();
    let coupling = si.gamma * (1.0 + si.rescale_r.unwrap_or(0.0));
    let mut m = Mat::from_fn(n, n, |i, j| if g.has_edge(i, j) { -coupling } else { 0.0 });
    m[(si.w, si.w)] = -1.0;
    Hamiltonian::new(m)
}

/// `[-c/(1+c), c/(1-c)]`.
pub fn rescaling_bracket(c: f64) -> (f64, f64) {
    (-c / (1.0 + c), c / (1.0 - c))
}

/// Result of solving the rescaling equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Rescaling {
    pub r: f64,
    /// `max_{i>1} |lambda_i|`.
    pub c: f64,
    pub bracket: (f64, f64),
    pub residual: f64,
    pub iterations: usize,
}

/// Checks `w < n` and the normalization `lambda_1 = 1`.
fn check_normalized(spectrum: &Spectrum, w: usize) -> Result<()> {
    let n = spectrum.dim();
    if w >= n {
        return Err(Error::param("w", format!("vertex {w} out of range for n = {n}")));
    }
    let l1 = spectrum.largest();
    if (l1 - 1.0).abs() > 1e-8 {
        return Err(Error::param(
            "spectrum",
            format!("largest eigenvalue must be normalized to 1, got {l1}"),
        ));
    }
    Ok(())
}

/// Checks the normalization and returns `c = max_{i>1} |lambda_i|`.
fn normalized_ratio(spectrum: &Spectrum, w: usize) -> Result<f64> {
    check_normalized(spectrum, w)?;
    let c = spectrum.eigenvalues()[1..]
        .iter()
        .fold(0.0f64, |m, l| m.max(l.abs()));
    if !(c < 1.0) {
        return Err(Error::ConditionViolated { c });
    }
    Ok(c)
}

/// `sum_{i>1} a_i^2 / ((1 + r)(1 - lambda_i)) - sum_{i>1} a_i^2` with
/// `a_i = <w|v_i>`.
pub fn rescaling_residual(spectrum: &Spectrum, w: usize, r: f64) -> f64 {
    let (weighted, plain) = tail_sums(spectrum, w);
    weighted / (1.0 + r) - plain
}

fn tail_sums(spectrum: &Spectrum, w: usize) -> (f64, f64) {
    spectrum.eigenvalues()[1..]
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(sw, sp), (k, &l)| {
            let a2 = spectrum.component(w, k + 1).powi(2);
            (sw + a2 / (1.0 - l), sp + a2)
        })
}

/// Finds the rescaling `r` that makes `sum a_i^2/(1 - lambda'_i)` equal to
/// `sum a_i^2` over the non-principal eigenpairs, where
/// `lambda'_i = (1 + r) lambda_i - r`. The spectrum must already be
/// normalized to `lambda_1 = 1`.
///
/// The residual is decreasing in `r` and changes sign on
/// [`rescaling_bracket`]`(c)`, so plain bisection converges.
pub fn lemma1_rescaling(spectrum: &Spectrum, w: usize) -> Result<Lemma1Rescaling> {
    let c = normalized_ratio(spectrum, w)?;
    let bracket = rescaling_bracket(c);
    let (weighted, plain) = tail_sums(spectrum, w);
    let f = |r: f64| weighted / (1.0 + r) - plain;
    let done = |r: f64, iterations: usize| Lemma1Rescaling {
        r,
        c,
        bracket,
        residual: f(r),
        iterations,
    };
    if plain == 0.0 {
        return Ok(done(0.0, 0));
    }
    let (mut lo, mut hi) = bracket;
    let (f_lo, f_hi) = (f(lo), f(hi));
    let slack = 1e-13 * (weighted + plain);
    if f_lo < -slack || f_hi > slack {
        return Err(Error::Numerical(format!(
            "rescaling bracket [{lo}, {hi}] does not straddle a root (f = {f_lo}, {f_hi})"
        )));
    }
    if f_lo <= 0.0 {
        return Ok(done(lo, 0));
    }
    if f_hi >= 0.0 {
        return Ok(done(hi, 0));
    }
    let mut iterations = 0;
    while hi - lo > RESCALING_TOLERANCE && iterations < RESCALING_MAX_ITER {
        let mid = 0.5 * (lo + hi);
        let fm = f(mid);
        if fm == 0.0 {
            return Ok(done(mid, iterations + 1));
        }
        if fm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(done(0.5 * (lo + hi), iterations))
}

/// `(1 - c) / (1 + c)`.
pub fn lemma1_bound(c: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&c) {
        return Err(Error::param("c", format!("{c} must lie in [0, 1)")));
    }
    Ok((1.0 - c) / (1.0 + c))
}

/// Half-splitting `delta = |a_1| / sqrt(sum_{i>1} a_i^2 / (1 - lambda_i)^2)`
/// of the two eigenvalues of `H_1 + |w><w|` nearest 1. Evolving for
/// `pi / (2 delta)` rotates the principal eigenvector onto `|w>`.
///
/// The rescaled spectrum may have `|lambda_i| > 1` below the top; only
/// `lambda_i < 1` for `i > 1` is required.
pub fn delta_estimate(spectrum: &Spectrum, w: usize) -> Result<f64> {
    check_normalized(spectrum, w)?;
    if spectrum.dim() > 1 && !(spectrum.eigenvalues()[1] < 1.0) {
        return Err(Error::Numerical(
            "principal eigenvalue is degenerate; delta is undefined".into(),
        ));
    }
    let a1 = spectrum.component(w, 0);
    let denom: f64 = spectrum.eigenvalues()[1..]
        .iter()
        .enumerate()
        .map(|(k, &l)| spectrum.component(w, k + 1).powi(2) / (1.0 - l).powi(2))
        .sum();
    if !(denom > 0.0) {
        return Err(Error::Numerical(
            "marked state has no weight outside the principal eigenvector".into(),
        ));
    }
    Ok(a1.abs() / denom.sqrt())
}

/// Outcome of running the rescaled search to its predicted time.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lemma1Outcome {
    pub rescaling: Lemma1Rescaling,
    pub delta: f64,
    /// `pi / (2 delta)`.
    pub time: f64,
    /// `|<w|f>|^2` at `time`.
    pub success: f64,
    /// `(1 - c) / (1 + c)`.
    pub bound: f64,
}

/// Rescales `H_1` (normalized spectrum), evolves `initial` under
/// `(1 + r) H_1 + |w><w|` for `pi / (2 delta)` and reports the overlap with `|w>`.
pub fn lemma1_search(h1: &Spectrum, w: usize, initial: &QuantumState) -> Result<Lemma1Outcome> {
    let rescaling = lemma1_rescaling(h1, w)?;
    let r = rescaling.r;
    let delta = delta_estimate(&h1.affine(1.0 + r, -r)?, w)?;
    let time = PI / (2.0 * delta);
    let mut m = h1.reconstruct();
    let n = h1.dim();
    for j in 0..n {
        for i in 0..n {
            m[(i, j)] *= 1.0 + r;
        }
    }
    // reconstruct() is symmetric only up to rounding.
    for j in 0..n {
        for i in (j + 1)..n {
            let avg = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = avg;
            m[(j, i)] = avg;
        }
    }
    m[(w, w)] += 1.0;
    let h = Hamiltonian::new(m)?;
    let f = evolve(&h, initial, time)?;
    let success = QuantumState::basis(n, w)?.overlap(&f);
    let bound = lemma1_bound(rescaling.c)?;
    Ok(Lemma1Outcome {
        rescaling,
        delta,
        time,
        success,
        bound,
    })
}

/// Two-level prediction for the search on `{|w>, |s_w̄>}` with detuning
/// `delta = gamma * lambda_1 - 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationPrediction {
    pub n: usize,
    pub delta: f64,
    /// `sqrt(delta^2/4 + 1/n)`.
    pub omega: f64,
    /// `1 / (1 + n delta^2 / 4)`.
    pub amplitude: f64,
    /// `delta/2 + sqrt(delta^2/4 + 1/n)`.
    pub mu: f64,
    /// `sqrt(mu^2 + 1/n)`.
    pub kappa: f64,
    /// `pi / omega`: first maximum of `amplitude * sin^2(omega t / 2)`.
    pub predicted_peak_time: f64,
    /// `pi / (2 omega)`: first maximum of `amplitude * sin^2(omega t)`, the
    /// exact Rabi formula for a coupling of `1/sqrt(n)`.
    pub two_level_peak_time: f64,
}

impl PerturbationPrediction {
    /// `amplitude * sin^2(omega t / 2)`.
    pub fn probability_at(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t / 2.0).sin().powi(2)
    }

    /// `amplitude * sin^2(omega t)`.
    pub fn two_level_probability_at(&self, t: f64) -> f64 {
        self.amplitude * (self.omega * t).sin().powi(2)
    }

    /// Coefficients of `|lambda_+>` and `|lambda_->` on `(|w>, |s_w̄>)`.
    pub fn eigenstates(&self) -> ([f64; 2], [f64; 2]) {
        let inv_sqrt_n = 1.0 / (self.n as f64).sqrt();
        (
            [inv_sqrt_n / self.kappa, -self.mu / self.kappa],
            [self.mu / self.kappa, inv_sqrt_n / self.kappa],
        )
    }
}

pub fn perturbation_prediction(n: usize, gamma: f64, lambda1: f64) -> Result<PerturbationPrediction> {
    if n < 2 {
        return Err(Error::param("n", "need at least 2 vertices"));
    }
    let delta = gamma * lambda1 - 1.0;
    if !delta.is_finite() {
        return Err(Error::param("gamma", "gamma * lambda_1 is not finite"));
    }
    let inv_n = 1.0 / n as f64;
    let omega = (delta * delta / 4.0 + inv_n).sqrt();
    let mu = delta / 2.0 + omega;
    let kappa = (mu * mu + inv_n).sqrt();
    Ok(PerturbationPrediction {
        n,
        delta,
        omega,
        amplitude: 1.0 / (1.0 + n as f64 * delta * delta / 4.0),
        mu,
        kappa,
        predicted_peak_time: PI / omega,
        two_level_peak_time: PI / (2.0 * omega),
    })
}

/// `sin^2(t / sqrt(n))`, the ideal success probability of search.
pub fn ideal_success_probability(n: usize, t: f64) -> f64 {
    (t / (n as f64).sqrt()).sin().powi(2)
}

/// `pi sqrt(n) / 2`.
pub fn ideal_search_time(n: usize) -> f64 {
    PI * (n as f64).sqrt() / 2.0
}

/// `|<w|exp(-iHt)|s>|^2` on `[0, t_max]`.
pub fn run_search(si: &SearchInstance, t_max: f64, steps: usize) -> Result<EvolutionTrace> {
    run_search_with(si, t_max, steps, Execution::default())
}

pub fn run_search_with(
    si: &SearchInstance,
    t_max: f64,
    steps: usize,
    exec: Execution,
) -> Result<EvolutionTrace> {
    let h = build_search_hamiltonian(si)?;
    let n = si.graph().n();
    let s = QuantumState::uniform(n)?;
    let w = QuantumState::basis(n, si.w())?;
    trace_probability_with(&h, &s, &w, t_max, steps, exec)
}

/// Per-instance record of a search run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub n: usize,
    pub model: GraphModel,
    pub p: f64,
    pub seed: u64,
    pub w: usize,
    pub gamma_mode: GammaMode,
    pub gamma: f64,
    pub lambda1: f64,
    pub lambda2: f64,
    pub c: f64,
    pub alpha: f64,
    pub r: Option<f64>,
    pub delta: f64,
    pub peak_value: f64,
    pub peak_time: f64,
    pub predicted_amplitude: f64,
    pub predicted_peak_time: f64,
    pub two_level_peak_time: f64,
}

/// Runs the search and collects the spectral and perturbative diagnostics.
pub fn search_report(si: &SearchInstance, trace: &EvolutionTrace) -> Result<SearchReport> {
    let g = si.graph();
    let spectrum = si.adjacency_spectrum()?;
    let lambda1 = spectrum.largest();
    let prediction = perturbation_prediction(g.n().max(2), si.gamma(), lambda1)?;
    Ok(SearchReport {
        n: g.n(),
        model: g.model(),
        p: crate::spectra::effective_p(g),
        seed: g.seed(),
        w: si.w(),
        gamma_mode: si.gamma_mode(),
        gamma: si.gamma(),
        lambda1,
        lambda2: spectrum.eigenvalues().get(1).copied().unwrap_or(lambda1),
        c: ratio_c(spectrum),
        alpha: principal_overlap(spectrum),
        r: si.rescale_r(),
        delta: prediction.delta,
        peak_value: trace.peak_value,
        peak_time: trace.peak_time,
        predicted_amplitude: prediction.amplitude,
        predicted_peak_time: prediction.predicted_peak_time,
        two_level_peak_time: prediction.two_level_peak_time,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimalityReport {
    pub condition_met: bool,
    pub c: f64,
    pub alpha: f64,
    /// `(1 - c)/(1 + c)`, or 0 when `c >= 1`.
    pub bound: f64,
    pub gamma_lambda1: f64,
    pub margin: f64,
}

/// Finite-size check of the sufficient condition: `c < 1 - margin` and
/// `alpha >= 1 - margin`.
pub fn check_optimality_condition(g: &Graph, gamma: f64, margin: f64) -> Result<OptimalityReport> {
    let spectrum = adjacency_spectrum(g)?;
    Ok(optimality_from_spectrum(&spectrum, gamma, margin))
}

pub fn optimality_from_spectrum(spectrum: &Spectrum, gamma: f64, margin: f64) -> OptimalityReport {
    let c = ratio_c(spectrum);
    let alpha = if spectrum.largest() > 0.0 {
        principal_overlap(spectrum)
    } else {
        0.0
    };
    OptimalityReport {
        condition_met: c < 1.0 - margin && alpha >= 1.0 - margin,
        c,
        alpha,
        bound: lemma1_bound(c).unwrap_or(0.0),
        gamma_lambda1: gamma * spectrum.largest(),
        margin,
    }
}

/// Position of the two lowest eigenvalues of a Hamiltonian relative to the
/// rest of its spectrum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LowestPairSeparation {
    /// Lowest and second-lowest eigenvalue.
    pub lowest: [f64; 2],
    /// Third-lowest eigenvalue: the lower edge of the remaining spectrum.
    pub bulk_edge: f64,
    /// `bulk_edge - lowest[1]`.
    pub gap: f64,
    /// `lowest[1] - lowest[0]`.
    pub splitting: f64,
    /// The pair counts as isolated when the gap to the bulk exceeds the
    /// splitting inside the pair.
    pub isolated: bool,
}

pub fn lowest_pair_separation(spectrum: &Spectrum) -> Result<LowestPairSeparation> {
    let n = spectrum.dim();
    if n < 3 {
        return Err(Error::param("spectrum", "need at least 3 eigenvalues"));
    }
    let e = spectrum.eigenvalues();
    let (e0, e1, e2) = (e[n - 1], e[n - 2], e[n - 3]);
    let gap = e2 - e1;
    let splitting = e1 - e0;
    Ok(LowestPairSeparation {
        lowest: [e0, e1],
        bulk_edge: e2,
        gap,
        splitting,
        isolated: gap > splitting,
    })
}
