//! State transfer and Bell-pair generation on a network of XX-coupled qubits.
//!
//! In the single-excitation sector the network Hamiltonian is a quantum walk
//! on the graph. Both protocols only retune local site energies (and, for the
//! Bell pair, the couplings around one node) so that a few localized states
//! become resonant with the uniform state; the walk then behaves like a
//! three-site chain with couplings of order `1/sqrt(n)`.

use std::f64::consts::PI;

use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::dynamics::{trace_curve, EvolutionTrace, Hamiltonian, QuantumState, TransitionAmplitude};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par::Execution;
use crate::search::{choose_gamma, GammaMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Transfer,
    Bell,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Endpoints {
    /// Sender `i`, receiver `j`.
    Transfer { i: usize, j: usize },
    /// Charlie `w` entangles Alice `a` and Bob `b`.
    Bell { w: usize, a: usize, b: usize },
}

impl Endpoints {
    pub fn vertices(&self) -> Vec<usize> {
        match *self {
            Endpoints::Transfer { i, j } => vec![i, j],
            Endpoints::Bell { w, a, b } => vec![w, a, b],
        }
    }

    pub fn kind(&self) -> ProtocolKind {
        match self {
            Endpoints::Transfer { .. } => ProtocolKind::Transfer,
            Endpoints::Bell { .. } => ProtocolKind::Bell,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProtocolSpec {
    pub graph: Graph,
    pub endpoints: Endpoints,
    /// Coupling on every edge not touching Charlie.
    pub gamma: f64,
    /// Coupling on Charlie's edges (Bell only), `sqrt(2) / d_C` by default.
    pub charlie_coupling: Option<f64>,
}

impl ProtocolSpec {
    /// Transfer from `i` to `j` with the mean-field coupling.
    pub fn transfer(graph: Graph, i: usize, j: usize) -> Result<Self> {
        Self::new(graph, Endpoints::Transfer { i, j })
    }

    /// Bell pair between `a` and `b` mediated by `w`, with the mean-field
    /// coupling and Charlie's edges at `sqrt(2) / d_C`.
    pub fn bell(graph: Graph, w: usize, a: usize, b: usize) -> Result<Self> {
        let d_c = graph.degree(w.min(graph.n().saturating_sub(1)));
        let mut spec = Self::new(graph, Endpoints::Bell { w, a, b })?;
        if d_c == 0 {
            return Err(Error::Protocol(format!("Charlie's node {w} is isolated")));
        }
        spec.charlie_coupling = Some(2f64.sqrt() / d_c as f64);
        Ok(spec)
    }

    fn new(graph: Graph, endpoints: Endpoints) -> Result<Self> {
        let vs = endpoints.vertices();
        if let Some(&v) = vs.iter().find(|&&v| v >= graph.n()) {
            return Err(Error::param(
                "endpoints",
                format!("vertex {v} out of range for n = {}", graph.n()),
            ));
        }
        for (k, &u) in vs.iter().enumerate() {
            if vs[k + 1..].contains(&u) {
                return Err(Error::param("endpoints", format!("vertex {u} repeated")));
            }
        }
        let gamma = match choose_gamma(&graph, GammaMode::MeanFieldInvNp) {
            Ok(g) => g,
            // Custom graphs: the empirical edge density stands in for p.
            Err(_) if graph.edge_count() > 0 => 1.0 / (graph.n() as f64 * graph.density()),
            Err(e) => return Err(e),
        };
        Ok(ProtocolSpec {
            graph,
            endpoints,
            gamma,
            charlie_coupling: None,
        })
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(Error::param("gamma", format!("{gamma} must be non-negative")));
        }
        self.gamma = gamma;
        Ok(self)
    }

    pub fn with_charlie_coupling(mut self, coupling: f64) -> Result<Self> {
        if !coupling.is_finite() {
            return Err(Error::param("charlie_coupling", "must be finite"));
        }
        self.charlie_coupling = Some(coupling);
        Ok(self)
    }

    pub fn kind(&self) -> ProtocolKind {
        self.endpoints.kind()
    }

    /// Pairs of endpoints that are adjacent. The protocols assume none are;
    /// violations are reported, not rejected.
    pub fn warnings(&self) -> Vec<String> {
        let vs = self.endpoints.vertices();
        let mut out = Vec::new();
        for (k, &u) in vs.iter().enumerate() {
            for &v in &vs[k + 1..] {
                if self.graph.has_edge(u, v) {
                    out.push(format!("endpoints {u} and {v} are adjacent"));
                }
            }
        }
        out
    }
}

/// `H = -|i><i| - |j><j| - gamma A`.
pub fn build_transfer_hamiltonian(spec: &ProtocolSpec) -> Result<Hamiltonian> {
    let Endpoints::Transfer { i, j } = spec.endpoints else {
        return Err(Error::Protocol("not a transfer spec".into()));
    };
    let g = &spec.graph;
    let gamma = spec.gamma;
    let mut m = Mat::from_fn(g.n(), g.n(), |u, v| if g.has_edge(u, v) { -gamma } else { 0.0 });
    m[(i, i)] = -1.0;
    m[(j, j)] = -1.0;
    Hamiltonian::new(m)
}

/// Site energies `-1` at `w`, `a`, `b`; couplings `-charlie_coupling` on the
/// edges of `w` and `-gamma` elsewhere.
pub fn build_bell_hamiltonian(spec: &ProtocolSpec) -> Result<Hamiltonian> {
    let Endpoints::Bell { w, a, b } = spec.endpoints else {
        return Err(Error::Protocol("not a Bell spec".into()));
    };
    let g = &spec.graph;
    let d_c = g.degree(w);
    if d_c == 0 {
        return Err(Error::Protocol(format!("Charlie's node {w} is isolated")));
    }
    let charlie = spec
        .charlie_coupling
        .unwrap_or(2f64.sqrt() / d_c as f64);
    let gamma = spec.gamma;
    let mut m = Mat::from_fn(g.n(), g.n(), |u, v| {
        if !g.has_edge(u, v) {
            0.0
        } else if u == w || v == w {
            -charlie
        } else {
            -gamma
        }
    });
    for v in [w, a, b] {
        m[(v, v)] = -1.0;
    }
    Hamiltonian::new(m)
}

/// Three-level reduction on `{|i>, |s>, |j>}` (transfer) or
/// `{|w>, |s>, |s_ab>}` (Bell): diagonal `-1`, nearest-neighbour couplings
/// `-1/sqrt(n)` or `-sqrt(2/n)`.
pub fn effective_3level(kind: ProtocolKind, n: usize) -> Result<Mat<f64>> {
    if n < 3 {
        return Err(Error::param("n", "need at least 3 vertices"));
    }
    let g = effective_coupling(kind, n);
    let mut m = Mat::<f64>::zeros(3, 3);
    for k in 0..3 {
        m[(k, k)] = -1.0;
    }
    for k in 0..2 {
        m[(k, k + 1)] = -g;
        m[(k + 1, k)] = -g;
    }
    Ok(m)
}

/// Coupling of the three-level chain.
pub fn effective_coupling(kind: ProtocolKind, n: usize) -> f64 {
    match kind {
        ProtocolKind::Transfer => 1.0 / (n as f64).sqrt(),
        ProtocolKind::Bell => (2.0 / n as f64).sqrt(),
    }
}

/// End-to-end probability of the exact three-level chain,
/// `sin^4(g t / sqrt(2))`.
pub fn three_level_fidelity(kind: ProtocolKind, n: usize, t: f64) -> f64 {
    let g = effective_coupling(kind, n);
    (g * t / 2f64.sqrt()).sin().powi(4)
}

/// `pi sqrt(n/2)` for transfer, `pi sqrt(n) / 2` for the Bell pair.
pub fn predicted_time(kind: ProtocolKind, n: usize) -> f64 {
    PI / (2f64.sqrt() * effective_coupling(kind, n))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolResult {
    pub kind: ProtocolKind,
    pub endpoints: Endpoints,
    pub trace: EvolutionTrace,
    pub predicted_time: f64,
    pub fidelity_at_predicted_time: f64,
    pub peak_fidelity: f64,
    pub warnings: Vec<String>,
}

/// JSON summary of a protocol run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolSummary {
    pub kind: ProtocolKind,
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub endpoints: Endpoints,
    pub predicted_time: f64,
    pub fidelity_at_predicted_time: f64,
    pub peak_fidelity: f64,
    pub peak_time: f64,
    pub warnings: Vec<String>,
}

impl ProtocolResult {
    pub fn summary(&self, g: &Graph) -> ProtocolSummary {
        ProtocolSummary {
            kind: self.kind,
            n: g.n(),
            p: crate::spectra::effective_p(g),
            seed: g.seed(),
            endpoints: self.endpoints,
            predicted_time: self.predicted_time,
            fidelity_at_predicted_time: self.fidelity_at_predicted_time,
            peak_fidelity: self.peak_fidelity,
            peak_time: self.trace.peak_time,
            warnings: self.warnings.clone(),
        }
    }
}

/// Default window for protocol traces: one and a half protocol times.
pub fn default_protocol_t_max(kind: ProtocolKind, n: usize) -> f64 {
    1.5 * predicted_time(kind, n)
}

fn run(
    spec: &ProtocolSpec,
    h: &Hamiltonian,
    start: &QuantumState,
    target: &QuantumState,
    t_max: f64,
    steps: usize,
    exec: Execution,
) -> Result<ProtocolResult> {
    let amp = TransitionAmplitude::new(h, start, target)?;
    let trace = trace_curve(|t| amp.probability(t), t_max, steps, exec)?;
    let predicted_time = predicted_time(spec.kind(), spec.graph.n());
    Ok(ProtocolResult {
        kind: spec.kind(),
        endpoints: spec.endpoints,
        fidelity_at_predicted_time: amp.probability(predicted_time),
        peak_fidelity: trace.peak_value,
        trace,
        predicted_time,
        warnings: spec.warnings(),
    })
}

/// `|<j|exp(-iHt)|i>|^2` on `[0, t_max]`.
pub fn run_transfer(spec: &ProtocolSpec, t_max: f64, steps: usize) -> Result<ProtocolResult> {
    run_transfer_with(spec, t_max, steps, Execution::default())
}

pub fn run_transfer_with(
    spec: &ProtocolSpec,
    t_max: f64,
    steps: usize,
    exec: Execution,
) -> Result<ProtocolResult> {
    let Endpoints::Transfer { i, j } = spec.endpoints else {
        return Err(Error::Protocol("not a transfer spec".into()));
    };
    let n = spec.graph.n();
    let h = build_transfer_hamiltonian(spec)?;
    run(
        spec,
        &h,
        &QuantumState::basis(n, i)?,
        &QuantumState::basis(n, j)?,
        t_max,
        steps,
        exec,
    )
}

/// `(|a> + |b>) / sqrt(2)`, or with `sign = -1` the antisymmetric combination.
pub fn pair_state(n: usize, a: usize, b: usize, sign: f64) -> Result<QuantumState> {
    if a >= n || b >= n || a == b {
        return Err(Error::param("endpoints", format!("invalid pair ({a}, {b})")));
    }
    let mut v = vec![0.0; n];
    v[a] = 1.0;
    v[b] = sign;
    QuantumState::from_real(&v)
}

/// `|<s_ab|exp(-iHt)|w>|^2` on `[0, t_max]`.
pub fn run_bell(spec: &ProtocolSpec, t_max: f64, steps: usize) -> Result<ProtocolResult> {
    run_bell_with(spec, t_max, steps, Execution::default())
}

pub fn run_bell_with(
    spec: &ProtocolSpec,
    t_max: f64,
    steps: usize,
    exec: Execution,
) -> Result<ProtocolResult> {
    let Endpoints::Bell { w, a, b } = spec.endpoints else {
        return Err(Error::Protocol("not a Bell spec".into()));
    };
    let n = spec.graph.n();
    let h = build_bell_hamiltonian(spec)?;
    run(
        spec,
        &h,
        &QuantumState::basis(n, w)?,
        &pair_state(n, a, b, 1.0)?,
        t_max,
        steps,
        exec,
    )
}

/// Largest `|<s-_ab|exp(-iHt)|w>|^2` over `steps` uniform points of `[0, t_max]`.
pub fn bell_leakage(spec: &ProtocolSpec, t_max: f64, steps: usize) -> Result<f64> {
    let Endpoints::Bell { w, a, b } = spec.endpoints else {
        return Err(Error::Protocol("not a Bell spec".into()));
    };
    let n = spec.graph.n();
    let h = build_bell_hamiltonian(spec)?;
    let amp = TransitionAmplitude::new(&h, &QuantumState::basis(n, w)?, &pair_state(n, a, b, -1.0)?)?;
    let trace = trace_curve(|t| amp.probability(t), t_max, steps, Execution::Sequential)?;
    Ok(trace.peak_value)
}

/// Lexicographically smallest non-adjacent pair `i < j`.
pub fn first_non_adjacent_pair(g: &Graph) -> Option<(usize, usize)> {
    let n = g.n();
    (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .find(|&(i, j)| !g.has_edge(i, j))
}

/// Lexicographically smallest pairwise non-adjacent triple `w < a < b`
/// with `deg(w) > 0`.
pub fn first_independent_triple(g: &Graph) -> Option<(usize, usize, usize)> {
    let n = g.n();
    for w in 0..n {
        if g.degree(w) == 0 {
            continue;
        }
        for a in (w + 1)..n {
            if g.has_edge(w, a) {
                continue;
            }
            for b in (a + 1)..n {
                if !g.has_edge(w, b) && !g.has_edge(a, b) {
                    return Some((w, a, b));
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::evolve;
    use crate::graph::{complete, erdos_renyi};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn transfer_hamiltonian_on_path() {
        let p3 = Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
        let spec = ProtocolSpec::transfer(p3, 0, 2).unwrap().with_gamma(1.0).unwrap();
        let h = build_transfer_hamiltonian(&spec).unwrap();
        let m = h.matrix();
        assert_eq!([m[(0, 0)], m[(1, 1)], m[(2, 2)]], [-1.0, 0.0, -1.0]);
        assert_eq!([m[(0, 1)], m[(1, 2)], m[(0, 2)]], [-1.0, -1.0, 0.0]);
        assert!(spec.warnings().is_empty());

        let g = erdos_renyi(12, 0.5, 1).unwrap();
        let spec = ProtocolSpec::transfer(g, 3, 7).unwrap().with_gamma(0.0).unwrap();
        let h = build_transfer_hamiltonian(&spec).unwrap();
        for u in 0..12 {
            for v in 0..12 {
                let expected = if u == v && (u == 3 || u == 7) { -1.0 } else { 0.0 };
                assert_eq!(h.matrix()[(u, v)], expected);
            }
        }
    }

    #[test]
    fn spec_validation() {
        let g = complete(4).unwrap();
        assert!(ProtocolSpec::transfer(g.clone(), 1, 1).is_err());
        assert!(ProtocolSpec::transfer(g.clone(), 0, 4).is_err());
        let spec = ProtocolSpec::transfer(g.clone(), 0, 1).unwrap();
        assert_eq!(spec.warnings().len(), 1);
        let spec = ProtocolSpec::bell(g, 0, 1, 2).unwrap();
        assert_eq!(spec.warnings().len(), 3);
        let isolated = Graph::from_edges(4, &[(1, 2)]).unwrap();
        assert!(matches!(
            ProtocolSpec::bell(isolated, 0, 1, 3),
            Err(Error::InvalidParameter { .. }) | Err(Error::Protocol(_))
        ));
    }

    #[test]
    fn three_level_matrices() {
        let m = effective_3level(ProtocolKind::Transfer, 100).unwrap();
        assert!(close(m[(0, 1)], -0.1, 1e-15));
        assert_eq!(m[(1, 1)], -1.0);
        assert_eq!(m[(0, 2)], 0.0);
        let m = effective_3level(ProtocolKind::Bell, 1000).unwrap();
        assert!(close(m[(1, 2)], -(0.002f64.sqrt()), 1e-15));
        assert_eq!(m[(2, 0)], 0.0);
        for kind in [ProtocolKind::Transfer, ProtocolKind::Bell] {
            let m = effective_3level(kind, 50).unwrap();
            for u in 0..3 {
                for v in 0..3 {
                    assert_eq!(m[(u, v)], m[(v, u)]);
                }
            }
        }
        assert!(effective_3level(ProtocolKind::Bell, 2).is_err());
    }

    #[test]
    fn three_level_dynamics_closed_form() {
        // Eigenvalues of the chain are -1 and -1 +- sqrt(2) g; the
        // end-to-end amplitude is (cos(sqrt(2) g t) - 1)/2 up to a phase.
        for kind in [ProtocolKind::Transfer, ProtocolKind::Bell] {
            let n = 200;
            let h = Hamiltonian::new(effective_3level(kind, n).unwrap()).unwrap();
            let g = effective_coupling(kind, n);
            let mut eig = h.spectrum().unwrap().eigenvalues().to_vec();
            eig.sort_by(|a, b| a.partial_cmp(b).unwrap());
            assert!(close(eig[0], -1.0 - 2f64.sqrt() * g, 1e-12));
            assert!(close(eig[1], -1.0, 1e-12));
            assert!(close(eig[2], -1.0 + 2f64.sqrt() * g, 1e-12));

            let start = QuantumState::basis(3, 0).unwrap();
            let end = QuantumState::basis(3, 2).unwrap();
            for t in [0.0, 3.0, 17.0, predicted_time(kind, n)] {
                let p = end.overlap(&evolve(&h, &start, t).unwrap());
                assert!(close(p, three_level_fidelity(kind, n, t), 1e-12));
            }
            let at_t = end.overlap(&evolve(&h, &start, predicted_time(kind, n)).unwrap());
            assert!(close(at_t, 1.0, 1e-12));
        }
        assert!(close(predicted_time(ProtocolKind::Transfer, 50), PI * 5.0, 1e-12));
        assert!(close(predicted_time(ProtocolKind::Bell, 100), PI * 5.0, 1e-12));
    }

    #[test]
    fn bell_hamiltonian_entries() {
        // Star with Charlie at the centre, plus a far edge.
        let star = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (4, 5)]).unwrap();
        let spec = ProtocolSpec::bell(star, 0, 4, 5).unwrap().with_gamma(0.25).unwrap();
        let h = build_bell_hamiltonian(&spec).unwrap();
        let m = h.matrix();
        let charlie = 2f64.sqrt() / 3.0;
        for v in 1..=3 {
            assert!(close(m[(0, v)], -charlie, 1e-15));
        }
        assert_eq!(m[(4, 5)], -0.25);
        for v in [0, 4, 5] {
            assert_eq!(m[(v, v)], -1.0);
        }
        let spec = spec.with_gamma(0.0).unwrap();
        let h = build_bell_hamiltonian(&spec).unwrap();
        assert_eq!(h.matrix()[(4, 5)], 0.0);
        assert!(close(h.matrix()[(0, 1)], -charlie, 1e-15));
    }

    #[test]
    fn protocols_start_at_zero() {
        let g = erdos_renyi(60, 0.3, 4).unwrap();
        let (i, j) = first_non_adjacent_pair(&g).unwrap();
        let res = run_transfer(&ProtocolSpec::transfer(g.clone(), i, j).unwrap(), 20.0, 50).unwrap();
        assert!(res.trace.probabilities[0] < 1e-28);
        let (w, a, b) = first_independent_triple(&g).unwrap();
        let res = run_bell(&ProtocolSpec::bell(g, w, a, b).unwrap(), 20.0, 50).unwrap();
        assert!(res.trace.probabilities[0] < 1e-28);
    }

    #[test]
    fn endpoint_pickers() {
        let g = Graph::from_edges(4, &[(0, 1), (0, 2), (1, 2)]).unwrap();
        assert_eq!(first_non_adjacent_pair(&g), Some((0, 3)));
        assert_eq!(first_independent_triple(&g), None);
        assert_eq!(first_non_adjacent_pair(&complete(5).unwrap()), None);
        let g = Graph::from_edges(5, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(first_independent_triple(&g), Some((0, 2, 4)));
    }
}
