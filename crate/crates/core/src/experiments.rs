//! Data behind the two figures: search on `G(n, p)` across the percolation
//! threshold, and state transfer on a small random network.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::dynamics::{default_t_max, EvolutionTrace, DEFAULT_STEPS};
use crate::error::{Error, Result};
use crate::graph::{erdos_renyi, Graph};
use crate::io::{csv_string, fmt_f64, json_string, write_text};
use crate::par::Execution;
use crate::protocols::{
    default_protocol_t_max, first_non_adjacent_pair, run_transfer_with, three_level_fidelity,
    ProtocolKind, ProtocolResult, ProtocolSpec, ProtocolSummary,
};
use crate::search::{
    build_search_hamiltonian, ideal_search_time, ideal_success_probability, lowest_pair_separation,
    run_search_with, search_report, GammaMode, LowestPairSeparation, SearchInstance, SearchReport,
};

pub const FIGURE1_P: [f64; 3] = [0.1, 0.01, 0.002];
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure1Config {
    pub n: usize,
    pub p_list: Vec<f64>,
    pub seed: u64,
    pub w: usize,
    pub gamma_mode: GammaMode,
    pub t_max: Option<f64>,
    pub steps: usize,
}

impl Default for Figure1Config {
    fn default() -> Self {
        Figure1Config {
            n: 1000,
            p_list: FIGURE1_P.to_vec(),
            seed: DEFAULT_SEED,
            w: 0,
            gamma_mode: GammaMode::MeanFieldInvNp,
            t_max: None,
            steps: DEFAULT_STEPS,
        }
    }
}

/// One panel: the search curve against `sin^2(t / sqrt(n))` and the
/// spectrum of the search Hamiltonian.
#[derive(Clone, Debug, PartialEq)]
pub struct Figure1Panel {
    pub p: f64,
    pub trace: EvolutionTrace,
    pub predicted: Vec<f64>,
    /// Search Hamiltonian eigenvalues, descending.
    pub eigenvalues: Vec<f64>,
    pub separation: LowestPairSeparation,
    pub report: SearchReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure1Summary {
    pub p: f64,
    pub report: SearchReport,
    pub separation: LowestPairSeparation,
    /// Largest `|numeric - predicted|` on grid points up to `pi sqrt(n) / 2`.
    pub max_deviation: f64,
}

impl Figure1Panel {
    pub fn max_deviation(&self) -> f64 {
        let t_end = ideal_search_time(self.report.n);
        self.trace
            .times
            .iter()
            .zip(&self.trace.probabilities)
            .zip(&self.predicted)
            .filter(|((t, _), _)| **t <= t_end)
            .map(|((_, p), q)| (p - q).abs())
            .fold(0.0, f64::max)
    }

    /// Columns `t,numeric,predicted`.
    pub fn trace_csv(&self) -> String {
        csv_string(
            &["t", "numeric", "predicted"],
            self.trace
                .times
                .iter()
                .zip(&self.trace.probabilities)
                .zip(&self.predicted)
                .map(|((t, p), q)| vec![fmt_f64(*t), fmt_f64(*p), fmt_f64(*q)]),
        )
    }

    /// Columns `index,eigenvalue,lowest_pair`; the last is 1 for the two
    /// lowest eigenvalues.
    pub fn spectrum_csv(&self) -> String {
        let n = self.eigenvalues.len();
        csv_string(
            &["index", "eigenvalue", "lowest_pair"],
            self.eigenvalues.iter().enumerate().map(|(k, e)| {
                let tag = if k + 2 >= n { "1" } else { "0" };
                vec![(k + 1).to_string(), fmt_f64(*e), tag.to_owned()]
            }),
        )
    }

    pub fn summary(&self) -> Figure1Summary {
        Figure1Summary {
            p: self.p,
            report: self.report.clone(),
            separation: self.separation.clone(),
            max_deviation: self.max_deviation(),
        }
    }

    /// Writes `figure1_p<p>_{trace,spectrum}.csv` and `figure1_p<p>.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let stem = format!("figure1_p{}", fmt_f64(self.p));
        let files = [
            (format!("{stem}_trace.csv"), self.trace_csv()),
            (format!("{stem}_spectrum.csv"), self.spectrum_csv()),
            (format!("{stem}.json"), json_string(&self.summary())?),
        ];
        write_all(dir, &files)
    }
}

fn write_all(dir: &Path, files: &[(String, String)]) -> Result<Vec<PathBuf>> {
    files
        .iter()
        .map(|(name, text)| {
            let path = dir.join(name);
            write_text(&path, text)?;
            Ok(path)
        })
        .collect()
}

pub fn figure1_panel(cfg: &Figure1Config, p: f64, exec: Execution) -> Result<Figure1Panel> {
    let g = erdos_renyi(cfg.n, p, cfg.seed)?;
    let si = SearchInstance::new(g, cfg.w, cfg.gamma_mode)?;
    let t_max = cfg.t_max.unwrap_or_else(|| default_t_max(cfg.n));
    let trace = run_search_with(&si, t_max, cfg.steps, exec)?;
    let report = search_report(&si, &trace)?;
    let h = build_search_hamiltonian(&si)?;
    let spectrum = h.spectrum()?;
    let predicted = trace
        .times
        .iter()
        .map(|&t| ideal_success_probability(cfg.n, t))
        .collect();
    Ok(Figure1Panel {
        p,
        separation: lowest_pair_separation(spectrum)?,
        eigenvalues: spectrum.eigenvalues().to_vec(),
        trace,
        predicted,
        report,
    })
}

pub fn figure1(cfg: &Figure1Config, exec: Execution) -> Result<Vec<Figure1Panel>> {
    if cfg.p_list.is_empty() {
        return Err(Error::param("p", "need at least one edge probability"));
    }
    cfg.p_list
        .iter()
        .map(|&p| figure1_panel(cfg, p, exec))
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure2Config {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    /// Sender and receiver; the smallest non-adjacent pair when absent.
    pub endpoints: Option<(usize, usize)>,
    pub gamma: Option<f64>,
    pub t_max: Option<f64>,
    pub steps: usize,
}

impl Default for Figure2Config {
    fn default() -> Self {
        Figure2Config {
            n: 100,
            p: 0.2,
            seed: DEFAULT_SEED,
            endpoints: None,
            gamma: None,
            t_max: None,
            steps: DEFAULT_STEPS,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Figure2Output {
    pub graph: Graph,
    pub result: ProtocolResult,
}

impl Figure2Output {
    pub fn summary(&self) -> ProtocolSummary {
        self.result.summary(&self.graph)
    }

    /// Columns `t,fidelity,three_level`.
    pub fn trace_csv(&self) -> String {
        let n = self.graph.n();
        let trace = &self.result.trace;
        csv_string(
            &["t", "fidelity", "three_level"],
            trace.times.iter().zip(&trace.probabilities).map(|(t, f)| {
                vec![
                    fmt_f64(*t),
                    fmt_f64(*f),
                    fmt_f64(three_level_fidelity(ProtocolKind::Transfer, n, *t)),
                ]
            }),
        )
    }

    /// Writes `figure2_trace.csv` and `figure2.json`.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let files = [
            ("figure2_trace.csv".to_owned(), self.trace_csv()),
            ("figure2.json".to_owned(), json_string(&self.summary())?),
        ];
        write_all(dir, &files)
    }
}

pub fn figure2(cfg: &Figure2Config, exec: Execution) -> Result<Figure2Output> {
    let g = erdos_renyi(cfg.n, cfg.p, cfg.seed)?;
    let (i, j) = match cfg.endpoints {
        Some(e) => e,
        None => first_non_adjacent_pair(&g)
            .ok_or_else(|| Error::Protocol("graph has no non-adjacent pair".into()))?,
    };
    let mut spec = ProtocolSpec::transfer(g.clone(), i, j)?;
    if let Some(gamma) = cfg.gamma {
        spec = spec.with_gamma(gamma)?;
    }
    let t_max = cfg
        .t_max
        .unwrap_or_else(|| default_protocol_t_max(ProtocolKind::Transfer, cfg.n));
    let result = run_transfer_with(&spec, t_max, cfg.steps, exec)?;
    Ok(Figure2Output { graph: g, result })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::parse_csv;

    #[test]
    fn small_figure1_panel() {
        let cfg = Figure1Config {
            n: 80,
            p_list: vec![0.5],
            steps: 60,
            ..Default::default()
        };
        let panels = figure1(&cfg, Execution::Sequential).unwrap();
        let panel = &panels[0];
        let table = parse_csv(&panel.trace_csv()).unwrap();
        assert_eq!(table.header, ["t", "numeric", "predicted"]);
        assert_eq!(table.column("numeric").unwrap(), panel.trace.probabilities);
        let spec = parse_csv(&panel.spectrum_csv()).unwrap();
        let tags = spec.column("lowest_pair").unwrap();
        assert_eq!(tags.iter().sum::<f64>(), 2.0);
        assert_eq!(&tags[78..], &[1.0, 1.0]);
        assert!(panel.max_deviation() >= 0.0);
    }

    #[test]
    fn figure2_respects_explicit_endpoints() {
        let cfg = Figure2Config {
            endpoints: Some((3, 9)),
            steps: 50,
            ..Default::default()
        };
        let out = figure2(&cfg, Execution::Sequential).unwrap();
        assert_eq!(out.summary().endpoints, crate::protocols::Endpoints::Transfer { i: 3, j: 9 });
        let table = parse_csv(&out.trace_csv()).unwrap();
        assert_eq!(table.rows.len(), 50);
        assert!(figure2(
            &Figure2Config {
                endpoints: Some((3, 3)),
                ..Default::default()
            },
            Execution::Sequential
        )
        .is_err());
    }
}
