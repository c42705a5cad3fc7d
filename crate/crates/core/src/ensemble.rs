//! Ensembles of independent random instances with aggregate statistics.
//!
//! Instance `k` uses seed `seed + k`. A failing instance is recorded with its
//! error message and excluded from the aggregates; it does not stop the run.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::{default_t_max, DEFAULT_STEPS};
use crate::error::{Error, Result};
use crate::graph::{complete, erdos_renyi, random_regular, Graph};
use crate::par::Execution;
use crate::protocols::{
    default_protocol_t_max, first_independent_triple, first_non_adjacent_pair, run_bell_with,
    run_transfer_with, ProtocolKind, ProtocolResult, ProtocolSpec,
};
use crate::search::{
    build_search_hamiltonian, choose_gamma_with, lowest_pair_separation, run_search_with,
    search_report, GammaMode, SearchInstance,
};
use crate::spectra::spectral_report_from;

/// Random graph family of an ensemble.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum GraphSpec {
    ErdosRenyi { n: usize, p: f64 },
    RandomRegular { n: usize, d: usize },
    Complete { n: usize },
}

impl GraphSpec {
    pub fn n(&self) -> usize {
        match *self {
            GraphSpec::ErdosRenyi { n, .. }
            | GraphSpec::RandomRegular { n, .. }
            | GraphSpec::Complete { n } => n,
        }
    }

    pub fn generate(&self, seed: u64) -> Result<Graph> {
        match *self {
            GraphSpec::ErdosRenyi { n, p } => erdos_renyi(n, p, seed),
            GraphSpec::RandomRegular { n, d } => random_regular(n, d, seed),
            GraphSpec::Complete { n } => complete(n),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnsembleTask {
    /// Adjacency spectrum statistics only.
    Spectrum,
    Search,
    Transfer,
    Bell,
}

impl EnsembleTask {
    pub fn as_str(self) -> &'static str {
        match self {
            EnsembleTask::Spectrum => "spectrum",
            EnsembleTask::Search => "search",
            EnsembleTask::Transfer => "transfer",
            EnsembleTask::Bell => "bell",
        }
    }
}

impl fmt::Display for EnsembleTask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EnsembleTask {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectrum" => Ok(EnsembleTask::Spectrum),
            "search" => Ok(EnsembleTask::Search),
            "transfer" => Ok(EnsembleTask::Transfer),
            "bell" => Ok(EnsembleTask::Bell),
            other => Err(Error::param(
                "task",
                format!("unknown task `{other}` (expected spectrum, search, transfer or bell)"),
            )),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub graph: GraphSpec,
    pub task: EnsembleTask,
    pub size: usize,
    pub seed: u64,
    pub gamma_mode: GammaMode,
    /// Marked vertex for the search task.
    pub w: usize,
    /// Defaults to the task's natural window when absent.
    pub t_max: Option<f64>,
    pub steps: usize,
}

impl EnsembleConfig {
    pub fn new(graph: GraphSpec, task: EnsembleTask, size: usize, seed: u64) -> Self {
        EnsembleConfig {
            graph,
            task,
            size,
            seed,
            gamma_mode: GammaMode::MeanFieldInvNp,
            w: 0,
            t_max: None,
            steps: DEFAULT_STEPS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.size == 0 {
            return Err(Error::param("size", "ensemble needs at least one instance"));
        }
        if self.task == EnsembleTask::Search && self.w >= self.graph.n() {
            return Err(Error::param(
                "w",
                format!("marked vertex {} out of range for n = {}", self.w, self.graph.n()),
            ));
        }
        if self.steps < 2 {
            return Err(Error::param("steps", "need at least 2 grid points"));
        }
        if let Some(t) = self.t_max {
            if !(t > 0.0) || !t.is_finite() {
                return Err(Error::param("t_max", format!("{t} must be positive and finite")));
            }
        }
        Ok(())
    }

    pub fn instance_seed(&self, k: usize) -> u64 {
        self.seed.wrapping_add(k as u64)
    }
}

/// One ensemble member. Non-finite values are left out of `values`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub index: usize,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub values: BTreeMap<String, f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stat {
    pub count: usize,
    pub mean: f64,
    /// Sample standard deviation; 0 for a single value.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl Stat {
    pub fn from_values(values: &[f64]) -> Option<Stat> {
        if values.is_empty() {
            return None;
        }
        let count = values.len();
        let mean = values.iter().sum::<f64>() / count as f64;
        let std = if count > 1 {
            let ss: f64 = values.iter().map(|x| (x - mean).powi(2)).sum();
            (ss / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Some(Stat {
            count,
            mean,
            std,
            min,
            max,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSummary {
    pub config: EnsembleConfig,
    pub records: Vec<InstanceRecord>,
    pub aggregate: BTreeMap<String, Stat>,
    pub failures: usize,
}

/// The part of a summary written to the aggregate file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AggregateFile {
    pub config: EnsembleConfig,
    pub instances: usize,
    pub failures: usize,
    pub aggregate: BTreeMap<String, Stat>,
}

pub fn aggregate(records: &[InstanceRecord]) -> BTreeMap<String, Stat> {
    let mut columns: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for r in records.iter().filter(|r| r.error.is_none()) {
        for (k, &v) in &r.values {
            columns.entry(k.clone()).or_default().push(v);
        }
    }
    columns
        .into_iter()
        .filter_map(|(k, vs)| Stat::from_values(&vs).map(|s| (k, s)))
        .collect()
}

impl EnsembleSummary {
    pub fn from_records(config: EnsembleConfig, records: Vec<InstanceRecord>) -> Self {
        let failures = records.iter().filter(|r| r.error.is_some()).count();
        EnsembleSummary {
            aggregate: aggregate(&records),
            config,
            records,
            failures,
        }
    }

    /// Checks that the aggregates are exactly what the records give.
    pub fn verify(&self) -> Result<()> {
        let failures = self.records.iter().filter(|r| r.error.is_some()).count();
        if failures != self.failures || aggregate(&self.records) != self.aggregate {
            return Err(Error::Numerical(
                "ensemble aggregates do not match the instance records".into(),
            ));
        }
        Ok(())
    }

    pub fn column(&self, key: &str) -> Vec<f64> {
        self.records
            .iter()
            .filter(|r| r.error.is_none())
            .filter_map(|r| r.values.get(key).copied())
            .collect()
    }

    /// One compact JSON object per instance, newline terminated.
    pub fn records_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for r in &self.records {
            out.push_str(&serde_json::to_string(r)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn aggregate_file(&self) -> AggregateFile {
        AggregateFile {
            config: self.config.clone(),
            instances: self.records.len(),
            failures: self.failures,
            aggregate: self.aggregate.clone(),
        }
    }
}

pub fn parse_records_jsonl(text: &str) -> Result<Vec<InstanceRecord>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| {
            serde_json::from_str(l).map_err(|e| Error::Parse {
                line: k + 1,
                message: e.to_string(),
            })
        })
        .collect()
}

fn insert(values: &mut BTreeMap<String, f64>, key: &str, v: f64) {
    if v.is_finite() {
        values.insert(key.to_owned(), v);
    }
}

fn protocol_values(values: &mut BTreeMap<String, f64>, res: &ProtocolResult) {
    insert(values, "fidelity_at_predicted_time", res.fidelity_at_predicted_time);
    insert(values, "peak_fidelity", res.peak_fidelity);
    insert(values, "peak_time", res.trace.peak_time);
    insert(values, "adjacent_endpoints", res.warnings.len() as f64);
}

/// Runs one instance; `inner` drives its time grid.
pub fn run_instance(config: &EnsembleConfig, k: usize, inner: Execution) -> InstanceRecord {
    let seed = config.instance_seed(k);
    let mut values = BTreeMap::new();
    let outcome = instance_values(config, seed, inner, &mut values);
    InstanceRecord {
        index: k,
        seed,
        error: outcome.err().map(|e| e.to_string()),
        values,
    }
}

fn instance_values(
    config: &EnsembleConfig,
    seed: u64,
    inner: Execution,
    values: &mut BTreeMap<String, f64>,
) -> Result<()> {
    let g = config.graph.generate(seed)?;
    let n = g.n();
    match config.task {
        EnsembleTask::Spectrum | EnsembleTask::Search => {
            let si = SearchInstance::new(g, config.w, config.gamma_mode)?;
            let spectrum = si.adjacency_spectrum()?;
            let gamma = choose_gamma_with(si.graph(), config.gamma_mode, Some(spectrum))?;
            let report = spectral_report_from(si.graph(), spectrum, gamma);
            insert(values, "gamma", gamma);
            insert(values, "lambda1", report.lambda1);
            insert(values, "lambda2", report.lambda2);
            insert(values, "lambda_min", report.lambda_min);
            insert(values, "c", report.ratio_c);
            insert(values, "alpha", report.alpha);
            if let Some(rhs) = report.delocalization_rhs {
                insert(values, "delocalization_rhs", rhs);
            }
            if config.task == EnsembleTask::Search {
                let t_max = config.t_max.unwrap_or_else(|| default_t_max(n));
                let trace = run_search_with(&si, t_max, config.steps, inner)?;
                let rep = search_report(&si, &trace)?;
                insert(values, "peak_value", rep.peak_value);
                insert(values, "peak_time", rep.peak_time);
                insert(values, "predicted_amplitude", rep.predicted_amplitude);
                let h = build_search_hamiltonian(&si)?;
                let sep = lowest_pair_separation(h.spectrum()?)?;
                insert(values, "gap", sep.gap);
                insert(values, "splitting", sep.splitting);
                insert(values, "isolated", if sep.isolated { 1.0 } else { 0.0 });
            }
        }
        EnsembleTask::Transfer => {
            let (i, j) = first_non_adjacent_pair(&g)
                .ok_or_else(|| Error::Protocol("no non-adjacent pair".into()))?;
            let spec = ProtocolSpec::transfer(g, i, j)?;
            let t_max = config
                .t_max
                .unwrap_or_else(|| default_protocol_t_max(ProtocolKind::Transfer, n));
            let res = run_transfer_with(&spec, t_max, config.steps, inner)?;
            protocol_values(values, &res);
        }
        EnsembleTask::Bell => {
            let (w, a, b) = first_independent_triple(&g)
                .ok_or_else(|| Error::Protocol("no pairwise non-adjacent triple".into()))?;
            let spec = ProtocolSpec::bell(g, w, a, b)?;
            let t_max = config
                .t_max
                .unwrap_or_else(|| default_protocol_t_max(ProtocolKind::Bell, n));
            let res = run_bell_with(&spec, t_max, config.steps, inner)?;
            protocol_values(values, &res);
        }
    }
    Ok(())
}

/// Runs every instance, spreading them over `exec`. Each instance runs its
/// time grid sequentially.
pub fn run_ensemble(config: &EnsembleConfig, exec: Execution) -> Result<EnsembleSummary> {
    config.validate()?;
    let records = exec.map_indices(config.size, |k| run_instance(config, k, Execution::Sequential));
    Ok(EnsembleSummary::from_records(config.clone(), records))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats() {
        let s = Stat::from_values(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.count, 4);
        assert_eq!(s.mean, 2.5);
        assert!((s.std - (5.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert_eq!((s.min, s.max), (1.0, 4.0));
        let one = Stat::from_values(&[7.5]).unwrap();
        assert_eq!((one.mean, one.std, one.min, one.max), (7.5, 0.0, 7.5, 7.5));
        assert!(Stat::from_values(&[]).is_none());
    }

    #[test]
    fn single_instance_aggregate_equals_record() {
        let cfg = EnsembleConfig::new(
            GraphSpec::ErdosRenyi { n: 40, p: 0.3 },
            EnsembleTask::Search,
            1,
            3,
        );
        let summary = run_ensemble(&cfg, Execution::Sequential).unwrap();
        summary.verify().unwrap();
        let rec = &summary.records[0];
        assert!(rec.error.is_none());
        assert_eq!(rec.seed, 3);
        for (k, v) in &rec.values {
            let s = summary.aggregate[k];
            assert_eq!((s.count, s.mean, s.min, s.max, s.std), (1, *v, *v, *v, 0.0));
        }
    }

    #[test]
    fn failures_are_recorded() {
        // Odd n with odd d has no 3-regular graph: every instance fails.
        let cfg = EnsembleConfig::new(
            GraphSpec::RandomRegular { n: 9, d: 3 },
            EnsembleTask::Spectrum,
            3,
            0,
        );
        let summary = run_ensemble(&cfg, Execution::Sequential).unwrap();
        assert_eq!(summary.failures, 3);
        assert!(summary.aggregate.is_empty());
        assert!(summary.records.iter().all(|r| r.error.is_some()));
        summary.verify().unwrap();
    }

    #[test]
    fn tampered_aggregate_fails_verification() {
        let cfg = EnsembleConfig::new(GraphSpec::Complete { n: 6 }, EnsembleTask::Spectrum, 2, 0);
        let mut summary = run_ensemble(&cfg, Execution::Sequential).unwrap();
        summary.verify().unwrap();
        summary.aggregate.get_mut("lambda1").unwrap().mean += 1e-12;
        assert!(summary.verify().is_err());
    }

    #[test]
    fn records_round_trip() {
        let cfg = EnsembleConfig::new(
            GraphSpec::ErdosRenyi { n: 30, p: 0.4 },
            EnsembleTask::Transfer,
            4,
            11,
        );
        let summary = run_ensemble(&cfg, Execution::default()).unwrap();
        let back = parse_records_jsonl(&summary.records_jsonl().unwrap()).unwrap();
        assert_eq!(back, summary.records);
        let sequential = run_ensemble(&cfg, Execution::Sequential).unwrap();
        assert_eq!(sequential, summary);
    }

    #[test]
    fn config_validation() {
        let mut cfg = EnsembleConfig::new(GraphSpec::Complete { n: 5 }, EnsembleTask::Search, 0, 0);
        assert!(cfg.validate().is_err());
        cfg.size = 1;
        cfg.w = 5;
        assert!(cfg.validate().is_err());
        cfg.w = 4;
        cfg.validate().unwrap();
        assert_eq!("bell".parse::<EnsembleTask>().unwrap(), EnsembleTask::Bell);
        assert!("grover".parse::<EnsembleTask>().is_err());
    }
}
