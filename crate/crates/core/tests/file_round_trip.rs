use qwalk::ensemble::{parse_records_jsonl, run_ensemble, AggregateFile, EnsembleConfig, EnsembleTask, GraphSpec};
use qwalk::experiments::{figure1, figure2, Figure1Config, Figure1Summary, Figure2Config};
use qwalk::graph::erdos_renyi;
use qwalk::io::{json_string, parse_csv};
use qwalk::par::Execution;
use qwalk::protocols::{first_independent_triple, run_bell, ProtocolSpec, ProtocolSummary};
use qwalk::search::{run_search, search_report, GammaMode, SearchInstance, SearchReport};
use qwalk::spectra::{eigendecompose, empirical_bulk_density, spectral_report_from, SpectralReport};
use qwalk::dynamics::{EvolutionTrace, TraceSummary};

fn json_round_trip<T>(value: &T)
where
    T: serde::Serialize + serde::de::DeserializeOwned + PartialEq + std::fmt::Debug,
{
    let text = json_string(value).unwrap();
    let back: T = serde_json::from_str(&text).unwrap();
    assert_eq!(&back, value);
    assert_eq!(json_string(&back).unwrap(), text);
}

#[test]
fn spectrum_histogram_and_report() {
    let g = erdos_renyi(70, 0.2, 5).unwrap();
    let s = eigendecompose(g.adjacency_matrix().as_ref()).unwrap();
    let table = parse_csv(&s.to_csv()).unwrap();
    assert_eq!(table.header, ["index", "eigenvalue"]);
    assert_eq!(table.column("eigenvalue").unwrap(), s.eigenvalues());

    let h = empirical_bulk_density(&s, 12).unwrap();
    let t = parse_csv(&h.to_csv()).unwrap();
    assert_eq!(t.column("density").unwrap(), h.densities);
    let mut edges = t.column("bin_left").unwrap();
    edges.push(*t.column("bin_right").unwrap().last().unwrap());
    assert_eq!(edges, h.edges);

    let report: SpectralReport = spectral_report_from(&g, &s, 1.0 / 14.0);
    json_round_trip(&report);
    // Non-ER graphs carry no delocalization bound.
    let custom = qwalk::graph::Graph::from_edges(3, &[(0, 1), (1, 2)]).unwrap();
    let cs = eigendecompose(custom.adjacency_matrix().as_ref()).unwrap();
    json_round_trip(&spectral_report_from(&custom, &cs, 0.5));
}

#[test]
fn search_trace_and_report() {
    let g = erdos_renyi(60, 0.3, 8).unwrap();
    let si = SearchInstance::new(g, 4, GammaMode::ExactInverseLambda1).unwrap();
    let trace = run_search(&si, 40.0, 90).unwrap();
    let back = EvolutionTrace::from_csv(&trace.to_csv("probability"), &trace.summary()).unwrap();
    assert_eq!(back, trace);
    json_round_trip::<TraceSummary>(&trace.summary());
    json_round_trip::<SearchReport>(&search_report(&si, &trace).unwrap());
}

#[test]
fn protocol_summary() {
    let g = erdos_renyi(50, 0.3, 2).unwrap();
    let (w, a, b) = first_independent_triple(&g).unwrap();
    let res = run_bell(&ProtocolSpec::bell(g.clone(), w, a, b).unwrap(), 30.0, 40).unwrap();
    json_round_trip::<ProtocolSummary>(&res.summary(&g));
    let t = parse_csv(&res.trace.to_csv("fidelity")).unwrap();
    assert_eq!(t.column("fidelity").unwrap(), res.trace.probabilities);
}

#[test]
fn ensemble_files() {
    let cfg = EnsembleConfig::new(GraphSpec::ErdosRenyi { n: 40, p: 0.25 }, EnsembleTask::Search, 5, 1);
    let summary = run_ensemble(&cfg, Execution::default()).unwrap();
    let records = parse_records_jsonl(&summary.records_jsonl().unwrap()).unwrap();
    assert_eq!(records, summary.records);
    json_round_trip::<AggregateFile>(&summary.aggregate_file());
}

#[test]
fn figure_files() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = Figure1Config {
        n: 60,
        p_list: vec![0.3],
        steps: 40,
        ..Default::default()
    };
    let panel = &figure1(&cfg, Execution::default()).unwrap()[0];
    let paths = panel.write(dir.path()).unwrap();
    assert_eq!(paths.len(), 3);
    let trace = parse_csv(&std::fs::read_to_string(&paths[0]).unwrap()).unwrap();
    assert_eq!(trace.column("predicted").unwrap(), panel.predicted);
    let spectrum = parse_csv(&std::fs::read_to_string(&paths[1]).unwrap()).unwrap();
    assert_eq!(spectrum.column("eigenvalue").unwrap(), panel.eigenvalues);
    let summary: Figure1Summary = qwalk::io::read_json(&paths[2]).unwrap();
    assert_eq!(summary, panel.summary());

    let out = figure2(&Figure2Config { steps: 30, ..Default::default() }, Execution::default()).unwrap();
    let paths = out.write(dir.path()).unwrap();
    let back: ProtocolSummary = qwalk::io::read_json(&paths[1]).unwrap();
    assert_eq!(back, out.summary());
}
