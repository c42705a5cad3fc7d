use faer::Mat;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qwalk::dynamics::QuantumState;
use qwalk::graph::{erdos_renyi, random_regular};
use qwalk::search::{
    choose_gamma, lemma1_rescaling, lemma1_search, perturbation_prediction, rescaling_bracket,
    rescaling_residual, run_search, GammaMode, SearchInstance,
};
use qwalk::spectra::{eigendecompose, Spectrum};

/// Spectrum whose eigenvector matrix is the Householder reflection taking
/// `e_0` to `a`, so vertex 0 has overlaps `a_i` with the eigenvectors.
fn synthetic(values: &[f64], a: &[f64]) -> Spectrum {
    let n = values.len();
    let mut u: Vec<f64> = a.iter().map(|x| -x).collect();
    u[0] += 1.0;
    let norm2: f64 = u.iter().map(|x| x * x).sum();
    let v = Mat::from_fn(n, n, |i, j| {
        let id = if i == j { 1.0 } else { 0.0 };
        if norm2 == 0.0 { id } else { id - 2.0 * u[i] * u[j] / norm2 }
    });
    Spectrum::from_parts(values.to_vec(), v).unwrap()
}

fn random_instance(k: usize, c: f64, seed: u64) -> Spectrum {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![1.0];
    let mut tail: Vec<f64> = (1..k).map(|_| c * (2.0 * rng.random::<f64>() - 1.0)).collect();
    tail.sort_by(|x, y| y.partial_cmp(x).unwrap());
    values.extend(tail);
    let mut a: Vec<f64> = (0..k).map(|_| rng.random::<f64>() - 0.5).collect();
    let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    a.iter_mut().for_each(|x| *x /= norm);
    synthetic(&values, &a)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn residual_changes_sign_on_bracket(k in 3usize..40, c in 0.01f64..0.95, seed: u64) {
        let s = random_instance(k, c, seed);
        let c_measured = s.eigenvalues()[1..].iter().fold(0.0f64, |m, l| m.max(l.abs()));
        let (lo, hi) = rescaling_bracket(c_measured);
        prop_assert!(rescaling_residual(&s, 0, lo) >= -1e-12);
        prop_assert!(rescaling_residual(&s, 0, hi) <= 1e-12);
        let sol = lemma1_rescaling(&s, 0).unwrap();
        prop_assert!(sol.r >= lo && sol.r <= hi);
        prop_assert!(sol.residual.abs() < 1e-10);
    }

    #[test]
    fn prediction_invariants(n in 2usize..100_000, delta in -0.5f64..0.5) {
        let p = perturbation_prediction(n, 1.0 + delta, 1.0).unwrap();
        let inv_n = 1.0 / n as f64;
        prop_assert!(p.amplitude > 0.0 && p.amplitude <= 1.0);
        prop_assert!(p.omega >= inv_n.sqrt() * (1.0 - 1e-15));
        prop_assert!(((p.mu * p.mu + inv_n) / (p.kappa * p.kappa) - 1.0).abs() <= 1e-12);
    }
}

#[test]
fn bisection_matches_grid_scan() {
    let s = random_instance(50, 0.5, 17);
    let sol = lemma1_rescaling(&s, 0).unwrap();
    let (lo, hi) = sol.bracket;
    let points = 1_000_000;
    let step = (hi - lo) / points as f64;
    let mut prev = rescaling_residual(&s, 0, lo);
    let mut root = None;
    for k in 1..=points {
        let r = lo + k as f64 * step;
        let f = rescaling_residual(&s, 0, r);
        if prev > 0.0 && f <= 0.0 {
            root = Some(r - step / 2.0);
            break;
        }
        prev = f;
    }
    let root = root.expect("scan found no sign change");
    assert!((sol.r - root).abs() <= step, "{} vs {root}", sol.r);
}

#[test]
fn regular_graphs_meet_the_rescaled_bound() {
    for seed in 0..4 {
        let (n, d) = (200usize, 4usize);
        let g = random_regular(n, d, seed).unwrap();
        let s = eigendecompose(g.adjacency_matrix().as_ref())
            .unwrap()
            .affine(1.0 / d as f64, 0.0)
            .unwrap();
        let out = lemma1_search(&s, 0, &QuantumState::uniform(n).unwrap()).unwrap();
        assert!(out.rescaling.c < 1.0);
        assert!(out.success >= out.bound - 0.1, "seed {seed}: {} < {}", out.success, out.bound);
    }
}

#[test]
fn mean_field_gamma_tracks_lambda1() {
    let n = 1000usize;
    let inside = (0..20u64)
        .filter(|&seed| {
            let g = erdos_renyi(n, 0.1, 500 + seed).unwrap();
            let gamma = choose_gamma(&g, GammaMode::MeanFieldInvNp).unwrap();
            let s = eigendecompose(g.adjacency_matrix().as_ref()).unwrap();
            (gamma * s.largest() - 1.0).abs() <= 1.0 / (n as f64).sqrt()
        })
        .count();
    assert!(inside >= 18, "{inside}/20");
}

#[test]
fn dense_graph_peak_matches_zero_detuning_amplitude() {
    let n = 1000;
    let g = erdos_renyi(n, 0.1, 42).unwrap();
    let si = SearchInstance::new(g, 0, GammaMode::MeanFieldInvNp).unwrap();
    let trace = run_search(&si, 2.0 * std::f64::consts::PI * (n as f64).sqrt(), 400).unwrap();
    let ideal = perturbation_prediction(n, 1.0, 1.0).unwrap();
    assert_eq!(ideal.amplitude, 1.0);
    assert!((trace.peak_value - ideal.amplitude).abs() <= 0.1, "{}", trace.peak_value);
}
