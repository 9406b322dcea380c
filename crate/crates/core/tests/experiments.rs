use delaymin::eval::{rr_exact, rr_over_pairs, rr_sampled, run_experiment, summarize, ExperimentSpec};
use delaymin::{gen, solve, Algorithm, BaSpec, PairSample, SolveParams, UpgradeState};

fn spec(body: &str) -> ExperimentSpec {
    ExperimentSpec::from_toml(body).unwrap()
}

#[test]
fn rr_grows_with_budget_for_every_algorithm() {
    let names: Vec<String> = Algorithm::ALL
        .iter()
        .filter(|a| **a != Algorithm::Brute)
        .map(|a| format!("[[algorithms]]\nname = \"{}\"\nepsilon_len = 0.1\n", a.name()))
        .collect();
    let s = spec(&format!(
        "graph = {{ kind = \"ba\", n = 60, edges_per_node = 2, seed = 3 }}\nbudgets = [1, 2, 4, 6]\nseeds = [7]\n{}",
        names.concat()
    ));
    let rows = run_experiment(&s).unwrap();
    assert_eq!(rows.len(), 9 * 4);
    for chunk in rows.chunks(4) {
        let rr: Vec<f64> = chunk.iter().map(|r| r.rr.expect("no failed cells")).collect();
        assert!(rr.windows(2).all(|w| w[0] <= w[1]), "{}: {rr:?}", chunk[0].algorithm);
        assert!(rr.iter().all(|x| (0.0..=1.0).contains(x)));
    }
}

#[test]
fn greedy_beats_random_on_average() {
    let s = spec(
        "graph = { kind = \"ba\", n = 80, edges_per_node = 2, seed = 1 }\n\
         delays = { kind = \"uniform_int_range\", lo = 1, hi = 20, step = 1 }\n\
         budgets = [3]\nseeds = [1, 2, 3, 4, 5]\nvary_graph_with_seed = true\n\
         [[algorithms]]\nname = \"gr\"\n[[algorithms]]\nname = \"random\"\n",
    );
    let rows = run_experiment(&s).unwrap();
    for (gr, random) in rows[..5].iter().zip(&rows[5..]) {
        assert_eq!(gr.seed, random.seed);
        assert!(gr.rr.unwrap() >= random.rr.unwrap());
    }
    let summary = summarize(&rows);
    assert!(summary[0].mean_rr >= summary[1].mean_rr);
}

#[test]
fn runs_are_deterministic_and_ordered() {
    let s = spec(
        "graph = { kind = \"ba\", n = 100, edges_per_node = 2 }\nbudgets = [2, 1]\nseeds = [9, 4]\nthreads = 3\n\
         [rr]\nmode = \"sampled\"\npairs_per_trial = 50\ntrials = 4\n\
         [[algorithms]]\nname = \"pcs\"\n[[algorithms]]\nname = \"gs\"\n",
    );
    let a = run_experiment(&s).unwrap();
    let b = run_experiment(&s).unwrap();
    let key = |r: &delaymin::eval::ResultRow| (r.algorithm.clone(), r.k, r.seed, r.rr, r.samples);
    assert_eq!(a.iter().map(key).collect::<Vec<_>>(), b.iter().map(key).collect::<Vec<_>>());
    let order: Vec<(String, usize, u64)> = a.iter().map(|r| (r.algorithm.clone(), r.k, r.seed)).collect();
    assert_eq!(order[0], ("pcs".into(), 2, 9));
    assert_eq!(order[1], ("pcs".into(), 2, 4));
    assert_eq!(order[2], ("pcs".into(), 1, 9));
    assert_eq!(order[4], ("gs".into(), 2, 9));
}

#[test]
fn pcs_on_general_delays_is_an_error_row() {
    let s = spec(
        "graph = { kind = \"ring\", n = 8 }\ndelays = { kind = \"constant\", value = 2.0 }\nbudgets = [1]\n\
         [[algorithms]]\nname = \"pcs\"\n[[algorithms]]\nname = \"gr\"\n",
    );
    let rows = run_experiment(&s).unwrap();
    assert!(rows[0].error.as_deref().unwrap().contains("uniform"));
    assert!(rows[1].error.is_none());
}

#[test]
fn full_coverage_sampling_equals_exact() {
    let g = gen::generate_ba(&BaSpec { n: 40, edges_per_node: 2, seed: 2 }).unwrap();
    let ledger = solve(&g, Algorithm::Degree, 4, &SolveParams::default()).unwrap();
    let st = ledger.upgrade_state(40).unwrap();
    let exact = rr_exact(&g, &st).unwrap();
    let full = rr_over_pairs(&g, &st, &PairSample::exhaustive(40).pairs).unwrap();
    assert!((full - exact).abs() < 1e-12);
    let sampled = rr_sampled(&g, &st, 400, 20, 5).unwrap();
    assert!((sampled.mean - exact).abs() <= 4.0 * sampled.stderr, "{sampled:?} vs {exact}");
    assert_eq!(rr_sampled(&g, &UpgradeState::empty(40), 100, 3, 1).unwrap().mean, 0.0);
}
