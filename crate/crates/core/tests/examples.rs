use bnmix::bench::{generate_clg_network, GeneratorSpec};
use bnmix::inference::impute;
use bnmix::parameters::{LinearGaussian, Value};
use bnmix::{
    evolve, fit_parameters, forward_sample, hill_climb, Column, Dag, Dataset, EvoConfig, FitOptions,
    HillClimbOptions, ImputeStrategy, NetworkDocument, NodeModel, Provenance, ScoreKind, ScoreOptions, Scorer,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

fn independent_columns(n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let cols = (0..4).map(|_| Column::Continuous((0..n).map(|_| normal.sample(&mut rng)).collect()));
    Dataset::new((0..4).map(|i| format!("z{i}")).collect(), cols.collect()).unwrap()
}

fn chain(n: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let noise = Normal::new(0.0, 0.5).unwrap();
    let a: Vec<f64> = (0..n).map(|_| noise.sample(&mut rng) * 2.0).collect();
    let b: Vec<f64> = a.iter().map(|x| 1.5 * x + noise.sample(&mut rng)).collect();
    let c: Vec<f64> = b.iter().map(|x| -x + noise.sample(&mut rng)).collect();
    Dataset::new(
        vec!["a".into(), "b".into(), "c".into()],
        vec![Column::Continuous(a), Column::Continuous(b), Column::Continuous(c)],
    )
    .unwrap()
}

fn skeleton(dag: &Dag) -> Vec<(usize, usize)> {
    let mut s: Vec<_> = dag.edges().into_iter().map(|(a, b)| (a.min(b), a.max(b))).collect();
    s.sort_unstable();
    s
}

#[test]
fn penalized_search_leaves_independent_data_empty() {
    let data = independent_columns(2000);
    let scorer = Scorer::new(&data, ScoreKind::Bic, ScoreOptions::default());
    let out = hill_climb(&scorer, &Dag::empty_for(&data), &HillClimbOptions::default()).unwrap();
    assert_eq!(out.network.dag.n_edges(), 0);
}

#[test]
fn hill_climb_finds_a_chain_skeleton() {
    let data = chain(2000);
    let scorer = Scorer::new(&data, ScoreKind::Bic, ScoreOptions::default());
    let out = hill_climb(&scorer, &Dag::empty_for(&data), &HillClimbOptions::default()).unwrap();
    assert_eq!(skeleton(&out.network.dag), vec![(0, 1), (1, 2)]);
    assert!(out.trace.windows(2).all(|w| w[1] > w[0]));
}

#[test]
fn evolution_is_seeded_and_never_loses_its_best() {
    let data = chain(800);
    let scorer = Scorer::new(&data, ScoreKind::Bic, ScoreOptions::default());
    let config = EvoConfig {
        generations: 30,
        seed: 3,
        ..EvoConfig::default()
    };
    let a = evolve(&scorer, &Dag::empty_for(&data), &config).unwrap();
    let b = evolve(&scorer, &Dag::empty_for(&data), &config).unwrap();
    assert_eq!(a.network.dag.edges(), b.network.dag.edges());
    assert_eq!(a.trace, b.trace);
    assert!(a.trace.windows(2).all(|w| w[1] >= w[0]));
    assert_eq!(skeleton(&a.network.dag), vec![(0, 1), (1, 2)]);
}

#[test]
fn mode_imputation_returns_the_conditional_mean() {
    let data = chain(3000);
    let dag = Dag::from_edges(data.names().to_vec(), data.kinds(), &[(0, 1), (1, 2)]).unwrap();
    let bn = fit_parameters(&data, &dag, &FitOptions::default()).unwrap();
    let NodeModel::LinearGaussian(LinearGaussian {
        intercept,
        coefficients,
        ..
    }) = bn.model(1).clone()
    else {
        panic!("b should be linear Gaussian");
    };
    let row = vec![Some(Value::Continuous(2.0)), None, Some(Value::Continuous(0.0))];
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let out = impute(&bn, &row, ImputeStrategy::Mode, &mut rng).unwrap();
    assert_eq!(out.imputed_cells, 1);
    assert_eq!(out.values[1], Value::Continuous(intercept + coefficients[0] * 2.0));
    assert_eq!(out.values[0], Value::Continuous(2.0));
}

#[test]
fn saved_documents_reload_to_the_same_network() {
    let (truth, _) = generate_clg_network(&GeneratorSpec::mehra(4)).unwrap();
    let doc = NetworkDocument::from_network(&truth, Provenance::current());
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.json");
    std::fs::write(&path, doc.to_json()).unwrap();
    let back = NetworkDocument::load(&path).unwrap().to_network().unwrap();
    assert_eq!(back.dag().edges(), truth.dag().edges());
    assert_eq!(back.models(), truth.models());
    let mut a = Vec::new();
    let mut b = Vec::new();
    forward_sample(&truth, 50, 1).write_csv(&mut a).unwrap();
    forward_sample(&back, 50, 1).write_csv(&mut b).unwrap();
    assert_eq!(a, b);
}
