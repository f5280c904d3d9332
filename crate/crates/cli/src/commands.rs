use std::path::Path;

use bnmix::bench::{self, BenchError, GeneratorSpec, MatrixOptions, SearchAlgo};
use bnmix::dataset::{equal_frequency_discretize, load_csv, Dataset, Schema};
use bnmix::document::{NetworkDocument, Provenance};
use bnmix::inference::{forward_sample, impute_rows, ImputeStrategy, PartialRow};
use bnmix::parameters::{fit_parameters, with_discretization, BayesianNetwork, FitOptions, ParamError, Value};
use bnmix::scoring::{ScoreKind, ScoreOptions, Scorer};
use bnmix::search::{evolve, hill_climb, EvoConfig, HillClimbOptions, SearchError};
use bnmix::{Dag, VariableKind};

use crate::output::{write_atomic, CliError};
use crate::{BenchArgs, EvoArgs, ImputeArgs, LearnArgs, ParamsArg, SampleArgs, ScoreArg, SearchArg, StrategyArg};

fn score_name(s: ScoreArg) -> &'static str {
    match s {
        ScoreArg::MiMixed => "mi-mixed",
        ScoreArg::MiDisc => "mi-disc",
        ScoreArg::Ll => "ll",
        ScoreArg::Bic => "bic",
        ScoreArg::Aic => "aic",
    }
}

fn algo(s: SearchArg) -> SearchAlgo {
    match s {
        SearchArg::Hc => SearchAlgo::Hc,
        SearchArg::Evo => SearchAlgo::Evo,
    }
}

fn strategy(s: StrategyArg) -> ImputeStrategy {
    match s {
        StrategyArg::Sample => ImputeStrategy::Sample,
        StrategyArg::Mode => ImputeStrategy::Mode,
    }
}

fn evo_config(args: &EvoArgs, max_parents: Option<usize>, seed: u64) -> EvoConfig {
    EvoConfig {
        population_size: args.population,
        generations: args.generations,
        mutation_rate: args.mutation_rate,
        crossover_rate: args.crossover_rate,
        tournament_size: args.tournament,
        stagnation_limit: args.stagnation,
        max_parents,
        seed,
    }
}

fn search_error(e: SearchError) -> CliError {
    match e {
        SearchError::Config(_) | SearchError::VariableMismatch => CliError::input(e),
        other => CliError::Numerical(other.to_string()),
    }
}

fn fit_error(e: ParamError) -> CliError {
    match e {
        ParamError::Taxonomy { .. } => CliError::Numerical(e.to_string()),
        other => CliError::input(other),
    }
}

fn load_data(path: &Path, schema: Option<&Path>) -> Result<Dataset, CliError> {
    let schema = schema
        .map(|p| Schema::load(p).map_err(|e| CliError::Input(format!("{}: {e}", p.display()))))
        .transpose()?;
    load_csv(path, schema.as_ref()).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn load_network(path: &Path) -> Result<BayesianNetwork, CliError> {
    NetworkDocument::load(path)
        .and_then(|doc| doc.to_network())
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

fn csv_bytes(data: &Dataset) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    data.write_csv(&mut buf).map_err(CliError::input)?;
    Ok(buf)
}

pub fn learn(args: LearnArgs) -> Result<(), CliError> {
    let data = load_data(&args.data, args.schema.as_deref())?;
    let needs_bins = args.score == ScoreArg::MiDisc || args.params == ParamsArg::Disc;
    let (binned, maps) = if needs_bins {
        let (d, m) = equal_frequency_discretize(&data, args.bins).map_err(CliError::input)?;
        (Some(d), m)
    } else {
        (None, Vec::new())
    };
    let (structure_data, kind) = match args.score {
        ScoreArg::MiDisc => (binned.as_ref().expect("binned"), ScoreKind::Mi),
        ScoreArg::MiMixed => (&data, ScoreKind::Mi),
        ScoreArg::Ll => (&data, ScoreKind::Ll),
        ScoreArg::Bic => (&data, ScoreKind::Bic),
        ScoreArg::Aic => (&data, ScoreKind::Aic),
    };
    let scorer = Scorer::new(
        structure_data,
        kind,
        ScoreOptions {
            min_group_size: args.min_group_size,
        },
    );
    // the type constraint always follows the original column kinds
    let start = Dag::empty(data.names().to_vec(), data.kinds());
    let outcome = match args.search {
        SearchArg::Hc => hill_climb(
            &scorer,
            &start,
            &HillClimbOptions {
                max_parents: args.max_parents,
                ..HillClimbOptions::default()
            },
        ),
        SearchArg::Evo => evolve(&scorer, &start, &evo_config(&args.evo, args.max_parents, args.seed)),
    }
    .map_err(search_error)?;
    let total = outcome.network.total;
    if !total.is_finite() {
        return Err(CliError::Numerical(format!(
            "search ended on a non-finite score ({} jittered covariance evaluations)",
            scorer.jitter_events()
        )));
    }
    if scorer.jitter_events() > 0 {
        log::warn!("{} covariance evaluations needed jitter", scorer.jitter_events());
    }
    let dag = outcome.network.dag;
    let fit = FitOptions {
        laplace_alpha: args.laplace,
    };
    let bn = match args.params {
        ParamsArg::Disc => with_discretization(
            fit_parameters(binned.as_ref().expect("binned"), &dag, &fit).map_err(fit_error)?,
            maps,
        ),
        ParamsArg::Mixed => with_discretization(fit_parameters(&data, &dag, &fit).map_err(fit_error)?, maps),
    };
    let diag = bn.diagnostics();
    if diag.ridge_fallbacks > 0 || diag.floored_variances > 0 {
        eprintln!(
            "note: {} ridge fallbacks, {} floored variances",
            diag.ridge_fallbacks, diag.floored_variances
        );
    }
    let provenance = Provenance {
        score: Some(score_name(args.score).to_string()),
        search: Some(algo(args.search).to_string()),
        parameters: Some(
            match args.params {
                ParamsArg::Mixed => "mixed",
                ParamsArg::Disc => "disc",
            }
            .to_string(),
        ),
        seed: Some(args.seed),
        total_score: Some(total),
        ..Provenance::current()
    };
    let doc = NetworkDocument::from_network(&bn, provenance);
    write_atomic(&args.out, doc.to_json().as_bytes())?;
    if let Some(dot) = &args.dot {
        write_atomic(dot, bn.dag().to_dot().as_bytes())?;
    }
    println!("total score: {total}");
    println!("edges: {}", bn.dag().n_edges());
    Ok(())
}

pub fn sample(args: SampleArgs) -> Result<(), CliError> {
    let bn = load_network(&args.model)?;
    let data = forward_sample(&bn, args.n, args.seed);
    write_atomic(&args.out, &csv_bytes(&data)?)?;
    println!("rows: {}", args.n);
    Ok(())
}

/// How a cell of an input column maps into the network.
enum CellCodec<'a> {
    Labels(&'a [String]),
    Bins(&'a bnmix::DiscretizationMap),
    Number,
}

pub fn impute(args: ImputeArgs) -> Result<(), CliError> {
    let bn = load_network(&args.model)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&args.data)
        .map_err(|e| CliError::Input(format!("{}: {e}", args.data.display())))?;
    let header: Vec<String> = reader
        .headers()
        .map_err(CliError::input)?
        .iter()
        .map(str::to_string)
        .collect();
    let mut positions = Vec::with_capacity(header.len());
    for name in &header {
        let v = bn
            .index_of(name)
            .ok_or_else(|| CliError::Input(format!("column {name:?} is not a network variable")))?;
        if positions.contains(&v) {
            return Err(CliError::Input(format!("column {name:?} appears twice")));
        }
        positions.push(v);
    }
    if positions.len() != bn.n_nodes() {
        return Err(CliError::Input("data does not cover every network variable".into()));
    }
    let codecs: Vec<CellCodec<'_>> = (0..bn.n_nodes())
        .map(|v| match (bn.variables()[v].kind, bn.bin_map(v)) {
            (VariableKind::Discrete, Some(map)) => CellCodec::Bins(map),
            (VariableKind::Discrete, None) => CellCodec::Labels(&bn.variables()[v].labels),
            (VariableKind::Continuous, _) => CellCodec::Number,
        })
        .collect();

    let mut raw_rows: Vec<Vec<String>> = Vec::new();
    let mut rows: Vec<PartialRow> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record.map_err(CliError::input)?;
        if record.len() != header.len() {
            return Err(CliError::Input(format!("row {} has {} cells", r + 1, record.len())));
        }
        let mut row: PartialRow = vec![None; bn.n_nodes()];
        for (cell, &v) in record.iter().zip(&positions) {
            if cell == args.na {
                continue;
            }
            let bad = || CliError::Input(format!("row {}: cannot read {cell:?} for {:?}", r + 1, bn.variables()[v].name));
            row[v] = Some(match &codecs[v] {
                CellCodec::Labels(labels) => {
                    Value::Discrete(labels.iter().position(|l| l == cell.trim()).ok_or_else(bad)? as u32)
                }
                CellCodec::Bins(map) => {
                    let x: f64 = cell.trim().parse().map_err(|_| bad())?;
                    if !x.is_finite() {
                        return Err(bad());
                    }
                    Value::Discrete(map.bin_of(x))
                }
                CellCodec::Number => {
                    let x: f64 = cell.trim().parse().map_err(|_| bad())?;
                    if !x.is_finite() {
                        return Err(bad());
                    }
                    Value::Continuous(x)
                }
            });
        }
        raw_rows.push(record.iter().map(str::to_string).collect());
        rows.push(row);
    }

    let completed = impute_rows(&bn, &rows, strategy(args.strategy), args.seed).map_err(CliError::input)?;
    let mut buf = Vec::new();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(&header).map_err(CliError::input)?;
        for ((raw, row), done) in raw_rows.iter().zip(&rows).zip(&completed) {
            let cells: Vec<String> = positions
                .iter()
                .enumerate()
                .map(|(i, &v)| match row[v] {
                    Some(_) => raw[i].clone(),
                    None => match (&codecs[v], done.values[v]) {
                        (CellCodec::Labels(labels), Value::Discrete(c)) => labels[c as usize].clone(),
                        (CellCodec::Bins(map), Value::Discrete(c)) => map.decode(c).to_string(),
                        (_, value) => value.as_f64().to_string(),
                    },
                })
                .collect();
            w.write_record(&cells).map_err(CliError::input)?;
        }
        w.flush().map_err(CliError::input)?;
    }
    write_atomic(&args.out, &buf)?;
    let imputed: usize = completed.iter().map(|c| c.imputed_cells).sum();
    let fallbacks: usize = completed.iter().map(|c| c.fallback_events).sum();
    println!("imputed cells: {imputed}");
    println!("fallback events: {fallbacks}");
    Ok(())
}

fn bench_error(e: BenchError) -> CliError {
    match e {
        BenchError::Spec(_) | BenchError::Invalid(_) | BenchError::Data(_) => CliError::input(e),
        BenchError::Search(s) => search_error(s),
        other => CliError::Numerical(other.to_string()),
    }
}

pub fn bench(args: BenchArgs) -> Result<(), CliError> {
    std::fs::create_dir_all(&args.out_dir)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", args.out_dir.display())))?;
    let spec = if let Some(path) = &args.spec {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Some(serde_json::from_str::<GeneratorSpec>(&text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?)
    } else if let Some(name) = &args.preset {
        Some(GeneratorSpec::preset(name, args.seed).ok_or_else(|| CliError::Input(format!("unknown preset {name:?}")))?)
    } else {
        None
    };
    let (data, truth) = match (&spec, &args.data) {
        (Some(spec), _) => {
            let (bn, data) = bench::generate_clg_network(spec).map_err(bench_error)?;
            let doc = NetworkDocument::from_network(&bn, Provenance::current());
            write_atomic(&args.out_dir.join("truth.json"), doc.to_json().as_bytes())?;
            write_atomic(&args.out_dir.join("data.csv"), &csv_bytes(&data)?)?;
            let mut schema = String::from("name,kind\n");
            for v in 0..data.n_cols() {
                schema.push_str(&format!("{},{}\n", data.name(v), data.kind(v)));
            }
            write_atomic(&args.out_dir.join("schema.csv"), schema.as_bytes())?;
            (data, Some(bn))
        }
        (None, Some(path)) => (load_data(path, args.schema.as_deref())?, None),
        (None, None) => return Err(CliError::Input("one of --spec, --preset or --data is required".into())),
    };
    if args.seeds == 0 {
        return Err(CliError::Input("--seeds must be positive".into()));
    }
    let mut algos: Vec<SearchAlgo> = Vec::new();
    for s in &args.search {
        let a = algo(*s);
        if !algos.contains(&a) {
            algos.push(a);
        }
    }
    let mut results = Vec::new();
    for &a in &algos {
        for seed in args.seed..args.seed + args.seeds {
            let options = MatrixOptions {
                max_parents: args.max_parents,
                bins: args.bins,
                strategy: strategy(args.strategy),
                restoration_repeats: args.repeats,
                evo: evo_config(&args.evo, args.max_parents, seed),
                ..MatrixOptions::default()
            };
            log::info!("running {a} with seed {seed}");
            results.push(bench::run_matrix(&data, truth.as_ref(), a, seed, &options).map_err(bench_error)?);
        }
    }
    let summary = bench::summarize(&results);
    for w in &summary.warnings {
        eprintln!("warning: {w}");
    }
    let mut buf = Vec::new();
    bench::write_results_csv(&results, &mut buf).map_err(CliError::input)?;
    write_atomic(&args.out_dir.join("results.csv"), &buf)?;
    let mut buf = Vec::new();
    bench::write_timings_csv(&results, &mut buf).map_err(CliError::input)?;
    write_atomic(&args.out_dir.join("timings.csv"), &buf)?;
    let mut json = serde_json::to_string_pretty(&summary).map_err(CliError::input)?;
    json.push('\n');
    write_atomic(&args.out_dir.join("summary.json"), json.as_bytes())?;
    print!("{}", bench::format_table(&summary));
    Ok(())
}
