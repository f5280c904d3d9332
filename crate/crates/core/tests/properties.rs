use bnmix::dataset::{equal_frequency_discretize, read_csv, split_indices};
use bnmix::{Column, Dag, Dataset, Move, MoveKind, Schema, ScoreKind, ScoreOptions, Scorer, VariableKind};
use proptest::prelude::*;

fn kinds_from(bits: &[bool]) -> Vec<VariableKind> {
    bits.iter()
        .map(|&d| if d { VariableKind::Discrete } else { VariableKind::Continuous })
        .collect()
}

/// Builds a graph by applying the `picks`-th legal move at each step.
fn walk(kinds: Vec<VariableKind>, picks: &[usize], cap: Option<usize>) -> Dag {
    let names = (0..kinds.len()).map(|i| format!("n{i}")).collect();
    let mut dag = Dag::empty(names, kinds);
    for &p in picks {
        let moves = dag.legal_moves(cap);
        if moves.is_empty() {
            break;
        }
        dag = dag.apply(&moves[p % moves.len()]).unwrap();
    }
    dag
}

fn mixed_data(rows: usize, values: &[f64], codes: &[u32]) -> Dataset {
    let a: Vec<f64> = (0..rows).map(|r| values[r % values.len()]).collect();
    let b: Vec<f64> = (0..rows).map(|r| values[(r * 7 + 3) % values.len()] * 0.5 + r as f64 * 1e-3).collect();
    let d: Vec<u32> = (0..rows).map(|r| codes[r % codes.len()] % 3).collect();
    Dataset::new(
        vec!["a".into(), "b".into(), "d".into()],
        vec![
            Column::Continuous(a),
            Column::Continuous(b),
            Column::Discrete {
                codes: d,
                labels: vec!["lo".into(), "mid".into(), "hi".into()],
            },
        ],
    )
    .unwrap()
}

proptest! {
    #[test]
    fn legal_moves_keep_graphs_valid(
        bits in prop::collection::vec(any::<bool>(), 2..7),
        picks in prop::collection::vec(any::<usize>(), 0..25),
        cap in prop::option::of(1usize..4),
    ) {
        let dag = walk(kinds_from(&bits), &picks, cap);
        prop_assert!(dag.validate(cap).is_ok());
        let legal = dag.legal_moves(cap);
        for mv in &legal {
            let next = dag.apply(mv).unwrap();
            prop_assert!(next.validate(cap).is_ok(), "{mv:?}");
        }
        // every addition left out of the list is one that would break a rule
        let n = dag.n_nodes();
        for from in 0..n {
            for to in 0..n {
                let mv = Move::add(from, to);
                if from == to || legal.contains(&mv) {
                    continue;
                }
                let broken = match dag.apply(&mv) {
                    Err(_) => true,
                    Ok(next) => next.validate(cap).is_err() || dag.has_edge(to, from),
                };
                prop_assert!(broken, "{mv:?} omitted but valid");
            }
        }
        prop_assert!(legal.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(legal.iter().all(|m| m.kind != MoveKind::Delete || dag.has_edge(m.from, m.to)));
    }

    #[test]
    fn split_partitions_rows(n in 10usize..500, fraction in 0.01f64..0.99, seed in any::<u64>()) {
        let (train, test) = split_indices(n, fraction, seed).unwrap();
        prop_assert_eq!(test.len(), (fraction * n as f64).round() as usize);
        prop_assert_eq!(train.len() + test.len(), n);
        let mut all: Vec<usize> = train.iter().chain(&test).copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert!(train.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(test.windows(2).all(|w| w[0] < w[1]));
        prop_assert_eq!(split_indices(n, fraction, seed).unwrap(), (train, test));
    }

    #[test]
    fn csv_round_trip_keeps_labels_and_values(
        values in prop::collection::vec(-1e6f64..1e6, 1..40),
        codes in prop::collection::vec(0u32..3, 1..40),
        rows in 1usize..60,
    ) {
        let data = mixed_data(rows, &values, &codes);
        let mut bytes = Vec::new();
        data.write_csv(&mut bytes).unwrap();
        let schema = Schema {
            entries: vec![
                ("a".into(), VariableKind::Continuous),
                ("b".into(), VariableKind::Continuous),
                ("d".into(), VariableKind::Discrete),
            ],
        };
        let back = read_csv(bytes.as_slice(), Some(&schema)).unwrap();
        prop_assert_eq!(back.values(0), data.values(0));
        prop_assert_eq!(back.values(1), data.values(1));
        for r in 0..rows {
            prop_assert_eq!(back.cell_string(r, 2), data.cell_string(r, 2));
        }
    }

    #[test]
    fn discretization_is_consistent(
        values in prop::collection::vec(-100f64..100.0, 1..30),
        codes in prop::collection::vec(0u32..3, 1..5),
        rows in 10usize..200,
        k in 2usize..8,
    ) {
        let data = mixed_data(rows, &values, &codes);
        let (binned, maps) = equal_frequency_discretize(&data, k).unwrap();
        prop_assert_eq!(maps.len(), 2);
        prop_assert_eq!(binned.codes(2), data.codes(2));
        for (var, map) in [(0usize, &maps[0]), (1, &maps[1])] {
            prop_assert!(map.n_bins() <= k);
            let xs = data.values(var);
            for (r, &x) in xs.iter().enumerate() {
                prop_assert_eq!(binned.codes(var)[r], map.bin_of(x));
            }
            // bins are ordered and each representative lies inside its bin
            for b in 0..map.n_bins() as u32 {
                let members: Vec<f64> = xs.iter().copied().filter(|&x| map.bin_of(x) == b).collect();
                if members.is_empty() {
                    continue;
                }
                let lo = members.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = members.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert!(map.decode(b) >= lo - 1e-9 && map.decode(b) <= hi + 1e-9);
            }
            let mut sorted = xs.to_vec();
            sorted.sort_by(f64::total_cmp);
            prop_assert!(sorted.windows(2).all(|w| map.bin_of(w[0]) <= map.bin_of(w[1])));
        }
    }

    #[test]
    fn cache_does_not_change_scores(
        values in prop::collection::vec(-10f64..10.0, 5..30),
        codes in prop::collection::vec(0u32..3, 3..10),
        queries in prop::collection::vec((0usize..3, any::<u8>()), 1..20),
    ) {
        let data = mixed_data(120, &values, &codes);
        for kind in [ScoreKind::Mi, ScoreKind::Ll, ScoreKind::Bic, ScoreKind::Aic] {
            let cached = Scorer::new(&data, kind, ScoreOptions::default());
            let plain = Scorer::uncached(&data, kind, ScoreOptions::default());
            for &(node, mask) in queries.iter().chain(&queries) {
                let parents: Vec<usize> = (0..3)
                    .filter(|&p| p != node && mask & (1 << p) != 0)
                    .filter(|&p| data.kind(node) == VariableKind::Continuous || data.kind(p) == VariableKind::Discrete)
                    .collect();
                let a = cached.local(node, &parents).unwrap();
                let b = plain.local(node, &parents).unwrap();
                prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
                prop_assert_eq!(a.rejected, b.rejected);
            }
        }
    }
}
