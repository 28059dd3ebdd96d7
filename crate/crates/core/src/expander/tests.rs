use super::*;
use crate::rng::stream_rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use std::collections::HashMap;
use std::f64::consts::PI;

fn chi_square_p(counts: &[u64]) -> f64 {
    let total: u64 = counts.iter().sum();
    let expected = total as f64 / counts.len() as f64;
    let stat: f64 = counts
        .iter()
        .map(|&c| (c as f64 - expected).powi(2) / expected)
        .sum();
    1.0 - ChiSquared::new((counts.len() - 1) as f64)
        .unwrap()
        .cdf(stat)
}

// Circulant oracle: P of the n-cycle has eigenvalues cos(2πj/n).
fn cycle_eigenvalues(n: usize) -> Vec<f64> {
    let mut v: Vec<f64> = (0..n)
        .map(|j| (2.0 * PI * j as f64 / n as f64).cos())
        .collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn complete_graph_examples() {
    let g = ExpanderGraph::complete_with_loops(2).unwrap();
    assert_eq!(g.neighbors(0), &[0, 1]);
    assert_eq!(g.neighbors(1), &[0, 1]);
    assert_eq!(g.lambda(), 0.0);
    let g4 = ExpanderGraph::complete_with_loops(4).unwrap();
    assert!(lambda_from_spectrum(&g4.spectrum()).abs() < 1e-12);
    assert!(ExpanderGraph::complete_with_loops(0).is_err());
}

#[test]
fn cycle_spectrum_matches_circulant() {
    for n in 3..=12 {
        let g = ExpanderGraph::cycle(n).unwrap();
        let spec = g.spectrum();
        for (a, b) in spec.iter().zip(cycle_eigenvalues(n)) {
            assert!((a - b).abs() < 1e-12, "n {n}: {a} vs {b}");
        }
    }
    let c8 = ExpanderGraph::cycle(8).unwrap();
    assert!((c8.second_largest_eigenvalue() - 0.5f64.sqrt()).abs() < 1e-12);
    // Bipartite: -1 is an eigenvalue, so the absolute gap closes.
    assert!((c8.lambda() - 1.0).abs() < 1e-12);
    let c6 = ExpanderGraph::cycle(6).unwrap();
    assert!((c6.second_largest_eigenvalue() - 0.5).abs() < 1e-12);
    assert!((ExpanderGraph::cycle(4).unwrap().lambda() - 1.0).abs() < 1e-12);
    for n in [5, 7, 9] {
        let l = ExpanderGraph::cycle(n).unwrap().lambda();
        assert!((l - (PI / n as f64).cos()).abs() < 1e-12);
    }
    assert_eq!(ExpanderGraph::cycle(5).unwrap().neighbors(0), &[1, 4]);
    assert!(ExpanderGraph::cycle(2).is_err());
}

#[test]
#[allow(clippy::erasing_op, clippy::identity_op)]
fn margulis_examples() {
    let g = ExpanderGraph::margulis(4).unwrap();
    assert_eq!((g.n(), g.degree()), (16, 8));
    // (x, y) = (1, 2) → index 6.
    assert_eq!(
        g.neighbors(6),
        &[
            3 * 4 + 2,
            3 * 4 + 2,
            0 * 4 + 2,
            2 * 4 + 2,
            4 + 3,
            4 + 1,
            4,
            4
        ]
    );
    let l4 = g.lambda();
    assert!(0.0 < l4 && l4 < 1.0, "lambda {l4}");
    let l8 = ExpanderGraph::margulis(8).unwrap().lambda();
    assert!(l8 <= 0.984, "lambda {l8}");
    assert!(ExpanderGraph::margulis(1).is_err());
    // λ(complete) = 0 ≤ λ(margulis) < 1 = λ(C_4).
    assert!(ExpanderGraph::complete_with_loops(16).unwrap().lambda() <= l4);
}

#[test]
fn transition_is_doubly_stochastic() {
    for g in [
        ExpanderGraph::complete_with_loops(5).unwrap(),
        ExpanderGraph::cycle(7).unwrap(),
        ExpanderGraph::margulis(5).unwrap(),
    ] {
        let n = g.n();
        let p = g.transition_matrix();
        for i in 0..n {
            let row: f64 = p[i * n..(i + 1) * n].iter().sum();
            let col: f64 = (0..n).map(|j| p[j * n + i]).sum();
            assert!((row - 1.0).abs() < 1e-12 && (col - 1.0).abs() < 1e-12);
        }
    }
}

#[test]
fn power_iteration_agrees_with_dense() {
    for g in [
        ExpanderGraph::margulis(6).unwrap(),
        ExpanderGraph::cycle(9).unwrap(),
        ExpanderGraph::complete_with_loops(6).unwrap(),
    ] {
        let dense = lambda_from_spectrum(&g.spectrum());
        let power = g.lambda_by_power_iteration();
        assert!(
            (dense - power).abs() < 1e-6,
            "{}: {dense} vs {power}",
            g.name()
        );
    }
    // Above the dense limit.
    let big = ExpanderGraph::cycle(301).unwrap();
    assert!((big.lambda() - (PI / 301.0).cos()).abs() < 1e-6);
}

#[test]
fn rejects_bad_adjacency() {
    assert!(ExpanderGraph::from_adjacency(vec![vec![1], vec![1]]).is_err());
    assert!(ExpanderGraph::from_adjacency(vec![vec![1, 0], vec![0]]).is_err());
    assert!(ExpanderGraph::from_adjacency(vec![vec![2], vec![0]]).is_err());
    assert!(ExpanderGraph::from_adjacency(vec![]).is_err());
    // Double edge one way, single the other.
    assert!(ExpanderGraph::from_adjacency(vec![vec![1, 1], vec![0, 1]]).is_err());
    assert!(ExpanderGraph::from_adjacency(vec![vec![1, 1], vec![0, 0]]).is_ok());
}

#[test]
fn text_round_trip_and_specs() {
    let g = ExpanderGraph::margulis(3).unwrap();
    let back: ExpanderGraph = g.to_text().parse().unwrap();
    assert_eq!(back, g);
    assert_eq!(ExpanderGraph::from_spec("cycle:64").unwrap().n(), 64);
    assert_eq!(
        ExpanderGraph::from_spec("complete:16").unwrap().degree(),
        16
    );
    assert_eq!(ExpanderGraph::from_spec("margulis:8").unwrap().n(), 64);
    assert!(ExpanderGraph::from_spec("torus:3").is_err());
    assert!(ExpanderGraph::from_spec("cycle:x").is_err());
    assert!("2 1\n1\n".parse::<ExpanderGraph>().is_err());
    assert!("2 1\n1\n0 0\n".parse::<ExpanderGraph>().is_err());
    let dir = std::env::temp_dir().join(format!("xlab-graph-{}", std::process::id()));
    std::fs::write(&dir, "3 2\n1 2\n0 2\n0 1\n").unwrap();
    let f = ExpanderGraph::from_spec(dir.to_str().unwrap()).unwrap();
    std::fs::remove_file(&dir).unwrap();
    assert_eq!(f, ExpanderGraph::cycle(3).unwrap());
}

#[test]
fn seeded_walk_examples() {
    let g = ExpanderGraph::cycle(4).unwrap();
    let seed: WalkSeed = "00 1 0".parse().unwrap();
    assert_eq!(g.seeded_walk(&seed, 3).unwrap().vertices, vec![0, 3, 0]);
    let m = ExpanderGraph::margulis(4).unwrap();
    let r = m.seed_length(5);
    assert_eq!(r, 4 + 4 * 3);
    let w = m.seeded_walk(&WalkSeed::new(vec![false; r]), 5).unwrap();
    let mut expect = vec![0];
    for _ in 1..5 {
        expect.push(m.neighbors(*expect.last().unwrap())[0]);
    }
    assert_eq!(w.vertices, expect);
    assert!(matches!(
        ExpanderGraph::cycle(6)
            .unwrap()
            .seeded_walk(&WalkSeed::new(vec![]), 1),
        Err(Error::UnsupportedGraph(_))
    ));
    assert!(matches!(
        g.seeded_walk(&WalkSeed::new(vec![false; 3]), 3),
        Err(Error::InvalidInput(_))
    ));
    assert_eq!(
        WalkSeed::from_value(0b1011, 6).unwrap().to_string(),
        "001011"
    );
    assert!(WalkSeed::from_value(64, 6).is_err());
    assert!("01a".parse::<WalkSeed>().is_err());
}

#[test]
fn seeded_walk_is_a_bijection_onto_the_walk_law() {
    let g = ExpanderGraph::cycle(4).unwrap();
    let p = g.transition_matrix();
    for k in 1..=6 {
        let r = g.seed_length(k);
        assert_eq!(r, 2 + (k - 1));
        let mut seen: HashMap<Vec<usize>, u64> = HashMap::new();
        for value in 0..(1u128 << r) {
            let w = g
                .seeded_walk(&WalkSeed::from_value(value, r).unwrap(), k)
                .unwrap();
            assert!(w.is_valid_in(&g));
            *seen.entry(w.vertices).or_default() += 1;
        }
        assert!(seen.values().all(|&c| c == 1));
        // Every walk with positive stationary probability is hit, with mass 2^{-r}.
        let mut support = 0;
        let mut stack: Vec<Vec<usize>> = (0..4).map(|v| vec![v]).collect();
        while let Some(path) = stack.pop() {
            if path.len() == k {
                let prob = 0.25 * path.windows(2).map(|w| p[w[0] * 4 + w[1]]).product::<f64>();
                let hits = seen.get(&path).copied().unwrap_or(0) as f64;
                assert!((hits / (1u64 << r) as f64 - prob).abs() < 1e-15);
                support += 1;
                continue;
            }
            for v in 0..4 {
                if p[path.last().unwrap() * 4 + v] > 0.0 {
                    let mut next = path.clone();
                    next.push(v);
                    stack.push(next);
                }
            }
        }
        assert_eq!(support, seen.len());
    }
}

#[test]
fn random_walk_is_reproducible_and_valid() {
    let g = ExpanderGraph::margulis(5).unwrap();
    let a = g.random_walk(42, 20).unwrap();
    let b = g.random_walk(42, 20).unwrap();
    assert_eq!(a, b);
    assert!(a.is_valid_in(&g));
    assert_ne!(a, g.random_walk(43, 20).unwrap());
    assert!(g.random_walk(1, 0).is_err());
}

#[test]
fn single_vertex_draws_are_uniform() {
    let g = ExpanderGraph::cycle(7).unwrap();
    let mut counts = vec![0u64; 7];
    let mut rng = seeded_rng(5);
    let mut buf = [0usize; 1];
    for _ in 0..100_000 {
        g.fill_walk(&mut rng, &mut buf);
        counts[buf[0]] += 1;
    }
    assert!(chi_square_p(&counts) > 0.001, "{counts:?}");
}

#[test]
fn walk_marginals_are_stationary() {
    let g = ExpanderGraph::margulis(3).unwrap();
    let k = 5;
    let mut counts = vec![vec![0u64; g.n()]; k];
    let mut buf = vec![0usize; k];
    for trial in 0..100_000u64 {
        g.fill_walk(&mut stream_rng(9, trial), &mut buf);
        for (j, &v) in buf.iter().enumerate() {
            counts[j][v] += 1;
        }
    }
    for (j, c) in counts.iter().enumerate() {
        assert!(chi_square_p(c) > 0.001, "position {j}: {c:?}");
    }
}

#[test]
fn complete_graph_walks_are_iid() {
    // Pairs (v_j, v_{j+1}) uniform over all n² cells.
    let g = ExpanderGraph::complete_with_loops(4).unwrap();
    let mut counts = vec![0u64; 16];
    let mut rng = seeded_rng(6);
    let mut buf = [0usize; 3];
    for _ in 0..100_000 {
        g.fill_walk(&mut rng, &mut buf);
        counts[buf[1] * 4 + buf[2]] += 1;
    }
    assert!(chi_square_p(&counts) > 0.001, "{counts:?}");
}

#[test]
fn ceil_log2_values() {
    let cases = [
        (1, 0),
        (2, 1),
        (3, 2),
        (4, 2),
        (5, 3),
        (8, 3),
        (9, 4),
        (1024, 10),
    ];
    for (x, want) in cases {
        assert_eq!(ceil_log2(x), want, "x = {x}");
    }
}
