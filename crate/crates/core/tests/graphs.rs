use std::collections::BTreeSet;

use ducci::graph::build_graph;
use ducci::orbit::{kernel_set, orbit_summary};
use ducci::DucciSystem;

fn small_systems() -> impl Iterator<Item = DucciSystem> {
    (2u64..=6).flat_map(|m| {
        (1usize..=6)
            .filter(move |&n| m.pow(n as u32) <= 4096)
            .map(move |n| DucciSystem::new(m, n).unwrap())
    })
}

#[test]
fn one_cycle_per_component() {
    for sys in small_systems() {
        let g = build_graph(&sys).unwrap();
        for c in g.components() {
            assert_eq!(c.cycles().len(), 1, "{sys}");
        }
    }
}

#[test]
fn cycles_cover_the_kernel() {
    for sys in small_systems() {
        let g = build_graph(&sys).unwrap();
        let on_cycles: BTreeSet<_> = g.cycles().into_iter().flatten().collect();
        let kernel: BTreeSet<_> = kernel_set(&sys).unwrap().members().iter().cloned().collect();
        assert_eq!(on_cycles, kernel, "{sys}");
    }
}

#[test]
fn cycle_lengths_match_periods() {
    for sys in small_systems() {
        let g = build_graph(&sys).unwrap();
        for c in g.components() {
            let period = c.cycles()[0].len();
            for u in c.nodes() {
                assert_eq!(orbit_summary(&sys, u).unwrap().per, period, "{sys} {u}");
            }
        }
    }
}

#[test]
fn even_length_indegrees() {
    for sys in small_systems().filter(|s| s.len() % 2 == 0) {
        let g = build_graph(&sys).unwrap();
        let m = sys.modulus() as usize;
        assert!(g.indegrees().iter().all(|&d| d == 0 || d == m), "{sys}");
    }
}

#[test]
fn indegrees_sum_to_node_count() {
    for sys in small_systems() {
        let g = build_graph(&sys).unwrap();
        assert_eq!(g.indegrees().iter().sum::<usize>(), g.node_count());
        assert_eq!(g.edges().count(), g.node_count());
    }
}

/// Parses the DOT text back into node and edge lists.
fn parse_dot(dot: &str) -> (Vec<String>, Vec<(String, String)>) {
    let mut lines = dot.lines();
    assert_eq!(lines.next(), Some("digraph ducci {"));
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for line in lines {
        if line == "}" {
            break;
        }
        let body = line.trim().strip_suffix(';').expect("statement ends with ;");
        let unquote = |s: &str| s.trim().trim_matches('"').to_string();
        match body.split_once("->") {
            Some((a, b)) => edges.push((unquote(a), unquote(b))),
            None => nodes.push(unquote(body)),
        }
    }
    (nodes, edges)
}

#[test]
fn dot_round_trip() {
    for sys in small_systems() {
        let g = build_graph(&sys).unwrap();
        let (nodes, edges) = parse_dot(&g.to_dot());
        let expected_nodes: Vec<String> = g.nodes().iter().map(|u| u.to_string()).collect();
        assert_eq!(nodes, expected_nodes);
        for (a, b) in &edges {
            let (u, _) = sys.parse_tuple(a).unwrap();
            let (v, _) = sys.parse_tuple(b).unwrap();
            assert_eq!(sys.step(&u).unwrap(), v);
        }
        assert_eq!(edges.len(), g.node_count());
    }
}

#[test]
fn csv_matches_dot_edges() {
    let sys = DucciSystem::new(3, 3).unwrap();
    let g = build_graph(&sys).unwrap();
    let (_, dot_edges) = parse_dot(&g.to_dot());
    let text = g.to_edge_csv();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let csv_edges: Vec<(String, String)> = reader
        .records()
        .map(|r| {
            let r = r.unwrap();
            (r[0].to_string(), r[1].to_string())
        })
        .collect();
    assert_eq!(csv_edges, dot_edges);
}
