//! Transition graphs `u -> D(u)` and their Graphviz / CSV exports.

use std::collections::VecDeque;
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::orbit::{FunctionalGraph, DEFAULT_MAX_STATES};
use crate::system::{DucciSystem, ResidueTuple};

/// A functional graph on a set of states closed under `D`: either all of
/// `Z_m^n` or one weakly connected component of it.
///
/// Nodes are kept in lexicographic order; `succ[i]` is the node index of
/// `D(nodes[i])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionGraph {
    sys: DucciSystem,
    nodes: Vec<ResidueTuple>,
    succ: Vec<usize>,
    indegree: Vec<usize>,
}

pub fn build_graph(sys: &DucciSystem) -> Result<TransitionGraph> {
    build_graph_capped(sys, DEFAULT_MAX_STATES)
}

pub fn build_graph_capped(sys: &DucciSystem, max_nodes: u64) -> Result<TransitionGraph> {
    let fg = FunctionalGraph::build(sys, max_nodes, "transition graph")?;
    let nodes = (0..fg.succ.len() as u64)
        .map(|i| sys.decode(i))
        .collect::<Result<Vec<_>>>()?;
    Ok(TransitionGraph {
        sys: *sys,
        nodes,
        succ: fg.succ,
        indegree: fg.indegree.into_iter().map(|d| d as usize).collect(),
    })
}

impl TransitionGraph {
    pub fn system(&self) -> &DucciSystem {
        &self.sys
    }

    pub fn nodes(&self) -> &[ResidueTuple] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// One edge per node, in node order.
    pub fn edges(&self) -> impl Iterator<Item = (&ResidueTuple, &ResidueTuple)> + '_ {
        self.nodes
            .iter()
            .zip(&self.succ)
            .map(move |(u, &j)| (u, &self.nodes[j]))
    }

    pub fn index_of(&self, u: &ResidueTuple) -> Option<usize> {
        self.nodes.binary_search(u).ok()
    }

    pub fn successor(&self, u: &ResidueTuple) -> Option<&ResidueTuple> {
        self.index_of(u).map(|i| &self.nodes[self.succ[i]])
    }

    pub fn indegree(&self, u: &ResidueTuple) -> Option<usize> {
        self.index_of(u).map(|i| self.indegree[i])
    }

    pub fn indegrees(&self) -> &[usize] {
        &self.indegree
    }

    pub fn self_loops(&self) -> usize {
        self.succ.iter().enumerate().filter(|(i, &j)| *i == j).count()
    }

    fn reverse_adjacency(&self) -> Vec<Vec<usize>> {
        let mut preds = vec![Vec::new(); self.nodes.len()];
        for (i, &j) in self.succ.iter().enumerate() {
            preds[j].push(i);
        }
        preds
    }

    /// Component labels (weak connectivity), numbered in order of each
    /// component's smallest node.
    fn component_labels(&self) -> (Vec<usize>, usize) {
        let preds = self.reverse_adjacency();
        let mut label = vec![usize::MAX; self.nodes.len()];
        let mut next_label = 0;
        for start in 0..self.nodes.len() {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next_label;
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in std::iter::once(&self.succ[v]).chain(&preds[v]) {
                    if label[w] == usize::MAX {
                        label[w] = next_label;
                        queue.push_back(w);
                    }
                }
            }
            next_label += 1;
        }
        (label, next_label)
    }

    pub fn component_count(&self) -> usize {
        self.component_labels().1
    }

    /// The weakly connected component containing `u`.
    pub fn component_of(&self, u: &ResidueTuple) -> Result<TransitionGraph> {
        let start = self
            .index_of(u)
            .ok_or_else(|| Error::NotMember(u.to_string()))?;
        let (label, _) = self.component_labels();
        Ok(self.restrict(|i| label[i] == label[start]))
    }

    /// Every weak component, ordered by smallest node.
    pub fn components(&self) -> Vec<TransitionGraph> {
        let (label, count) = self.component_labels();
        (0..count).map(|c| self.restrict(|i| label[i] == c)).collect()
    }

    fn restrict(&self, keep: impl Fn(usize) -> bool) -> TransitionGraph {
        let mut remap = vec![usize::MAX; self.nodes.len()];
        let mut nodes = Vec::new();
        for i in (0..self.nodes.len()).filter(|&i| keep(i)) {
            remap[i] = nodes.len();
            nodes.push(self.nodes[i].clone());
        }
        let (succ, indegree) = (0..self.nodes.len())
            .filter(|&i| remap[i] != usize::MAX)
            .map(|i| (remap[self.succ[i]], self.indegree[i]))
            .unzip();
        TransitionGraph {
            sys: self.sys,
            nodes,
            succ,
            indegree,
        }
    }

    /// The cycle of each component, each starting at its smallest state.
    pub fn cycles(&self) -> Vec<Vec<ResidueTuple>> {
        let mut remaining = self.indegree.clone();
        let mut on_cycle = vec![true; self.nodes.len()];
        let mut queue: VecDeque<usize> =
            (0..self.nodes.len()).filter(|&i| remaining[i] == 0).collect();
        while let Some(v) = queue.pop_front() {
            on_cycle[v] = false;
            let w = self.succ[v];
            remaining[w] -= 1;
            if remaining[w] == 0 {
                queue.push_back(w);
            }
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut cycles = Vec::new();
        for start in 0..self.nodes.len() {
            if !on_cycle[start] || seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut v = start;
            while !seen[v] {
                seen[v] = true;
                cycle.push(self.nodes[v].clone());
                v = self.succ[v];
            }
            cycles.push(cycle);
        }
        cycles
    }

    /// Graphviz digraph: nodes in lexicographic order, then one edge per node
    /// in the same order.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph ducci {\n");
        for u in &self.nodes {
            let _ = writeln!(out, "  \"{u}\";");
        }
        for (u, v) in self.edges() {
            let _ = writeln!(out, "  \"{u}\" -> \"{v}\";");
        }
        out.push_str("}\n");
        out
    }

    /// Edge list as CSV with header `source,target`.
    pub fn to_edge_csv(&self) -> String {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        // Writing into a Vec cannot fail.
        writer.write_record(["source", "target"]).unwrap();
        for (u, v) in self.edges() {
            writer
                .write_record([u.to_string(), v.to_string()])
                .unwrap();
        }
        String::from_utf8(writer.into_inner().unwrap()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(m: u64, n: usize) -> DucciSystem {
        DucciSystem::new(m, n).unwrap()
    }

    #[test]
    fn z4_2_graph() {
        let s = z(4, 2);
        let g = build_graph(&s).unwrap();
        assert_eq!(g.node_count(), 16);
        assert_eq!(g.edges().count(), 16);
        assert_eq!(g.self_loops(), 1);
        assert_eq!(g.successor(&s.zero()), Some(&s.zero()));
        assert_eq!(g.component_count(), 1);
        let any = s.tuple(&[2, 3]).unwrap();
        assert_eq!(g.component_of(&any).unwrap(), g);
        assert_eq!(g.cycles(), vec![vec![s.zero()]]);
    }

    #[test]
    fn z2_2_indegrees() {
        let s = z(2, 2);
        let g = build_graph(&s).unwrap();
        assert_eq!(g.indegrees(), &[2, 0, 0, 2]);
        let sum: usize = g.indegrees().iter().sum();
        assert_eq!(sum, g.node_count());
    }

    #[test]
    fn z4_3_component_of_313() {
        let s = z(4, 3);
        let g = build_graph(&s).unwrap();
        assert_eq!(g.node_count(), 64);
        let c = g.component_of(&s.tuple(&[3, 1, 3]).unwrap()).unwrap();
        assert_eq!(c.node_count(), 12);
        assert_eq!(c.cycles().len(), 1);
        assert_eq!(c.cycles()[0].len(), 3);

        let zc = g.component_of(&s.zero()).unwrap();
        for u in zc.nodes() {
            assert!(crate::orbit::vanishes(&s, u).unwrap());
        }
        let vanishing = (0..64)
            .filter(|&i| crate::orbit::vanishes(&s, &s.decode(i).unwrap()).unwrap())
            .count();
        assert_eq!(zc.node_count(), vanishing);
    }

    #[test]
    fn membership_error() {
        let s = z(4, 3);
        let g = build_graph(&s).unwrap();
        let c = g.component_of(&s.zero()).unwrap();
        let outside = s.tuple(&[3, 1, 3]).unwrap();
        assert!(matches!(c.component_of(&outside), Err(Error::NotMember(_))));
        let wrong_len = z(4, 2).zero();
        assert!(g.component_of(&wrong_len).is_err());
    }

    #[test]
    fn dot_and_csv_text() {
        let g = build_graph(&z(2, 2)).unwrap();
        assert_eq!(
            g.to_dot(),
            "digraph ducci {\n  \"(0,0)\";\n  \"(0,1)\";\n  \"(1,0)\";\n  \"(1,1)\";\n  \
             \"(0,0)\" -> \"(0,0)\";\n  \"(0,1)\" -> \"(1,1)\";\n  \
             \"(1,0)\" -> \"(1,1)\";\n  \"(1,1)\" -> \"(0,0)\";\n}\n"
        );
        assert_eq!(
            g.to_edge_csv(),
            "source,target\n\"(0,0)\",\"(0,0)\"\n\"(0,1)\",\"(1,1)\"\n\
             \"(1,0)\",\"(1,1)\"\n\"(1,1)\",\"(0,0)\"\n"
        );
    }

    #[test]
    fn graph_cap() {
        assert!(matches!(
            build_graph_capped(&z(4, 3), 10),
            Err(Error::CapExceeded { .. })
        ));
    }
}
