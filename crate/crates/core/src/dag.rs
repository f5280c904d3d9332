//! Directed acyclic graphs over a fixed, typed variable set, and the
//! add/delete/reverse moves that search walks with.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Dataset, VariableKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DagError {
    #[error("node index {0} out of range")]
    UnknownNode(usize),
    #[error("self-loop on node {0}")]
    SelfLoop(usize),
    #[error("edge {0} -> {1} already present")]
    Duplicate(usize, usize),
    #[error("edge {0} -> {1} not present")]
    Missing(usize, usize),
    #[error("edge {0} -> {1} would create a cycle")]
    Cycle(usize, usize),
    #[error("graph contains a cycle")]
    Cyclic,
    #[error("continuous node {0} cannot be a parent of discrete node {1}")]
    TypeConstraint(usize, usize),
    #[error("node {node} would exceed the cap of {cap} parents")]
    TooManyParents { node: usize, cap: usize },
}

/// A DAG whose nodes are variables `0..n` with kind metadata.
///
/// Invariants: acyclic, no self-loops or duplicate edges, and no edge from a
/// continuous node into a discrete node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    names: Vec<String>,
    kinds: Vec<VariableKind>,
    /// Sorted parent lists.
    parents: Vec<Vec<usize>>,
}

impl Dag {
    pub fn empty(names: Vec<String>, kinds: Vec<VariableKind>) -> Self {
        assert_eq!(names.len(), kinds.len());
        let n = names.len();
        Self {
            names,
            kinds,
            parents: vec![Vec::new(); n],
        }
    }

    pub fn empty_for(data: &Dataset) -> Self {
        Self::empty(data.names().to_vec(), data.kinds())
    }

    /// Builds and validates a graph from an edge list.
    pub fn from_edges(
        names: Vec<String>,
        kinds: Vec<VariableKind>,
        edges: &[(usize, usize)],
    ) -> Result<Self, DagError> {
        let mut dag = Self::empty(names, kinds);
        for &(from, to) in edges {
            dag.add_edge(from, to)?;
        }
        Ok(dag)
    }

    pub fn n_nodes(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kinds(&self) -> &[VariableKind] {
        &self.kinds
    }

    pub fn kind(&self, node: usize) -> VariableKind {
        self.kinds[node]
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn children(&self, node: usize) -> Vec<usize> {
        (0..self.n_nodes())
            .filter(|&c| self.parents[c].binary_search(&node).is_ok())
            .collect()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.parents[to].binary_search(&from).is_ok()
    }

    /// Edges sorted by (parent, child).
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = self
            .parents
            .iter()
            .enumerate()
            .flat_map(|(child, ps)| ps.iter().map(move |&p| (p, child)))
            .collect();
        edges.sort_unstable();
        edges
    }

    pub fn n_edges(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Whether the type constraint allows `from -> to`.
    pub fn type_allows(&self, from: usize, to: usize) -> bool {
        !(self.kinds[from] == VariableKind::Continuous && self.kinds[to] == VariableKind::Discrete)
    }

    /// True when `to` can reach `from`, i.e. adding `from -> to` closes a cycle.
    pub fn reaches(&self, start: usize, target: usize) -> bool {
        if start == target {
            return true;
        }
        let children = self.children_lists();
        let mut seen = vec![false; self.n_nodes()];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(node) = stack.pop() {
            for &c in &children[node] {
                if c == target {
                    return true;
                }
                if !seen[c] {
                    seen[c] = true;
                    stack.push(c);
                }
            }
        }
        false
    }

    fn children_lists(&self) -> Vec<Vec<usize>> {
        let mut children = vec![Vec::new(); self.n_nodes()];
        for (child, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(child);
            }
        }
        children
    }

    fn check_node(&self, node: usize) -> Result<(), DagError> {
        if node < self.n_nodes() {
            Ok(())
        } else {
            Err(DagError::UnknownNode(node))
        }
    }

    pub fn add_edge(&mut self, from: usize, to: usize) -> Result<(), DagError> {
        self.check_node(from)?;
        self.check_node(to)?;
        if from == to {
            return Err(DagError::SelfLoop(from));
        }
        if self.has_edge(from, to) {
            return Err(DagError::Duplicate(from, to));
        }
        if !self.type_allows(from, to) {
            return Err(DagError::TypeConstraint(from, to));
        }
        if self.reaches(to, from) {
            return Err(DagError::Cycle(from, to));
        }
        self.insert_unchecked(from, to);
        Ok(())
    }

    pub fn remove_edge(&mut self, from: usize, to: usize) -> Result<(), DagError> {
        self.check_node(from)?;
        self.check_node(to)?;
        match self.parents[to].binary_search(&from) {
            Ok(i) => {
                self.parents[to].remove(i);
                Ok(())
            }
            Err(_) => Err(DagError::Missing(from, to)),
        }
    }

    pub(crate) fn insert_unchecked(&mut self, from: usize, to: usize) {
        if let Err(i) = self.parents[to].binary_search(&from) {
            self.parents[to].insert(i, from);
        }
    }

    /// Replaces a node's parent set without validation; callers repair afterwards.
    pub(crate) fn set_parents_unchecked(&mut self, node: usize, mut parents: Vec<usize>) {
        parents.sort_unstable();
        parents.dedup();
        self.parents[node] = parents;
    }

    /// Kahn topological order, or `Cyclic`. Ties resolve to the smallest index.
    pub fn topological_order(&self) -> Result<Vec<usize>, DagError> {
        let n = self.n_nodes();
        let children = self.children_lists();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut ready: std::collections::BTreeSet<usize> =
            (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(node) = ready.pop_first() {
            order.push(node);
            for &c in &children[node] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(DagError::Cyclic)
        }
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_ok()
    }

    /// Checks every invariant, including an optional parent cap.
    pub fn validate(&self, max_parents: Option<usize>) -> Result<(), DagError> {
        for (child, ps) in self.parents.iter().enumerate() {
            if let Some(cap) = max_parents {
                if ps.len() > cap {
                    return Err(DagError::TooManyParents { node: child, cap });
                }
            }
            for w in ps.windows(2) {
                if w[0] == w[1] {
                    return Err(DagError::Duplicate(w[0], child));
                }
            }
            for &p in ps {
                self.check_node(p)?;
                if p == child {
                    return Err(DagError::SelfLoop(p));
                }
                if !self.type_allows(p, child) {
                    return Err(DagError::TypeConstraint(p, child));
                }
            }
        }
        self.topological_order().map(|_| ())
    }

    /// Edges of one directed cycle, if any exists.
    pub(crate) fn find_cycle(&self) -> Option<Vec<(usize, usize)>> {
        let n = self.n_nodes();
        let children = self.children_lists();
        // 0 = unvisited, 1 = on stack, 2 = done
        let mut state = vec![0u8; n];
        let mut parent_of = vec![usize::MAX; n];
        for root in 0..n {
            if state[root] != 0 {
                continue;
            }
            let mut stack = vec![(root, 0usize)];
            state[root] = 1;
            while let Some(&mut (node, ref mut next)) = stack.last_mut() {
                if *next < children[node].len() {
                    let c = children[node][*next];
                    *next += 1;
                    match state[c] {
                        0 => {
                            state[c] = 1;
                            parent_of[c] = node;
                            stack.push((c, 0));
                        }
                        1 => {
                            let mut cycle = vec![(node, c)];
                            let mut cur = node;
                            while cur != c {
                                let p = parent_of[cur];
                                cycle.push((p, cur));
                                cur = p;
                            }
                            return Some(cycle);
                        }
                        _ => {}
                    }
                } else {
                    state[node] = 2;
                    stack.pop();
                }
            }
        }
        None
    }

    /// Applies a move after checking it is legal.
    pub fn apply(&self, mv: &Move) -> Result<Dag, DagError> {
        let mut next = self.clone();
        match mv.kind {
            MoveKind::Add => next.add_edge(mv.from, mv.to)?,
            MoveKind::Delete => next.remove_edge(mv.from, mv.to)?,
            MoveKind::Reverse => {
                next.remove_edge(mv.from, mv.to)?;
                next.add_edge(mv.to, mv.from)?;
            }
        }
        Ok(next)
    }

    /// Every move that keeps the graph valid under the optional parent cap.
    pub fn legal_moves(&self, max_parents: Option<usize>) -> Vec<Move> {
        let n = self.n_nodes();
        let cap_ok = |node: usize, extra: usize| {
            max_parents.is_none_or(|cap| self.parents[node].len() + extra <= cap)
        };
        let mut moves = Vec::new();
        for from in 0..n {
            for to in 0..n {
                if from == to {
                    continue;
                }
                if self.has_edge(from, to) {
                    moves.push(Move::delete(from, to));
                    // reversing needs the flipped edge to be legal once the
                    // original is gone: no other path from -> to may exist
                    if self.type_allows(to, from) && cap_ok(from, 1) && !self.reaches_without(from, to) {
                        moves.push(Move::reverse(from, to));
                    }
                } else if !self.has_edge(to, from)
                    && self.type_allows(from, to)
                    && cap_ok(to, 1)
                    && !self.reaches(to, from)
                {
                    moves.push(Move::add(from, to));
                }
            }
        }
        moves.sort();
        moves
    }

    /// Whether `from` reaches `to` by a path other than the direct edge.
    fn reaches_without(&self, from: usize, to: usize) -> bool {
        let mut g = self.clone();
        let _ = g.remove_edge(from, to);
        g.reaches(from, to)
    }

    /// Graphviz DOT rendering; discrete nodes are boxes.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph bn {\n");
        for (i, name) in self.names.iter().enumerate() {
            let shape = match self.kinds[i] {
                VariableKind::Discrete => "box",
                VariableKind::Continuous => "ellipse",
            };
            out.push_str(&format!("  \"{}\" [shape={shape}];\n", name.replace('"', "\\\"")));
        }
        for (from, to) in self.edges() {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\";\n",
                self.names[from].replace('"', "\\\""),
                self.names[to].replace('"', "\\\"")
            ));
        }
        out.push_str("}\n");
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MoveKind {
    Add,
    Delete,
    Reverse,
}

/// One local edit. Ordering is lexicographic on (kind, from, to), which is
/// also the tie-break order used by Hill-Climbing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Move {
    pub kind: MoveKind,
    pub from: usize,
    pub to: usize,
}

impl Move {
    pub fn add(from: usize, to: usize) -> Self {
        Self { kind: MoveKind::Add, from, to }
    }

    pub fn delete(from: usize, to: usize) -> Self {
        Self { kind: MoveKind::Delete, from, to }
    }

    pub fn reverse(from: usize, to: usize) -> Self {
        Self { kind: MoveKind::Reverse, from, to }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verb = match self.kind {
            MoveKind::Add => "add",
            MoveKind::Delete => "delete",
            MoveKind::Reverse => "reverse",
        };
        write!(f, "{verb} {} -> {}", self.from, self.to)
    }
}
