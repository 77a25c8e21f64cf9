//! Mixed graphs: node set plus at most one edge per unordered pair, each
//! edge undirected or directed. Queries cover acyclicity, weak
//! connectivity, and directed reachability; a DAG is a mixed graph whose
//! edges are all directed and acyclic.

use crate::error::{Error, Result};
use std::io::{BufRead, BufReader, Read, Write};

/// How an edge is marked. Directed edges carry their direction in the
/// `(from, to)` tuple that accompanies the mark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mark {
    Undirected,
    Directed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Cell {
    None,
    Undirected,
    Out,
    In,
}

/// Node-ordered mixed graph over a dense adjacency matrix.
///
/// Node order mirrors the dataset column order everywhere in the crate, so
/// index-based iteration is the canonical iteration order.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    nodes: Vec<String>,
    cells: Vec<Cell>,
}

impl Graph {
    pub fn new(nodes: Vec<String>) -> Result<Self> {
        for (i, a) in nodes.iter().enumerate() {
            if nodes[..i].contains(a) {
                return Err(Error::Graph(format!("duplicate node '{a}'")));
            }
        }
        let n = nodes.len();
        Ok(Graph {
            nodes,
            cells: vec![Cell::None; n * n],
        })
    }

    /// Complete graph: every pair joined by an undirected edge.
    pub fn complete_undirected(nodes: Vec<String>) -> Result<Self> {
        let mut g = Graph::new(nodes)?;
        for a in 0..g.n() {
            for b in (a + 1)..g.n() {
                g.add_undirected(a, b)?;
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == name)
    }

    fn at(&self, a: usize, b: usize) -> Cell {
        self.cells[a * self.n() + b]
    }

    fn put(&mut self, a: usize, b: usize, cell: Cell) {
        let n = self.n();
        self.cells[a * n + b] = cell;
        self.cells[b * n + a] = match cell {
            Cell::None => Cell::None,
            Cell::Undirected => Cell::Undirected,
            Cell::Out => Cell::In,
            Cell::In => Cell::Out,
        };
    }

    fn check_pair(&self, a: usize, b: usize) -> Result<()> {
        if a == b {
            return Err(Error::Graph(format!("self-loop on '{}'", self.nodes[a])));
        }
        if a >= self.n() || b >= self.n() {
            return Err(Error::Graph("node index out of range".to_string()));
        }
        Ok(())
    }

    pub fn is_adjacent(&self, a: usize, b: usize) -> bool {
        a != b && self.at(a, b) != Cell::None
    }

    /// True iff the edge `from → to` exists with that direction.
    pub fn has_directed(&self, from: usize, to: usize) -> bool {
        from != to && self.at(from, to) == Cell::Out
    }

    pub fn has_undirected(&self, a: usize, b: usize) -> bool {
        a != b && self.at(a, b) == Cell::Undirected
    }

    pub fn add_undirected(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        if self.is_adjacent(a, b) {
            return Err(Error::Graph(format!(
                "edge {}-{} already exists",
                self.nodes[a], self.nodes[b]
            )));
        }
        self.put(a, b, Cell::Undirected);
        Ok(())
    }

    pub fn add_directed(&mut self, from: usize, to: usize) -> Result<()> {
        self.check_pair(from, to)?;
        if self.is_adjacent(from, to) {
            return Err(Error::Graph(format!(
                "edge {}-{} already exists",
                self.nodes[from], self.nodes[to]
            )));
        }
        self.put(from, to, Cell::Out);
        Ok(())
    }

    /// Give an existing edge the direction `from → to` (idempotent on an
    /// already-matching direction; reverses an opposing one).
    pub fn orient(&mut self, from: usize, to: usize) -> Result<()> {
        self.check_pair(from, to)?;
        if !self.is_adjacent(from, to) {
            return Err(Error::Graph(format!(
                "no edge {}-{} to orient",
                self.nodes[from], self.nodes[to]
            )));
        }
        self.put(from, to, Cell::Out);
        Ok(())
    }

    /// Strip direction from an existing edge.
    pub fn set_undirected(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        if !self.is_adjacent(a, b) {
            return Err(Error::Graph(format!(
                "no edge {}-{} to unorient",
                self.nodes[a], self.nodes[b]
            )));
        }
        self.put(a, b, Cell::Undirected);
        Ok(())
    }

    pub fn remove_edge(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        if !self.is_adjacent(a, b) {
            return Err(Error::Graph(format!(
                "no edge {}-{} to remove",
                self.nodes[a], self.nodes[b]
            )));
        }
        self.put(a, b, Cell::None);
        Ok(())
    }

    pub fn reverse_edge(&mut self, from: usize, to: usize) -> Result<()> {
        if !self.has_directed(from, to) {
            return Err(Error::Graph(format!(
                "no directed edge {}->{} to reverse",
                self.nodes.get(from).map(String::as_str).unwrap_or("?"),
                self.nodes.get(to).map(String::as_str).unwrap_or("?")
            )));
        }
        self.put(from, to, Cell::In);
        Ok(())
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n()).filter(|&u| self.is_adjacent(v, u)).collect()
    }

    pub fn parents(&self, v: usize) -> Vec<usize> {
        (0..self.n()).filter(|&u| self.has_directed(u, v)).collect()
    }

    pub fn children(&self, v: usize) -> Vec<usize> {
        (0..self.n()).filter(|&u| self.has_directed(v, u)).collect()
    }

    pub fn undirected_neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n())
            .filter(|&u| self.has_undirected(v, u))
            .collect()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.neighbors(v).len()
    }

    pub fn n_edges(&self) -> usize {
        let mut count = 0;
        for a in 0..self.n() {
            for b in (a + 1)..self.n() {
                if self.is_adjacent(a, b) {
                    count += 1;
                }
            }
        }
        count
    }

    /// All nodes reachable from `v` by a directed path of length >= 1,
    /// sorted ascending. In a DAG this never contains `v`; when the
    /// directed part is cyclic (orientation probes), `v` counts itself
    /// iff it sits on a cycle.
    pub fn descendants(&self, v: usize) -> Vec<usize> {
        let mut seen = vec![false; self.n()];
        let mut stack = vec![v];
        while let Some(u) = stack.pop() {
            for w in self.children(u) {
                if w == v {
                    // cycle back to the start; its children are already
                    // on the stack
                    seen[v] = true;
                } else if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        (0..self.n()).filter(|&u| seen[u]).collect()
    }

    /// True iff `to` is reachable from `from` via directed edges.
    pub fn reaches_directed(&self, from: usize, to: usize) -> bool {
        if from == to {
            return true;
        }
        let mut seen = vec![false; self.n()];
        let mut stack = vec![from];
        while let Some(u) = stack.pop() {
            for w in self.children(u) {
                if w == to {
                    return true;
                }
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
        false
    }

    /// True iff the directed sub-edges contain no directed cycle;
    /// undirected edges are ignored.
    pub fn is_acyclic(&self) -> bool {
        let n = self.n();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.parents(v).len()).collect();
        let mut queue: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut removed = 0;
        while let Some(v) = queue.pop() {
            removed += 1;
            for c in self.children(v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push(c);
                }
            }
        }
        removed == n
    }

    /// Component count and a node → component-id assignment, treating every
    /// edge as undirected. Component ids are assigned in ascending order of
    /// each component's smallest node index.
    pub fn weak_components(&self) -> (usize, Vec<usize>) {
        let n = self.n();
        let mut comp = vec![usize::MAX; n];
        let mut count = 0;
        for start in 0..n {
            if comp[start] != usize::MAX {
                continue;
            }
            let id = count;
            count += 1;
            let mut stack = vec![start];
            comp[start] = id;
            while let Some(u) = stack.pop() {
                for w in self.neighbors(u) {
                    if comp[w] == usize::MAX {
                        comp[w] = id;
                        stack.push(w);
                    }
                }
            }
        }
        (count, comp)
    }

    pub fn is_weakly_connected(&self) -> bool {
        self.n() <= 1 || self.weak_components().0 == 1
    }

    /// True iff removing the edge between `a` and `b` would leave the graph
    /// weakly connected.
    pub fn stays_connected_without(&self, a: usize, b: usize) -> bool {
        let mut g = self.clone();
        if g.remove_edge(a, b).is_err() {
            return self.is_weakly_connected();
        }
        g.is_weakly_connected()
    }

    /// Canonical edge list: one entry per unordered pair in ascending
    /// `(a, b)` order with `a < b`; directed entries carry `(from, to)`.
    pub fn edges(&self) -> Vec<(usize, usize, Mark)> {
        let mut out = Vec::new();
        for a in 0..self.n() {
            for b in (a + 1)..self.n() {
                match self.at(a, b) {
                    Cell::None => {}
                    Cell::Undirected => out.push((a, b, Mark::Undirected)),
                    Cell::Out => out.push((a, b, Mark::Directed)),
                    Cell::In => out.push((b, a, Mark::Directed)),
                }
            }
        }
        out
    }

    pub fn directed_edges(&self) -> Vec<(usize, usize)> {
        self.edges()
            .into_iter()
            .filter(|&(_, _, m)| m == Mark::Directed)
            .map(|(f, t, _)| (f, t))
            .collect()
    }

    pub fn undirected_edge_count(&self) -> usize {
        self.edges()
            .iter()
            .filter(|&&(_, _, m)| m == Mark::Undirected)
            .count()
    }

    pub fn fully_directed(&self) -> bool {
        self.undirected_edge_count() == 0
    }

    /// Structure identity key: the canonical edge list packed into a
    /// hashable value. Equal iff the graphs have identical edge sets and
    /// marks over the same node order.
    pub fn canonical_key(&self) -> Vec<(u16, u16, u8)> {
        let mut key = Vec::new();
        for a in 0..self.n() {
            for b in (a + 1)..self.n() {
                let tag = match self.at(a, b) {
                    Cell::None => continue,
                    Cell::Undirected => 0u8,
                    Cell::Out => 1,
                    Cell::In => 2,
                };
                key.push((a as u16, b as u16, tag));
            }
        }
        key
    }

    /// Topological order over directed edges (undirected edges ignored),
    /// smallest node index first among ready nodes.
    pub fn topological_order(&self) -> Result<Vec<usize>> {
        let n = self.n();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.parents(v).len()).collect();
        let mut order = Vec::with_capacity(n);
        let mut ready: Vec<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        while !ready.is_empty() {
            let (pos, &v) = ready
                .iter()
                .enumerate()
                .min_by_key(|&(_, &v)| v)
                .expect("ready non-empty");
            ready.swap_remove(pos);
            order.push(v);
            for c in self.children(v) {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.push(c);
                }
            }
        }
        if order.len() != n {
            return Err(Error::Graph("directed cycle present".to_string()));
        }
        Ok(order)
    }
}

/// Write a fully directed graph as a CSV edge list. The first line is a
/// `#nodes:` comment carrying the full node list in order (so isolated
/// nodes and column order survive a round trip), then a `parent,child`
/// header and one row per directed edge.
pub fn write_dag_csv<W: Write>(g: &Graph, mut out: W) -> Result<()> {
    if !g.fully_directed() {
        return Err(Error::Graph(
            "cannot serialize a graph with undirected edges as a DAG".to_string(),
        ));
    }
    writeln!(out, "#nodes:{}", g.nodes().join(","))?;
    writeln!(out, "parent,child")?;
    for (from, to, _) in g.edges() {
        writeln!(out, "{},{}", g.nodes()[from], g.nodes()[to])?;
    }
    Ok(())
}

/// Read a DAG edge list written by [`write_dag_csv`] or by hand. Leading
/// `#` lines are comments; a `#nodes:` comment pre-declares the node list
/// (required for isolated nodes). Endpoint names not pre-declared are
/// appended in first-appearance order.
pub fn read_dag_csv<R: Read>(reader: R) -> Result<Graph> {
    let buf = BufReader::new(reader);
    let mut nodes: Vec<String> = Vec::new();
    let mut edges: Vec<(String, String)> = Vec::new();
    let mut header_seen = false;
    for line in buf.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            if let Some(list) = rest.trim().strip_prefix("nodes:") {
                for name in list.split(',') {
                    let name = name.trim();
                    if !name.is_empty() && !nodes.iter().any(|n| n == name) {
                        nodes.push(name.to_string());
                    }
                }
            }
            continue;
        }
        if !header_seen {
            let lowered = line.to_ascii_lowercase();
            if lowered.replace(' ', "") != "parent,child" {
                return Err(Error::Graph(format!(
                    "expected 'parent,child' header, found '{line}'"
                )));
            }
            header_seen = true;
            continue;
        }
        let mut parts = line.splitn(2, ',');
        let parent = parts.next().unwrap_or("").trim().to_string();
        let child = parts.next().unwrap_or("").trim().to_string();
        if parent.is_empty() || child.is_empty() {
            return Err(Error::Graph(format!("malformed edge row '{line}'")));
        }
        edges.push((parent, child));
    }
    if !header_seen {
        return Err(Error::Graph("missing 'parent,child' header".to_string()));
    }
    for (p, c) in &edges {
        for name in [p, c] {
            if !nodes.iter().any(|n| n == name) {
                nodes.push(name.clone());
            }
        }
    }
    let mut g = Graph::new(nodes)?;
    for (p, c) in edges {
        let from = g
            .node_index(&p)
            .ok_or_else(|| Error::Graph(format!("unknown node '{p}'")))?;
        let to = g
            .node_index(&c)
            .ok_or_else(|| Error::Graph(format!("unknown node '{c}'")))?;
        g.add_directed(from, to)?;
    }
    Ok(g)
}
