//! Directed weighted road graph.
//!
//! Vertices carry dense ids `0..n` assigned in first-appearance order of their
//! external labels. Edges keep their input order as edge ids; forward and
//! reverse adjacency are stored as CSR arrays over those ids.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;
use std::io::BufRead;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, RevcError};

pub type VertexId = u32;
pub type EdgeId = u32;
pub type Cost = f64;

pub const INF: Cost = f64::INFINITY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Direction {
    Forward,
    Backward,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub tail: VertexId,
    pub head: VertexId,
    pub cost: Cost,
}

/// One step of a traversal: the edge used and the vertex it leads to.
#[derive(Debug, Clone, Copy)]
pub struct Arc {
    pub edge: EdgeId,
    pub to: VertexId,
    pub cost: Cost,
}

#[derive(Debug, Clone)]
pub struct Graph {
    labels: Vec<String>,
    ids: HashMap<String, VertexId>,
    edges: Vec<Edge>,
    out_offsets: Vec<u32>,
    out_edges: Vec<EdgeId>,
    in_offsets: Vec<u32>,
    in_edges: Vec<EdgeId>,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct PerturbationSpec {
    pub relative_magnitude: f64,
    pub seed: u64,
}

impl PerturbationSpec {
    pub const DEFAULT_MAGNITUDE: f64 = 1e-6;

    pub fn new(relative_magnitude: f64, seed: u64) -> Result<Self> {
        if !(0.0..1e-3).contains(&relative_magnitude) {
            return Err(RevcError::InvalidParameter(format!(
                "perturbation magnitude must lie in [0, 1e-3), got {relative_magnitude}"
            )));
        }
        Ok(Self { relative_magnitude, seed })
    }

    pub fn none() -> Self {
        Self { relative_magnitude: 0.0, seed: 0 }
    }
}

impl Default for PerturbationSpec {
    fn default() -> Self {
        Self { relative_magnitude: Self::DEFAULT_MAGNITUDE, seed: 0 }
    }
}

fn build_csr(n: usize, edges: &[Edge], key: impl Fn(&Edge) -> VertexId) -> (Vec<u32>, Vec<EdgeId>) {
    let mut offsets = vec![0u32; n + 1];
    for e in edges {
        offsets[key(e) as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    let mut fill = offsets.clone();
    let mut list = vec![0; edges.len()];
    for (id, e) in edges.iter().enumerate() {
        let slot = &mut fill[key(e) as usize];
        list[*slot as usize] = id as EdgeId;
        *slot += 1;
    }
    (offsets, list)
}

impl Graph {
    /// Builds a graph from labelled vertices and edges, validating costs and
    /// collapsing parallel edges to the cheapest one.
    pub fn from_parts(labels: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let mut ids = HashMap::with_capacity(labels.len());
        for (i, l) in labels.iter().enumerate() {
            if ids.insert(l.clone(), i as VertexId).is_some() {
                return Err(RevcError::InvalidParameter(format!("duplicate vertex label `{l}`")));
            }
        }
        let n = labels.len();
        let mut seen: HashMap<(VertexId, VertexId), usize> = HashMap::new();
        let mut kept: Vec<Edge> = Vec::with_capacity(edges.len());
        for (i, e) in edges.into_iter().enumerate() {
            if e.tail as usize >= n || e.head as usize >= n {
                return Err(RevcError::InvalidParameter(format!("edge {i} references a missing vertex")));
            }
            if !e.cost.is_finite() || e.cost < 0.0 {
                return Err(RevcError::NegativeCost { line: i + 1, cost: e.cost });
            }
            if e.tail == e.head {
                return Err(RevcError::SelfLoop { line: i + 1, label: labels[e.tail as usize].clone() });
            }
            match seen.get(&(e.tail, e.head)) {
                Some(&k) => {
                    if e.cost < kept[k].cost {
                        kept[k].cost = e.cost;
                    }
                }
                None => {
                    seen.insert((e.tail, e.head), kept.len());
                    kept.push(e);
                }
            }
        }
        Ok(Self::assemble(labels, ids, kept))
    }

    fn assemble(labels: Vec<String>, ids: HashMap<String, VertexId>, edges: Vec<Edge>) -> Self {
        let n = labels.len();
        let (out_offsets, out_edges) = build_csr(n, &edges, |e| e.tail);
        let (in_offsets, in_edges) = build_csr(n, &edges, |e| e.head);
        Graph { labels, ids, edges, out_offsets, out_edges, in_offsets, in_edges }
    }

    /// Parses the tab-separated edge list format (`from\tto\tcost[\tbidir]`).
    pub fn load<R: BufRead>(reader: R) -> Result<Self> {
        let mut lines = reader.lines().enumerate();
        let header = loop {
            match lines.next() {
                Some((_, line)) => {
                    let line = line?;
                    if !line.trim().is_empty() {
                        break line;
                    }
                }
                None => return Err(RevcError::Parse { line: 1, message: "missing header".into() }),
            }
        };
        let cols: Vec<&str> = header.trim_end_matches('\r').split('\t').collect();
        if cols.len() < 3 || cols[0] != "from" || cols[1] != "to" || cols[2] != "cost" {
            return Err(RevcError::Parse {
                line: 1,
                message: format!("expected header `from\\tto\\tcost`, got `{header}`"),
            });
        }

        let mut labels: Vec<String> = Vec::new();
        let mut ids: HashMap<String, VertexId> = HashMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut slot: HashMap<(VertexId, VertexId), usize> = HashMap::new();

        let mut intern = |label: &str, labels: &mut Vec<String>| -> VertexId {
            if let Some(&id) = ids.get(label) {
                return id;
            }
            let id = labels.len() as VertexId;
            labels.push(label.to_string());
            ids.insert(label.to_string(), id);
            id
        };

        for (idx, line) in lines {
            let lineno = idx + 1;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split('\t').collect();
            if f.len() < 3 {
                return Err(RevcError::Parse { line: lineno, message: "expected at least 3 columns".into() });
            }
            let cost: f64 = f[2].trim().parse().map_err(|_| RevcError::Parse {
                line: lineno,
                message: format!("cannot parse cost `{}`", f[2]),
            })?;
            if !cost.is_finite() || cost < 0.0 {
                return Err(RevcError::NegativeCost { line: lineno, cost });
            }
            let (from, to) = (f[0].trim(), f[1].trim());
            if from.is_empty() || to.is_empty() {
                return Err(RevcError::Parse { line: lineno, message: "empty vertex label".into() });
            }
            if from == to {
                return Err(RevcError::SelfLoop { line: lineno, label: from.to_string() });
            }
            let bidir = match f.get(3).map(|s| s.trim()) {
                None | Some("") | Some("0") => false,
                Some("1") => true,
                Some(other) => {
                    return Err(RevcError::Parse { line: lineno, message: format!("bad bidir flag `{other}`") })
                }
            };
            let t = intern(from, &mut labels);
            let h = intern(to, &mut labels);
            let mut add = |tail: VertexId, head: VertexId| match slot.get(&(tail, head)) {
                Some(&k) => {
                    log::warn!(
                        "line {lineno}: duplicate edge {} -> {}, keeping the cheaper cost",
                        labels[tail as usize],
                        labels[head as usize]
                    );
                    if cost < edges[k].cost {
                        edges[k].cost = cost;
                    }
                }
                None => {
                    slot.insert((tail, head), edges.len());
                    edges.push(Edge { tail, head, cost });
                }
            };
            add(t, h);
            if bidir {
                add(h, t);
            }
        }
        let ids = labels.iter().enumerate().map(|(i, l)| (l.clone(), i as VertexId)).collect();
        Ok(Self::assemble(labels, ids, edges))
    }

    pub fn load_str(text: &str) -> Result<Self> {
        Self::load(text.as_bytes())
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("from\tto\tcost\n");
        for e in &self.edges {
            let _ = writeln!(out, "{}\t{}\t{}", self.labels[e.tail as usize], self.labels[e.head as usize], e.cost);
        }
        out
    }

    pub fn num_vertices(&self) -> usize {
        self.labels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id as usize]
    }

    pub fn label(&self, v: VertexId) -> &str {
        &self.labels[v as usize]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn vertex(&self, label: &str) -> Option<VertexId> {
        self.ids.get(label).copied()
    }

    pub fn require_vertex(&self, label: &str) -> Result<VertexId> {
        self.vertex(label).ok_or_else(|| RevcError::UnknownVertex(label.to_string()))
    }

    pub fn out_edge_ids(&self, v: VertexId) -> &[EdgeId] {
        let v = v as usize;
        &self.out_edges[self.out_offsets[v] as usize..self.out_offsets[v + 1] as usize]
    }

    pub fn in_edge_ids(&self, v: VertexId) -> &[EdgeId] {
        let v = v as usize;
        &self.in_edges[self.in_offsets[v] as usize..self.in_offsets[v + 1] as usize]
    }

    /// Arcs leaving `v` when traversing in `dir`: out-edges for forward
    /// searches, in-edges (walked backwards) for backward searches.
    pub fn arcs(&self, v: VertexId, dir: Direction) -> impl Iterator<Item = Arc> + '_ {
        let (ids, backward) = match dir {
            Direction::Forward => (self.out_edge_ids(v), false),
            Direction::Backward => (self.in_edge_ids(v), true),
        };
        ids.iter().map(move |&id| {
            let e = &self.edges[id as usize];
            Arc { edge: id, to: if backward { e.tail } else { e.head }, cost: e.cost }
        })
    }

    pub fn edge_between(&self, tail: VertexId, head: VertexId) -> Option<EdgeId> {
        self.out_edge_ids(tail).iter().copied().find(|&id| self.edges[id as usize].head == head)
    }

    /// Length of a vertex sequence, summed left to right.
    pub fn path_cost(&self, path: &[VertexId]) -> Option<Cost> {
        let mut total = 0.0;
        for w in path.windows(2) {
            total += self.edges[self.edge_between(w[0], w[1])? as usize].cost;
        }
        Some(total)
    }

    /// Distinct neighbours of `v`, ignoring edge direction.
    pub fn undirected_neighbours(&self, v: VertexId) -> Vec<VertexId> {
        let mut nb: Vec<VertexId> = self
            .out_edge_ids(v)
            .iter()
            .map(|&id| self.edges[id as usize].head)
            .chain(self.in_edge_ids(v).iter().map(|&id| self.edges[id as usize].tail))
            .collect();
        nb.sort_unstable();
        nb.dedup();
        nb
    }

    pub fn max_out_cost(&self, v: VertexId, dir: Direction) -> Cost {
        self.arcs(v, dir).map(|a| a.cost).fold(0.0, f64::max)
    }

    pub fn reverse(&self) -> Graph {
        let edges = self.edges.iter().map(|e| Edge { tail: e.head, head: e.tail, cost: e.cost }).collect();
        Self::assemble(self.labels.clone(), self.ids.clone(), edges)
    }

    /// Multiplies every cost by `1 + u`, `u ~ U[0, magnitude)`, where `u` is
    /// drawn from a stream position fixed by the edge index.
    pub fn perturb_costs(&self, spec: &PerturbationSpec) -> Graph {
        let mut edges = self.edges.clone();
        if spec.relative_magnitude > 0.0 {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for (i, e) in edges.iter_mut().enumerate() {
                rng.set_word_pos(2 * i as u128);
                let u: f64 = rng.gen::<f64>() * spec.relative_magnitude;
                e.cost *= 1.0 + u;
            }
        }
        Self::assemble(self.labels.clone(), self.ids.clone(), edges)
    }

    /// Repeatedly deletes vertices with at most one neighbour that are not in
    /// `keep`. Distances among kept vertices are unaffected.
    pub fn trim_dead_ends<S: AsRef<str>>(&self, keep: &[S]) -> Result<Graph> {
        let n = self.num_vertices();
        let mut pinned = vec![false; n];
        for k in keep {
            pinned[self.require_vertex(k.as_ref())? as usize] = true;
        }
        let nbrs: Vec<Vec<VertexId>> = (0..n as VertexId).map(|v| self.undirected_neighbours(v)).collect();
        let mut degree: Vec<usize> = nbrs.iter().map(Vec::len).collect();
        let mut alive = vec![true; n];
        let mut queue: VecDeque<VertexId> =
            (0..n as VertexId).filter(|&v| !pinned[v as usize] && degree[v as usize] <= 1).collect();
        while let Some(v) = queue.pop_front() {
            if !alive[v as usize] {
                continue;
            }
            alive[v as usize] = false;
            for &w in &nbrs[v as usize] {
                if alive[w as usize] {
                    degree[w as usize] -= 1;
                    if degree[w as usize] <= 1 && !pinned[w as usize] {
                        queue.push_back(w);
                    }
                }
            }
        }
        self.induced(&alive)
    }

    /// Subgraph on the vertices flagged in `alive`, keeping relative order.
    pub fn induced(&self, alive: &[bool]) -> Result<Graph> {
        let mut remap = vec![u32::MAX; self.num_vertices()];
        let mut labels = Vec::new();
        for (v, &a) in alive.iter().enumerate() {
            if a {
                remap[v] = labels.len() as VertexId;
                labels.push(self.labels[v].clone());
            }
        }
        let edges = self
            .edges
            .iter()
            .filter(|e| alive[e.tail as usize] && alive[e.head as usize])
            .map(|e| Edge { tail: remap[e.tail as usize], head: remap[e.head as usize], cost: e.cost })
            .collect();
        Graph::from_parts(labels, edges)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Graph {
        Graph::load_str("from\tto\tcost\nA\tB\t1.0\nB\tC\t1.0\nA\tC\t3.0\n").unwrap()
    }

    #[test]
    fn loads_three_rows() {
        let g = abc();
        assert_eq!(g.num_vertices(), 3);
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.vertex("A"), Some(0));
        assert_eq!(g.vertex("C"), Some(2));
        assert_eq!(g.edge(2).cost, 3.0);
    }

    #[test]
    fn negative_cost_names_the_row() {
        let err = Graph::load_str("from\tto\tcost\nA\tB\t1\nB\tC\t-1\n").unwrap_err();
        assert!(matches!(err, RevcError::NegativeCost { line: 3, .. }), "{err}");
        assert!(err.to_string().contains("line 3"));
    }

    #[test]
    fn self_loop_rejected() {
        let err = Graph::load_str("from\tto\tcost\nA\tA\t1\n").unwrap_err();
        assert!(matches!(err, RevcError::SelfLoop { line: 2, .. }));
    }

    #[test]
    fn bad_header_rejected() {
        assert!(Graph::load_str("a\tb\tc\nA\tB\t1\n").is_err());
    }

    #[test]
    fn duplicate_keeps_cheaper() {
        let g = Graph::load_str("from\tto\tcost\nA\tB\t5\nA\tB\t2\nA\tB\t4\n").unwrap();
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.edge(0).cost, 2.0);
    }

    #[test]
    fn bidir_column_inserts_reverse() {
        let g = Graph::load_str("from\tto\tcost\tbidir\nA\tB\t2\t1\nB\tC\t1\t0\n").unwrap();
        assert_eq!(g.num_edges(), 3);
        assert_eq!(g.edge_between(1, 0), Some(1));
        assert_eq!(g.edge_between(2, 1), None);
    }

    fn grid_tsv(side: usize) -> String {
        let mut s = String::from("from\tto\tcost\n");
        for r in 0..side {
            for c in 0..side {
                let v = r * side + c;
                if c + 1 < side {
                    s += &format!("{v}\t{}\t1\n{}\t{v}\t1\n", v + 1, v + 1);
                }
                if r + 1 < side {
                    s += &format!("{v}\t{}\t1\n{}\t{v}\t1\n", v + side, v + side);
                }
            }
        }
        s
    }

    #[test]
    fn ten_by_ten_grid_counts() {
        // 10 rows * 9 horizontal + 10 cols * 9 vertical = 180 undirected links.
        let g = Graph::load_str(&grid_tsv(10)).unwrap();
        assert_eq!(g.num_vertices(), 100);
        assert_eq!(g.num_edges(), 360);
    }

    #[test]
    fn zero_perturbation_is_identity() {
        let g = abc();
        let p = g.perturb_costs(&PerturbationSpec::none());
        assert_eq!(g.edges(), p.edges());
    }

    #[test]
    fn perturbation_is_deterministic_and_bounded() {
        let g = Graph::load_str(&grid_tsv(4)).unwrap();
        let spec = PerturbationSpec::new(1e-4, 7).unwrap();
        let a = g.perturb_costs(&spec);
        let b = g.perturb_costs(&spec);
        assert_eq!(a.edges(), b.edges());
        for (x, y) in g.edges().iter().zip(a.edges()) {
            assert!(y.cost >= x.cost && y.cost < x.cost * (1.0 + 1e-4));
        }
    }

    #[test]
    fn perturbation_separates_unit_cycle() {
        let g = Graph::load_str("from\tto\tcost\na\tb\t1\nb\tc\t1\nc\td\t1\nd\ta\t1\n").unwrap();
        let p = g.perturb_costs(&PerturbationSpec::new(1e-6, 42).unwrap());
        let mut costs: Vec<f64> = p.edges().iter().map(|e| e.cost).collect();
        costs.sort_by(f64::total_cmp);
        costs.dedup();
        assert_eq!(costs.len(), 4);
    }

    #[test]
    fn perturbation_keeps_zero_costs() {
        let g = Graph::load_str("from\tto\tcost\na\tb\t0\n").unwrap();
        let p = g.perturb_costs(&PerturbationSpec::new(5e-4, 1).unwrap());
        assert_eq!(p.edge(0).cost, 0.0);
    }

    #[test]
    fn magnitude_out_of_range() {
        assert!(PerturbationSpec::new(1e-3, 0).is_err());
        assert!(PerturbationSpec::new(-1e-9, 0).is_err());
    }

    #[test]
    fn trim_keeps_interior_path() {
        let g = Graph::load_str("from\tto\tcost\tbidir\nA\tB\t1\t1\nB\tC\t1\t1\n").unwrap();
        let t = g.trim_dead_ends(&["A", "C"]).unwrap();
        assert_eq!(t.num_vertices(), 3);
        assert_eq!(t.num_edges(), 4);
    }

    #[test]
    fn trim_star_leaves() {
        let g = Graph::load_str("from\tto\tcost\tbidir\nX\tL1\t1\t1\nX\tL2\t1\t1\nX\tL3\t1\t1\nX\tL4\t1\t1\n").unwrap();
        let t = g.trim_dead_ends(&["X", "L1"]).unwrap();
        let mut labels = t.labels().to_vec();
        labels.sort();
        assert_eq!(labels, vec!["L1", "X"]);
    }

    #[test]
    fn trim_unknown_keep_errors() {
        let g = abc();
        let err = g.trim_dead_ends(&["Z"]).unwrap_err();
        assert!(err.to_string().contains('Z'));
    }

    #[test]
    fn reverse_twice_restores_adjacency() {
        let g = Graph::load_str(&grid_tsv(3)).unwrap();
        let r = g.reverse();
        for v in 0..g.num_vertices() as VertexId {
            let fwd: Vec<_> = g.arcs(v, Direction::Forward).map(|a| (a.edge, a.to)).collect();
            let rb: Vec<_> = r.arcs(v, Direction::Backward).map(|a| (a.edge, a.to)).collect();
            assert_eq!(fwd, rb);
        }
    }
}
