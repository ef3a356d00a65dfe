use rayon::prelude::*;

use crate::dijkstra::distances;
use crate::graph::{Cost, Direction, Graph, VertexId, INF};

/// Exact distances for every origin/destination combination, with the
/// per-endpoint maximum `M` and minimum `L` over reachable partners.
/// Endpoints without any reachable partner carry `M = L = INF`.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    pub origins: Vec<VertexId>,
    pub destinations: Vec<VertexId>,
    dist: Vec<Cost>,
    pub m_origin: Vec<Cost>,
    pub l_origin: Vec<Cost>,
    pub m_dest: Vec<Cost>,
    pub l_dest: Vec<Cost>,
}

fn max_min(vals: impl Iterator<Item = Cost>) -> (Cost, Cost) {
    let (mut m, mut l) = (f64::NEG_INFINITY, INF);
    for d in vals.filter(|d| d.is_finite()) {
        m = m.max(d);
        l = l.min(d);
    }
    if l == INF {
        (INF, INF)
    } else {
        (m, l)
    }
}

impl DistanceMatrix {
    /// One full tree per origin, or one backward tree per destination when
    /// destinations are fewer.
    pub fn compute(g: &Graph, origins: &[VertexId], destinations: &[VertexId]) -> Self {
        let (no, nd) = (origins.len(), destinations.len());
        let mut dist = vec![INF; no * nd];
        if nd < no {
            let cols: Vec<Vec<Cost>> =
                destinations.par_iter().map(|&t| distances(g, t, Direction::Backward)).collect();
            for (j, col) in cols.iter().enumerate() {
                for (i, &s) in origins.iter().enumerate() {
                    dist[i * nd + j] = col[s as usize];
                }
            }
        } else {
            let rows: Vec<Vec<Cost>> = origins.par_iter().map(|&s| distances(g, s, Direction::Forward)).collect();
            for (i, row) in rows.iter().enumerate() {
                for (j, &t) in destinations.iter().enumerate() {
                    dist[i * nd + j] = row[t as usize];
                }
            }
        }
        let mut m = DistanceMatrix {
            origins: origins.to_vec(),
            destinations: destinations.to_vec(),
            dist,
            m_origin: Vec::new(),
            l_origin: Vec::new(),
            m_dest: Vec::new(),
            l_dest: Vec::new(),
        };
        let (mo, lo): (Vec<_>, Vec<_>) = (0..no).map(|i| max_min((0..nd).map(|j| m.get(i, j)))).unzip();
        let (md, ld): (Vec<_>, Vec<_>) = (0..nd).map(|j| max_min((0..no).map(|i| m.get(i, j)))).unzip();
        m.m_origin = mo;
        m.l_origin = lo;
        m.m_dest = md;
        m.l_dest = ld;
        m
    }

    /// Distance between origin ordinal `i` and destination ordinal `j`.
    pub fn get(&self, i: usize, j: usize) -> Cost {
        self.dist[i * self.destinations.len() + j]
    }

    pub fn is_reachable(&self, i: usize, j: usize) -> bool {
        self.get(i, j).is_finite()
    }

    pub fn mean_finite(&self) -> Option<Cost> {
        let f: Vec<Cost> = self.dist.iter().copied().filter(|d| d.is_finite() && *d > 0.0).collect();
        (!f.is_empty()).then(|| f.iter().sum::<Cost>() / f.len() as Cost)
    }
}
