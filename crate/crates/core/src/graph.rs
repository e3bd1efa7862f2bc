//! Finite simple graphs and their basic invariants.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// A finite simple undirected graph with sorted adjacency lists.
///
/// Construction enforces simplicity (no loops, no parallel edges) and
/// connectivity; all blocks of a coarse union go through here.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Graph {
    n: usize,
    adj: Vec<Vec<u32>>,
    label: Option<String>,
    /// Set by constructors that guarantee a vertex-transitive graph
    /// (cycles, complete graphs, Cayley graphs). Used by the profiler to
    /// collapse isometric ball subsets; `false` is always safe.
    vertex_transitive: bool,
}

/// Girth of a graph; forests have no cycle at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Girth {
    Finite(u32),
    Infinite,
}

impl Girth {
    pub fn as_finite(&self) -> Option<u32> {
        match self {
            Girth::Finite(g) => Some(*g),
            Girth::Infinite => None,
        }
    }
}

impl std::fmt::Display for Girth {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => write!(f, "INFINITE"),
        }
    }
}

/// Descriptor accepted by [`build_graph`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GraphSpec {
    Cycle(usize),
    Path(usize),
    Complete(usize),
    EdgeList { vertices: usize, edges: Vec<(u32, u32)> },
    Named(CageName),
}

/// The cage graphs shipped as embedded edge lists.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CageName {
    Petersen,
    Heawood,
    McGee,
    TutteCoxeter,
}

impl CageName {
    pub fn parse(s: &str) -> Option<CageName> {
        match s {
            "petersen" => Some(CageName::Petersen),
            "heawood" => Some(CageName::Heawood),
            "mcgee" => Some(CageName::McGee),
            "tutte-coxeter" => Some(CageName::TutteCoxeter),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            CageName::Petersen => "petersen",
            CageName::Heawood => "heawood",
            CageName::McGee => "mcgee",
            CageName::TutteCoxeter => "tutte-coxeter",
        }
    }
}

impl Graph {
    /// Builds a graph from an explicit edge list, validating simplicity and
    /// connectivity.
    pub fn from_edges(n: usize, edges: &[(u32, u32)], label: Option<String>) -> Result<Graph> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            let (u, v) = (u as usize, v as usize);
            if u >= n || v >= n {
                return Err(Error::invalid(format!(
                    "edge ({u},{v}) references a vertex outside 0..{n}"
                )));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at vertex {u}")));
            }
            if adj[u].contains(&(v as u32)) {
                return Err(Error::invalid(format!("duplicate edge ({u},{v})")));
            }
            adj[u].push(v as u32);
            adj[v].push(u as u32);
        }
        for l in &mut adj {
            l.sort_unstable();
        }
        let g = Graph {
            n,
            adj,
            label,
            vertex_transitive: false,
        };
        let comps = g.components();
        if comps.len() > 1 {
            let desc: Vec<String> = comps.iter().map(|c| format!("{c:?}")).collect();
            return Err(Error::invalid(format!(
                "graph is disconnected; components: {}",
                desc.join(" ")
            )));
        }
        Ok(g)
    }

    pub(crate) fn mark_vertex_transitive(mut self) -> Graph {
        self.vertex_transitive = true;
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|l| l.len()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> &[u32] {
        &self.adj[v]
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).min().unwrap_or(0)
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn set_label(&mut self, label: impl Into<String>) {
        self.label = Some(label.into());
    }

    pub fn is_vertex_transitive(&self) -> bool {
        self.vertex_transitive
    }

    pub fn edges(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for u in 0..self.n {
            for &v in &self.adj[u] {
                if (u as u32) < v {
                    out.push((u as u32, v));
                }
            }
        }
        out
    }

    /// BFS distances from `source`; unreachable vertices get `None`.
    pub fn bfs(&self, source: usize) -> Vec<Option<u32>> {
        let mut dist = vec![None; self.n];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &self.adj[u] {
                if dist[v as usize].is_none() {
                    dist[v as usize] = Some(du + 1);
                    queue.push_back(v as usize);
                }
            }
        }
        dist
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.n];
        let mut comps = Vec::new();
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            let mut comp = Vec::new();
            let mut queue = VecDeque::from([s]);
            seen[s] = true;
            while let Some(u) = queue.pop_front() {
                comp.push(u);
                for &v in &self.adj[u] {
                    if !seen[v as usize] {
                        seen[v as usize] = true;
                        queue.push_back(v as usize);
                    }
                }
            }
            comps.push(comp);
        }
        comps
    }
}

/// Builds one of the supported graph families.
pub fn build_graph(spec: &GraphSpec) -> Result<Graph> {
    match spec {
        GraphSpec::Cycle(n) => {
            if *n < 3 {
                return Err(Error::invalid(format!("cycle needs n >= 3, got {n}")));
            }
            let edges: Vec<(u32, u32)> = (0..*n)
                .map(|i| (i as u32, ((i + 1) % n) as u32))
                .collect();
            Ok(Graph::from_edges(*n, &edges, Some(format!("cycle{n}")))?
                .mark_vertex_transitive())
        }
        GraphSpec::Path(n) => {
            if *n < 1 {
                return Err(Error::invalid("path needs n >= 1"));
            }
            let edges: Vec<(u32, u32)> = (0..n.saturating_sub(1))
                .map(|i| (i as u32, (i + 1) as u32))
                .collect();
            Graph::from_edges(*n, &edges, Some(format!("path{n}")))
        }
        GraphSpec::Complete(n) => {
            if *n < 1 {
                return Err(Error::invalid("complete needs n >= 1"));
            }
            let mut edges = Vec::new();
            for u in 0..*n {
                for v in (u + 1)..*n {
                    edges.push((u as u32, v as u32));
                }
            }
            Ok(Graph::from_edges(*n, &edges, Some(format!("complete{n}")))?
                .mark_vertex_transitive())
        }
        GraphSpec::EdgeList { vertices, edges } => Graph::from_edges(*vertices, edges, None),
        GraphSpec::Named(name) => cage(*name),
    }
}

/// Expands an LCF code `[jumps]^reps` over a Hamiltonian cycle.
fn lcf(n: usize, jumps: &[i64], label: &str) -> Result<Graph> {
    let mut edges: Vec<(u32, u32)> = (0..n).map(|i| (i as u32, ((i + 1) % n) as u32)).collect();
    for i in 0..n {
        let j = jumps[i % jumps.len()];
        let t = (i as i64 + j).rem_euclid(n as i64) as u32;
        let (a, b) = if (i as u32) < t { (i as u32, t) } else { (t, i as u32) };
        if !edges.contains(&(a, b)) {
            edges.push((a, b));
        }
    }
    Graph::from_edges(n, &edges, Some(label.to_string()))
}

/// The named cage graphs, as standard embedded edge lists.
pub fn cage(name: CageName) -> Result<Graph> {
    let g = match name {
        // Kneser(5,2) in the usual outer-cycle / inner-pentagram layout.
        CageName::Petersen => Graph::from_edges(
            10,
            &[
                (0, 1),
                (1, 2),
                (2, 3),
                (3, 4),
                (4, 0),
                (0, 5),
                (1, 6),
                (2, 7),
                (3, 8),
                (4, 9),
                (5, 7),
                (7, 9),
                (9, 6),
                (6, 8),
                (8, 5),
            ],
            Some("petersen".to_string()),
        )?,
        CageName::Heawood => lcf(14, &[5, -5], "heawood")?,
        CageName::McGee => lcf(24, &[12, 7, -7], "mcgee")?,
        CageName::TutteCoxeter => lcf(30, &[-13, -9, 7, -7, 9, 13], "tutte-coxeter")?,
    };
    Ok(g.mark_vertex_transitive())
}

/// Exact girth: for each edge, remove it and BFS between its endpoints;
/// the shortest cycle through that edge has length d+1.
pub fn girth(g: &Graph) -> Girth {
    let n = g.vertex_count();
    let mut best: Option<u32> = None;
    for u in 0..n {
        for &v in g.neighbors(u) {
            let v = v as usize;
            if v < u {
                continue;
            }
            // BFS from u to v avoiding the edge (u, v).
            let mut dist = vec![None; n];
            dist[u] = Some(0u32);
            let mut queue = VecDeque::from([u]);
            'bfs: while let Some(a) = queue.pop_front() {
                let da = dist[a].unwrap();
                if let Some(b) = best {
                    if da + 1 >= b {
                        break 'bfs; // cannot improve
                    }
                }
                for &bv in g.neighbors(a) {
                    let b = bv as usize;
                    if a == u && b == v {
                        continue;
                    }
                    if dist[b].is_none() {
                        dist[b] = Some(da + 1);
                        if b == v {
                            break 'bfs;
                        }
                        queue.push_back(b);
                    }
                }
            }
            if let Some(d) = dist[v] {
                let cand = d + 1;
                if best.map_or(true, |b| cand < b) {
                    best = Some(cand);
                }
            }
        }
    }
    match best {
        Some(b) => Girth::Finite(b),
        None => Girth::Infinite,
    }
}
