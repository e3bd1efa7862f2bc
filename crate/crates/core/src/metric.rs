//! Shortest-path metrics and the coarse disjoint union.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{girth, Girth, Graph};

/// A finite metric space given by a full integer distance matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MetricSpace {
    n: usize,
    dist: Vec<u32>, // row-major n*n
}

impl MetricSpace {
    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn dist(&self, a: usize, b: usize) -> u32 {
        self.dist[a * self.n + b]
    }

    pub fn diameter(&self) -> u32 {
        self.dist.iter().copied().max().unwrap_or(0)
    }

    /// Checks the metric axioms on all triples. Quadratic/cubic, intended
    /// for desk-scale verification.
    pub fn verify_axioms(&self) -> Result<()> {
        for a in 0..self.n {
            for b in 0..self.n {
                let d = self.dist(a, b);
                if (d == 0) != (a == b) {
                    return Err(Error::invalid(format!("d({a},{b})=0 iff a=b violated")));
                }
                if d != self.dist(b, a) {
                    return Err(Error::invalid(format!("asymmetry at ({a},{b})")));
                }
            }
        }
        for a in 0..self.n {
            for b in 0..self.n {
                for c in 0..self.n {
                    if self.dist(a, c) > self.dist(a, b) + self.dist(b, c) {
                        return Err(Error::invalid(format!(
                            "triangle inequality fails at ({a},{b},{c})"
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// All-pairs BFS metric of a connected graph.
pub fn bfs_metric(g: &Graph) -> Result<MetricSpace> {
    let n = g.vertex_count();
    let mut dist = vec![0u32; n * n];
    for s in 0..n {
        let row = g.bfs(s);
        for (t, d) in row.iter().enumerate() {
            match d {
                Some(d) => dist[s * n + t] = *d,
                None => {
                    return Err(Error::invalid(format!(
                        "graph is disconnected: vertex {t} unreachable from {s}"
                    )))
                }
            }
        }
    }
    Ok(MetricSpace { n, dist })
}

/// A point of a coarse union: block index plus vertex index within it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PointId {
    pub block: u32,
    pub vertex: u32,
}

impl PointId {
    pub fn new(block: usize, vertex: usize) -> PointId {
        PointId {
            block: block as u32,
            vertex: vertex as u32,
        }
    }
}

impl std::fmt::Display for PointId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}", self.block, self.vertex)
    }
}

/// Coarse disjoint union of a sequence of connected finite graphs.
///
/// Intra-block distances are BFS distances; the distance between distinct
/// blocks i and j is `max(diam(X_i), diam(X_j)) + 1`.
#[derive(Debug, Clone)]
pub struct CoarseUnion {
    blocks: Vec<Graph>,
    metrics: Vec<MetricSpace>,
    diameters: Vec<u32>,
    girths: Vec<Girth>,
}

impl CoarseUnion {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, i: usize) -> &Graph {
        &self.blocks[i]
    }

    pub fn blocks(&self) -> &[Graph] {
        &self.blocks
    }

    pub fn block_metric(&self, i: usize) -> &MetricSpace {
        &self.metrics[i]
    }

    pub fn block_diameter(&self, i: usize) -> u32 {
        self.diameters[i]
    }

    pub fn block_girth(&self, i: usize) -> Girth {
        self.girths[i]
    }

    pub fn point_count(&self) -> usize {
        self.blocks.iter().map(|b| b.vertex_count()).sum()
    }

    pub fn points(&self) -> impl Iterator<Item = PointId> + '_ {
        self.blocks.iter().enumerate().flat_map(|(b, g)| {
            (0..g.vertex_count()).map(move |v| PointId::new(b, v))
        })
    }

    pub fn contains(&self, p: PointId) -> bool {
        (p.block as usize) < self.blocks.len()
            && (p.vertex as usize) < self.blocks[p.block as usize].vertex_count()
    }

    pub fn dist(&self, a: PointId, b: PointId) -> u32 {
        if a.block == b.block {
            self.metrics[a.block as usize].dist(a.vertex as usize, b.vertex as usize)
        } else {
            self.diameters[a.block as usize].max(self.diameters[b.block as usize]) + 1
        }
    }
}

/// Builds the coarse disjoint union, caching per-block metrics, diameters
/// and girths.
pub fn coarse_disjoint_union(blocks: Vec<Graph>) -> Result<CoarseUnion> {
    if blocks.is_empty() {
        return Err(Error::invalid("coarse union needs at least one block"));
    }
    let mut metrics = Vec::with_capacity(blocks.len());
    let mut diameters = Vec::with_capacity(blocks.len());
    let mut girths = Vec::with_capacity(blocks.len());
    for (i, g) in blocks.iter().enumerate() {
        if g.vertex_count() == 0 {
            return Err(Error::invalid(format!("block {i} is empty")));
        }
        let m = bfs_metric(g)
            .map_err(|e| Error::invalid(format!("block {i}: {e}")))?;
        diameters.push(m.diameter());
        girths.push(girth(g));
        metrics.push(m);
    }
    Ok(CoarseUnion {
        blocks,
        metrics,
        diameters,
        girths,
    })
}

/// Wraps a single graph as a one-block coarse union.
pub fn single_block(g: Graph) -> Result<CoarseUnion> {
    coarse_disjoint_union(vec![g])
}

/// A finite subset of a coarse union with its diameter precomputed.
#[derive(Debug, Clone)]
pub struct SubsetView<'a> {
    ambient: &'a CoarseUnion,
    members: Vec<PointId>,
    diameter: u32,
}

impl<'a> SubsetView<'a> {
    pub fn new(ambient: &'a CoarseUnion, mut members: Vec<PointId>) -> Result<SubsetView<'a>> {
        members.sort_unstable();
        let before = members.len();
        members.dedup();
        if members.len() != before {
            return Err(Error::invalid("subset members must be distinct"));
        }
        for &p in &members {
            if !ambient.contains(p) {
                return Err(Error::invalid(format!("point {p} outside the ambient space")));
            }
        }
        let mut diameter = 0;
        for (i, &a) in members.iter().enumerate() {
            for &b in &members[i + 1..] {
                diameter = diameter.max(ambient.dist(a, b));
            }
        }
        Ok(SubsetView {
            ambient,
            members,
            diameter,
        })
    }

    pub fn ambient(&self) -> &'a CoarseUnion {
        self.ambient
    }

    pub fn members(&self) -> &[PointId] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn diameter(&self) -> u32 {
        self.diameter
    }

    pub fn contains(&self, p: PointId) -> bool {
        self.members.binary_search(&p).is_ok()
    }
}

/// Closed ball of the given radius around `center`, as a subset view.
pub fn ball<'a>(space: &'a CoarseUnion, center: PointId, radius: u32) -> Result<SubsetView<'a>> {
    if !space.contains(center) {
        return Err(Error::invalid(format!("ball center {center} outside the space")));
    }
    let members: Vec<PointId> = space
        .points()
        .filter(|&p| space.dist(center, p) <= radius)
        .collect();
    SubsetView::new(space, members)
}

// --- JSON interchange -------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SpaceJson {
    pub blocks: Vec<BlockJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockJson {
    pub name: String,
    pub vertices: usize,
    /// Each edge listed once with u < v, 0-based.
    pub edges: Vec<(u32, u32)>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub vertex_transitive: bool,
}

impl CoarseUnion {
    pub fn to_json(&self) -> SpaceJson {
        SpaceJson {
            blocks: self
                .blocks
                .iter()
                .enumerate()
                .map(|(i, g)| BlockJson {
                    name: g
                        .label()
                        .map(str::to_string)
                        .unwrap_or_else(|| format!("block{i}")),
                    vertices: g.vertex_count(),
                    edges: g.edges(),
                    vertex_transitive: g.is_vertex_transitive(),
                })
                .collect(),
        }
    }

    pub fn from_json(json: &SpaceJson) -> Result<CoarseUnion> {
        let mut blocks = Vec::with_capacity(json.blocks.len());
        for b in &json.blocks {
            let mut g = Graph::from_edges(b.vertices, &b.edges, Some(b.name.clone()))?;
            if b.vertex_transitive {
                g = g.mark_vertex_transitive();
            }
            blocks.push(g);
        }
        coarse_disjoint_union(blocks)
    }

    /// DOT export, one subgraph per block.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph space {\n");
        for (i, g) in self.blocks.iter().enumerate() {
            out.push_str(&format!("  subgraph cluster_{i} {{\n"));
            let label = g
                .label()
                .map(str::to_string)
                .unwrap_or_else(|| format!("block{i}"));
            out.push_str(&format!("    label=\"{label}\";\n"));
            for v in 0..g.vertex_count() {
                out.push_str(&format!("    b{i}_{v};\n"));
            }
            for (u, v) in g.edges() {
                out.push_str(&format!("    b{i}_{u} -- b{i}_{v};\n"));
            }
            out.push_str("  }\n");
        }
        out.push_str("}\n");
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphSpec};

    fn cycles(ns: &[usize]) -> CoarseUnion {
        coarse_disjoint_union(
            ns.iter()
                .map(|&n| build_graph(&GraphSpec::Cycle(n)).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn bfs_metric_examples() {
        let c6 = bfs_metric(&build_graph(&GraphSpec::Cycle(6)).unwrap()).unwrap();
        assert_eq!(c6.dist(0, 3), 3);
        let p4 = bfs_metric(&build_graph(&GraphSpec::Path(4)).unwrap()).unwrap();
        assert_eq!(p4.dist(0, 3), 3);
        let pet = bfs_metric(&crate::graph::cage(crate::graph::CageName::Petersen).unwrap()).unwrap();
        assert_eq!(pet.diameter(), 2);
        pet.verify_axioms().unwrap();
    }

    #[test]
    fn union_metric_formula() {
        let u = cycles(&[4, 8]);
        // diam C4 = 2, diam C8 = 4 -> cross distance 5
        assert_eq!(u.dist(PointId::new(0, 0), PointId::new(1, 3)), 5);
        assert_eq!(u.dist(PointId::new(1, 0), PointId::new(1, 4)), 4);

        let u3 = cycles(&[4, 4, 8]);
        assert_eq!(u3.dist(PointId::new(0, 0), PointId::new(1, 0)), 3);
    }

    #[test]
    fn ball_examples() {
        let u = cycles(&[8]);
        let b = ball(&u, PointId::new(0, 0), 2).unwrap();
        let verts: Vec<u32> = b.members().iter().map(|p| p.vertex).collect();
        assert_eq!(verts, vec![0, 1, 2, 6, 7]);
        assert_eq!(b.diameter(), 4);

        let b0 = ball(&u, PointId::new(0, 0), 0).unwrap();
        assert_eq!(b0.members(), &[PointId::new(0, 0)]);
        assert_eq!(b0.diameter(), 0);

        let u2 = cycles(&[4, 8]);
        let b5 = ball(&u2, PointId::new(0, 1), 5).unwrap();
        assert_eq!(b5.len(), 12); // everything
    }

    #[test]
    fn ball_monotone_in_radius() {
        let u = cycles(&[4, 8]);
        for r in 0..6u32 {
            let small = ball(&u, PointId::new(1, 2), r).unwrap();
            let large = ball(&u, PointId::new(1, 2), r + 1).unwrap();
            assert!(small.members().iter().all(|p| large.contains(*p)));
        }
    }

    #[test]
    fn empty_union_rejected() {
        assert!(coarse_disjoint_union(vec![]).is_err());
    }

    #[test]
    fn json_roundtrip() {
        let u = cycles(&[4, 8]);
        let j = u.to_json();
        let s = serde_json::to_string(&j).unwrap();
        let back: SpaceJson = serde_json::from_str(&s).unwrap();
        let u2 = CoarseUnion::from_json(&back).unwrap();
        assert_eq!(u2.block_count(), 2);
        assert_eq!(u2.dist(PointId::new(0, 0), PointId::new(1, 0)), 5);
        assert!(u2.block(0).is_vertex_transitive());
    }
}
