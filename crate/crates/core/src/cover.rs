//! Truncated universal covers as non-backtracking path trees, the
//! segment-toward-an-end witness family on them, and deck transformations
//! realized as reduced based closed walks.

use crate::error::{Error, Result};
use crate::graph::{Graph, Girth};
use crate::lp::{rat, Mode};
use crate::metric::PointId;
use crate::witness::WitnessFamily;

/// Truncated universal cover of a graph: vertices are the non-backtracking
/// edge-paths from the base vertex, up to length rho.
#[derive(Debug, Clone)]
pub struct TreeLift {
    base_graph: Graph,
    base: usize,
    rho: u32,
    parent: Vec<Option<usize>>,
    depth: Vec<u32>,
    proj: Vec<usize>,
    children: Vec<Vec<usize>>,
    /// The distinguished end: the base ray, root first. It extends by the
    /// lowest-index neighbor distinct from the predecessor.
    ray: Vec<usize>,
    ray_pos: Vec<Option<u32>>,
}

const COVER_SIZE_BOUND: usize = 5_000_000;

pub fn tree_lift(g: &Graph, base: usize, rho: u32) -> Result<TreeLift> {
    if g.min_degree() < 2 {
        return Err(Error::invalid(
            "universal-cover witnesses need every vertex of degree at least 2 \
             (a leaf would give the cover a leaf as well)",
        ));
    }
    if rho < 1 {
        return Err(Error::invalid("truncation radius must be at least 1"));
    }
    if base >= g.vertex_count() {
        return Err(Error::invalid("base vertex out of range"));
    }
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut depth: Vec<u32> = vec![0];
    let mut proj: Vec<usize> = vec![base];
    let mut children: Vec<Vec<usize>> = vec![Vec::new()];
    let mut frontier = vec![0usize];
    for d in 1..=rho {
        let mut next = Vec::new();
        for &v in &frontier {
            let pred = parent[v].map(|p| proj[p]);
            for &nb in g.neighbors(proj[v]) {
                if Some(nb as usize) == pred {
                    continue;
                }
                let id = proj.len();
                if id >= COVER_SIZE_BOUND {
                    return Err(Error::size_bound(format!(
                        "truncated cover exceeds {COVER_SIZE_BOUND} vertices at depth {d}"
                    )));
                }
                parent.push(Some(v));
                depth.push(d);
                proj.push(nb as usize);
                children.push(Vec::new());
                children[v].push(id);
                next.push(id);
            }
        }
        frontier = next;
    }
    // distinguished end: lowest-index-neighbor ray from the base
    let mut ray = vec![0usize];
    loop {
        let v = *ray.last().unwrap();
        let Some(&next) = children[v].iter().min_by_key(|&&c| proj[c]) else {
            break;
        };
        ray.push(next);
    }
    let mut ray_pos = vec![None; proj.len()];
    for (i, &v) in ray.iter().enumerate() {
        ray_pos[v] = Some(i as u32);
    }
    Ok(TreeLift {
        base_graph: g.clone(),
        base,
        rho,
        parent,
        depth,
        proj,
        children,
        ray,
        ray_pos,
    })
}

impl TreeLift {
    pub fn base_graph(&self) -> &Graph {
        &self.base_graph
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn rho(&self) -> u32 {
        self.rho
    }

    pub fn vertex_count(&self) -> usize {
        self.proj.len()
    }

    pub fn proj(&self, v: usize) -> usize {
        self.proj[v]
    }

    pub fn depth(&self, v: usize) -> u32 {
        self.depth[v]
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        self.parent[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// Tree distance between two cover vertices.
    pub fn dist(&self, a: usize, b: usize) -> u32 {
        let (mut x, mut y) = (a, b);
        let mut steps = 0;
        while self.depth[x] > self.depth[y] {
            x = self.parent[x].unwrap();
            steps += 1;
        }
        while self.depth[y] > self.depth[x] {
            y = self.parent[y].unwrap();
            steps += 1;
        }
        while x != y {
            x = self.parent[x].unwrap();
            y = self.parent[y].unwrap();
            steps += 2;
        }
        steps
    }

    /// Projections along the path from the root to v, root first.
    pub fn path_of(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.depth[v] as usize + 1);
        let mut x = v;
        loop {
            out.push(self.proj[x]);
            match self.parent[x] {
                Some(p) => x = p,
                None => break,
            }
        }
        out.reverse();
        out
    }

    /// Cover vertex reached by following a vertex sequence from the base.
    pub fn vertex_at_path(&self, verts: &[usize]) -> Option<usize> {
        if verts.first() != Some(&self.base) {
            return None;
        }
        let mut v = 0usize;
        for &w in &verts[1..] {
            v = *self.children[v].iter().find(|&&c| self.proj[c] == w)?;
        }
        Some(v)
    }

    /// Unique cover neighbor of v projecting to `to`, if any. Parent and
    /// children project to pairwise distinct base vertices, so this is
    /// well defined.
    pub fn step(&self, v: usize, to: usize) -> Option<usize> {
        if let Some(p) = self.parent[v] {
            if self.proj[p] == to {
                return Some(p);
            }
        }
        self.children[v].iter().copied().find(|&c| self.proj[c] == to)
    }

    /// Follows a base-graph vertex path (path[0] must be the projection of
    /// `start`) and returns the endpoint's lift.
    pub fn lift_path_from(&self, start: usize, path: &[usize]) -> Option<usize> {
        if path.first() != Some(&self.proj[start]) {
            return None;
        }
        let mut v = start;
        for &w in &path[1..] {
            v = self.step(v, w)?;
        }
        Some(v)
    }

    /// The cover as a plain graph (its tree edges), for embedding witness
    /// families into a metric space.
    pub fn as_graph(&self) -> Result<Graph> {
        let mut edges = Vec::with_capacity(self.vertex_count().saturating_sub(1));
        for v in 1..self.vertex_count() {
            let p = self.parent[v].unwrap();
            edges.push((p as u32, v as u32));
        }
        let label = self
            .base_graph
            .label()
            .map(|l| format!("cover_{l}"))
            .unwrap_or_else(|| "cover".to_string());
        Graph::from_edges(self.vertex_count(), &edges, Some(label))
    }

    /// The first n vertices of the geodesic from x toward the distinguished
    /// end: ascend to the base ray, then follow it outward.
    pub fn ray_from(&self, x: usize, n: usize) -> Result<Vec<usize>> {
        let mut seg = Vec::with_capacity(n);
        let mut v = x;
        while seg.len() < n {
            seg.push(v);
            if seg.len() == n {
                break;
            }
            match self.ray_pos[v] {
                Some(pos) => {
                    let next = self
                        .ray
                        .get(pos as usize + 1)
                        .copied()
                        .ok_or_else(|| {
                            Error::invalid(format!(
                                "segment from vertex {x} escapes the truncation; \
                                 increase the radius beyond {}",
                                self.rho
                            ))
                        })?;
                    v = next;
                }
                None => v = self.parent[v].expect("off-ray vertices have parents"),
            }
        }
        Ok(seg)
    }
}

/// Uniform segment-toward-the-end family: f_x puts mass 1/n on the first n
/// vertices of the ray from x. Members are the cover vertices of depth at
/// most rho-(n-1), which keeps every segment inside the truncation.
pub fn tree_ray_witness(t: &TreeLift, n: u32) -> Result<WitnessFamily> {
    if n < 1 {
        return Err(Error::invalid("segment length must be at least 1"));
    }
    if t.rho < n - 1 {
        return Err(Error::invalid(format!(
            "segments of length {n} escape a truncation of radius {}; increase it",
            t.rho
        )));
    }
    let max_depth = t.rho - (n - 1);
    let mut members = Vec::new();
    let mut measures = Vec::new();
    for v in 0..t.vertex_count() {
        if t.depth[v] > max_depth {
            continue;
        }
        let seg = t.ray_from(v, n as usize)?;
        members.push(PointId::new(0, v));
        measures.push(
            seg.into_iter()
                .map(|w| (PointId::new(0, w), rat(1, n as i64)))
                .collect(),
        );
    }
    Ok(WitnessFamily {
        r: 1,
        s: n - 1,
        mode: Mode::Exact,
        members,
        measures,
    })
}

// --- deck elements ----------------------------------------------------

/// A deck transformation of the truncated cover, represented by the reduced
/// closed walk at the base that it corresponds to (its action on the root).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DeckElement {
    /// Vertex sequence of the walk, base first and last; empty walk = [base].
    pub word: Vec<usize>,
}

/// Cancels immediate backtracks in a vertex sequence.
pub fn reduce_path(seq: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(seq.len());
    for &v in seq {
        if out.len() >= 2 && out[out.len() - 2] == v {
            out.pop();
        } else {
            out.push(v);
        }
    }
    out
}

impl DeckElement {
    pub fn identity(base: usize) -> DeckElement {
        DeckElement { word: vec![base] }
    }

    pub fn is_identity(&self) -> bool {
        self.word.len() == 1
    }

    /// Translation length of the representing walk.
    pub fn len(&self) -> usize {
        self.word.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.is_identity()
    }

    pub fn inverse(&self) -> DeckElement {
        let mut word = self.word.clone();
        word.reverse();
        DeckElement { word }
    }

    /// Group law: self then other, i.e. the walk of `other` appended to the
    /// walk of `self` and reduced. With the left action on paths below,
    /// (a.compose(b)).apply = a.apply ∘ b.apply.
    pub fn compose(&self, other: &DeckElement) -> DeckElement {
        let mut seq = self.word.clone();
        seq.extend_from_slice(&other.word[1..]);
        DeckElement {
            word: reduce_path(&seq),
        }
    }

    /// Action on a cover vertex: prepend the walk to the vertex's path and
    /// reduce. None when the image leaves the truncation.
    pub fn apply(&self, t: &TreeLift, v: usize) -> Option<usize> {
        let mut seq = self.word.clone();
        seq.extend_from_slice(&t.path_of(v)[1..]);
        let reduced = reduce_path(&seq);
        if reduced.len() - 1 > t.rho as usize {
            return None;
        }
        t.vertex_at_path(&reduced)
    }
}

/// The unique deck element sending lift1 to lift2 (both over the same base
/// point): the walk of lift2 followed by the reversed walk of lift1.
pub fn deck_align(t: &TreeLift, lift1: usize, lift2: usize) -> Result<DeckElement> {
    if t.proj[lift1] != t.proj[lift2] {
        return Err(Error::invalid(
            "deck alignment needs two lifts of the same base point",
        ));
    }
    let p1 = t.path_of(lift1);
    let p2 = t.path_of(lift2);
    let mut seq = p2;
    seq.extend(p1.iter().rev().skip(1));
    let g = DeckElement {
        word: reduce_path(&seq),
    };
    debug_assert_eq!(g.apply(t, lift1), Some(lift2));
    Ok(g)
}

/// All deck elements whose reduced based walk has length at most `bound`,
/// enumerated by non-backtracking DFS. Sorted, identity first.
pub fn deck_elements(g: &Graph, base: usize, bound: u32) -> Result<Vec<DeckElement>> {
    if matches!(crate::graph::girth(g), Girth::Infinite) {
        return Ok(vec![DeckElement::identity(base)]);
    }
    let mut out = vec![DeckElement::identity(base)];
    let mut walk = vec![base];
    fn rec(g: &Graph, base: usize, bound: u32, walk: &mut Vec<usize>, out: &mut Vec<DeckElement>) {
        if walk.len() as u32 > bound {
            return;
        }
        let cur = *walk.last().unwrap();
        let pred = if walk.len() >= 2 {
            Some(walk[walk.len() - 2])
        } else {
            None
        };
        for &nb in g.neighbors(cur) {
            let nb = nb as usize;
            if Some(nb) == pred {
                continue;
            }
            walk.push(nb);
            if nb == base {
                out.push(DeckElement { word: walk.clone() });
            }
            rec(g, base, bound, walk, out);
            walk.pop();
        }
    }
    rec(g, base, bound, &mut walk, &mut out);
    out.sort();
    out.dedup();
    // identity first, then by length
    out.sort_by_key(|d| (d.len(), d.word.clone()));
    Ok(out)
}
