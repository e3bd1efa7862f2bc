//! Fibred witness data over a coarse union: per-point vectors indexed by a
//! truncated deck-element set, local trivializations over admissible balls,
//! the five-condition checker, and the coordinate extraction back to an
//! ordinary witness family.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Signed, Zero};

use crate::cover::{deck_align, deck_elements, tree_lift, DeckElement, TreeLift};
use crate::error::{Error, Result};
use crate::graph::Girth;
use crate::lp::{rat, Mode, Rat};
use crate::metric::{CoarseUnion, PointId, SubsetView};
use crate::witness::WitnessFamily;

/// Sparse nonnegative vector over block vertices.
pub type SparseMeasure = Vec<(usize, Rat)>;

/// An ell-infinity-valued measure: one sparse vector over points per fiber
/// index, each summing to 1.
#[derive(Debug, Clone)]
pub struct EllInftyMeasure {
    pub per_index: Vec<SparseMeasure>,
}

impl EllInftyMeasure {
    /// Per-coordinate normalization check.
    pub fn is_normalized(&self) -> bool {
        self.per_index.iter().all(|v| {
            let total: Rat = v.iter().map(|(_, m)| m.clone()).sum();
            total.is_one() && v.iter().all(|(_, m)| !m.is_negative())
        })
    }
}

/// Max over fiber indices of the l^1 mass of the given (difference)
/// vectors: sup_i sum_y |a_y(i)|.
pub fn uniform_norm(per_index: &[SparseMeasure]) -> Rat {
    per_index
        .iter()
        .map(|v| v.iter().map(|(_, m)| m.abs()).sum())
        .max()
        .unwrap_or_else(Rat::zero)
}

/// a - b as a sparse vector.
pub fn sub_sparse(a: &SparseMeasure, b: &SparseMeasure) -> SparseMeasure {
    let mut all: BTreeMap<usize, Rat> = BTreeMap::new();
    for (y, v) in a {
        *all.entry(*y).or_insert_with(Rat::zero) += v.clone();
    }
    for (y, v) in b {
        *all.entry(*y).or_insert_with(Rat::zero) -= v.clone();
    }
    all.into_iter().filter(|(_, v)| !v.is_zero()).collect()
}

/// Per-block fibred data: truncated cover, truncated deck set, canonical
/// lifts, and the materialized vectors xi.
#[derive(Debug, Clone)]
pub struct BlockFibre {
    pub cover: TreeLift,
    pub girth: Option<u32>,
    pub decks: Vec<DeckElement>,
    pub deck_index: HashMap<DeckElement, usize>,
    pub canonical_lift: Vec<usize>,
    /// xi[x][gi]: the measure z -> xi^x_z(g), or None when index gi moves
    /// the canonical lift outside the truncation.
    pub xi: Vec<Vec<Option<SparseMeasure>>>,
}

/// Trivialization of one admissible ball: a consistent lift of its members
/// and the per-member deck elements aligning canonical lifts to it.
#[derive(Debug, Clone)]
pub struct SubsetTrivialization {
    pub center: usize,
    pub members: Vec<usize>,
    pub lifts: Vec<usize>,
    pub deltas: Vec<DeckElement>,
}

/// Key: (L, block, center).
pub type TrivKey = (u32, usize, usize);
/// Key: (L, block, center1, center2) with center1 < center2.
pub type CocycleKey = (u32, usize, usize, usize);

#[derive(Debug, Clone)]
pub struct FibredWitnessData {
    pub family: CoarseUnion,
    pub r: u32,
    pub eps: Rat,
    pub n: u32,
    pub s: u32,
    pub l_max: u32,
    /// One entry per block; None when the block is excluded at every
    /// scale up to l_max.
    pub blocks: Vec<Option<BlockFibre>>,
    pub trivializations: BTreeMap<TrivKey, SubsetTrivialization>,
    /// The constant index translation between two overlapping admissible
    /// balls, keyed by their centers.
    pub cocycles: BTreeMap<CocycleKey, DeckElement>,
}

impl FibredWitnessData {
    /// Blocks excluded at scale l: girth at most 2(l+S).
    pub fn in_k_l(&self, block: usize, l: u32) -> bool {
        match self.family.block_girth(block) {
            Girth::Finite(g) => g <= 2 * (l + self.s),
            Girth::Infinite => false,
        }
    }

    pub fn k_l(&self, l: u32) -> Vec<usize> {
        (0..self.family.block_count())
            .filter(|&b| self.in_k_l(b, l))
            .collect()
    }
}

fn bfs_parents(g: &crate::graph::Graph, src: usize) -> Vec<Option<usize>> {
    let mut parent = vec![None; g.vertex_count()];
    let mut seen = vec![false; g.vertex_count()];
    seen[src] = true;
    let mut queue = std::collections::VecDeque::from([src]);
    while let Some(v) = queue.pop_front() {
        for &nb in g.neighbors(v) {
            let nb = nb as usize;
            if !seen[nb] {
                seen[nb] = true;
                parent[nb] = Some(v);
                queue.push_back(nb);
            }
        }
    }
    parent
}

fn bfs_path(parent: &[Option<usize>], src: usize, v: usize) -> Vec<usize> {
    let mut path = vec![v];
    let mut x = v;
    while x != src {
        x = parent[x].expect("connected block");
        path.push(x);
    }
    path.reverse();
    path
}

/// Measure of the length-n end segment from cover vertex w, pushed down
/// through the projection. None when the segment escapes the truncation.
fn segment_measure(cover: &TreeLift, w: usize, n: u32) -> Option<SparseMeasure> {
    let seg = cover.ray_from(w, n as usize).ok()?;
    let mut acc: BTreeMap<usize, Rat> = BTreeMap::new();
    for v in seg {
        *acc.entry(cover.proj(v)).or_insert_with(Rat::zero) += rat(1, n as i64);
    }
    Some(acc.into_iter().collect())
}

pub const DEFAULT_L_MAX: u32 = 4;

pub fn assemble_fibred(family: &CoarseUnion, r: u32, eps: &Rat) -> Result<FibredWitnessData> {
    assemble_fibred_with(family, r, eps, DEFAULT_L_MAX)
}

pub fn assemble_fibred_with(
    family: &CoarseUnion,
    r: u32,
    eps: &Rat,
    l_max: u32,
) -> Result<FibredWitnessData> {
    if !eps.is_positive() {
        return Err(Error::invalid("variation bound must be positive"));
    }
    for b in 0..family.block_count() {
        if family.block(b).min_degree() < 2 {
            return Err(Error::invalid(format!(
                "block {b} has a vertex of degree < 2; the cover construction needs \
                 minimum degree at least 2"
            )));
        }
    }
    // blocks must come with non-decreasing girth so that each K_L is an
    // initial segment (a finite union of blocks)
    let girth_key = |b: usize| match family.block_girth(b) {
        Girth::Finite(g) => g as u64,
        Girth::Infinite => u64::MAX,
    };
    for b in 1..family.block_count() {
        if girth_key(b) < girth_key(b - 1) {
            return Err(Error::invalid(format!(
                "blocks must be ordered with non-decreasing girth (block {b} breaks it)"
            )));
        }
    }
    // segment length from the tree bound: variation <= 2R/n <= eps
    let two_r = rat(2 * r as i64, 1);
    let quotient = &two_r / eps;
    let n = quotient.ceil().to_integer().max(1.into());
    let n: u32 = n
        .try_into()
        .map_err(|_| Error::size_bound("segment length overflows u32".to_string()))?;
    let s = n - 1;

    let mut blocks: Vec<Option<BlockFibre>> = Vec::with_capacity(family.block_count());
    for b in 0..family.block_count() {
        // a block outside K_l for some l <= l_max needs data
        let admissible_somewhere = match family.block_girth(b) {
            Girth::Finite(g) => g > 2 * (1 + s),
            Girth::Infinite => true,
        };
        if !admissible_somewhere {
            blocks.push(None);
            continue;
        }
        let g = family.block(b);
        let girth = family.block_girth(b).as_finite();
        let deck_bound = girth.map(|g| 2 * (l_max + s) + g).unwrap_or(0);
        let diam = family.block_diameter(b);
        let rho = deck_bound + diam + l_max + n;
        let cover = tree_lift(g, 0, rho)?;
        let decks = deck_elements(g, 0, deck_bound)?;
        let deck_index: HashMap<DeckElement, usize> = decks
            .iter()
            .enumerate()
            .map(|(i, d)| (d.clone(), i))
            .collect();
        let parent = bfs_parents(g, 0);
        let canonical_lift: Vec<usize> = (0..g.vertex_count())
            .map(|x| {
                cover
                    .vertex_at_path(&bfs_path(&parent, 0, x))
                    .expect("geodesics from the base stay inside the truncation")
            })
            .collect();
        let xi: Vec<Vec<Option<SparseMeasure>>> = (0..g.vertex_count())
            .map(|x| {
                decks
                    .iter()
                    .map(|d| {
                        let w = d.apply(&cover, canonical_lift[x])?;
                        segment_measure(&cover, w, n)
                    })
                    .collect()
            })
            .collect();
        blocks.push(Some(BlockFibre {
            cover,
            girth,
            decks,
            deck_index,
            canonical_lift,
            xi,
        }));
    }

    let mut data = FibredWitnessData {
        family: family.clone(),
        r,
        eps: eps.clone(),
        n,
        s,
        l_max,
        blocks,
        trivializations: BTreeMap::new(),
        cocycles: BTreeMap::new(),
    };

    // trivializations for every admissible ball B(center, l), l <= l_max
    for b in 0..family.block_count() {
        let Some(fib) = &data.blocks[b] else { continue };
        let metric = family.block_metric(b);
        let nv = family.block(b).vertex_count();
        let parent_of: Vec<Vec<Option<usize>>> =
            (0..nv).map(|c| bfs_parents(family.block(b), c)).collect();
        for l in 1..=l_max {
            if data.in_k_l(b, l) {
                continue;
            }
            for center in 0..nv {
                let members: Vec<usize> =
                    (0..nv).filter(|&x| metric.dist(center, x) <= l).collect();
                let base_lift = fib.canonical_lift[center];
                let mut lifts = Vec::with_capacity(members.len());
                let mut deltas = Vec::with_capacity(members.len());
                for &x in &members {
                    let path = bfs_path(&parent_of[center], center, x);
                    let lift = fib.cover.lift_path_from(base_lift, &path).ok_or_else(|| {
                        Error::invalid("ball lift escaped the truncation; internal radius too small")
                    })?;
                    deltas.push(deck_align(&fib.cover, fib.canonical_lift[x], lift)?);
                    lifts.push(lift);
                }
                data.trivializations.insert(
                    (l, b, center),
                    SubsetTrivialization {
                        center,
                        members,
                        lifts,
                        deltas,
                    },
                );
            }
            // cocycles for overlapping balls at the same scale
            for c1 in 0..nv {
                for c2 in c1 + 1..nv {
                    if metric.dist(c1, c2) > 2 * l {
                        continue;
                    }
                    let t1 = &data.trivializations[&(l, b, c1)];
                    let t2 = &data.trivializations[&(l, b, c2)];
                    // translation between the two lifts at any common point
                    let common = t1
                        .members
                        .iter()
                        .position(|x| t2.members.contains(x));
                    let Some(i1) = common else { continue };
                    let x = t1.members[i1];
                    let i2 = t2.members.iter().position(|&y| y == x).unwrap();
                    let co = deck_align(&fib.cover, t1.lifts[i1], t2.lifts[i2])?;
                    data.cocycles.insert((l, b, c1, c2), co);
                }
            }
        }
    }
    Ok(data)
}

// --- checker ----------------------------------------------------------

#[derive(Debug, Clone)]
pub enum FibredViolation {
    /// Condition (1): support escapes B(x, S).
    Support { block: usize, x: usize, z: usize, dist: u32 },
    /// Condition (2): some fiber index is not a probability measure.
    Normalization { block: usize, x: usize, index: usize, total: Rat },
    /// Condition (3): the trivialization fails to act as an index
    /// permutation consistent with the lifted data.
    Permutation { block: usize, center: usize, x: usize, detail: String },
    /// Condition (4): uniform-norm variation above eps on an R-close pair.
    Variation { block: usize, center: usize, x: usize, y: usize, norm: Rat },
    /// Condition (5): the overlap translation depends on the point or
    /// disagrees with the stored cocycle.
    Cocycle { block: usize, c1: usize, c2: usize, x: usize, detail: String },
}

impl std::fmt::Display for FibredViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FibredViolation::Support { block, x, z, dist } => write!(
                f,
                "support: block {block}, point {x} charges {z} at distance {dist}"
            ),
            FibredViolation::Normalization { block, x, index, total } => write!(
                f,
                "normalization: block {block}, point {x}, fiber index {index} sums to {total}"
            ),
            FibredViolation::Permutation { block, center, x, detail } => write!(
                f,
                "permutation: block {block}, ball at {center}, point {x}: {detail}"
            ),
            FibredViolation::Variation { block, center, x, y, norm } => write!(
                f,
                "variation: block {block}, ball at {center}, pair ({x},{y}) has norm {norm}"
            ),
            FibredViolation::Cocycle { block, c1, c2, x, detail } => write!(
                f,
                "cocycle: block {block}, balls at {c1} and {c2}, point {x}: {detail}"
            ),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct FibredReport {
    pub violations: Vec<FibredViolation>,
    pub subsets_checked: usize,
    pub overlap_pairs_checked: usize,
    pub indices_checked: usize,
}

impl FibredReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

/// The translated vector t_C(x) xi^x at fiber index g: xi^x(g compose
/// delta_x), read from the materialized data. None when the translated
/// index leaves the truncation.
fn translated_xi<'a>(
    fib: &'a BlockFibre,
    x: usize,
    g: &DeckElement,
    delta: &DeckElement,
) -> Option<&'a SparseMeasure> {
    let shifted = g.compose(delta);
    let gi = *fib.deck_index.get(&shifted)?;
    fib.xi[x][gi].as_ref()
}

/// Verifies conditions (1)-(5) over every admissible ball of radius l.
pub fn check_fibred(data: &FibredWitnessData, l: u32) -> Result<FibredReport> {
    if l < 1 || l > data.l_max {
        return Err(Error::invalid(format!(
            "scale {l} outside the assembled range 1..={}",
            data.l_max
        )));
    }
    let mut rep = FibredReport::default();
    let family = &data.family;
    for b in 0..family.block_count() {
        if data.in_k_l(b, l) {
            continue;
        }
        let fib = data.blocks[b]
            .as_ref()
            .ok_or_else(|| Error::invalid(format!("admissible block {b} has no fibred data")))?;
        let metric = family.block_metric(b);
        let nv = family.block(b).vertex_count();
        for center in 0..nv {
            let triv = data
                .trivializations
                .get(&(l, b, center))
                .ok_or_else(|| Error::invalid(format!("missing trivialization for ({l},{b},{center})")))?;
            rep.subsets_checked += 1;
            for (mi, &x) in triv.members.iter().enumerate() {
                // conditions (1) and (2) on the raw vectors
                for (gi, xi) in fib.xi[x].iter().enumerate() {
                    let Some(xi) = xi else { continue };
                    let total: Rat = xi.iter().map(|(_, v)| v.clone()).sum();
                    if !total.is_one() || xi.iter().any(|(_, v)| v.is_negative()) {
                        rep.violations.push(FibredViolation::Normalization {
                            block: b,
                            x,
                            index: gi,
                            total,
                        });
                    }
                    for (z, v) in xi {
                        if !v.is_zero() {
                            let d = metric.dist(x, *z);
                            if d > data.s {
                                rep.violations.push(FibredViolation::Support {
                                    block: b,
                                    x,
                                    z: *z,
                                    dist: d,
                                });
                            }
                        }
                    }
                }
                // condition (3): the trivialization is a genuine index
                // permutation: delta is a deck element carrying the
                // canonical lift to the ball's lift (so it commutes with
                // the projection), and right translation by it is injective
                // on the truncated index set
                let delta = &triv.deltas[mi];
                if delta.apply(&fib.cover, fib.canonical_lift[x]) != Some(triv.lifts[mi]) {
                    rep.violations.push(FibredViolation::Permutation {
                        block: b,
                        center,
                        x,
                        detail: "stored translation does not align the lifts".to_string(),
                    });
                }
                if fib.cover.proj(triv.lifts[mi]) != x {
                    rep.violations.push(FibredViolation::Permutation {
                        block: b,
                        center,
                        x,
                        detail: "ball lift projects to the wrong point".to_string(),
                    });
                }
                let mut seen: HashMap<usize, usize> = HashMap::new();
                for (gi, g) in fib.decks.iter().enumerate() {
                    let shifted = g.compose(delta);
                    if let Some(&ti) = fib.deck_index.get(&shifted) {
                        if let Some(prev) = seen.insert(ti, gi) {
                            rep.violations.push(FibredViolation::Permutation {
                                block: b,
                                center,
                                x,
                                detail: format!(
                                    "indices {prev} and {gi} collide at {ti} under the translation"
                                ),
                            });
                        }
                    }
                }
            }
            // condition (4): uniform-norm variation on R-close pairs in C
            for i in 0..triv.members.len() {
                for j in i + 1..triv.members.len() {
                    let (x, y) = (triv.members[i], triv.members[j]);
                    if metric.dist(x, y) > data.r {
                        continue;
                    }
                    let mut worst = Rat::zero();
                    for g in &fib.decks {
                        let ax = translated_xi(fib, x, g, &triv.deltas[i]);
                        let ay = translated_xi(fib, y, g, &triv.deltas[j]);
                        let (Some(ax), Some(ay)) = (ax, ay) else { continue };
                        rep.indices_checked += 1;
                        let d: Rat = sub_sparse(ax, ay).iter().map(|(_, v)| v.abs()).sum();
                        if d > worst {
                            worst = d;
                        }
                    }
                    if worst > data.eps {
                        rep.violations.push(FibredViolation::Variation {
                            block: b,
                            center,
                            x,
                            y,
                            norm: worst,
                        });
                    }
                }
            }
        }
        // condition (5): overlap translations are constant and match the
        // stored cocycles
        for ((kl, kb, c1, c2), stored) in &data.cocycles {
            if *kl != l || *kb != b {
                continue;
            }
            let t1 = &data.trivializations[&(l, b, *c1)];
            let t2 = &data.trivializations[&(l, b, *c2)];
            let mut checked_any = false;
            for (i1, &x) in t1.members.iter().enumerate() {
                let Some(i2) = t2.members.iter().position(|&y| y == x) else {
                    continue;
                };
                let here = deck_align(&fib.cover, t1.lifts[i1], t2.lifts[i2])?;
                checked_any = true;
                if here != *stored {
                    rep.violations.push(FibredViolation::Cocycle {
                        block: b,
                        c1: *c1,
                        c2: *c2,
                        x,
                        detail: format!(
                            "translation at {x} has length {}, stored has length {}",
                            here.len(),
                            stored.len()
                        ),
                    });
                }
            }
            if checked_any {
                rep.overlap_pairs_checked += 1;
            }
        }
    }
    Ok(rep)
}

// --- extraction -------------------------------------------------------

/// Coordinate-at-identity extraction of a local witness family on an
/// admissible subset: f_x = the vector of t_C(x) xi^x at the identity
/// index, which is the projected segment measure at the subset's lift.
pub fn fibred_to_local(data: &FibredWitnessData, c: &SubsetView<'_>) -> Result<WitnessFamily> {
    if c.is_empty() {
        return Err(Error::invalid("extraction needs a nonempty subset"));
    }
    let b = c.members()[0].block as usize;
    if c.members().iter().any(|p| p.block as usize != b) {
        return Err(Error::invalid("extraction subset must lie in a single block"));
    }
    let diam = c.diameter();
    // admissibility per the exclusion rule at scale diam(C) + S
    let excluded = match data.family.block_girth(b) {
        Girth::Finite(g) => g <= 2 * (diam + 2 * data.s),
        Girth::Infinite => false,
    };
    if excluded {
        return Err(Error::invalid(format!(
            "subset of diameter {diam} in block {b} lies inside the exceptional set \
             K at scale {} (girth {} too small)",
            diam + data.s,
            match data.family.block_girth(b) {
                Girth::Finite(g) => g.to_string(),
                Girth::Infinite => "infinite".to_string(),
            }
        )));
    }
    let fib = data.blocks[b]
        .as_ref()
        .ok_or_else(|| Error::invalid(format!("block {b} carries no fibred data")))?;
    let center = c.members()[0].vertex as usize;
    let parent = bfs_parents(data.family.block(b), center);
    let base_lift = fib.canonical_lift[center];
    let mut members = Vec::new();
    let mut measures = Vec::new();
    for &p in c.members() {
        let x = p.vertex as usize;
        let path = bfs_path(&parent, center, x);
        let lift = fib
            .cover
            .lift_path_from(base_lift, &path)
            .ok_or_else(|| Error::invalid("subset lift escaped the truncation"))?;
        let f = segment_measure(&fib.cover, lift, data.n)
            .ok_or_else(|| Error::invalid("extraction segment escaped the truncation"))?;
        members.push(p);
        measures.push(
            f.into_iter()
                .map(|(z, v)| (PointId::new(b, z), v))
                .collect(),
        );
    }
    Ok(WitnessFamily {
        r: data.r,
        s: data.s,
        mode: Mode::Exact,
        members,
        measures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, GraphSpec};
    use crate::metric::{ball, coarse_disjoint_union};
    use crate::witness::check_witness;

    fn cycles_family(moduli: &[usize]) -> CoarseUnion {
        let blocks = moduli
            .iter()
            .map(|&m| build_graph(&GraphSpec::Cycle(m)).unwrap())
            .collect();
        coarse_disjoint_union(blocks).unwrap()
    }

    #[test]
    fn uniform_norm_examples() {
        let a = vec![vec![(0usize, rat(3, 10))], vec![(0usize, rat(7, 10))]];
        assert_eq!(uniform_norm(&a), rat(7, 10));
        let b = vec![
            vec![(0usize, rat(1, 1))],
            vec![(1usize, rat(1, 1))],
        ];
        assert_eq!(uniform_norm(&b), rat(1, 1));
        assert_eq!(uniform_norm(&[]), rat(0, 1));
    }

    #[test]
    fn ell_infty_normalization() {
        let m = EllInftyMeasure {
            per_index: vec![
                vec![(0, rat(1, 2)), (1, rat(1, 2))],
                vec![(2, rat(1, 1))],
            ],
        };
        assert!(m.is_normalized());
        let bad = EllInftyMeasure {
            per_index: vec![vec![(0, rat(1, 2))]],
        };
        assert!(!bad.is_normalized());
    }

    #[test]
    fn assemble_small_cycles() {
        let fam = cycles_family(&[8, 16, 32]);
        let data = assemble_fibred_with(&fam, 1, &rat(1, 4), 2).unwrap();
        assert_eq!(data.n, 8);
        assert_eq!(data.s, 7);
        // K_1: girth <= 16 excludes the first two blocks
        assert_eq!(data.k_l(1), vec![0, 1]);
        assert!(data.blocks[0].is_none());
        assert!(data.blocks[2].is_some());
        let rep = check_fibred(&data, 1).unwrap();
        assert!(rep.passes(), "{:?}", rep.violations);
        assert!(rep.subsets_checked > 0);
    }

    #[test]
    fn epsilon_two_gives_diracs() {
        let fam = cycles_family(&[8, 16]);
        let data = assemble_fibred_with(&fam, 1, &rat(2, 1), 1).unwrap();
        assert_eq!(data.n, 1);
        assert_eq!(data.s, 0);
        let rep = check_fibred(&data, 1).unwrap();
        assert!(rep.passes(), "{:?}", rep.violations);
    }

    #[test]
    fn tamper_normalization_flagged() {
        let fam = cycles_family(&[8, 32]);
        let mut data = assemble_fibred_with(&fam, 1, &rat(1, 4), 1).unwrap();
        let fib = data.blocks[1].as_mut().unwrap();
        // unbalance one coordinate of one vector
        'outer: for x in 0..fib.xi.len() {
            for gi in 0..fib.xi[x].len() {
                if let Some(v) = fib.xi[x][gi].as_mut() {
                    v[0].1 += rat(1, 100);
                    break 'outer;
                }
            }
        }
        let rep = check_fibred(&data, 1).unwrap();
        assert!(!rep.passes());
        assert!(rep
            .violations
            .iter()
            .any(|v| matches!(v, FibredViolation::Normalization { .. })));
        // the structural conditions are untouched
        assert!(!rep
            .violations
            .iter()
            .any(|v| matches!(v, FibredViolation::Permutation { .. })
                || matches!(v, FibredViolation::Cocycle { .. })));
    }

    #[test]
    fn tamper_cocycle_fails_exactly_that_condition() {
        let fam = cycles_family(&[8, 32]);
        let mut data = assemble_fibred_with(&fam, 1, &rat(1, 4), 1).unwrap();
        let key = *data.cocycles.keys().next().expect("overlapping balls exist");
        let girth = 32;
        let fib = data.blocks[1].as_ref().unwrap();
        // replace the stored translation by a full loop around the block
        let wrong = deck_align(
            &fib.cover,
            fib.canonical_lift[0],
            (0..fib.cover.vertex_count())
                .find(|&v| v != fib.canonical_lift[0] && fib.cover.proj(v) == 0
                    && fib.cover.depth(v) == girth)
                .unwrap(),
        )
        .unwrap();
        data.cocycles.insert(key, wrong);
        let rep = check_fibred(&data, 1).unwrap();
        assert!(!rep.passes());
        assert!(rep
            .violations
            .iter()
            .all(|v| matches!(v, FibredViolation::Cocycle { .. })));
    }

    #[test]
    fn extraction_passes_checker() {
        let fam = cycles_family(&[8, 64]);
        let data = assemble_fibred_with(&fam, 1, &rat(1, 4), 2).unwrap();
        let c = ball(&fam, PointId::new(1, 5), 2).unwrap();
        let w = fibred_to_local(&data, &c).unwrap();
        let rep = check_witness(&fam, &w, data.r, &data.eps, data.s);
        assert!(rep.passes(), "{:?}", rep.violations);
    }

    #[test]
    fn extraction_rejects_small_girth() {
        let fam = cycles_family(&[8, 64]);
        let data = assemble_fibred_with(&fam, 1, &rat(1, 4), 2).unwrap();
        // a radius-2 ball in C_8: girth 8 <= 2(diam + 2S)
        let c = ball(&fam, PointId::new(0, 0), 2).unwrap();
        assert!(fibred_to_local(&data, &c).is_err());
    }

    #[test]
    fn extraction_l1_below_uniform_norm() {
        let fam = cycles_family(&[8, 64]);
        let data = assemble_fibred_with(&fam, 1, &rat(1, 4), 2).unwrap();
        let c = ball(&fam, PointId::new(1, 10), 2).unwrap();
        let w = fibred_to_local(&data, &c).unwrap();
        let fib = data.blocks[1].as_ref().unwrap();
        let triv = &data.trivializations[&(2, 1, 10)];
        for i in 0..w.members.len() {
            for j in i + 1..w.members.len() {
                if fam.dist(w.members[i], w.members[j]) > data.r {
                    continue;
                }
                let l1 = w.l1_distance(i, j);
                // uniform norm of the translated difference over all indices
                let (x, y) = (w.members[i].vertex as usize, w.members[j].vertex as usize);
                let (mi, mj) = (
                    triv.members.iter().position(|&m| m == x).unwrap(),
                    triv.members.iter().position(|&m| m == y).unwrap(),
                );
                let mut diffs = Vec::new();
                for g in &fib.decks {
                    let ax = translated_xi(fib, x, g, &triv.deltas[mi]);
                    let ay = translated_xi(fib, y, g, &triv.deltas[mj]);
                    if let (Some(ax), Some(ay)) = (ax, ay) {
                        diffs.push(sub_sparse(ax, ay));
                    }
                }
                assert!(l1 <= uniform_norm(&diffs));
            }
        }
    }

    #[test]
    fn rejects_degree_one() {
        let blocks = vec![build_graph(&GraphSpec::Path(4)).unwrap()];
        let fam = coarse_disjoint_union(blocks).unwrap();
        assert!(assemble_fibred(&fam, 1, &rat(1, 2)).is_err());
    }

    #[test]
    fn rejects_nonpositive_eps() {
        let fam = cycles_family(&[8]);
        assert!(assemble_fibred(&fam, 1, &rat(0, 1)).is_err());
    }

    #[test]
    fn rejects_decreasing_girth_order() {
        let fam = cycles_family(&[16, 8]);
        assert!(assemble_fibred(&fam, 1, &rat(1, 2)).is_err());
    }
}
