//! Quotient maps from Z^d and free groups onto finite targets, box spaces
//! built from towers of such maps, and the L-isometry test for a single map.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::group::{cayley_graph, torus_group, FiniteGroup, GroupSpec};
use crate::metric::{coarse_disjoint_union, CoarseUnion, SpaceJson};

/// Infinite source group of a quotient map. Generator indices are fixed:
/// for zd(d), index 2k is +e_{k+1} and 2k+1 is -e_{k+1}; for free(k),
/// index 2j is a_{j+1} and 2j+1 is its inverse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SourceGroup {
    Zd { d: usize },
    Free { k: usize },
}

impl SourceGroup {
    pub fn generator_count(&self) -> usize {
        match self {
            SourceGroup::Zd { d } => 2 * d,
            SourceGroup::Free { k } => 2 * k,
        }
    }
}

/// A surjection from the source onto a finite group, together with the
/// Cayley graph of the target with respect to the generator images.
#[derive(Debug, Clone)]
pub struct QuotientMap {
    source: SourceGroup,
    target: FiniteGroup,
    /// Image of source generator i, in the fixed source generator order.
    gen_images: Vec<usize>,
    block: Graph,
}

impl QuotientMap {
    pub fn new(source: SourceGroup, target: FiniteGroup, gen_images: Vec<usize>) -> Result<QuotientMap> {
        if gen_images.len() != source.generator_count() {
            return Err(Error::invalid(format!(
                "expected {} generator images, got {}",
                source.generator_count(),
                gen_images.len()
            )));
        }
        for pair in gen_images.chunks(2) {
            if target.inv(pair[0]) != pair[1] {
                return Err(Error::invalid(
                    "generator images must pair each generator with its inverse",
                ));
            }
        }
        // images must be exactly the target's distinguished generators
        for &img in &gen_images {
            if img != target.identity() && !target.generators().contains(&img) {
                return Err(Error::invalid(
                    "generator image is not a distinguished target generator",
                ));
            }
        }
        let block = cayley_graph(&target)?;
        Ok(QuotientMap {
            source,
            target,
            gen_images,
            block,
        })
    }

    pub fn source(&self) -> SourceGroup {
        self.source
    }

    pub fn target(&self) -> &FiniteGroup {
        &self.target
    }

    pub fn gen_images(&self) -> &[usize] {
        &self.gen_images
    }

    /// Cayley graph of the target with respect to the generator images.
    pub fn block(&self) -> &Graph {
        &self.block
    }
}

/// Evaluates a word in source generator indices under the quotient map.
pub fn quotient_apply(q: &QuotientMap, word: &[usize]) -> Result<usize> {
    let ngen = q.source.generator_count();
    let mut acc = q.target.identity();
    for &i in word {
        if i >= ngen {
            return Err(Error::invalid(format!("generator index {i} out of range")));
        }
        acc = q.target.mul(acc, q.gen_images[i]);
    }
    Ok(acc)
}

/// Coordinate-sum evaluation for zd sources; used as an independent
/// cross-check of the word path.
pub fn quotient_apply_zd(q: &QuotientMap, coords: &[i64]) -> Result<usize> {
    let SourceGroup::Zd { d } = q.source else {
        return Err(Error::invalid("coordinate evaluation needs a zd source"));
    };
    if coords.len() != d {
        return Err(Error::invalid("coordinate vector has wrong dimension"));
    }
    let mut acc = q.target.identity();
    for (k, &c) in coords.iter().enumerate() {
        let (gen, times) = if c >= 0 { (2 * k, c as u64) } else { (2 * k + 1, (-c) as u64) };
        for _ in 0..times {
            acc = q.target.mul(acc, q.gen_images[gen]);
        }
    }
    Ok(acc)
}

/// Elements of the source ball B_e(L), each as (word, distance-to-identity).
/// zd balls are l^1 balls; free balls are non-backtracking words.
fn source_ball(source: SourceGroup, l: u32, bound: usize) -> Result<Vec<(Vec<usize>, u32)>> {
    let mut out: Vec<(Vec<usize>, u32)> = vec![(Vec::new(), 0)];
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for depth in 1..=l {
        let mut next = Vec::new();
        for w in &frontier {
            let gens: Vec<usize> = match source {
                SourceGroup::Zd { d } => match w.last().copied() {
                    // only extend with generators at or after the last used
                    // coordinate direction, keeping one canonical word per point
                    Some(min) => (min..2 * d).filter(|&g| g / 2 > min / 2 || g == min).collect(),
                    None => (0..2 * d).collect(),
                },
                SourceGroup::Free { k } => {
                    let banned = w.last().map(|&g| g ^ 1);
                    (0..2 * k).filter(|&g| Some(g) != banned).collect()
                }
            };
            for g in gens {
                let mut w2 = w.clone();
                w2.push(g);
                if out.len() + next.len() >= bound {
                    return Err(Error::size_bound(format!(
                        "source ball of radius {l} exceeds the bound of {bound} elements"
                    )));
                }
                next.push(w2);
            }
        }
        out.extend(next.iter().cloned().map(|w| (w, depth)));
        frontier = next;
    }
    Ok(out)
}

/// Word-metric distance between two source ball elements given as words.
fn source_dist(source: SourceGroup, u: &[usize], v: &[usize]) -> u32 {
    match source {
        SourceGroup::Zd { d } => {
            let mut cu = vec![0i64; d];
            for &g in u {
                cu[g / 2] += if g % 2 == 0 { 1 } else { -1 };
            }
            for &g in v {
                cu[g / 2] -= if g % 2 == 0 { 1 } else { -1 };
            }
            cu.iter().map(|c| c.unsigned_abs() as u32).sum()
        }
        SourceGroup::Free { .. } => {
            // |u^{-1} v| after free reduction; u and v are already reduced
            let mut i = 0;
            while i < u.len() && i < v.len() && u[i] == v[i] {
                i += 1;
            }
            (u.len() - i + v.len() - i) as u32
        }
    }
}

const DEFAULT_BALL_BOUND: usize = 200_000;

/// True iff the map restricted to the source ball of radius L is an isometry
/// onto its image, checked exhaustively against BFS distances in the block.
pub fn is_l_isometric(q: &QuotientMap, l: u32) -> Result<bool> {
    is_l_isometric_bounded(q, l, DEFAULT_BALL_BOUND)
}

pub fn is_l_isometric_bounded(q: &QuotientMap, l: u32, bound: usize) -> Result<bool> {
    let ball = source_ball(q.source, l, bound)?;
    let images: Vec<usize> = ball
        .iter()
        .map(|(w, _)| quotient_apply(q, w))
        .collect::<Result<_>>()?;
    // distances in the block from every distinct image vertex
    let mut dist_from: std::collections::HashMap<usize, Vec<Option<u32>>> =
        std::collections::HashMap::new();
    for (i, (u, _)) in ball.iter().enumerate() {
        let du = dist_from
            .entry(images[i])
            .or_insert_with(|| q.block.bfs(images[i]));
        for (j, (v, _)) in ball.iter().enumerate().skip(i + 1) {
            let ds = source_dist(q.source, u, v);
            let dt = du[images[j]].expect("Cayley block is connected");
            if dt != ds {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// One level of a box-space family.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LevelJson {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulus: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub nested: bool,
}

/// A tower of quotient maps with the coarse disjoint union of their
/// Cayley blocks.
#[derive(Debug, Clone)]
pub struct BoxSpaceFamily {
    pub maps: Vec<QuotientMap>,
    pub union: CoarseUnion,
    pub nested: bool,
    pub warnings: Vec<String>,
    levels: Vec<LevelJson>,
    source: SourceGroup,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FamilyJson {
    pub source: SourceGroup,
    pub levels: Vec<LevelJson>,
    pub space: SpaceJson,
}

impl BoxSpaceFamily {
    pub fn to_json(&self) -> FamilyJson {
        FamilyJson {
            source: self.source,
            levels: self.levels.clone(),
            space: self.union.to_json(),
        }
    }
}

/// Parameters for [`box_space`].
#[derive(Debug, Clone)]
pub enum BoxSpaceParams {
    /// Z^d mapped onto discrete tori with the given moduli, one per level.
    ZdModuli(Vec<u64>),
    /// Free group of rank k mapped onto finite targets; each level pairs a
    /// target with the images of the positive free generators a_1..a_k.
    FreeTargets(Vec<(FiniteGroup, Vec<usize>)>),
}

pub fn box_space(source: SourceGroup, params: &BoxSpaceParams) -> Result<BoxSpaceFamily> {
    let mut maps = Vec::new();
    let mut levels = Vec::new();
    let mut warnings = Vec::new();
    let mut nested = true;
    match (source, params) {
        (SourceGroup::Zd { d }, BoxSpaceParams::ZdModuli(moduli)) => {
            if moduli.is_empty() {
                return Err(Error::invalid("box space needs at least one level"));
            }
            for w in moduli.windows(2) {
                if w[1] <= w[0] {
                    return Err(Error::invalid(format!(
                        "moduli must be strictly increasing ({} then {})",
                        w[0], w[1]
                    )));
                }
                if w[1] % w[0] != 0 {
                    nested = false;
                    warnings.push(format!(
                        "modulus {} does not divide {}: levels are quotients but not a filtration",
                        w[0], w[1]
                    ));
                }
            }
            for &m in moduli {
                let target = torus_group(&vec![m; d])?;
                // generator images: +-e_k in source order
                let mut images = Vec::with_capacity(2 * d);
                for k in 0..d {
                    let mut plus = vec![0u64; d];
                    plus[k] = 1 % m;
                    let mut minus = vec![0u64; d];
                    minus[k] = (m - 1) % m;
                    images.push(target.torus_element(&plus).unwrap());
                    images.push(target.torus_element(&minus).unwrap());
                }
                maps.push(QuotientMap::new(source, target, images)?);
                levels.push(LevelJson {
                    modulus: Some(m),
                    target: None,
                    nested,
                });
            }
        }
        (SourceGroup::Free { k }, BoxSpaceParams::FreeTargets(targets)) => {
            if targets.is_empty() {
                return Err(Error::invalid("box space needs at least one level"));
            }
            // kernel nesting is not verified for free sources
            nested = false;
            for (target, positive) in targets {
                if positive.len() != k {
                    return Err(Error::invalid(format!(
                        "expected {k} positive generator images, got {}",
                        positive.len()
                    )));
                }
                let mut images = Vec::with_capacity(2 * k);
                for &p in positive {
                    images.push(p);
                    images.push(target.inv(p));
                }
                let name = target.name().to_string();
                maps.push(QuotientMap::new(source, target.clone(), images)?);
                levels.push(LevelJson {
                    modulus: None,
                    target: Some(name),
                    nested: false,
                });
            }
        }
        _ => return Err(Error::invalid("source kind does not match box-space parameters")),
    }
    let union = coarse_disjoint_union(maps.iter().map(|m| m.block().clone()).collect())?;
    Ok(BoxSpaceFamily {
        maps,
        union,
        nested,
        warnings,
        levels,
        source,
    })
}

/// Convenience: free(k) onto a group built from a descriptor, sending a_j to
/// the j-th positive distinguished generator.
pub fn free_target_from_spec(spec: &GroupSpec, k: usize) -> Result<(FiniteGroup, Vec<usize>)> {
    let g = crate::group::make_group(spec)?;
    // distinguished generators come in positive-then-inverse order for sl2;
    // take the first k that are not inverses of earlier picks
    let mut positive = Vec::new();
    for &cand in g.generators() {
        if positive.len() == k {
            break;
        }
        if !positive.iter().any(|&p| g.inv(p) == cand) {
            positive.push(cand);
        }
    }
    if positive.len() != k {
        return Err(Error::invalid(format!(
            "target {} does not expose {k} independent generators",
            g.name()
        )));
    }
    Ok((g, positive))
}
