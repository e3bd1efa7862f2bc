//! Box Folner sets in Z^d, their translation deficiency, and the
//! projection of a Folner window through a quotient map onto a block.

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lp::{rat, Mode, Rat};
use crate::metric::PointId;
use crate::quotient::{QuotientMap, SourceGroup};
use crate::witness::WitnessFamily;

/// The box F = prod_k [a_k, a_k + m_k) in Z^d.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FolnerSet {
    pub lower: Vec<i64>,
    pub sides: Vec<u64>,
}

impl FolnerSet {
    pub fn new(lower: Vec<i64>, sides: Vec<u64>) -> Result<FolnerSet> {
        if lower.len() != sides.len() {
            return Err(Error::invalid("lower corner and sides disagree in dimension"));
        }
        if sides.is_empty() || sides.iter().any(|&m| m == 0) {
            return Err(Error::invalid("Folner box must be nonempty"));
        }
        Ok(FolnerSet { lower, sides })
    }

    pub fn dimension(&self) -> usize {
        self.sides.len()
    }

    pub fn len(&self) -> u64 {
        self.sides.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false // invariant: nonempty
    }

    /// All lattice points of the box.
    pub fn points(&self) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for (a, &m) in self.lower.iter().zip(&self.sides) {
            let mut next = Vec::with_capacity(out.len() * m as usize);
            for p in &out {
                for j in 0..m as i64 {
                    let mut q = p.clone();
                    q.push(a + j);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }
}

/// |F symmetric-difference (g+F)| / |F|, exactly. The intersection of two
/// translated boxes factors per coordinate as max(0, m_k - |g_k|).
pub fn folner_deficiency(f: &FolnerSet, g: &[i64]) -> Result<Rat> {
    if g.len() != f.dimension() {
        return Err(Error::invalid("translation vector has wrong dimension"));
    }
    let total = f.len();
    let mut inter: u64 = 1;
    for (&m, &gk) in f.sides.iter().zip(g) {
        inter *= m.saturating_sub(gk.unsigned_abs());
    }
    Ok(rat(2 * (total - inter) as i64, total as i64))
}

/// f_x(y) = |q^{-1}(y) cap (g_x + F)| / |F|, where g_x is the canonical
/// representative of x with coordinates in [0, m_k).
pub fn folner_project(f: &FolnerSet, q: &QuotientMap, x: usize) -> Result<Vec<(usize, Rat)>> {
    let SourceGroup::Zd { d } = q.source() else {
        return Err(Error::invalid("Folner projection needs a zd source"));
    };
    if d != f.dimension() {
        return Err(Error::invalid("Folner box dimension does not match the map"));
    }
    if x >= q.target().order() {
        return Err(Error::invalid("point outside the block"));
    }
    let gx = q
        .target()
        .torus_coords(x)
        .ok_or_else(|| Error::invalid("zd quotient target must be a torus"))?;
    let size = f.len() as i64;
    let mut counts = vec![0i64; q.target().order()];
    for p in f.points() {
        let coords: Vec<i64> = p
            .iter()
            .zip(&gx)
            .map(|(c, &g)| c + g as i64)
            .collect();
        counts[crate::quotient::quotient_apply_zd(q, &coords)?] += 1;
    }
    Ok(counts
        .into_iter()
        .enumerate()
        .filter(|(_, c)| *c > 0)
        .map(|(y, c)| (y, rat(c, size)))
        .collect())
}

/// The projected family over the whole block, packaged for the checker.
/// The block is block `block_index` of whatever union the caller places it
/// in; measures live on the same block.
pub fn folner_witness(
    f: &FolnerSet,
    q: &QuotientMap,
    block_index: usize,
    r: u32,
    s: u32,
) -> Result<WitnessFamily> {
    let n = q.target().order();
    let mut members = Vec::with_capacity(n);
    let mut measures = Vec::with_capacity(n);
    for x in 0..n {
        members.push(PointId::new(block_index, x));
        let m = folner_project(f, q, x)?
            .into_iter()
            .map(|(y, v)| (PointId::new(block_index, y), v))
            .collect();
        measures.push(m);
    }
    Ok(WitnessFamily {
        r,
        s,
        mode: Mode::Exact,
        members,
        measures,
    })
}

/// l^1 distance between two sparse measures on block vertices.
pub fn l1_sparse(a: &[(usize, Rat)], b: &[(usize, Rat)]) -> Rat {
    let mut all: std::collections::BTreeMap<usize, Rat> = std::collections::BTreeMap::new();
    for (y, v) in a {
        *all.entry(*y).or_insert_with(Rat::zero) += v.clone();
    }
    for (y, v) in b {
        *all.entry(*y).or_insert_with(Rat::zero) -= v.clone();
    }
    all.values().map(num_traits::Signed::abs).sum()
}
