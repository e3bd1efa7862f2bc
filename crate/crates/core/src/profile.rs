//! S_min profiling over block families and the diagonal duplication
//! construction.

use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{rat_to_f64, Mode, Rat};
use crate::metric::{ball, coarse_disjoint_union, CoarseUnion, PointId};
use crate::witness::eps_star;

/// One profiled (block, scale) cell. `block` carries the block label when
/// present so that duplicated copies of a block produce identical rows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProfileRow {
    pub family: String,
    pub block: String,
    #[serde(rename = "L")]
    pub l: u32,
    #[serde(rename = "R")]
    pub r: u32,
    pub eps: String,
    pub s_min: u32,
    pub subsets_checked: usize,
    pub max_residual: String,
    pub runtime_ms: u64,
}

fn fmt_value(v: &Rat, mode: Mode) -> String {
    match mode {
        Mode::Exact => v.to_string(),
        Mode::Float => format!("{:.9}", rat_to_f64(v)),
    }
}

fn le_eps(v: &Rat, eps: &Rat, mode: Mode) -> bool {
    match mode {
        Mode::Exact => v <= eps,
        Mode::Float => rat_to_f64(v) <= rat_to_f64(eps) + 1e-9,
    }
}

fn block_label(family: &CoarseUnion, i: usize) -> String {
    family
        .block(i)
        .label()
        .map(str::to_string)
        .unwrap_or_else(|| i.to_string())
}

/// Profile of one (block, L) cell: ascend S from 0 until every ball-subset
/// of radius L centered in the block reaches eps_star <= eps.
fn profile_cell(
    family: &CoarseUnion,
    family_id: &str,
    bi: usize,
    l: u32,
    r: u32,
    eps: &Rat,
    mode: Mode,
    record_timing: bool,
) -> Result<ProfileRow> {
    let started = std::time::Instant::now();
    let nv = family.block(bi).vertex_count();
    // all balls around a transitive block's vertices are isometric
    let centers: Vec<usize> = if family.block(bi).is_vertex_transitive() {
        vec![0]
    } else {
        (0..nv).collect()
    };
    let diam = family.block_diameter(bi);
    let mut subsets_checked = 0usize;
    let mut result: Option<(u32, Rat)> = None;
    's_loop: for s in 0..=diam {
        let mut worst = Rat::zero();
        for &x in &centers {
            let c = ball(family, PointId::new(bi, x), l)?;
            let res = eps_star(&c, r, s, mode)?;
            subsets_checked += 1;
            if res.value > worst {
                worst = res.value;
            }
        }
        if le_eps(&worst, eps, mode) {
            result = Some((s, worst));
            break 's_loop;
        }
    }
    let (s_min, max_residual) = result.ok_or_else(|| {
        Error::invalid(format!(
            "block {bi} did not reach the tolerance even at S = diameter {diam}"
        ))
    })?;
    Ok(ProfileRow {
        family: family_id.to_string(),
        block: block_label(family, bi),
        l,
        r,
        eps: eps.to_string(),
        s_min,
        subsets_checked,
        max_residual: fmt_value(&max_residual, mode),
        runtime_ms: if record_timing {
            started.elapsed().as_millis() as u64
        } else {
            0
        },
    })
}

/// Profiles every (block, L) pair. Cells run in parallel on `jobs` threads
/// (0 = library default); output order is canonical (block, then L)
/// regardless of schedule. Timing is recorded only when requested, keeping
/// the default output byte-reproducible.
#[allow(clippy::too_many_arguments)]
pub fn smin_profile_with(
    family: &CoarseUnion,
    family_id: &str,
    r: u32,
    eps: &Rat,
    l_list: &[u32],
    mode: Mode,
    jobs: usize,
    record_timing: bool,
) -> Result<Vec<ProfileRow>> {
    use rayon::prelude::*;
    if !eps.is_positive() {
        return Err(Error::invalid("tolerance must be positive"));
    }
    if l_list.is_empty() {
        return Err(Error::invalid("scale list must be nonempty"));
    }
    let mut items: Vec<(usize, u32)> = Vec::new();
    for bi in 0..family.block_count() {
        for &l in l_list {
            items.push((bi, l));
        }
    }
    let run = |items: &[(usize, u32)]| -> Result<Vec<(usize, ProfileRow)>> {
        items
            .par_iter()
            .enumerate()
            .map(|(k, &(bi, l))| {
                profile_cell(family, family_id, bi, l, r, eps, mode, record_timing)
                    .map(|row| (k, row))
            })
            .collect()
    };
    let mut indexed = if jobs == 0 {
        run(&items)?
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
        pool.install(|| run(&items))?
    };
    indexed.sort_by_key(|(k, _)| *k);
    Ok(indexed.into_iter().map(|(_, row)| row).collect())
}

pub fn smin_profile(
    family: &CoarseUnion,
    family_id: &str,
    r: u32,
    eps: &Rat,
    l_list: &[u32],
    mode: Mode,
) -> Result<Vec<ProfileRow>> {
    smin_profile_with(family, family_id, r, eps, l_list, mode, 0, false)
}

/// Diagonal duplication: copies of the blocks arranged so that every
/// original block recurs as far out as the copy count allows. Pair (i, j)
/// (block i, copy j, both 0-based) is placed in order of increasing i+j,
/// then increasing i.
pub fn duplicate_family(family: &CoarseUnion, copies: usize) -> Result<CoarseUnion> {
    if copies < 1 {
        return Err(Error::invalid("copy count must be at least 1"));
    }
    let nb = family.block_count();
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(nb * copies);
    for s in 0..nb + copies - 1 {
        for i in 0..nb.min(s + 1) {
            let j = s - i;
            if j < copies {
                order.push((i, j));
            }
        }
    }
    let blocks = order
        .iter()
        .map(|&(i, _)| family.block(i).clone())
        .collect();
    coarse_disjoint_union(blocks)
}
