//! Independent verification oracle for the optimal-variation value.
//!
//! Instead of running a simplex, this reduces the instance by its metric
//! symmetries (averaging an optimal family over the automorphism group of
//! the instance preserves feasibility and the objective, so a symmetric
//! optimum exists), rewrites the absolute values as exhaustive sign-vector
//! cuts, and enumerates every vertex of the resulting low-dimensional
//! polytope by rational Gaussian elimination, taking the minimum objective.

use std::collections::BTreeSet;

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::lp::{rat, Rat};
use crate::metric::{ball, PointId, SubsetView};

const MEASURE_VAR_BOUND: usize = 40;
const REDUCED_DIM_BOUND: usize = 14;
const PAIR_FORM_BOUND: usize = 14;
const COMBINATION_BOUND: u128 = 2_000_000;

/// Optimal variation by symmetry-reduced vertex enumeration; ambient
/// supports, matching the default of the simplex path.
pub fn oracle_eps_star(c: &SubsetView<'_>, r: u32, s: u32) -> Result<Rat> {
    if c.is_empty() {
        return Err(Error::invalid("oracle needs a nonempty subset"));
    }
    let space = c.ambient();
    let members = c.members();
    let supports: Vec<Vec<PointId>> = members
        .iter()
        .map(|&x| ball(space, x, s).map(|b| b.members().to_vec()))
        .collect::<Result<_>>()?;
    let n_f: usize = supports.iter().map(|s| s.len()).sum();
    if n_f > MEASURE_VAR_BOUND {
        return Err(Error::size_bound(format!(
            "oracle instance has {n_f} measure variables, bound is {MEASURE_VAR_BOUND}"
        )));
    }

    // instance point set: subset plus all support points
    let mut points: Vec<PointId> = members.to_vec();
    points.extend(supports.iter().flatten().copied());
    points.sort();
    points.dedup();
    let k = points.len();
    let idx_of = |p: PointId| points.binary_search(&p).expect("known point");
    let in_c: Vec<bool> = points.iter().map(|&p| c.contains(p)).collect();
    let mut dmat = vec![0u32; k * k];
    for i in 0..k {
        for j in 0..k {
            dmat[i * k + j] = space.dist(points[i], points[j]);
        }
    }

    let autos = instance_automorphisms(k, &dmat, &in_c);

    // orbits of the measure-variable index set {(x, z)}
    let mut var_ids: Vec<(usize, usize)> = Vec::new();
    for (mi, &x) in members.iter().enumerate() {
        let xi = idx_of(x);
        for &z in &supports[mi] {
            var_ids.push((xi, idx_of(z)));
        }
    }
    let var_pos = |x: usize, z: usize| var_ids.iter().position(|&v| v == (x, z));
    let mut orbit = init_union_find(var_ids.len());
    for a in &autos {
        for (vi, &(x, z)) in var_ids.iter().enumerate() {
            let wi = var_pos(a[x], a[z]).expect("automorphism preserves supports");
            union(&mut orbit, vi, wi);
        }
    }
    let mut orbit_ids: Vec<usize> = Vec::new(); // var index -> orbit number
    let mut reps: Vec<usize> = Vec::new();
    for vi in 0..var_ids.len() {
        let root = find(&mut orbit, vi);
        let id = match reps.iter().position(|&r| r == root) {
            Some(i) => i,
            None => {
                reps.push(root);
                reps.len() - 1
            }
        };
        orbit_ids.push(id);
    }
    let n_orb = reps.len();
    let dim = n_orb + 1; // orbit weights plus the objective variable t
    if dim > REDUCED_DIM_BOUND {
        return Err(Error::size_bound(format!(
            "reduced instance has dimension {dim}, bound is {REDUCED_DIM_BOUND}"
        )));
    }
    let t_col = n_orb;

    // constrained pairs and their orbit representatives
    let mut pairs = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if space.dist(members[i], members[j]) <= r {
                pairs.push((idx_of(members[i]), idx_of(members[j])));
            }
        }
    }
    if pairs.is_empty() {
        return Ok(Rat::zero());
    }
    let mut pair_reps: Vec<(usize, usize)> = Vec::new();
    let mut seen: BTreeSet<(usize, usize)> = BTreeSet::new();
    for &(x, y) in &pairs {
        if seen.contains(&(x, y)) {
            continue;
        }
        pair_reps.push((x, y));
        for a in &autos {
            let (u, v) = (a[x], a[y]);
            seen.insert((u.min(v), u.max(v)));
        }
    }

    // equality rows: unit mass at one representative per subset-point orbit
    let mut eqs: Vec<(Vec<Rat>, Rat)> = Vec::new();
    let mut covered: BTreeSet<usize> = BTreeSet::new();
    for (mi, &x) in members.iter().enumerate() {
        let xi = idx_of(x);
        if covered.contains(&xi) {
            continue;
        }
        for a in &autos {
            covered.insert(a[xi]);
        }
        let mut row = vec![Rat::zero(); dim];
        for &z in &supports[mi] {
            row[orbit_ids[var_pos(xi, idx_of(z)).unwrap()]] += rat(1, 1);
        }
        eqs.push((row, rat(1, 1)));
    }

    // inequality rows, all as a·x <= b
    let mut ineqs: Vec<(Vec<Rat>, Rat)> = Vec::new();
    for o in 0..n_orb {
        let mut row = vec![Rat::zero(); dim];
        row[o] = rat(-1, 1);
        ineqs.push((row, Rat::zero()));
    }
    for &(x, y) in &pair_reps {
        // difference forms over the union of the two supports
        let mut forms: Vec<Vec<Rat>> = Vec::new();
        let mut zs: Vec<usize> = Vec::new();
        for &(vx, vz) in &var_ids {
            if (vx == x || vx == y) && !zs.contains(&vz) {
                zs.push(vz);
            }
        }
        for &z in &zs {
            let mut form = vec![Rat::zero(); dim];
            if let Some(p) = var_pos(x, z) {
                form[orbit_ids[p]] += rat(1, 1);
            }
            if let Some(p) = var_pos(y, z) {
                form[orbit_ids[p]] -= rat(1, 1);
            }
            if form.iter().any(|v| !v.is_zero()) {
                forms.push(form);
            }
        }
        if forms.len() > PAIR_FORM_BOUND {
            return Err(Error::size_bound(format!(
                "pair has {} difference forms, bound is {PAIR_FORM_BOUND}",
                forms.len()
            )));
        }
        // one cut per sign vector: sum_z s_z * delta_z - t <= 0
        for mask in 0u64..(1u64 << forms.len()) {
            let mut row = vec![Rat::zero(); dim];
            for (fi, form) in forms.iter().enumerate() {
                let sign = if mask >> fi & 1 == 1 { rat(1, 1) } else { rat(-1, 1) };
                for (rv, fv) in row.iter_mut().zip(form) {
                    *rv += &sign * fv;
                }
            }
            row[t_col] = rat(-1, 1);
            ineqs.push((row, Rat::zero()));
        }
    }

    let rank_eq = matrix_rank(&eqs, dim);
    let need = dim - rank_eq;
    let m = ineqs.len();
    if combinations(m as u128, need as u128) > COMBINATION_BOUND {
        return Err(Error::size_bound(format!(
            "vertex enumeration would visit more than {COMBINATION_BOUND} bases \
             ({m} inequalities, {need} active at a time)"
        )));
    }

    let mut best: Option<Rat> = None;
    let mut choice = vec![0usize; need];
    enumerate_vertices(&eqs, &ineqs, dim, need, 0, 0, &mut choice, &mut |x: &[Rat]| {
        // feasibility over all inequality rows
        for (row, b) in &ineqs {
            let lhs: Rat = row.iter().zip(x).map(|(a, v)| a * v).sum();
            if lhs > *b {
                return;
            }
        }
        let t = x[t_col].clone();
        if best.as_ref().is_none_or(|b| t < *b) {
            best = Some(t);
        }
    });
    best.ok_or_else(|| Error::invalid("vertex enumeration found no feasible vertex"))
}

fn combinations(n: u128, k: u128) -> u128 {
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.saturating_mul(n - i) / (i + 1);
        if acc > COMBINATION_BOUND {
            return acc;
        }
    }
    acc
}

#[allow(clippy::too_many_arguments)]
fn enumerate_vertices(
    eqs: &[(Vec<Rat>, Rat)],
    ineqs: &[(Vec<Rat>, Rat)],
    dim: usize,
    need: usize,
    start: usize,
    depth: usize,
    choice: &mut [usize],
    visit: &mut dyn FnMut(&[Rat]),
) {
    if depth == need {
        let mut system: Vec<(Vec<Rat>, Rat)> = eqs.to_vec();
        for &ci in choice.iter() {
            system.push(ineqs[ci].clone());
        }
        if let Some(x) = solve_unique(&system, dim) {
            visit(&x);
        }
        return;
    }
    for i in start..ineqs.len() {
        choice[depth] = i;
        enumerate_vertices(eqs, ineqs, dim, need, i + 1, depth + 1, choice, visit);
    }
}

/// Gaussian elimination; Some(x) iff the system has a unique solution.
fn solve_unique(system: &[(Vec<Rat>, Rat)], dim: usize) -> Option<Vec<Rat>> {
    let mut rows: Vec<(Vec<Rat>, Rat)> = system.to_vec();
    let mut pivot_col_of_row = Vec::new();
    let mut rank = 0;
    for col in 0..dim {
        let Some(pr) = (rank..rows.len()).find(|&r| !rows[r].0[col].is_zero()) else {
            continue;
        };
        rows.swap(rank, pr);
        let inv = rows[rank].0[col].clone().recip();
        for v in rows[rank].0.iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        rows[rank].1 *= &inv;
        let (pivot_row, pivot_rhs) = (rows[rank].0.clone(), rows[rank].1.clone());
        for (r, (row, rhs)) in rows.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&pivot_row) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            *rhs -= &f * &pivot_rhs;
        }
        pivot_col_of_row.push(col);
        rank += 1;
    }
    // inconsistent => no solution; rank-deficient => not a vertex
    for (row, rhs) in rows.iter().skip(rank) {
        if row.iter().all(|v| v.is_zero()) && !rhs.is_zero() {
            return None;
        }
    }
    if rank < dim {
        return None;
    }
    let mut x = vec![Rat::zero(); dim];
    for (r, &col) in pivot_col_of_row.iter().enumerate() {
        x[col] = rows[r].1.clone();
    }
    Some(x)
}

fn matrix_rank(rows: &[(Vec<Rat>, Rat)], dim: usize) -> usize {
    let mut mat: Vec<Vec<Rat>> = rows.iter().map(|(r, _)| r.clone()).collect();
    let mut rank = 0;
    for col in 0..dim {
        let Some(pr) = (rank..mat.len()).find(|&r| !mat[r][col].is_zero()) else {
            continue;
        };
        mat.swap(rank, pr);
        let inv = mat[rank][col].clone().recip();
        for v in mat[rank].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let prow = mat[rank].clone();
        for (r, row) in mat.iter_mut().enumerate() {
            if r == rank || row[col].is_zero() {
                continue;
            }
            let f = row[col].clone();
            for (v, pv) in row.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// All bijections of the instance points preserving pairwise distance and
/// subset membership, found by backtracking.
fn instance_automorphisms(k: usize, dmat: &[u32], in_c: &[bool]) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut image = vec![usize::MAX; k];
    let mut used = vec![false; k];
    fn rec(
        pos: usize,
        k: usize,
        dmat: &[u32],
        in_c: &[bool],
        image: &mut Vec<usize>,
        used: &mut Vec<bool>,
        out: &mut Vec<Vec<usize>>,
    ) {
        if pos == k {
            out.push(image.clone());
            return;
        }
        for cand in 0..k {
            if used[cand] || in_c[cand] != in_c[pos] {
                continue;
            }
            if (0..pos).any(|p| dmat[p * k + pos] != dmat[image[p] * k + cand]) {
                continue;
            }
            image[pos] = cand;
            used[cand] = true;
            rec(pos + 1, k, dmat, in_c, image, used, out);
            used[cand] = false;
            image[pos] = usize::MAX;
        }
    }
    rec(0, k, dmat, in_c, &mut image, &mut used, &mut out);
    out
}

fn init_union_find(n: usize) -> Vec<usize> {
    (0..n).collect()
}

fn find(uf: &mut Vec<usize>, mut x: usize) -> usize {
    while uf[x] != x {
        uf[x] = uf[uf[x]];
        x = uf[x];
    }
    x
}

fn union(uf: &mut Vec<usize>, a: usize, b: usize) {
    let (ra, rb) = (find(uf, a), find(uf, b));
    if ra != rb {
        uf[ra] = rb;
    }
}
