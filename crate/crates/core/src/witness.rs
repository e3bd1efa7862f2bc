//! Witness families of finitely supported probability measures, the
//! optimal-variation LP, and the witness checker.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lp::{rat, rat_to_f64, LpInstance, LpSolution, Mode, Rat};
use crate::metric::{ball, CoarseUnion, PointId, SubsetView};

pub const FLOAT_TOL: f64 = 1e-9;

/// Where measures are allowed to charge mass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportMode {
    /// Supports range over the ambient ball B_x(S) (default).
    Ambient,
    /// Supports restricted to the subset C itself.
    Intrinsic,
}

/// A family {f_x}_{x in C}: one finitely supported measure per subset point.
#[derive(Debug, Clone)]
pub struct WitnessFamily {
    pub r: u32,
    pub s: u32,
    pub mode: Mode,
    pub members: Vec<PointId>,
    /// measures[i] is f_{members[i]}, sparse over ambient points.
    pub measures: Vec<Vec<(PointId, Rat)>>,
}

impl WitnessFamily {
    pub fn measure_of(&self, x: PointId) -> Option<&[(PointId, Rat)]> {
        self.members
            .iter()
            .position(|&m| m == x)
            .map(|i| self.measures[i].as_slice())
    }

    /// l^1 distance between the measures at two subset points.
    pub fn l1_distance(&self, i: usize, j: usize) -> Rat {
        let mut all: BTreeMap<(u32, u32), Rat> = BTreeMap::new();
        for (z, v) in &self.measures[i] {
            *all.entry((z.block, z.vertex)).or_insert_with(Rat::zero) += v.clone();
        }
        for (z, v) in &self.measures[j] {
            *all.entry((z.block, z.vertex)).or_insert_with(Rat::zero) -= v.clone();
        }
        all.values().map(|v| v.abs()).sum()
    }

    pub fn to_json(&self) -> WitnessJson {
        let measures = self
            .members
            .iter()
            .zip(&self.measures)
            .map(|(x, f)| {
                let entries = f
                    .iter()
                    .map(|(z, v)| (z.to_string(), v.to_string()))
                    .collect();
                (x.to_string(), entries)
            })
            .collect();
        WitnessJson {
            r: self.r,
            s: self.s,
            mode: self.mode,
            measures,
        }
    }

    pub fn from_json(json: &WitnessJson) -> Result<WitnessFamily> {
        let mut members = Vec::new();
        let mut measures = Vec::new();
        for (x, entries) in &json.measures {
            members.push(parse_point(x)?);
            let mut f = Vec::new();
            for (z, v) in entries {
                let v: Rat = v
                    .parse()
                    .map_err(|_| Error::Format(format!("bad rational {v:?}")))?;
                f.push((parse_point(z)?, v));
            }
            measures.push(f);
        }
        Ok(WitnessFamily {
            r: json.r,
            s: json.s,
            mode: json.mode,
            members,
            measures,
        })
    }
}

fn parse_point(s: &str) -> Result<PointId> {
    let (b, v) = s
        .split_once(':')
        .ok_or_else(|| Error::Format(format!("bad point id {s:?}")))?;
    Ok(PointId {
        block: b.parse().map_err(|_| Error::Format(format!("bad point id {s:?}")))?,
        vertex: v.parse().map_err(|_| Error::Format(format!("bad point id {s:?}")))?,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WitnessJson {
    #[serde(rename = "R")]
    pub r: u32,
    #[serde(rename = "S")]
    pub s: u32,
    #[serde(default = "default_mode")]
    pub mode: Mode,
    /// x -> [[z, "p/q"], ...]
    pub measures: BTreeMap<String, Vec<(String, String)>>,
}

fn default_mode() -> Mode {
    Mode::Exact
}

// --- checker ----------------------------------------------------------

#[derive(Debug, Clone)]
pub enum Violation {
    MassNotOne { x: PointId, total: Rat },
    NegativeMass { x: PointId, z: PointId, value: Rat },
    SupportOutsideBall { x: PointId, z: PointId, dist: u32 },
    VariationExceeded { x: PointId, y: PointId, dist: u32, l1: Rat },
    MissingMeasure { x: PointId },
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Violation::MassNotOne { x, total } => {
                write!(f, "measure at {x} has total mass {total}, not 1")
            }
            Violation::NegativeMass { x, z, value } => {
                write!(f, "measure at {x} is negative at {z}: {value}")
            }
            Violation::SupportOutsideBall { x, z, dist } => {
                write!(f, "measure at {x} charges {z} at distance {dist} beyond S")
            }
            Violation::VariationExceeded { x, y, dist, l1 } => {
                write!(f, "pair ({x},{y}) at distance {dist} has l1 variation {l1}")
            }
            Violation::MissingMeasure { x } => write!(f, "no measure for subset point {x}"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WitnessReport {
    pub violations: Vec<Violation>,
}

impl WitnessReport {
    pub fn passes(&self) -> bool {
        self.violations.is_empty()
    }
}

fn within_tol(v: &Rat, mode: Mode) -> bool {
    match mode {
        Mode::Exact => !v.is_positive(),
        Mode::Float => rat_to_f64(v) <= FLOAT_TOL,
    }
}

/// Checks the three witness conditions: unit mass, supports in B_x(S), and
/// l^1 variation at most eps on all pairs at distance at most R.
pub fn check_witness(
    space: &CoarseUnion,
    w: &WitnessFamily,
    r: u32,
    eps: &Rat,
    s: u32,
) -> WitnessReport {
    let mut violations = Vec::new();
    for (i, &x) in w.members.iter().enumerate() {
        let f = &w.measures[i];
        let total: Rat = f.iter().map(|(_, v)| v.clone()).sum();
        if !within_tol(&(total.clone() - Rat::one()).abs(), w.mode) {
            violations.push(Violation::MassNotOne { x, total });
        }
        for (z, v) in f {
            if v.is_negative() && !within_tol(&(-v.clone()), w.mode) {
                violations.push(Violation::NegativeMass {
                    x,
                    z: *z,
                    value: v.clone(),
                });
            }
            if !v.is_zero() {
                let d = space.dist(x, *z);
                if d > s {
                    violations.push(Violation::SupportOutsideBall { x, z: *z, dist: d });
                }
            }
        }
    }
    for i in 0..w.members.len() {
        for j in i + 1..w.members.len() {
            let d = space.dist(w.members[i], w.members[j]);
            if d <= r {
                let l1 = w.l1_distance(i, j);
                if !within_tol(&(l1.clone() - eps.clone()), w.mode) {
                    violations.push(Violation::VariationExceeded {
                        x: w.members[i],
                        y: w.members[j],
                        dist: d,
                        l1,
                    });
                }
            }
        }
    }
    WitnessReport { violations }
}

// --- eps_star ---------------------------------------------------------

#[derive(Debug, Clone)]
pub struct EpsStarResult {
    pub value: Rat,
    pub witness: Option<WitnessFamily>,
    pub pivots: u64,
    pub runtime: Duration,
    pub num_vars: usize,
    pub num_constraints: usize,
}

impl EpsStarResult {
    pub fn value_f64(&self) -> f64 {
        rat_to_f64(&self.value)
    }
}

pub const DEFAULT_VAR_BOUND: usize = 2_000_000;

/// Support set of f_x for a subset point, honoring the support mode.
fn support_of(c: &SubsetView<'_>, x: PointId, s: u32, support: SupportMode) -> Vec<PointId> {
    let b = ball(c.ambient(), x, s).expect("subset point lies in the ambient space");
    match support {
        SupportMode::Ambient => b.members().to_vec(),
        SupportMode::Intrinsic => b
            .members()
            .iter()
            .copied()
            .filter(|&p| c.contains(p))
            .collect(),
    }
}

/// Minimum over witness families with supports in B_x(S) of the maximal
/// l^1 variation over subset pairs at distance at most R.
pub fn eps_star(c: &SubsetView<'_>, r: u32, s: u32, mode: Mode) -> Result<EpsStarResult> {
    eps_star_with(c, r, s, mode, SupportMode::Ambient, DEFAULT_VAR_BOUND)
}

pub fn eps_star_with(
    c: &SubsetView<'_>,
    r: u32,
    s: u32,
    mode: Mode,
    support: SupportMode,
    var_bound: usize,
) -> Result<EpsStarResult> {
    let start = Instant::now();
    if c.is_empty() {
        return Err(Error::invalid("eps_star needs a nonempty subset"));
    }
    let space = c.ambient();
    let members = c.members();
    let supports: Vec<Vec<PointId>> = members
        .iter()
        .map(|&x| support_of(c, x, s, support))
        .collect();
    // pairs at ambient distance <= R; x = y contributes nothing and is skipped
    let mut pairs = Vec::new();
    for i in 0..members.len() {
        for j in i + 1..members.len() {
            if space.dist(members[i], members[j]) <= r {
                pairs.push((i, j));
            }
        }
    }
    // variable layout: f-blocks per point, then u-blocks per pair, then t
    let mut f_base = Vec::with_capacity(members.len());
    let mut nv = 0usize;
    for sup in &supports {
        f_base.push(nv);
        nv += sup.len();
    }
    let mut u_base = Vec::with_capacity(pairs.len());
    let mut pair_union: Vec<Vec<PointId>> = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let mut zs: Vec<PointId> = supports[i]
            .iter()
            .chain(&supports[j])
            .copied()
            .collect();
        zs.sort();
        zs.dedup();
        u_base.push(nv);
        nv += zs.len();
        pair_union.push(zs);
    }
    let t_var = nv;
    nv += 1;
    if nv > var_bound {
        return Err(Error::size_bound(format!(
            "optimal-variation LP needs {nv} variables ({} measures, {} pairs), bound is {var_bound}",
            members.len(),
            pairs.len()
        )));
    }

    let mut lp = LpInstance::new(nv, mode);
    lp.objective = vec![(t_var, rat(1, 1))];
    // unit mass per point
    for (i, sup) in supports.iter().enumerate() {
        let row = (0..sup.len()).map(|k| (f_base[i] + k, rat(1, 1))).collect();
        lp.eq.push((row, rat(1, 1)));
    }
    let f_index = |i: usize, z: PointId| -> Option<usize> {
        supports[i].iter().position(|&p| p == z).map(|k| f_base[i] + k)
    };
    for (p, &(i, j)) in pairs.iter().enumerate() {
        let mut sum_row = Vec::new();
        for (k, &z) in pair_union[p].iter().enumerate() {
            let u = u_base[p] + k;
            // f_x(z) - f_y(z) - u <= 0 and f_y(z) - f_x(z) - u <= 0
            let mut pos = vec![(u, rat(-1, 1))];
            let mut neg = vec![(u, rat(-1, 1))];
            if let Some(fi) = f_index(i, z) {
                pos.push((fi, rat(1, 1)));
                neg.push((fi, rat(-1, 1)));
            }
            if let Some(fj) = f_index(j, z) {
                pos.push((fj, rat(-1, 1)));
                neg.push((fj, rat(1, 1)));
            }
            lp.le.push((pos, rat(0, 1)));
            lp.le.push((neg, rat(0, 1)));
            sum_row.push((u, rat(1, 1)));
        }
        sum_row.push((t_var, rat(-1, 1)));
        lp.le.push((sum_row, rat(0, 1)));
    }
    let num_constraints = lp.eq.len() + lp.le.len();

    let (value, point, pivots) = match crate::lp::solve_lp(&lp)? {
        LpSolution::Optimal {
            value,
            point,
            pivots,
        } => (value, point, pivots),
        LpSolution::Infeasible => {
            return Err(Error::invalid(
                "optimal-variation LP infeasible: empty support ball",
            ))
        }
        LpSolution::Unbounded => {
            return Err(Error::invalid("optimal-variation LP unbounded"))
        }
    };
    let measures: Vec<Vec<(PointId, Rat)>> = supports
        .iter()
        .enumerate()
        .map(|(i, sup)| {
            sup.iter()
                .enumerate()
                .filter_map(|(k, &z)| {
                    let v = point[f_base[i] + k].clone();
                    (!v.is_zero()).then_some((z, v))
                })
                .collect()
        })
        .collect();
    let witness = WitnessFamily {
        r,
        s,
        mode,
        members: members.to_vec(),
        measures,
    };
    Ok(EpsStarResult {
        value,
        witness: Some(witness),
        pivots,
        runtime: start.elapsed(),
        num_vars: nv,
        num_constraints,
    })
}

/// Uniform probability measure on a set of points.
pub fn uniform_measure(points: &[PointId]) -> Vec<(PointId, Rat)> {
    let n = points.len() as i64;
    points.iter().map(|&p| (p, rat(1, n))).collect()
}
