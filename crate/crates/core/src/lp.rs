//! Linear programming over nonnegative variables in two numeric modes:
//! an exact arbitrary-precision-rational simplex (authoritative) and a
//! floating-point path backed by a sparse revised simplex.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

pub fn rat(n: i64, d: i64) -> Rat {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    let n = r.numer();
    let d = r.denom();
    // split to keep precision for big numerators
    let nf: f64 = n.to_string().parse().unwrap_or(f64::NAN);
    let df: f64 = d.to_string().parse().unwrap_or(f64::NAN);
    nf / df
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl Mode {
    pub fn parse(s: &str) -> Result<Mode> {
        match s {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            _ => Err(Error::invalid(format!("unknown numeric mode {s:?}"))),
        }
    }
}

type Row = Vec<(usize, Rat)>;

/// minimize c·x subject to a·x = b (eq rows), a·x <= b (le rows), x >= 0.
#[derive(Debug, Clone)]
pub struct LpInstance {
    pub num_vars: usize,
    pub objective: Row,
    pub eq: Vec<(Row, Rat)>,
    pub le: Vec<(Row, Rat)>,
    pub mode: Mode,
}

impl LpInstance {
    pub fn new(num_vars: usize, mode: Mode) -> LpInstance {
        LpInstance {
            num_vars,
            objective: Vec::new(),
            eq: Vec::new(),
            le: Vec::new(),
            mode,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check = |row: &Row| -> Result<()> {
            for (j, _) in row {
                if *j >= self.num_vars {
                    return Err(Error::invalid(format!(
                        "variable index {j} out of range ({} vars)",
                        self.num_vars
                    )));
                }
            }
            Ok(())
        };
        check(&self.objective)?;
        for (row, _) in self.eq.iter().chain(&self.le) {
            check(row)?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub enum LpSolution {
    Optimal {
        value: Rat,
        /// Primal point; rational in both modes (float mode converts).
        point: Vec<Rat>,
        pivots: u64,
    },
    Infeasible,
    Unbounded,
}

pub fn solve_lp(lp: &LpInstance) -> Result<LpSolution> {
    lp.validate()?;
    match lp.mode {
        Mode::Exact => solve_exact(lp),
        Mode::Float => solve_float(lp),
    }
}

// --- exact simplex ----------------------------------------------------

struct Tableau {
    ncols: usize,
    rows: Vec<Vec<Rat>>,
    rhs: Vec<Rat>,
    basis: Vec<usize>,
    cost: Vec<Rat>,
    cost_rhs: Rat, // negated objective value
    pivots: u64,
    blocked: Vec<bool>, // columns barred from entering (artificials in phase 2)
}

impl Tableau {
    fn pivot(&mut self, r: usize, c: usize) {
        let piv = self.rows[r][c].clone();
        if !piv.is_one() {
            let inv = piv.recip();
            for v in self.rows[r].iter_mut() {
                if !v.is_zero() {
                    *v *= &inv;
                }
            }
            self.rhs[r] *= &inv;
        }
        let prow = self.rows[r].clone();
        let prhs = self.rhs[r].clone();
        for i in 0..self.rows.len() {
            if i == r {
                continue;
            }
            let f = self.rows[i][c].clone();
            if f.is_zero() {
                continue;
            }
            for (v, pv) in self.rows[i].iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.rhs[i] -= &f * &prhs;
        }
        let f = self.cost[c].clone();
        if !f.is_zero() {
            for (v, pv) in self.cost.iter_mut().zip(&prow) {
                if !pv.is_zero() {
                    *v -= &f * pv;
                }
            }
            self.cost_rhs -= &f * &prhs;
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs the simplex loop to optimality or unboundedness. Uses the
    /// steepest-coefficient rule by default and falls back to Bland's rule
    /// after a run of degenerate pivots, which restores the cycle-freedom
    /// guarantee while keeping typical pivot counts low.
    fn optimize(&mut self) -> bool {
        let mut stalled = 0u32;
        loop {
            let bland = stalled >= 30;
            let mut enter: Option<usize> = None;
            let mut best = Rat::zero();
            for j in 0..self.ncols {
                if self.blocked[j] || !self.cost[j].is_negative() {
                    continue;
                }
                if bland {
                    enter = Some(j);
                    break;
                }
                if self.cost[j] < best {
                    best = self.cost[j].clone();
                    enter = Some(j);
                }
            }
            let Some(c) = enter else { return true };
            // ratio test; ties broken by smallest basis variable (Bland)
            let mut leave: Option<(usize, Rat)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                match &leave {
                    None => leave = Some((i, ratio)),
                    Some((li, lr)) => {
                        if ratio < *lr || (ratio == *lr && self.basis[i] < self.basis[*li]) {
                            leave = Some((i, ratio));
                        }
                    }
                }
            }
            let Some((r, ratio)) = leave else { return false };
            if ratio.is_zero() {
                stalled += 1;
            } else {
                stalled = 0;
            }
            self.pivot(r, c);
        }
    }
}

fn solve_exact(lp: &LpInstance) -> Result<LpSolution> {
    let n = lp.num_vars;
    let nslack = lp.le.len();
    let m = lp.eq.len() + lp.le.len();
    // a <= row with nonnegative rhs starts from its slack; only equality
    // rows and negated <= rows need an artificial column
    let mut needs_art: Vec<bool> = Vec::with_capacity(m);
    for (_, b) in &lp.eq {
        let _ = b;
        needs_art.push(true);
    }
    for (_, b) in &lp.le {
        needs_art.push(b.is_negative());
    }
    let nart = needs_art.iter().filter(|&&a| a).count();
    let ncols = n + nslack + nart;
    let mut rows: Vec<Vec<Rat>> = Vec::with_capacity(m);
    let mut rhs: Vec<Rat> = Vec::with_capacity(m);
    let mut fill = |row: &Row, b: &Rat, slack: Option<usize>| {
        let mut dense = vec![Rat::zero(); ncols];
        for (j, v) in row {
            dense[*j] += v.clone();
        }
        if let Some(s) = slack {
            dense[n + s] = Rat::one();
        }
        let mut b = b.clone();
        if b.is_negative() {
            for v in dense.iter_mut() {
                if !v.is_zero() {
                    *v = -v.clone();
                }
            }
            b = -b;
        }
        rows.push(dense);
        rhs.push(b);
    };
    for (row, b) in &lp.eq {
        fill(row, b, None);
    }
    for (s, (row, b)) in lp.le.iter().enumerate() {
        fill(row, b, Some(s));
    }
    // starting basis: slack where possible, artificial otherwise
    let mut basis = Vec::with_capacity(m);
    let mut next_art = n + nslack;
    for (i, row) in rows.iter_mut().enumerate() {
        if needs_art[i] {
            row[next_art] = Rat::one();
            basis.push(next_art);
            next_art += 1;
        } else {
            basis.push(n + (i - lp.eq.len()));
        }
    }
    // phase-1 cost: sum of artificials, reduced against the basis
    let mut cost = vec![Rat::zero(); ncols];
    let mut cost_rhs = Rat::zero();
    for i in 0..m {
        if !needs_art[i] {
            continue;
        }
        for j in 0..ncols {
            if !rows[i][j].is_zero() {
                let d = rows[i][j].clone();
                cost[j] -= d;
            }
        }
        cost_rhs -= &rhs[i];
    }
    for i in 0..m {
        cost[basis[i]] = Rat::zero(); // basic columns have zero reduced cost
    }
    let mut t = Tableau {
        ncols,
        rows,
        rhs,
        basis,
        cost,
        cost_rhs,
        pivots: 0,
        blocked: vec![false; ncols],
    };
    if !t.optimize() {
        // phase 1 is bounded below by 0; cannot be unbounded
        return Err(Error::invalid("phase-1 simplex reported unbounded"));
    }
    if !(-t.cost_rhs.clone()).is_zero() {
        return Ok(LpSolution::Infeasible);
    }
    // drive remaining artificials out of the basis where possible
    for i in 0..t.rows.len() {
        if t.basis[i] >= n + nslack {
            if let Some(c) = (0..n + nslack).find(|&j| !t.rows[i][j].is_zero()) {
                t.pivot(i, c);
            }
        }
    }
    // bar artificials from re-entering
    for j in n + nslack..ncols {
        t.blocked[j] = true;
    }
    // phase-2 cost row: original objective reduced against the basis
    let mut cost = vec![Rat::zero(); ncols];
    for (j, v) in &lp.objective {
        cost[*j] += v.clone();
    }
    let mut cost_rhs = Rat::zero();
    for i in 0..t.rows.len() {
        let cb = cost[t.basis[i]].clone();
        if cb.is_zero() {
            continue;
        }
        for j in 0..ncols {
            if !t.rows[i][j].is_zero() {
                let d = &cb * &t.rows[i][j];
                cost[j] -= d;
            }
        }
        cost_rhs -= &cb * &t.rhs[i];
    }
    t.cost = cost;
    t.cost_rhs = cost_rhs;
    if !t.optimize() {
        return Ok(LpSolution::Unbounded);
    }
    let mut point = vec![Rat::zero(); lp.num_vars];
    for (i, &b) in t.basis.iter().enumerate() {
        if b < lp.num_vars {
            point[b] = t.rhs[i].clone();
        }
    }
    let value: Rat = lp
        .objective
        .iter()
        .map(|(j, v)| v * &point[*j])
        .sum();
    Ok(LpSolution::Optimal {
        value,
        point,
        pivots: t.pivots,
    })
}

// --- float mode -------------------------------------------------------

fn solve_float(lp: &LpInstance) -> Result<LpSolution> {
    use minilp::{ComparisonOp, OptimizationDirection, Problem, Variable};
    let mut prob = Problem::new(OptimizationDirection::Minimize);
    let mut obj = vec![0.0f64; lp.num_vars];
    for (j, v) in &lp.objective {
        obj[*j] += rat_to_f64(v);
    }
    let vars: Vec<Variable> = obj
        .iter()
        .map(|&c| prob.add_var(c, (0.0, f64::INFINITY)))
        .collect();
    let mut add = |row: &Row, op: ComparisonOp, b: &Rat| {
        let mut dense = std::collections::HashMap::new();
        for (j, v) in row {
            *dense.entry(*j).or_insert(0.0) += rat_to_f64(v);
        }
        let terms: Vec<(Variable, f64)> = dense.into_iter().map(|(j, v)| (vars[j], v)).collect();
        prob.add_constraint(&terms, op, rat_to_f64(b));
    };
    for (row, b) in &lp.eq {
        add(row, ComparisonOp::Eq, b);
    }
    for (row, b) in &lp.le {
        add(row, ComparisonOp::Le, b);
    }
    match prob.solve() {
        Ok(sol) => {
            let point: Vec<Rat> = vars
                .iter()
                .map(|&v| {
                    BigRational::from_float(sol[v].max(0.0)).unwrap_or_else(Rat::zero)
                })
                .collect();
            let value = BigRational::from_float(sol.objective()).unwrap_or_else(Rat::zero);
            Ok(LpSolution::Optimal {
                value,
                point,
                pivots: 0,
            })
        }
        Err(minilp::Error::Infeasible) => Ok(LpSolution::Infeasible),
        Err(minilp::Error::Unbounded) => Ok(LpSolution::Unbounded),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact(n: usize) -> LpInstance {
        LpInstance::new(n, Mode::Exact)
    }

    #[test]
    fn min_x_at_least_one() {
        // minimize x s.t. x >= 1  (as -x <= -1)
        let mut lp = exact(1);
        lp.objective = vec![(0, rat(1, 1))];
        lp.le.push((vec![(0, rat(-1, 1))], rat(-1, 1)));
        match solve_lp(&lp).unwrap() {
            LpSolution::Optimal { value, .. } => assert_eq!(value, rat(1, 1)),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn infeasible_detected() {
        // minimize x s.t. x <= -1, x >= 0
        let mut lp = exact(1);
        lp.objective = vec![(0, rat(1, 1))];
        lp.le.push((vec![(0, rat(1, 1))], rat(-1, 1)));
        assert!(matches!(solve_lp(&lp).unwrap(), LpSolution::Infeasible));
    }

    #[test]
    fn absolute_value_encoding() {
        // minimize t s.t. -t <= 3/7 <= t: t - u = 3/7 is encoded as
        // 3/7 - t <= 0 and -3/7 - t <= 0
        let mut lp = exact(1);
        lp.objective = vec![(0, rat(1, 1))];
        lp.le.push((vec![(0, rat(-1, 1))], rat(-3, 7)));
        lp.le.push((vec![(0, rat(-1, 1))], rat(3, 7)));
        match solve_lp(&lp).unwrap() {
            LpSolution::Optimal { value, .. } => assert_eq!(value, rat(3, 7)),
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn unbounded_detected() {
        let mut lp = exact(1);
        lp.objective = vec![(0, rat(-1, 1))];
        assert!(matches!(solve_lp(&lp).unwrap(), LpSolution::Unbounded));
    }

    #[test]
    fn equality_constraints() {
        // minimize x + y s.t. x + 2y = 4, x <= 1 → x=1? No: min at x=0,y=2
        // value 2; with objective x + 3y, min at x=4? x<=1 binds: x=1,y=3/2
        let mut lp = exact(2);
        lp.objective = vec![(0, rat(1, 1)), (1, rat(3, 1))];
        lp.eq.push((vec![(0, rat(1, 1)), (1, rat(2, 1))], rat(4, 1)));
        match solve_lp(&lp).unwrap() {
            LpSolution::Optimal { value, point, .. } => {
                assert_eq!(value, rat(4, 1)); // x=4, y=0
                assert_eq!(point[0], rat(4, 1));
            }
            other => panic!("expected optimal, got {other:?}"),
        }
    }

    #[test]
    fn float_agrees_with_exact() {
        let mut lp = exact(3);
        lp.objective = vec![(0, rat(2, 1)), (1, rat(3, 1)), (2, rat(1, 1))];
        lp.eq.push((
            vec![(0, rat(1, 1)), (1, rat(1, 1)), (2, rat(1, 1))],
            rat(1, 1),
        ));
        lp.le.push((vec![(2, rat(1, 1))], rat(1, 3)));
        let LpSolution::Optimal { value: ve, .. } = solve_lp(&lp).unwrap() else {
            panic!()
        };
        lp.mode = Mode::Float;
        let LpSolution::Optimal { value: vf, .. } = solve_lp(&lp).unwrap() else {
            panic!()
        };
        assert!((rat_to_f64(&ve) - rat_to_f64(&vf)).abs() < 1e-9);
        // optimum: z at its cap 1/3 (cost 1), remainder on x (cost 2):
        // 2*(2/3) + 1/3 = 5/3
        assert_eq!(ve, rat(5, 3));
    }
}
