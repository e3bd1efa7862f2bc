//! Finite groups with a multiplication oracle, and their Cayley graphs.

use std::collections::{HashMap, VecDeque};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Descriptor accepted by [`make_group`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupSpec {
    Cyclic(u64),
    Product(Box<GroupSpec>, Box<GroupSpec>),
    /// SL(2, p) generated by the two elementary matrices and their inverses.
    Sl2(u64),
    /// Closure of a set of permutations (0-based images).
    PermGens(Vec<Vec<u16>>),
}

impl GroupSpec {
    pub fn name(&self) -> String {
        match self {
            GroupSpec::Cyclic(m) => format!("c{m}"),
            GroupSpec::Product(a, b) => format!("{}x{}", a.name(), b.name()),
            GroupSpec::Sl2(p) => format!("sl2_{p}"),
            GroupSpec::PermGens(_) => "permgroup".to_string(),
        }
    }

    /// Parses `cyclic:5`, `sl2:7`.
    pub fn parse(s: &str) -> Result<GroupSpec> {
        let (kind, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("bad group descriptor {s:?}")))?;
        let n: u64 = arg
            .parse()
            .map_err(|_| Error::invalid(format!("bad group parameter {arg:?}")))?;
        match kind {
            "cyclic" => Ok(GroupSpec::Cyclic(n)),
            "sl2" => Ok(GroupSpec::Sl2(n)),
            _ => Err(Error::invalid(format!("unknown group kind {kind:?}"))),
        }
    }
}

type Mat = [u64; 4]; // row-major 2x2 over Z/p

#[derive(Debug, Clone)]
enum Backend {
    /// (Z/m_1) x ... x (Z/m_d), element index in mixed radix.
    Torus { moduli: Vec<u64> },
    Product { left: Box<FiniteGroup>, right: Box<FiniteGroup> },
    Sl2 { p: u64, elems: Vec<Mat>, index: HashMap<Mat, usize> },
    Perms { elems: Vec<Vec<u16>>, index: HashMap<Vec<u16>, usize> },
}

/// A finite group presented through a total multiplication oracle plus a
/// distinguished symmetric generating set.
#[derive(Debug, Clone)]
pub struct FiniteGroup {
    order: usize,
    generators: Vec<usize>,
    backend: Backend,
    name: String,
}

fn mat_mul(p: u64, a: &Mat, b: &Mat) -> Mat {
    [
        (a[0] * b[0] + a[1] * b[2]) % p,
        (a[0] * b[1] + a[1] * b[3]) % p,
        (a[2] * b[0] + a[3] * b[2]) % p,
        (a[2] * b[1] + a[3] * b[3]) % p,
    ]
}

fn mat_inv(p: u64, a: &Mat) -> Mat {
    // determinant 1, so the inverse is the adjugate
    [a[3] % p, (p - a[1] % p) % p, (p - a[2] % p) % p, a[0] % p]
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

impl FiniteGroup {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn generators(&self) -> &[usize] {
        &self.generators
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        match &self.backend {
            Backend::Torus { moduli } => {
                let xa = torus_decode(moduli, a);
                let xb = torus_decode(moduli, b);
                let sum: Vec<u64> = xa
                    .iter()
                    .zip(&xb)
                    .zip(moduli)
                    .map(|((x, y), m)| (x + y) % m)
                    .collect();
                torus_encode(moduli, &sum)
            }
            Backend::Product { left, right } => {
                let ro = right.order;
                let (a1, a2) = (a / ro, a % ro);
                let (b1, b2) = (b / ro, b % ro);
                left.mul(a1, b1) * ro + right.mul(a2, b2)
            }
            Backend::Sl2 { p, elems, index } => index[&mat_mul(*p, &elems[a], &elems[b])],
            Backend::Perms { elems, index } => {
                let pa = &elems[a];
                let pb = &elems[b];
                // (a*b)(i) = a(b(i)): apply b first
                let comp: Vec<u16> = (0..pa.len()).map(|i| pa[pb[i] as usize]).collect();
                index[&comp]
            }
        }
    }

    pub fn inv(&self, a: usize) -> usize {
        match &self.backend {
            Backend::Torus { moduli } => {
                let xa = torus_decode(moduli, a);
                let neg: Vec<u64> = xa.iter().zip(moduli).map(|(x, m)| (m - x % m) % m).collect();
                torus_encode(moduli, &neg)
            }
            Backend::Product { left, right } => {
                let ro = right.order;
                left.inv(a / ro) * ro + right.inv(a % ro)
            }
            Backend::Sl2 { p, elems, index } => index[&mat_inv(*p, &elems[a])],
            Backend::Perms { elems, index } => {
                let pa = &elems[a];
                let mut inv = vec![0u16; pa.len()];
                for (i, &img) in pa.iter().enumerate() {
                    inv[img as usize] = i as u16;
                }
                index[&inv]
            }
        }
    }

    /// Torus coordinates of an element, when the backend is a torus.
    pub fn torus_coords(&self, a: usize) -> Option<Vec<u64>> {
        match &self.backend {
            Backend::Torus { moduli } => Some(torus_decode(moduli, a)),
            _ => None,
        }
    }

    pub fn torus_element(&self, coords: &[u64]) -> Option<usize> {
        match &self.backend {
            Backend::Torus { moduli } => {
                let red: Vec<u64> = coords.iter().zip(moduli).map(|(c, m)| c % m).collect();
                Some(torus_encode(moduli, &red))
            }
            _ => None,
        }
    }

    /// The SL2 matrix of an element, when the backend is SL2.
    pub fn sl2_matrix(&self, a: usize) -> Option<[u64; 4]> {
        match &self.backend {
            Backend::Sl2 { elems, .. } => Some(elems[a]),
            _ => None,
        }
    }

    /// Group-law spot check: exhaustive for orders <= 512, sampled above.
    pub fn verify_laws(&self) -> Result<()> {
        let e = self.identity();
        let n = self.order;
        let check = |a: usize, b: usize, c: usize| -> Result<()> {
            if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                return Err(Error::invalid(format!("associativity fails at ({a},{b},{c})")));
            }
            Ok(())
        };
        for a in 0..n {
            if self.mul(a, e) != a || self.mul(e, a) != a {
                return Err(Error::invalid(format!("identity law fails at {a}")));
            }
            let ai = self.inv(a);
            if self.mul(a, ai) != e || self.mul(ai, a) != e {
                return Err(Error::invalid(format!("inverse law fails at {a}")));
            }
        }
        if n <= 512 {
            for a in 0..n {
                for b in 0..n {
                    for c in [0, b, n - 1] {
                        check(a, b, c)?;
                    }
                }
            }
        } else {
            let mut s = 0x9e3779b97f4a7c15u64;
            for _ in 0..5000 {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let a = (s >> 33) as usize % n;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let b = (s >> 33) as usize % n;
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                let c = (s >> 33) as usize % n;
                check(a, b, c)?;
            }
        }
        // generator symmetry and generation
        for &g in &self.generators {
            if !self.generators.contains(&self.inv(g)) {
                return Err(Error::invalid(format!("generator set not symmetric at {g}")));
            }
        }
        let reached = self.generated_closure();
        if reached.iter().filter(|&&r| r).count() != n {
            return Err(Error::invalid("generators do not generate the group"));
        }
        Ok(())
    }

    fn generated_closure(&self) -> Vec<bool> {
        let mut seen = vec![false; self.order];
        seen[self.identity()] = true;
        let mut queue = VecDeque::from([self.identity()]);
        while let Some(x) = queue.pop_front() {
            for &g in &self.generators {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    queue.push_back(y);
                }
            }
        }
        seen
    }
}

fn torus_decode(moduli: &[u64], mut idx: usize) -> Vec<u64> {
    let mut coords = vec![0u64; moduli.len()];
    for k in (0..moduli.len()).rev() {
        coords[k] = (idx as u64) % moduli[k];
        idx /= moduli[k] as usize;
    }
    coords
}

fn torus_encode(moduli: &[u64], coords: &[u64]) -> usize {
    let mut idx = 0usize;
    for (c, m) in coords.iter().zip(moduli) {
        idx = idx * (*m as usize) + *c as usize;
    }
    idx
}

/// Builds the torus (Z/m_1) x ... x (Z/m_d) with generators +-e_k.
pub fn torus_group(moduli: &[u64]) -> Result<FiniteGroup> {
    if moduli.is_empty() || moduli.iter().any(|&m| m == 0) {
        return Err(Error::invalid("torus moduli must be positive"));
    }
    let order: usize = moduli.iter().map(|&m| m as usize).product();
    let mut generators = Vec::new();
    for k in 0..moduli.len() {
        for sign in [1i64, -1] {
            let mut coords = vec![0u64; moduli.len()];
            coords[k] = if sign > 0 { 1 % moduli[k] } else { (moduli[k] - 1) % moduli[k] };
            let idx = torus_encode(moduli, &coords);
            if idx != 0 && !generators.contains(&idx) {
                generators.push(idx);
            }
        }
    }
    let name = if moduli.len() == 1 {
        format!("c{}", moduli[0])
    } else {
        format!("torus{}d{}", moduli[0], moduli.len())
    };
    Ok(FiniteGroup {
        order,
        generators,
        backend: Backend::Torus {
            moduli: moduli.to_vec(),
        },
        name,
    })
}

const DEFAULT_CLOSURE_BOUND: usize = 1_000_000;

/// Builds a group from a descriptor.
pub fn make_group(spec: &GroupSpec) -> Result<FiniteGroup> {
    make_group_bounded(spec, DEFAULT_CLOSURE_BOUND)
}

pub fn make_group_bounded(spec: &GroupSpec, closure_bound: usize) -> Result<FiniteGroup> {
    match spec {
        GroupSpec::Cyclic(m) => torus_group(&[*m]),
        GroupSpec::Product(a, b) => {
            let left = make_group_bounded(a, closure_bound)?;
            let right = make_group_bounded(b, closure_bound)?;
            let ro = right.order;
            let mut generators: Vec<usize> =
                left.generators.iter().map(|&g| g * ro).collect();
            generators.extend(right.generators.iter().copied());
            let order = left.order * right.order;
            let name = format!("{}x{}", left.name, right.name);
            Ok(FiniteGroup {
                order,
                generators,
                backend: Backend::Product {
                    left: Box::new(left),
                    right: Box::new(right),
                },
                name,
            })
        }
        GroupSpec::Sl2(p) => {
            if !is_prime(*p) || *p > 31 {
                return Err(Error::invalid(format!("sl2 parameter {p} must be a prime <= 31")));
            }
            let p = *p;
            let a: Mat = [1, 1, 0, 1];
            let b: Mat = [1, 0, 1, 1];
            let gens_m = [a, b, mat_inv(p, &a), mat_inv(p, &b)];
            let e: Mat = [1, 0, 0, 1];
            let mut elems = vec![e];
            let mut index = HashMap::from([(e, 0usize)]);
            let mut queue = VecDeque::from([e]);
            while let Some(x) = queue.pop_front() {
                for g in &gens_m {
                    let y = mat_mul(p, &x, g);
                    if !index.contains_key(&y) {
                        index.insert(y, elems.len());
                        elems.push(y);
                        queue.push_back(y);
                    }
                }
            }
            let order = elems.len();
            let mut generators = Vec::new();
            for g in &gens_m {
                let idx = index[g];
                if idx != 0 && !generators.contains(&idx) {
                    generators.push(idx);
                }
            }
            Ok(FiniteGroup {
                order,
                generators,
                backend: Backend::Sl2 { p, elems, index },
                name: format!("sl2_{p}"),
            })
        }
        GroupSpec::PermGens(perms) => {
            if perms.is_empty() {
                return Err(Error::invalid("perm-gens needs at least one permutation"));
            }
            let degree = perms[0].len();
            for p in perms {
                if p.len() != degree {
                    return Err(Error::invalid("permutations must share a degree"));
                }
                let mut seen = vec![false; degree];
                for &i in p {
                    if (i as usize) >= degree || seen[i as usize] {
                        return Err(Error::invalid("not a permutation"));
                    }
                    seen[i as usize] = true;
                }
            }
            let mut gens_p: Vec<Vec<u16>> = perms.clone();
            for p in perms {
                let mut inv = vec![0u16; degree];
                for (i, &img) in p.iter().enumerate() {
                    inv[img as usize] = i as u16;
                }
                if !gens_p.contains(&inv) {
                    gens_p.push(inv);
                }
            }
            let e: Vec<u16> = (0..degree as u16).collect();
            let mut elems = vec![e.clone()];
            let mut index = HashMap::from([(e, 0usize)]);
            let mut queue = VecDeque::from([0usize]);
            while let Some(xi) = queue.pop_front() {
                for g in &gens_p {
                    let x = &elems[xi];
                    let comp: Vec<u16> = (0..degree).map(|i| x[g[i] as usize]).collect();
                    if !index.contains_key(&comp) {
                        if elems.len() >= closure_bound {
                            return Err(Error::size_bound(format!(
                                "permutation closure exceeds the bound of {closure_bound} elements"
                            )));
                        }
                        index.insert(comp.clone(), elems.len());
                        elems.push(comp);
                        queue.push_back(elems.len() - 1);
                    }
                }
            }
            let order = elems.len();
            let mut generators = Vec::new();
            for g in &gens_p {
                let idx = index[g];
                if idx != 0 && !generators.contains(&idx) {
                    generators.push(idx);
                }
            }
            Ok(FiniteGroup {
                order,
                generators,
                backend: Backend::Perms { elems, index },
                name: "permgroup".to_string(),
            })
        }
    }
}

/// Cayley graph with respect to the group's generating set.
pub fn cayley_graph(g: &FiniteGroup) -> Result<Graph> {
    for &s in g.generators() {
        if s == g.identity() {
            return Err(Error::invalid("identity element in generating set"));
        }
        if !g.generators().contains(&g.inv(s)) {
            return Err(Error::invalid("generating set is not symmetric"));
        }
    }
    let n = g.order();
    let mut edges = Vec::new();
    for x in 0..n {
        for &s in g.generators() {
            let y = g.mul(x, s);
            let (a, b) = if x < y { (x as u32, y as u32) } else { (y as u32, x as u32) };
            if a != b && !edges.contains(&(a, b)) {
                edges.push((a, b));
            }
        }
    }
    let graph = Graph::from_edges(n, &edges, Some(format!("cay_{}", g.name())))
        .map_err(|e| Error::invalid(format!("generating set does not generate: {e}")))?;
    Ok(graph.mark_vertex_transitive())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, girth, GraphSpec};
    use crate::metric::bfs_metric;

    #[test]
    fn cyclic_order() {
        let g = make_group(&GroupSpec::Cyclic(5)).unwrap();
        assert_eq!(g.order(), 5);
        g.verify_laws().unwrap();
    }

    #[test]
    fn klein_four() {
        let g = make_group(&GroupSpec::Product(
            Box::new(GroupSpec::Cyclic(2)),
            Box::new(GroupSpec::Cyclic(2)),
        ))
        .unwrap();
        assert_eq!(g.order(), 4);
        g.verify_laws().unwrap();
    }

    #[test]
    fn sl2_3_order() {
        let g = make_group(&GroupSpec::Sl2(3)).unwrap();
        // closure enumeration must agree with p(p^2-1)
        assert_eq!(g.order(), 24);
        g.verify_laws().unwrap();
    }

    #[test]
    fn sl2_orders_match_formula() {
        for p in [3u64, 5, 7] {
            let g = make_group(&GroupSpec::Sl2(p)).unwrap();
            assert_eq!(g.order() as u64, p * (p * p - 1));
        }
    }

    #[test]
    fn sl2_rejects_nonprime() {
        assert!(make_group(&GroupSpec::Sl2(4)).is_err());
        assert!(make_group(&GroupSpec::Sl2(37)).is_err());
    }

    #[test]
    fn perm_closure_bound() {
        // 3-cycle generates C3; bound of 2 must trip
        let res = make_group_bounded(&GroupSpec::PermGens(vec![vec![1, 2, 0]]), 2);
        assert!(matches!(res, Err(Error::SizeBound(_))));
    }

    #[test]
    fn cayley_cyclic6_is_c6() {
        let g = make_group(&GroupSpec::Cyclic(6)).unwrap();
        let cay = cayley_graph(&g).unwrap();
        let c6 = build_graph(&GraphSpec::Cycle(6)).unwrap();
        assert_eq!(cay.vertex_count(), 6);
        assert_eq!(cay.edge_count(), 6);
        // canonical relabeling along the cycle
        let m = bfs_metric(&cay).unwrap();
        let mc = bfs_metric(&c6).unwrap();
        assert_eq!(m.diameter(), mc.diameter());
        assert_eq!(girth(&cay), girth(&c6));
    }

    #[test]
    fn cayley_klein_is_c4() {
        let g = make_group(&GroupSpec::Product(
            Box::new(GroupSpec::Cyclic(2)),
            Box::new(GroupSpec::Cyclic(2)),
        ))
        .unwrap();
        let cay = cayley_graph(&g).unwrap();
        assert_eq!(cay.vertex_count(), 4);
        assert_eq!(cay.edge_count(), 4);
        assert_eq!(girth(&cay), girth(&build_graph(&GraphSpec::Cycle(4)).unwrap()));
    }

    #[test]
    fn cayley_sl2_3() {
        let g = make_group(&GroupSpec::Sl2(3)).unwrap();
        let cay = cayley_graph(&g).unwrap();
        assert_eq!(cay.vertex_count(), 24);
        assert!((0..24).all(|v| cay.degree(v) == 4));
        assert!(bfs_metric(&cay).is_ok()); // connected
    }
}
