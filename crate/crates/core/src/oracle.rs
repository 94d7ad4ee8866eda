//! Brute-force ground truth.
//!
//! Nothing here calls into the condition batteries, the extension steps or
//! the detachment search; admissibility is re-derived from its definition.
//! Only the [`Multigraph`] substrate is shared.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::conditions::EnclosureParams;
use crate::decomp::{Decomposition, Enclosing};
use crate::error::{Error, Result};
use crate::mgraph::{Multigraph, Vertex};

pub const DEFAULT_SLOT_CAP: u64 = 40;
pub const ENUMERATION_EDGE_CAP: u64 = 12;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    pub nodes: u64,
    pub solutions: u64,
    pub elapsed: Duration,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Found(Enclosing),
    /// The search space was exhausted without a witness.
    NoneExists,
    BudgetExhausted,
}

impl OracleOutcome {
    pub fn is_found(&self) -> bool {
        matches!(self, OracleOutcome::Found(_))
    }
}

#[derive(Clone, Copy, Debug)]
pub struct OracleLimits {
    pub budget: u64,
    /// Largest admissible mu * m(m-1)/2.
    pub slot_cap: u64,
}

impl Default for OracleLimits {
    fn default() -> Self {
        OracleLimits {
            budget: 1_000_000_000,
            slot_cap: DEFAULT_SLOT_CAP,
        }
    }
}

/// Definition-literal r-admissibility: recompute everything per class, try
/// removing every single-multiplicity edge.
pub fn brute_force_admissible(classes: &[Multigraph], r: u32) -> bool {
    classes.iter().all(|c| naive_class_ok(c, r))
}

fn naive_degrees(g: &Multigraph) -> Vec<u32> {
    let n = g.vertex_count();
    (0..n)
        .map(|v| {
            (0..n)
                .map(|w| {
                    let c = g.multiplicity(v, w);
                    if v == w {
                        2 * c
                    } else {
                        c
                    }
                })
                .sum()
        })
        .collect()
}

fn reach(g: &Multigraph, start: Vertex, skip: Option<(Vertex, Vertex)>) -> Vec<bool> {
    let n = g.vertex_count();
    let mut seen = vec![false; n];
    seen[start] = true;
    let mut queue = vec![start];
    while let Some(x) = queue.pop() {
        for y in 0..n {
            if y == x || seen[y] {
                continue;
            }
            let mut c = g.multiplicity(x, y);
            if let Some((a, b)) = skip {
                if (a, b) == (x.min(y), x.max(y)) {
                    c -= 1;
                }
            }
            if c > 0 {
                seen[y] = true;
                queue.push(y);
            }
        }
    }
    seen
}

fn naive_class_ok(g: &Multigraph, r: u32) -> bool {
    let n = g.vertex_count();
    let deg = naive_degrees(g);
    if deg.iter().any(|&d| d > r) {
        return false;
    }
    for s in 0..n {
        let comp: Vec<Vertex> = reach(g, s, None)
            .iter()
            .enumerate()
            .filter_map(|(v, &b)| b.then_some(v))
            .collect();
        if comp[0] != s {
            continue; // visit each component once, from its smallest vertex
        }
        let very_low = comp.iter().any(|&v| deg[v] as i64 <= r as i64 - 2);
        let low = comp.iter().filter(|&&v| (deg[v] as i64) < r as i64).count();
        if !(very_low || low >= 2) {
            return false;
        }
        for &a in &comp {
            for &b in &comp {
                if a < b && g.multiplicity(a, b) == 1 {
                    let side_a = reach(g, a, Some((a, b)));
                    if side_a[b] {
                        continue; // not a cutedge
                    }
                    let side_b = reach(g, b, Some((a, b)));
                    for side in [&side_a, &side_b] {
                        let has_low = (0..n).any(|v| side[v] && deg[v] < r);
                        if !has_low {
                            return false;
                        }
                    }
                }
            }
        }
    }
    true
}

/// Iterator over assignments of the edges of lambda*K_n to k classes.
pub struct DecompositionStream {
    n: usize,
    base: Multigraph,
    k: usize,
    edges: Vec<(Vertex, Vertex)>,
    digits: Vec<usize>,
    done: bool,
    seen: Option<BTreeSet<Vec<Vec<(Vertex, Vertex)>>>>,
}

impl DecompositionStream {
    fn advance(&mut self) {
        for d in self.digits.iter_mut().rev() {
            *d += 1;
            if *d < self.k {
                return;
            }
            *d = 0;
        }
        self.done = true;
    }
}

impl Iterator for DecompositionStream {
    type Item = Decomposition;

    fn next(&mut self) -> Option<Decomposition> {
        while !self.done {
            let mut classes = vec![Multigraph::empty(self.n); self.k];
            for (&(u, v), &c) in self.edges.iter().zip(&self.digits) {
                classes[c].add_edges(u, v, 1).expect("valid edge");
            }
            self.advance();
            if let Some(seen) = &mut self.seen {
                let mut key: Vec<Vec<(Vertex, Vertex)>> =
                    classes.iter().map(|c| c.edge_list()).collect();
                key.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
                if !seen.insert(key) {
                    continue;
                }
            }
            return Some(
                Decomposition::new(self.base.clone(), classes).expect("partition by construction"),
            );
        }
        None
    }
}

/// Every assignment of the edges of lambda*K_n to `k` classes, in a fixed
/// order. With `dedup`, assignments equal up to a permutation of the classes
/// are reported once.
pub fn enumerate_decompositions(
    n: usize,
    lambda: u32,
    k: usize,
    dedup: bool,
) -> Result<DecompositionStream> {
    let total = lambda as u64 * (n as u64 * n.saturating_sub(1) as u64 / 2);
    if total > ENUMERATION_EDGE_CAP {
        return Err(Error::CapExceeded(format!(
            "{total} edges exceed the enumeration cap of {ENUMERATION_EDGE_CAP}"
        )));
    }
    if k == 0 {
        return Err(Error::InvalidParams("k must be positive".into()));
    }
    let base = Multigraph::complete(n, lambda);
    let edges = base.edge_list();
    Ok(DecompositionStream {
        n,
        base,
        k,
        digits: vec![0; edges.len()],
        edges,
        done: false,
        seen: dedup.then(BTreeSet::new),
    })
}

/// A seeded random r-admissible decomposition of lambda*K_n into `k` classes,
/// by random assignment followed by local repair.
pub fn random_admissible(n: usize, lambda: u32, k: usize, r: u32, seed: u64) -> Result<Decomposition> {
    use crate::decomp::{admissibility_violation, Bullet};

    if k == 0 || r < 2 {
        return Err(Error::InvalidParams("need k >= 1 and r >= 2".into()));
    }
    let base = Multigraph::complete(n, lambda);
    let edges = base.edge_list();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let repair_steps = 50 * edges.len().max(1);
    for _restart in 0..40 {
        let mut classes = vec![Multigraph::empty(n); k];
        for &(u, v) in &edges {
            classes[rng.gen_range(0..k)].add_edges(u, v, 1)?;
        }
        for _ in 0..repair_steps {
            let Some(viol) = admissibility_violation(&classes, r) else {
                return Decomposition::new(base, classes);
            };
            let class = &classes[viol.class];
            let candidates: Vec<(Vertex, Vertex)> = match &viol.bullet {
                Bullet::DegreeCap { vertex, .. } => class
                    .edge_list()
                    .into_iter()
                    .filter(|&(a, b)| a == *vertex || b == *vertex)
                    .collect(),
                Bullet::LowDegree { component } => class
                    .edge_list()
                    .into_iter()
                    .filter(|(a, _)| component.contains(a))
                    .collect(),
                Bullet::Cutedge { side, .. } => class
                    .edge_list()
                    .into_iter()
                    .filter(|(a, b)| side.contains(a) || side.contains(b))
                    .collect(),
            };
            let &(u, v) = candidates.choose(&mut rng).expect("violation involves an edge");
            if k == 1 {
                break;
            }
            let mut to = rng.gen_range(0..k - 1);
            if to >= viol.class {
                to += 1;
            }
            classes[viol.class].remove_edges(u, v, 1)?;
            classes[to].add_edges(u, v, 1)?;
        }
    }
    Err(Error::Precondition(format!(
        "no {r}-admissible decomposition of {lambda}K_{n} into {k} classes found after retries"
    )))
}

struct Slot {
    u: Vertex,
    v: Vertex,
    /// First free copy of its pair: colors restart from 0.
    first_of_pair: bool,
    /// Vertices `0..completed` have all their edges colored once this slot
    /// and everything before it is assigned.
    completed: usize,
}

struct EncloseSearch {
    m: usize,
    r: u32,
    classes: Vec<Multigraph>,
    deg: Vec<Vec<u32>>,
    slots: Vec<Slot>,
    colors: Vec<usize>,
    nodes: u64,
    budget: u64,
    out_of_budget: bool,
}

impl EncloseSearch {
    fn closed_component_cut(&self, completed: usize) -> bool {
        if completed == 0 || completed >= self.m {
            return false;
        }
        self.classes.iter().any(|c| {
            c.components()
                .iter()
                .any(|comp| comp.len() < self.m && comp.iter().all(|&v| v < completed))
        })
    }

    fn dfs(&mut self, idx: usize) -> bool {
        if idx == self.slots.len() {
            return self
                .classes
                .iter()
                .all(|c| c.is_two_edge_connected_spanning());
        }
        let (u, v, first, completed) = {
            let s = &self.slots[idx];
            (s.u, s.v, s.first_of_pair, s.completed)
        };
        let lo = if first { 0 } else { self.colors[idx - 1] };
        for c in lo..self.classes.len() {
            if self.deg[c][u] >= self.r || self.deg[c][v] >= self.r {
                continue;
            }
            self.nodes += 1;
            if self.nodes > self.budget {
                self.out_of_budget = true;
                return false;
            }
            self.colors[idx] = c;
            self.classes[c].add_edges(u, v, 1).expect("valid");
            self.deg[c][u] += 1;
            self.deg[c][v] += 1;
            let ok = !self.closed_component_cut(completed) && self.dfs(idx + 1);
            if ok {
                return true;
            }
            self.classes[c].remove_edges(u, v, 1).expect("present");
            self.deg[c][u] -= 1;
            self.deg[c][v] -= 1;
            if self.out_of_budget {
                return false;
            }
        }
        false
    }
}

/// Exhaustively decides whether `g` (a decomposition of lambda*K_n) is
/// enclosed in some 2-edge-connected r-factorization of mu*K_m.
pub fn brute_force_enclose(
    g: &Decomposition,
    params: &EnclosureParams,
    limits: OracleLimits,
) -> Result<(OracleOutcome, SearchStats)> {
    let start = Instant::now();
    let (n, m, mu, r, k) = (params.n, params.m, params.mu, params.r, params.k);
    let slots_total = mu as u64 * (m as u64 * (m as u64 - 1) / 2);
    if slots_total > limits.slot_cap {
        return Err(Error::CapExceeded(format!(
            "{slots_total} edge slots exceed the cap of {}",
            limits.slot_cap
        )));
    }
    if g.k() != k || g.vertex_count() != n {
        return Err(Error::Precondition(
            "decomposition does not match the parameters".into(),
        ));
    }
    for (pair, c) in g.base().edges() {
        if pair.is_loop() || c > mu {
            return Err(Error::Precondition(format!(
                "pair {pair} carries {c} edges, more than mu = {mu}"
            )));
        }
    }

    let classes: Vec<Multigraph> = g.classes().iter().map(|c| c.widened(m)).collect();
    let deg: Vec<Vec<u32>> = classes.iter().map(|c| c.degrees()).collect();
    let mut slots = Vec::new();
    let mut free_at = vec![0u32; m];
    for u in 0..m {
        for v in u + 1..m {
            let fixed = if v < n { g.base().multiplicity(u, v) } else { 0 };
            for copy in 0..mu - fixed {
                slots.push(Slot {
                    u,
                    v,
                    first_of_pair: copy == 0,
                    completed: 0,
                });
                free_at[u] += 1;
                free_at[v] += 1;
            }
        }
        if let Some(last) = slots.last_mut() {
            last.completed = u + 1;
        }
    }
    let mut stats = SearchStats::default();

    // every vertex needs exactly r - deg more edges of each color
    let balanced = (0..m).all(|v| {
        let need: i64 = deg.iter().map(|d| r as i64 - d[v] as i64).sum();
        deg.iter().all(|d| d[v] <= r) && need == free_at[v] as i64
    });
    if !balanced {
        stats.elapsed = start.elapsed();
        return Ok((OracleOutcome::NoneExists, stats));
    }

    let mut search = EncloseSearch {
        m,
        r,
        colors: vec![0; slots.len()],
        classes,
        deg,
        slots,
        nodes: 0,
        budget: limits.budget,
        out_of_budget: false,
    };
    let found = search.dfs(0);
    stats.nodes = search.nodes;
    stats.elapsed = start.elapsed();
    let outcome = if found {
        stats.solutions = 1;
        let outer = Decomposition::new(Multigraph::complete(m, mu), search.classes)?;
        OracleOutcome::Found(Enclosing::new(outer))
    } else if search.out_of_budget {
        OracleOutcome::BudgetExhausted
    } else {
        OracleOutcome::NoneExists
    };
    Ok((outcome, stats))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decomp::verify_enclosing;

    fn mg(n: usize, edges: &[(usize, usize)]) -> Multigraph {
        Multigraph::from_edges(n, edges.iter().copied()).unwrap()
    }

    #[test]
    fn naive_admissibility_examples() {
        assert!(!brute_force_admissible(&[mg(3, &[(0, 1), (1, 2), (0, 2)])], 2));
        assert!(brute_force_admissible(&[mg(4, &[(0, 1), (2, 3)])], 2));
        assert!(!brute_force_admissible(&[mg(2, &[(0, 1), (0, 1)])], 2));
        assert!(brute_force_admissible(&[mg(3, &[(0, 1), (0, 1)])], 3));
    }

    #[test]
    fn enumeration_counts() {
        assert_eq!(enumerate_decompositions(3, 1, 2, false).unwrap().count(), 8);
        assert_eq!(enumerate_decompositions(3, 1, 3, false).unwrap().count(), 27);
        // set partitions of three labelled edges into at most three blocks
        assert_eq!(enumerate_decompositions(3, 1, 3, true).unwrap().count(), 5);
        let admissible = enumerate_decompositions(3, 1, 3, true)
            .unwrap()
            .filter(|d| d.is_admissible(2))
            .count();
        assert_eq!(admissible, 4);
        assert!(enumerate_decompositions(6, 1, 2, false).is_err());
    }

    #[test]
    fn random_admissible_properties() {
        for seed in 0..20 {
            let d = random_admissible(5, 2, 6, 3, seed).unwrap();
            assert!(d.is_admissible(3));
            assert_eq!(d, random_admissible(5, 2, 6, 3, seed).unwrap());
        }
        let d = random_admissible(4, 1, 6, 2, 3).unwrap();
        assert!(d.is_admissible(2));
        assert!(random_admissible(2, 3, 1, 2, 0).is_err());
    }

    #[test]
    fn oracle_finds_b_instance() {
        let g = Decomposition::new(
            Multigraph::complete(3, 1),
            vec![mg(3, &[(0, 1)]), mg(3, &[(0, 2)]), mg(3, &[(1, 2)]), mg(3, &[])],
        )
        .unwrap();
        let params = EnclosureParams::new(3, 5, 1, 2, 2, 4).unwrap();
        let (outcome, stats) = brute_force_enclose(&g, &params, OracleLimits::default()).unwrap();
        let OracleOutcome::Found(enc) = outcome else {
            panic!("expected a witness")
        };
        assert!(stats.nodes > 0);
        assert!(verify_enclosing(&g, &enc, &params).unwrap().is_valid());

        let g3 = Decomposition::new(
            Multigraph::complete(3, 1),
            vec![mg(3, &[(0, 1)]), mg(3, &[(0, 2)]), mg(3, &[(1, 2)])],
        )
        .unwrap();
        let params3 = params.with_k(3).unwrap();
        let (outcome, _) = brute_force_enclose(&g3, &params3, OracleLimits::default()).unwrap();
        assert_eq!(outcome, OracleOutcome::NoneExists);
    }

    #[test]
    fn oracle_identity_case() {
        let c1 = mg(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let c2 = mg(5, &[(0, 2), (2, 4), (4, 1), (1, 3), (3, 0)]);
        let d = Decomposition::new(Multigraph::complete(5, 1), vec![c1, c2]).unwrap();
        let params = EnclosureParams::new(5, 5, 1, 1, 2, 2).unwrap();
        let (outcome, _) = brute_force_enclose(&d, &params, OracleLimits::default()).unwrap();
        assert_eq!(outcome, OracleOutcome::Found(Enclosing::new(d)));
    }

    #[test]
    fn oracle_limits() {
        let g = enumerate_decompositions(3, 1, 4, false).unwrap().next().unwrap();
        let params = EnclosureParams::new(3, 9, 1, 2, 2, 8).unwrap();
        let g8 = Decomposition::new(
            g.base().clone(),
            (0..8).map(|i| if i < 4 { g.class(i).clone() } else { Multigraph::empty(3) }).collect(),
        )
        .unwrap();
        assert!(matches!(
            brute_force_enclose(&g8, &params, OracleLimits::default()),
            Err(Error::CapExceeded(_))
        ));
        let g = Decomposition::new(
            Multigraph::complete(3, 1),
            vec![mg(3, &[(0, 1)]), mg(3, &[(0, 2)]), mg(3, &[(1, 2)]), mg(3, &[])],
        )
        .unwrap();
        let params = EnclosureParams::new(3, 5, 1, 2, 2, 4).unwrap();
        let limits = OracleLimits {
            budget: 1,
            ..OracleLimits::default()
        };
        let (outcome, _) = brute_force_enclose(&g, &params, limits).unwrap();
        assert_eq!(outcome, OracleOutcome::BudgetExhausted);
    }
}
