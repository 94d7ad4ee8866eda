//! Amalgamation and detachment.
//!
//! A complete decomposition of mu*K_n satisfying the enclosing conditions is
//! extended by a single vertex x0 standing for the m - n missing vertices.
//! Detachment splits x0 back into m - n vertices of degree r in every class.
//!
//! The split is done one new vertex at a time. Each step picks, for every old
//! vertex x_j, the colors of the mu edges joining it to the new vertex, and
//! accepts the choice only if the grown decomposition still satisfies the
//! enclosing conditions for the larger vertex count. Those conditions are
//! sufficient, so an accepted step never has to be undone.

use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conditions::{check_a_prime, EnclosureParams};
use crate::decomp::{admissibility_violation, Decomposition};
use crate::error::{Error, Result};
use crate::mgraph::{Multigraph, Pair, Vertex};

pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// A multigraph with loops, a multiplicity g(v) >= 1 per vertex and a
/// decomposition of the multigraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triad {
    graph: Multigraph,
    g: Vec<u32>,
    decomposition: Decomposition,
}

impl Triad {
    pub fn new(g: Vec<u32>, decomposition: Decomposition) -> Result<Self> {
        let graph = decomposition.base().clone();
        if g.len() != graph.vertex_count() {
            return Err(Error::VertexCountMismatch {
                expected: graph.vertex_count(),
                found: g.len(),
            });
        }
        if let Some(v) = g.iter().position(|&x| x == 0) {
            return Err(Error::Precondition(format!("g({v}) = 0")));
        }
        if let Some(v) = (0..g.len()).find(|&v| g[v] == 1 && graph.multiplicity(v, v) > 0) {
            return Err(Error::Precondition(format!(
                "vertex {v} has g = 1 and carries a loop"
            )));
        }
        Ok(Triad {
            graph,
            g,
            decomposition,
        })
    }

    pub fn graph(&self) -> &Multigraph {
        &self.graph
    }

    pub fn g(&self, v: Vertex) -> u32 {
        self.g[v]
    }

    pub fn g_values(&self) -> &[u32] {
        &self.g
    }

    /// Number of vertex pairs between the fibres of v and w.
    pub fn g_pair(&self, v: Vertex, w: Vertex) -> u64 {
        let (a, b) = (self.g[v] as u64, self.g[w] as u64);
        if v == w {
            a * a.saturating_sub(1) / 2
        } else {
            a * b
        }
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    pub fn vertex_count(&self) -> usize {
        self.g.len()
    }
}

fn inconsistency(msg: String) -> Error {
    Error::Inconsistency(msg)
}

/// Adds x0 (index n) with g(x0) = m - n, giving color i the r - d_i(x_j)
/// missing edges at each x_j and |E_i| - p loops.
pub fn build_amalgamated_triad(a: &Decomposition, params: &EnclosureParams) -> Result<Triad> {
    let (n, m, r, mu) = (params.n, params.m, params.r, params.mu);
    if m <= n {
        return Err(Error::Precondition(format!(
            "m = {m} leaves nothing to detach from n = {n}"
        )));
    }
    check_a_prime(a, params)?.require()?;
    let p = params
        .p_integer()
        .ok_or_else(|| inconsistency(format!("p = {} is not an integer", params.p)))?;
    let x0 = n;
    let t = (m - n) as u32;
    let mut classes = Vec::with_capacity(a.k());
    for (i, c) in a.classes().iter().enumerate() {
        let mut w = c.widened(n + 1);
        for j in 0..n {
            w.add_edges(x0, j, r - c.degree(j))?;
        }
        let loops = c.edge_count() as i64 - p;
        if loops < 0 {
            return Err(inconsistency(format!("class {i} is smaller than p")));
        }
        w.add_edges(x0, x0, loops as u32)?;
        if w.degree(x0) != r * t {
            return Err(inconsistency(format!(
                "class {i} has degree {} at x0, expected r(m-n) = {}",
                w.degree(x0),
                r * t
            )));
        }
        if let Some(j) = (0..n).find(|&j| w.degree(j) != r) {
            return Err(inconsistency(format!("class {i} has degree {} at {j}", w.degree(j))));
        }
        classes.push(w);
    }
    let d = Decomposition::from_classes(n + 1, classes)?;
    let base = d.base();
    if let Some(j) = (0..n).find(|&j| base.multiplicity(x0, j) != mu * t) {
        return Err(inconsistency(format!(
            "multiplicity of x0 and {j} is {}, expected mu(m-n) = {}",
            base.multiplicity(x0, j),
            mu * t
        )));
    }
    let loops = base.multiplicity(x0, x0) as u64;
    let expect = mu as u64 * t as u64 * (t as u64 - 1) / 2;
    if loops != expect {
        return Err(inconsistency(format!(
            "x0 carries {loops} loops, expected mu(m-n)(m-n-1)/2 = {expect}"
        )));
    }
    let mut g = vec![1; n];
    g.push(t);
    Triad::new(g, d)
}

/// Every class is 2-edge-connected spanning with degree at least 2g(v).
pub fn is_good_triad(t: &Triad) -> bool {
    t.decomposition.classes().iter().all(|c| {
        c.is_two_edge_connected_spanning() && (0..t.vertex_count()).all(|v| c.degree(v) >= 2 * t.g[v])
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct DetachStats {
    pub nodes: u64,
    pub restarts: u32,
    pub steps: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DetachmentWitness {
    pub result: Decomposition,
    /// Triad vertex each result vertex came from.
    pub vertex_map: Vec<Vertex>,
    pub stats: DetachStats,
}

/// Lower/upper bounded feasibility of a bipartite transportation problem:
/// every row sends exactly `row_supply`, column i receives within
/// `col_bounds[i]`, and cell (j, i) carries at most `caps[j][i]`.
fn transport_feasible(row_supply: u32, caps: &[Vec<u32>], col_bounds: &[(u32, u32)]) -> bool {
    let rows = caps.len();
    let cols = col_bounds.len();
    let total_supply = row_supply as u64 * rows as u64;
    let lo_sum: u64 = col_bounds.iter().map(|b| b.0 as u64).sum();
    let hi_sum: u64 = col_bounds.iter().map(|b| b.1 as u64).sum();
    if total_supply < lo_sum || total_supply > hi_sum {
        return false;
    }
    // circulation with t -> s unbounded; lower bounds become demands met
    // from a super source ss and drained into a super sink tt
    let s = 0;
    let row0 = 1;
    let col0 = row0 + rows;
    let t = col0 + cols;
    let ss = t + 1;
    let tt = t + 2;
    let mut cap = vec![vec![0i64; t + 3]; t + 3];
    for (j, row) in caps.iter().enumerate() {
        cap[ss][row0 + j] = row_supply as i64;
        for (i, &c) in row.iter().enumerate() {
            cap[row0 + j][col0 + i] = c.min(row_supply) as i64;
        }
    }
    cap[s][tt] = total_supply as i64;
    for (i, &(lo, hi)) in col_bounds.iter().enumerate() {
        if lo > hi {
            return false;
        }
        cap[col0 + i][t] = (hi - lo) as i64;
        cap[col0 + i][tt] = lo as i64;
    }
    cap[ss][t] = lo_sum as i64;
    cap[t][s] = total_supply as i64 + hi_sum as i64;
    max_flow(&mut cap, ss, tt) == (total_supply + lo_sum) as i64
}

fn max_flow(cap: &mut [Vec<i64>], s: usize, t: usize) -> i64 {
    let n = cap.len();
    let mut flow = 0;
    loop {
        let mut prev = vec![usize::MAX; n];
        prev[s] = s;
        let mut queue = std::collections::VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            if u == t {
                break;
            }
            for v in 0..n {
                if prev[v] == usize::MAX && cap[u][v] > 0 {
                    prev[v] = u;
                    queue.push_back(v);
                }
            }
        }
        if prev[t] == usize::MAX {
            return flow;
        }
        let mut push = i64::MAX;
        let mut v = t;
        while v != s {
            push = push.min(cap[prev[v]][v]);
            v = prev[v];
        }
        let mut v = t;
        while v != s {
            let u = prev[v];
            cap[u][v] -= push;
            cap[v][u] += push;
            v = u;
        }
        flow += push;
    }
}

/// Search for the colors of the edges between one new vertex and the
/// current vertices.
struct Step<'a> {
    a: &'a Decomposition,
    params: EnclosureParams,
    /// caps[j][i]: color i edges still allowed at x_j.
    caps: Vec<Vec<u32>>,
    /// Degree bounds of the new vertex per color.
    bounds: Vec<(u32, u32)>,
    assigned: Vec<u32>,
    row_order: Vec<Vertex>,
    color_order: Vec<usize>,
    choice: Vec<Vec<u32>>,
    nodes: u64,
    limit: u64,
    exhausted_limit: bool,
}

enum StepOutcome {
    Found(Decomposition),
    Exhausted,
    OutOfNodes,
}

impl<'a> Step<'a> {
    fn new(a: &'a Decomposition, params: EnclosureParams, loops: &[u32], rng: &mut ChaCha8Rng, limit: u64) -> Self {
        let n = a.vertex_count();
        let k = a.k();
        let (r, mu) = (params.r, params.mu);
        let caps: Vec<Vec<u32>> = (0..n)
            .map(|j| (0..k).map(|i| (r - a.class(i).degree(j)).min(mu)).collect())
            .collect();
        let bounds = loops.iter().map(|&l| (r.saturating_sub(l), r)).collect();
        let mut row_order: Vec<Vertex> = (0..n).collect();
        row_order.shuffle(rng);
        row_order.sort_by_key(|&j| caps[j].iter().sum::<u32>());
        let mut color_order: Vec<usize> = (0..k).collect();
        color_order.shuffle(rng);
        Step {
            a,
            params,
            caps,
            bounds,
            assigned: vec![0; k],
            row_order,
            color_order,
            choice: vec![vec![0; k]; n],
            nodes: 0,
            limit,
            exhausted_limit: false,
        }
    }

    fn rest_feasible(&self, pos: usize) -> bool {
        let caps: Vec<Vec<u32>> = self.row_order[pos..].iter().map(|&j| self.caps[j].clone()).collect();
        let bounds: Vec<(u32, u32)> = self
            .bounds
            .iter()
            .zip(&self.assigned)
            .map(|(&(lo, hi), &a)| (lo.saturating_sub(a), hi.saturating_sub(a)))
            .collect();
        if self.assigned.iter().zip(&self.bounds).any(|(&a, b)| a > b.1) {
            return false;
        }
        transport_feasible(self.params.mu, &caps, &bounds)
    }

    fn grown(&self) -> Result<Decomposition> {
        let n = self.a.vertex_count();
        let classes = self
            .a
            .classes()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let mut w = c.widened(n + 1);
                for j in 0..n {
                    w.add_edges(j, n, self.choice[j][i])?;
                }
                Ok(w)
            })
            .collect::<Result<Vec<_>>>()?;
        Decomposition::new(Multigraph::complete(n + 1, self.params.mu), classes)
    }

    fn run(&mut self) -> Result<StepOutcome> {
        if !self.rest_feasible(0) {
            return Ok(StepOutcome::Exhausted);
        }
        match self.row(0)? {
            Some(d) => Ok(StepOutcome::Found(d)),
            None if self.exhausted_limit => Ok(StepOutcome::OutOfNodes),
            None => Ok(StepOutcome::Exhausted),
        }
    }

    fn row(&mut self, pos: usize) -> Result<Option<Decomposition>> {
        if pos == self.row_order.len() {
            let d = self.grown()?;
            return Ok(admissibility_violation(d.classes(), self.params.r)
                .is_none()
                .then_some(d));
        }
        let j = self.row_order[pos];
        self.cell(pos, j, 0, self.params.mu)
    }

    fn cell(&mut self, pos: usize, j: Vertex, idx: usize, left: u32) -> Result<Option<Decomposition>> {
        if left == 0 {
            self.nodes += 1;
            if self.nodes > self.limit {
                self.exhausted_limit = true;
                return Ok(None);
            }
            if !self.rest_feasible(pos + 1) {
                return Ok(None);
            }
            return self.row(pos + 1);
        }
        if idx == self.color_order.len() || self.exhausted_limit {
            return Ok(None);
        }
        let i = self.color_order[idx];
        let room = self.bounds[i].1 - self.assigned[i];
        let most = left.min(self.caps[j][i]).min(room);
        for b in (0..=most).rev() {
            self.choice[j][i] = b;
            self.assigned[i] += b;
            let found = self.cell(pos, j, idx + 1, left - b)?;
            self.assigned[i] -= b;
            self.choice[j][i] = 0;
            if found.is_some() {
                return Ok(found);
            }
            if self.exhausted_limit {
                return Ok(None);
            }
        }
        Ok(None)
    }
}

/// The last new vertex takes every remaining edge.
fn forced_last(a: &Decomposition, params: &EnclosureParams) -> Result<Decomposition> {
    let n = a.vertex_count();
    let (r, mu) = (params.r, params.mu);
    let classes = a
        .classes()
        .iter()
        .map(|c| {
            let mut w = c.widened(n + 1);
            for j in 0..n {
                w.add_edges(j, n, r - c.degree(j))?;
            }
            Ok(w)
        })
        .collect::<Result<Vec<_>>>()?;
    Decomposition::new(Multigraph::complete(n + 1, mu), classes)
        .map_err(|e| inconsistency(format!("last detached vertex does not close up: {e}")))
}

/// Current decomposition in the triad, x0 and its edges removed, plus the
/// loop count per class.
fn inner_of(t: &Triad) -> Result<(Decomposition, Vec<u32>)> {
    let n = t.vertex_count() - 1;
    let loops = t.decomposition.classes().iter().map(|c| c.multiplicity(n, n)).collect();
    let d = t.decomposition.restrict(n)?;
    Ok((d, loops))
}

/// Splits x0 into m - n vertices, giving a 2-edge-connected r-factorization
/// of mu*K_m whose restriction to the first n vertices is the triad's.
pub fn fair_detach(t: &Triad, params: &EnclosureParams, seed: u64, budget: u64) -> Result<DetachmentWitness> {
    let n = t.vertex_count() - 1;
    let m = params.m;
    if n != params.n || t.g(n) as usize != m - n {
        return Err(Error::Precondition(
            "triad does not match the parameters".into(),
        ));
    }
    if !is_good_triad(t) {
        return Err(Error::Precondition("triad is not good".into()));
    }
    let (mut a, _) = inner_of(t)?;
    if &build_amalgamated_triad(&a, params)? != t {
        return Err(Error::Precondition(
            "triad is not the amalgamation of its restriction".into(),
        ));
    }
    let mut stats = DetachStats::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while a.vertex_count() < m {
        let here = a.vertex_count();
        stats.steps += 1;
        if here + 1 == m {
            a = forced_last(&a, params)?;
            break;
        }
        let step_params = EnclosureParams::new(here, m, params.mu, params.mu, params.r, params.k)?;
        let (_, loops) = inner_of(&build_amalgamated_triad(&a, &step_params)?)?;
        let mut limit = 2_000u64;
        loop {
            let remaining = budget.saturating_sub(stats.nodes);
            if remaining == 0 {
                return Err(Error::BudgetExhausted { budget });
            }
            let mut step = Step::new(&a, step_params, &loops, &mut rng, limit.min(remaining));
            let outcome = step.run()?;
            stats.nodes += step.nodes.min(step.limit);
            match outcome {
                StepOutcome::Found(d) => {
                    a = d;
                    break;
                }
                StepOutcome::Exhausted => {
                    return Err(inconsistency(format!(
                        "no admissible split for vertex {here} although the conditions hold"
                    )));
                }
                StepOutcome::OutOfNodes => {
                    stats.restarts += 1;
                    limit = limit.saturating_mul(2);
                }
            }
        }
        let next = EnclosureParams::new(here + 1, m, params.mu, params.mu, params.r, params.k)?;
        if here + 1 < m {
            // derived facts of the shrunken amalgamation are re-asserted here
            build_amalgamated_triad(&a, &next)?;
        }
    }
    let mut vertex_map: Vec<Vertex> = (0..n).collect();
    vertex_map.extend(std::iter::repeat_n(n, m - n));
    let witness = DetachmentWitness {
        result: a,
        vertex_map,
        stats,
    };
    let report = verify_detachment(&witness, t, params);
    if !report.is_valid() {
        return Err(inconsistency(format!("detachment fails its own check: {report}")));
    }
    Ok(witness)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DetachmentDiagnostic {
    VertexMapLength { expected: usize, found: usize },
    ClassCount { expected: usize, found: usize },
    /// Amalgamating class `class` through the vertex map does not give the
    /// triad's class.
    ColorCorrespondence { class: usize },
    FibreSize { vertex: Vertex, expected: u32, found: u32 },
    Degree { class: usize, vertex: Vertex, degree: u32 },
    Multiplicity { pair: Pair, found: u32 },
    NotTwoEdgeConnected { class: usize },
}

impl DetachmentDiagnostic {
    /// Name of the detachment condition that fails.
    pub fn condition(&self) -> &'static str {
        match self {
            Self::VertexMapLength { .. } | Self::ClassCount { .. } => "shape",
            Self::ColorCorrespondence { .. } => "D'1",
            Self::FibreSize { .. } => "D'2",
            Self::Degree { .. } => "D'3",
            Self::Multiplicity { .. } => "D'4",
            Self::NotTwoEdgeConnected { .. } => "good",
        }
    }
}

impl fmt::Display for DetachmentDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: ", self.condition())?;
        match self {
            Self::VertexMapLength { expected, found } => {
                write!(f, "vertex map has {found} entries, expected {expected}")
            }
            Self::ClassCount { expected, found } => write!(f, "{found} classes, expected {expected}"),
            Self::ColorCorrespondence { class } => {
                write!(f, "class {class} does not amalgamate to the triad class")
            }
            Self::FibreSize {
                vertex,
                expected,
                found,
            } => write!(f, "vertex {vertex} has {found} preimages, expected {expected}"),
            Self::Degree {
                class,
                vertex,
                degree,
            } => write!(f, "class {class} has degree {degree} at {vertex}"),
            Self::Multiplicity { pair, found } => write!(f, "pair {pair} has multiplicity {found}"),
            Self::NotTwoEdgeConnected { class } => {
                write!(f, "class {class} is not 2-edge-connected spanning")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DetachmentReport {
    pub diagnostics: Vec<DetachmentDiagnostic>,
}

impl DetachmentReport {
    pub fn is_valid(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

impl fmt::Display for DetachmentReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.diagnostics.is_empty() {
            return f.write_str("valid");
        }
        let parts: Vec<String> = self.diagnostics.iter().map(|d| d.to_string()).collect();
        f.write_str(&parts.join("; "))
    }
}

/// Re-checks a detachment against its triad from scratch.
pub fn verify_detachment(w: &DetachmentWitness, t: &Triad, params: &EnclosureParams) -> DetachmentReport {
    let mut diagnostics = Vec::new();
    let m = w.result.vertex_count();
    if w.vertex_map.len() != m {
        diagnostics.push(DetachmentDiagnostic::VertexMapLength {
            expected: m,
            found: w.vertex_map.len(),
        });
        return DetachmentReport { diagnostics };
    }
    if w.result.k() != t.decomposition.k() {
        diagnostics.push(DetachmentDiagnostic::ClassCount {
            expected: t.decomposition.k(),
            found: w.result.k(),
        });
        return DetachmentReport { diagnostics };
    }
    let tv = t.vertex_count();
    if w.vertex_map.iter().any(|&v| v >= tv) {
        diagnostics.push(DetachmentDiagnostic::VertexMapLength {
            expected: m,
            found: w.vertex_map.len(),
        });
        return DetachmentReport { diagnostics };
    }

    for (i, c) in w.result.classes().iter().enumerate() {
        let mut image = Multigraph::empty(tv);
        for (p, mult) in c.edges() {
            let (a, b) = (w.vertex_map[p.0], w.vertex_map[p.1]);
            image.add_edges(a, b, mult).expect("mapped vertices are in range");
        }
        if &image != t.decomposition.class(i) {
            diagnostics.push(DetachmentDiagnostic::ColorCorrespondence { class: i });
        }
    }
    for v in 0..tv {
        let found = w.vertex_map.iter().filter(|&&x| x == v).count() as u32;
        if found != t.g(v) {
            diagnostics.push(DetachmentDiagnostic::FibreSize {
                vertex: v,
                expected: t.g(v),
                found,
            });
        }
    }
    for (i, c) in w.result.classes().iter().enumerate() {
        for x in 0..m {
            if c.degree(x) != params.r {
                diagnostics.push(DetachmentDiagnostic::Degree {
                    class: i,
                    vertex: x,
                    degree: c.degree(x),
                });
            }
        }
    }
    let base = w.result.base();
    for x in 0..m {
        for y in x..m {
            let want = if x == y { 0 } else { params.mu };
            if base.multiplicity(x, y) != want {
                diagnostics.push(DetachmentDiagnostic::Multiplicity {
                    pair: Pair(x, y),
                    found: base.multiplicity(x, y),
                });
            }
        }
    }
    for (i, c) in w.result.classes().iter().enumerate() {
        if !c.is_two_edge_connected_spanning() {
            diagnostics.push(DetachmentDiagnostic::NotTwoEdgeConnected { class: i });
        }
    }
    DetachmentReport { diagnostics }
}
