//! Growing a decomposition of lambda*K_n into an r-admissible decomposition
//! of mu*K_n whose classes are large enough for the detachment stage.
//!
//! Every step goes through [`Extender::apply`], which re-checks admissibility
//! of the touched classes and refuses to move an edge of the protected input.

use serde::{Deserialize, Serialize};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conditions::{check_b, check_c, check_proper_padding, pairs, ConditionReport, EnclosureParams};
use crate::decomp::{class_violation, Decomposition, PartialDecomposition};
use crate::error::{Error, Result};
use crate::mgraph::{Multigraph, Pair, Vertex};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "action", rename_all = "snake_case")]
pub enum Action {
    /// Spare edge added to reach the minimum class size.
    Pad { class: usize, u: Vertex, v: Vertex },
    /// First edge given to an empty class before the matching step.
    SeedEmpty { class: usize, u: Vertex, v: Vertex },
    MatchingAssign { class: usize, u: Vertex, v: Vertex },
    Color { class: usize, u: Vertex, v: Vertex },
    Recolor {
        u: Vertex,
        v: Vertex,
        from: usize,
        to: usize,
    },
}

impl Action {
    pub fn pair(&self) -> Pair {
        match *self {
            Action::Pad { u, v, .. }
            | Action::SeedEmpty { u, v, .. }
            | Action::MatchingAssign { u, v, .. }
            | Action::Color { u, v, .. }
            | Action::Recolor { u, v, .. } => Pair::new(u, v),
        }
    }

    /// Classes whose edge sets change.
    pub fn touched(&self) -> Vec<usize> {
        match *self {
            Action::Pad { class, .. }
            | Action::SeedEmpty { class, .. }
            | Action::MatchingAssign { class, .. }
            | Action::Color { class, .. } => vec![class],
            Action::Recolor { from, to, .. } => vec![from, to],
        }
    }

    fn apply_to(&self, state: &mut PartialDecomposition) -> Result<()> {
        match *self {
            Action::Pad { class, u, v }
            | Action::SeedEmpty { class, u, v }
            | Action::MatchingAssign { class, u, v }
            | Action::Color { class, u, v } => state.color(u, v, class),
            Action::Recolor { u, v, from, to } => state.recolor(u, v, from, to),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExtensionTrace {
    pub actions: Vec<Action>,
}

impl ExtensionTrace {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn replay(&self, start: &PartialDecomposition) -> Result<PartialDecomposition> {
        self.replay_with(start, |_, _| Ok(()))
    }

    /// Replays the actions, handing each intermediate state to `observe`.
    pub fn replay_with<F>(&self, start: &PartialDecomposition, mut observe: F) -> Result<PartialDecomposition>
    where
        F: FnMut(&Action, &PartialDecomposition) -> Result<()>,
    {
        let mut state = start.clone();
        for a in &self.actions {
            a.apply_to(&mut state)?;
            observe(a, &state)?;
        }
        Ok(state)
    }
}

/// Pairs of `0..n` in lexicographic order, shuffled when `seed != 0`.
fn pair_order(n: usize, seed: u64) -> Vec<Pair> {
    let mut order: Vec<Pair> = (0..n)
        .flat_map(|u| (u + 1..n).map(move |v| Pair(u, v)))
        .collect();
    if seed != 0 {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    order
}

/// Working state of an extension: the growing partial decomposition of
/// mu*K_n together with the protected input decomposition of lambda*K_n.
struct Extender<'a> {
    inner: &'a Decomposition,
    state: PartialDecomposition,
    r: u32,
    trace: ExtensionTrace,
}

impl<'a> Extender<'a> {
    fn new(inner: &'a Decomposition, mu: u32, r: u32) -> Result<Self> {
        let n = inner.vertex_count();
        Ok(Extender {
            inner,
            state: PartialDecomposition::lift(inner, Multigraph::complete(n, mu))?,
            r,
            trace: ExtensionTrace::default(),
        })
    }

    fn resume(inner: &'a Decomposition, state: PartialDecomposition, r: u32) -> Self {
        Extender {
            inner,
            state,
            r,
            trace: ExtensionTrace::default(),
        }
    }

    /// Number of `pair` edges in `class` that are not part of the input.
    fn movable(&self, class: usize, pair: Pair) -> u32 {
        let have = self.state.class(class).multiplicity(pair.0, pair.1);
        let fixed = self.inner.class(class).multiplicity(pair.0, pair.1);
        have.saturating_sub(fixed)
    }

    fn admissible_after(&mut self, action: &Action) -> Result<bool> {
        action.apply_to(&mut self.state)?;
        let ok = action
            .touched()
            .iter()
            .all(|&c| class_violation(self.state.class(c), self.r).is_none());
        self.undo(action)?;
        Ok(ok)
    }

    fn undo(&mut self, action: &Action) -> Result<()> {
        match *action {
            Action::Recolor { u, v, from, to } => self.state.recolor(u, v, to, from),
            Action::Pad { class, u, v }
            | Action::SeedEmpty { class, u, v }
            | Action::MatchingAssign { class, u, v }
            | Action::Color { class, u, v } => self.state.uncolor(u, v, class),
        }
    }

    /// Applies `action`, asserting that it keeps the state admissible and
    /// never moves an input edge.
    fn apply(&mut self, action: Action) -> Result<()> {
        if let Action::Recolor { from, .. } = action {
            if self.movable(from, action.pair()) == 0 {
                return Err(Error::Inconsistency(format!(
                    "refusing to recolor an input edge at {} in class {from}",
                    action.pair()
                )));
            }
        }
        action.apply_to(&mut self.state)?;
        for c in action.touched() {
            if let Some(b) = class_violation(self.state.class(c), self.r) {
                return Err(Error::Inconsistency(format!(
                    "{action:?} broke admissibility of class {c}: {b:?}"
                )));
            }
        }
        self.trace.actions.push(action);
        Ok(())
    }

    fn try_direct(&mut self, pair: Pair) -> Result<Option<usize>> {
        for class in 0..self.state.k() {
            let a = Action::Color {
                class,
                u: pair.0,
                v: pair.1,
            };
            if self.admissible_after(&a)? {
                self.apply(a)?;
                return Ok(Some(class));
            }
        }
        Ok(None)
    }

    /// Colors `pair` or, when every color is blocked, uses the recoloring
    /// route through the class holding r-1 parallel edges on `pair`.
    fn color_with_recolor(&mut self, pair: Pair) -> Result<()> {
        if self.try_direct(pair)?.is_some() {
            return Ok(());
        }
        let r = self.r;
        let (x, y) = (pair.0, pair.1);
        let blocking: Vec<usize> = (0..self.state.k())
            .filter(|&j| {
                let c = self.state.class(j);
                c.multiplicity(x, y) == r - 1 && c.degree(x) == r - 1 && c.degree(y) == r - 1
            })
            .collect();
        if blocking.is_empty() {
            return Err(Error::Inconsistency(format!(
                "no color accepts {pair} and no class holds r-1 parallel edges on it"
            )));
        }
        for j in blocking {
            let class_j = self.state.class(j).clone();
            let deg = class_j.degrees();
            let (label, count) = class_j.component_labels();
            for comp in 0..count {
                if comp == label[x] {
                    continue;
                }
                let mut us: Vec<Vertex> = (0..deg.len())
                    .filter(|&w| label[w] == comp && deg[w] < r)
                    .collect();
                us.sort_by_key(|&w| (deg[w], w));
                for u in us {
                    let f = Pair::new(x, u);
                    if self.state.uncolored().multiplicity(f.0, f.1) > 0 {
                        let a = Action::Color {
                            class: j,
                            u: f.0,
                            v: f.1,
                        };
                        if self.admissible_after(&a)? {
                            return self.apply(a);
                        }
                        continue;
                    }
                    for c in 0..self.state.k() {
                        if c == j || self.movable(c, f) == 0 {
                            continue;
                        }
                        let re = Action::Recolor {
                            u: f.0,
                            v: f.1,
                            from: c,
                            to: j,
                        };
                        let col = Action::Color { class: c, u: x, v: y };
                        re.apply_to(&mut self.state)?;
                        let ok = self.admissible_after(&col)?
                            && class_violation(self.state.class(j), r).is_none();
                        self.undo(&re)?;
                        if ok {
                            // the intermediate state after the recolor alone may
                            // be inadmissible in class c; check the pair jointly
                            self.apply_pair(re, col)?;
                            return Ok(());
                        }
                    }
                }
            }
        }
        Err(Error::Inconsistency(format!(
            "recoloring route found no admissible move for {pair}"
        )))
    }

    /// Applies a recolor and the coloring it enables as one step.
    fn apply_pair(&mut self, re: Action, col: Action) -> Result<()> {
        if let Action::Recolor { from, .. } = re {
            if self.movable(from, re.pair()) == 0 {
                return Err(Error::Inconsistency(format!(
                    "refusing to recolor an input edge at {}",
                    re.pair()
                )));
            }
        }
        re.apply_to(&mut self.state)?;
        col.apply_to(&mut self.state)?;
        for c in re.touched().into_iter().chain(col.touched()) {
            if let Some(b) = class_violation(self.state.class(c), self.r) {
                return Err(Error::Inconsistency(format!(
                    "recolor step broke admissibility of class {c}: {b:?}"
                )));
            }
        }
        self.trace.actions.push(re);
        self.trace.actions.push(col);
        Ok(())
    }

    fn first_uncolored(&self, order: &[Pair]) -> Option<Pair> {
        order
            .iter()
            .copied()
            .find(|p| self.state.uncolored().multiplicity(p.0, p.1) > 0)
    }
}

fn require(cond: bool, what: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Precondition(what()))
    }
}

/// Fails on the first listed condition that does not hold.
fn require_named(report: &ConditionReport, names: &[&str]) -> Result<()> {
    match report
        .failures()
        .find(|c| names.contains(&c.name.as_str()))
    {
        None => Ok(()),
        Some(c) => Err(Error::ConditionFailed {
            name: c.name.clone(),
            reason: c.reason.clone(),
        }),
    }
}

fn require_admissible(classes: &[Multigraph], r: u32) -> Result<()> {
    match crate::decomp::admissibility_violation(classes, r) {
        None => Ok(()),
        Some(v) => Err(Error::ConditionFailed {
            name: "admissibility".into(),
            reason: v.to_string(),
        }),
    }
}

/// Adds spare edges so that every class reaches p edges (m >= 2n - 1).
pub fn pad_to_p(
    g: &Decomposition,
    params: &EnclosureParams,
    seed: u64,
) -> Result<(PartialDecomposition, ExtensionTrace)> {
    let report = check_b(g, params)?;
    require_named(&report, &["B2", "B3"])?;
    let mut ext = Extender::new(g, params.mu, params.r)?;
    let target = params.p.ceil().to_integer();
    if target <= 0 {
        return Ok((ext.state, ext.trace));
    }
    let order = pair_order(params.n, seed);
    for class in 0..g.k() {
        while (ext.state.class(class).edge_count() as i64) < target {
            let mut placed = false;
            for &p in &order {
                if ext.state.uncolored().multiplicity(p.0, p.1) == 0 {
                    continue;
                }
                let a = Action::Pad {
                    class,
                    u: p.0,
                    v: p.1,
                };
                if ext.admissible_after(&a)? {
                    ext.apply(a)?;
                    placed = true;
                    break;
                }
            }
            if !placed {
                return Err(Error::Inconsistency(format!(
                    "no spare edge can pad class {class} while B3 holds"
                )));
            }
        }
    }
    Ok((ext.state, ext.trace))
}

/// Maximum bipartite matching by augmenting paths, scanning left vertices and
/// their neighbours in order. Returns the partner of each left vertex.
pub fn max_bipartite_matching(adj: &[Vec<usize>], right: usize) -> Vec<Option<usize>> {
    fn augment(
        x: usize,
        adj: &[Vec<usize>],
        seen: &mut [bool],
        match_right: &mut [Option<usize>],
    ) -> bool {
        for &w in &adj[x] {
            if seen[w] {
                continue;
            }
            seen[w] = true;
            if match_right[w].is_none_or(|y| augment(y, adj, seen, match_right)) {
                match_right[w] = Some(x);
                return true;
            }
        }
        false
    }

    let mut match_right = vec![None; right];
    for x in 0..adj.len() {
        let mut seen = vec![false; right];
        augment(x, adj, &mut seen, &mut match_right);
    }
    let mut match_left = vec![None; adj.len()];
    for (w, x) in match_right.iter().enumerate() {
        if let Some(x) = *x {
            match_left[x] = Some(w);
        }
    }
    match_left
}

/// Slot of the auxiliary bipartite graph: one more edge for `class`, barred
/// from `avoid` when it is a special vertex.
#[derive(Clone, Copy, Debug)]
struct Demand {
    class: usize,
    avoid: Option<Pair>,
}

/// The single pair carrying every edge of `class`, if there is one.
fn single_pair(class: &Multigraph) -> Option<Pair> {
    let mut edges = class.edges();
    let (p, _) = edges.next()?;
    edges.next().is_none().then_some(p)
}

/// Extends to r edges per class by a matching between spare edges and
/// per-class demands (m = 2n - 2).
pub fn extend_to_r_via_matching(
    g: &Decomposition,
    params: &EnclosureParams,
    seed: u64,
) -> Result<(PartialDecomposition, ExtensionTrace)> {
    require(params.mu > params.lambda, || "need mu > lambda".into())?;
    let report = check_c(g, params)?;
    require_named(&report, &["C2", "C3", "C4"])?;
    let r = params.r;
    let mut ext = Extender::new(g, params.mu, r)?;
    let order = pair_order(params.n, seed);

    for class in 0..g.k() {
        if ext.state.class(class).edge_count() == 0 {
            let p = ext
                .first_uncolored(&order)
                .ok_or_else(|| Error::Inconsistency("no spare edge for an empty class".into()))?;
            ext.apply(Action::SeedEmpty {
                class,
                u: p.0,
                v: p.1,
            })?;
        }
    }

    let mut demands = Vec::new();
    for class in 0..g.k() {
        let c = ext.state.class(class);
        let size = c.edge_count();
        if size >= r {
            continue;
        }
        let missing = r - size;
        match single_pair(c) {
            Some(pair) => {
                for _ in 0..missing - 1 {
                    demands.push(Demand { class, avoid: None });
                }
                demands.push(Demand {
                    class,
                    avoid: Some(pair),
                });
            }
            None => {
                for _ in 0..missing {
                    demands.push(Demand { class, avoid: None });
                }
            }
        }
    }

    let mut spare = Vec::new();
    for &p in &order {
        for _ in 0..ext.state.uncolored().multiplicity(p.0, p.1) {
            spare.push(p);
        }
    }
    let adj: Vec<Vec<usize>> = demands
        .iter()
        .map(|d| {
            (0..spare.len())
                .filter(|&w| d.avoid != Some(spare[w]))
                .collect()
        })
        .collect();
    let matching = max_bipartite_matching(&adj, spare.len());
    if matching.iter().any(Option::is_none) {
        let size = matching.iter().flatten().count();
        return Err(Error::Inconsistency(format!(
            "matching covers {size} of {} demands although C3 and C4 hold",
            demands.len()
        )));
    }
    for (d, w) in demands.iter().zip(matching) {
        let p = spare[w.expect("saturating")];
        ext.apply(Action::MatchingAssign {
            class: d.class,
            u: p.0,
            v: p.1,
        })?;
    }

    for (i, c) in ext.state.classes().iter().enumerate() {
        if c.edge_count() < r {
            return Err(Error::Inconsistency(format!(
                "class {i} has fewer than r edges"
            )));
        }
        if c.edge_count() == r && single_pair(c).is_some() {
            return Err(Error::Inconsistency(format!(
                "class {i} has all r edges on one pair"
            )));
        }
    }
    Ok((ext.state, ext.trace))
}

fn check_partial_pre(gp: &PartialDecomposition, params: &EnclosureParams) -> Result<()> {
    require(gp.k() == params.k, || "class count differs from k".into())?;
    require(gp.base() == &Multigraph::complete(params.n, params.mu), || {
        format!("base is not {}K_{}", params.mu, params.n)
    })?;
    require(params.degree_count_holds(), || "rk = mu(m-1) and rm even fail".into())?;
    require(gp.is_strict(), || "nothing left to color".into())?;
    require_admissible(gp.classes(), params.r)
}

/// Colors the first uncolored spare edge with the first color that keeps the
/// decomposition r-admissible (m >= 2n - 1).
pub fn color_one_edge(gp: &mut PartialDecomposition, params: &EnclosureParams) -> Result<(Pair, usize)> {
    require(params.m + 1 >= 2 * params.n, || "need m >= 2n-1".into())?;
    check_partial_pre(gp, params)?;
    let order = pair_order(params.n, 0);
    color_first_of(gp, params, &order)
}

fn color_first_of(
    gp: &mut PartialDecomposition,
    params: &EnclosureParams,
    order: &[Pair],
) -> Result<(Pair, usize)> {
    let pair = order
        .iter()
        .copied()
        .find(|p| gp.uncolored().multiplicity(p.0, p.1) > 0)
        .ok_or_else(|| Error::Precondition("no uncolored edge".into()))?;
    for class in 0..gp.k() {
        gp.color(pair.0, pair.1, class)?;
        if class_violation(gp.class(class), params.r).is_none() {
            return Ok((pair, class));
        }
        gp.uncolor(pair.0, pair.1, class)?;
    }
    Err(Error::Inconsistency(format!(
        "no color keeps {pair} admissible although m >= 2n-1"
    )))
}

/// One more colored edge for m = 2n - 2, recoloring a non-input edge when
/// every color is blocked. Returns the actions taken.
pub fn color_one_edge_with_recolor(
    gp: &mut PartialDecomposition,
    protected: &Decomposition,
    params: &EnclosureParams,
) -> Result<Vec<Action>> {
    let order = pair_order(params.n, 0);
    color_one_edge_with_recolor_in(gp, protected, params, &order)
}

fn color_one_edge_with_recolor_in(
    gp: &mut PartialDecomposition,
    protected: &Decomposition,
    params: &EnclosureParams,
    order: &[Pair],
) -> Result<Vec<Action>> {
    require(params.m + 2 == 2 * params.n, || "need m = 2n-2".into())?;
    require(
        2 * (params.r - 1) >= params.mu && params.mu > params.lambda,
        || "need 2(r-1) >= mu > lambda".into(),
    )?;
    check_partial_pre(gp, params)?;
    require(gp.encloses(protected), || {
        "state does not enclose the protected decomposition".into()
    })?;
    let mut ext = Extender::resume(protected, gp.clone(), params.r);
    let pair = ext
        .first_uncolored(order)
        .ok_or_else(|| Error::Precondition("no uncolored edge".into()))?;
    ext.color_with_recolor(pair)?;
    *gp = ext.state;
    Ok(ext.trace.actions)
}

/// Budget for the almost-regular decomposition search.
pub const BRYANT_BUDGET: u64 = 5_000_000;

struct AlmostRegular {
    n: usize,
    cap: Multigraph,
    classes: Vec<Multigraph>,
    sizes: Vec<u32>,
    order: Vec<usize>,
    vertex_order: Vec<Vertex>,
    nodes: u64,
    budget: u64,
}

impl AlmostRegular {
    fn bounds(&self, class: usize) -> (u32, u32, usize) {
        let total = 2 * self.sizes[class] as usize;
        let lo = total / self.n;
        let t = total - lo * self.n;
        let hi = if t > 0 { lo + 1 } else { lo };
        (lo as u32, hi as u32, t)
    }

    /// Every vertex can still reach the minimum degree of every class left.
    fn capacity_ok(&self, pos: usize) -> bool {
        let c = self.order[pos];
        let (lo, _, _) = self.bounds(c);
        let later: u32 = self.order[pos + 1..]
            .iter()
            .map(|&d| self.bounds(d).0)
            .sum();
        (0..self.n).all(|v| {
            let need = lo.saturating_sub(self.classes[c].degree(v)) + later;
            self.cap.degree(v) >= need
        })
    }

    fn solve(&mut self, pos: usize, excluded: u64) -> Result<bool> {
        if pos == self.order.len() {
            return Ok(true);
        }
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(Error::BudgetExhausted {
                budget: self.budget,
            });
        }
        let c = self.order[pos];
        let (lo, hi, t) = self.bounds(c);
        let placed = self.classes[c].edge_count();
        if placed == self.sizes[c] {
            return self.solve(pos + 1, 0);
        }
        if !self.capacity_ok(pos) {
            return Ok(false);
        }
        let deg = self.classes[c].degrees();
        let at_hi = if hi > lo {
            deg.iter().filter(|&&d| d == hi).count()
        } else {
            0
        };
        let can_take = |v: Vertex| deg[v] < lo || (deg[v] < hi && at_hi < t);

        let needy = self
            .vertex_order
            .iter()
            .copied()
            .filter(|&v| deg[v] < lo)
            .max_by_key(|&v| lo - deg[v]);
        match needy {
            Some(u) => {
                let mut partners: Vec<Vertex> = self
                    .vertex_order
                    .iter()
                    .copied()
                    .filter(|&v| v != u && self.cap.multiplicity(u, v) > 0 && can_take(v))
                    .collect();
                partners.sort_by_key(|&v| {
                    (
                        std::cmp::Reverse(lo.saturating_sub(deg[v])),
                        std::cmp::Reverse(self.cap.multiplicity(u, v)),
                    )
                });
                // u moving from lo-1 to lo plus a partner at lo moving to hi
                // must not overshoot the count of high vertices
                for v in partners {
                    if deg[v] >= lo && at_hi + 1 > t {
                        continue;
                    }
                    if self.try_edge(pos, c, u, v, excluded)? {
                        return Ok(true);
                    }
                }
                Ok(false)
            }
            None => {
                // every vertex is at lo; the remaining edges form a matching
                // on vertices raised to hi
                let Some(u) = self
                    .vertex_order
                    .iter()
                    .copied()
                    .find(|&v| deg[v] == lo && hi > lo && excluded & (1 << v) == 0)
                else {
                    return Ok(false);
                };
                if at_hi + 2 > t {
                    return Ok(false);
                }
                let partners: Vec<Vertex> = self
                    .vertex_order
                    .iter()
                    .copied()
                    .filter(|&v| {
                        v != u
                            && deg[v] == lo
                            && excluded & (1 << v) == 0
                            && self.cap.multiplicity(u, v) > 0
                    })
                    .collect();
                for v in partners {
                    if self.try_edge(pos, c, u, v, excluded)? {
                        return Ok(true);
                    }
                }
                self.solve(pos, excluded | (1 << u))
            }
        }
    }

    fn try_edge(&mut self, pos: usize, c: usize, u: Vertex, v: Vertex, excluded: u64) -> Result<bool> {
        self.cap.remove_edges(u, v, 1)?;
        self.classes[c].add_edges(u, v, 1)?;
        let ok = self.solve(pos, excluded)?;
        if !ok {
            self.classes[c].remove_edges(u, v, 1)?;
            self.cap.add_edges(u, v, 1)?;
        }
        Ok(ok)
    }
}

/// Almost-regular classes of exactly the given sizes inside lambda*K_n.
///
/// Returned as a partial decomposition of lambda*K_n; the uncolored part is
/// whatever the sizes leave over.
pub fn bryant_decompose(n: usize, lambda: u32, sizes: &[u32], seed: u64) -> Result<PartialDecomposition> {
    bryant_decompose_with_budget(n, lambda, sizes, seed, BRYANT_BUDGET)
}

pub fn bryant_decompose_with_budget(
    n: usize,
    lambda: u32,
    sizes: &[u32],
    seed: u64,
    budget: u64,
) -> Result<PartialDecomposition> {
    let available = lambda as u64 * pairs(n);
    let total: u64 = sizes.iter().map(|&s| s as u64).sum();
    if total > available {
        return Err(Error::Precondition(format!(
            "class sizes sum to {total}, more than the {available} edges of {lambda}K_{n}"
        )));
    }
    require(n <= 64, || "at most 64 vertices".into())?;
    let base = Multigraph::complete(n, lambda);
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by_key(|&c| std::cmp::Reverse(sizes[c]));
    let mut vertex_order: Vec<Vertex> = (0..n).collect();
    if seed != 0 {
        vertex_order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let mut search = AlmostRegular {
        n,
        cap: base.clone(),
        classes: vec![Multigraph::empty(n); sizes.len()],
        sizes: sizes.to_vec(),
        order,
        vertex_order,
        nodes: 0,
        budget,
    };
    if n == 0 || !search.solve(0, 0)? {
        if total == 0 {
            return PartialDecomposition::new(base, search.classes);
        }
        return Err(Error::Inconsistency(format!(
            "no almost-regular decomposition with sizes {sizes:?} found in {lambda}K_{n}"
        )));
    }
    PartialDecomposition::new(base, search.classes)
}

/// True if class degrees differ by at most one.
pub fn is_almost_regular(class: &Multigraph) -> bool {
    let d = class.degrees();
    match (d.iter().min(), d.iter().max()) {
        (Some(lo), Some(hi)) => hi - lo <= 1,
        _ => true,
    }
}

/// Adds an almost-regular, hence proper, coloring of the spare edges to an
/// (r-1)-admissible decomposition.
pub fn proper_padding(
    g: &Decomposition,
    params: &EnclosureParams,
    seed: u64,
) -> Result<(Decomposition, ExtensionTrace)> {
    require(params.mu > params.lambda, || "need mu > lambda".into())?;
    check_proper_padding(g, params)?.require()?;
    let k = params.k as u64;
    let total = params.spare_edges();
    let (q, extra) = (total / k, total % k);
    let sizes: Vec<u32> = (0..k).map(|i| (q + u64::from(i < extra)) as u32).collect();
    let padding = bryant_decompose(params.n, params.mu - params.lambda, &sizes, seed)?;
    for (i, f) in padding.classes().iter().enumerate() {
        if let Some(v) = (0..params.n).find(|&v| f.degree(v) > 1) {
            return Err(Error::Inconsistency(format!(
                "padding class {i} is not a matching at vertex {v}"
            )));
        }
    }
    let mut ext = Extender::new(g, params.mu, params.r)?;
    for (class, f) in padding.classes().iter().enumerate() {
        for (u, v) in f.edge_list() {
            ext.apply(Action::Pad { class, u, v })?;
        }
    }
    let p = params.p;
    if let Some(i) = ext
        .state
        .class_sizes()
        .iter()
        .position(|&s| num_rational::Ratio::from_integer(s as i64) < p)
    {
        return Err(Error::Inconsistency(format!(
            "class {i} stays below p = {p} after padding"
        )));
    }
    Ok((ext.state.into_decomposition()?, ext.trace))
}

/// Which extension argument to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtensionPath {
    /// m >= 2n - 1: pad to p, then color edge by edge.
    B,
    /// m = 2n - 2: matching extension, then color with recoloring.
    C,
    /// (r-1)-admissible input: proper padding.
    Padding,
}

/// A complete decomposition of mu*K_n that encloses `g` and satisfies the
/// conditions for detachment.
pub fn enclose_in_mu_kn(
    g: &Decomposition,
    params: &EnclosureParams,
    path: ExtensionPath,
    seed: u64,
) -> Result<(Decomposition, ExtensionTrace)> {
    let order = pair_order(params.n, seed);
    match path {
        ExtensionPath::B => {
            check_b(g, params)?.require()?;
            let (mut state, mut trace) = pad_to_p(g, params, seed)?;
            while state.is_strict() {
                let (pair, class) = color_first_of(&mut state, params, &order)?;
                trace.actions.push(Action::Color {
                    class,
                    u: pair.0,
                    v: pair.1,
                });
            }
            Ok((state.into_decomposition()?, trace))
        }
        ExtensionPath::C => {
            check_c(g, params)?.require()?;
            let (mut state, mut trace) = extend_to_r_via_matching(g, params, seed)?;
            while state.is_strict() {
                let actions = color_one_edge_with_recolor_in(&mut state, g, params, &order)?;
                trace.actions.extend(actions);
            }
            Ok((state.into_decomposition()?, trace))
        }
        ExtensionPath::Padding => proper_padding(g, params, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conditions::check_a_prime;

    fn mg(n: usize, edges: &[(usize, usize)]) -> Multigraph {
        Multigraph::from_edges(n, edges.iter().copied()).unwrap()
    }

    fn k3_1110() -> Decomposition {
        Decomposition::new(
            Multigraph::complete(3, 1),
            vec![mg(3, &[(0, 1)]), mg(3, &[(0, 2)]), mg(3, &[(1, 2)]), mg(3, &[])],
        )
        .unwrap()
    }

    fn k3_singles() -> Decomposition {
        Decomposition::new(
            Multigraph::complete(3, 1),
            vec![mg(3, &[(0, 1)]), mg(3, &[(0, 2)]), mg(3, &[(1, 2)])],
        )
        .unwrap()
    }

    #[test]
    fn pad_is_trivial_when_p_nonpositive() {
        let g = Decomposition::new(
            Multigraph::complete(3, 1),
            vec![mg(3, &[(0, 1)]), mg(3, &[(0, 2), (1, 2)]), mg(3, &[])],
        )
        .unwrap();
        let params = EnclosureParams::new(3, 7, 1, 1, 2, 3).unwrap();
        let (state, trace) = pad_to_p(&g, &params, 0).unwrap();
        assert!(trace.is_empty());
        assert_eq!(state.classes(), g.classes());
    }

    #[test]
    fn pad_fills_the_empty_class() {
        let g = k3_1110();
        let params = EnclosureParams::new(3, 5, 1, 2, 2, 4).unwrap();
        let (state, trace) = pad_to_p(&g, &params, 0).unwrap();
        assert_eq!(trace.len(), 1);
        assert!(matches!(trace.actions[0], Action::Pad { class: 3, .. }));
        assert_eq!(state.class_sizes(), vec![1, 1, 1, 1]);
        assert!(state.is_admissible(2));
        assert!(state.encloses(&g));
        let start = PartialDecomposition::lift(&g, Multigraph::complete(3, 2)).unwrap();
        assert_eq!(trace.replay(&start).unwrap(), state);
    }

    #[test]
    fn pad_rejects_b3_failure() {
        // p = 2 and one empty class needs two spare edges where 4K_2 - 3K_2 has one
        let g = Decomposition::new(
            Multigraph::complete(2, 3),
            vec![mg(2, &[(0, 1), (0, 1), (0, 1)]), mg(2, &[])],
        )
        .unwrap();
        let params = EnclosureParams::new(2, 3, 3, 4, 4, 2).unwrap();
        assert!(matches!(
            pad_to_p(&g, &params, 0),
            Err(Error::ConditionFailed { name, .. }) if name == "B3"
        ));
    }

    #[test]
    fn one_edge_coloring_completes() {
        let g = k3_1110();
        let params = EnclosureParams::new(3, 5, 1, 2, 2, 4).unwrap();
        let (mut state, _) = pad_to_p(&g, &params, 0).unwrap();
        while state.is_strict() {
            color_one_edge(&mut state, &params).unwrap();
            assert!(state.is_admissible(2));
        }
        let d = state.into_decomposition().unwrap();
        assert!(check_a_prime(&d, &params).unwrap().overall());

        let bad = EnclosureParams::new(3, 4, 1, 2, 2, 3).unwrap();
        let mut s = PartialDecomposition::lift(&k3_singles(), Multigraph::complete(3, 2)).unwrap();
        assert!(matches!(color_one_edge(&mut s, &bad), Err(Error::Precondition(_))));
    }

    #[test]
    fn one_edge_into_an_empty_class() {
        // an isolated edge in an empty class is always admissible
        let g = k3_1110();
        let params = EnclosureParams::new(3, 5, 1, 2, 2, 4).unwrap();
        let mut state = PartialDecomposition::lift(&g, Multigraph::complete(3, 2)).unwrap();
        let (pair, class) = color_one_edge(&mut state, &params).unwrap();
        assert_eq!(pair, Pair(0, 1));
        assert!(class < 4);
        assert!(state.is_admissible(2));
    }

    #[test]
    fn matching_extension_example() {
        let g = k3_singles();
        let params = EnclosureParams::new(3, 4, 1, 3, 3, 3).unwrap();
        let (state, trace) = extend_to_r_via_matching(&g, &params, 0).unwrap();
        assert_eq!(state.class_sizes(), vec![3, 3, 3]);
        for c in state.classes() {
            assert!(single_pair(c).is_none());
        }
        assert!(state.is_admissible(3));
        assert!(state.encloses(&g));
        assert_eq!(trace.len(), 6);
    }

    #[test]
    fn matching_extension_noop() {
        // every class already has r = 2 edges on distinct pairs
        let g = Decomposition::new(
            Multigraph::complete(4, 1),
            vec![
                mg(4, &[(0, 1), (2, 3)]),
                mg(4, &[(0, 2), (1, 3)]),
                mg(4, &[(0, 3), (1, 2)]),
            ],
        )
        .unwrap();
        // n = 4, m = 6, mu = 2, r = 2: rk = 6 != mu(m-1) = 10, so use k = 5
        let mut classes = g.classes().to_vec();
        classes.push(mg(4, &[]));
        classes.push(mg(4, &[]));
        let g5 = Decomposition::new(Multigraph::complete(4, 1), classes).unwrap();
        let params = EnclosureParams::new(4, 6, 1, 2, 2, 5).unwrap();
        let (state, trace) = extend_to_r_via_matching(&g5, &params, 0).unwrap();
        assert!(trace.actions[..3]
            .iter()
            .all(|a| !matches!(a, Action::MatchingAssign { class, .. } if *class < 3)));
        for i in 0..3 {
            assert_eq!(state.class(i), g5.class(i));
        }
    }

    #[test]
    fn matching_extension_rejects_c3() {
        // 3K_3, r = 4, mu = 4: sizes (5,2,2) violate C3
        let g = Decomposition::new(
            Multigraph::complete(3, 3),
            vec![
                mg(3, &[(0, 1), (0, 1), (0, 1), (0, 2), (1, 2)]),
                mg(3, &[(0, 2), (0, 2)]),
                mg(3, &[(1, 2), (1, 2)]),
            ],
        )
        .unwrap();
        let params = EnclosureParams::new(3, 4, 3, 4, 4, 3).unwrap();
        assert!(matches!(
            extend_to_r_via_matching(&g, &params, 0),
            Err(Error::ConditionFailed { name, .. }) if name == "C3"
        ));
    }

    #[test]
    fn bipartite_matching_small() {
        let adj = vec![vec![0, 1], vec![0], vec![1, 2]];
        let m = max_bipartite_matching(&adj, 3);
        assert_eq!(m.iter().flatten().count(), 3);
        let adj = vec![vec![0], vec![0]];
        assert_eq!(max_bipartite_matching(&adj, 1).iter().flatten().count(), 1);
    }

    #[test]
    fn bryant_examples() {
        let d = bryant_decompose(4, 1, &[2, 2, 2], 0).unwrap();
        assert!(!d.is_strict());
        for c in d.classes() {
            assert_eq!(c.edge_count(), 2);
            assert!(c.degrees().iter().all(|&x| x == 1));
        }
        assert!(matches!(
            bryant_decompose(4, 1, &[7], 0),
            Err(Error::Precondition(_))
        ));
        let d = bryant_decompose(5, 2, &[7, 3, 0, 9], 11).unwrap();
        assert_eq!(d.class_sizes(), vec![7, 3, 0, 9]);
        assert!(d.classes().iter().all(is_almost_regular));
    }

    fn blocking_instance() -> (Decomposition, EnclosureParams) {
        let g = Decomposition::new(
            Multigraph::complete(4, 1),
            vec![
                mg(4, &[(0, 2), (1, 3)]),
                mg(4, &[]),
                mg(4, &[(1, 2), (2, 3)]),
                mg(4, &[(0, 1)]),
                mg(4, &[(0, 3)]),
            ],
        )
        .unwrap();
        (g, EnclosureParams::new(4, 6, 1, 2, 2, 5).unwrap())
    }

    #[test]
    fn recolor_route_is_taken() {
        let (g, params) = blocking_instance();
        let (d, trace) = enclose_in_mu_kn(&g, &params, ExtensionPath::C, 2).unwrap();
        let i = trace
            .actions
            .iter()
            .position(|a| matches!(a, Action::Recolor { .. }))
            .expect("seed 2 runs into a blocked edge");
        let Action::Recolor { u, v, from, .. } = trace.actions[i] else { unreachable!() };
        assert!(g.class(from).multiplicity(u, v) == 0);
        assert!(check_a_prime(&d, &params).unwrap().overall());
        let start = PartialDecomposition::lift(&g, Multigraph::complete(4, 2)).unwrap();
        let replayed = trace
            .replay_with(&start, |_, s| {
                assert!(s.encloses(&g));
                Ok(())
            })
            .unwrap();
        assert_eq!(replayed.into_decomposition().unwrap(), d);
    }

    #[test]
    fn recolor_step_keeps_input() {
        let (g, params) = blocking_instance();
        let (mut state, _) = extend_to_r_via_matching(&g, &params, 2).unwrap();
        while state.is_strict() {
            color_one_edge_with_recolor(&mut state, &g, &params).unwrap();
            assert!(state.is_admissible(2));
            assert!(state.encloses(&g));
        }
    }

    #[test]
    fn proper_padding_example() {
        let n = 8;
        let mut classes = Vec::new();
        for i in 0..7 {
            let mut edges = vec![(i, 7)];
            for j in 1..4 {
                edges.push(((i + j) % 7, (i + 7 - j) % 7));
            }
            if i < 3 {
                classes.push(mg(n, &edges[..2]));
                classes.push(mg(n, &edges[2..]));
            } else {
                classes.push(mg(n, &edges));
            }
        }
        let g = Decomposition::new(Multigraph::complete(n, 1), classes).unwrap();
        let params = EnclosureParams::new(8, 16, 1, 2, 3, 10).unwrap();
        let (d, trace) = proper_padding(&g, &params, 0).unwrap();
        assert_eq!(trace.len(), 28);
        assert!(check_a_prime(&d, &params).unwrap().overall());
        let (d2, _) = enclose_in_mu_kn(&g, &params, ExtensionPath::Padding, 0).unwrap();
        assert_eq!(d, d2);
    }

    #[test]
    fn c_path_instance() {
        let g = k3_singles();
        let params = EnclosureParams::new(3, 4, 1, 3, 3, 3).unwrap();
        let (d, trace) = enclose_in_mu_kn(&g, &params, ExtensionPath::C, 0).unwrap();
        assert!(check_a_prime(&d, &params).unwrap().overall());
        let start = PartialDecomposition::lift(&g, Multigraph::complete(3, 3)).unwrap();
        assert_eq!(trace.replay(&start).unwrap().into_decomposition().unwrap(), d);
    }

    #[test]
    fn determinism() {
        let g = k3_1110();
        let params = EnclosureParams::new(3, 5, 1, 2, 2, 4).unwrap();
        for seed in [0, 1, 7] {
            let a = enclose_in_mu_kn(&g, &params, ExtensionPath::B, seed).unwrap();
            let b = enclose_in_mu_kn(&g, &params, ExtensionPath::B, seed).unwrap();
            assert_eq!(a, b);
        }
    }

    /// Adds xy to `class` and reports whether admissibility breaks.
    fn blocks(class: &Multigraph, x: Vertex, y: Vertex, r: u32) -> bool {
        let mut c = class.clone();
        c.add_edges(x, y, 1).unwrap();
        class_violation(class, r).is_none() && class_violation(&c, r).is_some()
    }

    #[test]
    fn blocked_color_cases() {
        // x already at degree r
        let star = mg(5, &[(0, 2), (0, 3), (0, 4)]);
        assert!(blocks(&star, 0, 1, 3));
        // y already at degree r
        assert!(blocks(&star, 1, 0, 3));
        // x and y at r - 1 in one component whose other vertices are at r
        let path = mg(3, &[(0, 2), (2, 1)]);
        assert!(blocks(&path, 0, 1, 2));
        // x at r - 2, y at r - 1, every other vertex of the component at r
        let c = mg(5, &[(0, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]);
        assert_eq!(c.degrees(), vec![1, 2, 3, 3, 3]);
        assert!(blocks(&c, 0, 1, 3));
        for (g, x, y, r) in [(&star, 0, 1, 3), (&path, 0, 1, 2), (&c, 0, 1, 3)] {
            assert!(g.degree(x) + g.degree(y) >= r);
        }
        // different components: joining never blocks at degree r - 1
        let two = mg(4, &[(0, 2), (1, 3)]);
        assert!(!blocks(&two, 0, 1, 2));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(64))]
        #[test]
        fn rejected_colors_have_degree_sum_at_least_r(seed in 0u64..10_000) {
            let params = EnclosureParams::new(4, 7, 1, 2, 2, 6).unwrap();
            let Ok(g) = crate::oracle::random_admissible(4, 1, 6, 2, seed) else { return Ok(()) };
            if !check_b(&g, &params).unwrap().overall() {
                return Ok(());
            }
            let (mut state, _) = pad_to_p(&g, &params, seed).unwrap();
            let order = pair_order(4, seed);
            while state.is_strict() {
                let e = *order.iter().find(|p| state.uncolored().multiplicity(p.0, p.1) > 0).unwrap();
                for (i, c) in state.classes().iter().enumerate() {
                    if blocks(c, e.0, e.1, 2) {
                        proptest::prop_assert!(c.degree(e.0) + c.degree(e.1) >= 2, "class {i}");
                    }
                }
                color_first_of(&mut state, &params, &order).unwrap();
                proptest::prop_assert!(state.is_admissible(2));
            }
        }
    }
}
