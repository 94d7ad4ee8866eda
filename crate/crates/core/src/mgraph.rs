//! Dense multigraph with loops.
//!
//! Vertices are `0..vertex_count`. The multiplicity of every unordered pair
//! is stored in a symmetric matrix; the diagonal holds loop counts.

use std::fmt;

use crate::error::{Error, Result};

pub type Vertex = usize;

/// Unordered vertex pair, always stored with `u <= v`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Pair(pub Vertex, pub Vertex);

impl Pair {
    pub fn new(u: Vertex, v: Vertex) -> Self {
        if u <= v {
            Pair(u, v)
        } else {
            Pair(v, u)
        }
    }

    pub fn is_loop(self) -> bool {
        self.0 == self.1
    }

    pub fn contains(self, v: Vertex) -> bool {
        self.0 == v || self.1 == v
    }

    /// The endpoint opposite `v`. `v` must be an endpoint.
    pub fn other(self, v: Vertex) -> Vertex {
        if self.0 == v {
            self.1
        } else {
            self.0
        }
    }
}

impl fmt::Display for Pair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{},{}}}", self.0, self.1)
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Multigraph {
    n: usize,
    mult: Vec<u32>,
}

impl fmt::Debug for Multigraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let edges: Vec<_> = self.edges().map(|(p, c)| (p.0, p.1, c)).collect();
        f.debug_struct("Multigraph")
            .field("n", &self.n)
            .field("edges", &edges)
            .finish()
    }
}

impl Multigraph {
    /// Edgeless graph on `n` vertices.
    pub fn empty(n: usize) -> Self {
        Multigraph {
            n,
            mult: vec![0; n * n],
        }
    }

    /// `lambda` parallel edges between every pair of distinct vertices.
    pub fn complete(n: usize, lambda: u32) -> Self {
        let mut g = Self::empty(n);
        for u in 0..n {
            for v in u + 1..n {
                g.set(u, v, lambda);
            }
        }
        g
    }

    /// Builds a graph from an edge list; repeated pairs add multiplicity.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut g = Self::empty(n);
        for (u, v) in edges {
            g.add_edges(u, v, 1)?;
        }
        Ok(g)
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    fn check(&self, v: Vertex) -> Result<()> {
        if v < self.n {
            Ok(())
        } else {
            Err(Error::InvalidVertex {
                vertex: v,
                vertex_count: self.n,
            })
        }
    }

    /// Edge count between `u` and `v`, or the loop count when `u == v`.
    ///
    /// Panics if either vertex is out of range; see [`Self::try_multiplicity`].
    #[inline]
    pub fn multiplicity(&self, u: Vertex, v: Vertex) -> u32 {
        assert!(u < self.n && v < self.n, "vertex out of range");
        self.mult[u * self.n + v]
    }

    pub fn try_multiplicity(&self, u: Vertex, v: Vertex) -> Result<u32> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.multiplicity(u, v))
    }

    #[inline]
    fn set(&mut self, u: Vertex, v: Vertex, count: u32) {
        self.mult[u * self.n + v] = count;
        self.mult[v * self.n + u] = count;
    }

    pub fn add_edges(&mut self, u: Vertex, v: Vertex, count: u32) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        let c = self.multiplicity(u, v) + count;
        self.set(u, v, c);
        Ok(())
    }

    pub fn remove_edges(&mut self, u: Vertex, v: Vertex, count: u32) -> Result<()> {
        self.check(u)?;
        self.check(v)?;
        let have = self.multiplicity(u, v);
        if have < count {
            return Err(Error::MissingEdge {
                pair: Pair::new(u, v),
                requested: count,
                present: have,
            });
        }
        self.set(u, v, have - count);
        Ok(())
    }

    /// Degree with loops counted twice.
    ///
    /// Panics if `v` is out of range; see [`Self::try_degree`].
    pub fn degree(&self, v: Vertex) -> u32 {
        let row = &self.mult[v * self.n..(v + 1) * self.n];
        row.iter().sum::<u32>() + row[v]
    }

    pub fn try_degree(&self, v: Vertex) -> Result<u32> {
        self.check(v)?;
        Ok(self.degree(v))
    }

    pub fn degrees(&self) -> Vec<u32> {
        (0..self.n).map(|v| self.degree(v)).collect()
    }

    pub fn loop_count(&self) -> u32 {
        (0..self.n).map(|v| self.multiplicity(v, v)).sum()
    }

    /// Total number of edges, loops included.
    pub fn edge_count(&self) -> u32 {
        self.edges().map(|(_, c)| c).sum()
    }

    /// Pairs with non-zero multiplicity, `u <= v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Pair, u32)> + '_ {
        (0..self.n).flat_map(move |u| {
            (u..self.n).filter_map(move |v| {
                let c = self.mult[u * self.n + v];
                (c > 0).then_some((Pair(u, v), c))
            })
        })
    }

    /// Expanded edge list with one entry per parallel copy.
    pub fn edge_list(&self) -> Vec<(Vertex, Vertex)> {
        let mut out = Vec::new();
        for (p, c) in self.edges() {
            for _ in 0..c {
                out.push((p.0, p.1));
            }
        }
        out
    }

    /// Distinct neighbours of `v` (loops excluded).
    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        let row = &self.mult[v * self.n..(v + 1) * self.n];
        row.iter()
            .enumerate()
            .filter(move |&(w, &c)| c > 0 && w != v)
            .map(|(w, _)| w)
    }

    /// Component index per vertex; indices are assigned in order of the
    /// smallest vertex of each component.
    pub fn component_labels(&self) -> (Vec<usize>, usize) {
        let mut label = vec![usize::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if label[s] != usize::MAX {
                continue;
            }
            label[s] = count;
            stack.push(s);
            while let Some(x) = stack.pop() {
                for y in self.neighbors(x) {
                    if label[y] == usize::MAX {
                        label[y] = count;
                        stack.push(y);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    /// Maximal connected vertex sets, each sorted, ordered by smallest vertex.
    pub fn components(&self) -> Vec<Vec<Vertex>> {
        let (label, count) = self.component_labels();
        let mut parts = vec![Vec::new(); count];
        for (v, &l) in label.iter().enumerate() {
            parts[l].push(v);
        }
        parts
    }

    pub fn is_connected(&self) -> bool {
        self.n <= 1 || self.component_labels().1 == 1
    }

    /// Pairs of multiplicity exactly one whose removal disconnects their
    /// component. Parallel classes and loops never qualify.
    pub fn bridges(&self) -> Vec<Pair> {
        let n = self.n;
        let mut disc = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut out = Vec::new();
        let mut clock = 0;
        // (vertex, parent, next neighbour index to scan)
        let mut stack: Vec<(Vertex, Option<Vertex>, usize)> = Vec::new();
        for root in 0..n {
            if disc[root] != usize::MAX {
                continue;
            }
            disc[root] = clock;
            low[root] = clock;
            clock += 1;
            stack.push((root, None, 0));
            while let Some(top) = stack.last_mut() {
                let (x, parent, next) = *top;
                if next < n {
                    top.2 += 1;
                    let y = next;
                    let c = self.mult[x * n + y];
                    if y == x || c == 0 {
                        continue;
                    }
                    if Some(y) == parent && c == 1 {
                        // the tree edge itself
                        continue;
                    }
                    if disc[y] == usize::MAX {
                        disc[y] = clock;
                        low[y] = clock;
                        clock += 1;
                        stack.push((y, Some(x), 0));
                    } else {
                        low[x] = low[x].min(disc[y]);
                    }
                } else {
                    stack.pop();
                    if let Some(p) = parent {
                        low[p] = low[p].min(low[x]);
                        if low[x] > disc[p] {
                            out.push(Pair::new(p, x));
                        }
                    }
                }
            }
        }
        out.sort();
        out
    }

    /// Connected on all vertices and bridgeless. A single vertex qualifies.
    pub fn is_two_edge_connected_spanning(&self) -> bool {
        self.is_connected() && self.bridges().is_empty()
    }

    /// Induced subgraph on `0..k`.
    pub fn induced_prefix(&self, k: usize) -> Multigraph {
        let mut g = Multigraph::empty(k);
        for u in 0..k {
            for v in u..k {
                g.set(u, v, self.multiplicity(u, v));
            }
        }
        g
    }

    /// Same edges on a larger vertex set `0..n` (`n >= vertex_count`).
    pub fn widened(&self, n: usize) -> Multigraph {
        assert!(n >= self.n);
        let mut g = Multigraph::empty(n);
        for (p, c) in self.edges() {
            g.set(p.0, p.1, c);
        }
        g
    }

    /// Pairwise sum. Both graphs must have the same vertex count.
    pub fn union(&self, other: &Multigraph) -> Multigraph {
        assert_eq!(self.n, other.n);
        Multigraph {
            n: self.n,
            mult: self
                .mult
                .iter()
                .zip(&other.mult)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// True if every multiplicity of `self` is at most that of `other`.
    pub fn is_subgraph_of(&self, other: &Multigraph) -> bool {
        self.n == other.n && self.mult.iter().zip(&other.mult).all(|(a, b)| a <= b)
    }
}
