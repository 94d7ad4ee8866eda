//! Decompositions into color classes, the class-size statistics, the
//! r-admissibility predicate and the enclosing verifier.

use std::fmt;

use crate::conditions::EnclosureParams;
use crate::error::{Error, Result};
use crate::mgraph::{Multigraph, Pair, Vertex};

/// Number of classes with exactly `i` edges.
pub fn s_count(classes: &[Multigraph], i: u32) -> usize {
    classes.iter().filter(|c| c.edge_count() == i).count()
}

/// Number of classes with exactly `i` edges, all of them joining `u` and `v`.
pub fn s_uv_count(classes: &[Multigraph], i: u32, u: Vertex, v: Vertex) -> Result<usize> {
    if u == v {
        return Err(Error::LoopPair(Pair::new(u, v)));
    }
    if i == 0 {
        return Err(Error::Precondition("S_i(u,v) is defined for i >= 1".into()));
    }
    let mut count = 0;
    for c in classes {
        if c.try_multiplicity(u, v)? == i && c.edge_count() == i {
            count += 1;
        }
    }
    Ok(count)
}

/// Which clause of r-admissibility a class breaks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Bullet {
    /// A vertex has class degree above `r`.
    DegreeCap { vertex: Vertex, degree: u32 },
    /// A component has no vertex of degree `<= r-2` and fewer than two of
    /// degree `<= r-1`. The component is given by its sorted vertex set.
    LowDegree { component: Vec<Vertex> },
    /// Removing the cutedge leaves a side whose vertices all have degree `r`.
    Cutedge { edge: Pair, side: Vec<Vertex> },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub class: usize,
    pub bullet: Bullet,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.bullet {
            Bullet::DegreeCap { vertex, degree } => write!(
                f,
                "class {}: vertex {} has degree {} above r",
                self.class, vertex, degree
            ),
            Bullet::LowDegree { component } => write!(
                f,
                "class {}: component {:?} lacks low-degree vertices",
                self.class, component
            ),
            Bullet::Cutedge { edge, side } => write!(
                f,
                "class {}: cutedge {} leaves side {:?} with every vertex at degree r",
                self.class, edge, side
            ),
        }
    }
}

/// First admissibility failure of a single class, if any.
pub fn class_violation(class: &Multigraph, r: u32) -> Option<Bullet> {
    debug_assert!(r >= 2);
    let deg = class.degrees();
    if let Some((vertex, &degree)) = deg.iter().enumerate().find(|(_, &d)| d > r) {
        return Some(Bullet::DegreeCap { vertex, degree });
    }
    let bridges = class.bridges();
    for component in class.components() {
        if component.len() == 1 {
            continue;
        }
        let has_very_low = component.iter().any(|&v| deg[v] + 2 <= r);
        let low = component.iter().filter(|&&v| deg[v] < r).count();
        if !has_very_low && low < 2 {
            return Some(Bullet::LowDegree { component });
        }
        for &edge in bridges.iter().filter(|b| component.contains(&b.0)) {
            let mut cut = class.clone();
            cut.remove_edges(edge.0, edge.1, 1).expect("bridge present");
            let (label, _) = cut.component_labels();
            for end in [edge.0, edge.1] {
                let side: Vec<Vertex> = component
                    .iter()
                    .copied()
                    .filter(|&v| label[v] == label[end])
                    .collect();
                if side.iter().all(|&v| deg[v] >= r) {
                    return Some(Bullet::Cutedge { edge, side });
                }
            }
        }
    }
    None
}

/// First violation over a list of classes, scanning classes in order.
pub fn admissibility_violation(classes: &[Multigraph], r: u32) -> Option<Violation> {
    classes.iter().enumerate().find_map(|(class, g)| {
        class_violation(g, r).map(|bullet| Violation { class, bullet })
    })
}

fn check_classes(base: &Multigraph, classes: &[Multigraph]) -> Result<Multigraph> {
    let n = base.vertex_count();
    let mut sum = Multigraph::empty(n);
    for c in classes {
        if c.vertex_count() != n {
            return Err(Error::VertexCountMismatch {
                expected: n,
                found: c.vertex_count(),
            });
        }
        sum = sum.union(c);
    }
    Ok(sum)
}

/// A partition of the edges of `base` into ordered color classes.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Decomposition {
    base: Multigraph,
    classes: Vec<Multigraph>,
}

impl Decomposition {
    pub fn new(base: Multigraph, classes: Vec<Multigraph>) -> Result<Self> {
        let sum = check_classes(&base, &classes)?;
        for (p, _) in base.edges().chain(sum.edges()) {
            let (b, s) = (base.multiplicity(p.0, p.1), sum.multiplicity(p.0, p.1));
            if b != s {
                return Err(Error::NotAPartition {
                    pair: p,
                    classes: s,
                    base: b,
                });
            }
        }
        Ok(Decomposition { base, classes })
    }

    /// The decomposition whose base is the union of the classes.
    pub fn from_classes(n: usize, classes: Vec<Multigraph>) -> Result<Self> {
        let base = check_classes(&Multigraph::empty(n), &classes)?;
        Ok(Decomposition { base, classes })
    }

    pub fn base(&self) -> &Multigraph {
        &self.base
    }

    pub fn classes(&self) -> &[Multigraph] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &Multigraph {
        &self.classes[i]
    }

    pub fn into_classes(self) -> Vec<Multigraph> {
        self.classes
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.base.vertex_count()
    }

    pub fn class_sizes(&self) -> Vec<u32> {
        self.classes.iter().map(|c| c.edge_count()).collect()
    }

    pub fn s_count(&self, i: u32) -> usize {
        s_count(&self.classes, i)
    }

    pub fn s_uv_count(&self, i: u32, u: Vertex, v: Vertex) -> Result<usize> {
        s_uv_count(&self.classes, i, u, v)
    }

    pub fn admissibility(&self, r: u32) -> Option<Violation> {
        admissibility_violation(&self.classes, r)
    }

    pub fn is_admissible(&self, r: u32) -> bool {
        self.admissibility(r).is_none()
    }

    /// Classwise induced decomposition on vertices `0..n`.
    pub fn restrict(&self, n: usize) -> Result<Decomposition> {
        if n > self.vertex_count() {
            return Err(Error::Precondition(format!(
                "cannot restrict a decomposition on {} vertices to {n}",
                self.vertex_count()
            )));
        }
        Ok(Decomposition {
            base: self.base.induced_prefix(n),
            classes: self.classes.iter().map(|c| c.induced_prefix(n)).collect(),
        })
    }
}

/// Color classes covering part of `base`; the rest is `uncolored`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PartialDecomposition {
    base: Multigraph,
    classes: Vec<Multigraph>,
    uncolored: Multigraph,
}

impl PartialDecomposition {
    pub fn new(base: Multigraph, classes: Vec<Multigraph>) -> Result<Self> {
        let sum = check_classes(&base, &classes)?;
        let mut uncolored = base.clone();
        for (p, c) in sum.edges() {
            let b = base.multiplicity(p.0, p.1);
            if c > b {
                return Err(Error::NotAPartition {
                    pair: p,
                    classes: c,
                    base: b,
                });
            }
            uncolored.remove_edges(p.0, p.1, c)?;
        }
        Ok(PartialDecomposition {
            base,
            classes,
            uncolored,
        })
    }

    /// Views `d` as a partial decomposition of the larger graph `base`.
    pub fn lift(d: &Decomposition, base: Multigraph) -> Result<Self> {
        Self::new(base, d.classes.clone())
    }

    pub fn base(&self) -> &Multigraph {
        &self.base
    }

    pub fn classes(&self) -> &[Multigraph] {
        &self.classes
    }

    pub fn class(&self, i: usize) -> &Multigraph {
        &self.classes[i]
    }

    pub fn uncolored(&self) -> &Multigraph {
        &self.uncolored
    }

    pub fn k(&self) -> usize {
        self.classes.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.base.vertex_count()
    }

    pub fn is_strict(&self) -> bool {
        self.uncolored.edge_count() > 0
    }

    pub fn class_sizes(&self) -> Vec<u32> {
        self.classes.iter().map(|c| c.edge_count()).collect()
    }

    pub fn s_count(&self, i: u32) -> usize {
        s_count(&self.classes, i)
    }

    pub fn s_uv_count(&self, i: u32, u: Vertex, v: Vertex) -> Result<usize> {
        s_uv_count(&self.classes, i, u, v)
    }

    pub fn admissibility(&self, r: u32) -> Option<Violation> {
        admissibility_violation(&self.classes, r)
    }

    pub fn is_admissible(&self, r: u32) -> bool {
        self.admissibility(r).is_none()
    }

    /// Moves one uncolored `uv` edge into `class`.
    pub fn color(&mut self, u: Vertex, v: Vertex, class: usize) -> Result<()> {
        self.check_class(class)?;
        self.uncolored.remove_edges(u, v, 1)?;
        self.classes[class].add_edges(u, v, 1)
    }

    /// Returns one `uv` edge of `class` to the uncolored pool.
    pub fn uncolor(&mut self, u: Vertex, v: Vertex, class: usize) -> Result<()> {
        self.check_class(class)?;
        self.classes[class].remove_edges(u, v, 1)?;
        self.uncolored.add_edges(u, v, 1)
    }

    /// Moves one `uv` edge from class `from` to class `to`.
    pub fn recolor(&mut self, u: Vertex, v: Vertex, from: usize, to: usize) -> Result<()> {
        self.check_class(from)?;
        self.check_class(to)?;
        self.classes[from].remove_edges(u, v, 1)?;
        self.classes[to].add_edges(u, v, 1)
    }

    fn check_class(&self, class: usize) -> Result<()> {
        if class < self.classes.len() {
            Ok(())
        } else {
            Err(Error::Precondition(format!(
                "class {class} out of range for {} classes",
                self.classes.len()
            )))
        }
    }

    /// Succeeds once every edge of the base is colored.
    pub fn into_decomposition(self) -> Result<Decomposition> {
        if self.is_strict() {
            return Err(Error::Precondition(format!(
                "{} edge(s) remain uncolored",
                self.uncolored.edge_count()
            )));
        }
        Ok(Decomposition {
            base: self.base,
            classes: self.classes,
        })
    }

    /// True if class `i` of `inner` sits inside class `i` here, pairwise.
    pub fn encloses(&self, inner: &Decomposition) -> bool {
        let n = inner.vertex_count();
        n <= self.vertex_count()
            && inner.k() == self.k()
            && inner.classes.iter().zip(&self.classes).all(|(a, b)| {
                a.edges()
                    .all(|(p, c)| p.1 < n && c <= b.multiplicity(p.0, p.1))
            })
    }
}

/// A decomposition of the outer complete multigraph whose vertices `0..n`
/// are identified with the vertices of the enclosed decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Enclosing {
    pub outer: Decomposition,
}

impl Enclosing {
    pub fn new(outer: Decomposition) -> Self {
        Enclosing { outer }
    }

    pub fn restrict(&self, n: usize) -> Result<Decomposition> {
        self.outer.restrict(n)
    }
}

/// Why an enclosing candidate fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum EnclosingDiagnostic {
    BaseNotComplete { m: usize, mu: u32 },
    NotRegular { class: usize, vertex: Vertex, degree: u32 },
    NotTwoEdgeConnected { class: usize },
    NotSuperclass { class: usize, pair: Pair, inner: u32, outer: u32 },
}

impl fmt::Display for EnclosingDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnclosingDiagnostic::BaseNotComplete { m, mu } => {
                write!(f, "outer base is not {mu}K_{m}")
            }
            EnclosingDiagnostic::NotRegular {
                class,
                vertex,
                degree,
            } => write!(
                f,
                "class {class}: not regular (vertex {vertex} has degree {degree})"
            ),
            EnclosingDiagnostic::NotTwoEdgeConnected { class } => {
                write!(f, "class {class}: not 2-edge-connected spanning")
            }
            EnclosingDiagnostic::NotSuperclass {
                class,
                pair,
                inner,
                outer,
            } => write!(
                f,
                "class {class}: not a superclass at {pair} (inner {inner}, outer {outer})"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EnclosingReport {
    pub diagnostics: Vec<EnclosingDiagnostic>,
}

impl EnclosingReport {
    pub fn is_valid(&self) -> bool {
        self.diagnostics.is_empty()
    }
}

/// Checks that `outer` is a 2-edge-connected r-factorization of muK_m whose
/// classes contain the corresponding classes of `inner`.
pub fn verify_enclosing(
    inner: &Decomposition,
    outer: &Enclosing,
    params: &EnclosureParams,
) -> Result<EnclosingReport> {
    let outer = &outer.outer;
    if inner.k() != outer.k() {
        return Err(Error::ClassCountMismatch {
            expected: inner.k(),
            found: outer.k(),
        });
    }
    let (m, mu, r) = (params.m, params.mu, params.r);
    let mut diagnostics = Vec::new();
    if outer.base() != &Multigraph::complete(m, mu) {
        diagnostics.push(EnclosingDiagnostic::BaseNotComplete { m, mu });
    }
    let n = inner.vertex_count();
    for (class, (a, b)) in inner.classes().iter().zip(outer.classes()).enumerate() {
        if let Some((vertex, degree)) = (0..b.vertex_count())
            .map(|v| (v, b.degree(v)))
            .find(|&(_, d)| d != r)
        {
            diagnostics.push(EnclosingDiagnostic::NotRegular {
                class,
                vertex,
                degree,
            });
        }
        if b.vertex_count() != m || !b.is_two_edge_connected_spanning() {
            diagnostics.push(EnclosingDiagnostic::NotTwoEdgeConnected { class });
        }
        for (pair, c) in a.edges() {
            let o = if n <= b.vertex_count() {
                b.multiplicity(pair.0, pair.1)
            } else {
                0
            };
            if c > o {
                diagnostics.push(EnclosingDiagnostic::NotSuperclass {
                    class,
                    pair,
                    inner: c,
                    outer: o,
                });
            }
        }
    }
    Ok(EnclosingReport { diagnostics })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mg(n: usize, edges: &[(usize, usize)]) -> Multigraph {
        Multigraph::from_edges(n, edges.iter().copied()).unwrap()
    }

    fn params(n: usize, m: usize, lambda: u32, mu: u32, r: u32, k: usize) -> EnclosureParams {
        EnclosureParams::new(n, m, lambda, mu, r, k).unwrap()
    }

    #[test]
    fn s_counts() {
        let d = Decomposition::new(
            Multigraph::complete(3, 1),
            vec![mg(3, &[(0, 1)]), mg(3, &[(0, 2)]), mg(3, &[(1, 2)]), mg(3, &[])],
        )
        .unwrap();
        assert_eq!(d.s_count(1), 3);
        assert_eq!(d.s_count(0), 1);
        let full = Decomposition::new(
            Multigraph::complete(3, 2),
            vec![
                mg(3, &[(0, 1), (1, 2)]),
                mg(3, &[(0, 1), (0, 2)]),
                mg(3, &[(0, 2), (1, 2)]),
            ],
        )
        .unwrap();
        assert_eq!(full.s_count(0), 0);
        assert_eq!(full.s_count(2), 3);
    }

    #[test]
    fn s_uv_counts() {
        let classes = vec![mg(3, &[(0, 1), (0, 1)]), mg(3, &[(0, 1), (1, 2)]), mg(3, &[])];
        assert_eq!(s_uv_count(&classes, 2, 0, 1).unwrap(), 1);
        assert_eq!(s_uv_count(&classes, 2, 1, 2).unwrap(), 0);
        assert_eq!(s_uv_count(&classes, 1, 0, 1).unwrap(), 0);
        assert!(matches!(
            s_uv_count(&classes, 1, 2, 2),
            Err(Error::LoopPair(_))
        ));
    }

    #[test]
    fn partition_is_enforced() {
        let err = Decomposition::new(Multigraph::complete(3, 1), vec![mg(3, &[(0, 1)])]);
        assert!(matches!(err, Err(Error::NotAPartition { .. })));
        let err = Decomposition::new(
            Multigraph::complete(3, 1),
            vec![mg(3, &[(0, 1), (0, 1), (0, 2), (1, 2)])],
        );
        assert!(matches!(err, Err(Error::NotAPartition { .. })));
    }

    #[test]
    fn admissibility_examples() {
        let k4 = Decomposition::new(
            Multigraph::complete(4, 1),
            vec![
                mg(4, &[(0, 1), (2, 3)]),
                mg(4, &[(0, 2), (1, 3)]),
                mg(4, &[(0, 3), (1, 2)]),
            ],
        )
        .unwrap();
        assert!(k4.is_admissible(2));

        let tri = Decomposition::new(Multigraph::complete(3, 1), vec![mg(3, &[(0, 1), (1, 2), (0, 2)])])
            .unwrap();
        let v = tri.admissibility(2).unwrap();
        assert_eq!(v.class, 0);
        assert_eq!(
            v.bullet,
            Bullet::LowDegree {
                component: vec![0, 1, 2]
            }
        );

        let k4_single =
            Decomposition::from_classes(5, vec![Multigraph::complete(4, 1).widened(5)]).unwrap();
        assert!(matches!(
            k4_single.admissibility(3).unwrap().bullet,
            Bullet::LowDegree { .. }
        ));
    }

    #[test]
    fn degree_cap_and_cutedge_witnesses() {
        let star = Decomposition::from_classes(4, vec![mg(4, &[(0, 1), (0, 2), (0, 3)])]).unwrap();
        assert_eq!(
            star.admissibility(2).unwrap().bullet,
            Bullet::DegreeCap {
                vertex: 0,
                degree: 3
            }
        );
        // two triangles joined by an edge, r = 3: each side of the bridge is
        // left with one degree-3 vertex and two of degree 2, which is fine
        let dumbbell = mg(6, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 5), (5, 3)]);
        assert!(class_violation(&dumbbell, 3).is_none());
        // r = 2: the triangle ends saturate, bullet 1 fails first at vertex 2
        assert!(matches!(
            class_violation(&dumbbell, 2),
            Some(Bullet::DegreeCap { vertex: 2, .. })
        ));
        // r = 3: the side {0,1,2} of cutedge {2,3} has every vertex at degree 3
        let g = mg(
            6,
            &[(0, 1), (0, 1), (1, 2), (0, 2), (2, 3), (3, 4), (3, 4), (4, 5)],
        );
        assert_eq!(
            class_violation(&g, 3),
            Some(Bullet::Cutedge {
                edge: Pair(2, 3),
                side: vec![0, 1, 2]
            })
        );
    }

    #[test]
    fn verify_identity_enclosing_of_two_five_cycles() {
        let c1 = mg(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let c2 = mg(5, &[(0, 2), (2, 4), (4, 1), (1, 3), (3, 0)]);
        let d = Decomposition::new(Multigraph::complete(5, 1), vec![c1, c2]).unwrap();
        let p = params(5, 5, 1, 1, 2, 2);
        let report = verify_enclosing(&d, &Enclosing::new(d.clone()), &p).unwrap();
        assert!(report.is_valid(), "{:?}", report);
    }

    #[test]
    fn verify_reports_failures() {
        let c1 = mg(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let c2 = mg(5, &[(0, 2), (2, 4), (4, 1), (1, 3), (3, 0)]);
        let d = Decomposition::new(Multigraph::complete(5, 1), vec![c1.clone(), c2.clone()]).unwrap();
        let p = params(5, 5, 1, 1, 2, 2);

        // swap one edge between classes: class 0 loses (0,1), class 1 gains it
        let mut a = c1.clone();
        a.remove_edges(0, 1, 1).unwrap();
        a.add_edges(0, 2, 1).unwrap();
        let mut b = c2.clone();
        b.remove_edges(0, 2, 1).unwrap();
        b.add_edges(0, 1, 1).unwrap();
        let swapped = Decomposition::new(Multigraph::complete(5, 1), vec![a, b]).unwrap();
        let report = verify_enclosing(&d, &Enclosing::new(swapped), &p).unwrap();
        assert!(report
            .diagnostics
            .iter()
            .any(|x| x.to_string().contains("not a superclass")));

        let path = mg(5, &[(0, 1), (1, 2), (2, 3), (3, 4)]);
        let bad = Decomposition::from_classes(5, vec![path, c2]).unwrap();
        let report = verify_enclosing(&d, &Enclosing::new(bad), &p).unwrap();
        assert!(report
            .diagnostics
            .iter()
            .any(|x| x.to_string().contains("not 2-edge-connected")));

        let one = Decomposition::new(Multigraph::complete(5, 1), vec![Multigraph::complete(5, 1)])
            .unwrap();
        assert!(matches!(
            verify_enclosing(&d, &Enclosing::new(one), &p),
            Err(Error::ClassCountMismatch { .. })
        ));
    }

    #[test]
    fn restriction() {
        let c1 = mg(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (4, 0)]);
        let c2 = mg(5, &[(0, 2), (2, 4), (4, 1), (1, 3), (3, 0)]);
        let d = Decomposition::new(Multigraph::complete(5, 1), vec![c1, c2]).unwrap();
        let e = Enclosing::new(d.clone());
        assert_eq!(e.restrict(5).unwrap(), d);
        let one = e.restrict(1).unwrap();
        assert_eq!(one.k(), 2);
        assert!(one.classes().iter().all(|c| c.edge_count() == 0));
        assert!(e.restrict(6).is_err());
    }

    #[test]
    fn partial_bookkeeping() {
        let inner = Decomposition::new(Multigraph::complete(3, 1), vec![mg(3, &[(0, 1), (1, 2)]), mg(3, &[(0, 2)])])
            .unwrap();
        let mut p = PartialDecomposition::lift(&inner, Multigraph::complete(3, 2)).unwrap();
        assert_eq!(p.uncolored().edge_count(), 3);
        assert!(p.is_strict());
        p.color(0, 2, 0).unwrap();
        assert!(p.encloses(&inner));
        p.recolor(0, 2, 0, 1).unwrap();
        assert!(p.color(0, 2, 0).is_err());
        p.color(0, 1, 1).unwrap();
        p.color(1, 2, 0).unwrap();
        let d = p.into_decomposition().unwrap();
        assert_eq!(d.class_sizes(), vec![3, 3]);
    }
}
