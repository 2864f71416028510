//! Topological representatives: images, filtrations, strata, directions.

use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet};
use std::cmp::Reverse;

use petgraph::graph::DiGraph;

use crate::error::{Error, Result};
use crate::nielsen::NielsenCatalog;
use crate::paths::{
    check_contiguous, root_length, EdgeId, EdgePath, MarkedGraph, OrientedEdge, VertexId,
};
use crate::spectral::{is_permutation_matrix, perron_frobenius, PfEigenvalue};

#[derive(Clone, Debug)]
pub struct GraphMap {
    graph: MarkedGraph,
    vertex_images: Vec<VertexId>,
    // indexed by OrientedEdge::index
    images: Vec<Vec<OrientedEdge>>,
}

impl PartialEq for GraphMap {
    fn eq(&self, other: &Self) -> bool {
        self.graph == other.graph
            && self.vertex_images == other.vertex_images
            && self.images == other.images
    }
}

impl GraphMap {
    /// Builds a map from the images of the (positively oriented) edges.
    /// Images are tightened; vertex images are read off the edge images.
    pub fn new(graph: MarkedGraph, edge_images: Vec<EdgePath>) -> Result<Self> {
        if edge_images.len() != graph.edge_count() {
            return Err(Error::InvalidMap(format!(
                "{} edge images for {} edges",
                edge_images.len(),
                graph.edge_count()
            )));
        }
        let mut vimg: Vec<Option<VertexId>> = vec![None; graph.vertex_count()];
        let mut images = vec![Vec::new(); 2 * graph.edge_count()];
        for (i, p) in edge_images.into_iter().enumerate() {
            let e = EdgeId(i);
            check_contiguous(&graph, &p.edges)?;
            let p = p.tighten();
            if p.is_trivial() {
                return Err(Error::InvalidMap(format!(
                    "image of {} is trivial",
                    graph.edge_name(e)
                )));
            }
            let end = p.end(&graph);
            let d = graph.edge(e);
            for (v, w) in [(d.from, p.start), (d.to, end)] {
                match vimg[v.0] {
                    Some(x) if x != w => {
                        return Err(Error::InvalidMap(format!(
                            "image of {} puts vertex {} at {} but another edge puts it at {}",
                            graph.edge_name(e),
                            graph.vertex_name(v),
                            graph.vertex_name(w),
                            graph.vertex_name(x)
                        )))
                    }
                    _ => vimg[v.0] = Some(w),
                }
            }
            let fwd = OrientedEdge::forward(e);
            images[fwd.inverse().index()] = p.edges.iter().rev().map(|x| x.inverse()).collect();
            images[fwd.index()] = p.edges;
        }
        let vertex_images = vimg
            .into_iter()
            .enumerate()
            .map(|(v, w)| {
                w.ok_or_else(|| {
                    Error::InvalidMap(format!("vertex {} has no incident edge", graph.vertex_name(VertexId(v))))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphMap { graph, vertex_images, images })
    }

    /// Parses images written as whitespace separated oriented edge names,
    /// given in edge order.
    pub fn from_image_strings<S: AsRef<str>>(graph: MarkedGraph, images: &[S]) -> Result<Self> {
        let paths = images
            .iter()
            .map(|s| graph.parse_path(s.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(graph, paths)
    }

    pub fn identity(graph: MarkedGraph) -> Self {
        let paths = graph
            .edge_ids()
            .map(|e| EdgePath::edge(&graph, OrientedEdge::forward(e)))
            .collect();
        Self::new(graph, paths).expect("identity map")
    }

    pub fn graph(&self) -> &MarkedGraph {
        &self.graph
    }

    pub fn vertex_image(&self, v: VertexId) -> VertexId {
        self.vertex_images[v.0]
    }

    pub fn image_edges(&self, e: OrientedEdge) -> &[OrientedEdge] {
        &self.images[e.index()]
    }

    pub fn image(&self, e: OrientedEdge) -> EdgePath {
        let edges = self.images[e.index()].clone();
        EdgePath { start: self.graph.init(edges[0]), edges }
    }

    pub fn edge_image(&self, e: EdgeId) -> EdgePath {
        self.image(OrientedEdge::forward(e))
    }

    pub fn is_fixed_edge(&self, e: EdgeId) -> bool {
        let f = OrientedEdge::forward(e);
        self.images[f.index()] == [f]
    }

    /// `f_#` on a raw edge sequence.
    pub fn apply_edges(&self, edges: &[OrientedEdge]) -> Vec<OrientedEdge> {
        let mut out: Vec<OrientedEdge> = Vec::new();
        for &e in edges {
            for &x in &self.images[e.index()] {
                if out.last() == Some(&x.inverse()) {
                    out.pop();
                } else {
                    out.push(x);
                }
            }
        }
        out
    }

    /// `f_#(p)`: image then tighten.
    pub fn apply(&self, p: &EdgePath) -> EdgePath {
        EdgePath { start: self.vertex_images[p.start.0], edges: self.apply_edges(&p.edges) }
    }

    pub fn iterate(&self, p: &EdgePath, k: usize) -> EdgePath {
        let mut q = p.clone();
        for _ in 0..k {
            q = self.apply(&q);
        }
        q
    }

    /// `outer ∘ inner`: edge images `outer_#(inner(E))`.
    pub fn compose(outer: &GraphMap, inner: &GraphMap) -> Result<GraphMap> {
        if outer.graph != inner.graph {
            return Err(Error::InvalidMap("composing maps on different graphs".into()));
        }
        let paths = inner
            .graph
            .edge_ids()
            .map(|e| outer.apply(&inner.edge_image(e)))
            .collect();
        GraphMap::new(inner.graph.clone(), paths)
    }

    pub fn power(&self, k: usize) -> Result<GraphMap> {
        let mut m = GraphMap::identity(self.graph.clone());
        for _ in 0..k {
            m = GraphMap::compose(self, &m)?;
        }
        Ok(m)
    }

    /// Entry `[i][j]` counts crossings of edge `i` (either orientation) by
    /// the image of edge `j`.
    pub fn transition_matrix(&self) -> Vec<Vec<u64>> {
        let n = self.graph.edge_count();
        let mut t = vec![vec![0u64; n]; n];
        for j in 0..n {
            for x in &self.images[OrientedEdge::forward(EdgeId(j)).index()] {
                t[x.edge().0][j] += 1;
            }
        }
        t
    }

    /// Restriction to an invariant set of edges, as a map on the subgraph.
    /// Also returns the original ids of the subgraph's edges.
    pub fn restrict(&self, edges: &[EdgeId]) -> Result<(GraphMap, Vec<EdgeId>)> {
        let (sub, ids, _) = self.graph.subgraph(edges);
        let local: HashMap<EdgeId, EdgeId> = ids.iter().enumerate().map(|(i, &e)| (e, EdgeId(i))).collect();
        let mut paths = Vec::new();
        for &e in &ids {
            let img = &self.images[OrientedEdge::forward(e).index()];
            let mapped = img
                .iter()
                .map(|x| {
                    local
                        .get(&x.edge())
                        .map(|&l| OrientedEdge::new(l, x.is_inverted()))
                        .ok_or_else(|| {
                            Error::InconsistentFiltration(format!(
                                "image of {} leaves the subgraph",
                                self.graph.edge_name(e)
                            ))
                        })
                })
                .collect::<Result<Vec<_>>>()?;
            paths.push(EdgePath::from_edges(&sub, mapped)?);
        }
        Ok((GraphMap::new(sub, paths)?, ids))
    }

    /// Edges crossed by the image of `e`.
    pub fn dependencies(&self, e: EdgeId) -> BTreeSet<EdgeId> {
        self.images[OrientedEdge::forward(e).index()].iter().map(|x| x.edge()).collect()
    }

    /// Derivative on directions.
    pub fn df(&self, d: OrientedEdge) -> OrientedEdge {
        self.images[d.index()][0]
    }
}

/// Strata listed bottom to top; `strata[i]` is stratum `i + 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    pub strata: Vec<Vec<EdgeId>>,
}

impl Filtration {
    pub fn len(&self) -> usize {
        self.strata.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strata.is_empty()
    }

    /// 0-based stratum index of each edge.
    pub fn stratum_of(&self, edge_count: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; edge_count];
        for (i, s) in self.strata.iter().enumerate() {
            for e in s {
                out[e.0] = i;
            }
        }
        out
    }

    /// Edges of the filtration element `G_j`, the union of the first `j`
    /// strata.
    pub fn prefix_edges(&self, j: usize) -> Vec<EdgeId> {
        let mut v: Vec<EdgeId> = self.strata[..j].iter().flatten().copied().collect();
        v.sort();
        v
    }
}

/// The maximal filtration: strongly connected components of the crossing
/// relation, lowest first, ties broken by least edge, with runs of
/// consecutive zero components merged.
pub fn compute_filtration(m: &GraphMap) -> Filtration {
    let n = m.graph().edge_count();
    let mut dg = DiGraph::<usize, ()>::new();
    let nodes: Vec<_> = (0..n).map(|i| dg.add_node(i)).collect();
    for e in 0..n {
        for d in m.dependencies(EdgeId(e)) {
            dg.add_edge(nodes[e], nodes[d.0], ());
        }
    }
    let sccs = petgraph::algo::tarjan_scc(&dg);
    let mut comp_of = vec![0usize; n];
    let mut comps: Vec<Vec<EdgeId>> = Vec::new();
    for scc in sccs {
        let mut es: Vec<EdgeId> = scc.iter().map(|&x| EdgeId(dg[x])).collect();
        es.sort();
        for e in &es {
            comp_of[e.0] = comps.len();
        }
        comps.push(es);
    }
    // comp c must come after every comp it depends on
    let k = comps.len();
    let mut waiting = vec![0usize; k];
    let mut dependents: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); k];
    for (c, es) in comps.iter().enumerate() {
        let deps: BTreeSet<usize> = es
            .iter()
            .flat_map(|&e| m.dependencies(e))
            .map(|d| comp_of[d.0])
            .filter(|&d| d != c)
            .collect();
        waiting[c] = deps.len();
        for d in deps {
            dependents[d].insert(c);
        }
    }
    let mut heap: BinaryHeap<Reverse<(EdgeId, usize)>> = BinaryHeap::new();
    for c in 0..k {
        if waiting[c] == 0 {
            heap.push(Reverse((comps[c][0], c)));
        }
    }
    let mut order = Vec::new();
    while let Some(Reverse((_, c))) = heap.pop() {
        order.push(c);
        for &d in &dependents[c] {
            waiting[d] -= 1;
            if waiting[d] == 0 {
                heap.push(Reverse((comps[d][0], d)));
            }
        }
    }
    let is_zero = |c: usize| {
        comps[c].len() == 1 && !m.dependencies(comps[c][0]).contains(&comps[c][0])
    };
    let mut strata: Vec<Vec<EdgeId>> = Vec::new();
    let mut last_zero = false;
    for c in order {
        let z = is_zero(c);
        if z && last_zero {
            let s = strata.last_mut().unwrap();
            s.extend(comps[c].iter().copied());
            s.sort();
        } else {
            strata.push(comps[c].clone());
        }
        last_zero = z;
    }
    Filtration { strata }
}

/// Checks that a declared filtration partitions the edges and that each
/// filtration element is invariant.
pub fn verify_filtration(m: &GraphMap, declared: &Filtration) -> Result<()> {
    let n = m.graph().edge_count();
    let mut seen = vec![false; n];
    for s in &declared.strata {
        if s.is_empty() {
            return Err(Error::InconsistentFiltration("empty stratum".into()));
        }
        for e in s {
            if e.0 >= n || seen[e.0] {
                return Err(Error::InconsistentFiltration(format!("edge listed twice or unknown: {}", e.0)));
            }
            seen[e.0] = true;
        }
    }
    if let Some(i) = seen.iter().position(|&x| !x) {
        return Err(Error::InconsistentFiltration(format!(
            "edge {} is in no stratum",
            m.graph().edge_name(EdgeId(i))
        )));
    }
    let level = declared.stratum_of(n);
    for e in m.graph().edge_ids() {
        for d in m.dependencies(e) {
            if level[d.0] > level[e.0] {
                return Err(Error::InconsistentFiltration(format!(
                    "image of {} crosses {} from a higher stratum",
                    m.graph().edge_name(e),
                    m.graph().edge_name(d)
                )));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub enum StratumKind {
    /// A single edge with `f(E) = E`.
    Fixed,
    /// Union of zero components.
    Zero,
    /// Several edges permuted among themselves.
    Periodic,
    /// A single edge. `edge` is oriented so that `f(edge) = edge · suffix`
    /// when such a suffix exists.
    NegNonlinear { edge: OrientedEdge, suffix: Option<EdgePath> },
    /// `f(edge) = edge · axis^exponent` with `axis` a primitive closed
    /// Nielsen path.
    NegLinear { edge: OrientedEdge, suffix: EdgePath, axis: EdgePath, exponent: i64 },
    Eg { pf: PfEigenvalue },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stratum {
    /// 0-based position in the filtration.
    pub index: usize,
    pub edges: Vec<EdgeId>,
    pub kind: StratumKind,
}

impl Stratum {
    pub fn is_eg(&self) -> bool {
        matches!(self.kind, StratumKind::Eg { .. })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, StratumKind::Zero)
    }

    pub fn is_fixed(&self) -> bool {
        matches!(self.kind, StratumKind::Fixed)
    }

    pub fn is_linear(&self) -> bool {
        matches!(self.kind, StratumKind::NegLinear { .. })
    }

    pub fn is_neg(&self) -> bool {
        matches!(self.kind, StratumKind::NegLinear { .. } | StratumKind::NegNonlinear { .. })
    }

    pub fn label(&self) -> &'static str {
        match self.kind {
            StratumKind::Fixed => "fixed",
            StratumKind::Zero => "zero",
            StratumKind::Periodic => "periodic",
            StratumKind::NegNonlinear { .. } => "NEG",
            StratumKind::NegLinear { .. } => "linear",
            StratumKind::Eg { .. } => "EG",
        }
    }
}

/// `(edge, u)` with `f(edge) = edge · u`, trying both orientations.
fn neg_form(m: &GraphMap, e: EdgeId) -> Option<(OrientedEdge, EdgePath)> {
    let g = m.graph();
    for d in [OrientedEdge::forward(e), OrientedEdge::new(e, true)] {
        let img = m.image_edges(d);
        if img[0] == d && img.len() > 1 && !img[1..].iter().any(|x| x.edge() == e) {
            let u = EdgePath { start: g.term(d), edges: img[1..].to_vec() };
            return Some((d, u));
        }
    }
    None
}

/// Classifies each stratum. When a catalog is supplied, the axis of every
/// linear edge must decompose into catalogued Nielsen paths.
pub fn classify_strata(
    m: &GraphMap,
    filtration: &Filtration,
    catalog: Option<&NielsenCatalog>,
) -> Result<Vec<Stratum>> {
    let g = m.graph();
    let t = m.transition_matrix();
    let mut out = Vec::new();
    for (index, edges) in filtration.strata.iter().enumerate() {
        let block: Vec<Vec<u64>> = edges
            .iter()
            .map(|i| edges.iter().map(|j| t[i.0][j.0]).collect())
            .collect();
        let zero = block.iter().all(|r| r.iter().all(|&x| x == 0));
        let kind = if zero {
            StratumKind::Zero
        } else if edges.len() == 1 {
            let e = edges[0];
            if m.is_fixed_edge(e) {
                StratumKind::Fixed
            } else if block[0][0] > 1 {
                StratumKind::Eg { pf: perron_frobenius(&block, 1e-12) }
            } else {
                match neg_form(m, e) {
                    None => StratumKind::NegNonlinear { edge: OrientedEdge::forward(e), suffix: None },
                    Some((d, u)) => {
                        if m.apply(&u) == u && u.is_closed(g) {
                            let r = root_length(&u.edges);
                            let axis = EdgePath { start: u.start, edges: u.edges[..r].to_vec() };
                            let exponent = (u.len() / r) as i64;
                            if let Some(cat) = catalog {
                                if cat.decompose_closed(g, &axis).is_none() {
                                    return Err(Error::CatalogIncomplete(format!(
                                        "axis {} of {} does not decompose into catalogued Nielsen paths",
                                        g.format_path(&axis),
                                        g.edge_name(e)
                                    )));
                                }
                            }
                            StratumKind::NegLinear { edge: d, suffix: u, axis, exponent }
                        } else {
                            StratumKind::NegNonlinear { edge: d, suffix: Some(u) }
                        }
                    }
                }
            }
        } else if is_permutation_matrix(&block) {
            StratumKind::Periodic
        } else {
            if block.iter().any(|r| r.iter().all(|&x| x == 0)) {
                return Err(Error::InconsistentFiltration(format!(
                    "stratum {} is neither zero nor irreducible",
                    index + 1
                )));
            }
            StratumKind::Eg { pf: perron_frobenius(&block, 1e-12) }
        };
        out.push(Stratum { index, edges: edges.clone(), kind });
    }
    Ok(out)
}

/// A linear edge with its axis normalised across its axis class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearEdge {
    pub edge: OrientedEdge,
    pub axis: EdgePath,
    pub exponent: i64,
}

/// Linear edges sharing an unoriented axis. The stored orientation of the
/// axis is the one carried by the least edge of the group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Axis {
    pub word: EdgePath,
    pub edges: Vec<LinearEdge>,
}

impl Axis {
    pub fn multiplicity(&self) -> usize {
        self.edges.len()
    }
}

/// Groups linear edges by axis and flips `(w, d)` to `(w̄, -d)` where needed
/// so that each group shares one orientation.
pub fn axes(g: &MarkedGraph, strata: &[Stratum]) -> Vec<Axis> {
    use crate::paths::Circuit;
    let mut groups: Vec<(Circuit, Axis)> = Vec::new();
    let mut linear: Vec<(OrientedEdge, EdgePath, i64)> = strata
        .iter()
        .filter_map(|s| match &s.kind {
            StratumKind::NegLinear { edge, axis, exponent, .. } => Some((*edge, axis.clone(), *exponent)),
            _ => None,
        })
        .collect();
    linear.sort_by_key(|x| x.0.edge());
    for (edge, w, d) in linear {
        let c = Circuit::from_cyclic_word(&w.edges);
        if let Some((gc, ax)) = groups.iter_mut().find(|(gc, _)| gc.same_unoriented(&c)) {
            let (w, d) = if *gc == c { (w, d) } else { (w.inverse(g), -d) };
            ax.edges.push(LinearEdge { edge, axis: w, exponent: d });
        } else {
            groups.push((c, Axis { word: w.clone(), edges: vec![LinearEdge { edge, axis: w, exponent: d }] }));
        }
    }
    groups.into_iter().map(|x| x.1).collect()
}

pub fn detect_linear_edges(g: &MarkedGraph, strata: &[Stratum]) -> Vec<LinearEdge> {
    let mut v: Vec<LinearEdge> = axes(g, strata).into_iter().flat_map(|a| a.edges).collect();
    v.sort_by_key(|l| l.edge.edge());
    v
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirectionClass {
    Periodic { period: usize },
    Preperiodic,
}

#[derive(Clone, Debug)]
pub struct DirectionMap {
    pub df: Vec<OrientedEdge>,
    pub class: Vec<DirectionClass>,
}

impl DirectionMap {
    pub fn new(m: &GraphMap) -> Self {
        let n = 2 * m.graph().edge_count();
        let df: Vec<OrientedEdge> = (0..n).map(|i| m.df(OrientedEdge::from_index(i))).collect();
        let mut class = vec![DirectionClass::Preperiodic; n];
        for i in 0..n {
            let mut x = df[i].index();
            for step in 1..=n {
                if x == i {
                    class[i] = DirectionClass::Periodic { period: step };
                    break;
                }
                x = df[x].index();
            }
        }
        DirectionMap { df, class }
    }

    pub fn apply(&self, d: OrientedEdge) -> OrientedEdge {
        self.df[d.index()]
    }

    pub fn is_fixed(&self, d: OrientedEdge) -> bool {
        self.df[d.index()] == d
    }

    pub fn is_periodic(&self, d: OrientedEdge) -> bool {
        matches!(self.class[d.index()], DirectionClass::Periodic { .. })
    }

    pub fn period(&self, d: OrientedEdge) -> Option<usize> {
        match self.class[d.index()] {
            DirectionClass::Periodic { period } => Some(period),
            DirectionClass::Preperiodic => None,
        }
    }

    /// A turn is illegal when some iterate of `Df` makes it degenerate.
    pub fn is_legal_turn(&self, a: OrientedEdge, b: OrientedEdge) -> bool {
        let mut seen = HashSet::new();
        let (mut x, mut y) = (a, b);
        loop {
            if x == y {
                return false;
            }
            let key = if x < y { (x, y) } else { (y, x) };
            if !seen.insert(key) {
                return true;
            }
            x = self.apply(x);
            y = self.apply(y);
        }
    }

    /// All nondegenerate illegal turns, as ordered pairs `a < b`.
    pub fn illegal_turns(&self, g: &MarkedGraph) -> Vec<(OrientedEdge, OrientedEdge)> {
        let mut out = Vec::new();
        for v in 0..g.vertex_count() {
            let dirs = g.directions_at(VertexId(v));
            for (i, &a) in dirs.iter().enumerate() {
                for &b in &dirs[i + 1..] {
                    if !self.is_legal_turn(a, b) {
                        out.push((a, b));
                    }
                }
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rose_map(names: &[&str], images: &[&str]) -> GraphMap {
        let edges: Vec<(&str, &str, &str)> = names.iter().map(|n| (*n, "v", "v")).collect();
        let g = MarkedGraph::new(&["v"], &edges).unwrap();
        GraphMap::from_image_strings(g, images).unwrap()
    }

    #[test]
    fn tighten_after_image() {
        let m = rose_map(&["A", "B"], &["A", "B A"]);
        let g = m.graph();
        let p = g.parse_path("B A' B'").unwrap();
        assert_eq!(g.format_path(&m.apply(&p)), "B A' B'");
        let q = g.parse_path("A B").unwrap();
        assert_eq!(g.format_path(&m.apply(&q)), "A B A");
    }

    #[test]
    fn compose_matches_iterate() {
        let m = rose_map(&["A", "B", "C"], &["A", "B A", "C B"]);
        let m3 = m.power(3).unwrap();
        for e in m.graph().edge_ids() {
            let p = m.edge_image(e);
            assert_eq!(m3.apply(&p), m.iterate(&p, 3));
        }
    }

    #[test]
    fn filtration_and_kinds() {
        let m = rose_map(&["E1", "E2", "E3", "E4"], &["E1", "E2 E1 E1", "E3 E1", "E4 E3 E3 E2'"]);
        let f = compute_filtration(&m);
        assert_eq!(f.strata, vec![vec![EdgeId(0)], vec![EdgeId(1)], vec![EdgeId(2)], vec![EdgeId(3)]]);
        let s = classify_strata(&m, &f, None).unwrap();
        assert_eq!(s.iter().map(|s| s.label()).collect::<Vec<_>>(), ["fixed", "linear", "linear", "NEG"]);
        let lin = detect_linear_edges(m.graph(), &s);
        assert_eq!(lin.len(), 2);
        assert_eq!(lin[0].exponent, 2);
        assert_eq!(lin[1].exponent, 1);
        assert_eq!(m.graph().format_path(&lin[0].axis), "E1");
    }

    #[test]
    fn eg_stratum_eigenvalue() {
        let m = rose_map(&["A", "B"], &["A B", "A"]);
        let s = classify_strata(&m, &compute_filtration(&m), None).unwrap();
        assert_eq!(s.len(), 1);
        match &s[0].kind {
            StratumKind::Eg { pf } => assert!((pf.approx - 1.618033988749895).abs() < 1e-11),
            k => panic!("{k:?}"),
        }
    }

    #[test]
    fn reversed_linear_edge_and_axis_flip() {
        // f(B) = A B reads as f(B') = B' A'
        let m = rose_map(&["A", "B", "C"], &["A", "A B", "C A A"]);
        let s = classify_strata(&m, &compute_filtration(&m), None).unwrap();
        let ax = axes(m.graph(), &s);
        assert_eq!(ax.len(), 1);
        assert_eq!(ax[0].edges.len(), 2);
        assert_eq!(ax[0].edges[0].edge, OrientedEdge::new(EdgeId(1), true));
        assert_eq!(ax[0].edges[0].exponent, 1);
        assert_eq!(ax[0].edges[1].exponent, -2);
        assert_eq!(ax[0].edges[1].axis, ax[0].edges[0].axis);
    }

    #[test]
    fn zero_strata_are_merged() {
        let g = MarkedGraph::new(
            &["v", "w"],
            &[("A", "v", "v"), ("B", "v", "v"), ("X", "w", "v"), ("Y", "w", "v")],
        )
        .unwrap();
        let m = GraphMap::from_image_strings(g, &["A B", "A", "A", "B"]).unwrap();
        let f = compute_filtration(&m);
        assert_eq!(f.strata, vec![vec![EdgeId(0), EdgeId(1)], vec![EdgeId(2), EdgeId(3)]]);
        let s = classify_strata(&m, &f, None).unwrap();
        assert!(s[0].is_eg() && s[1].is_zero());
        assert!(verify_filtration(&m, &f).is_ok());
        let bad = Filtration { strata: vec![vec![EdgeId(1), EdgeId(2), EdgeId(3)], vec![EdgeId(0)]] };
        assert!(verify_filtration(&m, &bad).is_err());
    }

    #[test]
    fn illegal_turns_of_a_fibonacci_map() {
        let m = rose_map(&["A", "B"], &["A B", "A"]);
        let d = DirectionMap::new(&m);
        let a = OrientedEdge::forward(EdgeId(0));
        let b = OrientedEdge::forward(EdgeId(1));
        assert!(!d.is_legal_turn(a, b));
        assert!(d.is_legal_turn(a, a.inverse()));
        assert_eq!(d.illegal_turns(m.graph()), vec![(a, b)]);
    }
}
