//! Clause-by-clause checks of the normal form required of the input map.

use std::collections::BTreeSet;

use crate::analysis::MapAnalysis;
use crate::graph_map::{GraphMap, StratumKind};
use crate::nielsen::{build_catalog, NielsenKind, SplitVerdict};
use crate::paths::{EdgeId, MarkedGraph, OrientedEdge, VertexId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Clause {
    /// EG strata map into themselves and edge images are legal.
    TrainTrack,
    /// Attaching vertices are principal.
    AttachingVertices,
    /// Non-fixed NEG strata are single edges `E·u` with principal initial
    /// vertex.
    NegEdges,
    /// Linear edges on a common axis share it and have distinct exponents.
    LinearAxes,
    /// Nielsen path constraints.
    NielsenPaths,
    /// Components of the periodic set.
    PeriodicSet,
    /// Zero strata.
    ZeroStrata,
    /// Edge images are completely split.
    CompletelySplit,
    /// Principal vertices and their periodic directions are fixed.
    ForwardRotationless,
}

impl Clause {
    pub fn tag(self) -> &'static str {
        match self {
            Clause::TrainTrack => "RTT",
            Clause::AttachingVertices => "V",
            Clause::NegEdges => "NEG",
            Clause::LinearAxes => "L",
            Clause::NielsenPaths => "N",
            Clause::PeriodicSet => "Per",
            Clause::ZeroStrata => "Z",
            Clause::CompletelySplit => "split",
            Clause::ForwardRotationless => "rotationless",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClauseVerdict {
    pub clause: Clause,
    pub passed: bool,
    /// Witnesses of failure.
    pub failures: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CtReport {
    pub clauses: Vec<ClauseVerdict>,
    pub principal_vertices: Vec<VertexId>,
    /// Limits of what was checked, e.g. search bounds.
    pub caveats: Vec<String>,
}

impl CtReport {
    pub fn passed(&self) -> bool {
        self.clauses.iter().all(|c| c.passed)
    }

    pub fn clause(&self, c: Clause) -> &ClauseVerdict {
        self.clauses.iter().find(|v| v.clause == c).expect("every clause is reported")
    }

    pub fn describe(&self, g: &MarkedGraph) -> String {
        let mut s = String::new();
        for c in &self.clauses {
            s.push_str(&format!("{:<13}{}\n", c.clause.tag(), if c.passed { "pass" } else { "FAIL" }));
            for f in &c.failures {
                s.push_str(&format!("    {f}\n"));
            }
        }
        let pv: Vec<&str> = self.principal_vertices.iter().map(|&v| g.vertex_name(v)).collect();
        s.push_str(&format!("principal vertices: {}\n", pv.join(" ")));
        for c in &self.caveats {
            s.push_str(&format!("note: {c}\n"));
        }
        s
    }
}

fn verdict(clause: Clause, failures: Vec<String>) -> ClauseVerdict {
    ClauseVerdict { clause, passed: failures.is_empty(), failures }
}

pub fn periodic_vertices(m: &GraphMap) -> BTreeSet<VertexId> {
    let n = m.graph().vertex_count();
    (0..n)
        .map(VertexId)
        .filter(|&v| {
            let mut w = m.vertex_image(v);
            for _ in 0..n {
                if w == v {
                    return true;
                }
                w = m.vertex_image(w);
            }
            false
        })
        .collect()
}

/// Edges with `f^k(E) = E` for some `k`.
pub fn periodic_edges(m: &GraphMap) -> Vec<EdgeId> {
    let g = m.graph();
    let n = g.edge_count();
    g.edge_ids()
        .filter(|&e| {
            let d = OrientedEdge::forward(e);
            let mut x = d;
            for _ in 0..n {
                let img = m.image_edges(x);
                if img.len() != 1 {
                    return false;
                }
                x = img[0];
                if x == d {
                    return true;
                }
            }
            false
        })
        .collect()
}

/// Components of the periodic set: each periodic vertex with the periodic
/// edges that reach it.
fn periodic_components(m: &GraphMap) -> Vec<(BTreeSet<VertexId>, Vec<EdgeId>)> {
    let g = m.graph();
    let pe = periodic_edges(m);
    let mut comps = g.components(&pe);
    let covered: BTreeSet<VertexId> = comps.iter().flat_map(|c| c.0.iter().copied()).collect();
    for v in periodic_vertices(m) {
        if !covered.contains(&v) {
            comps.push((BTreeSet::from([v]), Vec::new()));
        }
    }
    comps
}

fn periodic_directions_at(a: &MapAnalysis, v: VertexId) -> Vec<OrientedEdge> {
    a.map
        .graph()
        .directions_at(v)
        .into_iter()
        .filter(|&d| a.directions.is_periodic(d))
        .collect()
}

/// Periodic vertices other than the two excluded kinds: isolated in their
/// Nielsen class with two periodic directions in one EG stratum, or on a
/// circle of the periodic set with two periodic directions everywhere.
pub fn principal_vertices(a: &MapAnalysis) -> BTreeSet<VertexId> {
    let g = a.map.graph();
    let per = periodic_vertices(&a.map);
    let comps = periodic_components(&a.map);
    // Nielsen classes among periodic vertices
    let mut uf = petgraph::unionfind::UnionFind::<usize>::new(g.vertex_count());
    for c in &comps {
        let vs: Vec<&VertexId> = c.0.iter().collect();
        for w in vs.windows(2) {
            uf.union(w[0].0, w[1].0);
        }
    }
    for e in &a.catalog.entries {
        uf.union(e.path.start.0, e.path.end(g).0);
    }
    let mut out = BTreeSet::new();
    for &v in &per {
        let dirs = periodic_directions_at(a, v);
        let alone = per.iter().all(|&w| w == v || uf.find(w.0) != uf.find(v.0));
        let two_in_one_eg = dirs.len() == 2
            && a.level[dirs[0].edge().0] == a.level[dirs[1].edge().0]
            && a.stratum_of(dirs[0].edge()).is_eg();
        if alone && two_in_one_eg {
            continue;
        }
        let comp = comps.iter().find(|c| c.0.contains(&v)).unwrap();
        let is_circle = !comp.1.is_empty()
            && comp.1.len() == comp.0.len()
            && comp.0.iter().all(|&w| {
                comp.1.iter().map(|&e| (g.edge(e).from == w) as usize + (g.edge(e).to == w) as usize).sum::<usize>() == 2
            });
        if is_circle && comp.0.iter().all(|&w| periodic_directions_at(a, w).len() == 2) {
            continue;
        }
        out.insert(v);
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RotationlessReport {
    pub forward_rotationless: bool,
    pub non_fixed_principal: Vec<VertexId>,
    /// Periodic directions of period greater than one at principal
    /// vertices.
    pub rotating_directions: Vec<(OrientedEdge, usize)>,
}

pub fn check_forward_rotationless(a: &MapAnalysis) -> RotationlessReport {
    let g = a.map.graph();
    let mut non_fixed = Vec::new();
    let mut rotating = Vec::new();
    for v in principal_vertices(a) {
        if a.map.vertex_image(v) != v {
            non_fixed.push(v);
        }
        for d in g.directions_at(v) {
            if let Some(p) = a.directions.period(d) {
                if p > 1 {
                    rotating.push((d, p));
                }
            }
        }
    }
    RotationlessReport {
        forward_rotationless: non_fixed.is_empty() && rotating.is_empty(),
        non_fixed_principal: non_fixed,
        rotating_directions: rotating,
    }
}

fn is_forest(g: &MarkedGraph, edges: &[EdgeId]) -> bool {
    g.components(edges).iter().all(|(v, e)| e.len() + 1 == v.len())
}

pub fn check_ct(a: &MapAnalysis) -> CtReport {
    let m = &a.map;
    let g = m.graph();
    let principal = principal_vertices(a);
    let mut caveats = Vec::new();
    let mut clauses = Vec::new();

    // train track property of EG strata
    let mut rtt = Vec::new();
    for s in a.strata.iter().filter(|s| s.is_eg()) {
        for &e in &s.edges {
            for d in [OrientedEdge::forward(e), OrientedEdge::new(e, true)] {
                if a.level[m.df(d).edge().0] != s.index {
                    rtt.push(format!("Df({}) leaves stratum {}", g.oriented_name(d), s.index + 1));
                }
            }
            let img = m.image_edges(OrientedEdge::forward(e));
            for w in img.windows(2) {
                if a.level[w[0].edge().0] == s.index
                    && a.level[w[1].edge().0] == s.index
                    && !a.directions.is_legal_turn(w[0].inverse(), w[1])
                {
                    rtt.push(format!("f({}) takes the illegal turn ({}, {})", g.edge_name(e), g.oriented_name(w[0].inverse()), g.oriented_name(w[1])));
                }
            }
        }
    }
    clauses.push(verdict(Clause::TrainTrack, rtt));

    // (V)
    let mut v_fail = Vec::new();
    for r in 1..=a.strata.len() {
        let gr = a.filtration.prefix_edges(r);
        let higher: BTreeSet<VertexId> = a.strata[r..].iter().flat_map(|s| g.vertices_of(&s.edges)).collect();
        for (verts, edges) in g.components(&gr) {
            if edges.len() < verts.len() {
                continue;
            }
            for v in verts.intersection(&higher) {
                if !principal.contains(v) {
                    v_fail.push(format!("attaching vertex {} (stratum {}) is not principal", g.vertex_name(*v), r));
                }
            }
        }
    }
    v_fail.sort();
    v_fail.dedup();
    clauses.push(verdict(Clause::AttachingVertices, v_fail));

    // (NEG)
    let mut neg = Vec::new();
    for s in &a.strata {
        match &s.kind {
            StratumKind::NegNonlinear { suffix: None, .. } => {
                neg.push(format!("image of {} is not of the form E·u", g.edge_name(s.edges[0])));
            }
            StratumKind::NegNonlinear { edge, suffix: Some(u) } | StratumKind::NegLinear { edge, suffix: u, .. } => {
                if !u.is_closed(g) {
                    neg.push(format!("suffix of {} is not closed", g.oriented_name(*edge)));
                }
                if u.edges.iter().any(|x| a.level[x.edge().0] >= s.index) {
                    neg.push(format!("suffix of {} is not below its stratum", g.oriented_name(*edge)));
                }
                if !principal.contains(&g.init(*edge)) {
                    neg.push(format!(
                        "initial vertex {} of {} is not principal",
                        g.vertex_name(g.init(*edge)),
                        g.oriented_name(*edge)
                    ));
                }
            }
            StratumKind::Periodic => neg.push(format!("stratum {} is a non-fixed permutation", s.index + 1)),
            _ => {}
        }
    }
    clauses.push(verdict(Clause::NegEdges, neg));

    // (L)
    let mut lin = Vec::new();
    for ax in &a.axes {
        for (i, li) in ax.edges.iter().enumerate() {
            for lj in &ax.edges[i + 1..] {
                if li.axis != lj.axis {
                    lin.push(format!(
                        "{} and {} have axes {} and {}",
                        g.oriented_name(li.edge),
                        g.oriented_name(lj.edge),
                        g.format_path(&li.axis),
                        g.format_path(&lj.axis)
                    ));
                }
                if li.exponent == lj.exponent {
                    lin.push(format!(
                        "{} and {} share the exponent {}",
                        g.oriented_name(li.edge),
                        g.oriented_name(lj.edge),
                        li.exponent
                    ));
                }
            }
        }
    }
    clauses.push(verdict(Clause::LinearAxes, lin));

    // (N)
    let mut nf = Vec::new();
    for s in a.strata.iter().filter(|s| s.is_eg()) {
        let count = a.catalog.eg_entries().filter(|e| e.height == s.index).count();
        if count > 1 {
            nf.push(format!("stratum {} has {count} indivisible Nielsen paths", s.index + 1));
        }
    }
    for e in &a.catalog.entries {
        if let NielsenKind::Linear { edge, .. } = e.kind {
            if a.linear_edge(edge).is_none() {
                nf.push(format!("Nielsen path {} of non-linear height", g.format_path(&e.path)));
            }
        }
    }
    let bound = a.catalog.length_bound;
    let cap = a.options.periodic_cap.min(bound);
    let mut mp = m.clone();
    for p in 2..=cap {
        let Ok(next) = GraphMap::compose(m, &mp) else { break };
        mp = next;
        match build_catalog(&mp, bound) {
            Ok(cat) => {
                for e in &cat.entries {
                    if m.apply(&e.path) != e.path {
                        nf.push(format!("{} is a Nielsen path of period {p}", g.format_path(&e.path)));
                    }
                }
                if !cat.complete {
                    caveats.push(format!("Nielsen search for the {p}-th iterate did not stabilise"));
                }
            }
            Err(err) => nf.push(format!("iterate {p}: {err}")),
        }
    }
    caveats.push(format!("periodic Nielsen paths checked for periods 2..={cap} up to length {bound}"));
    if !a.catalog.complete {
        caveats.push("Nielsen search did not stabilise; the catalog may be incomplete".into());
    }
    nf.sort();
    nf.dedup();
    clauses.push(verdict(Clause::NielsenPaths, nf));

    // (Per)
    let mut per = Vec::new();
    for (verts, edges) in periodic_components(m) {
        if edges.is_empty() {
            continue;
        }
        for v in &verts {
            if !principal.contains(v) {
                per.push(format!("vertex {} of a periodic component is not principal", g.vertex_name(*v)));
            }
            if m.vertex_image(*v) != *v {
                per.push(format!("vertex {} of a periodic component is not fixed", g.vertex_name(*v)));
            }
        }
        for &e in &edges {
            if !m.is_fixed_edge(e) {
                per.push(format!("periodic edge {} is not fixed", g.edge_name(e)));
            }
        }
        if edges.len() + 1 == verts.len() {
            let top = edges.iter().map(|e| a.level[e.0]).max().unwrap();
            let lower = a.filtration.prefix_edges(top);
            let ok = verts.iter().any(|&v| {
                lower.iter().map(|&e| (g.edge(e).from == v) as usize + (g.edge(e).to == v) as usize).sum::<usize>() >= 2
            });
            if !ok {
                per.push(format!("contractible periodic component through {} is not attached", g.edge_name(edges[0])));
            }
        }
    }
    clauses.push(verdict(Clause::PeriodicSet, per));

    // (Z)
    let mut z = Vec::new();
    for s in &a.strata {
        let gi = a.filtration.prefix_edges(s.index + 1);
        let comps = g.components(&gi);
        let own: BTreeSet<EdgeId> = s.edges.iter().copied().collect();
        let is_union_of_tree_components = comps
            .iter()
            .filter(|(_, es)| es.iter().any(|e| own.contains(e)))
            .all(|(vs, es)| es.iter().all(|e| own.contains(e)) && es.len() + 1 == vs.len());
        if s.is_zero() != is_union_of_tree_components {
            z.push(format!(
                "stratum {} is {} but {} a contractible component",
                s.index + 1,
                s.label(),
                if is_union_of_tree_components { "is" } else { "is not" }
            ));
        }
        if s.is_zero() {
            if let Some(next) = a.strata[s.index + 1..].iter().find(|t| !t.is_zero()) {
                if !next.is_eg() {
                    z.push(format!("first irreducible stratum above zero stratum {} is not EG", s.index + 1));
                }
                let gj = a.filtration.prefix_edges(next.index + 1);
                if g.components(&gj).iter().any(|(vs, es)| es.len() + 1 == vs.len()) {
                    z.push(format!("a component of the filtration element at stratum {} is contractible", next.index + 1));
                }
            }
            for v in g.vertices_of(&s.edges) {
                let dirs: Vec<OrientedEdge> = g.directions_at(v);
                let inside: Vec<OrientedEdge> = dirs.iter().copied().filter(|d| own.contains(&d.edge())).collect();
                let images: BTreeSet<OrientedEdge> = inside.iter().map(|&d| m.df(d)).collect();
                if images.len() != inside.len() {
                    z.push(format!("f is not an immersion on zero stratum {} at {}", s.index + 1, g.vertex_name(v)));
                }
                if inside.len() == dirs.len() && inside.len() < 3 {
                    z.push(format!("vertex {} has its link in zero stratum {} but valence {}", g.vertex_name(v), s.index + 1, inside.len()));
                }
            }
        }
    }
    clauses.push(verdict(Clause::ZeroStrata, z));

    // completely split edge images
    let mut split = Vec::new();
    for e in g.edge_ids() {
        match a.edge_splitting(e) {
            Ok(cs) => match cs.verdict {
                SplitVerdict::Certified => {}
                SplitVerdict::VerifiedToDepth(k) => {
                    caveats.push(format!("splitting of f({}) verified for {k} iterates", g.edge_name(e)));
                }
                SplitVerdict::Failed { juncture, iterate } => split.push(format!(
                    "f({}) = {} fails to split at juncture {juncture} after {iterate} iterates",
                    g.edge_name(e),
                    cs.describe(g)
                )),
            },
            Err(err) => split.push(format!("f({}): {err}", g.edge_name(e))),
        }
    }
    clauses.push(verdict(Clause::CompletelySplit, split));

    let rot = check_forward_rotationless(a);
    let mut rf = Vec::new();
    for v in &rot.non_fixed_principal {
        rf.push(format!("principal vertex {} is not fixed", g.vertex_name(*v)));
    }
    for (d, p) in &rot.rotating_directions {
        rf.push(format!("direction {} at a principal vertex has period {p}", g.oriented_name(*d)));
    }
    clauses.push(verdict(Clause::ForwardRotationless, rf));

    CtReport { clauses, principal_vertices: principal.into_iter().collect(), caveats }
}

/// An edge whose dependency closure is a forest spans an invariant forest.
pub fn invariant_forest(m: &GraphMap) -> Option<Vec<EdgeId>> {
    let g = m.graph();
    for e in g.edge_ids() {
        let mut closure: BTreeSet<EdgeId> = BTreeSet::from([e]);
        let mut stack = vec![e];
        while let Some(x) = stack.pop() {
            for d in m.dependencies(x) {
                if closure.insert(d) {
                    stack.push(d);
                }
            }
        }
        let c: Vec<EdgeId> = closure.into_iter().collect();
        if is_forest(g, &c) {
            return Some(c);
        }
    }
    None
}
