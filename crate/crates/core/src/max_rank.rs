//! Rank bookkeeping along the filtration, FPS blocks, the structure of
//! maximal rank examples, and the two model families.

use std::collections::{BTreeSet, HashSet};

use crate::analysis::{AnalysisOptions, MapAnalysis};
use crate::ct_check::invariant_forest;
use crate::disintegration::{build_fa, disintegrate, Disintegration};
use crate::error::{Error, Result};
use crate::free_group::{homology_class, is_ia, pi1_images, SpanningTree, Word};
use crate::graph_map::{Filtration, GraphMap, StratumKind};
use crate::paths::{EdgeId, EdgePath, MarkedGraph, OrientedEdge, VertexId};

/// `R_0 = 0, R_1, .., R_N`: lattice ranks of the restrictions to the
/// filtration elements.
pub fn stage_ranks(a: &MapAnalysis) -> Result<Vec<usize>> {
    let n = a.strata.len();
    let mut out = vec![0];
    for j in 1..=n {
        if j == n {
            out.push(disintegrate(a)?.lattice.rank());
            break;
        }
        let edges = a.filtration.prefix_edges(j);
        let (sub, ids) = a.map.restrict(&edges)?;
        let local = |e: &EdgeId| EdgeId(ids.binary_search(e).expect("edge of the prefix"));
        let strata = a.filtration.strata[..j].iter().map(|s| s.iter().map(local).collect()).collect();
        let options = AnalysisOptions { nielsen_bound: Some(a.catalog.length_bound), ..a.options.clone() };
        let sa = MapAnalysis::with_filtration(sub, Filtration { strata }, options)?;
        out.push(disintegrate(&sa)?.lattice.rank());
    }
    Ok(out)
}

fn endpoint_count(g: &MarkedGraph, edges: &[EdgeId], v: VertexId) -> usize {
    edges.iter().map(|&e| (g.edge(e).from == v) as usize + (g.edge(e).to == v) as usize).sum()
}

fn has_valence_one(g: &MarkedGraph, edges: &[EdgeId]) -> bool {
    g.vertices_of(edges).into_iter().any(|v| endpoint_count(g, edges, v) == 1)
}

/// `l_0 < l_1 < .. < l_K = N`: `l_0` is the number of initial strata that
/// are non-contractible components of their filtration element, the
/// others are the later elements without valence one vertices.
pub fn default_grouping(a: &MapAnalysis) -> Vec<usize> {
    let g = a.map.graph();
    let n = a.strata.len();
    let mut k = 0;
    while k < n {
        let own = &a.strata[k].edges;
        let below: BTreeSet<VertexId> = g.vertices_of(&a.filtration.prefix_edges(k));
        let comps = g.components(own);
        let separate = comps.len() == 1 && g.vertices_of(own).is_disjoint(&below);
        if separate && own.len() >= comps[0].0.len() {
            k += 1;
        } else {
            break;
        }
    }
    let mut out = vec![k];
    for j in k + 1..=n {
        if j == n || !has_valence_one(g, &a.filtration.prefix_edges(j)) {
            out.push(j);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AuditCase {
    /// (a) an FPS block with no fixed direction into it.
    FullFps,
    /// (b) a partial FPS block with a fixed direction.
    PartialFps,
    /// (c) one linear edge with a fixed direction.
    SingleLinear,
    /// (d) two linear edges with a common new initial vertex.
    LinearPair,
}

impl AuditCase {
    pub fn letter(self) -> char {
        match self {
            AuditCase::FullFps => 'a',
            AuditCase::PartialFps => 'b',
            AuditCase::SingleLinear => 'c',
            AuditCase::LinearPair => 'd',
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AuditStage {
    /// Strata `from..to` (0-based) form the block.
    pub from: usize,
    pub to: usize,
    pub delta_rank: i64,
    pub delta_chi: i64,
    pub delta: i64,
    pub holds: bool,
    pub equality: bool,
    pub case: Option<AuditCase>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankAudit {
    pub ranks: Vec<usize>,
    pub grouping: Vec<usize>,
    pub stages: Vec<AuditStage>,
}

impl RankAudit {
    /// The inequality holds everywhere and every equality has a case.
    pub fn ok(&self) -> bool {
        self.stages.iter().all(|s| s.holds && (!s.equality || s.case.is_some()))
    }

    pub fn describe(&self) -> String {
        let mut s = format!("R = {:?}\n", self.ranks);
        for st in &self.stages {
            s.push_str(&format!(
                "strata {}..={}: dR={} dchi={} delta={} {}{}\n",
                st.from + 1,
                st.to,
                st.delta_rank,
                st.delta_chi,
                st.delta,
                if !st.holds {
                    "VIOLATED"
                } else if st.equality {
                    "equality"
                } else {
                    "strict"
                },
                st.case.map(|c| format!(" ({})", c.letter())).unwrap_or_default()
            ));
        }
        s
    }
}

fn linear_data(a: &MapAnalysis, s: usize) -> Option<(OrientedEdge, EdgePath, i64)> {
    match &a.strata[s].kind {
        StratumKind::NegLinear { edge, axis, exponent, .. } => Some((*edge, axis.clone(), *exponent)),
        _ => None,
    }
}

fn stage_case(a: &MapAnalysis, from: usize, to: usize, delta: i64) -> Option<AuditCase> {
    let g = a.map.graph();
    match (to - from, delta) {
        (1, 1) if a.strata[from].is_linear() => Some(AuditCase::SingleLinear),
        (2, 0) => {
            let (e1, _, _) = linear_data(a, from)?;
            let (e2, _, _) = linear_data(a, from + 1)?;
            (g.init(e1) == g.init(e2)).then_some(AuditCase::LinearPair)
        }
        (3, 1) => fps_at(a, from, FpsKind::Partial).ok().map(|_| AuditCase::PartialFps),
        (4, 0) => fps_at(a, from, FpsKind::Full).ok().map(|_| AuditCase::FullFps),
        _ => None,
    }
}

/// Checks `ΔR ≤ 2Δχ − δ` on each block of `grouping` (defaults to
/// [`default_grouping`]) and tags equalities with their case.
pub fn rank_audit(a: &MapAnalysis, grouping: Option<&[usize]>) -> Result<RankAudit> {
    let n = a.strata.len();
    let grouping = grouping.map(|x| x.to_vec()).unwrap_or_else(|| default_grouping(a));
    if grouping.is_empty() || grouping.windows(2).any(|w| w[0] >= w[1]) || *grouping.last().unwrap() != n {
        return Err(Error::Domain(format!("grouping {grouping:?} must increase strictly to {n}")));
    }
    let ranks = stage_ranks(a)?;
    let g = a.map.graph();
    let chi = |j: usize| g.subgraph_euler_characteristic(&a.filtration.prefix_edges(j));
    let mut stages = Vec::new();
    for w in grouping.windows(2) {
        let (from, to) = (w[0], w[1]);
        let below = g.vertices_of(&a.filtration.prefix_edges(from));
        let delta = a.strata[from..to]
            .iter()
            .flat_map(|s| s.edges.iter())
            .flat_map(|&e| [OrientedEdge::forward(e), OrientedEdge::new(e, true)])
            .any(|d| below.contains(&g.init(d)) && a.directions.is_fixed(d)) as i64;
        let delta_rank = ranks[to] as i64 - ranks[from] as i64;
        let delta_chi = chi(from) - chi(to);
        let bound = 2 * delta_chi - delta;
        let equality = delta_rank == bound;
        stages.push(AuditStage {
            from,
            to,
            delta_rank,
            delta_chi,
            delta,
            holds: delta_rank <= bound,
            equality,
            case: if equality { stage_case(a, from, to, delta) } else { None },
        });
    }
    Ok(RankAudit { ranks, grouping, stages })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpsKind {
    /// Two linear edges and an EG stratum.
    Partial,
    /// Three linear edges and an EG stratum.
    Full,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FpsShape {
    PairOfArcs,
    Triad,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearPiece {
    pub stratum: usize,
    pub edge: OrientedEdge,
    /// Closed Nielsen path `α` with `f(E) = E·α^d`.
    pub alpha: EdgePath,
    pub exponent: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FpsWitness {
    pub kind: FpsKind,
    /// Strata below the block.
    pub lower: Vec<usize>,
    pub linear: Vec<LinearPiece>,
    pub eg_stratum: usize,
    pub shape: FpsShape,
    /// Where the EG stratum meets the rest of the block and below.
    pub attaching: Vec<VertexId>,
    pub chi_drop: i64,
}

/// Block `l+1 ..` of the filtration as an FPS subgraph.
pub fn fps_at(a: &MapAnalysis, l: usize, kind: FpsKind) -> std::result::Result<FpsWitness, String> {
    let k = if kind == FpsKind::Full { 3 } else { 2 };
    if l + k >= a.strata.len() {
        return Err("not enough strata".into());
    }
    let lower: Vec<usize> = (0..l).collect();
    let linear: Vec<usize> = (l..l + k).collect();
    fps_check(a, &lower, &linear, l + k, kind)
}

/// Clause-by-clause check that `linear` and `eg`, added on top of the
/// strata `lower`, form an FPS subgraph of the given kind.
pub fn fps_check(
    a: &MapAnalysis,
    lower: &[usize],
    linear: &[usize],
    eg: usize,
    kind: FpsKind,
) -> std::result::Result<FpsWitness, String> {
    let g = a.map.graph();
    let name = |s: usize| format!("stratum {}", s + 1);
    let lower_edges: Vec<EdgeId> = lower.iter().flat_map(|&s| a.strata[s].edges.iter().copied()).collect();
    let lower_set: BTreeSet<usize> = lower.iter().copied().collect();
    let lower_verts = g.vertices_of(&lower_edges);
    // (1), (2)
    let mut pieces = Vec::new();
    for &s in linear {
        let (edge, alpha, exponent) = linear_data(a, s).ok_or_else(|| format!("{} is not a linear edge", name(s)))?;
        if alpha.edges.iter().any(|x| !lower_set.contains(&a.level[x.edge().0])) {
            return Err(format!("the axis of {} leaves the lower graph", name(s)));
        }
        if lower_verts.contains(&g.init(edge)) {
            return Err(format!("the initial vertex of {} lies in the lower graph", name(s)));
        }
        pieces.push(LinearPiece { stratum: s, edge, alpha, exponent });
    }
    let inits: BTreeSet<VertexId> = pieces.iter().map(|p| g.init(p.edge)).collect();
    if inits.len() != pieces.len() {
        return Err("the linear edges share an initial vertex".into());
    }
    // (3a)
    if !a.strata[eg].is_eg() {
        return Err(format!("{} is not EG", name(eg)));
    }
    // (3b)
    let top = &a.strata[eg].edges;
    let mut mid_edges = lower_edges.clone();
    mid_edges.extend(pieces.iter().map(|p| p.edge.edge()));
    let mid_verts = g.vertices_of(&mid_edges);
    let top_verts = g.vertices_of(top);
    let meet: BTreeSet<VertexId> = top_verts.intersection(&mid_verts).copied().collect();
    match kind {
        FpsKind::Full => {
            if meet != inits {
                return Err("the EG stratum does not meet the block exactly at the new initial vertices".into());
            }
        }
        FpsKind::Partial => {
            let extra: Vec<&VertexId> = meet.difference(&inits).collect();
            if !inits.is_subset(&meet) || extra.len() != 1 || !lower_verts.contains(extra[0]) {
                return Err("the EG stratum does not meet the block at the new initial vertices and one lower vertex".into());
            }
        }
    }
    // (3c) shape
    let comps = g.components(top);
    if comps.len() != 1 || top.len() + 1 != top_verts.len() {
        return Err("the EG stratum is not a tree".into());
    }
    let val = |v: VertexId| endpoint_count(g, top, v);
    let leaves: BTreeSet<VertexId> = top_verts.iter().copied().filter(|&v| val(v) == 1).collect();
    let branch: Vec<VertexId> = top_verts.iter().copied().filter(|&v| val(v) >= 3).collect();
    let shape = if leaves == meet && branch.len() == 1 && val(branch[0]) == 3 && !mid_verts.contains(&branch[0]) {
        FpsShape::Triad
    } else if leaves.len() == 2 && leaves.is_subset(&meet) && branch.is_empty() {
        FpsShape::PairOfArcs
    } else {
        return Err("the EG stratum is neither a pair of arcs nor a triad".into());
    };
    // images
    let m = &a.map;
    for &e in top {
        let img = m.image_edges(OrientedEdge::forward(e));
        let mut i = 0;
        while i < img.len() {
            let x = img[i];
            if a.level[x.edge().0] == eg {
                i += 1;
            } else if let Some(p) = pieces.iter().find(|p| p.edge == x) {
                let close = (i + 1..img.len()).find(|&j| img[j] == x.inverse());
                let Some(j) = close else {
                    return Err(format!("f({}) enters {} without returning", g.edge_name(e), g.oriented_name(x)));
                };
                let mid = EdgePath { start: g.term(x), edges: img[i + 1..j].to_vec() };
                if !is_power_of(g, &p.alpha, &mid) {
                    return Err(format!("f({}) has a non-Nielsen excursion into {}", g.edge_name(e), g.oriented_name(x)));
                }
                i = j + 1;
            } else if kind == FpsKind::Partial && lower_set.contains(&a.level[x.edge().0]) {
                let mut j = i;
                while j < img.len() && lower_set.contains(&a.level[img[j].edge().0]) {
                    j += 1;
                }
                let run = EdgePath { start: g.init(x), edges: img[i..j].to_vec() };
                if m.apply(&run) != run {
                    return Err(format!("f({}) crosses a non-Nielsen path {}", g.edge_name(e), g.format_path(&run)));
                }
                i = j;
            } else {
                return Err(format!("f({}) crosses {} outside the allowed pieces", g.edge_name(e), g.oriented_name(x)));
            }
        }
    }
    let mut all_edges = mid_edges.clone();
    all_edges.extend(top.iter().copied());
    let chi_drop = g.subgraph_euler_characteristic(&lower_edges) - g.subgraph_euler_characteristic(&all_edges);
    if chi_drop != 2 {
        return Err(format!("Euler characteristic drops by {chi_drop}, not 2"));
    }
    Ok(FpsWitness {
        kind,
        lower: lower.to_vec(),
        linear: pieces,
        eg_stratum: eg,
        shape,
        attaching: meet.into_iter().collect(),
        chi_drop,
    })
}

fn is_power_of(g: &MarkedGraph, w: &EdgePath, u: &EdgePath) -> bool {
    if u.is_trivial() {
        return true;
    }
    if w.is_trivial() || u.len() % w.len() != 0 {
        return false;
    }
    let k = (u.len() / w.len()) as i64;
    &w.power(g, k) == u || &w.power(g, -k) == u
}

/// Every window of the filtration that is an FPS or partial FPS subgraph.
pub fn detect_fps(a: &MapAnalysis) -> Vec<FpsWitness> {
    let mut out = Vec::new();
    for l in 0..a.strata.len() {
        for kind in [FpsKind::Partial, FpsKind::Full] {
            if let Ok(w) = fps_at(a, l, kind) {
                out.push(w);
            }
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    General,
    Ia,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BaseCase {
    /// A single EG stratum of rank two.
    EgRankTwo { stratum: usize },
    /// A fixed loop and a linear edge twisting around it.
    TwistPair { fixed: usize, linear: usize, exponent: i64 },
    /// A fixed loop, two linear edges and an EG triad or arc pair.
    PartialFps(FpsWitness),
    /// Two fixed edges spanning a connected rank two graph.
    FixedRankTwo { strata: [usize; 2] },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Block {
    LinearPair { strata: [usize; 2], vertex: VertexId },
    Fps(FpsWitness),
}

impl Block {
    pub fn strata(&self) -> Vec<usize> {
        match self {
            Block::LinearPair { strata, .. } => strata.to_vec(),
            Block::Fps(w) => {
                let mut s: Vec<usize> = w.linear.iter().map(|p| p.stratum).collect();
                s.push(w.eg_stratum);
                s
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Decomposed { base: BaseCase, blocks: Vec<Block>, order: Vec<usize> },
    NotMaximal,
    NotIa,
    NoDecomposition { explored: usize },
    Inconclusive { explored: usize },
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    pub mode: Mode,
    pub free_rank: usize,
    pub rank: usize,
    pub target: usize,
    pub outcome: Outcome,
}

impl Classification {
    pub fn decomposed(&self) -> bool {
        matches!(self.outcome, Outcome::Decomposed { .. })
    }

    pub fn describe(&self, g: &MarkedGraph) -> String {
        let mut s = format!("rank {} (maximum {} for free rank {})\n", self.rank, self.target, self.free_rank);
        match &self.outcome {
            Outcome::Decomposed { base, blocks, order } => {
                s.push_str(&format!("base: {}\n", match base {
                    BaseCase::EgRankTwo { .. } => "single EG stratum of rank two".to_string(),
                    BaseCase::TwistPair { exponent, .. } => format!("fixed loop with a linear edge, exponent {exponent}"),
                    BaseCase::PartialFps(w) => format!("fixed loop with a partial FPS {:?}", w.shape),
                    BaseCase::FixedRankTwo { .. } => "connected fixed rank two graph".to_string(),
                }));
                for b in blocks {
                    match b {
                        Block::LinearPair { vertex, .. } => {
                            s.push_str(&format!("block: linear pair at {}\n", g.vertex_name(*vertex)))
                        }
                        Block::Fps(w) => s.push_str(&format!("block: FPS {:?}\n", w.shape)),
                    }
                }
                let ord: Vec<String> = order.iter().map(|i| (i + 1).to_string()).collect();
                s.push_str(&format!("stratum order: {}\n", ord.join(" ")));
            }
            Outcome::NotMaximal => s.push_str("rank differs from the maximum\n"),
            Outcome::NotIa => s.push_str("some disintegration element acts nontrivially on homology\n"),
            Outcome::NoDecomposition { explored } => {
                s.push_str(&format!("no reordering decomposes ({explored} states explored)\n"))
            }
            Outcome::Inconclusive { explored } => {
                s.push_str(&format!("search stopped after {explored} states\n"))
            }
        }
        s
    }
}

pub const REORDER_LIMIT: usize = 10_000;

struct Search<'a> {
    a: &'a MapAnalysis,
    mode: Mode,
    deps: Vec<BTreeSet<usize>>,
    tree: SpanningTree,
    explored: usize,
    dead: HashSet<Vec<usize>>,
}

impl Search<'_> {
    fn ready(&self, placed: &BTreeSet<usize>, s: usize, with: &[usize]) -> bool {
        !placed.contains(&s) && self.deps[s].iter().all(|d| *d == s || placed.contains(d) || with.contains(d))
    }

    fn verts(&self, strata: &BTreeSet<usize>) -> BTreeSet<VertexId> {
        let edges: Vec<EdgeId> = strata.iter().flat_map(|&s| self.a.strata[s].edges.iter().copied()).collect();
        self.a.map.graph().vertices_of(&edges)
    }

    fn trivial_axis(&self, s: usize) -> bool {
        match self.mode {
            Mode::General => true,
            Mode::Ia => linear_data(self.a, s)
                .map(|(_, w, _)| homology_class(&self.tree, &w).iter().all(|&x| x == 0))
                .unwrap_or(false),
        }
    }

    fn bases(&self) -> Vec<(BaseCase, Vec<usize>)> {
        let a = self.a;
        let g = a.map.graph();
        let n = a.strata.len();
        let rank = |ss: &[usize]| {
            let e: Vec<EdgeId> = ss.iter().flat_map(|&s| a.strata[s].edges.iter().copied()).collect();
            1 - g.subgraph_euler_characteristic(&e)
        };
        let connected = |ss: &[usize]| {
            let e: Vec<EdgeId> = ss.iter().flat_map(|&s| a.strata[s].edges.iter().copied()).collect();
            g.components(&e).len() == 1
        };
        let none = BTreeSet::new();
        let mut out = Vec::new();
        match self.mode {
            Mode::General => {
                for s in 0..n {
                    if a.strata[s].is_eg() && self.ready(&none, s, &[]) && connected(&[s]) && rank(&[s]) == 2 {
                        out.push((BaseCase::EgRankTwo { stratum: s }, vec![s]));
                    }
                }
                for t in (0..n).filter(|&t| a.strata[t].is_fixed() && self.ready(&none, t, &[])) {
                    let e1 = a.strata[t].edges[0];
                    if g.edge(e1).from != g.edge(e1).to {
                        continue;
                    }
                    let on_loop: Vec<(usize, i64)> = (0..n)
                        .filter_map(|s| {
                            let (_, w, d) = linear_data(a, s)?;
                            (w.len() == 1 && w.edges[0].edge() == e1 && self.deps[s].iter().all(|x| *x == s || *x == t))
                                .then(|| (s, if w.edges[0].is_inverted() { -d } else { d }))
                        })
                        .collect();
                    for &(s, d) in &on_loop {
                        if rank(&[t, s]) == 2 {
                            out.push((BaseCase::TwistPair { fixed: t, linear: s, exponent: d.abs() }, vec![t, s]));
                        }
                    }
                    for (i, &(s2, d2)) in on_loop.iter().enumerate() {
                        for &(s3, d3) in &on_loop[i + 1..] {
                            if d2 == d3 {
                                continue;
                            }
                            for e in (0..n).filter(|&e| a.strata[e].is_eg()) {
                                if !self.ready(&BTreeSet::from([t]), e, &[s2, s3]) || rank(&[t, s2, s3, e]) != 3 {
                                    continue;
                                }
                                if let Ok(w) = fps_check(a, &[t], &[s2, s3], e, FpsKind::Partial) {
                                    out.push((BaseCase::PartialFps(w), vec![t, s2, s3, e]));
                                }
                            }
                        }
                    }
                }
            }
            Mode::Ia => {
                let fixed: Vec<usize> = (0..n).filter(|&t| a.strata[t].is_fixed()).collect();
                for (i, &t1) in fixed.iter().enumerate() {
                    for &t2 in &fixed[i + 1..] {
                        if connected(&[t1, t2]) && rank(&[t1, t2]) == 2 {
                            out.push((BaseCase::FixedRankTwo { strata: [t1, t2] }, vec![t1, t2]));
                        }
                    }
                }
            }
        }
        out
    }

    fn blocks(&self, placed: &BTreeSet<usize>) -> Vec<Block> {
        let a = self.a;
        let g = a.map.graph();
        let n = a.strata.len();
        let below = self.verts(placed);
        let lin: Vec<usize> = (0..n)
            .filter(|&s| a.strata[s].is_linear() && self.ready(placed, s, &[]) && self.trivial_axis(s))
            .collect();
        let mut out = Vec::new();
        for (i, &s) in lin.iter().enumerate() {
            for &t in &lin[i + 1..] {
                let (es, _, _) = linear_data(a, s).unwrap();
                let (et, _, _) = linear_data(a, t).unwrap();
                let v = g.init(es);
                if v == g.init(et) && !below.contains(&v) {
                    out.push(Block::LinearPair { strata: [s, t], vertex: v });
                }
            }
        }
        let lower: Vec<usize> = placed.iter().copied().collect();
        for (i, &s1) in lin.iter().enumerate() {
            for (j, &s2) in lin.iter().enumerate().skip(i + 1) {
                for &s3 in &lin[j + 1..] {
                    for e in (0..n).filter(|&e| a.strata[e].is_eg() && self.ready(placed, e, &[s1, s2, s3])) {
                        if let Ok(w) = fps_check(a, &lower, &[s1, s2, s3], e, FpsKind::Full) {
                            out.push(Block::Fps(w));
                        }
                    }
                }
            }
        }
        out
    }

    fn run(&mut self, placed: &mut BTreeSet<usize>, blocks: &mut Vec<Block>) -> Option<bool> {
        self.explored += 1;
        if self.explored > REORDER_LIMIT {
            return None;
        }
        if placed.len() == self.a.strata.len() {
            return Some(true);
        }
        let key: Vec<usize> = placed.iter().copied().collect();
        if self.dead.contains(&key) {
            return Some(false);
        }
        for b in self.blocks(placed) {
            let ss = b.strata();
            placed.extend(ss.iter().copied());
            blocks.push(b);
            match self.run(placed, blocks) {
                Some(true) => return Some(true),
                None => return None,
                Some(false) => {}
            }
            blocks.pop();
            for s in ss {
                placed.remove(&s);
            }
        }
        self.dead.insert(key);
        Some(false)
    }
}

/// Matches the map against the maximal rank structure: a base graph and
/// blocks of linear pairs and FPS subgraphs, over reorderings of the
/// filtration.
pub fn classify_max_rank(a: &MapAnalysis, mode: Mode) -> Result<Classification> {
    if let Some(forest) = invariant_forest(&a.map) {
        let g = a.map.graph();
        let names: Vec<&str> = forest.iter().map(|&e| g.edge_name(e)).collect();
        return Err(Error::InvariantForest(names.join(" ")));
    }
    let g = a.map.graph();
    let free_rank = (1 - g.euler_characteristic()) as usize;
    let d = disintegrate(a)?;
    let rank = d.lattice.rank();
    let target = match mode {
        Mode::General => 2 * free_rank - 3,
        Mode::Ia => 2 * free_rank - 4,
    };
    let mut result = Classification { mode, free_rank, rank, target, outcome: Outcome::NotMaximal };
    if mode == Mode::Ia && !all_ia(a, &d)? {
        result.outcome = Outcome::NotIa;
        return Ok(result);
    }
    if rank != target {
        return Ok(result);
    }
    let n = a.strata.len();
    let deps: Vec<BTreeSet<usize>> = (0..n)
        .map(|s| a.strata[s].edges.iter().flat_map(|&e| a.map.dependencies(e)).map(|e| a.level[e.0]).collect())
        .collect();
    let mut search = Search {
        a,
        mode,
        deps,
        tree: SpanningTree::bfs(g, VertexId(0)),
        explored: 0,
        dead: HashSet::new(),
    };
    for (base, strata) in search.bases() {
        let mut placed: BTreeSet<usize> = strata.iter().copied().collect();
        let mut blocks = Vec::new();
        match search.run(&mut placed, &mut blocks) {
            Some(true) => {
                let mut order = strata.clone();
                order.extend(blocks.iter().flat_map(|b| b.strata()));
                result.outcome = Outcome::Decomposed { base, blocks, order };
                return Ok(result);
            }
            None => {
                result.outcome = Outcome::Inconclusive { explored: search.explored };
                return Ok(result);
            }
            Some(false) => {}
        }
    }
    result.outcome = Outcome::NoDecomposition { explored: search.explored };
    Ok(result)
}

/// `f` and every nonnegative lattice basis element act trivially on
/// homology.
fn all_ia(a: &MapAnalysis, d: &Disintegration) -> Result<bool> {
    let n = (1 - a.map.graph().euler_characteristic()) as usize;
    if !is_ia(&pi1_images(&a.map), n) {
        return Ok(false);
    }
    for b in d.lattice.basis_i64() {
        if b.iter().all(|&x| x >= 0) && !is_ia(&pi1_images(&build_fa(a, d, &b)?), n) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A model graph with its standard generators and a generic
/// representative combining them with distinct exponents.
#[derive(Clone, Debug)]
pub struct ModelFamily {
    pub graph: MarkedGraph,
    pub generators: Vec<GraphMap>,
    pub generic: GraphMap,
}

/// The rose of rank `n` with `n − 2` petals subdivided: loops `E1`, `E2`
/// at `v1`, and `E_{2k−1}`, `E_{2k}` from `v_k` to `v1`.
pub fn subdivided_rose(n: usize) -> Result<MarkedGraph> {
    let vnames: Vec<String> = (1..n).map(|k| format!("v{k}")).collect();
    let mut edges = vec![("E1".to_string(), "v1".to_string(), "v1".to_string())];
    edges.push(("E2".into(), "v1".into(), "v1".into()));
    for k in 2..n {
        edges.push((format!("E{}", 2 * k - 1), format!("v{k}"), "v1".into()));
        edges.push((format!("E{}", 2 * k), format!("v{k}"), "v1".into()));
    }
    let e: Vec<(&str, &str, &str)> = edges.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    let v: Vec<&str> = vnames.iter().map(|s| s.as_str()).collect();
    MarkedGraph::new(&v, &e)
}

fn twist_family(g: &MarkedGraph, twisted: &[usize], w: &[OrientedEdge]) -> Result<ModelFamily> {
    let one = |powers: &dyn Fn(usize) -> i64| -> Result<GraphMap> {
        let wp = EdgePath { start: VertexId(0), edges: w.to_vec() };
        let images = g
            .edge_ids()
            .map(|e| {
                let base = EdgePath::edge(g, OrientedEdge::forward(e));
                let k = powers(e.0);
                if k == 0 { Ok(base) } else { base.concat(g, &wp.power(g, k)) }
            })
            .collect::<Result<Vec<_>>>()?;
        GraphMap::new(g.clone(), images)
    };
    let generators = twisted
        .iter()
        .map(|&t| one(&|e| (e == t) as i64))
        .collect::<Result<Vec<_>>>()?;
    let generic = one(&|e| twisted.iter().position(|&t| t == e).map_or(0, |i| i as i64 + 1))?;
    Ok(ModelFamily { graph: g.clone(), generators, generic })
}

/// Generators `E_{i+1} ↦ E_{i+1} E1` for `i = 1..=2n−3`; the generic
/// representative uses exponent `i` on `E_{i+1}`.
pub fn gen_type_e(n: usize) -> Result<ModelFamily> {
    if n < 3 {
        return Err(Error::Domain(format!("type E needs rank at least 3, got {n}")));
    }
    let g = subdivided_rose(n)?;
    let twisted: Vec<usize> = (1..2 * n - 2).collect();
    twist_family(&g, &twisted, &[OrientedEdge::forward(EdgeId(0))])
}

/// Generators `E_{i+2} ↦ E_{i+2} w` for `i = 1..=2n−4`, with `w` a
/// cyclically reduced, homologically trivial word in `x1 = E1`,
/// `x2 = E2`.
pub fn gen_type_c(n: usize, w: &Word) -> Result<ModelFamily> {
    if n < 4 {
        return Err(Error::Domain(format!("type C needs rank at least 4, got {n}")));
    }
    if w.is_empty() || w.0.iter().any(|&x| x.abs() > 2) {
        return Err(Error::Domain(format!("{} is not a nontrivial word in x1, x2", w.format())));
    }
    if w.exponent_sums(2).iter().any(|&x| x != 0) {
        return Err(Error::Domain(format!("{} is not homologically trivial", w.format())));
    }
    if w.0.len() > 1 && w.0[0] == -w.0[w.0.len() - 1] {
        return Err(Error::Domain(format!("{} is not cyclically reduced", w.format())));
    }
    let g = subdivided_rose(n)?;
    let path: Vec<OrientedEdge> =
        w.0.iter().map(|&x| OrientedEdge::new(EdgeId(x.unsigned_abs() as usize - 1), x < 0)).collect();
    let twisted: Vec<usize> = (2..2 * n - 2).collect();
    twist_family(&g, &twisted, &path)
}

/// Rank of the twist data of commuting generators whose edge images all
/// have the form `E` or `E·u` with `u` a power of a closed path. This is
/// only a proxy for the rank of the group they generate.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DRankProxy {
    pub commute: bool,
    pub rank: usize,
}

pub fn d_rank_proxy(generators: &[GraphMap]) -> Result<DRankProxy> {
    let mut commute = true;
    for (i, f) in generators.iter().enumerate() {
        for h in &generators[i + 1..] {
            if GraphMap::compose(f, h)? != GraphMap::compose(h, f)? {
                commute = false;
            }
        }
    }
    let mut columns: Vec<(EdgeId, Vec<OrientedEdge>)> = Vec::new();
    let mut rows: Vec<Vec<(usize, i64)>> = Vec::new();
    for f in generators {
        let g = f.graph();
        let mut row = Vec::new();
        for e in g.edge_ids() {
            let d = OrientedEdge::forward(e);
            let img = f.image_edges(d);
            if img == [d] {
                continue;
            }
            if img[0] != d || img[1..].iter().any(|x| x.edge() == e) {
                return Err(Error::Domain(format!("f({}) is not of the form E·u", g.edge_name(e))));
            }
            let u = &img[1..];
            let c = crate::paths::Circuit::from_cyclic_word(u);
            let root_len = crate::paths::root_length(&c.edges);
            let root = c.edges[..root_len].to_vec();
            let k = (u.len() / crate::paths::root_length(u)) as i64;
            let key = (e, root);
            let col = match columns.iter().position(|x| *x == key) {
                Some(i) => i,
                None => {
                    columns.push(key);
                    columns.len() - 1
                }
            };
            row.push((col, k));
        }
        rows.push(row);
    }
    let dense: Vec<Vec<i64>> = rows
        .iter()
        .map(|r| {
            let mut v = vec![0; columns.len()];
            for &(c, k) in r {
                v[c] = k;
            }
            v
        })
        .collect();
    Ok(DRankProxy { commute, rank: crate::coordinates::matrix_rank(&dense) })
}

/// Splits `v` into `v` (keeping both ends of the fixed loop `e1` and the
/// terminal ends of edges twisting around it) and a new vertex carrying
/// the other ends, joined by a new edge; then slides `v` once around
/// `e1^{-d}` where `f(e2) = e2·e1^d`, and collapses the now fixed `e2`.
#[derive(Clone, Debug)]
pub struct Surgery {
    pub split: GraphMap,
    pub shifted: GraphMap,
    pub collapsed: GraphMap,
}

pub fn split_vertex_shift(m: &GraphMap, v: VertexId, e1: EdgeId, e2: EdgeId) -> Result<Surgery> {
    let g = m.graph();
    let l1 = OrientedEdge::forward(e1);
    if g.edge(e1).from != v || g.edge(e1).to != v || !m.is_fixed_edge(e1) {
        return Err(Error::Domain(format!("{} is not a fixed loop at {}", g.edge_name(e1), g.vertex_name(v))));
    }
    let twist_of = |e: EdgeId| -> Option<i64> {
        let d = OrientedEdge::forward(e);
        let img = m.image_edges(d);
        (img.len() > 1 && img[0] == d && img[1..].iter().all(|x| x.edge() == e1) && img[1..].windows(2).all(|w| w[0] == w[1]))
            .then(|| if img[1] == l1 { img.len() as i64 - 1 } else { 1 - img.len() as i64 })
    };
    let d2 = twist_of(e2)
        .filter(|_| g.edge(e2).to == v)
        .ok_or_else(|| Error::Domain(format!("{} does not twist around {}", g.edge_name(e2), g.edge_name(e1))))?;
    // side 0 stays at v, side 1 moves to the new vertex
    let side = |d: OrientedEdge| -> usize {
        if d.edge() == e1 || (d.is_inverted() && twist_of(d.edge()).is_some()) { 0 } else { 1 }
    };
    let fresh = |base: &str, taken: &dyn Fn(&str) -> bool| {
        (0..).map(|i| format!("{base}{i}")).find(|s| !taken(s)).unwrap()
    };
    let new_v = fresh(&format!("{}_", g.vertex_name(v)), &|s| g.find_vertex(s).is_ok());
    let new_e = fresh("S", &|s| g.find_edge(s).is_ok());
    let mut vnames: Vec<String> = g.vertex_names().to_vec();
    vnames.push(new_v.clone());
    let vid = |d: OrientedEdge| -> VertexId {
        let x = g.init(d);
        if x == v && side(d) == 1 { VertexId(g.vertex_count()) } else { x }
    };
    let mut enames: Vec<(String, String, String)> = g
        .edge_ids()
        .map(|e| {
            let f = OrientedEdge::forward(e);
            (g.edge_name(e).to_string(), vnames[vid(f).0].clone(), vnames[vid(f.inverse()).0].clone())
        })
        .collect();
    enames.push((new_e, new_v, vnames[v.0].clone()));
    let ev: Vec<(&str, &str, &str)> = enames.iter().map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str())).collect();
    let vv: Vec<&str> = vnames.iter().map(|s| s.as_str()).collect();
    let g2 = MarkedGraph::intermediate(&vv, &ev)?;
    let e0 = OrientedEdge::forward(EdgeId(g.edge_count()));
    // lift each old image, crossing the new edge where the side changes
    let lift = |img: &[OrientedEdge], from: VertexId, to: VertexId| -> Result<EdgePath> {
        let mut out = Vec::new();
        let mut at = from;
        for &x in img {
            let need = g2.init(x);
            if need != at {
                out.push(if g2.term(e0) == at { e0.inverse() } else { e0 });
            }
            out.push(x);
            at = g2.term(x);
        }
        if at != to {
            out.push(if g2.term(e0) == at { e0.inverse() } else { e0 });
        }
        EdgePath::tightened(&g2, &out)
    };
    let mut split_images = Vec::new();
    for e in g.edge_ids() {
        let d = OrientedEdge::forward(e);
        let (a, b) = (g2.init(d), g2.term(d));
        split_images.push(lift(m.image_edges(d), a, b)?);
    }
    split_images.push(EdgePath::edge(&g2, e0));
    let split = GraphMap::new(g2.clone(), split_images)?;
    // slide v around e1^{-d2}: prepend at initial ends, append at terminal ends
    let w = EdgePath::edge(&g2, l1);
    let shifted_images = g2
        .edge_ids()
        .map(|e| {
            let d = OrientedEdge::forward(e);
            if e == e1 {
                return Ok(split.image(d));
            }
            let mut p = split.image(d);
            if g2.init(d) == v {
                p = w.power(&g2, d2).concat(&g2, &p)?;
            }
            if g2.term(d) == v {
                p = p.concat(&g2, &w.power(&g2, -d2))?;
            }
            Ok(p)
        })
        .collect::<Result<Vec<_>>>()?;
    let shifted = GraphMap::new(g2.clone(), shifted_images)?;
    let collapsed = collapse_fixed_edge(&shifted, e2)?;
    Ok(Surgery { split, shifted, collapsed })
}

/// Collapses a fixed non-loop edge to its initial vertex.
pub fn collapse_fixed_edge(m: &GraphMap, e: EdgeId) -> Result<GraphMap> {
    let g = m.graph();
    let (a, b) = (g.edge(e).from, g.edge(e).to);
    if a == b || !m.is_fixed_edge(e) {
        return Err(Error::Domain(format!("{} is not a fixed edge between distinct vertices", g.edge_name(e))));
    }
    let vnames: Vec<&str> = (0..g.vertex_count()).filter(|&i| i != b.0).map(|i| g.vertex_name(VertexId(i))).collect();
    let rename = |x: VertexId| if x == b { g.vertex_name(a) } else { g.vertex_name(x) };
    let keep: Vec<EdgeId> = g.edge_ids().filter(|&x| x != e).collect();
    let enames: Vec<(&str, &str, &str)> = keep
        .iter()
        .map(|&x| (g.edge_name(x), rename(g.edge(x).from), rename(g.edge(x).to)))
        .collect();
    let g2 = MarkedGraph::intermediate(&vnames, &enames)?;
    let images = keep
        .iter()
        .map(|&x| {
            let img: Vec<OrientedEdge> = m
                .image_edges(OrientedEdge::forward(x))
                .iter()
                .filter(|y| y.edge() != e)
                .map(|y| OrientedEdge::new(EdgeId(keep.iter().position(|k| *k == y.edge()).unwrap()), y.is_inverted()))
                .collect();
            EdgePath::tightened(&g2, &img)
        })
        .collect::<Result<Vec<_>>>()?;
    GraphMap::new(g2, images)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::free_group::{is_homotopy_equivalence, same_outer_class};
    use crate::samples;

    fn analyze(m: GraphMap) -> MapAnalysis {
        MapAnalysis::new(m, AnalysisOptions::default()).unwrap()
    }

    #[test]
    fn exceptional_rose_stages() {
        let a = analyze(samples::exceptional_rose());
        assert_eq!(stage_ranks(&a).unwrap(), vec![0, 0, 1, 2, 1]);
        let audit = rank_audit(&a, None).unwrap();
        assert!(audit.ok(), "{}", audit.describe());
    }

    #[test]
    fn type_e_structure() {
        for n in 3..=5 {
            let fam = gen_type_e(n).unwrap();
            assert_eq!(fam.graph.vertex_count(), n - 1);
            assert_eq!(fam.generators.len(), 2 * n - 3);
            let a = analyze(fam.generic);
            let c = classify_max_rank(&a, Mode::General).unwrap();
            assert_eq!(c.rank, 2 * n - 3);
            assert!(c.decomposed(), "{}", c.describe(a.map.graph()));
            if n == 3 {
                assert_eq!(stage_ranks(&a).unwrap(), vec![0, 0, 1, 2, 3]);
            }
            let audit = rank_audit(&a, None).unwrap();
            assert!(audit.ok(), "{}", audit.describe());
            assert!(audit.stages.iter().any(|s| s.case == Some(AuditCase::LinearPair)));
        }
    }

    #[test]
    fn type_c_structure() {
        let w = Word::reduced([1, 2, -1, -2]);
        let fam = gen_type_c(4, &w).unwrap();
        let n = 4;
        for f in &fam.generators {
            assert!(is_ia(&pi1_images(f), n));
        }
        let a = analyze(fam.generic);
        let c = classify_max_rank(&a, Mode::Ia).unwrap();
        assert_eq!(c.rank, 4);
        assert!(matches!(&c.outcome, Outcome::Decomposed { base: BaseCase::FixedRankTwo { .. }, .. }));
        assert!(matches!(gen_type_c(4, &Word::reduced([1, 2])), Err(Error::Domain(_))));
    }

    #[test]
    fn partial_and_full_fps() {
        let a = analyze(samples::partial_fps_triad());
        let found = detect_fps(&a);
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].kind, FpsKind::Partial);
        assert_eq!(found[0].shape, FpsShape::Triad);
        let c = classify_max_rank(&a, Mode::General).unwrap();
        assert!(matches!(&c.outcome, Outcome::Decomposed { base: BaseCase::PartialFps(_), .. }));
        let b = analyze(samples::full_fps_triad());
        let found = detect_fps(&b);
        assert!(found.iter().any(|w| w.kind == FpsKind::Full && w.chi_drop == 2));
        let audit = rank_audit(&b, None).unwrap();
        assert!(audit.stages.iter().any(|s| s.case == Some(AuditCase::FullFps)), "{}", audit.describe());
    }

    #[test]
    fn generator_proxy_rank() {
        let fam = gen_type_e(4).unwrap();
        let p = d_rank_proxy(&fam.generators).unwrap();
        assert!(p.commute);
        assert_eq!(p.rank, 5);
    }

    #[test]
    fn surgery_keeps_outer_class() {
        let g = MarkedGraph::new(
            &["v", "x"],
            &[("E1", "v", "v"), ("E2", "x", "v"), ("E3", "x", "v"), ("E4", "v", "x")],
        )
        .unwrap();
        let m = GraphMap::from_image_strings(g, &["E1", "E2 E1 E1", "E3 E1 E1 E1", "E4 E2 E1 E2'"]).unwrap();
        let s = split_vertex_shift(&m, VertexId(0), EdgeId(0), EdgeId(1)).unwrap();
        assert!(is_homotopy_equivalence(&s.split));
        assert!(is_homotopy_equivalence(&s.shifted));
        assert!(is_homotopy_equivalence(&s.collapsed));
        assert!(same_outer_class(&s.split, &s.shifted).is_some());
        assert!(s.shifted.is_fixed_edge(EdgeId(1)));
        assert_eq!(s.collapsed.graph().edge_count(), 4);
    }
}
