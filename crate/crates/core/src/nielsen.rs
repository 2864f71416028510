//! Nielsen path catalogs, complete splittings and QE-splittings.

use std::collections::{BTreeSet, HashMap};

use crate::analysis::MapAnalysis;
use crate::error::{Error, Result};
use crate::graph_map::{classify_strata, compute_filtration, Filtration, GraphMap, Stratum, StratumKind};
use crate::paths::{is_primitive_word, EdgeId, EdgePath, MarkedGraph, OrientedEdge};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum NielsenKind {
    FixedEdge,
    /// `E w^power Ē` for a linear edge `E` with axis `w`.
    Linear { edge: OrientedEdge, power: i64 },
    /// Indivisible path of EG height.
    Eg,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NielsenEntry {
    pub path: EdgePath,
    /// 0-based stratum index of the height.
    pub height: usize,
    pub kind: NielsenKind,
    pub indivisible: bool,
}

#[derive(Clone, Debug)]
pub struct NielsenCatalog {
    /// One orientation of each path; the reverse is implied.
    pub entries: Vec<NielsenEntry>,
    /// Primitive closed Nielsen words, candidate axes.
    pub closed_words: Vec<EdgePath>,
    pub length_bound: usize,
    /// False when some ray failed to stabilise within the bound.
    pub complete: bool,
    by_first: HashMap<OrientedEdge, Vec<(usize, bool)>>,
}

impl NielsenCatalog {
    fn from_parts(
        g: &MarkedGraph,
        entries: Vec<NielsenEntry>,
        closed_words: Vec<EdgePath>,
        length_bound: usize,
        complete: bool,
    ) -> Self {
        let mut by_first: HashMap<OrientedEdge, Vec<(usize, bool)>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            by_first.entry(e.path.edges[0]).or_default().push((i, false));
            let rev = e.path.inverse(g);
            by_first.entry(rev.edges[0]).or_default().push((i, true));
        }
        for v in by_first.values_mut() {
            v.sort_by_key(|&(i, _)| std::cmp::Reverse(entries[i].path.len()));
        }
        NielsenCatalog { entries, closed_words, length_bound, complete, by_first }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Catalog paths (either orientation) occurring in `s` at `pos`,
    /// longest first.
    pub fn matches_at(&self, g: &MarkedGraph, s: &[OrientedEdge], pos: usize) -> Vec<(usize, bool, usize)> {
        let mut out = Vec::new();
        if let Some(list) = self.by_first.get(&s[pos]) {
            for &(i, rev) in list {
                let p = &self.entries[i].path;
                let n = p.len();
                if pos + n > s.len() {
                    continue;
                }
                let ok = if rev {
                    (0..n).all(|k| s[pos + k] == p.edges[n - 1 - k].inverse())
                } else {
                    s[pos..pos + n] == p.edges[..]
                };
                if ok {
                    out.push((i, rev, n));
                }
            }
        }
        let _ = g;
        out
    }

    pub fn contains(&self, g: &MarkedGraph, p: &EdgePath) -> bool {
        if p.is_trivial() {
            return false;
        }
        self.matches_at(g, &p.edges, 0).iter().any(|&(_, _, n)| n == p.len())
    }

    /// Writes a closed path as a concatenation of catalog paths, if possible.
    pub fn decompose_closed(&self, g: &MarkedGraph, w: &EdgePath) -> Option<Vec<(usize, bool)>> {
        let s = &w.edges;
        let n = s.len();
        let mut back: Vec<Option<(usize, usize, bool)>> = vec![None; n + 1];
        let mut reach = vec![false; n + 1];
        reach[0] = true;
        for pos in 0..n {
            if !reach[pos] {
                continue;
            }
            for (i, rev, len) in self.matches_at(g, s, pos) {
                if !reach[pos + len] {
                    reach[pos + len] = true;
                    back[pos + len] = Some((pos, i, rev));
                }
            }
        }
        if !reach[n] || n == 0 {
            return None;
        }
        let mut out = Vec::new();
        let mut at = n;
        while at > 0 {
            let (p, i, rev) = back[at].unwrap();
            out.push((i, rev));
            at = p;
        }
        out.reverse();
        Some(out)
    }

    pub fn eg_entries(&self) -> impl Iterator<Item = &NielsenEntry> {
        self.entries.iter().filter(|e| e.kind == NielsenKind::Eg)
    }

    /// Same set of unoriented paths.
    pub fn same_paths(&self, other: &NielsenCatalog) -> bool {
        let a: BTreeSet<&EdgePath> = self.entries.iter().map(|e| &e.path).collect();
        let b: BTreeSet<&EdgePath> = other.entries.iter().map(|e| &e.path).collect();
        a == b
    }
}

/// Default search bound: `4 · |edges| · max image length`.
pub fn default_length_bound(m: &GraphMap) -> usize {
    let lmax = m
        .graph()
        .edge_ids()
        .map(|e| m.edge_image(e).len())
        .max()
        .unwrap_or(1);
    4 * m.graph().edge_count() * lmax
}

fn canonical(g: &MarkedGraph, p: EdgePath) -> EdgePath {
    let q = p.inverse(g);
    if q.edges < p.edges { q } else { p }
}

/// Nielsen catalog with the filtration computed from the map.
pub fn build_catalog(m: &GraphMap, length_bound: usize) -> Result<NielsenCatalog> {
    let f = compute_filtration(m);
    let strata = classify_strata(m, &f, None)?;
    Ok(build_catalog_with(m, &f, &strata, length_bound))
}

/// Nielsen catalog given a filtration and a catalog-free classification.
pub fn build_catalog_with(
    m: &GraphMap,
    filtration: &Filtration,
    strata: &[Stratum],
    length_bound: usize,
) -> NielsenCatalog {
    let g = m.graph();
    let level = filtration.stratum_of(g.edge_count());
    let mut entries = Vec::new();
    let mut closed = Vec::new();
    for e in g.edge_ids() {
        if m.is_fixed_edge(e) {
            let p = EdgePath::edge(g, OrientedEdge::forward(e));
            if p.is_closed(g) {
                closed.push(p.clone());
            }
            entries.push(NielsenEntry { path: p, height: level[e.0], kind: NielsenKind::FixedEdge, indivisible: true });
        }
    }
    for s in strata {
        if let StratumKind::NegLinear { edge, axis, .. } = &s.kind {
            if !closed.iter().any(|c: &EdgePath| *c == *axis || *c == axis.inverse(g)) {
                closed.push(axis.clone());
            }
            let kmax = (length_bound.saturating_sub(2) / axis.len()).max(1) as i64;
            let eb = EdgePath::edge(g, *edge);
            for k in 1..=kmax {
                let p = eb
                    .concat(g, &axis.power(g, k))
                    .and_then(|p| p.concat(g, &eb.inverse(g)))
                    .expect("axis is closed at the end of its edge");
                entries.push(NielsenEntry {
                    path: p,
                    height: s.index,
                    kind: NielsenKind::Linear { edge: *edge, power: k },
                    indivisible: true,
                });
            }
        }
    }
    let mut complete = true;
    for s in strata.iter().filter(|s| s.is_eg()) {
        let (found, ok) = eg_indivisible_paths(m, filtration, s.index, length_bound);
        complete &= ok;
        for p in found {
            if p.is_closed(g) && is_primitive_word(&p.edges) {
                closed.push(p.clone());
            }
            entries.push(NielsenEntry { path: p, height: s.index, kind: NielsenKind::Eg, indivisible: true });
        }
    }
    NielsenCatalog::from_parts(g, entries, closed, length_bound, complete)
}

fn is_fixed_vertex(m: &GraphMap, v: crate::paths::VertexId) -> bool {
    m.vertex_image(v) == v
}

/// True when some proper prefix ending at a vertex is itself Nielsen.
pub fn has_proper_nielsen_prefix(m: &GraphMap, p: &EdgePath) -> bool {
    let g = m.graph();
    let mut img: Vec<OrientedEdge> = Vec::new();
    for k in 1..p.len() {
        for &x in m.image_edges(p.edges[k - 1]) {
            if img.last() == Some(&x.inverse()) {
                img.pop();
            } else {
                img.push(x);
            }
        }
        if img[..] == p.edges[..k] && is_fixed_vertex(m, g.term(p.edges[k - 1])) {
            return true;
        }
    }
    false
}

/// Prefix of the ray `lim f^k_#(d)` for a fixed direction `d`.
fn ray(m: &GraphMap, d: OrientedEdge, len: usize) -> Option<Vec<OrientedEdge>> {
    let lmax = m.graph().edge_ids().map(|e| m.edge_image(e).len()).max().unwrap_or(1);
    let cap = 3 * len + 4 * lmax;
    let mut cur = vec![d];
    let mut stable = 0;
    for _ in 0..200 {
        let mut next = m.apply_edges(&cur);
        next.truncate(cap);
        if next.is_empty() || next[0] != d {
            return None;
        }
        let n = len.min(next.len()).min(cur.len());
        if n == len && next[..n] == cur[..n] {
            stable += 1;
            if stable >= 2 {
                return Some(next[..len].to_vec());
            }
        } else {
            stable = 0;
        }
        if next.len() < cap && next == cur {
            return None;
        }
        cur = next;
    }
    None
}

/// Indivisible Nielsen paths of height `r` and length at most `bound`.
///
/// Such a path is `ᾱβ` with one illegal turn in the top stratum between the
/// halves, where `f_#(ᾱ) = ᾱc̄` and `f_#(β̄) = β̄c̄` for a common `c`. Each
/// half is a prefix of the ray of a fixed direction, so pairing ray
/// prefixes that share an endpoint and a tail finds every such path.
pub fn eg_indivisible_paths(
    m: &GraphMap,
    filtration: &Filtration,
    r: usize,
    bound: usize,
) -> (Vec<EdgePath>, bool) {
    let g = m.graph();
    let level = filtration.stratum_of(g.edge_count());
    let mut complete = true;
    let starts: Vec<OrientedEdge> = g
        .oriented_edges()
        .filter(|&d| level[d.edge().0] == r && is_fixed_vertex(m, g.init(d)) && m.df(d) == d)
        .collect();
    // (end vertex, tail) -> (ray, prefix length)
    let mut table: HashMap<(crate::paths::VertexId, Vec<OrientedEdge>), Vec<(usize, usize)>> = HashMap::new();
    let mut rays = Vec::new();
    for (ri, &d) in starts.iter().enumerate() {
        let Some(rv) = ray(m, d, bound) else {
            complete = false;
            rays.push(Vec::new());
            continue;
        };
        let mut img: Vec<OrientedEdge> = Vec::new();
        for i in 1..=rv.len() {
            for &x in m.image_edges(rv[i - 1]) {
                if img.last() == Some(&x.inverse()) {
                    img.pop();
                } else {
                    img.push(x);
                }
            }
            if img.len() > i && img[..i] == rv[..i] {
                table.entry((g.term(rv[i - 1]), img[i..].to_vec())).or_default().push((ri, i));
            }
        }
        rays.push(rv);
    }
    let mut found: BTreeSet<EdgePath> = BTreeSet::new();
    for list in table.values() {
        for (a, &(r1, i1)) in list.iter().enumerate() {
            for &(r2, i2) in &list[a + 1..] {
                if i1 + i2 > bound {
                    continue;
                }
                let h1 = &rays[r1][..i1];
                let h2 = &rays[r2][..i2];
                if h1[i1 - 1] == h2[i2 - 1] {
                    continue;
                }
                let mut edges = h1.to_vec();
                edges.extend(h2.iter().rev().map(|x| x.inverse()));
                let p = EdgePath { start: g.init(edges[0]), edges };
                if !p.is_tight() || m.apply(&p) != p || has_proper_nielsen_prefix(m, &p) {
                    continue;
                }
                found.insert(canonical(g, p));
            }
        }
    }
    (found.into_iter().collect(), complete)
}

/// Splits a Nielsen path at its minimal Nielsen prefixes; every piece must
/// be in the catalog.
pub fn split_nielsen_path(m: &GraphMap, cat: &NielsenCatalog, p: &EdgePath) -> Result<Vec<EdgePath>> {
    let g = m.graph();
    if m.apply(p) != *p {
        return Err(Error::Domain(format!("{} is not a Nielsen path", g.format_path(p))));
    }
    let mut pieces = Vec::new();
    let mut start = 0;
    let mut img: Vec<OrientedEdge> = Vec::new();
    for k in start + 1..=p.len() {
        for &x in m.image_edges(p.edges[k - 1]) {
            if img.last() == Some(&x.inverse()) {
                img.pop();
            } else {
                img.push(x);
            }
        }
        if img[..] == p.edges[start..k] && is_fixed_vertex(m, g.term(p.edges[k - 1])) {
            let piece = EdgePath { start: g.init(p.edges[start]), edges: p.edges[start..k].to_vec() };
            if !cat.contains(g, &piece) {
                return Err(Error::CatalogIncomplete(format!(
                    "indivisible Nielsen path {} is missing",
                    g.format_path(&piece)
                )));
            }
            pieces.push(piece);
            start = k;
            img.clear();
        }
    }
    Ok(pieces)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TermKind {
    /// A single edge of an irreducible stratum.
    Edge,
    /// An indivisible Nielsen path.
    Nielsen,
    /// `E_i w^p Ē_j` with exponents of equal sign.
    Exceptional,
    /// A maximal subpath in a zero stratum.
    Connecting,
    /// `E_i w^p Ē_j` assembled by the QE-splitting.
    QuasiExceptional,
}

/// The unordered pair of linear edges of a QE path, stored as it was read:
/// `initial · w^power · terminal⁻¹`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct QeFamily {
    pub initial: OrientedEdge,
    pub terminal: OrientedEdge,
    pub power: i64,
}

impl QeFamily {
    pub fn key(&self) -> (EdgeId, EdgeId) {
        let (a, b) = (self.initial.edge(), self.terminal.edge());
        if a < b { (a, b) } else { (b, a) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Term {
    pub kind: TermKind,
    pub path: EdgePath,
    pub family: Option<QeFamily>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SplitVerdict {
    /// Every juncture turn is legal.
    Certified,
    /// Some juncture turn is illegal but term-wise images stayed tight for
    /// this many iterates.
    VerifiedToDepth(usize),
    Failed { juncture: usize, iterate: usize },
}

impl SplitVerdict {
    pub fn ok(&self) -> bool {
        !matches!(self, SplitVerdict::Failed { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CompleteSplitting {
    pub terms: Vec<Term>,
    pub verdict: SplitVerdict,
}

impl CompleteSplitting {
    pub fn path(&self, g: &MarkedGraph) -> EdgePath {
        let edges: Vec<OrientedEdge> = self.terms.iter().flat_map(|t| t.path.edges.iter().copied()).collect();
        EdgePath { start: g.init(edges[0]), edges }
    }

    pub fn describe(&self, g: &MarkedGraph) -> String {
        self.terms
            .iter()
            .map(|t| format!("[{}]", g.format_path(&t.path)))
            .collect::<Vec<_>>()
            .join(" · ")
    }
}

fn term_is_nielsen(a: &MapAnalysis, t: &Term) -> bool {
    match t.kind {
        TermKind::Nielsen => true,
        TermKind::Edge => t.path.len() == 1 && a.map.is_fixed_edge(t.path.edges[0].edge()),
        _ => false,
    }
}

struct Candidate {
    len: usize,
    kind: TermKind,
    family: Option<QeFamily>,
}

fn candidates(a: &MapAnalysis, s: &[OrientedEdge], pos: usize) -> Vec<Candidate> {
    let g = a.map.graph();
    let mut out = Vec::new();
    let x = s[pos];
    // exceptional paths
    for (ax, li) in a.linear_edges_with_axis() {
        if li.edge != x {
            continue;
        }
        let w = &li.axis.edges;
        let wbar: Vec<OrientedEdge> = w.iter().rev().map(|e| e.inverse()).collect();
        let mut found: Vec<(usize, i64)> = Vec::new();
        for (sign, word) in [(1i64, w), (-1i64, &wbar)] {
            let mut at = pos + 1;
            let mut p = 0i64;
            loop {
                if sign == 1 || p != 0 {
                    if at < s.len() {
                        for lj in &a.axes[ax].edges {
                            if lj.edge.edge() != li.edge.edge()
                                && s[at] == lj.edge.inverse()
                                && lj.axis == li.axis
                                && lj.exponent.signum() == li.exponent.signum()
                            {
                                found.push((at + 1 - pos, p));
                            }
                        }
                    }
                }
                if at + word.len() <= s.len() && s[at..at + word.len()] == word[..] {
                    at += word.len();
                    p += sign;
                } else {
                    break;
                }
            }
        }
        found.sort_by_key(|&(l, _)| std::cmp::Reverse(l));
        for (len, p) in found {
            let terminal = s[pos + len - 1].inverse();
            out.push(Candidate {
                len,
                kind: TermKind::Exceptional,
                family: Some(QeFamily { initial: x, terminal, power: p }),
            });
        }
    }
    for (i, _, len) in a.catalog.matches_at(g, s, pos) {
        if a.catalog.entries[i].kind != NielsenKind::FixedEdge {
            out.push(Candidate { len, kind: TermKind::Nielsen, family: None });
        }
    }
    let st = &a.strata[a.level[x.edge().0]];
    if st.is_zero() {
        let mut end = pos;
        while end < s.len() && a.strata[a.level[s[end].edge().0]].is_zero() {
            end += 1;
        }
        out.push(Candidate { len: end - pos, kind: TermKind::Connecting, family: None });
    } else {
        out.push(Candidate { len: 1, kind: TermKind::Edge, family: None });
    }
    out
}

/// Parses `p` into splitting terms, preferring exceptional paths, then
/// catalogued Nielsen paths, then single edges, then connecting paths, and
/// backtracking when a parse fails verification.
pub fn complete_split(a: &MapAnalysis, p: &EdgePath) -> Result<CompleteSplitting> {
    let g = a.map.graph();
    if p.is_trivial() {
        return Err(Error::Domain("cannot split a trivial path".into()));
    }
    if !p.is_tight() {
        return Err(Error::Domain(format!("{} is not tight", g.format_path(p))));
    }
    let s = &p.edges;
    let mut budget = 2000usize;
    let mut furthest = 0usize;
    let mut stack: Vec<Term> = Vec::new();

    fn go(
        a: &MapAnalysis,
        s: &[OrientedEdge],
        pos: usize,
        stack: &mut Vec<Term>,
        budget: &mut usize,
        furthest: &mut usize,
    ) -> Option<CompleteSplitting> {
        let g = a.map.graph();
        *furthest = (*furthest).max(pos);
        if pos == s.len() {
            let verdict = verify_splitting(a, stack, a.options.split_depth);
            return verdict.ok().then(|| CompleteSplitting { terms: stack.clone(), verdict });
        }
        for c in candidates(a, s, pos) {
            if *budget == 0 {
                return None;
            }
            *budget -= 1;
            let path = EdgePath { start: g.init(s[pos]), edges: s[pos..pos + c.len].to_vec() };
            stack.push(Term { kind: c.kind, path, family: c.family });
            if let Some(r) = go(a, s, pos + c.len, stack, budget, furthest) {
                return Some(r);
            }
            stack.pop();
        }
        None
    }

    go(a, s, 0, &mut stack, &mut budget, &mut furthest)
        .ok_or(Error::NotCompletelySplit { position: furthest })
}

/// Certifies a splitting by legality of every juncture turn; otherwise
/// iterates the terms separately and checks that no cancellation occurs at
/// the junctures for `k_max` iterates.
pub fn verify_splitting(a: &MapAnalysis, terms: &[Term], k_max: usize) -> SplitVerdict {
    let g = a.map.graph();
    let mut illegal = Vec::new();
    for (j, w) in terms.windows(2).enumerate() {
        let x = w[0].path.last().unwrap().inverse();
        let y = w[1].path.first().unwrap();
        debug_assert_eq!(g.init(x), g.init(y));
        if !a.directions.is_legal_turn(x, y) {
            illegal.push(j);
        }
    }
    if illegal.is_empty() {
        return SplitVerdict::Certified;
    }
    let mut images: Vec<Vec<OrientedEdge>> = terms.iter().map(|t| t.path.edges.clone()).collect();
    for k in 1..=k_max {
        for im in images.iter_mut() {
            *im = a.map.apply_edges(im);
        }
        for &j in &illegal {
            match (images[j].last(), images[j + 1].first()) {
                (Some(&x), Some(&y)) if x != y.inverse() => {}
                _ => return SplitVerdict::Failed { juncture: j, iterate: k },
            }
        }
    }
    SplitVerdict::VerifiedToDepth(k_max)
}

/// Merges runs `[E_i] · [Nielsen]* · [Ē_j]` whose middle is a power of the
/// common axis into single quasi-exceptional terms.
pub fn qe_split(a: &MapAnalysis, cs: &CompleteSplitting) -> Vec<Term> {
    let g = a.map.graph();
    let terms = &cs.terms;
    let mut out = Vec::new();
    let mut i = 0;
    'outer: while i < terms.len() {
        let t = &terms[i];
        if t.kind == TermKind::Exceptional {
            out.push(Term { kind: TermKind::QuasiExceptional, ..t.clone() });
            i += 1;
            continue;
        }
        if t.kind == TermKind::Edge && t.path.len() == 1 {
            if let Some(li) = a.linear_edge(t.path.edges[0]) {
                let mut mid: Vec<OrientedEdge> = Vec::new();
                let mut j = i + 1;
                while j < terms.len() {
                    let u = &terms[j];
                    if u.kind == TermKind::Edge && u.path.len() == 1 {
                        let e = u.path.edges[0].inverse();
                        if let Some(lj) = a.linear_edge(e) {
                            if lj.edge.edge() != li.edge.edge() && lj.axis == li.axis {
                                if let Some(p) = axis_power(g, &li.axis, &mid) {
                                    let mut edges = t.path.edges.clone();
                                    edges.extend_from_slice(&mid);
                                    edges.push(u.path.edges[0]);
                                    out.push(Term {
                                        kind: TermKind::QuasiExceptional,
                                        path: EdgePath { start: t.path.start, edges },
                                        family: Some(QeFamily { initial: li.edge, terminal: lj.edge, power: p }),
                                    });
                                    i = j + 1;
                                    continue 'outer;
                                }
                            }
                        }
                    }
                    if !term_is_nielsen(a, u) {
                        break;
                    }
                    mid.extend_from_slice(&u.path.edges);
                    j += 1;
                }
            }
        }
        out.push(t.clone());
        i += 1;
    }
    out
}

/// `Some(p)` when `mid = w^p`.
fn axis_power(g: &MarkedGraph, w: &EdgePath, mid: &[OrientedEdge]) -> Option<i64> {
    let n = w.len();
    if mid.is_empty() {
        return Some(0);
    }
    if mid.len() % n != 0 {
        return None;
    }
    let k = (mid.len() / n) as i64;
    if w.power(g, k).edges == mid {
        Some(k)
    } else if w.power(g, -k).edges == mid {
        Some(-k)
    } else {
        None
    }
}

/// QE-splitting of `f(E)`.
pub fn qe_split_image(a: &MapAnalysis, e: EdgeId) -> Result<Vec<Term>> {
    let cs = a.edge_splitting(e)?;
    Ok(qe_split(a, &cs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::AnalysisOptions;

    fn rose_map(names: &[&str], images: &[&str]) -> GraphMap {
        let edges: Vec<(&str, &str, &str)> = names.iter().map(|n| (*n, "v", "v")).collect();
        let g = MarkedGraph::new(&["v"], &edges).unwrap();
        GraphMap::from_image_strings(g, images).unwrap()
    }

    /// All tight paths of length ≤ n from fixed vertices that are Nielsen
    /// and indivisible.
    fn brute_force_inps(m: &GraphMap, n: usize) -> BTreeSet<EdgePath> {
        let g = m.graph();
        let mut out = BTreeSet::new();
        let mut stack: Vec<Vec<OrientedEdge>> = g
            .oriented_edges()
            .filter(|&d| m.vertex_image(g.init(d)) == g.init(d))
            .map(|d| vec![d])
            .collect();
        while let Some(p) = stack.pop() {
            let path = EdgePath { start: g.init(p[0]), edges: p.clone() };
            if m.apply(&path) == path && !has_proper_nielsen_prefix(m, &path) {
                if !(path.len() == 1 && m.is_fixed_edge(path.edges[0].edge())) {
                    out.insert(canonical(g, path));
                }
                continue;
            }
            if p.len() < n {
                for d in g.oriented_edges() {
                    if g.init(d) == g.term(*p.last().unwrap()) && d != p.last().unwrap().inverse() {
                        let mut q = p.clone();
                        q.push(d);
                        stack.push(q);
                    }
                }
            }
        }
        out
    }

    #[test]
    fn commutator_is_the_indivisible_nielsen_path() {
        let m = rose_map(&["a", "b"], &["a b", "b a b"]);
        let cat = build_catalog(&m, 12).unwrap();
        let eg: Vec<String> = cat.eg_entries().map(|e| m.graph().format_path(&e.path)).collect();
        assert_eq!(eg.len(), 1);
        let oracle = brute_force_inps(&m, 9);
        let found: BTreeSet<EdgePath> = cat.eg_entries().map(|e| e.path.clone()).collect();
        assert_eq!(found, oracle);
        assert!(cat.complete);
    }

    #[test]
    fn linear_nielsen_paths_are_listed() {
        let m = rose_map(&["A", "B", "C"], &["A", "B A", "C B"]);
        let cat = build_catalog(&m, 10).unwrap();
        let g = m.graph();
        assert!(cat.contains(g, &g.parse_path("B A A A B'").unwrap()));
        assert!(cat.contains(g, &g.parse_path("B A' B'").unwrap()));
        assert_eq!(cat.closed_words.iter().map(|w| g.format_path(w)).collect::<Vec<_>>(), ["A"]);
        assert_eq!(cat.eg_entries().count(), 0);
        for e in &cat.entries {
            assert_eq!(m.apply(&e.path), e.path);
        }
    }

    #[test]
    fn splitting_of_a_quasi_exceptional_image() {
        let m = rose_map(&["E1", "E2", "E3", "E4"], &["E1", "E2 E1 E1", "E3 E1", "E4 E3 E3 E2'"]);
        let a = MapAnalysis::new(m, AnalysisOptions::default()).unwrap();
        let g = a.map.graph();
        let cs = a.edge_splitting(EdgeId(3)).unwrap();
        assert_eq!(cs.describe(g), "[E4] · [E3] · [E3 E2']");
        assert_eq!(cs.terms[2].kind, TermKind::Exceptional);
        assert_eq!(cs.verdict, SplitVerdict::Certified);
    }

    #[test]
    fn opposite_sign_pair_merges_only_in_qe_splitting() {
        // B has exponent 1, C has exponent -1 on the axis A
        let m = rose_map(&["A", "B", "C", "D"], &["A", "B A", "C A'", "D B A A C'"]);
        let a = MapAnalysis::new(m, AnalysisOptions::default()).unwrap();
        let g = a.map.graph();
        let cs = a.edge_splitting(EdgeId(3)).unwrap();
        assert_eq!(cs.describe(g), "[D] · [B] · [A] · [A] · [C']");
        let qe = qe_split(&a, &cs);
        assert_eq!(qe.len(), 2);
        assert_eq!(qe[1].kind, TermKind::QuasiExceptional);
        assert_eq!(qe[1].family.unwrap().power, 2);
    }

    #[test]
    fn split_nielsen_path_into_pieces() {
        let m = rose_map(&["A", "B", "C"], &["A", "B A", "C B"]);
        let cat = build_catalog(&m, 10).unwrap();
        let g = m.graph();
        let p = g.parse_path("B A B' A B A' B'").unwrap();
        let pieces = split_nielsen_path(&m, &cat, &p).unwrap();
        let s: Vec<String> = pieces.iter().map(|x| g.format_path(x)).collect();
        assert_eq!(s, ["B A B'", "A", "B A' B'"]);
        let short = build_catalog(&m, 3).unwrap();
        let q = g.parse_path("B A A B'").unwrap();
        assert!(matches!(split_nielsen_path(&m, &short, &q), Err(Error::CatalogIncomplete(_))));
    }
}
