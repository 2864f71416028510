//! Marked graphs, edge paths and circuits.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use crate::error::{Error, Result};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

/// An edge together with an orientation. Ordered by edge index, forward
/// before inverse.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct OrientedEdge(u32);

impl OrientedEdge {
    pub fn new(edge: EdgeId, inverted: bool) -> Self {
        OrientedEdge((edge.0 as u32) << 1 | inverted as u32)
    }

    pub fn forward(edge: EdgeId) -> Self {
        Self::new(edge, false)
    }

    pub fn edge(self) -> EdgeId {
        EdgeId((self.0 >> 1) as usize)
    }

    pub fn is_inverted(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn inverse(self) -> Self {
        OrientedEdge(self.0 ^ 1)
    }

    /// Dense index in `0..2 * edge_count`.
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn from_index(i: usize) -> Self {
        OrientedEdge(i as u32)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Edge {
    pub name: String,
    pub from: VertexId,
    pub to: VertexId,
}

#[derive(Clone, Debug)]
pub struct MarkedGraph {
    vertex_names: Vec<String>,
    edges: Vec<Edge>,
    vertex_index: HashMap<String, VertexId>,
    edge_index: HashMap<String, EdgeId>,
    intermediate: bool,
}

impl PartialEq for MarkedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertex_names == other.vertex_names && self.edges == other.edges
    }
}

impl MarkedGraph {
    /// Builds a graph in which every vertex has valence at least two.
    pub fn new<S: AsRef<str>>(vertices: &[S], edges: &[(S, S, S)]) -> Result<Self> {
        let g = Self::build(vertices, edges, false)?;
        for v in 0..g.vertex_count() {
            if g.valence(VertexId(v)) < 2 {
                return Err(Error::InvalidGraph(format!(
                    "vertex `{}` has valence {}",
                    g.vertex_name(VertexId(v)),
                    g.valence(VertexId(v))
                )));
            }
        }
        Ok(g)
    }

    /// Like [`MarkedGraph::new`] but allows valence-one and isolated
    /// vertices, as happens for the intermediate subgraphs of a filtration.
    pub fn intermediate<S: AsRef<str>>(vertices: &[S], edges: &[(S, S, S)]) -> Result<Self> {
        Self::build(vertices, edges, true)
    }

    fn build<S: AsRef<str>>(vertices: &[S], edges: &[(S, S, S)], intermediate: bool) -> Result<Self> {
        let mut vertex_index = HashMap::new();
        let mut vertex_names = Vec::new();
        for v in vertices {
            let name = v.as_ref().to_string();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(Error::InvalidGraph(format!("bad vertex name `{name}`")));
            }
            if vertex_index.insert(name.clone(), VertexId(vertex_names.len())).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate vertex `{name}`")));
            }
            vertex_names.push(name);
        }
        let mut edge_index = HashMap::new();
        let mut out = Vec::new();
        for (name, from, to) in edges {
            let name = name.as_ref().to_string();
            if name.is_empty() || name.contains(char::is_whitespace) || name.ends_with('\'') {
                return Err(Error::InvalidGraph(format!("bad edge name `{name}`")));
            }
            let look = |v: &str| {
                vertex_index
                    .get(v)
                    .copied()
                    .ok_or_else(|| Error::UnknownVertex(v.to_string()))
            };
            let from = look(from.as_ref())?;
            let to = look(to.as_ref())?;
            if edge_index.insert(name.clone(), EdgeId(out.len())).is_some() {
                return Err(Error::InvalidGraph(format!("duplicate edge `{name}`")));
            }
            out.push(Edge { name, from, to });
        }
        Ok(MarkedGraph { vertex_names, edges: out, vertex_index, edge_index, intermediate })
    }

    pub fn is_intermediate(&self) -> bool {
        self.intermediate
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e.0]
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> {
        (0..self.edges.len()).map(EdgeId)
    }

    pub fn oriented_edges(&self) -> impl Iterator<Item = OrientedEdge> {
        (0..2 * self.edges.len()).map(OrientedEdge::from_index)
    }

    pub fn vertex_names(&self) -> &[String] {
        &self.vertex_names
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.0].name
    }

    pub fn find_vertex(&self, name: &str) -> Result<VertexId> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownVertex(name.to_string()))
    }

    pub fn find_edge(&self, name: &str) -> Result<EdgeId> {
        self.edge_index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownEdge(name.to_string()))
    }

    pub fn init(&self, e: OrientedEdge) -> VertexId {
        let d = &self.edges[e.edge().0];
        if e.is_inverted() { d.to } else { d.from }
    }

    pub fn term(&self, e: OrientedEdge) -> VertexId {
        let d = &self.edges[e.edge().0];
        if e.is_inverted() { d.from } else { d.to }
    }

    pub fn valence(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .map(|e| (e.from == v) as usize + (e.to == v) as usize)
            .sum()
    }

    /// Directions at `v`: oriented edges whose initial vertex is `v`.
    pub fn directions_at(&self, v: VertexId) -> Vec<OrientedEdge> {
        self.oriented_edges().filter(|&d| self.init(d) == v).collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertex_count() as i64 - self.edge_count() as i64
    }

    /// Vertices incident to the given edges.
    pub fn vertices_of(&self, edges: &[EdgeId]) -> BTreeSet<VertexId> {
        edges
            .iter()
            .flat_map(|&e| [self.edges[e.0].from, self.edges[e.0].to])
            .collect()
    }

    /// Euler characteristic of the subgraph spanned by `edges`.
    pub fn subgraph_euler_characteristic(&self, edges: &[EdgeId]) -> i64 {
        self.vertices_of(edges).len() as i64 - edges.len() as i64
    }

    /// Connected components of the subgraph spanned by `edges`, each given
    /// as (vertices, edges).
    pub fn components(&self, edges: &[EdgeId]) -> Vec<(BTreeSet<VertexId>, Vec<EdgeId>)> {
        let verts: Vec<VertexId> = self.vertices_of(edges).into_iter().collect();
        let pos: HashMap<VertexId, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut uf = petgraph::unionfind::UnionFind::<usize>::new(verts.len());
        for &e in edges {
            uf.union(pos[&self.edges[e.0].from], pos[&self.edges[e.0].to]);
        }
        let mut groups: Vec<(BTreeSet<VertexId>, Vec<EdgeId>)> = Vec::new();
        let mut slot: HashMap<usize, usize> = HashMap::new();
        for &v in &verts {
            let r = uf.find(pos[&v]);
            let i = *slot.entry(r).or_insert_with(|| {
                groups.push((BTreeSet::new(), Vec::new()));
                groups.len() - 1
            });
            groups[i].0.insert(v);
        }
        for &e in edges {
            let r = uf.find(pos[&self.edges[e.0].from]);
            groups[slot[&r]].1.push(e);
        }
        groups
    }

    /// Restriction to a set of edges. Returns the subgraph together with the
    /// original ids of its edges and vertices, in order.
    pub fn subgraph(&self, edges: &[EdgeId]) -> (MarkedGraph, Vec<EdgeId>, Vec<VertexId>) {
        let mut sorted: Vec<EdgeId> = edges.to_vec();
        sorted.sort();
        sorted.dedup();
        let verts: Vec<VertexId> = self.vertices_of(&sorted).into_iter().collect();
        let vnames: Vec<&str> = verts.iter().map(|&v| self.vertex_name(v)).collect();
        let enames: Vec<(&str, &str, &str)> = sorted
            .iter()
            .map(|&e| {
                let d = &self.edges[e.0];
                (d.name.as_str(), self.vertex_name(d.from), self.vertex_name(d.to))
            })
            .collect();
        let g = MarkedGraph::build(&vnames, &enames, true).expect("subgraph of a valid graph");
        (g, sorted, verts)
    }

    pub fn oriented_name(&self, e: OrientedEdge) -> String {
        let n = self.edge_name(e.edge());
        if e.is_inverted() { format!("{n}'") } else { n.to_string() }
    }

    /// Parses `E` or `E'`.
    pub fn parse_oriented(&self, token: &str) -> Result<OrientedEdge> {
        match token.strip_suffix('\'') {
            Some(base) => Ok(OrientedEdge::new(self.find_edge(base)?, true)),
            None => Ok(OrientedEdge::forward(self.find_edge(token)?)),
        }
    }

    /// Parses a whitespace separated edge path. The result is validated
    /// but not tightened.
    pub fn parse_path(&self, text: &str) -> Result<EdgePath> {
        let edges = text
            .split_whitespace()
            .map(|t| self.parse_oriented(t))
            .collect::<Result<Vec<_>>>()?;
        EdgePath::from_edges(self, edges)
    }

    pub fn format_edges(&self, edges: &[OrientedEdge]) -> String {
        edges.iter().map(|&e| self.oriented_name(e)).collect::<Vec<_>>().join(" ")
    }

    pub fn format_path(&self, p: &EdgePath) -> String {
        if p.is_trivial() {
            format!("<{}>", self.vertex_name(p.start))
        } else {
            self.format_edges(&p.edges)
        }
    }
}

/// Checks that consecutive edges share endpoints.
pub fn check_contiguous(g: &MarkedGraph, edges: &[OrientedEdge]) -> Result<()> {
    for (i, w) in edges.windows(2).enumerate() {
        if g.term(w[0]) != g.init(w[1]) {
            return Err(Error::MalformedPath {
                position: i + 1,
                message: format!(
                    "{} ends at {} but {} starts at {}",
                    g.oriented_name(w[0]),
                    g.vertex_name(g.term(w[0])),
                    g.oriented_name(w[1]),
                    g.vertex_name(g.init(w[1]))
                ),
            });
        }
    }
    Ok(())
}

/// Cancels adjacent inverse pairs.
pub fn tighten_edges(edges: &[OrientedEdge]) -> Vec<OrientedEdge> {
    let mut out: Vec<OrientedEdge> = Vec::with_capacity(edges.len());
    for &e in edges {
        if out.last() == Some(&e.inverse()) {
            out.pop();
        } else {
            out.push(e);
        }
    }
    out
}

pub fn is_tight(edges: &[OrientedEdge]) -> bool {
    edges.windows(2).all(|w| w[1] != w[0].inverse())
}

/// A path in a graph. Trivial paths remember their vertex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgePath {
    pub start: VertexId,
    pub edges: Vec<OrientedEdge>,
}

impl EdgePath {
    pub fn trivial(v: VertexId) -> Self {
        EdgePath { start: v, edges: Vec::new() }
    }

    pub fn edge(g: &MarkedGraph, e: OrientedEdge) -> Self {
        EdgePath { start: g.init(e), edges: vec![e] }
    }

    /// Validated, untightened, nonempty.
    pub fn from_edges(g: &MarkedGraph, edges: Vec<OrientedEdge>) -> Result<Self> {
        let Some(&first) = edges.first() else {
            return Err(Error::MalformedPath { position: 0, message: "empty path".into() });
        };
        check_contiguous(g, &edges)?;
        Ok(EdgePath { start: g.init(first), edges })
    }

    /// Validates and tightens. An empty result is the trivial path at the
    /// initial vertex of the input.
    pub fn tightened(g: &MarkedGraph, edges: &[OrientedEdge]) -> Result<Self> {
        let p = Self::from_edges(g, edges.to_vec())?;
        Ok(p.tighten())
    }

    pub fn tighten(self) -> Self {
        EdgePath { start: self.start, edges: tighten_edges(&self.edges) }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_trivial(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn is_tight(&self) -> bool {
        is_tight(&self.edges)
    }

    pub fn first(&self) -> Option<OrientedEdge> {
        self.edges.first().copied()
    }

    pub fn last(&self) -> Option<OrientedEdge> {
        self.edges.last().copied()
    }

    pub fn end(&self, g: &MarkedGraph) -> VertexId {
        self.edges.last().map_or(self.start, |&e| g.term(e))
    }

    pub fn is_closed(&self, g: &MarkedGraph) -> bool {
        self.end(g) == self.start
    }

    pub fn inverse(&self, g: &MarkedGraph) -> Self {
        EdgePath {
            start: self.end(g),
            edges: self.edges.iter().rev().map(|e| e.inverse()).collect(),
        }
    }

    /// Tightened concatenation.
    pub fn concat(&self, g: &MarkedGraph, other: &EdgePath) -> Result<Self> {
        if self.end(g) != other.start {
            return Err(Error::EndpointMismatch(format!(
                "path ends at {} but next starts at {}",
                g.vertex_name(self.end(g)),
                g.vertex_name(other.start)
            )));
        }
        let mut edges = self.edges.clone();
        for &e in &other.edges {
            if edges.last() == Some(&e.inverse()) {
                edges.pop();
            } else {
                edges.push(e);
            }
        }
        Ok(EdgePath { start: self.start, edges })
    }

    /// `self` repeated `k` times; negative `k` uses the inverse.
    pub fn power(&self, g: &MarkedGraph, k: i64) -> Self {
        let base = if k < 0 { self.inverse(g) } else { self.clone() };
        let mut edges = Vec::with_capacity(base.len() * k.unsigned_abs() as usize);
        for _ in 0..k.unsigned_abs() {
            edges.extend_from_slice(&base.edges);
        }
        EdgePath { start: self.start, edges }.tighten()
    }

    pub fn contains_edge(&self, e: EdgeId) -> bool {
        self.edges.iter().any(|d| d.edge() == e)
    }
}

/// Smallest period dividing the length, i.e. the length of the primitive
/// root of the word.
pub fn root_length<T: PartialEq>(w: &[T]) -> usize {
    let n = w.len();
    if n == 0 {
        return 0;
    }
    let mut fail = vec![0usize; n];
    let mut k = 0;
    for i in 1..n {
        while k > 0 && w[i] != w[k] {
            k = fail[k - 1];
        }
        if w[i] == w[k] {
            k += 1;
        }
        fail[i] = k;
    }
    let p = n - fail[n - 1];
    if n % p == 0 { p } else { n }
}

/// A closed path is a proper power iff its word is; `p^k` with `k > 1`.
pub fn is_primitive_word<T: PartialEq>(w: &[T]) -> bool {
    !w.is_empty() && root_length(w) == w.len()
}

/// Index of the lexicographically least rotation.
pub fn least_rotation<T: Ord>(s: &[T]) -> usize {
    let n = s.len();
    let (mut i, mut j, mut k) = (0, 1, 0);
    while i < n && j < n && k < n {
        let a = &s[(i + k) % n];
        let b = &s[(j + k) % n];
        if a == b {
            k += 1;
            continue;
        }
        if a > b {
            i += k + 1;
        } else {
            j += k + 1;
        }
        if i == j {
            j += 1;
        }
        k = 0;
    }
    i.min(j).min(n.saturating_sub(1))
}

/// A cyclically reduced loop up to rotation, stored in its least rotation.
/// The empty circuit is the trivial one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Circuit {
    pub edges: Vec<OrientedEdge>,
}

impl Circuit {
    pub fn from_closed_path(g: &MarkedGraph, p: &EdgePath) -> Result<Self> {
        if !p.is_closed(g) {
            return Err(Error::NotClosed);
        }
        Ok(Self::from_cyclic_word(&p.edges))
    }

    /// Cyclically tightens then rotates into canonical position.
    pub fn from_cyclic_word(edges: &[OrientedEdge]) -> Self {
        let mut w = tighten_edges(edges);
        let mut a = 0;
        let mut b = w.len();
        while b - a >= 2 && w[a] == w[b - 1].inverse() {
            a += 1;
            b -= 1;
        }
        w = w[a..b].to_vec();
        let r = least_rotation(&w);
        w.rotate_left(r);
        Circuit { edges: w }
    }

    pub fn is_trivial(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn inverse(&self) -> Self {
        let w: Vec<_> = self.edges.iter().rev().map(|e| e.inverse()).collect();
        Self::from_cyclic_word(&w)
    }

    /// Equal up to orientation.
    pub fn same_unoriented(&self, other: &Circuit) -> bool {
        self == other || *self == other.inverse()
    }

    pub fn is_primitive(&self) -> bool {
        is_primitive_word(&self.edges)
    }
}

pub fn is_primitive(g: &MarkedGraph, p: &EdgePath) -> Result<bool> {
    let c = Circuit::from_closed_path(g, p)?;
    if c.is_trivial() {
        return Err(Error::TrivialCircuit);
    }
    Ok(c.is_primitive())
}

pub struct Named<'a, T>(pub &'a MarkedGraph, pub &'a T);

impl fmt::Display for Named<'_, EdgePath> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.format_path(self.1))
    }
}

impl fmt::Display for Named<'_, Circuit> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({})", self.0.format_edges(&self.1.edges))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rose(n: usize) -> MarkedGraph {
        let names: Vec<String> = (1..=n).map(|i| format!("E{i}")).collect();
        let edges: Vec<(&str, &str, &str)> = names.iter().map(|s| (s.as_str(), "v", "v")).collect();
        MarkedGraph::new(&["v"], &edges).unwrap()
    }

    #[test]
    fn tighten_cancels_pairs() {
        let g = rose(2);
        let p = g.parse_path("E1 E2 E2' E1' E2").unwrap().tighten();
        assert_eq!(g.format_path(&p), "E2");
        let q = g.parse_path("E1 E1'").unwrap().tighten();
        assert!(q.is_trivial());
        assert_eq!(q.start, VertexId(0));
    }

    #[test]
    fn malformed_path_reports_position() {
        let g = MarkedGraph::new(&["a", "b"], &[("X", "a", "b"), ("Y", "a", "b")]).unwrap();
        match g.parse_path("X X") {
            Err(Error::MalformedPath { position, .. }) => assert_eq!(position, 1),
            other => panic!("{other:?}"),
        }
        assert!(g.parse_path("X Y'").is_ok());
    }

    #[test]
    fn circuit_rotation_and_reduction() {
        let g = rose(3);
        let a = Circuit::from_closed_path(&g, &g.parse_path("E3 E1 E2").unwrap()).unwrap();
        let b = Circuit::from_closed_path(&g, &g.parse_path("E2 E3 E1").unwrap()).unwrap();
        assert_eq!(a, b);
        assert_eq!(g.format_edges(&a.edges), "E1 E2 E3");
        let c = Circuit::from_closed_path(&g, &g.parse_path("E2 E1 E3 E2'").unwrap()).unwrap();
        assert_eq!(g.format_edges(&c.edges), "E1 E3");
        let t = Circuit::from_closed_path(&g, &g.parse_path("E2 E2'").unwrap()).unwrap();
        assert!(t.is_trivial());
    }

    #[test]
    fn primitivity() {
        let g = rose(2);
        assert!(!is_primitive(&g, &g.parse_path("E1 E2 E1 E2").unwrap()).unwrap());
        assert!(is_primitive(&g, &g.parse_path("E1 E2 E1 E2 E2").unwrap()).unwrap());
        assert!(!is_primitive(&g, &g.parse_path("E1 E1 E1").unwrap()).unwrap());
        assert_eq!(is_primitive(&g, &g.parse_path("E1 E1'").unwrap()), Err(Error::TrivialCircuit));
    }

    #[test]
    fn least_rotation_matches_brute_force() {
        let words: [&[u8]; 6] = [b"bca", b"aaa", b"abab", b"baaab", b"cabcab", b"zyxzyxa"];
        for w in words {
            let k = least_rotation(w);
            let best = (0..w.len())
                .map(|r| [&w[r..], &w[..r]].concat())
                .min()
                .unwrap();
            assert_eq!([&w[k..], &w[..k]].concat(), best, "{:?}", w);
        }
    }

    #[test]
    fn euler_characteristic_of_subgraphs() {
        let g = MarkedGraph::new(
            &["a", "b"],
            &[("X", "a", "a"), ("Y", "b", "a"), ("Z", "b", "a")],
        )
        .unwrap();
        assert_eq!(g.euler_characteristic(), -1);
        assert_eq!(g.subgraph_euler_characteristic(&[EdgeId(0)]), 0);
        assert_eq!(g.subgraph_euler_characteristic(&[EdgeId(1)]), 1);
        assert_eq!(g.components(&[EdgeId(0), EdgeId(1), EdgeId(2)]).len(), 1);
    }

    #[test]
    fn valence_one_rejected_unless_intermediate() {
        let e = [("X", "a", "b"), ("Y", "b", "b")];
        assert!(MarkedGraph::new(&["a", "b"], &e).is_err());
        assert!(MarkedGraph::intermediate(&["a", "b"], &e).is_ok());
    }
}
