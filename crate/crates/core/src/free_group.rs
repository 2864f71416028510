//! Free group words, π₁ images of graph maps, Stallings folding.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use crate::graph_map::GraphMap;
use crate::paths::{root_length, EdgeId, EdgePath, MarkedGraph, OrientedEdge, VertexId};

/// Letters are `±(i + 1)` for generator `i`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(pub Vec<i32>);

impl Word {
    pub fn identity() -> Self {
        Word(Vec::new())
    }

    pub fn generator(i: usize) -> Self {
        Word(vec![i as i32 + 1])
    }

    pub fn reduced(letters: impl IntoIterator<Item = i32>) -> Self {
        let mut out: Vec<i32> = Vec::new();
        for x in letters {
            if out.last() == Some(&-x) {
                out.pop();
            } else {
                out.push(x);
            }
        }
        Word(out)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn inverse(&self) -> Self {
        Word(self.0.iter().rev().map(|x| -x).collect())
    }

    pub fn mul(&self, other: &Word) -> Self {
        Word::reduced(self.0.iter().chain(other.0.iter()).copied())
    }

    pub fn conjugate_by(&self, c: &Word) -> Self {
        c.mul(self).mul(&c.inverse())
    }

    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::identity();
        for _ in 0..k.unsigned_abs() {
            out = out.mul(&base);
        }
        out
    }

    /// `(p, r)` with `self = p r p⁻¹` and `r` cyclically reduced.
    pub fn cyclic_split(&self) -> (Word, Word) {
        let w = &self.0;
        let mut a = 0;
        let mut b = w.len();
        while b - a >= 2 && w[a] == -w[b - 1] {
            a += 1;
            b -= 1;
        }
        (Word(w[..a].to_vec()), Word(w[a..b].to_vec()))
    }

    pub fn exponent_sums(&self, n: usize) -> Vec<i64> {
        let mut v = vec![0i64; n];
        for &x in &self.0 {
            v[x.unsigned_abs() as usize - 1] += x.signum() as i64;
        }
        v
    }

    /// Parses the output of [`Word::format`]: `x1 x2' ..`, or `1`.
    pub fn parse(text: &str) -> crate::Result<Word> {
        let mut letters = Vec::new();
        for (i, tok) in text.split_whitespace().enumerate() {
            if tok == "1" {
                continue;
            }
            let (body, inv) = match tok.strip_suffix('\'') {
                Some(b) => (b, true),
                None => (tok, false),
            };
            let k: i32 = body
                .strip_prefix('x')
                .and_then(|d| d.parse().ok())
                .filter(|&k| k >= 1)
                .ok_or_else(|| crate::Error::MalformedPath { position: i, message: format!("bad letter `{tok}`") })?;
            letters.push(if inv { -k } else { k });
        }
        Ok(Word::reduced(letters))
    }

    pub fn format(&self) -> String {
        if self.0.is_empty() {
            return "1".into();
        }
        self.0
            .iter()
            .map(|&x| if x > 0 { format!("x{x}") } else { format!("x{}'", -x) })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// A spanning tree with the remaining edges as free generators.
#[derive(Clone, Debug)]
pub struct SpanningTree {
    pub root: VertexId,
    pub in_tree: Vec<bool>,
    /// Tree path from the root to each vertex.
    pub paths: Vec<Vec<OrientedEdge>>,
    /// Generator index of each non-tree edge.
    pub generator_of: Vec<Option<usize>>,
    pub generators: Vec<EdgeId>,
}

impl SpanningTree {
    /// Breadth-first from `root`, scanning edges in order. The graph must be
    /// connected.
    pub fn bfs(g: &MarkedGraph, root: VertexId) -> Self {
        let n = g.vertex_count();
        let mut paths: Vec<Option<Vec<OrientedEdge>>> = vec![None; n];
        let mut in_tree = vec![false; g.edge_count()];
        paths[root.0] = Some(Vec::new());
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for d in g.oriented_edges() {
                if g.init(d) == v && paths[g.term(d).0].is_none() {
                    let mut p = paths[v.0].clone().unwrap();
                    p.push(d);
                    paths[g.term(d).0] = Some(p);
                    in_tree[d.edge().0] = true;
                    queue.push_back(g.term(d));
                }
            }
        }
        let paths: Vec<Vec<OrientedEdge>> = paths.into_iter().map(|p| p.expect("connected graph")).collect();
        let mut generator_of = vec![None; g.edge_count()];
        let mut generators = Vec::new();
        for e in g.edge_ids() {
            if !in_tree[e.0] {
                generator_of[e.0] = Some(generators.len());
                generators.push(e);
            }
        }
        SpanningTree { root, in_tree, paths, generator_of, generators }
    }

    pub fn rank(&self) -> usize {
        self.generators.len()
    }

    pub fn word_of(&self, edges: &[OrientedEdge]) -> Word {
        Word::reduced(edges.iter().filter_map(|d| {
            self.generator_of[d.edge().0].map(|i| if d.is_inverted() { -(i as i32 + 1) } else { i as i32 + 1 })
        }))
    }

    /// The closed path at the root representing generator `i`.
    pub fn generator_loop(&self, g: &MarkedGraph, i: usize) -> EdgePath {
        let d = OrientedEdge::forward(self.generators[i]);
        let mut edges = self.paths[g.init(d).0].clone();
        edges.push(d);
        edges.extend(self.paths[g.term(d).0].iter().rev().map(|x| x.inverse()));
        EdgePath { start: self.root, edges }.tighten()
    }
}

pub fn is_connected(g: &MarkedGraph) -> bool {
    let all: Vec<EdgeId> = g.edge_ids().collect();
    g.vertex_count() > 0 && g.components(&all).len() == 1 && g.vertices_of(&all).len() == g.vertex_count()
}

/// Images of the free generators, with the basepoint moved back along the
/// tree path from the root to its image.
pub fn pi1_images_with(m: &GraphMap, tree: &SpanningTree) -> Vec<Word> {
    let g = m.graph();
    (0..tree.rank())
        .map(|i| {
            let l = tree.generator_loop(g, i);
            tree.word_of(&m.apply(&l).edges)
        })
        .collect()
}

pub fn pi1_images(m: &GraphMap) -> Vec<Word> {
    pi1_images_with(m, &SpanningTree::bfs(m.graph(), VertexId(0)))
}

/// Signed crossings of the non-tree edges.
pub fn homology_class(tree: &SpanningTree, p: &EdgePath) -> Vec<i64> {
    tree.word_of(&p.edges).exponent_sums(tree.rank())
}

/// Folded graph of a finitely generated subgroup.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FoldedGraph {
    pub vertex_count: usize,
    /// `(from, label, to)` with positive labels.
    pub edges: Vec<(usize, i32, usize)>,
}

/// Stallings folding of the petals of `words`, processing edges in `order`
/// (a permutation of the petal edges) when given.
pub fn fold(words: &[Word], order: Option<&[usize]>) -> FoldedGraph {
    let mut vcount = 1usize;
    let mut raw: Vec<(usize, i32, usize)> = Vec::new();
    for w in words {
        if w.is_empty() {
            continue;
        }
        let mut at = 0usize;
        for (k, &x) in w.0.iter().enumerate() {
            let to = if k + 1 == w.len() {
                0
            } else {
                vcount += 1;
                vcount - 1
            };
            if x > 0 { raw.push((at, x, to)) } else { raw.push((to, -x, at)) }
            at = to;
        }
    }
    let idx: Vec<usize> = match order {
        Some(o) => o.iter().copied().filter(|&i| i < raw.len()).collect(),
        None => (0..raw.len()).collect(),
    };
    let mut uf = petgraph::unionfind::UnionFind::<usize>::new(vcount);
    let mut edges: Vec<(usize, i32, usize)> = idx.iter().map(|&i| raw[i]).collect();
    loop {
        let mut changed = false;
        let mut seen: HashMap<(usize, i32), usize> = HashMap::new();
        for &(a, l, b) in &edges {
            let (a, b) = (uf.find(a), uf.find(b));
            for (key, target) in [((a, l), b), ((b, -l), a)] {
                match seen.get(&key) {
                    Some(&t) if uf.find(t) != uf.find(target) => {
                        uf.union(t, target);
                        changed = true;
                    }
                    Some(_) => {}
                    None => {
                        seen.insert(key, target);
                    }
                }
            }
        }
        let mut next: Vec<(usize, i32, usize)> = edges.iter().map(|&(a, l, b)| (uf.find(a), l, uf.find(b))).collect();
        next.sort();
        next.dedup();
        edges = next;
        if !changed {
            break;
        }
    }
    // relabel vertices, basepoint first
    let mut label: HashMap<usize, usize> = HashMap::new();
    label.insert(uf.find(0), 0);
    for &(a, _, b) in &edges {
        for v in [a, b] {
            let n = label.len();
            label.entry(v).or_insert(n);
        }
    }
    let mut out: Vec<(usize, i32, usize)> = edges.iter().map(|&(a, l, b)| (label[&a], l, label[&b])).collect();
    out.sort();
    FoldedGraph { vertex_count: label.len(), edges: out }
}

/// The words generate `F_n` iff they fold to the rose with `n` petals.
pub fn is_surjective(words: &[Word], n: usize) -> bool {
    let f = fold(words, None);
    f.vertex_count == 1 && f.edges.len() == n && f.edges.iter().enumerate().all(|(i, &(_, l, _))| l == i as i32 + 1)
}

/// Column `j` holds the exponent sums of the image of generator `j`.
pub fn abelianization(words: &[Word], n: usize) -> Vec<Vec<i64>> {
    let cols: Vec<Vec<i64>> = words.iter().map(|w| w.exponent_sums(n)).collect();
    (0..n).map(|i| (0..words.len()).map(|j| cols[j][i]).collect()).collect()
}

/// Exact determinant by fraction-free elimination.
pub fn determinant(m: &[Vec<i64>]) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut a: Vec<Vec<BigInt>> = m.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect();
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                Some(i) => {
                    a.swap(i, k);
                    sign = -sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                a[i][j] = v;
            }
        }
        prev = a[k][k].clone();
    }
    sign * &a[n - 1][n - 1]
}

pub fn is_ia(words: &[Word], n: usize) -> bool {
    let a = abelianization(words, n);
    (0..n).all(|i| (0..n).all(|j| a[i][j] == (i == j) as i64))
}

/// Homotopy equivalence test: connected, and the π₁ images generate.
pub fn is_homotopy_equivalence(m: &GraphMap) -> bool {
    let g = m.graph();
    if !is_connected(g) {
        return false;
    }
    let tree = SpanningTree::bfs(g, VertexId(0));
    let words = pi1_images_with(m, &tree);
    if !is_surjective(&words, tree.rank()) {
        return false;
    }
    determinant(&abelianization(&words, tree.rank())).abs().is_one()
}

/// `c` with `us[i] = c · vs[i] · c⁻¹` for every `i`.
pub fn find_conjugator(us: &[Word], vs: &[Word]) -> Option<Word> {
    if us.len() != vs.len() {
        return None;
    }
    let Some(k0) = (0..vs.len()).find(|&i| !vs[i].is_empty()) else {
        return us.iter().all(|u| u.is_empty()).then(Word::identity);
    };
    let (p, r) = vs[k0].cyclic_split();
    let (q, s) = us[k0].cyclic_split();
    if r.len() != s.len() {
        return None;
    }
    let n = r.len();
    let rl = root_length(&r.0);
    let rho = Word(r.0[..rl].to_vec());
    let total: usize = us.iter().chain(vs.iter()).map(|w| w.len()).sum();
    let kmax = (total / rl.max(1)) as i64 + 2;
    for k in 0..n {
        // s = x⁻¹ r x with x the first k letters of r
        let rotated: Vec<i32> = r.0[k..].iter().chain(r.0[..k].iter()).copied().collect();
        if rotated != s.0 {
            continue;
        }
        let x = Word(r.0[..k].to_vec());
        let base = q.mul(&x.inverse());
        for m in -kmax..=kmax {
            let c = base.mul(&rho.pow(m)).mul(&p.inverse());
            if us.iter().zip(vs).all(|(u, v)| *u == v.conjugate_by(&c)) {
                return Some(c);
            }
        }
    }
    None
}

/// A conjugator relating the π₁ images of two maps on the same graph, if
/// they represent the same outer automorphism.
pub fn same_outer_class(m1: &GraphMap, m2: &GraphMap) -> Option<Word> {
    if m1.graph() != m2.graph() {
        return None;
    }
    let tree = SpanningTree::bfs(m1.graph(), VertexId(0));
    find_conjugator(&pi1_images_with(m1, &tree), &pi1_images_with(m2, &tree))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(v: &[i32]) -> Word {
        Word(v.to_vec())
    }

    #[test]
    fn word_text_round_trip() {
        let x = w(&[1, -2, 3]);
        assert_eq!(Word::parse(&x.format()).unwrap(), x);
        assert_eq!(Word::parse("1").unwrap(), Word::identity());
        assert_eq!(Word::parse("x1 x1'").unwrap(), Word::identity());
        assert!(Word::parse("x1 y2").is_err());
    }

    #[test]
    fn folding_detects_generation() {
        assert!(is_surjective(&[w(&[1]), w(&[2, 1])], 2));
        assert!(!is_surjective(&[w(&[1, 1]), w(&[2])], 2));
        assert!(!is_surjective(&[w(&[1, 2, -1]), w(&[2])], 2));
        assert!(is_surjective(&[w(&[1, 2]), w(&[2])], 2));
    }

    #[test]
    fn determinant_small() {
        assert_eq!(determinant(&[vec![2, 1], vec![1, 1]]), BigInt::from(1));
        assert_eq!(determinant(&[vec![0, 1, 0], vec![1, 0, 0], vec![0, 0, 1]]), BigInt::from(-1));
        assert_eq!(determinant(&[vec![1, 2], vec![2, 4]]), BigInt::from(0));
    }

    #[test]
    fn conjugator_recovers_inner_factor() {
        let vs = vec![w(&[1]), w(&[2, 1]), w(&[1, 3, 1, 1])];
        let c = w(&[1, 2]);
        let us: Vec<Word> = vs.iter().map(|v| v.conjugate_by(&c)).collect();
        let found = find_conjugator(&us, &vs).unwrap();
        assert!(us.iter().zip(&vs).all(|(u, v)| *u == v.conjugate_by(&found)));
        assert!(find_conjugator(&[w(&[1]), w(&[2])], &[w(&[1]), w(&[1, 2])]).is_none());
    }
}
