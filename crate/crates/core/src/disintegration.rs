//! Almost invariant subgraphs, admissibility relations, the admissible
//! lattice and the maps `f_a`.

use std::collections::{BTreeSet, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::analysis::MapAnalysis;
use crate::error::{Error, Result};
use crate::free_group::is_homotopy_equivalence;
use crate::graph_map::GraphMap;
use crate::nielsen::{complete_split, qe_split, QeFamily, Term, TermKind};
use crate::paths::{EdgeId, EdgePath, OrientedEdge};

/// Classes `X_1 .. X_M` of non-fixed strata, ordered by lowest stratum.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlmostInvariantPartition {
    /// 0-based stratum indices of each class.
    pub classes: Vec<Vec<usize>>,
    /// Class of each stratum; `None` for fixed strata.
    pub class_of: Vec<Option<usize>>,
    /// Edges of each class.
    pub edges: Vec<Vec<EdgeId>>,
}

impl AlmostInvariantPartition {
    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn class_of_edge(&self, a: &MapAnalysis, e: EdgeId) -> Option<usize> {
        self.class_of[a.level[e.0]]
    }
}

/// Strata touched by the non-Nielsen, non-QE terms of a QE-splitting.
fn linked_strata(a: &MapAnalysis, terms: &[Term]) -> Vec<usize> {
    terms
        .iter()
        .filter(|t| matches!(t.kind, TermKind::Edge | TermKind::Connecting))
        .filter(|t| !(t.kind == TermKind::Edge && a.map.is_fixed_edge(t.path.edges[0].edge())))
        .map(|t| a.level[t.path.edges[0].edge().0])
        .collect()
}

/// Union-find closure of "a term of the QE-splitting of `f(A_i)` is
/// `A_j`" over edges and connecting paths of non-fixed strata.
pub fn almost_invariant_subgraphs(a: &MapAnalysis) -> Result<AlmostInvariantPartition> {
    let n = a.strata.len();
    let mut uf = petgraph::unionfind::UnionFind::<usize>::new(n);
    let mut connecting: Vec<EdgePath> = Vec::new();
    let mut seen: HashSet<Vec<OrientedEdge>> = HashSet::new();
    for s in &a.strata {
        if s.is_fixed() || s.is_zero() {
            continue;
        }
        for &e in &s.edges {
            let terms = qe_split(a, &a.edge_splitting(e)?);
            for j in linked_strata(a, &terms) {
                uf.union(s.index, j);
            }
            for t in terms.iter().filter(|t| t.kind == TermKind::Connecting) {
                if seen.insert(t.path.edges.clone()) {
                    connecting.push(t.path.clone());
                }
            }
        }
    }
    while let Some(c) = connecting.pop() {
        let img = a.map.apply(&c);
        let i = a.level[c.edges[0].edge().0];
        if img.is_trivial() {
            continue;
        }
        let terms = qe_split(a, &complete_split(a, &img)?);
        for j in linked_strata(a, &terms) {
            uf.union(i, j);
        }
        for t in terms.iter().filter(|t| t.kind == TermKind::Connecting) {
            if seen.insert(t.path.edges.clone()) {
                connecting.push(t.path.clone());
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of = vec![None; n];
    let mut root_class = std::collections::HashMap::new();
    for s in &a.strata {
        if s.is_fixed() {
            continue;
        }
        let r = uf.find(s.index);
        let c = *root_class.entry(r).or_insert_with(|| {
            classes.push(Vec::new());
            classes.len() - 1
        });
        classes[c].push(s.index);
        class_of[s.index] = Some(c);
    }
    let edges = classes
        .iter()
        .map(|c| {
            let mut v: Vec<EdgeId> = c.iter().flat_map(|&i| a.strata[i].edges.iter().copied()).collect();
            v.sort();
            v
        })
        .collect();
    Ok(AlmostInvariantPartition { classes, class_of, edges })
}

/// `a_r (d_i - d_j) = a_s d_i - a_t d_j`, from a QE family `E_i w^* Ē_j`
/// with `E_i ⊂ X_s`, `E_j ⊂ X_t` occurring in the image of an edge of
/// `X_r`. Class indices are 0-based.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibilityRelation {
    pub r: usize,
    pub s: usize,
    pub t: usize,
    pub d_i: i64,
    pub d_j: i64,
    pub family: QeFamily,
}

impl AdmissibilityRelation {
    /// Coefficients `c` with `c · a = 0`.
    pub fn row(&self, m: usize) -> Vec<i64> {
        let mut c = vec![0i64; m];
        c[self.r] += self.d_i - self.d_j;
        c[self.s] -= self.d_i;
        c[self.t] += self.d_j;
        c
    }

    pub fn describe(&self) -> String {
        format!(
            "a_{}({} - {}) = a_{}·{} - a_{}·{}",
            self.r + 1,
            self.d_i,
            self.d_j,
            self.s + 1,
            self.d_i,
            self.t + 1,
            self.d_j
        )
    }

    pub fn holds(&self, a: &[i64]) -> bool {
        self.row(a.len()).iter().zip(a).map(|(c, x)| c * x).sum::<i64>() == 0
    }
}

pub fn admissibility_relations(
    a: &MapAnalysis,
    part: &AlmostInvariantPartition,
) -> Result<Vec<AdmissibilityRelation>> {
    let mut out: Vec<AdmissibilityRelation> = Vec::new();
    let mut keys: HashSet<((EdgeId, EdgeId), usize)> = HashSet::new();
    for (r, edges) in part.edges.iter().enumerate() {
        for &e in edges {
            let terms = qe_split(a, &a.edge_splitting(e)?);
            for t in terms.iter().filter(|t| t.kind == TermKind::QuasiExceptional) {
                let fam = t.family.expect("QE terms carry their family");
                if !keys.insert((fam.key(), r)) {
                    continue;
                }
                let li = a.linear_edge(fam.initial).expect("linear edge");
                let lj = a.linear_edge(fam.terminal).expect("linear edge");
                let s = part.class_of_edge(a, fam.initial.edge()).expect("linear edges lie in a class");
                let t_ = part.class_of_edge(a, fam.terminal.edge()).expect("linear edges lie in a class");
                out.push(AdmissibilityRelation { r, s, t: t_, d_i: li.exponent, d_j: lj.exponent, family: fam });
            }
        }
    }
    Ok(out)
}

/// Kernel of the relation matrix inside `ℤ^M`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdmissibleLattice {
    pub m: usize,
    /// Primitive, deduplicated relation rows.
    pub relations: Vec<Vec<BigInt>>,
    /// Basis in Hermite normal form.
    pub basis: Vec<Vec<BigInt>>,
}

impl AdmissibleLattice {
    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn contains(&self, a: &[i64]) -> bool {
        a.len() == self.m
            && self.relations.iter().all(|r| {
                r.iter().zip(a).map(|(c, &x)| c * BigInt::from(x)).sum::<BigInt>().is_zero()
            })
    }

    pub fn basis_i64(&self) -> Vec<Vec<i64>> {
        self.basis
            .iter()
            .map(|v| v.iter().map(|x| x.to_i64().expect("basis entry fits in i64")).collect())
            .collect()
    }

    /// A nonnegative lattice point close to `a`, for suggesting a
    /// replacement when `a` is rejected. Candidates are the floor/ceiling
    /// roundings of the least-squares coefficients in the basis and the
    /// multiples of `I` nearest to `a` (when admissible) and zero; among equally close candidates the
    /// one nearest the line through `I` wins.
    pub fn nearest_admissible(&self, a: &[i64]) -> Vec<i64> {
        let basis = self.basis_i64();
        let dist = |b: &[i64]| b.iter().zip(a).map(|(x, y)| (x - y) * (x - y)).sum::<i64>();
        let off_axis = |b: &[i64]| {
            let n = b.len() as i64;
            let s: i64 = b.iter().sum();
            n * b.iter().map(|x| x * x).sum::<i64>() - s * s
        };
        let mut cands: Vec<Vec<i64>> = vec![vec![0; self.m]];
        let mean = a.iter().sum::<i64>() as f64 / self.m.max(1) as f64;
        for k in [mean.floor(), mean.ceil()] {
            let b = vec![(k as i64).max(0); self.m];
            if self.contains(&b) {
                cands.push(b);
            }
        }
        let r = basis.len();
        if r > 0 && r <= 12 {
            let gram: Vec<Vec<f64>> = basis
                .iter()
                .map(|u| basis.iter().map(|v| u.iter().zip(v).map(|(x, y)| (x * y) as f64).sum()).collect())
                .collect();
            let rhs: Vec<f64> = basis.iter().map(|u| u.iter().zip(a).map(|(x, y)| (x * y) as f64).sum()).collect();
            if let Some(c) = solve(gram, rhs) {
                for mask in 0u32..1 << r {
                    let coeffs: Vec<i64> = c
                        .iter()
                        .enumerate()
                        .map(|(i, x)| if mask >> i & 1 == 1 { x.ceil() as i64 } else { x.floor() as i64 })
                        .collect();
                    let mut b = vec![0i64; self.m];
                    for (k, u) in coeffs.iter().zip(&basis) {
                        for (x, y) in b.iter_mut().zip(u) {
                            *x += k * y;
                        }
                    }
                    if b.iter().all(|&x| x >= 0) {
                        cands.push(b);
                    }
                }
            }
        }
        cands.into_iter().min_by_key(|b| (dist(b), off_axis(b), b.clone())).expect("zero is a candidate")
    }
}

/// Gaussian elimination with partial pivoting.
fn solve(mut m: Vec<Vec<f64>>, mut rhs: Vec<f64>) -> Option<Vec<f64>> {
    let n = rhs.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| m[i][c].abs().total_cmp(&m[j][c].abs()))?;
        if m[p][c].abs() < 1e-12 {
            return None;
        }
        m.swap(c, p);
        rhs.swap(c, p);
        for i in c + 1..n {
            let f = m[i][c] / m[c][c];
            for j in c..n {
                m[i][j] -= f * m[c][j];
            }
            rhs[i] -= f * rhs[c];
        }
    }
    let mut x = vec![0.0; n];
    for c in (0..n).rev() {
        let s: f64 = (c + 1..n).map(|j| m[c][j] * x[j]).sum();
        x[c] = (rhs[c] - s) / m[c][c];
    }
    Some(x)
}

fn primitive(mut v: Vec<BigInt>) -> Vec<BigInt> {
    let g = v.iter().fold(BigInt::zero(), |g, x| g.gcd(x));
    if !g.is_zero() {
        for x in v.iter_mut() {
            *x /= &g;
        }
    }
    if v.iter().find(|x| !x.is_zero()).is_some_and(|x| x.is_negative()) {
        for x in v.iter_mut() {
            *x = -&*x;
        }
    }
    v
}

/// Row echelon form over ℤ on the first `cols` columns using unimodular row
/// operations. Returns the number of pivot rows.
fn echelon(rows: &mut [Vec<BigInt>], cols: usize) -> usize {
    let mut top = 0;
    for c in 0..cols {
        if top == rows.len() {
            break;
        }
        loop {
            // smallest nonzero |entry| in column c at or below top
            let piv = (top..rows.len())
                .filter(|&i| !rows[i][c].is_zero())
                .min_by(|&i, &j| rows[i][c].abs().cmp(&rows[j][c].abs()));
            let Some(p) = piv else { break };
            rows.swap(top, p);
            let mut done = true;
            for i in top + 1..rows.len() {
                if rows[i][c].is_zero() {
                    continue;
                }
                let q = rows[i][c].div_floor(&rows[top][c]);
                let pivot_row = rows[top].clone();
                for (x, y) in rows[i].iter_mut().zip(&pivot_row) {
                    *x -= &q * y;
                }
                if !rows[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if !rows[top][c].is_zero() {
            top += 1;
        }
    }
    top
}

/// Hermite normal form of the lattice spanned by `rows`: positive pivots,
/// entries above each pivot reduced into `[0, pivot)`, zero rows dropped.
pub fn hermite_normal_form(mut rows: Vec<Vec<BigInt>>) -> Vec<Vec<BigInt>> {
    let Some(width) = rows.first().map(|r| r.len()) else { return rows };
    let r = echelon(&mut rows, width);
    rows.truncate(r);
    let mut pivots = Vec::new();
    for i in 0..rows.len() {
        let c = rows[i].iter().position(|x| !x.is_zero()).unwrap();
        if rows[i][c].is_negative() {
            for x in rows[i].iter_mut() {
                *x = -&*x;
            }
        }
        pivots.push(c);
    }
    for i in 0..rows.len() {
        let c = pivots[i];
        for k in 0..i {
            let q = rows[k][c].div_floor(&rows[i][c]);
            if !q.is_zero() {
                let ri = rows[i].clone();
                for (x, y) in rows[k].iter_mut().zip(&ri) {
                    *x -= &q * y;
                }
            }
        }
    }
    rows
}

/// Exact integer kernel of the relations.
pub fn lattice(rels: &[AdmissibilityRelation], m: usize) -> AdmissibleLattice {
    let rows: Vec<Vec<i64>> = rels.iter().map(|r| r.row(m)).collect();
    lattice_from_rows(&rows, m)
}

pub fn lattice_from_rows(rows: &[Vec<i64>], m: usize) -> AdmissibleLattice {
    let mut relations: Vec<Vec<BigInt>> = Vec::new();
    for r in rows {
        let p = primitive(r.iter().map(|&x| BigInt::from(x)).collect());
        if p.iter().any(|x| !x.is_zero()) && !relations.contains(&p) {
            relations.push(p);
        }
    }
    let k = relations.len();
    // rows of [Aᵀ | I]
    let mut aug: Vec<Vec<BigInt>> = (0..m)
        .map(|j| {
            let mut row: Vec<BigInt> = relations.iter().map(|r| r[j].clone()).collect();
            row.extend((0..m).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let r = echelon(&mut aug, k);
    let kernel: Vec<Vec<BigInt>> = aug[r..].iter().map(|row| row[k..].to_vec()).collect();
    let basis = hermite_normal_form(kernel);
    AdmissibleLattice { m, relations, basis }
}

/// The partition, relations and lattice of a map.
#[derive(Clone, Debug)]
pub struct Disintegration {
    pub partition: AlmostInvariantPartition,
    pub relations: Vec<AdmissibilityRelation>,
    pub lattice: AdmissibleLattice,
}

pub fn disintegrate(a: &MapAnalysis) -> Result<Disintegration> {
    let partition = almost_invariant_subgraphs(a)?;
    let relations = admissibility_relations(a, &partition)?;
    let lattice = lattice(&relations, partition.len());
    Ok(Disintegration { partition, relations, lattice })
}

/// `f^k_#(E)` on the edges of each class, other edges fixed. No
/// admissibility check.
pub fn disintegration_map(m: &GraphMap, classes: &[Vec<EdgeId>], tuple: &[u64]) -> Result<GraphMap> {
    if classes.len() != tuple.len() {
        return Err(Error::Domain(format!("tuple has {} entries, expected {}", tuple.len(), classes.len())));
    }
    let g = m.graph();
    let mut power = vec![0u64; g.edge_count()];
    for (c, &k) in classes.iter().zip(tuple) {
        for e in c {
            power[e.0] = k;
        }
    }
    let images = g
        .edge_ids()
        .map(|e| {
            let p = EdgePath::edge(g, OrientedEdge::forward(e));
            if m.is_fixed_edge(e) { p } else { m.iterate(&p, power[e.0] as usize) }
        })
        .collect();
    GraphMap::new(g.clone(), images)
}

/// `f_a` for an admissible tuple.
pub fn build_fa(a: &MapAnalysis, d: &Disintegration, tuple: &[i64]) -> Result<GraphMap> {
    if tuple.len() != d.partition.len() {
        return Err(Error::Domain(format!(
            "tuple has {} entries, expected {}",
            tuple.len(),
            d.partition.len()
        )));
    }
    if let Some(x) = tuple.iter().find(|&&x| x < 0) {
        return Err(Error::Domain(format!("negative coordinate {x}")));
    }
    if !d.lattice.contains(tuple) {
        let broken: Vec<String> = d
            .relations
            .iter()
            .filter(|r| !r.holds(tuple))
            .map(|r| r.describe())
            .collect();
        return Err(Error::NotAdmissible(broken.join("; ")));
    }
    let t: Vec<u64> = tuple.iter().map(|&x| x as u64).collect();
    disintegration_map(&a.map, &d.partition.edges, &t)
}

pub fn verify_homotopy_equivalence(m: &GraphMap) -> bool {
    is_homotopy_equivalence(m)
}

/// Every coordinate positive, and `a_r d_i ≠ a_s d_j` for distinct linear
/// edges on a common axis.
pub fn is_generic(a: &MapAnalysis, part: &AlmostInvariantPartition, tuple: &[i64]) -> bool {
    if tuple.iter().any(|&x| x <= 0) {
        return false;
    }
    for ax in &a.axes {
        for (i, li) in ax.edges.iter().enumerate() {
            for lj in &ax.edges[i + 1..] {
                let (Some(r), Some(s)) = (
                    part.class_of_edge(a, li.edge.edge()),
                    part.class_of_edge(a, lj.edge.edge()),
                ) else {
                    continue;
                };
                if tuple[r] * li.exponent == tuple[s] * lj.exponent {
                    return false;
                }
            }
        }
    }
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommuteReport {
    pub commute: bool,
    pub composite_is_sum: bool,
}

/// Compares `f_a ∘ f_b`, `f_b ∘ f_a` and `f_{a+b}` edge by edge.
pub fn verify_commute(a: &MapAnalysis, d: &Disintegration, x: &[i64], y: &[i64]) -> Result<CommuteReport> {
    let fx = build_fa(a, d, x)?;
    let fy = build_fa(a, d, y)?;
    let sum: Vec<i64> = x.iter().zip(y).map(|(p, q)| p + q).collect();
    let fs = build_fa(a, d, &sum)?;
    let xy = GraphMap::compose(&fx, &fy)?;
    let yx = GraphMap::compose(&fy, &fx)?;
    Ok(CommuteReport { commute: xy == yx, composite_is_sum: xy == fs })
}

#[derive(Clone, Debug, Default)]
pub struct NielsenPreservation {
    pub catalog_paths_checked: usize,
    pub catalog_failures: Vec<String>,
    pub qe_paths_checked: usize,
    pub qe_failures: Vec<String>,
}

impl NielsenPreservation {
    pub fn ok(&self) -> bool {
        self.catalog_failures.is_empty() && self.qe_failures.is_empty()
    }
}

/// Every catalog path is fixed by `f_a`; every QE path of the QE-splitting
/// of `f(E)`, `E ⊂ X_k`, and its neighbours in the same family satisfy
/// `(f_a)_#(σ) = f^{a_k}_#(σ)`.
pub fn verify_nielsen_preserved(a: &MapAnalysis, d: &Disintegration, tuple: &[i64]) -> Result<NielsenPreservation> {
    let g = a.map.graph();
    let fa = build_fa(a, d, tuple)?;
    let mut rep = NielsenPreservation::default();
    for e in &a.catalog.entries {
        rep.catalog_paths_checked += 1;
        if fa.apply(&e.path) != e.path {
            rep.catalog_failures.push(g.format_path(&e.path));
        }
    }
    for (k, edges) in d.partition.edges.iter().enumerate() {
        let mut seen = BTreeSet::new();
        for &e in edges {
            let terms = qe_split(a, &a.edge_splitting(e)?);
            for t in terms.iter().filter(|t| t.kind == TermKind::QuasiExceptional) {
                let fam = t.family.unwrap();
                let li = a.linear_edge(fam.initial).unwrap();
                for p in fam.power - 2..=fam.power + 2 {
                    let sigma = EdgePath::edge(g, fam.initial)
                        .concat(g, &li.axis.power(g, p))?
                        .concat(g, &EdgePath::edge(g, fam.terminal.inverse()))?;
                    if !seen.insert(sigma.edges.clone()) {
                        continue;
                    }
                    rep.qe_paths_checked += 1;
                    let lhs = fa.apply(&sigma);
                    let rhs = a.map.iterate(&sigma, tuple[k] as usize);
                    if lhs != rhs {
                        rep.qe_failures.push(g.format_path(&sigma));
                    }
                }
            }
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_of_single_relation() {
        let l = lattice_from_rows(&[vec![1, -1]], 2);
        assert_eq!(l.basis_i64(), vec![vec![1, 1]]);
        let l = lattice_from_rows(&[], 3);
        assert_eq!(l.basis_i64(), vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]);
        // 3p = 5n - 2m
        let l = lattice_from_rows(&[vec![2, -5, 3]], 3);
        assert_eq!(l.rank(), 2);
        for v in l.basis_i64() {
            assert_eq!(2 * v[0] - 5 * v[1] + 3 * v[2], 0);
        }
        assert!(l.contains(&[1, 1, 1]));
    }

    #[test]
    fn nearest_admissible_point() {
        let l = lattice_from_rows(&[vec![1, -1]], 2);
        assert_eq!(l.nearest_admissible(&[1, 2]), vec![1, 1]);
        assert_eq!(l.nearest_admissible(&[3, 4]), vec![3, 3]);
        let l = lattice_from_rows(&[vec![2, -5, 3]], 3);
        let b = l.nearest_admissible(&[5, 1, 0]);
        assert!(l.contains(&b) && b.iter().all(|&x| x >= 0));
        assert_eq!(l.nearest_admissible(&[2, 2, 2]), vec![2, 2, 2]);
    }

    #[test]
    fn hnf_is_canonical() {
        let a = hermite_normal_form(vec![
            vec![BigInt::from(2), BigInt::from(4)],
            vec![BigInt::from(1), BigInt::from(3)],
        ]);
        let b = hermite_normal_form(vec![
            vec![BigInt::from(3), BigInt::from(7)],
            vec![BigInt::from(1), BigInt::from(3)],
        ]);
        assert_eq!(a, b);
    }
}
