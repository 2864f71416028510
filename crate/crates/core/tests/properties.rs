use num_integer::Integer;
use proptest::prelude::*;

use disint_core::coordinates::{coordinate_system, evaluate, matrix_rank};
use disint_core::disintegration::{build_fa, disintegrate, lattice_from_rows, verify_commute};
use disint_core::document;
use disint_core::free_group::{
    abelianization, determinant, fold, is_homotopy_equivalence, is_surjective, pi1_images, pi1_images_with,
    SpanningTree, Word,
};
use disint_core::max_rank::gen_type_e;
use disint_core::paths::tighten_edges;
use disint_core::{samples, AnalysisOptions, Circuit, EdgeId, EdgePath, GraphMap, MapAnalysis, MarkedGraph, OrientedEdge, VertexId};

const RANK: usize = 3;

fn rose() -> MarkedGraph {
    MarkedGraph::new(&["v"], &[("A", "v", "v"), ("B", "v", "v"), ("C", "v", "v")]).unwrap()
}

fn oriented() -> impl Strategy<Value = OrientedEdge> {
    (0..RANK, any::<bool>()).prop_map(|(e, inv)| OrientedEdge::new(EdgeId(e), inv))
}

fn edge_word(max: usize) -> impl Strategy<Value = Vec<OrientedEdge>> {
    prop::collection::vec(oriented(), 0..max)
}

/// `E_i ↦ E_i E_j^±` or `E_i ↦ E_j^± E_i` for `i ≠ j`.
fn nielsen_move(g: &MarkedGraph, i: usize, j: usize, inv: bool, left: bool) -> GraphMap {
    let images = g
        .edge_ids()
        .map(|e| {
            let base = EdgePath::edge(g, OrientedEdge::forward(e));
            if e.0 != i {
                return base;
            }
            let other = EdgePath::edge(g, OrientedEdge::new(EdgeId(j), inv));
            if left { other.concat(g, &base).unwrap() } else { base.concat(g, &other).unwrap() }
        })
        .collect();
    GraphMap::new(g.clone(), images).unwrap()
}

/// Products of Nielsen moves on the rose: homotopy equivalences by construction.
fn automorphism() -> impl Strategy<Value = GraphMap> {
    prop::collection::vec((0..RANK, 1..RANK, any::<bool>(), any::<bool>()), 0..6).prop_map(|moves| {
        let g = rose();
        moves.into_iter().fold(GraphMap::identity(g.clone()), |acc, (i, shift, inv, left)| {
            let m = nielsen_move(&g, i, (i + shift) % RANK, inv, left);
            GraphMap::compose(&m, &acc).unwrap()
        })
    })
}

fn words() -> impl Strategy<Value = Vec<Word>> {
    prop::collection::vec(
        prop::collection::vec((1..=RANK as i32, any::<bool>()).prop_map(|(x, n)| if n { -x } else { x }), 1..6)
            .prop_map(Word::reduced),
        1..5,
    )
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    (0..a.len()).map(|i| (0..b[0].len()).map(|j| (0..b.len()).map(|k| a[i][k] * b[k][j]).sum()).collect()).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn tightening_is_idempotent(w in edge_word(40)) {
        let once = tighten_edges(&w);
        prop_assert_eq!(tighten_edges(&once), once.clone());
        prop_assert!(once.windows(2).all(|p| p[0] != p[1].inverse()));
    }

    #[test]
    fn circuits_ignore_rotation(w in edge_word(20), k in 0usize..20) {
        let t = tighten_edges(&w);
        prop_assume!(!t.is_empty());
        let mut r = t.clone();
        r.rotate_left(k % t.len());
        prop_assert_eq!(Circuit::from_cyclic_word(&r), Circuit::from_cyclic_word(&t));
    }

    #[test]
    fn applying_a_map_respects_concatenation(m in automorphism(), p in edge_word(12), q in edge_word(12)) {
        let pq: Vec<OrientedEdge> = p.iter().chain(&q).copied().collect();
        let whole = m.apply_edges(&tighten_edges(&pq));
        let mut parts = m.apply_edges(&tighten_edges(&p));
        parts.extend(m.apply_edges(&tighten_edges(&q)));
        prop_assert_eq!(whole, tighten_edges(&parts));
    }

    #[test]
    fn composition_is_application(f in automorphism(), h in automorphism(), p in edge_word(12)) {
        let p = tighten_edges(&p);
        let fh = GraphMap::compose(&f, &h).unwrap();
        prop_assert_eq!(fh.apply_edges(&p), f.apply_edges(&h.apply_edges(&p)));
    }

    #[test]
    fn abelianization_is_multiplicative(f in automorphism(), h in automorphism()) {
        let fh = GraphMap::compose(&f, &h).unwrap();
        let af = abelianization(&pi1_images(&f), RANK);
        let ah = abelianization(&pi1_images(&h), RANK);
        prop_assert_eq!(abelianization(&pi1_images(&fh), RANK), mat_mul(&af, &ah));
        let det = determinant(&af);
        prop_assert!(det == 1.into() || det == (-1).into());
        prop_assert!(is_homotopy_equivalence(&f));
    }

    #[test]
    fn folding_is_confluent(ws in words(), seed in any::<u64>()) {
        let a = fold(&ws, None);
        let n: usize = ws.iter().map(|w| w.len()).sum();
        let mut order: Vec<usize> = (0..n).collect();
        let mut s = seed;
        for i in (1..n).rev() {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (s >> 33) as usize % (i + 1));
        }
        let b = fold(&ws, Some(&order));
        prop_assert_eq!(a.vertex_count, b.vertex_count);
        prop_assert_eq!(a.edges.len(), b.edges.len());
        let mut la: Vec<i32> = a.edges.iter().map(|e| e.1).collect();
        let mut lb: Vec<i32> = b.edges.iter().map(|e| e.1).collect();
        la.sort();
        lb.sort();
        prop_assert_eq!(la, lb);
    }

    #[test]
    fn generation_ignores_the_spanning_tree(k in 0usize..4) {
        let m = gen_type_e(4).unwrap().generic;
        let g = m.graph();
        let root = VertexId(k % g.vertex_count());
        let t0 = SpanningTree::bfs(g, VertexId(0));
        let t1 = SpanningTree::bfs(g, root);
        let n = t0.rank();
        let (w0, w1) = (pi1_images_with(&m, &t0), pi1_images_with(&m, &t1));
        prop_assert_eq!(is_surjective(&w0, n), is_surjective(&w1, n));
        prop_assert!(is_surjective(&w1, n));
        prop_assert_eq!(determinant(&abelianization(&w0, n)).magnitude().clone(),
                        determinant(&abelianization(&w1, n)).magnitude().clone());
    }

    #[test]
    fn kernel_lattice_is_saturated(
        rows in prop::collection::vec(prop::collection::vec(-5i64..=5, 4), 0..3),
        coeffs in prop::collection::vec(-3i64..=3, 4),
    ) {
        let m = 4;
        let l = lattice_from_rows(&rows, m);
        let rel_rank = if rows.is_empty() { 0 } else { matrix_rank(&rows) };
        prop_assert_eq!(l.rank(), m - rel_rank);
        let basis = l.basis_i64();
        for b in &basis {
            let content = b.iter().fold(0i64, |g, x| g.gcd(x));
            prop_assert_eq!(content, 1);
            for r in &rows {
                prop_assert_eq!(r.iter().zip(b).map(|(x, y)| x * y).sum::<i64>(), 0);
            }
        }
        let mut v = vec![0i64; m];
        for (c, b) in coeffs.iter().zip(&basis) {
            for (x, y) in v.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        prop_assert!(l.contains(&v));
        let near = l.nearest_admissible(&v.iter().map(|x| x.abs()).collect::<Vec<_>>());
        prop_assert!(l.contains(&near) && near.iter().all(|&x| x >= 0));
    }

    #[test]
    fn documents_round_trip(m in automorphism()) {
        let text = document::to_json(&document::to_document(&m, None));
        let back = document::parse(&text).unwrap();
        prop_assert_eq!(back.map, m);
    }
}

fn lattice_point(basis: &[Vec<i64>], coeffs: &[i64]) -> Vec<i64> {
    let mut t = vec![0i64; basis.first().map_or(0, |b| b.len())];
    for (c, b) in coeffs.iter().zip(basis) {
        for (x, y) in t.iter_mut().zip(b) {
            *x += c * y;
        }
    }
    t
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn disintegration_maps_commute(which in 0usize..3, c1 in prop::collection::vec(0i64..4, 3), c2 in prop::collection::vec(0i64..4, 3)) {
        let m = [samples::exceptional_rose(), samples::three_class_relation(), gen_type_e(3).unwrap().generic][which].clone();
        let a = MapAnalysis::new(m, AnalysisOptions::default()).unwrap();
        let d = disintegrate(&a).unwrap();
        let basis = d.lattice.basis_i64();
        let (x, y) = (lattice_point(&basis, &c1), lattice_point(&basis, &c2));
        prop_assume!(x.iter().chain(&y).all(|&v| (0..=8).contains(&v)));
        let r = verify_commute(&a, &d, &x, &y).unwrap();
        prop_assert!(r.commute && r.composite_is_sum);
        // edges of X_s move by the a_s-th iterate
        let fx = build_fa(&a, &d, &x).unwrap();
        let g = a.map.graph();
        for (s, edges) in d.partition.edges.iter().enumerate() {
            for &e in edges {
                let p = EdgePath::edge(g, OrientedEdge::forward(e));
                prop_assert_eq!(fx.apply(&p), a.map.iterate(&p, x[s] as usize));
            }
        }
        let cs = coordinate_system(&a, &d);
        let sum: Vec<i64> = x.iter().zip(&y).map(|(p, q)| p + q).collect();
        let ex = evaluate(&a, &d, &cs, &x).unwrap().exact();
        let ey = evaluate(&a, &d, &cs, &y).unwrap().exact();
        let es = evaluate(&a, &d, &cs, &sum).unwrap().exact();
        prop_assert_eq!(es, ex.iter().zip(&ey).map(|(p, q)| p + q).collect::<Vec<_>>());
    }
}

#[test]
fn all_ones_tuple_gives_back_the_map() {
    let mut maps: Vec<GraphMap> = samples::all().into_iter().map(|(_, m)| m).collect();
    maps.push(gen_type_e(4).unwrap().generic);
    for m in maps {
        let a = MapAnalysis::new(m.clone(), AnalysisOptions::default()).unwrap();
        let d = disintegrate(&a).unwrap();
        let ones = vec![1; d.partition.len()];
        assert!(d.lattice.contains(&ones));
        assert_eq!(build_fa(&a, &d, &ones).unwrap(), m);
    }
}
