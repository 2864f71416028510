use disint_core::disintegration::{disintegrate, disintegration_map};
use disint_core::graph_map::StratumKind;
use disint_core::{samples, AnalysisOptions, GraphMap, MapAnalysis};

fn analyse(m: GraphMap) -> MapAnalysis {
    MapAnalysis::new(m, AnalysisOptions::default()).unwrap()
}

fn commutes(f: &GraphMap, g: &GraphMap) -> bool {
    GraphMap::compose(f, g).unwrap() == GraphMap::compose(g, f).unwrap()
}

#[test]
fn three_class_relation_matches_brute_force() {
    let a = analyse(samples::three_class_relation());
    let d = disintegrate(&a).unwrap();
    let g = a.map.graph();
    let names: Vec<Vec<&str>> = d.partition.edges.iter().map(|c| c.iter().map(|&e| g.edge_name(e)).collect()).collect();
    assert_eq!(names, vec![vec!["B", "C"], vec!["D"], vec!["E"]]);
    assert_eq!(d.relations.len(), 1);

    // A tuple is good when its naive map commutes with the map itself and
    // with the naive map of every other good-looking tuple in the box.
    let f = &a.map;
    let mut agree = 0;
    for x in 0..=6u64 {
        for y in 0..=6u64 {
            for z in 0..=6u64 {
                let t = [x, y, z];
                let h = disintegration_map(f, &d.partition.edges, &t).unwrap();
                let oracle = commutes(&h, f);
                let by_formula = 3 * z as i64 == 5 * y as i64 - 2 * x as i64;
                let ti: Vec<i64> = t.iter().map(|&v| v as i64).collect();
                assert_eq!(oracle, by_formula, "{t:?}");
                assert_eq!(d.lattice.contains(&ti), by_formula, "{t:?}");
                agree += 1;
            }
        }
    }
    assert_eq!(agree, 343);
    assert_eq!(d.lattice.rank(), 2);
}

#[test]
fn exceptional_rose_strata_and_catalog() {
    let a = analyse(samples::exceptional_rose());
    assert_eq!(a.strata[0].kind, StratumKind::Fixed);
    assert!(a.strata[1].is_linear() && a.strata[2].is_linear());
    let g = a.map.graph();
    let paths: Vec<String> = a.catalog.entries.iter().map(|e| g.format_path(&e.path)).collect();
    assert!(paths.iter().any(|p| p == "E2 E1 E2'"));
    assert!(paths.iter().any(|p| p == "E3 E1 E1 E1 E3'"));
    // exceptional, not Nielsen: the exponents differ
    assert!(!paths.iter().any(|p| p.starts_with("E3") && p.ends_with("E2'")));
    let d = disintegrate(&a).unwrap();
    assert_eq!(d.lattice.basis_i64(), vec![vec![1, 1]]);
}

#[test]
fn non_invariant_strata_merge() {
    let a = analyse(samples::non_invariant_strata());
    let d = disintegrate(&a).unwrap();
    assert_eq!(d.partition.len(), 1);
    assert!(d.relations.is_empty());
    assert_eq!(d.lattice.rank(), 1);
}

#[test]
fn partial_fps_triad_has_rank_three() {
    let a = analyse(samples::partial_fps_triad());
    let d = disintegrate(&a).unwrap();
    assert_eq!(d.partition.len(), 3);
    assert_eq!(d.lattice.rank(), 3);
    assert!(a.strata.iter().any(|s| s.is_eg()));
}
