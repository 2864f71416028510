//! One PASS/FAIL line per acceptance criterion, with timings.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use disint_core::coordinates::{coordinate_system, evaluate, predicted};
use disint_core::ct_check::{check_ct, check_forward_rotationless};
use disint_core::disintegration::{
    build_fa, disintegrate, disintegration_map, verify_commute, verify_homotopy_equivalence, verify_nielsen_preserved,
    Disintegration,
};
use disint_core::free_group::{abelianization, determinant, is_ia, pi1_images, same_outer_class, Word};
use disint_core::max_rank::{detect_fps, gen_type_c, gen_type_e, rank_audit, AuditCase, FpsKind};
use disint_core::{samples, AnalysisOptions, EdgeId, GraphMap, MapAnalysis};

type Check = std::result::Result<String, String>;

fn analyse(m: GraphMap) -> (MapAnalysis, Disintegration) {
    let a = MapAnalysis::new(m, AnalysisOptions::default()).expect("analysis");
    let d = disintegrate(&a).expect("disintegration");
    (a, d)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond { Ok(()) } else { Err(msg()) }
}

fn within(t: Duration, limit: Duration) -> std::result::Result<(), String> {
    ensure(t < limit, || format!("took {t:?}, limit {limit:?}"))
}

fn edge(m: &GraphMap, name: &str) -> EdgeId {
    m.graph().find_edge(name).unwrap()
}

fn commutator() -> Word {
    Word::parse("x1 x2 x1' x2'").unwrap()
}

/// Nonnegative lattice points with entries at most `cap`, drawn as small
/// integer combinations of the basis.
fn sample_tuples(d: &Disintegration, rng: &mut ChaCha8Rng, count: usize, cap: i64) -> Vec<Vec<i64>> {
    let basis = d.lattice.basis_i64();
    let m = d.partition.len();
    let mut out = Vec::new();
    let mut tries = 0;
    while out.len() < count && tries < 100_000 {
        tries += 1;
        let mut t = vec![0i64; m];
        for b in &basis {
            let c: i64 = rng.random_range(-2..=cap);
            for (x, y) in t.iter_mut().zip(b) {
                *x += c * y;
            }
        }
        if t.iter().all(|&x| (0..=cap).contains(&x)) {
            out.push(t);
        }
    }
    out
}

/// The example maps shared by several criteria.
fn example_maps() -> Vec<(String, GraphMap)> {
    let mut v = vec![
        ("non-invariant-strata".to_string(), samples::non_invariant_strata()),
        ("exceptional-rose".into(), samples::exceptional_rose()),
        ("three-class-relation".into(), samples::three_class_relation()),
        ("partial-fps-triad".into(), samples::partial_fps_triad()),
        ("full-fps-triad".into(), samples::full_fps_triad()),
    ];
    let (f1, f2) = samples::inner_twist_pair();
    v.push(("inner-twist-left".into(), f1));
    v.push(("inner-twist-right".into(), f2));
    for n in [3, 4] {
        v.push((format!("type-e-{n}"), gen_type_e(n).unwrap().generic));
    }
    v.push(("type-c-4".into(), gen_type_c(4, &commutator()).unwrap().generic));
    v
}

fn criterion_1() -> Check {
    let t0 = Instant::now();
    let m = samples::non_invariant_strata();
    let (a, d) = analyse(m.clone());
    let (b, c) = (edge(&m, "B"), edge(&m, "C"));
    ensure(d.partition.edges == vec![vec![b, c]], || format!("partition {:?}", d.partition.edges))?;
    for k in 0..=6 {
        let fk = build_fa(&a, &d, &[k]).map_err(|e| e.to_string())?;
        let lhs = GraphMap::compose(&m, &fk).unwrap();
        let rhs = GraphMap::compose(&fk, &m).unwrap();
        ensure(lhs == rhs, || format!("f_({k}) does not commute with f"))?;
    }
    // the per-stratum split {B}, {C}
    let mut agree = 0;
    for i in 0..=5u64 {
        for j in 0..=5u64 {
            let fij = disintegration_map(&m, &[vec![b], vec![c]], &[i, j]).unwrap();
            let lhs = GraphMap::compose(&m, &fij).unwrap().edge_image(c);
            let rhs = GraphMap::compose(&fij, &m).unwrap().edge_image(c);
            ensure((lhs == rhs) == (i == j), || format!("split ({i},{j}): commutes on C = {}", lhs == rhs))?;
            agree += 1;
        }
    }
    let t = t0.elapsed();
    within(t, Duration::from_millis(100))?;
    Ok(format!("X1 = {{B, C}}; naive split commutes on C iff m = n ({agree} pairs)"))
}

fn criterion_2() -> Check {
    let t0 = Instant::now();
    let m = samples::exceptional_rose();
    let (a, d) = analyse(m.clone());
    ensure(d.partition.len() == 2 && d.relations.len() == 1, || "expected M=2 with one relation".into())?;
    // a_2 = 2a_2 - a_1, i.e. a_1 - a_2 = 0
    let row = d.relations[0].row(2);
    ensure(row[0] * -1 == row[1] && row[0] != 0, || format!("relation row {row:?}"))?;
    for x in 0..=6i64 {
        for y in 0..=6i64 {
            ensure(d.lattice.contains(&[x, y]) == (y == 2 * y - x), || format!("({x},{y}) misjudged"))?;
        }
    }
    ensure(d.lattice.rank() == 1 && d.lattice.basis_i64() == vec![vec![1, 1]], || {
        format!("basis {:?}", d.lattice.basis_i64())
    })?;
    for k in 1..=5i64 {
        let fk = build_fa(&a, &d, &[k, k]).map_err(|e| e.to_string())?;
        ensure(fk == m.power(k as usize).unwrap(), || format!("f_({k},{k}) differs from f^{k}"))?;
    }
    let t = t0.elapsed();
    within(t, Duration::from_millis(100))?;
    Ok(format!("relation {}, basis (1,1), f_(k,k) = f^k for k <= 5", d.relations[0].describe()))
}

fn criterion_3() -> Check {
    let t0 = Instant::now();
    let (f1, f2) = samples::inner_twist_pair();
    let target = samples::single_twist();
    let c = same_outer_class(&f1, &f2).ok_or("f1 and f2 are not related by an inner automorphism")?;
    let (a1, d1) = analyse(f1);
    let (a2, d2) = analyse(f2);
    let hits = |a: &MapAnalysis, d: &Disintegration| -> Vec<Vec<i64>> {
        let mut found = Vec::new();
        for x in 0..=6 {
            for y in 0..=6 {
                if let Ok(fa) = build_fa(a, d, &[x, y]) {
                    if fa == target {
                        found.push(vec![x, y]);
                    }
                }
            }
        }
        found
    };
    let h1 = hits(&a1, &d1);
    let h2 = hits(&a2, &d2);
    ensure(h1.is_empty(), || format!("f1 reaches the twist at {h1:?}"))?;
    ensure(!h2.is_empty(), || "f2 never reaches the twist".into())?;
    let t = t0.elapsed();
    within(t, Duration::from_millis(100))?;
    Ok(format!("conjugator {}; twist = f_a for f2 at {:?}, for no a of f1", c.format(), h2[0]))
}

fn criterion_4() -> Check {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let maps: Vec<(&str, GraphMap, i64)> = vec![
        ("non-invariant-strata", samples::non_invariant_strata(), 4),
        ("exceptional-rose", samples::exceptional_rose(), 4),
        ("partial-fps-triad", samples::partial_fps_triad(), 2),
        ("type-e-3", gen_type_e(3).unwrap().generic, 4),
        ("type-e-4", gen_type_e(4).unwrap().generic, 4),
        ("type-c-4", gen_type_c(4, &commutator()).unwrap().generic, 3),
    ];
    let mut pairs = 0;
    for (name, m, cap) in maps {
        let (a, d) = analyse(m);
        let pts = sample_tuples(&d, &mut rng, 80, cap);
        ensure(pts.len() >= 10, || format!("{name}: too few lattice points sampled"))?;
        for _ in 0..40 {
            let x = &pts[rng.random_range(0..pts.len())];
            let y = &pts[rng.random_range(0..pts.len())];
            let r = verify_commute(&a, &d, x, y).map_err(|e| format!("{name}: {e}"))?;
            ensure(r.commute && r.composite_is_sum, || format!("{name}: {x:?}, {y:?}: {r:?}"))?;
            pairs += 1;
        }
    }
    let t = t0.elapsed();
    within(t, Duration::from_secs(30))?;
    Ok(format!("{pairs} random pairs, no failures"))
}

fn criterion_5() -> Check {
    let t0 = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (mut paths, mut qe) = (0, 0);
    for (name, m) in example_maps() {
        let (a, d) = analyse(m);
        let cap = if a.strata.iter().any(|s| s.is_eg()) { 2 } else { 4 };
        for t in sample_tuples(&d, &mut rng, 6, cap) {
            let r = verify_nielsen_preserved(&a, &d, &t).map_err(|e| format!("{name}: {e}"))?;
            ensure(r.ok(), || format!("{name} at {t:?}: {:?} {:?}", r.catalog_failures, r.qe_failures))?;
            paths += r.catalog_paths_checked;
            qe += r.qe_paths_checked;
        }
    }
    let t = t0.elapsed();
    within(t, Duration::from_secs(10))?;
    Ok(format!("{paths} catalog paths and {qe} QE paths preserved"))
}

fn criterion_6() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut checked = 0;
    for m in [samples::exceptional_rose(), gen_type_e(3).unwrap().generic] {
        let (a, d) = analyse(m);
        let cs = coordinate_system(&a, &d);
        let pts = sample_tuples(&d, &mut rng, 50, 6);
        ensure(pts.len() == 50, || format!("sampled {} lattice points", pts.len()))?;
        for (i, x) in pts.iter().enumerate() {
            let ex = evaluate(&a, &d, &cs, x).map_err(|e| e.to_string())?.exact();
            ensure(ex == predicted(&cs, x).exact(), || format!("{x:?}: {ex:?}"))?;
            let y = &pts[(i + 1) % pts.len()];
            let sum: Vec<i64> = x.iter().zip(y).map(|(p, q)| p + q).collect();
            let es = evaluate(&a, &d, &cs, &sum).map_err(|e| e.to_string())?.exact();
            let ey = evaluate(&a, &d, &cs, y).map_err(|e| e.to_string())?.exact();
            let add: Vec<i64> = ex.iter().zip(&ey).map(|(p, q)| p + q).collect();
            ensure(es == add, || format!("not additive at {x:?} + {y:?}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} lattice points: value = a_s x base, additive"))
}

fn criterion_7() -> Check {
    let t0 = Instant::now();
    let mut found = Vec::new();
    for n in 3..=5 {
        let (_, d) = analyse(gen_type_e(n).unwrap().generic);
        ensure(d.lattice.rank() == 2 * n - 3, || format!("type E n={n}: rank {}", d.lattice.rank()))?;
        found.push(format!("E{n}:{}", d.lattice.rank()));
    }
    for n in 4..=5 {
        let fam = gen_type_c(n, &commutator()).unwrap();
        let (_, d) = analyse(fam.generic.clone());
        ensure(d.lattice.rank() == 2 * n - 4, || format!("type C n={n}: rank {}", d.lattice.rank()))?;
        let ia = std::iter::once(&fam.generic)
            .chain(&fam.generators)
            .all(|g| is_ia(&pi1_images(g), n));
        ensure(ia, || format!("type C n={n} is not IA"))?;
        found.push(format!("C{n}:{} IA", d.lattice.rank()));
    }
    let (_, d) = analyse(samples::partial_fps_triad());
    ensure(d.lattice.rank() == 3, || format!("rank three example has rank {}", d.lattice.rank()))?;
    found.push("triad:3".into());
    let t = t0.elapsed();
    within(t, Duration::from_secs(5))?;
    Ok(found.join(" "))
}

fn criterion_8() -> Check {
    let mut stages = 0;
    let mut cases = std::collections::BTreeSet::new();
    for (name, m) in example_maps() {
        let (a, _) = analyse(m);
        let r = rank_audit(&a, None).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.ok(), || format!("{name}:\n{}", r.describe()))?;
        stages += r.stages.len();
        cases.extend(r.stages.iter().filter_map(|s| s.case.map(|c| c.letter())));
    }
    let (a, _) = analyse(samples::partial_fps_triad());
    let r = rank_audit(&a, None).unwrap();
    let top = r.stages.last().unwrap();
    ensure(top.equality && top.case == Some(AuditCase::PartialFps), || format!("top block {top:?}"))?;
    let (a, _) = analyse(samples::full_fps_triad());
    let full = detect_fps(&a).into_iter().find(|w| w.kind == FpsKind::Full).ok_or("no full FPS found")?;
    ensure(full.chi_drop == 2, || format!("chi drop {}", full.chi_drop))?;
    let r = rank_audit(&a, None).unwrap();
    ensure(r.stages.iter().any(|s| s.case == Some(AuditCase::FullFps)), || r.describe())?;
    let letters: String = cases.into_iter().collect();
    Ok(format!("{stages} stages hold; equality cases seen: {letters}; full FPS chi drop 2"))
}

fn criterion_9() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    for (name, m) in example_maps() {
        let n = 1 - m.graph().euler_characteristic();
        let (a, d) = analyse(m);
        let cap = if a.strata.iter().any(|s| s.is_eg()) { 2 } else { 4 };
        for t in sample_tuples(&d, &mut rng, 8, cap) {
            let fa = build_fa(&a, &d, &t).map_err(|e| e.to_string())?;
            ensure(verify_homotopy_equivalence(&fa), || format!("{name}: f_{t:?} is not a homotopy equivalence"))?;
            let det = determinant(&abelianization(&pi1_images(&fa), n as usize));
            ensure(det == 1.into() || det == (-1).into(), || format!("{name}: f_{t:?} has det {det}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} maps f_a: surjective on pi_1, det = +-1"))
}

fn criterion_10() -> Check {
    let mut passed = Vec::new();
    for (name, m) in [
        ("exceptional-rose", samples::exceptional_rose()),
        ("type-e-3", gen_type_e(3).unwrap().generic),
        ("type-c-4", gen_type_c(4, &commutator()).unwrap().generic),
    ] {
        let (a, _) = analyse(m);
        let r = check_ct(&a);
        ensure(r.passed(), || format!("{name}:\n{}", r.describe(a.map.graph())))?;
        passed.push(name);
    }
    let (a, _) = analyse(samples::period_two_rose());
    let r = check_forward_rotationless(&a);
    ensure(!r.forward_rotationless, || "period-two rose reported rotationless".into())?;
    let g = a.map.graph();
    let mut rot: Vec<String> = r
        .rotating_directions
        .iter()
        .filter(|(_, p)| *p == 2)
        .map(|(d, _)| g.oriented_name(*d))
        .collect();
    rot.sort();
    ensure(rot == ["B", "C"], || format!("period-two directions {rot:?}"))?;
    ensure(a.directions.apply(a.directions.apply(rot_dir(&a, "B"))) == rot_dir(&a, "B"), || {
        "B is not of period two".into()
    })?;
    Ok(format!("{} pass; directions B, C interchanged", passed.join(", ")))
}

fn rot_dir(a: &MapAnalysis, name: &str) -> disint_core::OrientedEdge {
    a.map.graph().parse_oriented(name).unwrap()
}

fn main() {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("non-invariant strata end to end", criterion_1),
        ("exceptional rose relation and lattice", criterion_2),
        ("disintegration depends on the representative", criterion_3),
        ("commutation of random admissible pairs", criterion_4),
        ("Nielsen paths preserved by f_a", criterion_5),
        ("coordinates are linear", criterion_6),
        ("rank census", criterion_7),
        ("rank audit", criterion_8),
        ("f_a are homotopy equivalences", criterion_9),
        ("normal form regression", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let t0 = Instant::now();
        let r = std::panic::catch_unwind(f).unwrap_or_else(|_| Err("panicked".into()));
        let t = t0.elapsed();
        match r {
            Ok(msg) => println!("PASS {:>2} {name}: {msg} [{t:.2?}]", i + 1),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {msg} [{t:.2?}]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
