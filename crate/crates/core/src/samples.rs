//! Small maps with known behaviour, used by tests, the CLI and the docs.

use crate::graph_map::GraphMap;
use crate::paths::MarkedGraph;

fn rose(names: &[&str]) -> MarkedGraph {
    let edges: Vec<(&str, &str, &str)> = names.iter().map(|n| (*n, "v", "v")).collect();
    MarkedGraph::new(&["v"], &edges).expect("rose")
}

fn rose_map(names: &[&str], images: &[&str]) -> GraphMap {
    GraphMap::from_image_strings(rose(names), images).expect("valid sample")
}

/// `A ↦ A`, `B ↦ BA`, `C ↦ CB`: the strata `{B}` and `{C}` are not
/// separately invariant, so they form a single class.
pub fn non_invariant_strata() -> GraphMap {
    rose_map(&["A", "B", "C"], &["A", "B A", "C B"])
}

/// Three classes `{B, C}`, `{D}`, `{E}` tied by the relation
/// `3p = 5n - 2m` coming from the exceptional path `D B̄` in `f(E)`.
pub fn three_class_relation() -> GraphMap {
    rose_map(
        &["A", "B", "C", "D", "E"],
        &["A", "B A A", "C B", "D A A A A A", "E D B'"],
    )
}

/// `E1` fixed, two linear edges on the axis `E1` and a top edge whose image
/// contains the exceptional path `E3 Ē2`.
pub fn exceptional_rose() -> GraphMap {
    rose_map(&["E1", "E2", "E3", "E4"], &["E1", "E2 E1 E1", "E3 E1", "E4 E3 E3 E2'"])
}

/// Two maps differing by conjugation by `E1`; the first is
/// `i_{E1} ∘ second`.
pub fn inner_twist_pair() -> (GraphMap, GraphMap) {
    let names = ["E1", "E2", "E3"];
    (
        rose_map(&names, &["E1", "E1 E2", "E1 E1 E3 E1"]),
        rose_map(&names, &["E1", "E2 E1", "E1 E3 E1 E1"]),
    )
}

/// The target of the comparison between the two maps of
/// [`inner_twist_pair`]: `E2 ↦ E2 E1`, other edges fixed.
pub fn single_twist() -> GraphMap {
    rose_map(&["E1", "E2", "E3"], &["E1", "E2 E1", "E3"])
}

/// A rank-three example: fixed loop `E1`, linear edges `E2`, `E3` with
/// exponents 1 and 2, and an EG triad `F1, F2, F3` attached at the
/// initial vertices of the linear edges. The top three strata form a
/// partial FPS subgraph.
pub fn partial_fps_triad() -> GraphMap {
    let g = MarkedGraph::new(
        &["v1", "v2", "v3", "v4"],
        &[
            ("E1", "v1", "v1"),
            ("E2", "v2", "v1"),
            ("E3", "v3", "v1"),
            ("F1", "v4", "v1"),
            ("F2", "v4", "v2"),
            ("F3", "v4", "v3"),
        ],
    )
    .expect("graph");
    GraphMap::from_image_strings(
        g,
        &[
            "E1",
            "E2 E1",
            "E3 E1 E1",
            "F3 E3 E1 E3' F3' F2 E2 E1 E2' F2' F3 E3 E1' E3' F3' F1",
            "F3 E3 E1 E3' F3' F2",
            "F1 E1 F1' F3",
        ],
    )
    .expect("valid sample")
}

/// Fixed loops `E1`, `E2`; linear edges `E3`, `E4`, `E5` on the axes `E1`,
/// `E2`, `E1 E2`; an EG triad `F1, F2, F3` attached at their initial
/// vertices. The top four strata form a full FPS subgraph.
pub fn full_fps_triad() -> GraphMap {
    let g = MarkedGraph::new(
        &["v1", "v2", "v3", "v4", "v5"],
        &[
            ("E1", "v1", "v1"),
            ("E2", "v1", "v1"),
            ("E3", "v2", "v1"),
            ("E4", "v3", "v1"),
            ("E5", "v4", "v1"),
            ("F1", "v5", "v2"),
            ("F2", "v5", "v3"),
            ("F3", "v5", "v4"),
        ],
    )
    .expect("graph");
    GraphMap::from_image_strings(
        g,
        &[
            "E1",
            "E2",
            "E3 E1",
            "E4 E2",
            "E5 E1 E2",
            "F3 E5 E1 E2 E5' F3' F2 E4 E2 E4' F2' F3 E5 E2' E1' E5' F3' F1",
            "F3 E5 E1 E2 E5' F3' F2",
            "F1 E3 E1 E3' F1' F3",
        ],
    )
    .expect("valid sample")
}

/// `A ↦ B³A`, `B ↦ C³B`, `C ↦ (B³A)³C`: the directions `B` and `C` have
/// period two, so the map is not forward rotationless.
pub fn period_two_rose() -> GraphMap {
    rose_map(
        &["A", "B", "C"],
        &["B B B A", "C C C B", "B B B A B B B A B B B A C"],
    )
}

/// All named samples.
pub fn all() -> Vec<(&'static str, GraphMap)> {
    let (f1, f2) = inner_twist_pair();
    vec![
        ("non-invariant-strata", non_invariant_strata()),
        ("three-class-relation", three_class_relation()),
        ("exceptional-rose", exceptional_rose()),
        ("inner-twist-left", f1),
        ("inner-twist-right", f2),
        ("partial-fps-triad", partial_fps_triad()),
        ("full-fps-triad", full_fps_triad()),
        ("period-two-rose", period_two_rose()),
    ]
}
