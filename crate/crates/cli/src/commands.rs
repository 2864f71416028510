use serde_json::{json, Value};

use disint_core::coordinates::{coordinate_system, evaluate, expansion_consistency, predicted, rank_report, Coordinate};
use disint_core::ct_check::check_ct;
use disint_core::disintegration::{build_fa, disintegrate, verify_commute, Disintegration};
use disint_core::document::to_dot;
use disint_core::graph_map::StratumKind;
use disint_core::max_rank::{classify_max_rank, detect_fps, rank_audit, FpsKind, Mode, Outcome};
use disint_core::nielsen::{NielsenKind, SplitVerdict};
use disint_core::{EdgeId, Error, MapAnalysis, MarkedGraph};

pub enum Op {
    CheckCt,
    Nielsen,
    Strata,
    Disintegrate,
    Rank,
    Fa(Vec<i64>),
    VerifyCommute(Vec<i64>, Vec<i64>),
    Coords(Vec<i64>),
    Fps,
    Classify(Mode),
    Audit(Option<Vec<usize>>),
    ExportDot,
}

pub struct Report {
    pub text: String,
    pub json: Value,
    /// A verification did not pass.
    pub failed: bool,
}

#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
    suggestion: Option<Vec<i64>>,
}

impl Failure {
    pub fn input(message: String) -> Self {
        Failure { code: 1, message, suggestion: None }
    }

    pub fn code(&self) -> u8 {
        self.code
    }

    pub fn message(&self) -> String {
        match &self.suggestion {
            Some(t) => format!("{} (nearest admissible tuple: {})", self.message, tuple_text(t)),
            None => self.message.clone(),
        }
    }

    pub fn hint(&self) -> Option<Value> {
        self.suggestion.as_ref().map(|t| json!(t))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Parse { .. }
            | Error::Validation { .. }
            | Error::MalformedPath { .. }
            | Error::UnknownEdge(_)
            | Error::UnknownVertex(_)
            | Error::Domain(_)
            | Error::NotAdmissible(_) => 1,
            _ => 2,
        };
        Failure { code, message: e.to_string(), suggestion: None }
    }
}

fn tuple_text(t: &[i64]) -> String {
    format!("({})", t.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

fn edge_names(g: &MarkedGraph, edges: &[EdgeId]) -> Vec<String> {
    edges.iter().map(|&e| g.edge_name(e).to_string()).collect()
}

/// `f_a`, with a suggested replacement when `a` is not admissible.
fn fa_or_hint(a: &MapAnalysis, d: &Disintegration, t: &[i64]) -> Result<disint_core::GraphMap, Failure> {
    build_fa(a, d, t).map_err(|e| {
        let suggestion = matches!(e, Error::NotAdmissible(_)).then(|| d.lattice.nearest_admissible(t));
        Failure { suggestion, ..Failure::from(e) }
    })
}

pub fn run(op: &Op, a: &MapAnalysis) -> Result<Report, Failure> {
    let g = a.map.graph();
    let ok = |text: String, json: Value| Ok(Report { text, json, failed: false });
    match op {
        Op::Strata => {
            let mut text = String::new();
            let mut rows = Vec::new();
            for s in &a.strata {
                let edges = edge_names(g, &s.edges);
                let mut row = json!({ "stratum": s.index + 1, "kind": s.label(), "edges": edges });
                let detail = match &s.kind {
                    StratumKind::NegLinear { edge, axis, exponent, .. } => {
                        row["edge"] = json!(g.oriented_name(*edge));
                        row["axis"] = json!(g.format_path(axis));
                        row["exponent"] = json!(exponent);
                        format!("  {} -> {} ({})^{}", g.oriented_name(*edge), g.oriented_name(*edge), g.format_path(axis), exponent)
                    }
                    StratumKind::NegNonlinear { edge, suffix } => {
                        row["edge"] = json!(g.oriented_name(*edge));
                        match suffix {
                            Some(u) => {
                                row["suffix"] = json!(g.format_path(u));
                                format!("  {} -> {} {}", g.oriented_name(*edge), g.oriented_name(*edge), g.format_path(u))
                            }
                            None => String::new(),
                        }
                    }
                    StratumKind::Eg { pf } => {
                        row["pf"] = json!(pf.approx);
                        row["pf_interval"] = json!([pf.lower.to_string(), pf.upper.to_string()]);
                        format!("  PF eigenvalue {:.9}", pf.approx)
                    }
                    _ => String::new(),
                };
                text.push_str(&format!("H{:<3}{:<9}{}{}\n", s.index + 1, s.label(), edges.join(" "), detail));
                rows.push(row);
            }
            ok(text, json!({ "strata": rows }))
        }
        Op::Nielsen => {
            let cat = &a.catalog;
            let mut text = format!(
                "catalog: {} paths, length bound {}{}\n",
                cat.len(),
                cat.length_bound,
                if cat.complete { "" } else { " (some rays did not stabilise)" }
            );
            let mut entries = Vec::new();
            // linear families are listed once with their range of powers
            let mut family: Option<(disint_core::OrientedEdge, usize, i64, i64)> = None;
            let flush = |text: &mut String, family: &mut Option<(disint_core::OrientedEdge, usize, i64, i64)>| {
                if let Some((edge, height, lo, hi)) = family.take() {
                    let ax = a.linear_edge(edge).map(|l| g.format_path(&l.axis)).unwrap_or_default();
                    text.push_str(&format!(
                        "  {} ({})^p {}'  H{}  linear, p in {}..={}\n",
                        g.oriented_name(edge),
                        ax,
                        g.oriented_name(edge),
                        height + 1,
                        lo,
                        hi
                    ));
                }
            };
            for e in &cat.entries {
                let kind = match &e.kind {
                    NielsenKind::FixedEdge => "fixed edge".to_string(),
                    NielsenKind::Linear { edge, power } => format!("linear {} power {}", g.oriented_name(*edge), power),
                    NielsenKind::Eg => "EG".to_string(),
                };
                match (&e.kind, &mut family) {
                    (NielsenKind::Linear { edge, power }, Some((fe, _, lo, hi))) if fe == edge => {
                        *lo = (*lo).min(*power);
                        *hi = (*hi).max(*power);
                    }
                    (NielsenKind::Linear { edge, power }, _) => {
                        flush(&mut text, &mut family);
                        family = Some((*edge, e.height, *power, *power));
                    }
                    _ => {
                        flush(&mut text, &mut family);
                        text.push_str(&format!("  {}  H{}  {}\n", g.format_path(&e.path), e.height + 1, kind));
                    }
                }
                entries.push(json!({
                    "path": g.format_path(&e.path),
                    "height": e.height + 1,
                    "kind": kind,
                    "indivisible": e.indivisible,
                }));
            }
            flush(&mut text, &mut family);
            let closed: Vec<String> = cat.closed_words.iter().map(|w| g.format_path(w)).collect();
            if !closed.is_empty() {
                text.push_str(&format!("closed Nielsen words: {}\n", closed.join(", ")));
            }
            text.push_str("complete splittings:\n");
            let mut splittings = Vec::new();
            let mut failed = false;
            for e in g.edge_ids() {
                let name = g.edge_name(e);
                match a.edge_splitting(e) {
                    Ok(cs) => {
                        let verdict = match cs.verdict {
                            SplitVerdict::Certified => "certified".to_string(),
                            SplitVerdict::VerifiedToDepth(k) => format!("verified to depth {k}"),
                            SplitVerdict::Failed { juncture, iterate } => {
                                failed = true;
                                format!("FAILED at juncture {juncture}, iterate {iterate}")
                            }
                        };
                        text.push_str(&format!("  f({name}) = {}  {verdict}\n", cs.describe(g)));
                        let terms: Vec<String> = cs.terms.iter().map(|t| g.format_path(&t.path)).collect();
                        splittings.push(json!({ "edge": name, "terms": terms, "verdict": verdict }));
                    }
                    Err(err) => {
                        failed = true;
                        text.push_str(&format!("  f({name}): {err}\n"));
                        splittings.push(json!({ "edge": name, "error": err.to_string() }));
                    }
                }
            }
            Ok(Report {
                text,
                json: json!({
                    "length_bound": cat.length_bound,
                    "complete": cat.complete,
                    "paths": entries,
                    "closed_words": closed,
                    "splittings": splittings,
                }),
                failed,
            })
        }
        Op::CheckCt => {
            let r = check_ct(a);
            let clauses: Vec<Value> = r
                .clauses
                .iter()
                .map(|c| json!({ "clause": c.clause.tag(), "passed": c.passed, "failures": c.failures }))
                .collect();
            let principal: Vec<&str> = r.principal_vertices.iter().map(|&v| g.vertex_name(v)).collect();
            Ok(Report {
                text: r.describe(g),
                json: json!({ "clauses": clauses, "principal_vertices": principal, "caveats": r.caveats }),
                failed: !r.passed(),
            })
        }
        Op::Disintegrate => {
            let d = disintegrate(a).map_err(Failure::from)?;
            let mut text = String::new();
            let mut classes = Vec::new();
            for (i, (strata, edges)) in d.partition.classes.iter().zip(&d.partition.edges).enumerate() {
                let names = edge_names(g, edges);
                let hs: Vec<String> = strata.iter().map(|s| format!("H{}", s + 1)).collect();
                text.push_str(&format!("X{} = {{{}}}  ({})\n", i + 1, names.join(", "), hs.join(" ")));
                classes.push(json!({ "edges": names, "strata": strata.iter().map(|s| s + 1).collect::<Vec<_>>() }));
            }
            let mut relations = Vec::new();
            for r in &d.relations {
                let fam = &r.family;
                text.push_str(&format!(
                    "relation: {}  from {} ... {}'\n",
                    r.describe(),
                    g.oriented_name(fam.initial),
                    g.oriented_name(fam.terminal)
                ));
                relations.push(json!({ "relation": r.describe(), "coefficients": r.row(d.partition.len()) }));
            }
            let basis = d.lattice.basis_i64();
            let bt: Vec<String> = basis.iter().map(|b| tuple_text(b)).collect();
            text.push_str(&format!("lattice basis: {}\nrank: {}\n", bt.join(" "), d.lattice.rank()));
            ok(text, json!({ "classes": classes, "relations": relations, "basis": basis, "rank": d.lattice.rank() }))
        }
        Op::Rank => {
            let d = disintegrate(a).map_err(Failure::from)?;
            let r = rank_report(&d, &coordinate_system(a, &d));
            ok(
                format!("{}\n", r.summary()),
                json!({
                    "classes": r.classes,
                    "coordinates": r.coordinates,
                    "relations": r.relations,
                    "rank": r.rank,
                    "injective": r.injective,
                }),
            )
        }
        Op::Fa(t) => {
            let d = disintegrate(a).map_err(Failure::from)?;
            let fa = fa_or_hint(a, &d, t)?;
            let mut text = String::new();
            let mut images = serde_json::Map::new();
            for e in g.edge_ids() {
                let img = g.format_path(&fa.edge_image(e));
                text.push_str(&format!("{} -> {}\n", g.edge_name(e), img));
                images.insert(g.edge_name(e).to_string(), img.into());
            }
            ok(text, json!({ "tuple": t, "images": images }))
        }
        Op::VerifyCommute(x, y) => {
            let d = disintegrate(a).map_err(Failure::from)?;
            fa_or_hint(a, &d, x)?;
            fa_or_hint(a, &d, y)?;
            let r = verify_commute(a, &d, x, y).map_err(Failure::from)?;
            let yes = |b: bool| if b { "yes" } else { "NO" };
            let pass = r.commute && r.composite_is_sum;
            Ok(Report {
                text: format!(
                    "f_a f_b = f_b f_a: {}\nf_a f_b = f_(a+b): {}\n{}\n",
                    yes(r.commute),
                    yes(r.composite_is_sum),
                    if pass { "pass" } else { "FAIL" }
                ),
                json: json!({ "a": x, "b": y, "commute": r.commute, "composite_is_sum": r.composite_is_sum }),
                failed: !pass,
            })
        }
        Op::Coords(t) => {
            let d = disintegrate(a).map_err(Failure::from)?;
            fa_or_hint(a, &d, t)?;
            let cs = coordinate_system(a, &d);
            let got = evaluate(a, &d, &cs, t).map_err(Failure::from)?;
            let want = predicted(&cs, t);
            let mut text = String::new();
            let mut rows = Vec::new();
            let mut failed = got.exact() != want.exact();
            for (i, c) in cs.coords.iter().enumerate() {
                let (e, p) = (got.values[i].exact(), want.values[i].exact());
                match c {
                    Coordinate::Comparison { axis, edge, base, class } => {
                        text.push_str(&format!(
                            "c{} comparison {} axis {} base {} class X{}: {} (predicted {})\n",
                            i + 1,
                            g.oriented_name(*edge),
                            g.format_path(axis),
                            base,
                            class + 1,
                            e,
                            p
                        ));
                        rows.push(json!({
                            "kind": "comparison", "edge": g.oriented_name(*edge), "axis": g.format_path(axis),
                            "base": base, "class": class + 1, "value": e, "predicted": p,
                        }));
                    }
                    Coordinate::Expansion { stratum, pf, class, .. } => {
                        text.push_str(&format!(
                            "c{} expansion H{} PF {:.9} class X{}: {} log PF (predicted {})\n",
                            i + 1,
                            stratum + 1,
                            pf.approx,
                            class + 1,
                            e,
                            p
                        ));
                        rows.push(json!({
                            "kind": "expansion", "stratum": stratum + 1, "pf": pf.approx,
                            "class": class + 1, "value": e, "predicted": p,
                        }));
                    }
                }
            }
            let mut out = json!({ "tuple": t, "coordinates": rows });
            if cs.coords.iter().any(|c| matches!(c, Coordinate::Expansion { .. })) {
                let err = expansion_consistency(a, &d, &cs, t).map_err(Failure::from)?;
                text.push_str(&format!("PF eigenvalues of f_a agree to relative error {err:.2e}\n"));
                out["expansion_error"] = json!(err);
                failed |= err > 1e-6;
            }
            Ok(Report { text, json: out, failed })
        }
        Op::Fps => {
            let found = detect_fps(a);
            let mut text = String::new();
            let mut rows = Vec::new();
            for w in &found {
                let kind = match w.kind {
                    FpsKind::Partial => "partial",
                    FpsKind::Full => "full",
                };
                let linear: Vec<String> = w.linear.iter().map(|l| g.oriented_name(l.edge)).collect();
                let alphas: Vec<String> = w.linear.iter().map(|l| g.format_path(&l.alpha)).collect();
                let attaching: Vec<&str> = w.attaching.iter().map(|&v| g.vertex_name(v)).collect();
                text.push_str(&format!(
                    "{kind} FPS above G_{}: linear {} (axes {}), EG H{}, {:?}, attaching {}, chi drop {}\n",
                    w.lower.len(),
                    linear.join(" "),
                    alphas.join(", "),
                    w.eg_stratum + 1,
                    w.shape,
                    attaching.join(" "),
                    w.chi_drop
                ));
                rows.push(json!({
                    "kind": kind,
                    "below": w.lower.len(),
                    "linear": linear,
                    "axes": alphas,
                    "eg_stratum": w.eg_stratum + 1,
                    "shape": format!("{:?}", w.shape),
                    "attaching": attaching,
                    "chi_drop": w.chi_drop,
                }));
            }
            if found.is_empty() {
                text.push_str("no FPS block\n");
            }
            ok(text, json!({ "fps": rows }))
        }
        Op::Classify(mode) => {
            let c = classify_max_rank(a, *mode).map_err(Failure::from)?;
            let outcome = match &c.outcome {
                Outcome::Decomposed { .. } => "decomposed",
                Outcome::NotMaximal => "not maximal",
                Outcome::NotIa => "not IA",
                Outcome::NoDecomposition { .. } => "no decomposition",
                Outcome::Inconclusive { .. } => "inconclusive",
            };
            let mut out = json!({
                "mode": match mode { Mode::General => "general", Mode::Ia => "ia" },
                "free_rank": c.free_rank,
                "rank": c.rank,
                "target": c.target,
                "outcome": outcome,
            });
            if let Outcome::Decomposed { order, blocks, .. } = &c.outcome {
                out["order"] = json!(order.iter().map(|s| s + 1).collect::<Vec<_>>());
                out["blocks"] = json!(blocks
                    .iter()
                    .map(|b| b.strata().iter().map(|s| s + 1).collect::<Vec<_>>())
                    .collect::<Vec<_>>());
            }
            Ok(Report { text: c.describe(g), json: out, failed: !c.decomposed() })
        }
        Op::Audit(grouping) => {
            let r = rank_audit(a, grouping.as_deref()).map_err(Failure::from)?;
            let stages: Vec<Value> = r
                .stages
                .iter()
                .map(|s| {
                    json!({
                        "from": s.from,
                        "to": s.to,
                        "delta_rank": s.delta_rank,
                        "delta_chi": s.delta_chi,
                        "delta": s.delta,
                        "holds": s.holds,
                        "equality": s.equality,
                        "case": s.case.map(|c| c.letter().to_string()),
                    })
                })
                .collect();
            Ok(Report {
                text: r.describe(),
                json: json!({ "ranks": r.ranks, "grouping": r.grouping, "stages": stages }),
                failed: !r.ok(),
            })
        }
        Op::ExportDot => {
            let dot = to_dot(a);
            ok(dot.clone(), json!({ "dot": dot }))
        }
    }
}
