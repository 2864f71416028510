//! JSON map documents and DOT export.
//!
//! ```json
//! {
//!   "vertices": ["v"],
//!   "edges": [{"name": "A", "from": "v", "to": "v"}, {"name": "B", "from": "v", "to": "v"}],
//!   "images": {"A": "A", "B": "B A"},
//!   "filtration": [["A"], ["B"]],
//!   "nielsen_paths": ["A"],
//!   "options": {"nielsen_bound": 40}
//! }
//! ```
//!
//! Declared filtrations and Nielsen paths are checked, never trusted.

use serde::{Deserialize, Serialize};

use crate::analysis::{AnalysisOptions, MapAnalysis};
use crate::error::{Error, Result};
use crate::graph_map::{Filtration, GraphMap, StratumKind};
use crate::paths::{EdgePath, MarkedGraph};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeSpec {
    pub name: String,
    pub from: String,
    pub to: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DocumentOptions {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nielsen_bound: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split_depth: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub periodic_cap: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDocument {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub images: serde_json::Map<String, serde_json::Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub filtration: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nielsen_paths: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "is_default")]
    pub options: DocumentOptions,
}

fn is_default(o: &DocumentOptions) -> bool {
    *o == DocumentOptions::default()
}

fn invalid(location: impl Into<String>, message: impl ToString) -> Error {
    Error::Validation { location: location.into(), message: message.to_string() }
}

/// A validated document.
#[derive(Clone, Debug)]
pub struct LoadedMap {
    pub document: MapDocument,
    pub map: GraphMap,
    pub filtration: Option<Filtration>,
    pub nielsen_paths: Vec<EdgePath>,
}

impl LoadedMap {
    pub fn options(&self) -> AnalysisOptions {
        let d = AnalysisOptions::default();
        let o = &self.document.options;
        AnalysisOptions {
            nielsen_bound: o.nielsen_bound.or(d.nielsen_bound),
            split_depth: o.split_depth.unwrap_or(d.split_depth),
            periodic_cap: o.periodic_cap.unwrap_or(d.periodic_cap),
        }
    }

    /// Analysis with the declared filtration if any; declared Nielsen
    /// paths must be fixed and covered by the computed catalog.
    pub fn analyze(&self, options: AnalysisOptions) -> Result<MapAnalysis> {
        let a = match &self.filtration {
            Some(f) => MapAnalysis::with_filtration(self.map.clone(), f.clone(), options)?,
            None => MapAnalysis::new(self.map.clone(), options)?,
        };
        let g = a.map.graph();
        for (i, p) in self.nielsen_paths.iter().enumerate() {
            if a.map.apply(p) != *p {
                return Err(invalid(format!("nielsen_paths[{i}]"), format!("{} is not fixed", g.format_path(p))));
            }
            if crate::nielsen::split_nielsen_path(&a.map, &a.catalog, p).is_err() {
                return Err(invalid(
                    format!("nielsen_paths[{i}]"),
                    format!("{} does not split into catalogued Nielsen paths", g.format_path(p)),
                ));
            }
        }
        Ok(a)
    }
}

pub fn parse(text: &str) -> Result<LoadedMap> {
    let document: MapDocument = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    load(document)
}

pub fn load(document: MapDocument) -> Result<LoadedMap> {
    let edges: Vec<(&str, &str, &str)> =
        document.edges.iter().map(|e| (e.name.as_str(), e.from.as_str(), e.to.as_str())).collect();
    let vertices: Vec<&str> = document.vertices.iter().map(|v| v.as_str()).collect();
    let graph = MarkedGraph::new(&vertices, &edges).map_err(|e| invalid("edges", e))?;
    for key in document.images.keys() {
        if graph.find_edge(key).is_err() {
            return Err(invalid(format!("images.{key}"), "no edge of that name"));
        }
    }
    let mut images = Vec::new();
    for e in &document.edges {
        let loc = format!("images.{}", e.name);
        let text = match document.images.get(&e.name) {
            Some(serde_json::Value::String(s)) => s,
            Some(_) => return Err(invalid(loc, "expected an edge word")),
            None => return Err(invalid(loc, "missing image")),
        };
        images.push(graph.parse_path(text).map_err(|err| invalid(loc, err))?);
    }
    let map = GraphMap::new(graph, images).map_err(|e| invalid("images", e))?;
    let g = map.graph();
    let filtration = match &document.filtration {
        None => None,
        Some(strata) => {
            let mut out = Vec::new();
            for (i, s) in strata.iter().enumerate() {
                let ids = s
                    .iter()
                    .map(|n| g.find_edge(n).map_err(|e| invalid(format!("filtration[{i}]"), e)))
                    .collect::<Result<Vec<_>>>()?;
                out.push(ids);
            }
            let f = Filtration { strata: out };
            crate::graph_map::verify_filtration(&map, &f).map_err(|e| invalid("filtration", e))?;
            Some(f)
        }
    };
    let nielsen_paths = document
        .nielsen_paths
        .iter()
        .flatten()
        .enumerate()
        .map(|(i, t)| g.parse_path(t).map(|p| p.tighten()).map_err(|e| invalid(format!("nielsen_paths[{i}]"), e)))
        .collect::<Result<Vec<_>>>()?;
    Ok(LoadedMap { document, map, filtration, nielsen_paths })
}

/// Canonical document of a map: edges in order, images as tight words.
pub fn to_document(m: &GraphMap, filtration: Option<&Filtration>) -> MapDocument {
    let g = m.graph();
    MapDocument {
        vertices: g.vertex_names().to_vec(),
        edges: g
            .edges()
            .iter()
            .map(|e| EdgeSpec {
                name: e.name.clone(),
                from: g.vertex_name(e.from).to_string(),
                to: g.vertex_name(e.to).to_string(),
            })
            .collect(),
        images: g
            .edge_ids()
            .map(|e| (g.edge_name(e).to_string(), serde_json::Value::String(g.format_path(&m.edge_image(e)))))
            .collect(),
        filtration: filtration
            .map(|f| f.strata.iter().map(|s| s.iter().map(|&e| g.edge_name(e).to_string()).collect()).collect()),
        nielsen_paths: None,
        options: DocumentOptions::default(),
    }
}

pub fn to_json(doc: &MapDocument) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

fn color(kind: &StratumKind) -> &'static str {
    match kind {
        StratumKind::Fixed => "gray40",
        StratumKind::Zero => "gray75",
        StratumKind::Periodic => "purple",
        StratumKind::NegNonlinear { .. } => "darkgreen",
        StratumKind::NegLinear { .. } => "blue",
        StratumKind::Eg { .. } => "red",
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// The graph with edges colored by stratum kind and labeled by stratum.
pub fn to_dot(a: &MapAnalysis) -> String {
    let g = a.map.graph();
    let mut s = String::from("digraph map {\n");
    for v in g.vertex_names() {
        s.push_str(&format!("  {};\n", quote(v)));
    }
    for e in g.edge_ids() {
        let st = a.stratum_of(e);
        let edge = g.edge(e);
        s.push_str(&format!(
            "  {} -> {} [label={}, color={}];\n",
            quote(g.vertex_name(edge.from)),
            quote(g.vertex_name(edge.to)),
            quote(&format!("{} (H{} {})", edge.name, st.index + 1, st.label())),
            color(&st.kind)
        ));
    }
    s.push_str("}\n");
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;

    #[test]
    fn round_trip() {
        for (_, m) in samples::all() {
            let doc = to_document(&m, None);
            let text = to_json(&doc);
            let back = parse(&text).unwrap();
            assert_eq!(back.document, doc);
            assert_eq!(back.map, m);
            assert_eq!(to_json(&back.document), text);
        }
    }

    #[test]
    fn errors_are_located() {
        let bad_json = "{\n  \"vertices\": [\"v\"],\n  \"edges\": [,]\n}";
        assert!(matches!(parse(bad_json), Err(Error::Parse { line: 3, .. })));
        let unknown = r#"{"vertices":["v"],"edges":[{"name":"A","from":"v","to":"v"}],"images":{"A":"A Q"}}"#;
        match parse(unknown) {
            Err(Error::Validation { location, message }) => {
                assert_eq!(location, "images.A");
                assert!(message.contains('Q'));
            }
            other => panic!("{other:?}"),
        }
        let broken = r#"{"vertices":["v","w"],"edges":[{"name":"A","from":"v","to":"v"},{"name":"B","from":"v","to":"w"},{"name":"C","from":"w","to":"v"}],"images":{"A":"A","B":"B B","C":"C"}}"#;
        assert!(matches!(parse(broken), Err(Error::Validation { .. })));
    }

    #[test]
    fn declared_data_is_checked() {
        let doc = r#"{"vertices":["v"],"edges":[{"name":"A","from":"v","to":"v"},{"name":"B","from":"v","to":"v"}],
            "images":{"A":"A","B":"B A"},"filtration":[["B"],["A"]]}"#;
        assert!(matches!(parse(doc), Err(Error::Validation { .. })));
        let doc = r#"{"vertices":["v"],"edges":[{"name":"A","from":"v","to":"v"},{"name":"B","from":"v","to":"v"}],
            "images":{"A":"A","B":"B A"},"nielsen_paths":["B"]}"#;
        let l = parse(doc).unwrap();
        assert!(l.analyze(l.options()).is_err());
        let doc = doc.replace("[\"B\"]", "[\"B A B'\"]");
        let l = parse(&doc).unwrap();
        assert!(l.analyze(l.options()).is_ok());
    }

    #[test]
    fn dot_mentions_every_edge() {
        let a = MapAnalysis::new(samples::exceptional_rose(), AnalysisOptions::default()).unwrap();
        let dot = to_dot(&a);
        assert_eq!(dot.matches("->").count(), 4);
        assert!(dot.contains("linear"));
    }
}
