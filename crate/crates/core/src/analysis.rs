use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::graph_map::{
    axes, classify_strata, compute_filtration, verify_filtration, Axis, DirectionMap, Filtration, GraphMap,
    LinearEdge, Stratum, StratumKind,
};
use crate::nielsen::{build_catalog_with, complete_split, default_length_bound, CompleteSplitting, NielsenCatalog};
use crate::paths::{EdgeId, OrientedEdge};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Nielsen search bound; `None` picks `4 · |edges| · max image length`.
    pub nielsen_bound: Option<usize>,
    /// Iterates used when a splitting has an illegal juncture.
    pub split_depth: usize,
    /// Largest period examined for periodic Nielsen paths.
    pub periodic_cap: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { nielsen_bound: None, split_depth: 4, periodic_cap: 3 }
    }
}

/// A map with its filtration, strata, Nielsen catalog, axes and directions.
#[derive(Debug)]
pub struct MapAnalysis {
    pub map: GraphMap,
    pub filtration: Filtration,
    pub strata: Vec<Stratum>,
    /// 0-based stratum index of each edge.
    pub level: Vec<usize>,
    pub catalog: NielsenCatalog,
    pub axes: Vec<Axis>,
    pub directions: DirectionMap,
    pub options: AnalysisOptions,
    splittings: OnceLock<Vec<Result<CompleteSplitting>>>,
}

impl MapAnalysis {
    pub fn new(map: GraphMap, options: AnalysisOptions) -> Result<Self> {
        let f = compute_filtration(&map);
        Self::with_filtration(map, f, options)
    }

    /// Uses a given filtration after checking that it is invariant.
    pub fn with_filtration(map: GraphMap, filtration: Filtration, options: AnalysisOptions) -> Result<Self> {
        verify_filtration(&map, &filtration)?;
        let strata = classify_strata(&map, &filtration, None)?;
        let bound = options.nielsen_bound.unwrap_or_else(|| default_length_bound(&map));
        let catalog = build_catalog_with(&map, &filtration, &strata, bound);
        let g = map.graph();
        for s in &strata {
            if let StratumKind::NegLinear { axis, .. } = &s.kind {
                if catalog.decompose_closed(g, axis).is_none() {
                    return Err(Error::CatalogIncomplete(format!(
                        "axis {} does not decompose into catalogued Nielsen paths",
                        g.format_path(axis)
                    )));
                }
            }
        }
        let level = filtration.stratum_of(g.edge_count());
        let axes = axes(g, &strata);
        let directions = DirectionMap::new(&map);
        Ok(MapAnalysis {
            map,
            filtration,
            strata,
            level,
            catalog,
            axes,
            directions,
            options,
            splittings: OnceLock::new(),
        })
    }

    pub fn stratum_of(&self, e: EdgeId) -> &Stratum {
        &self.strata[self.level[e.0]]
    }

    pub fn linear_edges_with_axis(&self) -> impl Iterator<Item = (usize, &LinearEdge)> {
        self.axes.iter().enumerate().flat_map(|(i, a)| a.edges.iter().map(move |l| (i, l)))
    }

    pub fn linear_edges(&self) -> Vec<&LinearEdge> {
        let mut v: Vec<&LinearEdge> = self.axes.iter().flat_map(|a| a.edges.iter()).collect();
        v.sort_by_key(|l| l.edge.edge());
        v
    }

    /// The linear edge oriented as `e`, if any.
    pub fn linear_edge(&self, e: OrientedEdge) -> Option<&LinearEdge> {
        self.axes.iter().flat_map(|a| a.edges.iter()).find(|l| l.edge == e)
    }

    /// Complete splitting of `f(E)`, computed once for all edges.
    pub fn edge_splitting(&self, e: EdgeId) -> Result<CompleteSplitting> {
        let all = self.splittings.get_or_init(|| {
            self.map
                .graph()
                .edge_ids()
                .map(|e| complete_split(self, &self.map.edge_image(e)))
                .collect()
        });
        all[e.0].clone()
    }
}
