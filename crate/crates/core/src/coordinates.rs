//! Twist and stretch coordinates of the maps `f_a`: one comparison
//! coordinate per linear edge, one expansion coordinate per EG stratum.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::analysis::MapAnalysis;
use crate::disintegration::{build_fa, Disintegration};
use crate::error::{Error, Result};
use crate::graph_map::{GraphMap, StratumKind};
use crate::paths::{EdgePath, OrientedEdge};
use crate::spectral::{characteristic_polynomial, perron_frobenius, PfEigenvalue};

#[derive(Clone, Debug, PartialEq)]
pub enum Coordinate {
    Comparison { axis: EdgePath, edge: OrientedEdge, base: i64, class: usize },
    Expansion { stratum: usize, pf: PfEigenvalue, char_poly: Vec<BigInt>, class: usize },
}

impl Coordinate {
    pub fn class(&self) -> usize {
        match self {
            Coordinate::Comparison { class, .. } | Coordinate::Expansion { class, .. } => *class,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateSystem {
    pub coords: Vec<Coordinate>,
}

impl CoordinateSystem {
    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn comparison_count(&self) -> usize {
        self.coords.iter().filter(|c| matches!(c, Coordinate::Comparison { .. })).count()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoordinateValue {
    Comparison(i64),
    /// Exact multiplier of `log λ`, and the product as a float.
    Expansion { multiplier: i64, log: f64 },
}

impl CoordinateValue {
    /// The exact integer part: the twist exponent or the multiplier.
    pub fn exact(&self) -> i64 {
        match *self {
            CoordinateValue::Comparison(v) => v,
            CoordinateValue::Expansion { multiplier, .. } => multiplier,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoordinateVector {
    pub values: Vec<CoordinateValue>,
}

impl CoordinateVector {
    pub fn exact(&self) -> Vec<i64> {
        self.values.iter().map(|v| v.exact()).collect()
    }
}

pub fn coordinate_system(a: &MapAnalysis, d: &Disintegration) -> CoordinateSystem {
    let mut coords = Vec::new();
    let mut linear: Vec<_> = a.axes.iter().flat_map(|ax| ax.edges.iter()).collect();
    linear.sort_by_key(|l| l.edge.edge());
    for l in linear {
        let class = d.partition.class_of_edge(a, l.edge.edge()).expect("linear edges are not fixed");
        coords.push(Coordinate::Comparison { axis: l.axis.clone(), edge: l.edge, base: l.exponent, class });
    }
    for s in &a.strata {
        if let StratumKind::Eg { pf } = &s.kind {
            let block = stratum_block(&a.map, &s.edges);
            coords.push(Coordinate::Expansion {
                stratum: s.index,
                pf: pf.clone(),
                char_poly: characteristic_polynomial(&block),
                class: d.partition.class_of[s.index].expect("EG strata are not fixed"),
            });
        }
    }
    CoordinateSystem { coords }
}

fn stratum_block(m: &GraphMap, edges: &[crate::paths::EdgeId]) -> Vec<Vec<u64>> {
    let t = m.transition_matrix();
    edges.iter().map(|i| edges.iter().map(|j| t[i.0][j.0]).collect()).collect()
}

/// `k` with `u = w^k`, if any.
fn exponent_in(m: &GraphMap, w: &EdgePath, u: &EdgePath) -> Option<i64> {
    if u.is_trivial() {
        return Some(0);
    }
    if w.is_trivial() || u.len() % w.len() != 0 {
        return None;
    }
    let k = (u.len() / w.len()) as i64;
    [k, -k].into_iter().find(|&k| &w.power(m.graph(), k) == u)
}

/// Coordinates read off `f_a` itself: the exponent of the axis in
/// `f_a(E) = E·w^c` for each linear edge, and the multiplier of each
/// EG stratum.
pub fn evaluate(a: &MapAnalysis, d: &Disintegration, cs: &CoordinateSystem, tuple: &[i64]) -> Result<CoordinateVector> {
    let fa = build_fa(a, d, tuple)?;
    let g = a.map.graph();
    let mut values = Vec::new();
    for c in &cs.coords {
        match c {
            Coordinate::Comparison { axis, edge, .. } => {
                let img = fa.image(*edge);
                if img.first() != Some(*edge) {
                    return Err(Error::InvalidMap(format!("f_a moves the linear edge {}", g.oriented_name(*edge))));
                }
                let u = EdgePath { start: g.term(*edge), edges: img.edges[1..].to_vec() };
                let k = exponent_in(&fa, axis, &u).ok_or_else(|| {
                    Error::InvalidMap(format!("f_a({}) is not a power of the axis", g.oriented_name(*edge)))
                })?;
                values.push(CoordinateValue::Comparison(k));
            }
            Coordinate::Expansion { pf, class, .. } => {
                let k = tuple[*class];
                values.push(CoordinateValue::Expansion { multiplier: k, log: k as f64 * pf.approx.ln() });
            }
        }
    }
    Ok(CoordinateVector { values })
}

/// `a_s` times the base value of each coordinate.
pub fn predicted(cs: &CoordinateSystem, tuple: &[i64]) -> CoordinateVector {
    let values = cs
        .coords
        .iter()
        .map(|c| match c {
            Coordinate::Comparison { base, class, .. } => CoordinateValue::Comparison(tuple[*class] * base),
            Coordinate::Expansion { pf, class, .. } => CoordinateValue::Expansion {
                multiplier: tuple[*class],
                log: tuple[*class] as f64 * pf.approx.ln(),
            },
        })
        .collect();
    CoordinateVector { values }
}

/// PF eigenvalue of each EG block of `f_a` against `λ^{a_s}`; returns
/// the worst relative error.
pub fn expansion_consistency(a: &MapAnalysis, d: &Disintegration, cs: &CoordinateSystem, tuple: &[i64]) -> Result<f64> {
    let fa = build_fa(a, d, tuple)?;
    let mut worst: f64 = 0.0;
    for c in &cs.coords {
        if let Coordinate::Expansion { stratum, pf, class, .. } = c {
            let block = stratum_block(&fa, &a.strata[*stratum].edges);
            let got = perron_frobenius(&block, 1e-12).approx;
            let want = pf.approx.powi(tuple[*class] as i32);
            worst = worst.max(((got - want) / want).abs());
        }
    }
    Ok(worst)
}

pub fn matrix_rank(rows: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
        .collect();
    let cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&i| !m[i][c].is_zero()) else { continue };
        m.swap(rank, p);
        for i in 0..m.len() {
            if i != rank && !m[i][c].is_zero() {
                let f = &m[i][c] / &m[rank][c];
                for j in c..cols {
                    let v = &f * &m[rank][j];
                    m[i][j] -= v;
                }
            }
        }
        rank += 1;
    }
    rank
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RankReport {
    pub classes: usize,
    pub coordinates: usize,
    pub relations: usize,
    pub rank: usize,
    /// The coordinates of the lattice basis are linearly independent.
    pub injective: bool,
}

impl RankReport {
    pub fn summary(&self) -> String {
        format!("M={}, relations={}, rank(D)={}", self.classes, self.relations, self.rank)
    }
}

pub fn rank_report(d: &Disintegration, cs: &CoordinateSystem) -> RankReport {
    let basis = d.lattice.basis_i64();
    let images: Vec<Vec<i64>> = basis.iter().map(|b| predicted(cs, b).exact()).collect();
    let injective = basis.is_empty() || matrix_rank(&images) == basis.len();
    RankReport {
        classes: d.partition.len(),
        coordinates: cs.len(),
        relations: d.relations.len(),
        rank: d.lattice.rank(),
        injective,
    }
}

pub fn is_zero_vector(v: &CoordinateVector) -> bool {
    v.values.iter().all(|x| x.exact() == 0)
}
