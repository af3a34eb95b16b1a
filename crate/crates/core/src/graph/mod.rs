//! Metric graphs: vertices with ordered bond ends, bonds with lengths,
//! and the directed-bond indexing used by every other module.
//!
//! Bond `b` (0-based) has a tail end at `x = 0` and a head end at
//! `x = length`. Directed bond `b` runs tail to head; directed bond
//! `b + B` runs head to tail.

mod file;

pub use file::{load_graph, parse_graph, parse_length, read_matrix_pair};

use crate::error::{Error, Result};
use crate::scattering::VertexCondition;
use num_rational::Rational64;
use sha2::{Digest, Sha256};
use std::collections::HashMap;

/// Most bonds a commensurate subdivision may produce.
pub const MAX_SUBDIVIDED_BONDS: u64 = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Tail,
    Head,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BondEnd {
    pub bond: usize,
    pub side: Side,
}

/// A bond length, with the exact rational value when one was given.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Length {
    pub value: f64,
    pub exact: Option<Rational64>,
}

impl Length {
    pub fn rational(num: i64, den: i64) -> Self {
        let r = Rational64::new(num, den);
        Length {
            value: *r.numer() as f64 / *r.denom() as f64,
            exact: Some(r),
        }
    }
}

impl From<f64> for Length {
    fn from(value: f64) -> Self {
        Length { value, exact: None }
    }
}

#[derive(Debug, Clone)]
pub struct VertexSpec {
    pub id: String,
    pub condition: VertexCondition,
}

#[derive(Debug, Clone)]
pub struct BondSpec {
    pub id: String,
    pub from: String,
    pub to: String,
    pub length: Length,
}

/// Unvalidated graph description, as read from a file or assembled in code.
#[derive(Debug, Clone, Default)]
pub struct GraphDescription {
    pub vertices: Vec<VertexSpec>,
    pub bonds: Vec<BondSpec>,
}

impl GraphDescription {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, id: &str, condition: VertexCondition) -> Self {
        self.vertices.push(VertexSpec {
            id: id.to_string(),
            condition,
        });
        self
    }

    pub fn bond(mut self, id: &str, from: &str, to: &str, length: impl Into<Length>) -> Self {
        self.bonds.push(BondSpec {
            id: id.to_string(),
            from: from.to_string(),
            to: to.to_string(),
            length: length.into(),
        });
        self
    }
}

#[derive(Debug, Clone)]
pub struct Vertex {
    pub id: String,
    pub condition: VertexCondition,
    /// Incident bond ends in declaration order. A loop contributes both ends.
    pub ends: Vec<BondEnd>,
}

impl Vertex {
    pub fn degree(&self) -> usize {
        self.ends.len()
    }
}

#[derive(Debug, Clone)]
pub struct Bond {
    pub id: String,
    pub tail: usize,
    pub head: usize,
    pub length: Length,
    /// Position of the tail and head ends inside their vertices' `ends`.
    slots: [usize; 2],
}

impl Bond {
    pub fn len(&self) -> f64 {
        self.length.value
    }
}

/// The bond-reversal involution on directed bonds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct JOperator {
    pub num_bonds: usize,
}

impl JOperator {
    pub fn new(num_bonds: usize) -> Self {
        JOperator { num_bonds }
    }

    pub fn reverse(&self, alpha: usize) -> usize {
        let b = self.num_bonds;
        assert!(alpha < 2 * b, "directed bond {alpha} out of range");
        if alpha < b {
            alpha + b
        } else {
            alpha - b
        }
    }

    /// The permutation matrix, block anti-diagonal in the (b+, b-) split.
    pub fn matrix(&self) -> crate::linalg::CMatrix {
        let n = 2 * self.num_bonds;
        crate::linalg::CMatrix::from_fn(n, n, |i, j| {
            if self.reverse(j) == i {
                crate::linalg::c(1.0)
            } else {
                crate::linalg::c(0.0)
            }
        })
    }
}

#[derive(Debug, Clone)]
pub struct MetricGraph {
    vertices: Vec<Vertex>,
    bonds: Vec<Bond>,
}

impl MetricGraph {
    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn num_bonds(&self) -> usize {
        self.bonds.len()
    }

    pub fn num_directed(&self) -> usize {
        2 * self.bonds.len()
    }

    pub fn j(&self) -> JOperator {
        JOperator::new(self.num_bonds())
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.bonds.iter().map(Bond::len).collect()
    }

    pub fn total_length(&self) -> f64 {
        crate::sum::sum(self.bonds.iter().map(Bond::len))
    }

    pub fn min_length(&self) -> f64 {
        self.bonds
            .iter()
            .map(Bond::len)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_length(&self) -> f64 {
        self.bonds.iter().map(Bond::len).fold(0.0, f64::max)
    }

    pub fn bond_index(&self, id: &str) -> Option<usize> {
        self.bonds.iter().position(|b| b.id == id)
    }

    /// Vertex and end slot a directed bond leaves from.
    pub fn departure(&self, alpha: usize) -> (usize, usize) {
        let nb = self.num_bonds();
        let (b, side) = if alpha < nb {
            (alpha, Side::Tail)
        } else {
            (alpha - nb, Side::Head)
        };
        self.end_location(b, side)
    }

    /// Vertex and end slot a directed bond arrives at.
    pub fn arrival(&self, alpha: usize) -> (usize, usize) {
        let nb = self.num_bonds();
        let (b, side) = if alpha < nb {
            (alpha, Side::Head)
        } else {
            (alpha - nb, Side::Tail)
        };
        self.end_location(b, side)
    }

    fn end_location(&self, b: usize, side: Side) -> (usize, usize) {
        let bond = &self.bonds[b];
        match side {
            Side::Tail => (bond.tail, bond.slots[0]),
            Side::Head => (bond.head, bond.slots[1]),
        }
    }

    /// Directed bond leaving through a given end.
    pub fn outgoing(&self, end: BondEnd) -> usize {
        match end.side {
            Side::Tail => end.bond,
            Side::Head => end.bond + self.num_bonds(),
        }
    }

    /// Directed bond arriving through a given end.
    pub fn incoming(&self, end: BondEnd) -> usize {
        match end.side {
            Side::Head => end.bond,
            Side::Tail => end.bond + self.num_bonds(),
        }
    }

    /// Same topology and conditions, new bond lengths.
    pub fn with_lengths(&self, lengths: &[f64]) -> Result<MetricGraph> {
        if lengths.len() != self.num_bonds() {
            return Err(Error::arg(format!(
                "expected {} lengths, got {}",
                self.num_bonds(),
                lengths.len()
            )));
        }
        let mut g = self.clone();
        for (bond, &l) in g.bonds.iter_mut().zip(lengths) {
            check_length(&bond.id, l)?;
            bond.length = Length::from(l);
        }
        Ok(g)
    }

    pub fn description(&self) -> GraphDescription {
        GraphDescription {
            vertices: self
                .vertices
                .iter()
                .map(|v| VertexSpec {
                    id: v.id.clone(),
                    condition: v.condition.clone(),
                })
                .collect(),
            bonds: self
                .bonds
                .iter()
                .map(|b| BondSpec {
                    id: b.id.clone(),
                    from: self.vertices[b.tail].id.clone(),
                    to: self.vertices[b.head].id.clone(),
                    length: b.length,
                })
                .collect(),
        }
    }

    /// Hex SHA-256 of a canonical text form of the graph.
    pub fn canonical_hash(&self) -> String {
        let mut h = Sha256::new();
        for v in &self.vertices {
            h.update(format!("vertex {} {}\n", v.id, v.condition.canonical()));
        }
        for b in &self.bonds {
            let len = match b.length.exact {
                Some(r) => format!("{}/{}", r.numer(), r.denom()),
                None => format!("{:016x}", b.len().to_bits()),
            };
            h.update(format!(
                "bond {} {} {} {}\n",
                b.id, self.vertices[b.tail].id, self.vertices[b.head].id, len
            ));
        }
        hex::encode(h.finalize())
    }
}

fn check_length(id: &str, l: f64) -> Result<()> {
    if l.is_finite() && l > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidLength {
            bond: id.to_string(),
            length: l,
        })
    }
}

/// Validate a description and build the graph. Bond ends are attached to
/// their vertices in bond declaration order, tail before head.
pub fn build_graph(desc: &GraphDescription) -> Result<MetricGraph> {
    if desc.bonds.is_empty() {
        return Err(Error::EmptyGraph);
    }
    let mut index = HashMap::new();
    for (i, v) in desc.vertices.iter().enumerate() {
        if index.insert(v.id.as_str(), i).is_some() {
            return Err(Error::DuplicateId {
                kind: "vertex",
                id: v.id.clone(),
            });
        }
    }
    let mut vertices: Vec<Vertex> = desc
        .vertices
        .iter()
        .map(|v| Vertex {
            id: v.id.clone(),
            condition: v.condition.clone(),
            ends: Vec::new(),
        })
        .collect();
    let mut seen = HashMap::new();
    let mut bonds = Vec::with_capacity(desc.bonds.len());
    for (b, spec) in desc.bonds.iter().enumerate() {
        if seen.insert(spec.id.as_str(), b).is_some() {
            return Err(Error::DuplicateId {
                kind: "bond",
                id: spec.id.clone(),
            });
        }
        check_length(&spec.id, spec.length.value)?;
        let lookup = |name: &str| {
            index
                .get(name)
                .copied()
                .ok_or_else(|| Error::DanglingEndpoint {
                    bond: spec.id.clone(),
                    vertex: name.to_string(),
                })
        };
        let tail = lookup(&spec.from)?;
        let head = lookup(&spec.to)?;
        let tail_slot = vertices[tail].ends.len();
        vertices[tail].ends.push(BondEnd {
            bond: b,
            side: Side::Tail,
        });
        let head_slot = vertices[head].ends.len();
        vertices[head].ends.push(BondEnd {
            bond: b,
            side: Side::Head,
        });
        bonds.push(Bond {
            id: spec.id.clone(),
            tail,
            head,
            length: spec.length,
            slots: [tail_slot, head_slot],
        });
    }
    for v in &vertices {
        if v.ends.is_empty() {
            return Err(Error::IsolatedVertex(v.id.clone()));
        }
        if let Some(d) = v.condition.dimension() {
            if d != v.degree() {
                return Err(Error::DimensionMismatch {
                    vertex: v.id.clone(),
                    expected: v.degree(),
                    found: d,
                });
            }
        }
    }
    Ok(MetricGraph { vertices, bonds })
}

/// Star with a Kirchhoff centre `c` and Kirchhoff (Neumann) leaves `v1..vB`.
/// Bond `b{i}` runs from the centre to leaf `v{i}`.
pub fn make_star(num_bonds: usize, lengths: &[f64]) -> Result<MetricGraph> {
    make_star_with(num_bonds, lengths, VertexCondition::Kirchhoff)
}

pub fn make_star_with(
    num_bonds: usize,
    lengths: &[f64],
    centre: VertexCondition,
) -> Result<MetricGraph> {
    if num_bonds == 0 {
        return Err(Error::EmptyGraph);
    }
    if lengths.len() != num_bonds {
        return Err(Error::arg(format!(
            "star with {num_bonds} bonds needs {num_bonds} lengths, got {}",
            lengths.len()
        )));
    }
    let mut desc = GraphDescription::new().vertex("c", centre);
    for i in 1..=num_bonds {
        desc = desc.vertex(&format!("v{i}"), VertexCondition::Kirchhoff);
    }
    for (i, &l) in lengths.iter().enumerate() {
        desc = desc.bond(&format!("b{}", i + 1), "c", &format!("v{}", i + 1), l);
    }
    build_graph(&desc)
}

/// Ring of `n` equal bonds joined by degree-2 Kirchhoff vertices. With
/// `n = 1` this is a single loop, a circle of circumference `length`.
pub fn make_ring(n: usize, length: f64) -> Result<MetricGraph> {
    let mut desc = GraphDescription::new();
    for i in 0..n {
        desc = desc.vertex(&format!("r{i}"), VertexCondition::Kirchhoff);
    }
    for i in 0..n {
        desc = desc.bond(
            &format!("e{i}"),
            &format!("r{i}"),
            &format!("r{}", (i + 1) % n),
            length,
        );
    }
    build_graph(&desc)
}

fn gcd(mut a: i64, mut b: i64) -> i64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a.abs()
}

/// Best rational approximation with denominator at most `max_den`, accepted
/// only when it matches `x` to relative tolerance `rel_tol`.
pub fn approximate_rational(x: f64, max_den: i64, rel_tol: f64) -> Option<Rational64> {
    if !(x.is_finite() && x > 0.0) {
        return None;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (0i64, 1i64, 1i64, 0i64);
    let mut y = x;
    for _ in 0..64 {
        let a = y.floor();
        if a > 1e15 {
            break;
        }
        let a = a as i64;
        let p2 = a.checked_mul(p1)?.checked_add(p0)?;
        let q2 = a.checked_mul(q1)?.checked_add(q0)?;
        if q2 > max_den {
            break;
        }
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
        if ((p1 as f64 / q1 as f64) - x).abs() <= rel_tol * x {
            return Some(Rational64::new(p1, q1));
        }
        let frac = y - a as f64;
        if frac == 0.0 {
            break;
        }
        y = 1.0 / frac;
    }
    None
}

#[derive(Debug, Clone)]
pub struct CommensurateUnit {
    pub unit: f64,
    pub exact: Rational64,
    /// Number of unit pieces in each bond.
    pub multiples: Vec<u64>,
}

/// Largest common unit dividing every bond length, found from exact lengths
/// or from continued-fraction approximations with bounded denominators.
pub fn commensurate_unit(graph: &MetricGraph, max_den: i64) -> Result<CommensurateUnit> {
    let mut rationals = Vec::with_capacity(graph.num_bonds());
    for b in graph.bonds() {
        let r = match b.length.exact {
            Some(r) => r,
            None => approximate_rational(b.len(), max_den, 1e-12).ok_or_else(|| {
                Error::Incommensurate {
                    bond: b.id.clone(),
                    length: b.len(),
                    unit: f64::NAN,
                }
            })?,
        };
        rationals.push(r);
    }
    let mut unit = rationals[0];
    for r in &rationals[1..] {
        let den = unit.denom() / gcd(*unit.denom(), *r.denom()) * r.denom();
        let a = unit.numer() * (den / unit.denom());
        let b = r.numer() * (den / r.denom());
        unit = Rational64::new(gcd(a, b), den);
    }
    let multiples: Vec<u64> = rationals
        .iter()
        .map(|r| (r / unit).to_integer() as u64)
        .collect();
    let total: u64 = multiples.iter().sum();
    if total > MAX_SUBDIVIDED_BONDS {
        return Err(Error::arg(format!(
            "commensurate unit {unit} would need {total} bonds (limit {MAX_SUBDIVIDED_BONDS})"
        )));
    }
    Ok(CommensurateUnit {
        unit: *unit.numer() as f64 / *unit.denom() as f64,
        exact: unit,
        multiples,
    })
}

/// Split every bond into pieces of length `unit` joined by degree-2
/// Kirchhoff vertices. Original vertices keep their end order; the first
/// piece of bond `b` keeps index `b`.
pub fn subdivide_rational(graph: &MetricGraph, unit: f64) -> Result<MetricGraph> {
    if !(unit.is_finite() && unit > 0.0) {
        return Err(Error::arg(format!("unit must be positive, got {unit}")));
    }
    let nb = graph.num_bonds();
    let mut counts = Vec::with_capacity(nb);
    for b in graph.bonds() {
        let m = (b.len() / unit).round();
        if m < 1.0 || (b.len() - m * unit).abs() > 1e-12 * b.len() {
            return Err(Error::Incommensurate {
                bond: b.id.clone(),
                length: b.len(),
                unit,
            });
        }
        counts.push(m as usize);
    }
    let total: usize = counts.iter().sum();
    if total as u64 > MAX_SUBDIVIDED_BONDS {
        return Err(Error::arg(format!(
            "subdivision would need {total} bonds (limit {MAX_SUBDIVIDED_BONDS})"
        )));
    }
    // pieces[b] lists the new bond indices of bond b, tail to head
    let mut pieces: Vec<Vec<usize>> = (0..nb).map(|b| vec![b]).collect();
    let mut next = nb;
    for (b, &m) in counts.iter().enumerate() {
        for _ in 1..m {
            pieces[b].push(next);
            next += 1;
        }
    }
    let mut bonds: Vec<Bond> = (0..total)
        .map(|_| Bond {
            id: String::new(),
            tail: usize::MAX,
            head: usize::MAX,
            length: Length::from(unit),
            slots: [usize::MAX; 2],
        })
        .collect();
    for (b, ps) in pieces.iter().enumerate() {
        let id = &graph.bonds()[b].id;
        for (j, &p) in ps.iter().enumerate() {
            bonds[p].id = if ps.len() == 1 {
                id.clone()
            } else {
                format!("{id}.{j}")
            };
        }
    }
    let mut vertices: Vec<Vertex> = Vec::with_capacity(graph.vertices().len() + total - nb);
    for v in graph.vertices() {
        let ends = v
            .ends
            .iter()
            .map(|end| BondEnd {
                bond: match end.side {
                    Side::Tail => pieces[end.bond][0],
                    Side::Head => *pieces[end.bond].last().unwrap(),
                },
                side: end.side,
            })
            .collect();
        vertices.push(Vertex {
            id: v.id.clone(),
            condition: v.condition.clone(),
            ends,
        });
    }
    for (b, ps) in pieces.iter().enumerate() {
        let id = &graph.bonds()[b].id;
        for j in 1..ps.len() {
            vertices.push(Vertex {
                id: format!("{id}#{j}"),
                condition: VertexCondition::Kirchhoff,
                ends: vec![
                    BondEnd {
                        bond: ps[j - 1],
                        side: Side::Head,
                    },
                    BondEnd {
                        bond: ps[j],
                        side: Side::Tail,
                    },
                ],
            });
        }
    }
    for (vi, v) in vertices.iter().enumerate() {
        for (slot, end) in v.ends.iter().enumerate() {
            let bond = &mut bonds[end.bond];
            match end.side {
                Side::Tail => {
                    bond.tail = vi;
                    bond.slots[0] = slot;
                }
                Side::Head => {
                    bond.head = vi;
                    bond.slots[1] = slot;
                }
            }
        }
    }
    Ok(MetricGraph { vertices, bonds })
}
