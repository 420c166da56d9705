//! Partial colorings and the independent properness verifier.

use serde::{Deserialize, Serialize};

use crate::cover::{Color, CorrespondenceCover, Instance, ListAssignment};
use crate::graph::{Graph, Vertex};

/// Vertex to color-or-blank map.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PartialColoring {
    assignment: Vec<Option<Color>>,
}

impl PartialColoring {
    pub fn blank(n: usize) -> Self {
        PartialColoring {
            assignment: vec![None; n],
        }
    }

    pub fn from_assignment(assignment: Vec<Option<Color>>) -> Self {
        PartialColoring { assignment }
    }

    pub fn assignment(&self) -> &[Option<Color>] {
        &self.assignment
    }

    pub fn get(&self, v: Vertex) -> Option<Color> {
        self.assignment[v]
    }

    pub fn set(&mut self, v: Vertex, c: Option<Color>) {
        self.assignment[v] = c;
    }

    pub fn n(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_total(&self) -> bool {
        self.assignment.iter().all(Option::is_some)
    }

    pub fn colored_count(&self) -> usize {
        self.assignment.iter().filter(|c| c.is_some()).count()
    }

    /// The colored vertices.
    pub fn domain(&self) -> impl Iterator<Item = Vertex> + '_ {
        self.assignment
            .iter()
            .enumerate()
            .filter_map(|(v, c)| c.map(|_| v))
    }

    /// Copy every color assigned in `other` over this coloring.
    pub fn absorb(&mut self, other: &PartialColoring) {
        for (slot, c) in self.assignment.iter_mut().zip(&other.assignment) {
            if c.is_some() {
                *slot = *c;
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Violation {
    SizeMismatch { expected: usize, found: usize },
    NotInList { vertex: Vertex, color: Color },
    Conflict { u: Vertex, v: Vertex },
}

/// Result of [`verify_coloring`]; `witness` is the first failure found.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verification {
    pub witness: Option<Violation>,
}

impl Verification {
    pub fn passed(&self) -> bool {
        self.witness.is_none()
    }
}

/// Check list membership of every assigned color and that no edge carries
/// equal (list case) or corresponding (cover case) colors. Blank vertices
/// are ignored, so a blank coloring passes.
pub fn verify_coloring(g: &Graph, instance: &Instance, phi: &PartialColoring) -> Verification {
    let witness = match instance {
        Instance::Lists(l) => verify_lists(g, l, phi),
        Instance::Cover(c) => verify_cover(g, c, phi),
    };
    Verification { witness }
}

fn check_membership(n: usize, phi: &PartialColoring, list: impl Fn(Vertex) -> bool) -> Option<Violation> {
    if phi.n() != n {
        return Some(Violation::SizeMismatch {
            expected: n,
            found: phi.n(),
        });
    }
    phi.assignment
        .iter()
        .enumerate()
        .find_map(|(v, c)| c.filter(|_| !list(v)).map(|color| Violation::NotInList { vertex: v, color }))
}

fn verify_lists(g: &Graph, l: &ListAssignment, phi: &PartialColoring) -> Option<Violation> {
    let n = g.n();
    if l.n() != n {
        return Some(Violation::SizeMismatch { expected: n, found: l.n() });
    }
    if let Some(w) = check_membership(n, phi, |v| l.contains(v, phi.assignment[v].unwrap())) {
        return Some(w);
    }
    g.edges().find_map(|(u, v)| match (phi.get(u), phi.get(v)) {
        (Some(a), Some(b)) if a == b => Some(Violation::Conflict { u, v }),
        _ => None,
    })
}

fn verify_cover(g: &Graph, cov: &CorrespondenceCover, phi: &PartialColoring) -> Option<Violation> {
    let n = g.n();
    if cov.n() != n {
        return Some(Violation::SizeMismatch { expected: n, found: cov.n() });
    }
    if let Some(w) = check_membership(n, phi, |v| cov.list(v).binary_search(&phi.assignment[v].unwrap()).is_ok()) {
        return Some(w);
    }
    cov.matchings().iter().find_map(|(&(u, v), pairs)| {
        match (phi.get(u), phi.get(v)) {
            (Some(a), Some(b)) if pairs.contains(&(a, b)) => Some(Violation::Conflict { u, v }),
            _ => None,
        }
    })
}
