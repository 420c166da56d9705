//! Exhaustive search, used as a test oracle.

use super::NibbleError;
use crate::coloring::PartialColoring;
use crate::cover::{Color, Instance};
use crate::graph::{Graph, Vertex};

pub const BRUTE_FORCE_MAX_N: usize = 20;

/// `Ok(Some(φ))` for a proper total coloring, `Ok(None)` if none exists.
/// Vertices are assigned in index order; each choice is checked against the
/// already-assigned neighbors only.
pub fn brute_force(g: &Graph, instance: &Instance) -> Result<Option<PartialColoring>, NibbleError> {
    let n = g.n();
    if n > BRUTE_FORCE_MAX_N {
        return Err(NibbleError::TooLarge { n, max: BRUTE_FORCE_MAX_N });
    }
    if instance.n() != n {
        return Err(NibbleError::Precondition("instance size differs from graph size".into()));
    }
    let clash = |u: Vertex, a: Color, v: Vertex, b: Color| match instance {
        Instance::Lists(_) => g.has_edge(u, v) && a == b,
        Instance::Cover(cov) => cov.matching(u, v).contains(&(a, b)),
    };
    let mut chosen: Vec<Color> = Vec::with_capacity(n);
    let mut next_index = vec![0usize; n];
    loop {
        let v = chosen.len();
        if v == n {
            let assignment = chosen.into_iter().map(Some).collect();
            return Ok(Some(PartialColoring::from_assignment(assignment)));
        }
        let list = instance.list(v);
        let mut placed = false;
        while next_index[v] < list.len() {
            let c = list[next_index[v]];
            next_index[v] += 1;
            if (0..v).all(|u| !clash(u, chosen[u], v, c)) {
                chosen.push(c);
                placed = true;
                break;
            }
        }
        if !placed {
            next_index[v] = 0;
            if chosen.pop().is_none() {
                return Ok(None);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::ListAssignment;
    use crate::graph::named::*;

    fn lists(n: usize, colors: &[Color]) -> Instance {
        Instance::Lists(ListAssignment::new(vec![colors.to_vec(); n]).unwrap())
    }

    #[test]
    fn triangle_needs_three_colors() {
        assert_eq!(brute_force(&complete(3), &lists(3, &[1, 2])).unwrap(), None);
        assert!(brute_force(&complete(3), &lists(3, &[1, 2, 3])).unwrap().is_some());
    }

    #[test]
    fn even_cycle_is_two_colorable() {
        assert!(brute_force(&cycle(6), &lists(6, &[1, 2])).unwrap().is_some());
        assert_eq!(brute_force(&cycle(5), &lists(5, &[1, 2])).unwrap(), None);
    }

    #[test]
    fn large_instances_are_refused() {
        assert!(matches!(
            brute_force(&Graph::empty(21), &lists(21, &[0])),
            Err(NibbleError::TooLarge { n: 21, .. })
        ));
    }

    #[test]
    fn empty_list_is_uncolorable() {
        let inst = Instance::Lists(ListAssignment::new(vec![vec![1], vec![]]).unwrap());
        assert_eq!(brute_force(&Graph::empty(2), &inst).unwrap(), None);
    }
}
