//! d-separation by reachability over (vertex, arrival mark) states.
//!
//! A state records whether the walk entered the vertex through an arrowhead
//! or a tail. Leaving through another arrowhead makes the vertex a collider
//! on the walk, which may only be crossed when the vertex is an ancestor of
//! the conditioning set. Every other crossing requires the vertex to be
//! outside the conditioning set. A d-connecting walk exists iff a
//! d-connecting path exists, so plain BFS over the `2n` states suffices.

use std::collections::VecDeque;

use super::{MixedGraph, VertexId};

const TAIL: usize = 0;
const HEAD: usize = 1;

pub(super) fn d_connected<V: VertexId>(
    g: &MixedGraph<V>,
    a: &[usize],
    b: &[usize],
    c: &[usize],
) -> bool {
    let n = g.len();
    if a.is_empty() || b.is_empty() {
        return false;
    }
    let mut in_c = vec![false; n];
    c.iter().for_each(|&v| in_c[v] = true);
    let mut in_b = vec![false; n];
    b.iter().for_each(|&v| in_b[v] = true);
    // Colliders open iff they have a descendant in C, i.e. they are in An(C).
    let open_collider = g.ancestors_mask(c);

    let mut seen = vec![[false; 2]; n];
    let mut queue = VecDeque::new();
    for &s in a {
        // Entering a start vertex "through a tail" lets it leave by any edge.
        if !seen[s][TAIL] {
            seen[s][TAIL] = true;
            queue.push_back((s, TAIL));
        }
    }

    while let Some((v, arrived)) = queue.pop_front() {
        let pass_non_collider = !in_c[v];
        let pass_collider = open_collider[v];

        let mut visit = |w: usize, mark: usize, queue: &mut VecDeque<(usize, usize)>| -> bool {
            if in_b[w] {
                return true;
            }
            if !seen[w][mark] {
                seen[w][mark] = true;
                queue.push_back((w, mark));
            }
            false
        };

        // Leave along v -> w: tail at v, so v is never a collider here.
        if pass_non_collider {
            for &w in g.children_idx(v) {
                if w != v && visit(w, HEAD, &mut queue) {
                    return true;
                }
            }
        }
        // Leave along v <- w or v <-> w: arrowhead at v.
        let pass = if arrived == HEAD {
            pass_collider
        } else {
            pass_non_collider
        };
        if pass {
            for &w in g.parents_idx(v) {
                if w != v && visit(w, TAIL, &mut queue) {
                    return true;
                }
            }
            for &w in g.spouses_idx(v) {
                if w != v && visit(w, HEAD, &mut queue) {
                    return true;
                }
            }
        }
    }
    false
}
