//! Maximum-cardinality bipartite matching (Hopcroft–Karp).

use std::collections::VecDeque;

const NIL: usize = usize::MAX;

/// Maximum matching of a bipartite graph with `adj[left]` listing the right
/// vertices adjacent to `left`. Returns `left_to_right` (`None` = unmatched).
pub fn maximum_matching(n_right: usize, adj: &[Vec<usize>]) -> Vec<Option<usize>> {
    let n_left = adj.len();
    let mut left_match = vec![NIL; n_left];
    let mut right_match = vec![NIL; n_right];
    let mut dist = vec![0usize; n_left];

    loop {
        // BFS layering from free left vertices
        let mut queue = VecDeque::new();
        for l in 0..n_left {
            if left_match[l] == NIL {
                dist[l] = 0;
                queue.push_back(l);
            } else {
                dist[l] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(l) = queue.pop_front() {
            for &r in &adj[l] {
                let next = right_match[r];
                if next == NIL {
                    found = true;
                } else if dist[next] == usize::MAX {
                    dist[next] = dist[l] + 1;
                    queue.push_back(next);
                }
            }
        }
        if !found {
            break;
        }
        let mut progress = false;
        for l in 0..n_left {
            if left_match[l] == NIL && augment(l, adj, &mut left_match, &mut right_match, &mut dist) {
                progress = true;
            }
        }
        if !progress {
            break;
        }
    }
    left_match.into_iter().map(|r| (r != NIL).then_some(r)).collect()
}

fn augment(
    l: usize,
    adj: &[Vec<usize>],
    left_match: &mut [usize],
    right_match: &mut [usize],
    dist: &mut [usize],
) -> bool {
    for &r in &adj[l] {
        let next = right_match[r];
        let ok = next == NIL
            || (dist[next] == dist[l].wrapping_add(1) && augment(next, adj, left_match, right_match, dist));
        if ok {
            left_match[l] = r;
            right_match[r] = l;
            return true;
        }
    }
    dist[l] = usize::MAX;
    false
}
