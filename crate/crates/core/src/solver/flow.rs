//! Capacitated assignment of RU/ONUs to a fixed set of homed splitters, by
//! successive shortest paths on the residual graph.

use super::structure::Structure;

/// Cheapest assignment of every RU/ONU to one of `open` (splitter, CO)
/// pairs. Returns the cost and, per RU/ONU, the position in `open`.
pub(crate) fn assign(st: &Structure, open: &[(usize, usize)]) -> Option<(i128, Vec<usize>)> {
    let p = st.p;
    let k = open.len();
    // edges[r] = (slot, cost)
    let mut edges: Vec<Vec<(usize, i128)>> = vec![Vec::new(); p];
    for (s, &(j, i)) in open.iter().enumerate() {
        for &r in &st.admissible[st.option(j, i)] {
            edges[r as usize].push((s, st.link_cost[j * p + r as usize]));
        }
    }
    let cap: Vec<usize> = open.iter().map(|&(j, _)| st.cap[j] as usize).collect();
    let mut load = vec![0usize; k];
    let mut slot_of: Vec<Option<usize>> = vec![None; p];
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); k];

    // Labels over RU nodes [0, p) and slot nodes [p, p + k).
    let mut dist = vec![i128::MAX; p + k];
    let mut prev = vec![usize::MAX; p + k];
    let mut in_queue = vec![false; p + k];
    let mut queue = std::collections::VecDeque::new();
    let mut total: i128 = 0;

    for start in 0..p {
        dist.iter_mut().for_each(|d| *d = i128::MAX);
        prev.iter_mut().for_each(|v| *v = usize::MAX);
        dist[start] = 0;
        queue.push_back(start);
        in_queue[start] = true;
        while let Some(u) = queue.pop_front() {
            in_queue[u] = false;
            let du = dist[u];
            if u < p {
                for &(s, c) in &edges[u] {
                    if slot_of[u] == Some(s) {
                        continue;
                    }
                    let v = p + s;
                    if du + c < dist[v] {
                        dist[v] = du + c;
                        prev[v] = u;
                        if !in_queue[v] {
                            in_queue[v] = true;
                            queue.push_back(v);
                        }
                    }
                }
            } else {
                let s = u - p;
                for &r in &members[s] {
                    let c = edges[r].iter().find(|(t, _)| *t == s).map(|(_, c)| *c).unwrap_or(0);
                    if du - c < dist[r] {
                        dist[r] = du - c;
                        prev[r] = u;
                        if !in_queue[r] {
                            in_queue[r] = true;
                            queue.push_back(r);
                        }
                    }
                }
            }
        }
        let end = (0..k)
            .filter(|&s| load[s] < cap[s] && dist[p + s] != i128::MAX)
            .min_by_key(|&s| (dist[p + s], s))?;
        total += dist[p + end];
        load[end] += 1;
        // Walk back: slot <- ru <- slot <- ... <- start.
        let mut v = p + end;
        while v != start {
            let r = prev[v];
            let s = v - p;
            if let Some(old) = slot_of[r] {
                members[old].retain(|&x| x != r);
            }
            slot_of[r] = Some(s);
            members[s].push(r);
            v = if r == start { start } else { prev[r] };
        }
    }
    Some((total, slot_of.into_iter().map(|s| s.unwrap_or(0)).collect()))
}
