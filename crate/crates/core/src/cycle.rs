//! Karp's minimum mean cycle for node-weighted digraphs.
//!
//! The weight of an edge `a -> b` is the weight of its source node `a`, so a
//! cycle's mean is the Birkhoff average of a locally constant potential along
//! the corresponding periodic orbit.

/// Minimum mean weight over all directed cycles, `None` for acyclic graphs.
///
/// All nodes start at distance zero (a virtual source linked to every node),
/// so the graph need not be strongly connected.
pub fn min_mean_cycle(succ: &[Vec<usize>], weights: &[f64]) -> Option<f64> {
    let n = weights.len();
    if n == 0 {
        return None;
    }
    // dist[k][v]: minimum weight of a walk with exactly k edges ending at v.
    let mut dist = vec![vec![f64::INFINITY; n]; n + 1];
    dist[0].iter_mut().for_each(|d| *d = 0.0);
    for k in 1..=n {
        let (prev, cur) = dist.split_at_mut(k);
        let prev = &prev[k - 1];
        let cur = &mut cur[0];
        for (u, next) in succ.iter().enumerate() {
            if prev[u].is_infinite() {
                continue;
            }
            let d = prev[u] + weights[u];
            for &v in next {
                if d < cur[v] {
                    cur[v] = d;
                }
            }
        }
    }
    let mut best: Option<f64> = None;
    for v in 0..n {
        if dist[n][v].is_infinite() {
            continue;
        }
        let worst = (0..n)
            .filter(|&k| dist[k][v].is_finite())
            .map(|k| (dist[n][v] - dist[k][v]) / (n - k) as f64)
            .fold(f64::NEG_INFINITY, f64::max);
        best = Some(best.map_or(worst, |b| b.min(worst)));
    }
    best
}

/// Maximum mean weight over all directed cycles.
pub fn max_mean_cycle(succ: &[Vec<usize>], weights: &[f64]) -> Option<f64> {
    let neg: Vec<f64> = weights.iter().map(|w| -w).collect();
    min_mean_cycle(succ, &neg).map(|m| -m)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Brute force: mean over every simple cycle found by DFS.
    fn simple_cycle_means(succ: &[Vec<usize>], w: &[f64]) -> Vec<f64> {
        fn dfs(start: usize, v: usize, succ: &[Vec<usize>], w: &[f64], path: &mut Vec<usize>, out: &mut Vec<f64>) {
            for &b in &succ[v] {
                if b == start {
                    out.push(path.iter().map(|&i| w[i]).sum::<f64>() / path.len() as f64);
                } else if b > start && !path.contains(&b) {
                    path.push(b);
                    dfs(start, b, succ, w, path, out);
                    path.pop();
                }
            }
        }
        let mut out = Vec::new();
        for s in 0..w.len() {
            dfs(s, s, succ, w, &mut vec![s], &mut out);
        }
        out
    }

    #[test]
    fn alternating_two_cycle() {
        let succ = vec![vec![1], vec![0]];
        assert_eq!(min_mean_cycle(&succ, &[0.0, 2.0]), Some(1.0));
        assert_eq!(max_mean_cycle(&succ, &[0.0, 2.0]), Some(1.0));
    }

    #[test]
    fn acyclic_graph_has_no_cycle() {
        let succ = vec![vec![1], vec![]];
        assert_eq!(min_mean_cycle(&succ, &[1.0, 2.0]), None);
    }

    #[test]
    fn matches_enumeration_on_small_graphs() {
        let graphs: Vec<(Vec<Vec<usize>>, Vec<f64>)> = vec![
            (vec![vec![0, 1], vec![0]], vec![3.0, -1.0]),
            (vec![vec![1, 2], vec![2], vec![0, 1]], vec![1.0, 5.0, -2.0]),
            (vec![vec![1], vec![2, 3], vec![0], vec![3, 0]], vec![0.5, 0.1, 4.0, 2.0]),
            (vec![vec![1], vec![0, 2], vec![3], vec![2]], vec![1.0, 1.0, 7.0, -3.0]),
        ];
        for (succ, w) in graphs {
            let means = simple_cycle_means(&succ, &w);
            let lo = means.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            assert!((min_mean_cycle(&succ, &w).unwrap() - lo).abs() < 1e-12);
            assert!((max_mean_cycle(&succ, &w).unwrap() - hi).abs() < 1e-12);
        }
    }
}
