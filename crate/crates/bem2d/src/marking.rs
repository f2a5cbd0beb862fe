//! Marking strategies for the adaptive loop.
//!
//! The bulk-chasing step picks a minimal-cardinality set whose squared
//! indicators reach a `theta` fraction of the total; the expanded variant
//! additionally marks as many of the largest elements, which forces a
//! minimum of global resolution alongside the residual-driven refinement.

/// Minimal set `M` (by cardinality) with
/// `theta * sum(eta_sq) <= sum_{T in M} eta_sq(T)`.
///
/// Elements are taken in decreasing indicator order, ties resolved toward
/// the smaller index, which makes the outcome deterministic and the
/// cardinality minimal.  Returned indices are sorted ascending.
pub fn doerfler_mark(indicators_sq: &[f64], theta: f64) -> Vec<usize> {
    assert!((0.0..=1.0).contains(&theta), "theta must be in [0, 1]");
    let total: f64 = indicators_sq.iter().sum();
    let goal = theta * total;
    if !(goal > 0.0) {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..indicators_sq.len()).collect();
    order.sort_by(|&a, &b| {
        indicators_sq[b]
            .partial_cmp(&indicators_sq[a])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut acc = 0.0;
    let mut marked = Vec::new();
    for &i in &order {
        if acc >= goal {
            break;
        }
        acc += indicators_sq[i];
        marked.push(i);
    }
    marked.sort_unstable();
    marked
}

/// Expanded marking: to a marked set of size `m`, add the `m` elements of
/// largest arclength (ties toward the smaller index) and return the union.
pub fn expand_mark(h: &[f64], marked: &[usize]) -> Vec<usize> {
    let m = marked.len();
    if m == 0 {
        return Vec::new();
    }
    let mut order: Vec<usize> = (0..h.len()).collect();
    order.sort_by(|&a, &b| h[b].partial_cmp(&h[a]).unwrap().then(a.cmp(&b)));
    let mut flags = vec![false; h.len()];
    for &i in marked {
        flags[i] = true;
    }
    for &i in order.iter().take(m) {
        flags[i] = true;
    }
    (0..h.len()).filter(|&i| flags[i]).collect()
}
