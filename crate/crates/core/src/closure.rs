//! Enumeration of the closed sets of a closure operator on `0..n`.
//!
//! Uses Ganter's NextClosure, which lists every closed set exactly once in
//! lectic order.

use crate::fintop::PointSet;

/// Every closed set of `close`, in lectic order.
///
/// Returns `Err(limit)` as soon as more than `limit` sets would be produced.
pub fn closed_sets<F>(n: usize, close: F, limit: usize) -> Result<Vec<PointSet>, usize>
where
    F: Fn(&PointSet) -> PointSet,
{
    let mut out = Vec::new();
    let mut current = close(&PointSet::with_capacity(n));
    loop {
        if out.len() == limit {
            return Err(limit);
        }
        out.push(current.clone());
        match next_closure(n, &close, &current) {
            Some(next) => current = next,
            None => return Ok(out),
        }
    }
}

fn next_closure<F>(n: usize, close: &F, a: &PointSet) -> Option<PointSet>
where
    F: Fn(&PointSet) -> PointSet,
{
    for i in (0..n).rev() {
        if a.contains(i) {
            continue;
        }
        let mut seed = PointSet::with_capacity(n);
        for j in a.ones().take_while(|&j| j < i) {
            seed.insert(j);
        }
        seed.insert(i);
        let b = close(&seed);
        // accept when b adds nothing below i
        if b.ones().take_while(|&j| j < i).all(|j| a.contains(j)) {
            return Some(b);
        }
    }
    None
}
