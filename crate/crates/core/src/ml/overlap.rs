//! True-positive overlap between two models over the same universe of
//! smelly, change-prone classes.

use std::collections::BTreeSet;

use crate::error::{Error, Result};

/// Percentages of the union of the two true-positive sets that fall in
/// both, only the first, and only the second. An empty union yields
/// (0, 0, 0); otherwise the three parts sum to 100.
pub fn overlap_analysis(
    tp_a: &BTreeSet<String>,
    tp_b: &BTreeSet<String>,
    universe: &BTreeSet<String>,
) -> Result<(f64, f64, f64)> {
    for (side, set) in [("first", tp_a), ("second", tp_b)] {
        if let Some(stray) = set.difference(universe).next() {
            return Err(Error::Contract(format!(
                "{side} true-positive set contains {stray}, which is outside the universe"
            )));
        }
    }
    let union_size = tp_a.union(tp_b).count();
    if union_size == 0 {
        return Ok((0.0, 0.0, 0.0));
    }
    let total = union_size as f64;
    let both = tp_a.intersection(tp_b).count() as f64 / total * 100.0;
    let only_a = tp_a.difference(tp_b).count() as f64 / total * 100.0;
    let only_b = tp_b.difference(tp_a).count() as f64 / total * 100.0;
    Ok((both, only_a, only_b))
}
