//! Sorted-list set operations used by the plan interpreter.
//!
//! Both inputs must be sorted ascending and duplicate-free. When one list is
//! more than [`GALLOP_RATIO`] times longer than the other, the short list is
//! probed into the long one with exponential search instead of a linear merge.

use crate::graph::VertexId;

pub const GALLOP_RATIO: usize = 32;

/// Smallest index `i >= from` with `list[i] >= target`.
fn gallop(list: &[VertexId], from: usize, target: VertexId) -> usize {
    let mut step = 1;
    let mut lo = from;
    let mut hi = from;
    while hi < list.len() && list[hi] < target {
        lo = hi + 1;
        hi += step;
        step <<= 1;
    }
    let hi = hi.min(list.len());
    lo + list[lo..hi].partition_point(|&x| x < target)
}

/// `out = a ∩ b`.
pub fn intersect_into(a: &[VertexId], b: &[VertexId], out: &mut Vec<VertexId>) {
    out.clear();
    let (short, long) = if a.len() <= b.len() { (a, b) } else { (b, a) };
    if short.is_empty() {
        return;
    }
    if long.len() / short.len() > GALLOP_RATIO {
        let mut pos = 0;
        for &x in short {
            pos = gallop(long, pos, x);
            if pos == long.len() {
                break;
            }
            if long[pos] == x {
                out.push(x);
                pos += 1;
            }
        }
        return;
    }
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
}

/// `out = a \ b`.
pub fn difference_into(a: &[VertexId], b: &[VertexId], out: &mut Vec<VertexId>) {
    out.clear();
    if b.is_empty() {
        out.extend_from_slice(a);
        return;
    }
    if b.len() / a.len().max(1) > GALLOP_RATIO {
        let mut pos = 0;
        for &x in a {
            pos = gallop(b, pos, x);
            if pos == b.len() || b[pos] != x {
                out.push(x);
            }
        }
        return;
    }
    let mut j = 0;
    for &x in a {
        while j < b.len() && b[j] < x {
            j += 1;
        }
        if j == b.len() || b[j] != x {
            out.push(x);
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::BTreeSet;

    use proptest::prelude::*;

    use super::*;

    fn sorted_set() -> impl Strategy<Value = Vec<VertexId>> {
        prop::collection::btree_set(0u32..2000, 0..300).prop_map(|s| s.into_iter().collect())
    }

    #[test]
    fn gallop_path_is_taken() {
        let long: Vec<VertexId> = (0..10_000).collect();
        let short = vec![3, 500, 9_999, 20_000];
        let mut out = Vec::new();
        intersect_into(&short, &long, &mut out);
        assert_eq!(out, vec![3, 500, 9_999]);
        difference_into(&short, &long, &mut out);
        assert_eq!(out, vec![20_000]);
    }

    proptest! {
        #[test]
        fn matches_btreeset(a in sorted_set(), b in sorted_set()) {
            let sa: BTreeSet<_> = a.iter().copied().collect();
            let sb: BTreeSet<_> = b.iter().copied().collect();
            let mut out = Vec::new();
            intersect_into(&a, &b, &mut out);
            prop_assert_eq!(&out, &sa.intersection(&sb).copied().collect::<Vec<_>>());
            difference_into(&a, &b, &mut out);
            prop_assert_eq!(&out, &sa.difference(&sb).copied().collect::<Vec<_>>());
        }

        #[test]
        fn skewed_sizes(a in prop::collection::btree_set(0u32..100_000, 0..8),
                        b in prop::collection::btree_set(0u32..100_000, 500..2000)) {
            let (a, b): (Vec<_>, Vec<_>) = (a.into_iter().collect(), b.into_iter().collect());
            let mut x = Vec::new();
            let mut y = Vec::new();
            intersect_into(&a, &b, &mut x);
            intersect_into(&b, &a, &mut y);
            prop_assert_eq!(&x, &y);
            let expect: Vec<_> = a.iter().copied().filter(|v| b.binary_search(v).is_ok()).collect();
            prop_assert_eq!(x, expect);
            difference_into(&a, &b, &mut y);
            let expect: Vec<_> = a.iter().copied().filter(|v| b.binary_search(v).is_err()).collect();
            prop_assert_eq!(y, expect);
        }
    }
}
