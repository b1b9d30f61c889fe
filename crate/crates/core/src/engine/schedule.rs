use crate::graph::PartitionId;

/// Batch index of an embedding whose needed list lives on `owner`, as seen
/// from worker `me` of `n`. Batch 0 is local.
#[inline]
pub fn circulant_batch(owner: PartitionId, me: PartitionId, n: usize) -> usize {
    (owner + n - me) % n
}

/// Groups item indices into `n` batches: batch `j` holds the items whose
/// source machine is `(me + j) mod n`, in input order.
pub fn circulant_shuffle(owners: &[PartitionId], me: PartitionId, n: usize) -> Vec<Vec<usize>> {
    let mut batches = vec![Vec::new(); n];
    for (i, &o) in owners.iter().enumerate() {
        batches[circulant_batch(o, me, n)].push(i);
    }
    batches
}

/// Stable counting sort by batch: returns the permutation and the batch
/// bounds (`n + 1` entries).
pub(crate) fn circulant_order(batch_of: impl Iterator<Item = usize> + Clone, n: usize) -> (Vec<u32>, Vec<usize>) {
    let mut bounds = vec![0usize; n + 1];
    for b in batch_of.clone() {
        bounds[b + 1] += 1;
    }
    for j in 0..n {
        bounds[j + 1] += bounds[j];
    }
    let mut fill = bounds.clone();
    let mut order = vec![0u32; bounds[n]];
    for (i, b) in batch_of.enumerate() {
        order[fill[b]] = i as u32;
        fill[b] += 1;
    }
    (order, bounds)
}
