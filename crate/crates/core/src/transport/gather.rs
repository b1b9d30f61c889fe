use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

use crate::graph::PartitionId;

use super::TransportError;

type Table = Arc<Vec<Vec<u64>>>;

struct State {
    generation: u64,
    slots: Vec<Option<Vec<u64>>>,
    arrived: usize,
    last: Option<(u64, Table)>,
    poisoned: Option<String>,
    departed: Vec<bool>,
}

/// Collects one contribution per worker per round and releases everybody
/// once the last one arrives. Lives on worker 0; remote workers reach it
/// through their control connection.
pub struct GatherCoordinator {
    state: Mutex<State>,
    cv: Condvar,
    timeout: Duration,
}

impl GatherCoordinator {
    pub fn new(num_partitions: usize, timeout: Duration) -> Self {
        Self {
            state: Mutex::new(State {
                generation: 0,
                slots: vec![None; num_partitions],
                arrived: 0,
                last: None,
                poisoned: None,
                departed: vec![false; num_partitions],
            }),
            cv: Condvar::new(),
            timeout,
        }
    }

    pub fn contribute(&self, partition: PartitionId, values: Vec<u64>) -> Result<Table, TransportError> {
        let mut st = self.state.lock().unwrap();
        if let Some(r) = &st.poisoned {
            return Err(TransportError::Aborted(r.clone()));
        }
        if partition >= st.slots.len() || st.slots[partition].is_some() {
            return Err(TransportError::Protocol(format!("unexpected gather contribution from {partition}")));
        }
        if let Some(p) = st.departed.iter().position(|&d| d) {
            let reason = format!("partition {p} left before the collective");
            st.poisoned = Some(reason.clone());
            self.cv.notify_all();
            return Err(TransportError::Aborted(reason));
        }
        let generation = st.generation;
        st.slots[partition] = Some(values);
        st.arrived += 1;
        if st.arrived == st.slots.len() {
            let table: Table = Arc::new(st.slots.iter_mut().map(|s| s.take().unwrap()).collect());
            st.arrived = 0;
            st.generation += 1;
            st.last = Some((generation, table.clone()));
            self.cv.notify_all();
            return Ok(table);
        }
        let deadline = Instant::now() + self.timeout;
        loop {
            if let Some(r) = &st.poisoned {
                return Err(TransportError::Aborted(r.clone()));
            }
            if st.generation != generation {
                let (g, table) = st.last.as_ref().expect("completed round");
                debug_assert_eq!(*g, generation);
                return Ok(table.clone());
            }
            let now = Instant::now();
            if now >= deadline {
                let missing = st.slots.iter().position(Option::is_none).unwrap_or(0);
                return Err(TransportError::Timeout { partition: missing });
            }
            st = self.cv.wait_timeout(st, deadline - now).unwrap().0;
        }
    }

    pub fn poison(&self, reason: &str) {
        let mut st = self.state.lock().unwrap();
        st.poisoned.get_or_insert_with(|| reason.to_string());
        self.cv.notify_all();
    }

    /// A worker's control connection closed. Pending rounds fail; so does any
    /// later round.
    pub fn depart(&self, partition: PartitionId) {
        let mut st = self.state.lock().unwrap();
        if partition < st.departed.len() {
            st.departed[partition] = true;
        }
        if st.arrived > 0 {
            st.poisoned.get_or_insert_with(|| format!("partition {partition} disconnected"));
            self.cv.notify_all();
        }
    }
}
