//! Flat `key=value` run report.
//!
//! Per-worker lines are `worker.<i>.<name>=<value>`; global counts are
//! `global.<pattern>=<count>`.

use std::collections::BTreeMap;
use std::fmt::{self, Display};
use std::str::FromStr;
use std::time::Duration;

use gpm_core::engine::RunOutput;
use gpm_core::graph::VertexId;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum ReportError {
    #[error("line {line}: expected key=value")]
    Syntax { line: usize },
    #[error("line {line}: key {key:?} must start with worker.<i>. or global.")]
    Key { line: usize, key: String },
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    entries: Vec<(String, String)>,
}

/// Wall time of the phases outside the engine.
#[derive(Debug, Clone, Copy, Default)]
pub struct Phases {
    pub load: Duration,
    pub partition: Duration,
}

impl Report {
    pub fn push(&mut self, key: impl Into<String>, value: impl Display) {
        let key = key.into();
        let value = value.to_string();
        debug_assert!(!key.contains(['=', '\n']) && !value.contains('\n'));
        self.entries.push((key, value));
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// Global counts once, then every worker's metrics.
    pub fn from_outputs(outs: &[RunOutput], phases: Phases, fetches: bool) -> Self {
        let mut r = Report::default();
        if let Some(first) = outs.first() {
            for (p, c) in &first.counts {
                r.push(format!("global.{p}"), c);
            }
        }
        for o in outs {
            r.add_worker(o, phases, fetches);
        }
        r
    }

    fn add_worker(&mut self, o: &RunOutput, phases: Phases, fetches: bool) {
        let m = &o.metrics;
        let i = m.partition;
        let mut put = |name: &str, v: &dyn Display| self.push(format!("worker.{i}.{name}"), v);
        put("bytes_sent", &m.bytes_sent);
        put("bytes_received", &m.bytes_received);
        put("request_bytes_sent", &m.request_bytes_sent);
        put("response_bytes_received", &m.response_bytes_received);
        put("requests_sent", &m.requests_sent);
        put("fetch_count", &m.fetch_count);
        put("cache_hits", &m.cache_hits);
        put("cache_misses", &m.cache_misses);
        put("cache_hit_rate", &format!("{:.4}", m.cache_hit_rate()));
        put("cache_bytes", &m.cache_bytes);
        put("cache_capacity", &m.cache_capacity);
        put("dedup_shared", &m.dedup_shared);
        put("dedup_dropped", &m.dedup_dropped);
        put("dedup_bytes_saved", &m.dedup_bytes_saved);
        put("cache_bytes_saved", &m.cache_bytes_saved);
        put("peak_live_chunks", &m.peak_live_chunks);
        put("peak_arena_bytes", &m.peak_arena_bytes);
        put("embeddings_created", &m.embeddings_created);
        put("ready_transitions", &m.ready_transitions);
        put("zombie_transitions", &m.zombie_transitions);
        put("terminated_transitions", &m.terminated_transitions);
        put("intersections", &m.intersections);
        put("differences", &m.differences);
        put("chunks_sealed", &join(&m.chunks_sealed));
        put("cache_size_samples", &join(&m.cache_size_samples));
        put("wall_time.load", &secs(phases.load));
        put("wall_time.partition", &secs(phases.partition));
        put("wall_time.explore", &secs(m.explore_time));
        put("wall_time.reduce", &secs(m.reduce_time));
        for (p, c) in o.counts.iter().zip(&o.local_counts) {
            put(&format!("local.{}", p.0), c);
        }
        if fetches {
            for (v, c) in &m.fetches_per_vertex {
                put(&format!("fetch.{v}"), c);
            }
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn global(&self, pattern: &str) -> Option<u64> {
        self.get(&format!("global.{pattern}"))?.parse().ok()
    }

    pub fn globals(&self) -> Vec<(&str, u64)> {
        self.entries
            .iter()
            .filter_map(|(k, v)| Some((k.strip_prefix("global.")?, v.parse().ok()?)))
            .collect()
    }

    pub fn worker(&self, i: usize, name: &str) -> Option<&str> {
        self.get(&format!("worker.{i}.{name}"))
    }

    pub fn worker_u64(&self, i: usize, name: &str) -> Option<u64> {
        self.worker(i, name)?.parse().ok()
    }

    pub fn worker_list(&self, i: usize, name: &str) -> Option<Vec<u64>> {
        let v = self.worker(i, name)?;
        if v.is_empty() {
            return Some(Vec::new());
        }
        v.split(',').map(|x| x.parse().ok()).collect()
    }

    /// Per-vertex fetch counts of worker `i` (present with `--report-fetches`).
    pub fn fetches(&self, i: usize) -> BTreeMap<VertexId, u64> {
        let prefix = format!("worker.{i}.fetch.");
        self.entries
            .iter()
            .filter_map(|(k, v)| Some((k.strip_prefix(&prefix)?.parse().ok()?, v.parse().ok()?)))
            .collect()
    }

    /// Worker indices that appear in the report, ascending.
    pub fn workers(&self) -> Vec<usize> {
        let mut ids: Vec<usize> = self
            .entries
            .iter()
            .filter_map(|(k, _)| k.strip_prefix("worker.")?.split('.').next()?.parse().ok())
            .collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }

    /// Appends all entries of `other`.
    pub fn merge(&mut self, other: Report) {
        self.entries.extend(other.entries);
    }
}

fn join(xs: &[u64]) -> String {
    xs.iter().map(u64::to_string).collect::<Vec<_>>().join(",")
}

fn secs(d: Duration) -> String {
    format!("{:.6}", d.as_secs_f64())
}

impl Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, v) in &self.entries {
            writeln!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for Report {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, ReportError> {
        let mut r = Report::default();
        for (n, line) in s.lines().enumerate() {
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or(ReportError::Syntax { line: n + 1 })?;
            let worker_key = k
                .strip_prefix("worker.")
                .and_then(|rest| rest.split_once('.'))
                .is_some_and(|(i, name)| i.parse::<usize>().is_ok() && !name.is_empty());
            let global_key = k.strip_prefix("global.").is_some_and(|p| !p.is_empty());
            if !worker_key && !global_key {
                return Err(ReportError::Key { line: n + 1, key: k.to_string() });
            }
            r.entries.push((k.to_string(), v.to_string()));
        }
        Ok(r)
    }
}

#[cfg(test)]
mod tests {
    use gpm_core::engine::RunMetrics;
    use proptest::prelude::*;

    use super::*;

    fn output(partition: usize) -> RunOutput {
        let mut metrics = RunMetrics { partition, bytes_sent: 10, cache_size_samples: vec![0, 4, 4], ..RunMetrics::default() };
        metrics.fetches_per_vertex.insert(7, 2);
        metrics.fetches_per_vertex.insert(9, 1);
        RunOutput { counts: vec![("triangle".into(), 4)], local_counts: vec![partition as u64], metrics }
    }

    #[test]
    fn run_report_round_trips() {
        let r = Report::from_outputs(&[output(0), output(1)], Phases::default(), true);
        let back: Report = r.to_string().parse().unwrap();
        assert_eq!(back, r);
        assert_eq!(back.global("triangle"), Some(4));
        assert_eq!(back.worker_u64(1, "bytes_sent"), Some(10));
        assert_eq!(back.worker_u64(1, "local.triangle"), Some(1));
        assert_eq!(back.worker_list(0, "cache_size_samples"), Some(vec![0, 4, 4]));
        assert_eq!(back.worker_list(0, "chunks_sealed"), Some(vec![]));
        assert_eq!(back.fetches(0), BTreeMap::from([(7, 2), (9, 1)]));
        assert_eq!(back.workers(), vec![0, 1]);
        assert_eq!(back.globals(), vec![("triangle", 4)]);
    }

    #[test]
    fn rejects_bad_lines() {
        assert_eq!("global.x=1\nnonsense".parse::<Report>(), Err(ReportError::Syntax { line: 2 }));
        assert!(matches!("other.x=1".parse::<Report>(), Err(ReportError::Key { line: 1, .. })));
        assert!(matches!("worker.a.x=1".parse::<Report>(), Err(ReportError::Key { .. })));
        assert_eq!("# comment\n\nglobal.t=3\n".parse::<Report>().unwrap().global("t"), Some(3));
    }

    proptest! {
        #[test]
        fn arbitrary_reports_round_trip(
            entries in prop::collection::vec((0usize..8, "[a-z_.0-9-]{1,12}", "[ -~]{0,20}"), 0..30),
        ) {
            let mut r = Report::default();
            for (i, name, value) in entries {
                if i == 0 {
                    r.push(format!("global.{name}"), value);
                } else {
                    r.push(format!("worker.{i}.{name}"), value);
                }
            }
            let back: Report = r.to_string().parse().unwrap();
            prop_assert_eq!(back, r);
        }
    }
}
