//! Distributed graph pattern mining over a 1-D partitioned graph.
//!
//! Modules follow the data path: [`graph`] loads and partitions the input,
//! [`plan`] describes how each pattern is enumerated, [`engine`] runs the
//! plans chunk by chunk, [`sharing`] and [`transport`] supply remote edge
//! lists.

pub mod engine;
pub mod graph;
pub mod plan;
pub mod sharing;
pub mod transport;

use std::sync::Arc;

use engine::{EngineConfig, EngineError, RunOutput};
use graph::{CanonicalGraph, PartitionedGraph};
use plan::PatternApp;
use transport::{InProcessCluster, Transport, TransportError, TransportOptions};

/// Partitions `graph` over `workers` in-process workers, runs `app` on all
/// of them concurrently and returns each worker's output, by partition.
pub fn run_in_process(
    graph: &CanonicalGraph,
    workers: usize,
    app: &PatternApp,
    cfg: &EngineConfig,
) -> Result<Vec<RunOutput>, EngineError> {
    let parts = graph.partition(workers).map_err(|e| EngineError::Config(e.to_string()))?;
    run_partitions(parts, app, cfg)
}

/// Runs `app` on already partitioned data, one thread per partition, over
/// the in-process transport.
///
/// When workers fail, the reported error is the first one that is not a
/// consequence of another worker aborting.
pub fn run_partitions(
    parts: Vec<PartitionedGraph>,
    app: &PatternApp,
    cfg: &EngineConfig,
) -> Result<Vec<RunOutput>, EngineError> {
    let parts: Vec<Arc<_>> = parts.into_iter().map(Arc::new).collect();
    let endpoints = InProcessCluster::start(parts.clone(), TransportOptions::default())?;
    let results: Vec<Result<RunOutput, EngineError>> = std::thread::scope(|s| {
        let handles: Vec<_> = parts
            .into_iter()
            .zip(endpoints)
            .map(|(part, ep)| {
                s.spawn(move || {
                    let ep: Arc<dyn Transport> = Arc::new(ep);
                    engine::run(part, ep, app, cfg)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut outs = Vec::with_capacity(results.len());
    let mut first_err = None;
    for r in results {
        match r {
            Ok(o) => outs.push(o),
            Err(e) => {
                let secondary = matches!(e, EngineError::Transport(TransportError::Aborted(_) | TransportError::Disconnected { .. }));
                match &first_err {
                    None => first_err = Some((secondary, e)),
                    Some((true, _)) if !secondary => first_err = Some((false, e)),
                    _ => {}
                }
            }
        }
    }
    match first_err {
        Some((_, e)) => Err(e),
        None => Ok(outs),
    }
}
