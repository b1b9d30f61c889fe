use crate::graph::{GraphError, PartitionedGraph};

use super::wire::{ErrorCode, Message};

/// Answers one request frame against the local partition.
///
/// Lists are copied into the response buffer. Requests for vertices the
/// partition does not own produce an error frame naming the first such
/// vertex.
pub fn serve_frame(graph: &PartitionedGraph, frame: &[u8]) -> Vec<u8> {
    let request_id = frame.get(8..16).map_or(0, |b| u64::from_le_bytes(b.try_into().unwrap()));
    let reply = match Message::decode(frame) {
        Ok(Message::FetchRequest { request_id, vertices, .. }) => {
            let mut lists = Vec::with_capacity(vertices.len());
            let mut failure = None;
            for v in vertices {
                match graph.local_edge_list(v) {
                    Ok(list) => lists.push((v, list.to_vec())),
                    Err(e @ GraphError::NotOwned { .. }) => {
                        failure = Some(Message::Error {
                            request_id,
                            code: ErrorCode::NotOwned,
                            vertex: u64::from(v),
                            message: e.to_string(),
                        });
                        break;
                    }
                    Err(e) => {
                        failure = Some(Message::Error { request_id, code: ErrorCode::Malformed, vertex: u64::from(v), message: e.to_string() });
                        break;
                    }
                }
            }
            failure.unwrap_or(Message::FetchResponse { request_id, lists })
        }
        Ok(other) => Message::Error {
            request_id,
            code: ErrorCode::Malformed,
            vertex: 0,
            message: format!("responder cannot handle message type of {:?}", std::mem::discriminant(&other)),
        },
        Err(e) => Message::Error { request_id, code: ErrorCode::Malformed, vertex: 0, message: e.to_string() },
    };
    reply.encode()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::preprocess;

    fn parts() -> Vec<PartitionedGraph> {
        // vertex 4 (dense) is isolated via an explicit from_edges graph
        let g = crate::graph::CanonicalGraph::from_edges(5, &[(0, 1), (1, 2), (2, 3), (3, 0)]);
        g.partition(2).unwrap()
    }

    #[test]
    fn owned_vertices_match_local_lists() {
        let p = parts();
        let req = Message::FetchRequest { request_id: 3, requester: 0, vertices: vec![1, 3] }.encode();
        let resp = Message::decode(&serve_frame(&p[1], &req)).unwrap();
        let expect: Vec<_> = [1, 3].iter().map(|&v| (v, p[1].local_edge_list(v).unwrap().to_vec())).collect();
        assert_eq!(resp, Message::FetchResponse { request_id: 3, lists: expect });
    }

    #[test]
    fn degree_zero_vertex_returns_empty_list() {
        let p = parts();
        let req = Message::FetchRequest { request_id: 1, requester: 1, vertices: vec![4] }.encode();
        assert_eq!(Message::decode(&serve_frame(&p[0], &req)).unwrap(), Message::FetchResponse { request_id: 1, lists: vec![(4, vec![])] });
    }

    #[test]
    fn non_owned_vertex_is_named_in_error() {
        let p = parts();
        let req = Message::FetchRequest { request_id: 2, requester: 1, vertices: vec![0, 1] }.encode();
        match Message::decode(&serve_frame(&p[0], &req)).unwrap() {
            Message::Error { code: ErrorCode::NotOwned, vertex: 1, request_id: 2, .. } => {}
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn repeated_request_is_byte_identical() {
        let g = preprocess(&[(0, 1), (1, 2), (2, 0), (2, 3)]);
        let p = g.partition(1).unwrap();
        let req = Message::FetchRequest { request_id: 5, requester: 0, vertices: vec![0, 2, 3] }.encode();
        assert_eq!(serve_frame(&p[0], &req), serve_frame(&p[0], &req));
    }

    #[test]
    fn garbage_gets_malformed_error() {
        let p = parts();
        match Message::decode(&serve_frame(&p[0], b"nonsense")).unwrap() {
            Message::Error { code: ErrorCode::Malformed, .. } => {}
            other => panic!("{other:?}"),
        }
    }
}
