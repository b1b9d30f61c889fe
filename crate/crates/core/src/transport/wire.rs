//! Frame encoding. See `docs/wire-protocol.md` for the byte layout.

use std::io::{self, Read, Write};

use crate::graph::VertexId;

pub const WIRE_MAGIC: u32 = u32::from_le_bytes(*b"GPMW");
pub const WIRE_VERSION: u16 = 1;
pub const HEADER_LEN: usize = 24;
/// Upper bound on a single payload, to reject garbage lengths early.
pub const MAX_PAYLOAD: u64 = 1 << 34;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u16)]
pub enum MsgType {
    FetchRequest = 1,
    FetchResponse = 2,
    Error = 3,
    Gather = 4,
    GatherReply = 5,
}

impl MsgType {
    fn from_u16(t: u16) -> Option<Self> {
        Some(match t {
            1 => Self::FetchRequest,
            2 => Self::FetchResponse,
            3 => Self::Error,
            4 => Self::Gather,
            5 => Self::GatherReply,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum ErrorCode {
    NotOwned = 1,
    Malformed = 2,
    Aborted = 3,
}

impl ErrorCode {
    fn from_u64(c: u64) -> Self {
        match c {
            1 => Self::NotOwned,
            3 => Self::Aborted,
            _ => Self::Malformed,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    FetchRequest { request_id: u64, requester: u64, vertices: Vec<VertexId> },
    FetchResponse { request_id: u64, lists: Vec<(VertexId, Vec<VertexId>)> },
    Error { request_id: u64, code: ErrorCode, vertex: u64, message: String },
    Gather { request_id: u64, partition: u64, values: Vec<u64> },
    GatherReply { request_id: u64, values: Vec<Vec<u64>> },
}

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum WireError {
    #[error("bad magic {0:#x}")]
    Magic(u32),
    #[error("unsupported version {0}")]
    Version(u16),
    #[error("unknown message type {0}")]
    Type(u16),
    #[error("truncated frame")]
    Truncated,
    #[error("payload length {declared} does not match {actual}")]
    Length { declared: u64, actual: u64 },
    #[error("value {0} out of range")]
    Range(u64),
    #[error("invalid utf-8 in error message")]
    Utf8,
}

impl Message {
    pub fn request_id(&self) -> u64 {
        match self {
            Message::FetchRequest { request_id, .. }
            | Message::FetchResponse { request_id, .. }
            | Message::Error { request_id, .. }
            | Message::Gather { request_id, .. }
            | Message::GatherReply { request_id, .. } => *request_id,
        }
    }

    fn msg_type(&self) -> MsgType {
        match self {
            Message::FetchRequest { .. } => MsgType::FetchRequest,
            Message::FetchResponse { .. } => MsgType::FetchResponse,
            Message::Error { .. } => MsgType::Error,
            Message::Gather { .. } => MsgType::Gather,
            Message::GatherReply { .. } => MsgType::GatherReply,
        }
    }

    /// Full frame: header followed by payload.
    pub fn encode(&self) -> Vec<u8> {
        let mut p = Vec::new();
        let put = |p: &mut Vec<u8>, x: u64| p.extend_from_slice(&x.to_le_bytes());
        match self {
            Message::FetchRequest { requester, vertices, .. } => {
                put(&mut p, *requester);
                put(&mut p, vertices.len() as u64);
                vertices.iter().for_each(|&v| put(&mut p, u64::from(v)));
            }
            Message::FetchResponse { lists, .. } => {
                put(&mut p, lists.len() as u64);
                for (v, list) in lists {
                    put(&mut p, u64::from(*v));
                    put(&mut p, list.len() as u64);
                    list.iter().for_each(|&u| put(&mut p, u64::from(u)));
                }
            }
            Message::Error { code, vertex, message, .. } => {
                put(&mut p, *code as u64);
                put(&mut p, *vertex);
                put(&mut p, message.len() as u64);
                p.extend_from_slice(message.as_bytes());
            }
            Message::Gather { partition, values, .. } => {
                put(&mut p, *partition);
                put(&mut p, values.len() as u64);
                values.iter().for_each(|&x| put(&mut p, x));
            }
            Message::GatherReply { values, .. } => {
                put(&mut p, values.len() as u64);
                for vs in values {
                    put(&mut p, vs.len() as u64);
                    vs.iter().for_each(|&x| put(&mut p, x));
                }
            }
        }
        let mut frame = Vec::with_capacity(HEADER_LEN + p.len());
        frame.extend_from_slice(&WIRE_MAGIC.to_le_bytes());
        frame.extend_from_slice(&WIRE_VERSION.to_le_bytes());
        frame.extend_from_slice(&(self.msg_type() as u16).to_le_bytes());
        frame.extend_from_slice(&self.request_id().to_le_bytes());
        frame.extend_from_slice(&(p.len() as u64).to_le_bytes());
        frame.extend_from_slice(&p);
        frame
    }

    pub fn decode(frame: &[u8]) -> Result<Message, WireError> {
        let (ty, request_id, payload_len) = decode_header(frame)?;
        let payload = &frame[HEADER_LEN..];
        if payload.len() as u64 != payload_len {
            return Err(WireError::Length { declared: payload_len, actual: payload.len() as u64 });
        }
        let mut r = Cursor { buf: payload, pos: 0 };
        let msg = match ty {
            MsgType::FetchRequest => {
                let requester = r.u64()?;
                let n = r.len()?;
                let vertices = (0..n).map(|_| r.vertex()).collect::<Result<_, _>>()?;
                Message::FetchRequest { request_id, requester, vertices }
            }
            MsgType::FetchResponse => {
                let n = r.len()?;
                let mut lists = Vec::with_capacity(n.min(1 << 16));
                for _ in 0..n {
                    let v = r.vertex()?;
                    let d = r.len()?;
                    let list = (0..d).map(|_| r.vertex()).collect::<Result<_, _>>()?;
                    lists.push((v, list));
                }
                Message::FetchResponse { request_id, lists }
            }
            MsgType::Error => {
                let code = ErrorCode::from_u64(r.u64()?);
                let vertex = r.u64()?;
                let n = r.len()?;
                let bytes = r.bytes(n)?;
                let message = String::from_utf8(bytes.to_vec()).map_err(|_| WireError::Utf8)?;
                Message::Error { request_id, code, vertex, message }
            }
            MsgType::Gather => {
                let partition = r.u64()?;
                let n = r.len()?;
                let values = (0..n).map(|_| r.u64()).collect::<Result<_, _>>()?;
                Message::Gather { request_id, partition, values }
            }
            MsgType::GatherReply => {
                let n = r.len()?;
                let mut values = Vec::with_capacity(n.min(1 << 10));
                for _ in 0..n {
                    let m = r.len()?;
                    values.push((0..m).map(|_| r.u64()).collect::<Result<_, _>>()?);
                }
                Message::GatherReply { request_id, values }
            }
        };
        if r.pos != payload.len() {
            return Err(WireError::Length { declared: payload_len, actual: r.pos as u64 });
        }
        Ok(msg)
    }
}

fn decode_header(frame: &[u8]) -> Result<(MsgType, u64, u64), WireError> {
    if frame.len() < HEADER_LEN {
        return Err(WireError::Truncated);
    }
    let magic = u32::from_le_bytes(frame[0..4].try_into().unwrap());
    if magic != WIRE_MAGIC {
        return Err(WireError::Magic(magic));
    }
    let version = u16::from_le_bytes(frame[4..6].try_into().unwrap());
    if version != WIRE_VERSION {
        return Err(WireError::Version(version));
    }
    let t = u16::from_le_bytes(frame[6..8].try_into().unwrap());
    let ty = MsgType::from_u16(t).ok_or(WireError::Type(t))?;
    let id = u64::from_le_bytes(frame[8..16].try_into().unwrap());
    let len = u64::from_le_bytes(frame[16..24].try_into().unwrap());
    Ok((ty, id, len))
}

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl Cursor<'_> {
    fn u64(&mut self) -> Result<u64, WireError> {
        let b = self.bytes(8)?;
        Ok(u64::from_le_bytes(b.try_into().unwrap()))
    }

    fn vertex(&mut self) -> Result<VertexId, WireError> {
        let x = self.u64()?;
        VertexId::try_from(x).map_err(|_| WireError::Range(x))
    }

    // element count, sanity-checked against the remaining bytes
    fn len(&mut self) -> Result<usize, WireError> {
        let x = self.u64()?;
        if x > (self.buf.len() - self.pos) as u64 {
            return Err(WireError::Truncated);
        }
        Ok(x as usize)
    }

    fn bytes(&mut self, n: usize) -> Result<&[u8], WireError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len()).ok_or(WireError::Truncated)?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }
}

/// Reads one frame from a stream. `Ok(None)` on a clean end of stream.
pub fn read_frame<R: Read>(r: &mut R) -> io::Result<Option<Vec<u8>>> {
    let mut header = [0u8; HEADER_LEN];
    let mut got = 0;
    while got < HEADER_LEN {
        match r.read(&mut header[got..]) {
            Ok(0) if got == 0 => return Ok(None),
            Ok(0) => return Err(io::ErrorKind::UnexpectedEof.into()),
            Ok(n) => got += n,
            Err(e) if e.kind() == io::ErrorKind::Interrupted => {}
            Err(e) => return Err(e),
        }
    }
    let len = u64::from_le_bytes(header[16..24].try_into().unwrap());
    if len > MAX_PAYLOAD {
        return Err(io::Error::new(io::ErrorKind::InvalidData, "frame too large"));
    }
    let mut frame = vec![0u8; HEADER_LEN + len as usize];
    frame[..HEADER_LEN].copy_from_slice(&header);
    r.read_exact(&mut frame[HEADER_LEN..])?;
    Ok(Some(frame))
}

pub fn write_frame<W: Write>(w: &mut W, frame: &[u8]) -> io::Result<()> {
    w.write_all(frame)?;
    w.flush()
}
