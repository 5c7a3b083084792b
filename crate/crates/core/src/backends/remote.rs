//! Client for out-of-process backends.
//!
//! Newline-delimited JSON over a child's stdio or a TCP connection:
//!
//! ```text
//! {"id":0,"op":"hello"}                                  -> {"id":0,"embed_dim":D}
//! {"id":n,"op":"segment","frame":F,"text":T}             -> {"id":n,"mask":RLE,"confidence":c}
//! {"id":n,"op":"embed_masked","frame":F,"mask":RLE}      -> {"id":n,"embedding":[...]}
//! {"id":n,"op":"embed_text","text":T}                    -> {"id":n,"embedding":[...]}
//! any                                                    -> {"id":n,"error":code,"message":m}
//! ```
//!
//! `F` is `{"w":W,"h":H,"rgb_b64":...}` with the row-major RGB bytes in
//! standard base64. Requests on one session are serialized; replies are
//! matched by `id`.

use std::io::{BufRead, BufReader, Write};
use std::net::TcpStream;
use std::process::{Child, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine as _;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::backends::{Aligner, Backend, Embedding, SegmentationResult, Segmenter};
use crate::error::{Error, Result};
use crate::mask::{BinaryMask, RleMask};
use crate::types::Frame;

pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(30);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WireFrame {
    pub w: usize,
    pub h: usize,
    pub rgb_b64: String,
}

impl WireFrame {
    pub fn from_frame(frame: &Frame) -> Self {
        Self {
            w: frame.width(),
            h: frame.height(),
            rgb_b64: B64.encode(frame.pixels()),
        }
    }

    pub fn to_frame(&self, index: usize) -> Result<Frame> {
        let pixels = B64
            .decode(&self.rgb_b64)
            .map_err(|e| Error::Protocol(format!("rgb_b64: {e}")))?;
        Frame::new(index, self.w, self.h, pixels)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Request {
    pub id: u64,
    pub op: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frame: Option<WireFrame>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mask: Option<RleMask>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
}

impl Request {
    fn new(op: &str) -> Self {
        Self {
            id: 0,
            op: op.to_string(),
            frame: None,
            mask: None,
            text: None,
        }
    }
}

struct Connection {
    writer: Box<dyn Write + Send>,
    lines: Receiver<std::io::Result<String>>,
    next_id: u64,
    child: Option<Child>,
}

impl Connection {
    fn open(selector: &str) -> Result<Self> {
        let (tx, rx) = mpsc::channel();
        let spawn_reader = |reader: Box<dyn std::io::Read + Send>| {
            std::thread::spawn(move || {
                for line in BufReader::new(reader).lines() {
                    if tx.send(line).is_err() {
                        break;
                    }
                }
            });
        };
        if let Some(command) = selector.strip_prefix("stdio:") {
            let mut child = Command::new("sh")
                .arg("-c")
                .arg(command)
                .stdin(Stdio::piped())
                .stdout(Stdio::piped())
                .stderr(Stdio::inherit())
                .spawn()
                .map_err(|e| Error::HandshakeFailure(format!("spawning {command:?}: {e}")))?;
            let stdin = child.stdin.take().expect("stdin is piped");
            let stdout = child.stdout.take().expect("stdout is piped");
            spawn_reader(Box::new(stdout));
            Ok(Self {
                writer: Box::new(stdin),
                lines: rx,
                next_id: 0,
                child: Some(child),
            })
        } else if let Some(addr) = selector.strip_prefix("tcp:") {
            let stream = TcpStream::connect(addr)
                .map_err(|e| Error::HandshakeFailure(format!("connecting to {addr}: {e}")))?;
            let reader = stream
                .try_clone()
                .map_err(|e| Error::HandshakeFailure(e.to_string()))?;
            spawn_reader(Box::new(reader));
            Ok(Self {
                writer: Box::new(stream),
                lines: rx,
                next_id: 0,
                child: None,
            })
        } else {
            Err(Error::invalid("backend selector", selector.to_string()))
        }
    }

    fn call(&mut self, mut request: Request, timeout: Duration) -> Result<Value> {
        let id = self.next_id;
        self.next_id += 1;
        request.id = id;
        let mut line = serde_json::to_vec(&request)?;
        line.push(b'\n');
        self.writer
            .write_all(&line)
            .and_then(|_| self.writer.flush())
            .map_err(|e| Error::Protocol(format!("writing request: {e}")))?;

        let deadline = Instant::now() + timeout;
        loop {
            let remaining = deadline.saturating_duration_since(Instant::now());
            let line = match self.lines.recv_timeout(remaining) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => return Err(Error::Protocol(format!("reading reply: {e}"))),
                Err(RecvTimeoutError::Timeout) => return Err(Error::BackendTimeout(timeout)),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(Error::Protocol("backend closed the stream".into()))
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let reply: Value = serde_json::from_str(&line)
                .map_err(|e| Error::Protocol(format!("malformed reply: {e}")))?;
            let reply_id = reply
                .get("id")
                .and_then(Value::as_u64)
                .ok_or_else(|| Error::Protocol("reply without numeric id".into()))?;
            if reply_id < id {
                // Late answer to a request that already timed out.
                continue;
            }
            if reply_id > id {
                return Err(Error::Protocol(format!(
                    "reply id {reply_id} while waiting for {id}"
                )));
            }
            if let Some(code) = reply.get("error") {
                let message = reply.get("message").and_then(Value::as_str).unwrap_or("");
                return Err(Error::Protocol(format!("backend error {code}: {message}")));
            }
            return Ok(reply);
        }
    }
}

impl Drop for Connection {
    fn drop(&mut self) {
        if let Some(child) = &mut self.child {
            let _ = child.kill();
            let _ = child.wait();
        }
    }
}

/// A connected remote backend.
pub struct RemoteSession {
    conn: Mutex<Connection>,
    embed_dim: usize,
    timeout: Duration,
}

impl std::fmt::Debug for RemoteSession {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RemoteSession")
            .field("embed_dim", &self.embed_dim)
            .field("timeout", &self.timeout)
            .finish()
    }
}

impl RemoteSession {
    /// Connects and performs the `hello` handshake.
    pub fn connect(selector: &str, timeout: Duration) -> Result<Self> {
        let mut conn = Connection::open(selector)?;
        let reply = conn
            .call(Request::new("hello"), timeout)
            .map_err(|e| Error::HandshakeFailure(e.to_string()))?;
        let embed_dim = reply
            .get("embed_dim")
            .and_then(Value::as_u64)
            .filter(|&d| d >= 1)
            .ok_or_else(|| Error::HandshakeFailure(format!("bad hello reply {reply}")))?
            as usize;
        Ok(Self {
            conn: Mutex::new(conn),
            embed_dim,
            timeout,
        })
    }

    pub fn embed_dim(&self) -> usize {
        self.embed_dim
    }

    fn call(&self, request: Request) -> Result<Value> {
        let mut conn = self
            .conn
            .lock()
            .map_err(|_| Error::Protocol("session poisoned by an earlier panic".into()))?;
        conn.call(request, self.timeout)
    }

    fn embedding(&self, reply: &Value) -> Result<Embedding> {
        let values: Vec<f64> = reply
            .get("embedding")
            .cloned()
            .map(serde_json::from_value)
            .transpose()
            .map_err(|e| Error::Protocol(format!("embedding: {e}")))?
            .ok_or_else(|| Error::Protocol("reply without embedding".into()))?;
        if values.len() != self.embed_dim {
            return Err(Error::Protocol(format!(
                "embedding has {} values, session declared {}",
                values.len(),
                self.embed_dim
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Protocol("non-finite embedding value".into()));
        }
        Ok(Embedding(values))
    }
}

impl Segmenter for RemoteSession {
    fn segment(&self, frame: &Frame, text: &str) -> Result<SegmentationResult> {
        let mut req = Request::new("segment");
        req.frame = Some(WireFrame::from_frame(frame));
        req.text = Some(text.to_string());
        let reply = self.call(req)?;
        let rle: RleMask = reply
            .get("mask")
            .cloned()
            .map(serde_json::from_value)
            .transpose()
            .map_err(|e| Error::Protocol(format!("mask: {e}")))?
            .ok_or_else(|| Error::Protocol("reply without mask".into()))?;
        let mask = rle.decode().map_err(|e| Error::Protocol(e.to_string()))?;
        let confidence = reply
            .get("confidence")
            .and_then(Value::as_f64)
            .ok_or_else(|| Error::Protocol("reply without numeric confidence".into()))?;
        let result = SegmentationResult { mask, confidence };
        result.validate(frame)?;
        Ok(result)
    }
}

impl Aligner for RemoteSession {
    fn embed_masked_image(&self, frame: &Frame, mask: &BinaryMask) -> Result<Embedding> {
        mask.ensure_dims(frame.width(), frame.height())?;
        let mut req = Request::new("embed_masked");
        req.frame = Some(WireFrame::from_frame(frame));
        req.mask = Some(mask.to_rle());
        let reply = self.call(req)?;
        self.embedding(&reply)
    }

    fn embed_text(&self, text: &str) -> Result<Embedding> {
        let mut req = Request::new("embed_text");
        req.text = Some(text.to_string());
        let reply = self.call(req)?;
        self.embedding(&reply)
    }
}

impl Backend for RemoteSession {
    fn concurrent(&self) -> bool {
        false
    }
}
