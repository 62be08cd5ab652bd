//! Loopback HTTP stub of a chat-completion server for offline tests.

use std::io::{BufRead, BufReader, Read, Write};
use std::net::{TcpListener, TcpStream};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Duration;

use serde_json::json;

/// Scripted behaviour for one incoming request.
#[derive(Clone, Debug)]
pub struct MockReply {
    pub delay: Duration,
    pub status: u16,
    pub body: String,
}

impl MockReply {
    /// A well-formed completion whose first choice carries `content`.
    pub fn content(content: &str) -> Self {
        MockReply {
            delay: Duration::ZERO,
            status: 200,
            body: json!({"choices": [{"index": 0, "message": {"role": "assistant", "content": content}}]}).to_string(),
        }
    }

    pub fn status(code: u16) -> Self {
        MockReply {
            delay: Duration::ZERO,
            status: code,
            body: "{}".into(),
        }
    }

    pub fn raw(body: &str) -> Self {
        MockReply {
            delay: Duration::ZERO,
            status: 200,
            body: body.into(),
        }
    }

    pub fn delayed(self, delay: Duration) -> Self {
        MockReply { delay, ..self }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RecordedRequest {
    pub method: String,
    pub path: String,
    pub headers: Vec<(String, String)>,
    pub body: Vec<u8>,
}

impl RecordedRequest {
    pub fn header(&self, name: &str) -> Option<&str> {
        self.headers
            .iter()
            .find(|(k, _)| k.eq_ignore_ascii_case(name))
            .map(|(_, v)| v.as_str())
    }
}

/// Serves the scripted replies in order, repeating the last one once exhausted.
pub struct MockServer {
    port: u16,
    requests: Arc<Mutex<Vec<RecordedRequest>>>,
}

impl MockServer {
    pub fn start(replies: Vec<MockReply>) -> std::io::Result<Self> {
        assert!(!replies.is_empty(), "mock server needs at least one reply");
        let listener = TcpListener::bind("127.0.0.1:0")?;
        let port = listener.local_addr()?.port();
        let requests = Arc::new(Mutex::new(Vec::new()));
        let counter = Arc::new(AtomicUsize::new(0));
        let replies = Arc::new(replies);
        let log = Arc::clone(&requests);
        std::thread::spawn(move || {
            for stream in listener.incoming().flatten() {
                let (log, counter, replies) = (Arc::clone(&log), Arc::clone(&counter), Arc::clone(&replies));
                std::thread::spawn(move || {
                    let _ = serve(stream, &log, &counter, &replies);
                });
            }
        });
        Ok(MockServer { port, requests })
    }

    /// Base URL to use as a backend endpoint.
    pub fn endpoint(&self) -> String {
        format!("http://127.0.0.1:{}/v1", self.port)
    }

    pub fn requests(&self) -> Vec<RecordedRequest> {
        self.requests.lock().expect("request log").clone()
    }

    pub fn hits(&self) -> usize {
        self.requests.lock().expect("request log").len()
    }
}

fn serve(
    stream: TcpStream,
    log: &Mutex<Vec<RecordedRequest>>,
    counter: &AtomicUsize,
    replies: &[MockReply],
) -> std::io::Result<()> {
    let mut reader = BufReader::new(stream.try_clone()?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    let mut parts = line.split_whitespace();
    let method = parts.next().unwrap_or_default().to_string();
    let path = parts.next().unwrap_or_default().to_string();
    let mut headers = Vec::new();
    loop {
        line.clear();
        reader.read_line(&mut line)?;
        let l = line.trim_end();
        if l.is_empty() {
            break;
        }
        if let Some((k, v)) = l.split_once(':') {
            headers.push((k.trim().to_string(), v.trim().to_string()));
        }
    }
    let length = headers
        .iter()
        .find(|(k, _)| k.eq_ignore_ascii_case("content-length"))
        .and_then(|(_, v)| v.parse::<usize>().ok())
        .unwrap_or(0);
    let mut body = vec![0; length];
    reader.read_exact(&mut body)?;
    let index = counter.fetch_add(1, Ordering::SeqCst);
    log.lock().expect("request log").push(RecordedRequest {
        method,
        path,
        headers,
        body,
    });
    let reply = &replies[index.min(replies.len() - 1)];
    std::thread::sleep(reply.delay);
    let mut stream = stream;
    write!(
        stream,
        "HTTP/1.1 {} MOCK\r\nContent-Type: application/json\r\nContent-Length: {}\r\nConnection: close\r\n\r\n{}",
        reply.status,
        reply.body.len(),
        reply.body
    )?;
    stream.flush()
}
