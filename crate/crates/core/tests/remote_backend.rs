//! Wire-contract tests for the remote backend against an in-process HTTP
//! stub: request shapes, idempotency keys, retry-with-backoff behavior, and
//! the batched eval path.

use std::io::{Read, Write};
use std::net::TcpListener;
use std::sync::{Arc, Mutex};
use std::time::Duration;

use autocur_core::backend::remote::{RemoteBackend, RemoteConfig};
use autocur_core::backend::{evaluate_policy, BackendError, PolicyBackend};
use autocur_core::problem::synthetic_dataset;
use autocur_core::signals::RolloutRecord;

#[derive(Debug, Clone)]
struct SeenRequest {
    path: String,
    idempotency_key: String,
    body: String,
}

/// Serves a fixed script of `(status, body)` responses, one per connection,
/// and records everything it saw.
struct StubServer {
    base_url: String,
    seen: Arc<Mutex<Vec<SeenRequest>>>,
    handle: Option<std::thread::JoinHandle<()>>,
}

impl StubServer {
    fn start(script: Vec<(u16, String)>) -> StubServer {
        let listener = TcpListener::bind("127.0.0.1:0").expect("bind stub");
        let addr = listener.local_addr().unwrap();
        let seen: Arc<Mutex<Vec<SeenRequest>>> = Arc::default();
        let seen_thread = Arc::clone(&seen);
        let handle = std::thread::spawn(move || {
            for (status, body) in script {
                let (mut stream, _) = match listener.accept() {
                    Ok(pair) => pair,
                    Err(_) => return,
                };
                stream
                    .set_read_timeout(Some(Duration::from_secs(5)))
                    .unwrap();
                let request = read_request(&mut stream);
                seen_thread.lock().unwrap().push(request);
                let reason = match status {
                    200 => "OK",
                    400 => "Bad Request",
                    _ => "Internal Server Error",
                };
                let response = format!(
                    "HTTP/1.1 {status} {reason}\r\nContent-Type: application/json\r\n\
                     Content-Length: {}\r\nConnection: close\r\n\r\n{body}",
                    body.len()
                );
                let _ = stream.write_all(response.as_bytes());
            }
        });
        StubServer {
            base_url: format!("http://{addr}"),
            seen,
            handle: Some(handle),
        }
    }

    fn requests(&self) -> Vec<SeenRequest> {
        self.seen.lock().unwrap().clone()
    }
}

impl Drop for StubServer {
    fn drop(&mut self) {
        if let Some(handle) = self.handle.take() {
            let _ = handle.join();
        }
    }
}

fn read_request(stream: &mut std::net::TcpStream) -> SeenRequest {
    let mut buf = Vec::new();
    let mut chunk = [0u8; 1024];
    let header_end = loop {
        let n = stream.read(&mut chunk).expect("read request");
        buf.extend_from_slice(&chunk[..n]);
        if let Some(pos) = find_subslice(&buf, b"\r\n\r\n") {
            break pos + 4;
        }
        if n == 0 {
            break buf.len();
        }
    };
    let head = String::from_utf8_lossy(&buf[..header_end]).to_string();
    let mut path = String::new();
    let mut idempotency_key = String::new();
    let mut content_length = 0usize;
    for (i, line) in head.lines().enumerate() {
        if i == 0 {
            path = line.split_whitespace().nth(1).unwrap_or("").to_string();
        } else if let Some((name, value)) = line.split_once(':') {
            match name.trim().to_ascii_lowercase().as_str() {
                "idempotency-key" => idempotency_key = value.trim().to_string(),
                "content-length" => content_length = value.trim().parse().unwrap_or(0),
                _ => {}
            }
        }
    }
    let mut body_bytes = buf[header_end..].to_vec();
    while body_bytes.len() < content_length {
        let n = stream.read(&mut chunk).expect("read body");
        if n == 0 {
            break;
        }
        body_bytes.extend_from_slice(&chunk[..n]);
    }
    SeenRequest {
        path,
        idempotency_key,
        body: String::from_utf8_lossy(&body_bytes).to_string(),
    }
}

fn find_subslice(haystack: &[u8], needle: &[u8]) -> Option<usize> {
    haystack.windows(needle.len()).position(|w| w == needle)
}

fn backend_for(server: &StubServer) -> RemoteBackend {
    let mut config = RemoteConfig::new(server.base_url.clone());
    config.backoff_base = Duration::from_millis(5);
    config.request_timeout = Duration::from_secs(5);
    config.auth_token = None;
    RemoteBackend::new(config)
}

#[test]
fn generate_round_trip_and_request_shape() {
    let server = StubServer::start(vec![(
        200,
        "{\"responses\": [\"\\\\boxed{42}\", \"\\\\boxed{41}\"]}".to_string(),
    )]);
    let backend = backend_for(&server);
    let problem = &synthetic_dataset(1, 3)[0];
    let responses = backend.generate(problem, 1.0, 1024, &[11, 12]).unwrap();
    assert_eq!(responses.len(), 2);
    assert_eq!(responses[0], "\\boxed{42}");

    let seen = server.requests();
    assert_eq!(seen.len(), 1);
    assert_eq!(seen[0].path, "/generate");
    let body: serde_json::Value = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(body["n"], 2);
    assert_eq!(body["seed"], 11);
    assert_eq!(body["temperature"], 1.0);
    assert_eq!(body["max_new_tokens"], 1024);
    assert_eq!(body["problem_id"], problem.id.as_str());
    assert!(body["prompt"]
        .as_str()
        .unwrap()
        .contains(&problem.statement));
    assert!(!seen[0].idempotency_key.is_empty());
}

#[test]
fn transient_failure_retries_with_same_idempotency_key() {
    let server = StubServer::start(vec![
        (500, "{}".to_string()),
        (200, "{\"responses\": [\"ok 7\"]}".to_string()),
    ]);
    let backend = backend_for(&server);
    let problem = &synthetic_dataset(1, 3)[0];
    let responses = backend.generate(problem, 0.0, 64, &[5]).unwrap();
    assert_eq!(responses, vec!["ok 7".to_string()]);

    let seen = server.requests();
    assert_eq!(seen.len(), 2, "one retry after the 500");
    assert_eq!(seen[0].idempotency_key, seen[1].idempotency_key);
}

#[test]
fn exhausted_retries_become_transport_error() {
    let server = StubServer::start(vec![
        (500, "{}".to_string()),
        (500, "{}".to_string()),
        (500, "{}".to_string()),
    ]);
    let backend = backend_for(&server);
    let problem = &synthetic_dataset(1, 3)[0];
    let err = backend.generate(problem, 0.0, 64, &[5]).unwrap_err();
    assert!(matches!(err, BackendError::Transport(_)), "got {err:?}");
    assert_eq!(server.requests().len(), 3, "three attempts, no more");
}

#[test]
fn client_error_is_contract_violation_without_retry() {
    let server = StubServer::start(vec![(400, "{}".to_string())]);
    let backend = backend_for(&server);
    let problem = &synthetic_dataset(1, 3)[0];
    let err = backend.generate(problem, 0.0, 64, &[5]).unwrap_err();
    assert!(matches!(err, BackendError::Contract(_)), "got {err:?}");
    assert_eq!(server.requests().len(), 1, "4xx must not be retried");
}

#[test]
fn response_count_mismatch_is_contract_violation() {
    let server = StubServer::start(vec![(200, "{\"responses\": [\"one\"]}".to_string())]);
    let backend = backend_for(&server);
    let problem = &synthetic_dataset(1, 3)[0];
    let err = backend.generate(problem, 1.0, 64, &[1, 2, 3]).unwrap_err();
    assert!(matches!(err, BackendError::Contract(_)));
}

#[test]
fn update_posts_group_and_returns_first_loss() {
    let server = StubServer::start(vec![(200, "{\"losses\": [-0.25]}".to_string())]);
    let mut backend = backend_for(&server);
    let problem = &synthetic_dataset(1, 3)[0];
    let rollouts: Vec<RolloutRecord> = ["\\boxed{7}", "\\boxed{9}"]
        .iter()
        .enumerate()
        .map(|(i, r)| RolloutRecord::score(i, r.to_string(), "7", i as u64))
        .collect();
    let loss = backend
        .apply_update(problem, &rollouts, &[1.0, -1.0], 2e-5)
        .unwrap();
    assert_eq!(loss, -0.25);

    let seen = server.requests();
    assert_eq!(seen[0].path, "/update");
    let body: serde_json::Value = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(body["max_steps"], 1);
    assert_eq!(body["learning_rate"], 2e-5);
    assert_eq!(body["rollouts"].as_array().unwrap().len(), 2);
    assert_eq!(body["advantages"][0], 1.0);
}

#[test]
fn evaluation_uses_the_batched_eval_endpoint() {
    let testset = synthetic_dataset(3, 9);
    let responses: Vec<String> = testset
        .iter()
        .map(|p| format!("\\boxed{{{}}}", p.ground_truth))
        .collect();
    let body = serde_json::to_string(&serde_json::json!({ "responses": responses })).unwrap();
    let server = StubServer::start(vec![(200, body)]);
    let backend = backend_for(&server);
    let report = evaluate_policy(&backend, &testset).unwrap();
    assert_eq!(report.accuracy, 1.0);

    let seen = server.requests();
    assert_eq!(seen.len(), 1, "one batched call for the whole testset");
    assert_eq!(seen[0].path, "/eval");
    let body: serde_json::Value = serde_json::from_str(&seen[0].body).unwrap();
    assert_eq!(body["temperature"], 0.0);
    assert_eq!(body["prompts"].as_array().unwrap().len(), 3);
}
