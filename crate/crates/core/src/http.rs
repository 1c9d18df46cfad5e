//! Minimal blocking HTTP layer shared by the live LLM, weather and search clients.
//!
//! Clients talk to an [`HttpTransport`] so tests can inject a scripted or
//! failing network instead of opening sockets.

use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Get,
    Post,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpRequest {
    pub method: Method,
    pub url: String,
    pub headers: Vec<(String, String)>,
    pub body: Option<String>,
}

impl HttpRequest {
    pub fn get(url: impl Into<String>) -> Self {
        HttpRequest {
            method: Method::Get,
            url: url.into(),
            headers: Vec::new(),
            body: None,
        }
    }

    pub fn post_json(url: impl Into<String>, body: String) -> Self {
        HttpRequest {
            method: Method::Post,
            url: url.into(),
            headers: vec![("Content-Type".into(), "application/json".into())],
            body: Some(body),
        }
    }

    pub fn header(mut self, name: &str, value: impl Into<String>) -> Self {
        self.headers.push((name.to_string(), value.into()));
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HttpResponse {
    pub status: u16,
    pub body: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("transport failure: {0}")]
pub struct TransportError(pub String);

pub trait HttpTransport: Send + Sync {
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError>;
}

/// Real network access through `reqwest`.
pub struct ReqwestTransport {
    client: reqwest::blocking::Client,
}

impl ReqwestTransport {
    pub fn new(timeout: Duration) -> Result<Self, TransportError> {
        let client = reqwest::blocking::Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| TransportError(e.to_string()))?;
        Ok(ReqwestTransport { client })
    }
}

impl HttpTransport for ReqwestTransport {
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        let mut builder = match request.method {
            Method::Get => self.client.get(&request.url),
            Method::Post => self.client.post(&request.url),
        };
        for (k, v) in &request.headers {
            builder = builder.header(k, v);
        }
        if let Some(body) = &request.body {
            builder = builder.body(body.clone());
        }
        let resp = builder.send().map_err(|e| TransportError(e.to_string()))?;
        let status = resp.status().as_u16();
        let body = resp.text().map_err(|e| TransportError(e.to_string()))?;
        Ok(HttpResponse { status, body })
    }
}

/// Refuses every request. Used to prove offline code paths never touch the network.
#[derive(Debug, Default, Clone, Copy)]
pub struct OfflineTransport;

impl HttpTransport for OfflineTransport {
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        Err(TransportError(format!("network disabled (attempted {})", request.url)))
    }
}

/// Replays a fixed queue of outcomes and records the requests it saw.
#[derive(Debug, Default)]
pub struct ScriptedTransport {
    outcomes: Mutex<Vec<Result<HttpResponse, TransportError>>>,
    seen: Mutex<Vec<HttpRequest>>,
}

impl ScriptedTransport {
    pub fn new(outcomes: Vec<Result<HttpResponse, TransportError>>) -> Self {
        let mut outcomes = outcomes;
        outcomes.reverse();
        ScriptedTransport {
            outcomes: Mutex::new(outcomes),
            seen: Mutex::new(Vec::new()),
        }
    }

    pub fn requests(&self) -> Vec<HttpRequest> {
        self.seen.lock().unwrap().clone()
    }
}

impl HttpTransport for ScriptedTransport {
    fn execute(&self, request: &HttpRequest) -> Result<HttpResponse, TransportError> {
        self.seen.lock().unwrap().push(request.clone());
        self.outcomes
            .lock()
            .unwrap()
            .pop()
            .unwrap_or_else(|| Err(TransportError("script exhausted".into())))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Retries after the first attempt.
    pub max_retries: u32,
    pub base_delay: Duration,
    pub max_delay: Duration,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        RetryPolicy {
            max_retries: 3,
            base_delay: Duration::from_millis(500),
            max_delay: Duration::from_secs(8),
        }
    }
}

impl RetryPolicy {
    pub fn no_delay(max_retries: u32) -> Self {
        RetryPolicy {
            max_retries,
            base_delay: Duration::ZERO,
            max_delay: Duration::ZERO,
        }
    }

    fn delay(&self, retry: u32) -> Duration {
        self.base_delay
            .saturating_mul(1u32 << retry.min(16))
            .min(self.max_delay)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HttpError {
    #[error("{last} (after {attempts} attempts)")]
    Exhausted { attempts: u32, last: String },
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
}

fn is_transient(status: u16) -> bool {
    status == 408 || status == 429 || (500..600).contains(&status)
}

/// Sends a request, retrying transport errors and transient statuses with exponential backoff.
pub fn send_with_retry(
    transport: &dyn HttpTransport,
    request: &HttpRequest,
    policy: &RetryPolicy,
) -> Result<HttpResponse, HttpError> {
    let mut attempt = 0;
    loop {
        let last = match transport.execute(request) {
            Ok(resp) if (200..300).contains(&resp.status) => return Ok(resp),
            Ok(resp) if !is_transient(resp.status) => {
                return Err(HttpError::Status {
                    status: resp.status,
                    body: resp.body,
                })
            }
            Ok(resp) => format!("HTTP {}: {}", resp.status, resp.body),
            Err(e) => e.to_string(),
        };
        if attempt >= policy.max_retries {
            return Err(HttpError::Exhausted {
                attempts: attempt + 1,
                last,
            });
        }
        thread::sleep(policy.delay(attempt));
        attempt += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ok(body: &str) -> Result<HttpResponse, TransportError> {
        Ok(HttpResponse {
            status: 200,
            body: body.into(),
        })
    }

    #[test]
    fn retries_transient_then_succeeds() {
        let t = ScriptedTransport::new(vec![
            Err(TransportError("reset".into())),
            Ok(HttpResponse {
                status: 503,
                body: String::new(),
            }),
            ok("fine"),
        ]);
        let r = send_with_retry(&t, &HttpRequest::get("http://x"), &RetryPolicy::no_delay(3)).unwrap();
        assert_eq!(r.body, "fine");
        assert_eq!(t.requests().len(), 3);
    }

    #[test]
    fn gives_up_after_budget() {
        let t = ScriptedTransport::new(vec![Err(TransportError("down".into())); 10]);
        let err = send_with_retry(&t, &HttpRequest::get("http://x"), &RetryPolicy::no_delay(3)).unwrap_err();
        assert_eq!(
            err,
            HttpError::Exhausted {
                attempts: 4,
                last: "transport failure: down".into()
            }
        );
    }

    #[test]
    fn client_errors_are_not_retried() {
        let t = ScriptedTransport::new(vec![Ok(HttpResponse {
            status: 401,
            body: "nope".into(),
        })]);
        let err = send_with_retry(&t, &HttpRequest::get("http://x"), &RetryPolicy::no_delay(3)).unwrap_err();
        assert!(matches!(err, HttpError::Status { status: 401, .. }));
        assert_eq!(t.requests().len(), 1);
    }

    #[test]
    fn backoff_doubles_and_caps() {
        let p = RetryPolicy::default();
        assert_eq!(p.delay(0), Duration::from_millis(500));
        assert_eq!(p.delay(2), Duration::from_secs(2));
        assert_eq!(p.delay(10), Duration::from_secs(8));
    }
}
