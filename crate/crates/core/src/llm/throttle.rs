use std::sync::{Condvar, Mutex};

use super::{ChatBackend, ChatRequest, ChatResponse, LlmError};

/// Caps the number of requests in flight to the wrapped backend.
pub struct Throttled<B> {
    inner: B,
    cap: usize,
    in_flight: Mutex<usize>,
    freed: Condvar,
    peak: Mutex<usize>,
}

impl<B: ChatBackend> Throttled<B> {
    pub fn new(inner: B, cap: usize) -> Self {
        Throttled {
            inner,
            cap: cap.max(1),
            in_flight: Mutex::new(0),
            freed: Condvar::new(),
            peak: Mutex::new(0),
        }
    }

    /// Highest concurrency observed so far.
    pub fn peak(&self) -> usize {
        *self.peak.lock().unwrap()
    }
}

impl<B: ChatBackend> ChatBackend for Throttled<B> {
    fn send(&self, request: &ChatRequest) -> Result<ChatResponse, LlmError> {
        {
            let mut n = self.in_flight.lock().unwrap();
            while *n >= self.cap {
                n = self.freed.wait(n).unwrap();
            }
            *n += 1;
            let mut peak = self.peak.lock().unwrap();
            *peak = (*peak).max(*n);
        }
        let result = self.inner.send(request);
        *self.in_flight.lock().unwrap() -= 1;
        self.freed.notify_one();
        result
    }
}
