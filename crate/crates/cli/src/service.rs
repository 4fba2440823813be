//! Session operations shared by the HTTP API and the REPL. Every method
//! returns the JSON payload both front ends send back.

use std::path::PathBuf;
use std::sync::{Mutex, RwLock};

use mgl_core::classifier::{Clock, SessionState};
use mgl_core::term::render_clause;
use serde_json::{json, Value};

/// An API failure with its HTTP status.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ApiError {
    pub status: u16,
    pub code: &'static str,
    pub message: String,
}

impl ApiError {
    pub fn bad_request(message: impl Into<String>) -> Self {
        ApiError {
            status: 400,
            code: "invalid_input",
            message: message.into(),
        }
    }

    pub fn persistence(message: impl Into<String>) -> Self {
        ApiError {
            status: 500,
            code: "persistence_failed",
            message: message.into(),
        }
    }

    pub fn not_found(message: impl Into<String>) -> Self {
        ApiError {
            status: 404,
            code: "not_found",
            message: message.into(),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({"ok": false, "error": {"code": self.code, "message": self.message}})
    }
}

pub struct Service {
    state: RwLock<SessionState>,
    /// Serializes state changes so each one is persisted before the next starts.
    writer: Mutex<()>,
    session_file: Option<PathBuf>,
    clock: Box<dyn Clock>,
}

impl Service {
    pub fn new(state: SessionState, session_file: Option<PathBuf>, clock: Box<dyn Clock>) -> Self {
        Service {
            state: RwLock::new(state),
            writer: Mutex::new(()),
            session_file,
            clock,
        }
    }

    pub fn snapshot_state(&self) -> SessionState {
        self.state.read().unwrap().clone()
    }

    pub fn task(&self, text: &str) -> Result<Value, ApiError> {
        let prediction = self
            .state
            .read()
            .unwrap()
            .predict(text)
            .map_err(|e| ApiError::bad_request(e.to_string()))?;
        let mut out = json!({"ok": true, "prediction": prediction});
        if prediction.empty_tokens {
            out["warning"] = json!("text has no words after tokenization");
        }
        Ok(out)
    }

    pub fn label(&self, text: &str, category: &str) -> Result<Value, ApiError> {
        let _guard = self.writer.lock().unwrap();
        let mut next = self.state.read().unwrap().clone();
        let outcome = next
            .label(text, category, self.clock.as_ref())
            .map_err(|e| ApiError::bad_request(e.to_string()))?;
        self.commit(next)?;
        Ok(json!({
            "ok": true,
            "already_covered": outcome.already_covered,
            "new_hypothesis": outcome.new_hypothesis.map(|h| h.program().iter().map(render_clause).collect::<Vec<_>>()),
            "failure_reason": outcome.failure_reason,
        }))
    }

    pub fn rules(&self) -> Value {
        let state = self.state.read().unwrap();
        let rules: serde_json::Map<String, Value> = state
            .hypotheses
            .iter()
            .map(|(c, h)| (c.clone(), json!(h.program().iter().map(render_clause).collect::<Vec<_>>())))
            .collect();
        json!({"ok": true, "rules": rules})
    }

    pub fn history(&self) -> Value {
        json!({"ok": true, "records": self.state.read().unwrap().history})
    }

    pub fn reset(&self) -> Result<Value, ApiError> {
        let _guard = self.writer.lock().unwrap();
        let mut next = self.state.read().unwrap().clone();
        next.reset();
        self.commit(next)?;
        Ok(json!({"ok": true}))
    }

    /// Persists `next`, then makes it current. On a write failure the current
    /// state stays as it was.
    fn commit(&self, next: SessionState) -> Result<(), ApiError> {
        if let Some(path) = &self.session_file {
            next.save(path)
                .map_err(|e| ApiError::persistence(format!("could not save session: {e}")))?;
        }
        *self.state.write().unwrap() = next;
        Ok(())
    }
}
