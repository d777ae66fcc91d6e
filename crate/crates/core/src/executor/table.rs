use std::collections::HashMap;
use std::sync::Mutex;

use sha2::{Digest, Sha256};

use super::{ExecutionOutcome, ExecutionRequest, ExecutorError, ToolExecutor};

pub const NO_FIXTURE: &str = "no fixture";

/// SHA-256 of the code with every whitespace run collapsed to one space.
pub fn fingerprint(code: &str) -> String {
    let collapsed = code.split_whitespace().collect::<Vec<_>>().join(" ");
    hex::encode(Sha256::digest(collapsed.as_bytes()))
}

/// Deterministic executor answering from a fingerprint table.
#[derive(Debug, Default)]
pub struct TableExecutor {
    table: HashMap<String, ExecutionOutcome>,
    log: Mutex<Vec<String>>,
}

impl TableExecutor {
    pub fn new(table: HashMap<String, ExecutionOutcome>) -> Self {
        Self { table, log: Mutex::new(Vec::new()) }
    }

    /// Adds an entry keyed by the fingerprint of `code`.
    pub fn with_code(mut self, code: &str, outcome: ExecutionOutcome) -> Self {
        self.table.insert(fingerprint(code), outcome);
        self
    }

    /// Code of every request executed so far, in order.
    pub fn calls(&self) -> Vec<String> {
        self.log.lock().expect("executor log poisoned").clone()
    }

    pub fn call_count(&self) -> usize {
        self.log.lock().expect("executor log poisoned").len()
    }
}

impl ToolExecutor for TableExecutor {
    fn execute(&self, request: &ExecutionRequest) -> Result<ExecutionOutcome, ExecutorError> {
        self.log.lock().expect("executor log poisoned").push(request.code.clone());
        Ok(self
            .table
            .get(&fingerprint(&request.code))
            .cloned()
            .unwrap_or_else(|| ExecutionOutcome::failed(NO_FIXTURE, 1)))
    }
}

pub fn make_table_executor(table: HashMap<String, ExecutionOutcome>) -> TableExecutor {
    TableExecutor::new(table)
}
