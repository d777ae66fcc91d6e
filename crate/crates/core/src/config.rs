//! JSON run configuration. Every field has a default, so `{}` is a valid file.
//!
//! ```json
//! {
//!   "backend": { "kind": "http", "http": { "base_url": "http://localhost:8000/v1" } },
//!   "generation": { "model": "gpt-4-turbo", "temperature": 0.0 },
//!   "workflow": { "max_code_attempts": 3, "max_attempts": 3, "context_budget_chars": 48000 },
//!   "executor": { "kind": "subprocess", "subprocess": { "command": ["hdflow-sandbox"] } }
//! }
//! ```

use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::executor::{
    ExecutionOutcome, ExecutorError, SubprocessConfig, SubprocessExecutor, TableExecutor, ToolExecutor,
};
use crate::fast::FastThinker;
use crate::fixtures;
use crate::gateway::{
    Backend, Gateway, GatewayError, GenerationParams, HttpBackend, HttpBackendConfig, RetryPolicy, ScriptFileEntry,
    ScriptedBackend, DEFAULT_SYNTH_TEMPERATURE,
};
use crate::hybrid::HybridController;
use crate::jsonl::{self, JsonlError};
use crate::synth::Synthesizer;
use crate::workflow::{WorkflowEngine, WorkflowSettings};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    /// Scripted replies; the bundled demo script unless `script` is set.
    #[default]
    Mock,
    Http,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BackendConfig {
    pub kind: BackendKind,
    pub http: HttpBackendConfig,
    /// JSON-lines file of `{"contains": [...], "reply": "...", "once": false}` entries.
    pub script: Option<PathBuf>,
    pub retry: RetryPolicy,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecutorKind {
    /// Canned outcomes keyed by code; the bundled demo table unless `table` is set.
    #[default]
    Table,
    Subprocess,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ExecutorConfig {
    pub kind: ExecutorKind,
    pub subprocess: SubprocessConfig,
    /// JSON-lines file of [`TableRow`]s.
    pub table: Option<PathBuf>,
}

/// One canned execution outcome.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableRow {
    pub code: String,
    #[serde(default)]
    pub stdout: String,
    #[serde(default)]
    pub stderr: String,
    #[serde(default)]
    pub exit_code: i32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RunConfig {
    pub backend: BackendConfig,
    /// Parameters for solving; temperature 0 by default.
    pub generation: GenerationParams,
    pub synth_temperature: f32,
    pub workflow: WorkflowSettings,
    pub executor: ExecutorConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            backend: BackendConfig::default(),
            generation: GenerationParams::default(),
            synth_temperature: DEFAULT_SYNTH_TEMPERATURE,
            workflow: WorkflowSettings::default(),
            executor: ExecutorConfig::default(),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("{path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Fixture { path: PathBuf, source: JsonlError },
    #[error(transparent)]
    Gateway(#[from] GatewayError),
    #[error(transparent)]
    Executor(#[from] ExecutorError),
}

/// Scripts and tables covering every bundled fixture problem.
pub fn demo_backend() -> ScriptedBackend {
    let mut script = fixtures::morse::fast_script();
    script.extend(fixtures::morse::script());
    script.extend((0..fixtures::arithmetic::SIZE).flat_map(|i| fixtures::arithmetic::script_for(i, i % 2 == 0)));
    ScriptedBackend::new(script).expect("demo script is non-empty").with_id("scripted:demo")
}

pub fn load_table(path: &Path) -> Result<TableExecutor, ConfigError> {
    let rows: Vec<TableRow> =
        jsonl::read(path).map_err(|source| ConfigError::Fixture { path: path.to_path_buf(), source })?;
    Ok(rows.into_iter().fold(TableExecutor::default(), |t, r| {
        let outcome = ExecutionOutcome { exit_code: r.exit_code, stderr: r.stderr, ..ExecutionOutcome::ok(r.stdout) };
        t.with_code(&r.code, outcome)
    }))
}

impl RunConfig {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read { path: path.into(), source })?;
        serde_json::from_str(&text).map_err(|e| ConfigError::Parse { path: path.into(), message: e.to_string() })
    }

    pub fn backend(&self) -> Result<Arc<dyn Backend>, ConfigError> {
        Ok(match self.backend.kind {
            BackendKind::Http => Arc::new(HttpBackend::new(self.backend.http.clone())),
            BackendKind::Mock => match &self.backend.script {
                None => Arc::new(demo_backend()),
                Some(path) => {
                    let entries: Vec<ScriptFileEntry> =
                        jsonl::read(path).map_err(|source| ConfigError::Fixture { path: path.clone(), source })?;
                    Arc::new(ScriptedBackend::from_file_entries(entries)?)
                }
            },
        })
    }

    pub fn gateway(&self) -> Result<Gateway, ConfigError> {
        Ok(Gateway::with_retry(self.backend()?, self.backend.retry.clone()))
    }

    pub fn executor(&self) -> Result<Arc<dyn ToolExecutor>, ConfigError> {
        Ok(match self.executor.kind {
            ExecutorKind::Subprocess => Arc::new(SubprocessExecutor::new(self.executor.subprocess.clone())?),
            ExecutorKind::Table => match &self.executor.table {
                None => Arc::new(fixtures::morse::executor()),
                Some(path) => Arc::new(load_table(path)?),
            },
        })
    }

    pub fn controller_on(&self, gateway: Gateway, executor: Arc<dyn ToolExecutor>) -> HybridController {
        let fast = FastThinker::new(gateway.clone()).with_params(self.generation.clone());
        let slow = WorkflowEngine::new(gateway, executor)
            .with_params(self.generation.clone())
            .with_settings(self.workflow.clone());
        HybridController::new(fast, slow)
    }

    pub fn controller(&self) -> Result<HybridController, ConfigError> {
        Ok(self.controller_on(self.gateway()?, self.executor()?))
    }

    pub fn synthesizer(&self) -> Result<Synthesizer, ConfigError> {
        let params = self.generation.clone().with_temperature(self.synth_temperature);
        Ok(Synthesizer::new(self.gateway()?).with_params(params))
    }
}
