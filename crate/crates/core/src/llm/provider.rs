use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{LlmError, PromptKind, PromptSpec, SYSTEM_PROMPT};

static NETWORK_CALLS: AtomicU64 = AtomicU64::new(0);

/// Outgoing requests made by any provider in this process.
pub fn network_calls() -> u64 {
    NETWORK_CALLS.load(Ordering::SeqCst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProviderKind {
    /// OpenAI-compatible chat completions endpoint.
    Openai,
    /// Canned replies from a directory.
    Mock,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProviderConfig {
    pub kind: ProviderKind,
    pub endpoint: String,
    pub model: String,
    /// Name of the environment variable holding the API key.
    pub api_key_env: String,
    pub temperature: f64,
    pub max_tokens: u32,
    pub timeout_secs: u64,
    /// Extra attempts after a transient failure.
    pub retries: u32,
    pub mock_dir: Option<PathBuf>,
}

impl Default for ProviderConfig {
    fn default() -> Self {
        ProviderConfig {
            kind: ProviderKind::Openai,
            endpoint: "https://api.openai.com/v1/chat/completions".into(),
            model: "gpt-4".into(),
            api_key_env: "OPENAI_API_KEY".into(),
            temperature: 0.7,
            max_tokens: 8192,
            timeout_secs: 180,
            retries: 2,
            mock_dir: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChatMessage {
    pub role: String,
    pub content: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChatRequest {
    pub model: String,
    pub messages: Vec<ChatMessage>,
    pub temperature: f64,
    pub max_tokens: u32,
    #[serde(skip)]
    pub kind: &'static str,
    /// Digest of the rendered prompt.
    #[serde(skip)]
    pub digest: String,
}

impl ChatRequest {
    pub fn new(config: &ProviderConfig, prompt: &PromptSpec) -> ChatRequest {
        ChatRequest {
            model: config.model.clone(),
            messages: vec![
                ChatMessage { role: "system".into(), content: SYSTEM_PROMPT.into() },
                ChatMessage { role: "user".into(), content: prompt.render() },
            ],
            temperature: config.temperature,
            max_tokens: config.max_tokens,
            kind: prompt.kind.name(),
            digest: prompt.digest(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum ProviderError {
    #[error("authentication failed: {0}")]
    Auth(String),
    #[error("request timed out")]
    Timeout,
    #[error("transport error: {0}")]
    Transport(String),
    #[error("HTTP {status}: {body}")]
    Status { status: u16, body: String },
    #[error("malformed reply: {0}")]
    Malformed(String),
    #[error("no canned reply for {kind} prompt {digest}")]
    NoCannedReply { kind: String, digest: String },
}

impl ProviderError {
    pub fn is_transient(&self) -> bool {
        match self {
            ProviderError::Timeout | ProviderError::Transport(_) => true,
            ProviderError::Status { status, .. } => *status == 429 || *status >= 500,
            _ => false,
        }
    }
}

pub trait ChatProvider: Send + Sync {
    fn name(&self) -> &str;
    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError>;
}

/// Replays `<digest>.txt`, else `<kind>.txt`, else `default.txt` from a
/// directory. Never touches the network.
pub struct MockProvider {
    dir: PathBuf,
}

impl MockProvider {
    pub fn new(dir: impl Into<PathBuf>) -> MockProvider {
        MockProvider { dir: dir.into() }
    }

    pub fn reply_path(&self, kind: &str, digest: &str) -> Option<PathBuf> {
        [format!("{digest}.txt"), format!("{kind}.txt"), "default.txt".to_string()]
            .into_iter()
            .map(|f| self.dir.join(f))
            .find(|p| p.is_file())
    }
}

impl ChatProvider for MockProvider {
    fn name(&self) -> &str {
        "mock"
    }

    fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
        let missing = || ProviderError::NoCannedReply { kind: request.kind.into(), digest: request.digest.clone() };
        let path = self.reply_path(request.kind, &request.digest).ok_or_else(missing)?;
        std::fs::read_to_string(&path).map_err(|e| ProviderError::Malformed(format!("{}: {e}", path.display())))
    }
}

#[cfg(feature = "http")]
pub use http::HttpProvider;

#[cfg(feature = "http")]
mod http {
    use std::time::Duration;

    use super::*;

    /// Blocking client for OpenAI-compatible chat completion endpoints.
    pub struct HttpProvider {
        endpoint: String,
        api_key: String,
        agent: ureq::Agent,
    }

    impl HttpProvider {
        /// Fails with [`ProviderError::Auth`] when the key variable is unset
        /// or empty; no request is made in that case.
        pub fn new(config: &ProviderConfig) -> Result<HttpProvider, ProviderError> {
            let api_key = std::env::var(&config.api_key_env)
                .ok()
                .filter(|k| !k.trim().is_empty())
                .ok_or_else(|| ProviderError::Auth(format!("environment variable {} is not set", config.api_key_env)))?;
            let agent = ureq::Agent::config_builder()
                .timeout_global(Some(Duration::from_secs(config.timeout_secs)))
                .http_status_as_error(false)
                .build()
                .into();
            Ok(HttpProvider { endpoint: config.endpoint.clone(), api_key, agent })
        }
    }

    #[derive(Deserialize)]
    struct Reply {
        choices: Vec<Choice>,
    }

    #[derive(Deserialize)]
    struct Choice {
        message: ChatMessage,
    }

    impl ChatProvider for HttpProvider {
        fn name(&self) -> &str {
            "openai"
        }

        fn complete(&self, request: &ChatRequest) -> Result<String, ProviderError> {
            NETWORK_CALLS.fetch_add(1, Ordering::SeqCst);
            let mut resp = self
                .agent
                .post(&self.endpoint)
                .header("Authorization", &format!("Bearer {}", self.api_key))
                .send_json(request)
                .map_err(transport)?;
            let status = resp.status().as_u16();
            let body = resp.body_mut().read_to_string().map_err(transport)?;
            match status {
                200..=299 => {}
                401 | 403 => return Err(ProviderError::Auth(format!("HTTP {status}"))),
                _ => return Err(ProviderError::Status { status, body }),
            }
            let reply: Reply = serde_json::from_str(&body).map_err(|e| ProviderError::Malformed(e.to_string()))?;
            reply
                .choices
                .into_iter()
                .next()
                .map(|c| c.message.content)
                .ok_or_else(|| ProviderError::Malformed("reply has no choices".into()))
        }
    }

    fn transport(e: ureq::Error) -> ProviderError {
        match e {
            ureq::Error::Timeout(_) => ProviderError::Timeout,
            other => ProviderError::Transport(other.to_string()),
        }
    }
}

/// One line of the audit log: a single attempt.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AuditRecord {
    pub kind: String,
    pub digest: String,
    pub provider: String,
    pub model: String,
    pub attempt: u32,
    pub messages: Vec<ChatMessage>,
    pub reply: Option<String>,
    pub error: Option<String>,
}

/// Append-only JSON-lines log shared by concurrent callers.
pub struct AuditLog {
    path: PathBuf,
    file: Mutex<File>,
}

impl AuditLog {
    pub fn open(path: impl AsRef<Path>) -> std::io::Result<AuditLog> {
        let path = path.as_ref().to_path_buf();
        let file = OpenOptions::new().create(true).append(true).open(&path)?;
        Ok(AuditLog { path, file: Mutex::new(file) })
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    pub fn append(&self, record: &AuditRecord) -> std::io::Result<()> {
        let mut line = serde_json::to_string(record)?;
        line.push('\n');
        let mut f = self.file.lock().unwrap();
        f.write_all(line.as_bytes())?;
        f.flush()
    }

    pub fn read(path: impl AsRef<Path>) -> std::io::Result<Vec<AuditRecord>> {
        let text = std::fs::read_to_string(path)?;
        text.lines().map(|l| serde_json::from_str(l).map_err(std::io::Error::from)).collect()
    }
}

/// Sends the prompt, retrying transient failures up to `config.retries`
/// times. Every attempt is appended to `audit` when given.
pub fn query(
    provider: &dyn ChatProvider,
    config: &ProviderConfig,
    prompt: &PromptSpec,
    audit: Option<&AuditLog>,
) -> Result<String, LlmError> {
    let request = ChatRequest::new(config, prompt);
    let mut attempt = 0;
    loop {
        let result = provider.complete(&request);
        if let Some(log) = audit {
            log.append(&AuditRecord {
                kind: request.kind.into(),
                digest: request.digest.clone(),
                provider: provider.name().into(),
                model: request.model.clone(),
                attempt,
                messages: request.messages.clone(),
                reply: result.as_ref().ok().cloned(),
                error: result.as_ref().err().map(|e| e.to_string()),
            })?;
        }
        match result {
            Ok(reply) => return Ok(reply),
            Err(e) if e.is_transient() && attempt < config.retries => attempt += 1,
            Err(e) => return Err(e.into()),
        }
    }
}

impl PromptKind {
    pub fn mock_file(self) -> String {
        format!("{}.txt", self.name())
    }
}
