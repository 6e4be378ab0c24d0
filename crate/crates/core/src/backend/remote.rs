//! HTTP client for a remote model server.
//!
//! The wire contract is three JSON-over-HTTP endpoints:
//!
//! ```text
//! POST /generate {problem_id, prompt, n, temperature, max_new_tokens, seed}
//!   -> {responses: [string]}
//! POST /update   {problem_id, rollouts: [string], advantages: [real],
//!                 learning_rate, max_steps}
//!   -> {losses: [real]}
//! POST /eval     {prompts: [string], temperature, max_new_tokens}
//!   -> {responses: [string]}
//! ```
//!
//! Requests carry an `Idempotency-Key` header derived from the payload, so a
//! retried request is recognizable server-side. Transport failures and 5xx
//! responses are retried with exponential backoff (3 attempts total); 4xx
//! responses are contract violations and are not retried. The server owns
//! sub-seed derivation for batched generation: the client forwards the first
//! derived seed and the batch size. Generation may run concurrently on the
//! server; updates are serialized by it.

use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::backend::{BackendError, Capabilities, PolicyBackend};
use crate::problem::Problem;
use crate::rng::fnv1a64;
use crate::signals::RolloutRecord;

pub const DEFAULT_PROMPT_TEMPLATE: &str =
    "Solve the following problem. Put the final answer in \\boxed{}.\n\n{statement}";

pub const ENV_AUTH_TOKEN: &str = "AUTOCUR_REMOTE_TOKEN";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub problem_id: String,
    pub prompt: String,
    pub n: usize,
    pub temperature: f64,
    pub max_new_tokens: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub responses: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpdateRequest {
    pub problem_id: String,
    pub rollouts: Vec<String>,
    pub advantages: Vec<f64>,
    pub learning_rate: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UpdateResponse {
    pub losses: Vec<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalRequest {
    pub prompts: Vec<String>,
    pub temperature: f64,
    pub max_new_tokens: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvalResponse {
    pub responses: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct RemoteConfig {
    pub base_url: String,
    pub auth_token: Option<String>,
    pub prompt_template: String,
    pub request_timeout: Duration,
    /// First backoff delay; doubles per retry.
    pub backoff_base: Duration,
    pub max_attempts: u32,
}

impl RemoteConfig {
    pub fn new(base_url: impl Into<String>) -> RemoteConfig {
        RemoteConfig {
            base_url: base_url.into(),
            auth_token: std::env::var(ENV_AUTH_TOKEN).ok(),
            prompt_template: DEFAULT_PROMPT_TEMPLATE.to_string(),
            request_timeout: Duration::from_secs(120),
            backoff_base: Duration::from_millis(250),
            max_attempts: 3,
        }
    }
}

pub struct RemoteBackend {
    config: RemoteConfig,
    agent: ureq::Agent,
}

impl RemoteBackend {
    pub fn new(config: RemoteConfig) -> RemoteBackend {
        let agent = ureq::AgentBuilder::new()
            .timeout(config.request_timeout)
            .build();
        RemoteBackend { config, agent }
    }

    pub fn prompt_for(&self, problem: &Problem) -> String {
        self.config
            .prompt_template
            .replace("{statement}", &problem.statement)
    }

    /// POST a JSON body and decode a JSON reply, with retry on transient
    /// failures. The idempotency key is a stable hash of endpoint + body and
    /// is identical across retries of the same logical request.
    fn post_json<Req: Serialize, Resp: for<'de> Deserialize<'de>>(
        &self,
        endpoint: &str,
        request: &Req,
    ) -> Result<Resp, BackendError> {
        let body = serde_json::to_string(request)
            .map_err(|e| BackendError::Contract(format!("serialize {endpoint}: {e}")))?;
        let idempotency_key = format!(
            "{:016x}{:016x}",
            fnv1a64(endpoint.as_bytes()),
            fnv1a64(body.as_bytes())
        );
        let url = format!(
            "{}/{}",
            self.config.base_url.trim_end_matches('/'),
            endpoint.trim_start_matches('/')
        );
        let mut last_error = String::new();
        for attempt in 0..self.config.max_attempts {
            if attempt > 0 {
                std::thread::sleep(self.config.backoff_base * 2u32.pow(attempt - 1));
            }
            let mut req = self
                .agent
                .post(&url)
                .set("Content-Type", "application/json")
                .set("Idempotency-Key", &idempotency_key);
            if let Some(token) = &self.config.auth_token {
                req = req.set("Authorization", &format!("Bearer {token}"));
            }
            match req.send_string(&body) {
                Ok(response) => {
                    return response.into_json::<Resp>().map_err(|e| {
                        BackendError::Contract(format!("decode {endpoint} reply: {e}"))
                    });
                }
                Err(ureq::Error::Status(code, _)) if code >= 500 || code == 429 => {
                    last_error = format!("{endpoint} returned status {code}");
                }
                Err(ureq::Error::Status(code, _)) => {
                    return Err(BackendError::Contract(format!(
                        "{endpoint} returned status {code}"
                    )));
                }
                Err(ureq::Error::Transport(t)) => {
                    last_error = format!("{endpoint}: {t}");
                }
            }
        }
        Err(BackendError::Transport(format!(
            "{last_error} (after {} attempts)",
            self.config.max_attempts
        )))
    }
}

impl PolicyBackend for RemoteBackend {
    fn capabilities(&self) -> Capabilities {
        Capabilities {
            supports_update: true,
            deterministic_eval: false,
        }
    }

    fn generate(
        &self,
        problem: &Problem,
        temperature: f64,
        max_new_tokens: usize,
        seeds: &[u64],
    ) -> Result<Vec<String>, BackendError> {
        let request = GenerateRequest {
            problem_id: problem.id.clone(),
            prompt: self.prompt_for(problem),
            n: seeds.len(),
            temperature,
            max_new_tokens,
            seed: seeds.first().copied().unwrap_or(0),
        };
        let reply: GenerateResponse = self.post_json("generate", &request)?;
        if reply.responses.len() != seeds.len() {
            return Err(BackendError::Contract(format!(
                "asked for {} responses, got {}",
                seeds.len(),
                reply.responses.len()
            )));
        }
        Ok(reply.responses)
    }

    fn apply_update(
        &mut self,
        problem: &Problem,
        rollouts: &[RolloutRecord],
        advantages: &[f64],
        learning_rate: f64,
    ) -> Result<f64, BackendError> {
        let request = UpdateRequest {
            problem_id: problem.id.clone(),
            rollouts: rollouts.iter().map(|r| r.response.clone()).collect(),
            advantages: advantages.to_vec(),
            learning_rate,
            max_steps: 1,
        };
        let reply: UpdateResponse = self.post_json("update", &request)?;
        reply
            .losses
            .first()
            .copied()
            .ok_or_else(|| BackendError::Contract("update reply had no losses".to_string()))
    }

    fn eval_batch(
        &self,
        problems: &[Problem],
        max_new_tokens: usize,
    ) -> Option<Result<Vec<String>, BackendError>> {
        let request = EvalRequest {
            prompts: problems.iter().map(|p| self.prompt_for(p)).collect(),
            temperature: 0.0,
            max_new_tokens,
        };
        Some(
            self.post_json::<_, EvalResponse>("eval", &request)
                .map(|r| r.responses),
        )
    }
}
