//! Thin HTTP + JSON adapters for hosted backends.
//!
//! Each adapter posts one JSON document to its configured URL and expects one
//! JSON document back. The wire types are public so test servers and
//! gateways can speak the same format.

use std::env;
use std::time::Duration;

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use pano_core::Clip;
use reqwest::blocking::Client;
use reqwest::StatusCode;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::audio::AudioInput;
use crate::backend::{PromptRefiner, Transcriber, VideoGenerator};
use crate::codec::{decode_png, encode_png};
use crate::error::{AgentError, Result};
use crate::prompt::{DescriptorSet, RefinedPrompt, TextPrompt};
use crate::request::GenerationRequest;

pub const GENERATION_TIMEOUT: Duration = Duration::from_secs(120);
pub const TEXT_TIMEOUT: Duration = Duration::from_secs(30);

const REFINE_INSTRUCTION: &str = "Rewrite the user's description of a scene as one concise, \
vivid prompt for a panoramic video generator. Keep the user's intent and subjects; \
return only the prompt.";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Endpoint {
    pub url: String,
    pub api_key: Option<String>,
    pub model: Option<String>,
}

impl Endpoint {
    pub fn new(url: impl Into<String>) -> Self {
        Self {
            url: url.into(),
            api_key: None,
            model: None,
        }
    }

    /// Reads `{prefix}_API_URL` (required), `{prefix}_API_KEY` and
    /// `{prefix}_MODEL`.
    pub fn from_env(prefix: &str) -> Result<Self> {
        let url_var = format!("{prefix}_API_URL");
        let url = env::var(&url_var)
            .map_err(|_| AgentError::Config(format!("{url_var} is not set")))?;
        Ok(Self {
            url,
            api_key: env::var(format!("{prefix}_API_KEY")).ok(),
            model: env::var(format!("{prefix}_MODEL")).ok(),
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TranscribeRequest {
    pub model: Option<String>,
    pub audio_wav_base64: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TextResponse {
    pub text: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RefineRequest {
    pub model: Option<String>,
    pub instruction: String,
    pub prompt: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateRequest {
    pub model: Option<String>,
    pub prompt: String,
    pub image_png_base64: String,
    pub width: u32,
    pub height: u32,
    pub duration_s: f64,
    pub fps: u32,
    pub seed: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GenerateResponse {
    pub fps: u32,
    pub frames_png_base64: Vec<String>,
}

struct JsonClient {
    endpoint: Endpoint,
    client: Client,
}

impl JsonClient {
    fn new(endpoint: Endpoint, timeout: Duration) -> Result<Self> {
        let client = Client::builder()
            .timeout(timeout)
            .build()
            .map_err(|e| AgentError::Config(format!("building HTTP client: {e}")))?;
        Ok(Self { endpoint, client })
    }

    fn post<B: Serialize, R: DeserializeOwned>(&self, body: &B) -> Result<R> {
        let mut req = self.client.post(&self.endpoint.url).json(body);
        if let Some(key) = &self.endpoint.api_key {
            req = req.bearer_auth(key);
        }
        let resp = req.send().map_err(transport_error)?;
        let status = resp.status();
        if !status.is_success() {
            let body = resp.text().unwrap_or_default();
            let snippet: String = body.chars().take(200).collect();
            let msg = format!("{} returned {status}: {snippet}", self.endpoint.url);
            return Err(if is_retryable(status) {
                AgentError::Transient(msg)
            } else {
                AgentError::BackendContract(msg)
            });
        }
        resp.json::<R>().map_err(|e| {
            if e.is_timeout() {
                AgentError::Transient(format!("reading response: {e}"))
            } else {
                AgentError::BackendContract(format!("malformed response: {e}"))
            }
        })
    }
}

fn is_retryable(status: StatusCode) -> bool {
    status.is_server_error()
        || status == StatusCode::TOO_MANY_REQUESTS
        || status == StatusCode::REQUEST_TIMEOUT
}

fn transport_error(e: reqwest::Error) -> AgentError {
    if e.is_builder() {
        AgentError::Config(e.to_string())
    } else {
        AgentError::Transient(e.to_string())
    }
}

pub struct RemoteTranscriber {
    http: JsonClient,
}

impl RemoteTranscriber {
    pub fn new(endpoint: Endpoint) -> Result<Self> {
        Ok(Self {
            http: JsonClient::new(endpoint, TEXT_TIMEOUT)?,
        })
    }

    pub fn from_env() -> Result<Self> {
        Self::new(Endpoint::from_env("ASR")?)
    }
}

impl Transcriber for RemoteTranscriber {
    fn transcribe(&self, audio: &AudioInput) -> Result<TextPrompt> {
        if audio.is_empty() {
            return Err(AgentError::EmptyTranscription);
        }
        let resp: TextResponse = self.http.post(&TranscribeRequest {
            model: self.http.endpoint.model.clone(),
            audio_wav_base64: BASE64.encode(audio.to_wav()),
        })?;
        TextPrompt::new(&resp.text).map_err(|e| match e {
            AgentError::InvalidPrompt(_) => AgentError::EmptyTranscription,
            other => other,
        })
    }
}

/// Asks a hosted language model to rewrite the prompt, then appends the
/// descriptor vocabulary exactly as the template refiner does.
pub struct RemoteRefiner {
    http: JsonClient,
    descriptors: DescriptorSet,
}

impl RemoteRefiner {
    pub fn new(endpoint: Endpoint, descriptors: DescriptorSet) -> Result<Self> {
        Ok(Self {
            http: JsonClient::new(endpoint, TEXT_TIMEOUT)?,
            descriptors,
        })
    }

    pub fn from_env() -> Result<Self> {
        Self::new(Endpoint::from_env("LLM")?, DescriptorSet::default())
    }
}

impl PromptRefiner for RemoteRefiner {
    fn refine(&self, raw: &TextPrompt) -> Result<RefinedPrompt> {
        let resp: TextResponse = self.http.post(&RefineRequest {
            model: self.http.endpoint.model.clone(),
            instruction: REFINE_INSTRUCTION.to_owned(),
            prompt: raw.as_str().to_owned(),
        })?;
        let rewritten = TextPrompt::new(&resp.text).map_err(|e| match e {
            AgentError::InvalidPrompt(m) => AgentError::BackendContract(m),
            other => other,
        })?;
        self.descriptors.refine(&rewritten)
    }
}

pub struct RemoteGenerator {
    http: JsonClient,
}

impl RemoteGenerator {
    pub fn new(endpoint: Endpoint) -> Result<Self> {
        Ok(Self {
            http: JsonClient::new(endpoint, GENERATION_TIMEOUT)?,
        })
    }

    pub fn from_env() -> Result<Self> {
        Self::new(Endpoint::from_env("GEN")?)
    }
}

impl VideoGenerator for RemoteGenerator {
    fn generate(&self, request: &GenerationRequest) -> Result<Clip> {
        let image = request.image_prompt();
        let resp: GenerateResponse = self.http.post(&GenerateRequest {
            model: self.http.endpoint.model.clone(),
            prompt: request.refined().rendered().to_owned(),
            image_png_base64: BASE64.encode(encode_png(image)),
            width: image.width(),
            height: image.height(),
            duration_s: request.duration_s(),
            fps: request.fps(),
            seed: request.seed(),
        })?;
        let frames = resp
            .frames_png_base64
            .iter()
            .enumerate()
            .map(|(i, b64)| {
                let bytes = BASE64
                    .decode(b64)
                    .map_err(|e| AgentError::BackendContract(format!("frame {i}: {e}")))?;
                decode_png(&bytes)
                    .map_err(|e| AgentError::BackendContract(format!("frame {i}: {e}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Clip::new(frames, resp.fps).map_err(|e| AgentError::BackendContract(e.to_string()))
    }
}
