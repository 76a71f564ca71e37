//! Deterministic offline backends.

use std::collections::HashMap;
use std::fs;
use std::path::Path;
use std::thread;
use std::time::Duration;

use pano_core::{shift_columns, Clip, Frame};
use sha2::{Digest, Sha256};

use crate::audio::AudioInput;
use crate::backend::{PromptRefiner, Transcriber, VideoGenerator};
use crate::error::{AgentError, Result};
use crate::prompt::{DescriptorSet, RefinedPrompt, TextPrompt};
use crate::request::GenerationRequest;

/// A recorded utterance bundled with the crate.
#[derive(Debug, Clone, Copy)]
pub struct AudioFixture {
    pub id: &'static str,
    pub wav: &'static [u8],
}

pub const AUDIO_FIXTURES: [AudioFixture; 3] = [
    AudioFixture {
        id: "thunderstorm",
        wav: include_bytes!("../fixtures/audio/thunderstorm.wav"),
    },
    AudioFixture {
        id: "aurora",
        wav: include_bytes!("../fixtures/audio/aurora.wav"),
    },
    AudioFixture {
        id: "silence",
        wav: include_bytes!("../fixtures/audio/silence.wav"),
    },
];

const FIXTURE_TRANSCRIPTS: &str = include_str!("../fixtures/audio/transcripts.json");

/// Decoded audio for a bundled fixture id.
pub fn fixture_audio(id: &str) -> Option<AudioInput> {
    AUDIO_FIXTURES
        .iter()
        .find(|f| f.id == id)
        .map(|f| AudioInput::from_wav(f.wav).expect("bundled fixtures are valid WAV"))
}

/// Looks transcripts up by the content hash of the samples.
#[derive(Debug, Clone, Default)]
pub struct FixtureTranscriber {
    by_hash: HashMap<String, String>,
}

impl FixtureTranscriber {
    pub fn new() -> Self {
        Self::default()
    }

    /// The fixtures under `fixtures/audio`.
    pub fn builtin() -> Self {
        let transcripts: HashMap<String, String> =
            serde_json::from_str(FIXTURE_TRANSCRIPTS).expect("bundled transcript table parses");
        let mut t = Self::new();
        for fixture in AUDIO_FIXTURES {
            let audio = fixture_audio(fixture.id).unwrap();
            t.insert(&audio, transcripts[fixture.id].clone());
        }
        t
    }

    /// Loads every `<id>.wav` in `dir` paired with the `transcripts.json`
    /// table (`{"<id>": "<text>"}`) next to it.
    pub fn from_dir(dir: &Path) -> Result<Self> {
        let table_path = dir.join("transcripts.json");
        let raw = fs::read_to_string(&table_path).map_err(|e| {
            AgentError::Config(format!("reading {}: {e}", table_path.display()))
        })?;
        let transcripts: HashMap<String, String> = serde_json::from_str(&raw)
            .map_err(|e| AgentError::Config(format!("parsing {}: {e}", table_path.display())))?;
        let mut t = Self::new();
        for (id, text) in transcripts {
            let wav_path = dir.join(format!("{id}.wav"));
            let bytes = fs::read(&wav_path)
                .map_err(|e| AgentError::Config(format!("reading {}: {e}", wav_path.display())))?;
            t.insert(&AudioInput::from_wav(&bytes)?, text);
        }
        Ok(t)
    }

    pub fn insert(&mut self, audio: &AudioInput, transcript: impl Into<String>) {
        self.by_hash.insert(audio.content_hash(), transcript.into());
    }
}

impl Transcriber for FixtureTranscriber {
    fn transcribe(&self, audio: &AudioInput) -> Result<TextPrompt> {
        if audio.is_empty() {
            return Err(AgentError::EmptyTranscription);
        }
        // Unknown audio is treated as unintelligible: nothing was heard.
        let text = self
            .by_hash
            .get(&audio.content_hash())
            .ok_or(AgentError::EmptyTranscription)?;
        TextPrompt::new(text).map_err(|e| match e {
            AgentError::InvalidPrompt(_) => AgentError::EmptyTranscription,
            other => other,
        })
    }
}

/// Appends the configured descriptor vocabulary; no rewriting.
#[derive(Debug, Clone, Default)]
pub struct TemplateRefiner {
    pub descriptors: DescriptorSet,
}

impl TemplateRefiner {
    pub fn new(descriptors: DescriptorSet) -> Self {
        Self { descriptors }
    }
}

impl PromptRefiner for TemplateRefiner {
    fn refine(&self, raw: &TextPrompt) -> Result<RefinedPrompt> {
        self.descriptors.refine(raw)
    }
}

/// Synthesizes a clip from the image prompt.
///
/// Frame `i` is the image prompt rotated left by `i` columns (wrapping) with
/// a per-channel brightness offset that ramps linearly from 0 at frame 0 to
/// a prompt-dependent amplitude in `[-24, 24]` at the last frame. Frame 0 is
/// therefore the image prompt, byte for byte.
#[derive(Debug, Clone, Copy, Default)]
pub struct MockGenerator;

const GRADE_SPAN: i32 = 24;

impl MockGenerator {
    /// Final-frame channel offsets derived from `(seed, rendered prompt)`.
    pub fn grade_amplitude(seed: u64, rendered: &str) -> [i32; 3] {
        let mut hasher = Sha256::new();
        hasher.update(seed.to_le_bytes());
        hasher.update(rendered.as_bytes());
        let digest = hasher.finalize();
        [0, 1, 2].map(|c| i32::from(digest[c]) % (2 * GRADE_SPAN + 1) - GRADE_SPAN)
    }
}

impl VideoGenerator for MockGenerator {
    fn generate(&self, request: &GenerationRequest) -> Result<Clip> {
        let n = request.expected_frames();
        let amp = Self::grade_amplitude(request.seed(), request.refined().rendered());
        let base = request.image_prompt().as_frame();
        let frames: Vec<Frame> = (0..n)
            .map(|i| {
                let mut frame = shift_columns(base, i as i64);
                if i > 0 {
                    let denom = (n - 1) as i32;
                    let offset = amp.map(|a| a * i as i32 / denom);
                    for px in frame.as_bytes_mut().chunks_exact_mut(3) {
                        for c in 0..3 {
                            px[c] = (i32::from(px[c]) + offset[c]).clamp(0, 255) as u8;
                        }
                    }
                }
                frame
            })
            .collect();
        Ok(Clip::new(frames, request.fps())?)
    }
}

/// Wraps a generator with a fixed wall-clock delay per call, standing in
/// for a hosted model's latency.
#[derive(Debug, Clone)]
pub struct Delayed<G> {
    pub inner: G,
    pub delay: Duration,
}

impl<G: VideoGenerator> VideoGenerator for Delayed<G> {
    fn generate(&self, request: &GenerationRequest) -> Result<Clip> {
        thread::sleep(self.delay);
        self.inner.generate(request)
    }
}
