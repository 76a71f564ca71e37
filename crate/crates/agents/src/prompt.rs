//! Text prompts and panorama descriptor augmentation.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{AgentError, Result};

/// Longest prompt accepted, in characters.
pub const MAX_PROMPT_CHARS: usize = 2000;

const SEPARATOR: &str = ", ";

/// Descriptors appended to every prompt unless configured otherwise.
pub const DEFAULT_DESCRIPTORS: [&str; 3] = [
    "360 degree equirectangular panorama",
    "seamless horizontal wrap",
    "wide field of view",
];

/// A trimmed, non-empty prompt of at most [`MAX_PROMPT_CHARS`] characters.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct TextPrompt(String);

impl TextPrompt {
    pub fn new(text: &str) -> Result<Self> {
        let trimmed = text.trim();
        if trimmed.is_empty() {
            return Err(AgentError::InvalidPrompt("prompt is empty".into()));
        }
        let len = trimmed.chars().count();
        if len > MAX_PROMPT_CHARS {
            return Err(AgentError::PromptTooLong {
                len,
                limit: MAX_PROMPT_CHARS,
            });
        }
        Ok(Self(trimmed.to_owned()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for TextPrompt {
    type Error = AgentError;

    fn try_from(text: String) -> Result<Self> {
        Self::new(&text)
    }
}

impl From<TextPrompt> for String {
    fn from(p: TextPrompt) -> String {
        p.0
    }
}

impl fmt::Display for TextPrompt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A base prompt with panorama descriptors appended.
///
/// `rendered` is `base, d1, d2, ...`, or just `base` when no descriptor was
/// needed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RefinedRepr")]
pub struct RefinedPrompt {
    base: TextPrompt,
    descriptors: Vec<String>,
    rendered: String,
}

#[derive(Deserialize)]
struct RefinedRepr {
    base: TextPrompt,
    descriptors: Vec<String>,
    rendered: String,
}

impl TryFrom<RefinedRepr> for RefinedPrompt {
    type Error = AgentError;

    fn try_from(repr: RefinedRepr) -> Result<Self> {
        let refined = RefinedPrompt::from_parts(repr.base, repr.descriptors)?;
        if refined.rendered != repr.rendered {
            return Err(AgentError::InvalidPrompt(
                "rendered prompt does not match base and descriptors".into(),
            ));
        }
        Ok(refined)
    }
}

impl RefinedPrompt {
    pub fn from_parts(base: TextPrompt, descriptors: Vec<String>) -> Result<Self> {
        for (i, d) in descriptors.iter().enumerate() {
            if d.trim().is_empty() {
                return Err(AgentError::InvalidPrompt("empty descriptor".into()));
            }
            if descriptors[..i].contains(d) {
                return Err(AgentError::InvalidPrompt(format!("duplicate descriptor {d:?}")));
            }
        }
        let mut rendered = base.as_str().to_owned();
        for d in &descriptors {
            rendered.push_str(SEPARATOR);
            rendered.push_str(d);
        }
        let len = rendered.chars().count();
        if len > MAX_PROMPT_CHARS {
            return Err(AgentError::PromptTooLong {
                len,
                limit: MAX_PROMPT_CHARS,
            });
        }
        Ok(Self {
            base,
            descriptors,
            rendered,
        })
    }

    pub fn base(&self) -> &TextPrompt {
        &self.base
    }

    pub fn descriptors(&self) -> &[String] {
        &self.descriptors
    }

    pub fn rendered(&self) -> &str {
        &self.rendered
    }
}

impl fmt::Display for RefinedPrompt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.rendered)
    }
}

/// Ordered, duplicate-free vocabulary of panorama descriptors.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "Vec<String>", into = "Vec<String>")]
pub struct DescriptorSet(Vec<String>);

impl Default for DescriptorSet {
    fn default() -> Self {
        Self::new(DEFAULT_DESCRIPTORS)
    }
}

impl From<Vec<String>> for DescriptorSet {
    fn from(items: Vec<String>) -> Self {
        Self::new(items)
    }
}

impl From<DescriptorSet> for Vec<String> {
    fn from(set: DescriptorSet) -> Self {
        set.0
    }
}

impl DescriptorSet {
    /// Builds a vocabulary, dropping blanks and repeated entries.
    pub fn new<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut out: Vec<String> = Vec::new();
        for item in items {
            let item = item.into().trim().to_owned();
            if !item.is_empty() && !out.contains(&item) {
                out.push(item);
            }
        }
        Self(out)
    }

    pub fn items(&self) -> &[String] {
        &self.0
    }

    /// Appends each descriptor not already present (case-insensitively) in
    /// `raw`, in vocabulary order.
    pub fn refine(&self, raw: &TextPrompt) -> Result<RefinedPrompt> {
        let haystack = raw.as_str().to_lowercase();
        let missing = self
            .0
            .iter()
            .filter(|d| !haystack.contains(&d.to_lowercase()))
            .cloned()
            .collect();
        RefinedPrompt::from_parts(raw.clone(), missing)
    }

    /// Splits a rendered prompt back into base and descriptors, stripping the
    /// longest trailing run of vocabulary descriptors in vocabulary order.
    ///
    /// The result always re-renders to `rendered`. For strings produced by
    /// [`refine`](Self::refine), refining the parsed base reproduces
    /// `rendered` exactly; anything else parses as a bare base.
    pub fn parse(&self, rendered: &str) -> Result<RefinedPrompt> {
        let mut base = rendered.trim();
        let mut found: Vec<String> = Vec::new();
        // Walk the vocabulary backwards, peeling matching suffixes.
        for d in self.0.iter().rev() {
            let suffix_len = SEPARATOR.len() + d.len();
            if base.len() > suffix_len
                && base.is_char_boundary(base.len() - suffix_len)
                && base.ends_with(d.as_str())
                && base[..base.len() - d.len()].ends_with(SEPARATOR)
            {
                let candidate = base[..base.len() - suffix_len].trim_end();
                if candidate.is_empty() {
                    break;
                }
                base = candidate;
                found.push(d.clone());
            }
        }
        found.reverse();
        let base = TextPrompt::new(base)?;
        let haystack = base.as_str().to_lowercase();
        // Descriptors that stayed in the base count as present, which is
        // exactly what `refine` would have skipped.
        let expected: Vec<String> = self
            .0
            .iter()
            .filter(|d| !haystack.contains(&d.to_lowercase()))
            .cloned()
            .collect();
        if expected != found {
            // The suffix does not read as a refinement; keep the text whole.
            let whole = TextPrompt::new(rendered)?;
            return RefinedPrompt::from_parts(whole, Vec::new());
        }
        RefinedPrompt::from_parts(base, found)
    }
}
