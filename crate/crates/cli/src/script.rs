//! Action scripts for headless chaining.
//!
//! One action per line:
//!
//! ```text
//! # comments and blank lines are ignored
//! segment 1: text "a storm rolls in" yaw 45
//! segment 2: speech aurora
//! segment 3: reuse yaw -90
//! ```
//!
//! Inside quotes, `\"` and `\\` are the only escapes.

use crate::error::CliError;

#[derive(Debug, Clone, PartialEq)]
pub enum ScriptAction {
    Reuse,
    Text(String),
    /// A bundled audio fixture id.
    Speech(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScriptStep {
    /// 1-based source line.
    pub line: usize,
    pub segment: usize,
    pub action: ScriptAction,
    pub yaw: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Word(String),
    Quoted(String),
}

fn tokenize(line: &str) -> Result<Vec<Token>, String> {
    let mut tokens = Vec::new();
    let mut chars = line.chars().peekable();
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
        } else if c == '"' {
            chars.next();
            let mut text = String::new();
            loop {
                match chars.next() {
                    None => return Err("unterminated quoted string".into()),
                    Some('"') => break,
                    Some('\\') => match chars.next() {
                        Some(e @ ('"' | '\\')) => text.push(e),
                        Some(other) => return Err(format!("unknown escape \\{other}")),
                        None => return Err("unterminated quoted string".into()),
                    },
                    Some(other) => text.push(other),
                }
            }
            tokens.push(Token::Quoted(text));
        } else {
            let mut word = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_whitespace() || c == '"' {
                    break;
                }
                word.push(c);
                chars.next();
            }
            tokens.push(Token::Word(word));
        }
    }
    Ok(tokens)
}

fn word(token: Option<&Token>, what: &str) -> Result<String, String> {
    match token {
        Some(Token::Word(w)) => Ok(w.clone()),
        Some(Token::Quoted(_)) => Err(format!("expected {what}, found a quoted string")),
        None => Err(format!("expected {what}")),
    }
}

fn parse_line(line: &str) -> Result<(usize, ScriptAction, Option<f64>), String> {
    let tokens = tokenize(line)?;
    let mut it = tokens.iter();
    if word(it.next(), "`segment`")? != "segment" {
        return Err("lines start with `segment <k>:`".into());
    }
    let label = word(it.next(), "a segment number")?;
    let digits = label
        .strip_suffix(':')
        .ok_or_else(|| format!("expected `:` after segment number, found `{label}`"))?;
    let segment: usize = digits
        .parse()
        .map_err(|_| format!("`{digits}` is not a segment number"))?;

    let action = match word(it.next(), "an action (reuse, text or speech)")?.as_str() {
        "reuse" => ScriptAction::Reuse,
        "text" => match it.next() {
            Some(Token::Quoted(t)) => ScriptAction::Text(t.clone()),
            _ => return Err("`text` needs a quoted prompt".into()),
        },
        "speech" => ScriptAction::Speech(word(it.next(), "a fixture id after `speech`")?),
        other => return Err(format!("unknown action `{other}`")),
    };

    let yaw = match it.next() {
        None => None,
        Some(Token::Word(w)) if w == "yaw" => {
            let value = word(it.next(), "degrees after `yaw`")?;
            let deg: f64 = value.parse().map_err(|_| format!("`{value}` is not a number"))?;
            if !deg.is_finite() {
                return Err(format!("yaw must be finite, got {value}"));
            }
            Some(deg)
        }
        Some(_) => return Err("only `yaw <deg>` may follow the action".into()),
    };
    if it.next().is_some() {
        return Err("unexpected text after yaw".into());
    }
    Ok((segment, action, yaw))
}

/// Parses a whole script. Segment numbers must be at least 1 and strictly
/// increasing; segment 0 comes from the initial prompt.
pub fn parse_script(source: &str) -> Result<Vec<ScriptStep>, CliError> {
    let mut steps: Vec<ScriptStep> = Vec::new();
    for (i, raw) in source.lines().enumerate() {
        let line = i + 1;
        let text = raw.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let (segment, action, yaw) =
            parse_line(text).map_err(|message| CliError::Script { line, message })?;
        if segment == 0 {
            return Err(CliError::Script {
                line,
                message: "segment 0 comes from the initial prompt; scripts start at segment 1".into(),
            });
        }
        if let Some(prev) = steps.last() {
            if segment <= prev.segment {
                return Err(CliError::Script {
                    line,
                    message: format!("segment {segment} follows segment {}; order must increase", prev.segment),
                });
            }
        }
        steps.push(ScriptStep {
            line,
            segment,
            action,
            yaw,
        });
    }
    Ok(steps)
}
