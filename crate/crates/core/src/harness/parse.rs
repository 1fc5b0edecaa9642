use regex::Regex;
use std::sync::OnceLock;

use crate::error::HarnessError;

/// A score extracted from a model reply.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedScore {
    pub score: f64,
    pub justification: Option<String>,
}

fn score_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?mi)\bscore\b\s*:?\s*\**\s*([0-9]+(?:[.,][0-9]+)?)\s*/\s*10\b")
            .expect("score pattern compiles")
    })
}

fn justification_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(r"(?mi)\bjustification\b\s*:?\s*\**\s*(\S.*)").expect("pattern compiles")
    })
}

/// Extracts the `Score : N/10` value from a reply.
///
/// Tolerates case, markdown emphasis, spacing around the slash, and a comma
/// decimal separator (the prompts are used in French). A reply that states
/// two different scores is rejected rather than guessed at; restating the
/// same value is fine.
pub fn parse_score(raw: &str) -> Result<ParsedScore, HarnessError> {
    let mut score: Option<f64> = None;
    for caps in score_re().captures_iter(raw) {
        let text = caps[1].replace(',', ".");
        let value: f64 = text
            .parse()
            .map_err(|_| HarnessError::Parse(format!("unreadable score `{text}`")))?;
        match score {
            None => score = Some(value),
            Some(prev) if prev != value => {
                return Err(HarnessError::Parse(format!(
                    "reply states conflicting scores {prev} and {value}"
                )));
            }
            Some(_) => {}
        }
    }
    let score = score.ok_or_else(|| {
        HarnessError::Parse(format!(
            "no `Score : N/10` line in reply: {:?}",
            raw.chars().take(120).collect::<String>()
        ))
    })?;
    if !(0.0..=10.0).contains(&score) {
        return Err(HarnessError::Parse(format!("score {score} outside 0..=10")));
    }
    let justification = justification_re()
        .captures(raw)
        .map(|c| c[1].trim().trim_end_matches('*').trim().to_string())
        .filter(|s| !s.is_empty());
    Ok(ParsedScore { score, justification })
}
