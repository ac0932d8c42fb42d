//! Deterministic answer extraction.
//!
//! A response is first narrowed to one segment (the last fenced block, else
//! the text after the last `Answer:` marker) and the task grammar is then
//! applied to that segment only.

use crate::geometry::{CardinalDirection, Color};
use crate::tasks::{Answer, LetterMove, TaskEnv};
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::sync::OnceLock;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ParseStatus {
    ParsedDeterministic,
    ParsedLlm,
    Unparseable,
}

/// Info strings that may follow an opening fence without being the answer.
const INFO_STRINGS: &[&str] = &["text", "txt", "plain", "plaintext", "answer", "md", "markdown", "json"];

fn last_fenced_block(text: &str) -> Option<String> {
    let mut fences = Vec::new();
    let mut from = 0;
    while let Some(i) = text[from..].find("```") {
        fences.push(from + i);
        from += i + 3;
    }
    if fences.len() < 2 {
        return None;
    }
    let pairs = fences.len() / 2;
    let open = fences[2 * (pairs - 1)];
    let close = fences[2 * (pairs - 1) + 1];
    let inner = &text[open + 3..close];
    let body = match inner.split_once('\n') {
        Some((first, rest)) if INFO_STRINGS.contains(&first.trim().to_ascii_lowercase().as_str()) => rest,
        _ => inner,
    };
    Some(body.trim().to_string())
}

fn after_last_answer_marker(text: &str) -> Option<String> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| Regex::new(r"(?i)answer\s*\**\s*:").expect("static regex"));
    let m = re.find_iter(text).last()?;
    Some(text[m.end()..].trim().to_string())
}

/// Isolates the part of a response that should hold the answer.
pub fn extract_segment(text: &str) -> Option<String> {
    let seg = last_fenced_block(text).or_else(|| after_last_answer_marker(text))?;
    Some(seg.replace(['*', '`'], "").trim().to_string())
}

/// Full deterministic path: segment extraction then the task grammar.
pub fn parse_answer(env: &dyn TaskEnv, text: &str) -> Option<Answer> {
    env.parse_segment(&extract_segment(text)?)
}

/// The single color named in `segment`; `None` if zero or several distinct
/// colors are mentioned.
pub fn parse_color(segment: &str) -> Option<Color> {
    let mut found: Option<Color> = None;
    for word in segment.split(|c: char| !c.is_ascii_alphabetic()) {
        if let Some(c) = Color::from_word(word) {
            match found {
                Some(f) if f != c => return None,
                _ => found = Some(c),
            }
        }
    }
    found
}

fn is_separator(c: char) -> bool {
    c.is_whitespace() || matches!(c, ',' | ';' | '.' | '-' | '>' | '→' | '|' | '[' | ']' | '(' | ')' | '"' | '\'')
}

fn direction_word(w: &str) -> Option<CardinalDirection> {
    match w.to_ascii_lowercase().as_str() {
        "up" | "north" => Some(CardinalDirection::North),
        "down" | "south" => Some(CardinalDirection::South),
        "left" | "west" => Some(CardinalDirection::West),
        "right" | "east" => Some(CardinalDirection::East),
        _ => None,
    }
}

/// Move letters `U D L R`, runs like `UULD`, or direction words. An empty
/// segment or `none` is the empty plan. Any other token fails the parse.
pub fn parse_moves(segment: &str) -> Option<Vec<CardinalDirection>> {
    let tokens: Vec<&str> = segment.split(is_separator).filter(|t| !t.is_empty()).collect();
    if tokens.len() == 1 && tokens[0].eq_ignore_ascii_case("none") {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    for t in tokens {
        if let Some(d) = direction_word(t) {
            out.push(d);
        } else if t.chars().all(|c| matches!(c, 'U' | 'D' | 'L' | 'R')) {
            out.extend(t.chars().filter_map(CardinalDirection::from_screen_letter));
        } else {
            return None;
        }
    }
    Some(out)
}

/// Block-letter moves such as `AD BL`, `A down`, `B-L`. The whole segment
/// must consist of moves and separators.
pub fn parse_slides(segment: &str) -> Option<Vec<LetterMove>> {
    static RE: OnceLock<Regex> = OnceLock::new();
    let re = RE.get_or_init(|| {
        Regex::new(r"([A-Z])\s*[-:]?\s*(UP|DOWN|LEFT|RIGHT|NORTH|SOUTH|EAST|WEST|U|D|L|R)").expect("static regex")
    });
    let upper = segment.to_ascii_uppercase();
    if upper.trim().is_empty() || upper.trim() == "NONE" {
        return Some(Vec::new());
    }
    let mut out = Vec::new();
    let mut last = 0;
    for cap in re.captures_iter(&upper) {
        let whole = cap.get(0).expect("group 0 always matches");
        if !upper[last..whole.start()].chars().all(is_separator) {
            return None;
        }
        last = whole.end();
        let letter = cap[1].chars().next().expect("one letter");
        let dir = &cap[2];
        let direction = if dir.len() == 1 {
            CardinalDirection::from_screen_letter(dir.chars().next().expect("one letter"))
        } else {
            direction_word(dir)
        }?;
        out.push(LetterMove { letter, direction });
    }
    if !upper[last..].chars().all(is_separator) || out.is_empty() {
        return None;
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use CardinalDirection::*;

    #[test]
    fn segment_prefers_last_fence() {
        let t = "first ```\nred\n``` then ```text\nblue\n``` done";
        assert_eq!(extract_segment(t).as_deref(), Some("blue"));
        assert_eq!(extract_segment("so... **Answer:** green.").as_deref(), Some("green."));
        assert_eq!(extract_segment("no marker here"), None);
        assert_eq!(extract_segment("```red```").as_deref(), Some("red"));
    }

    #[test]
    fn colors() {
        assert_eq!(parse_color("green."), Some(Color::Green));
        assert_eq!(parse_color("red or blue"), None);
        assert_eq!(parse_color("red, definitely red"), Some(Color::Red));
        assert_eq!(parse_color("nothing"), None);
    }

    #[test]
    fn moves() {
        assert_eq!(parse_moves("U U L D"), Some(vec![North, North, West, South]));
        assert_eq!(parse_moves("UULD"), Some(vec![North, North, West, South]));
        assert_eq!(parse_moves("up, right -> down."), Some(vec![North, East, South]));
        assert_eq!(parse_moves(""), Some(vec![]));
        assert_eq!(parse_moves("U X"), None);
        assert_eq!(parse_moves("uuld"), None);
    }

    #[test]
    fn slides() {
        let m = parse_slides("AD BL").unwrap();
        assert_eq!(m, vec![
            LetterMove { letter: 'A', direction: South },
            LetterMove { letter: 'B', direction: West }
        ]);
        assert_eq!(parse_slides("A down, b-r").unwrap().len(), 2);
        assert_eq!(parse_slides("DD").unwrap()[0], LetterMove { letter: 'D', direction: South });
        assert_eq!(parse_slides("AD and then BL"), None);
        assert_eq!(parse_slides("hello"), None);
    }
}
