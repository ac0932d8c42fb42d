use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// The fixed eight-color palette shared by prompts and renders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    White,
    Yellow,
    Red,
    Orange,
    Green,
    Blue,
    Purple,
    Gray,
}

impl Color {
    pub const ALL: [Color; 8] = [
        Self::White,
        Self::Yellow,
        Self::Red,
        Self::Orange,
        Self::Green,
        Self::Blue,
        Self::Purple,
        Self::Gray,
    ];

    /// The six colors of a standard cube.
    pub const CUBE: [Color; 6] = [
        Self::White,
        Self::Yellow,
        Self::Red,
        Self::Orange,
        Self::Green,
        Self::Blue,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Self::White => "white",
            Self::Yellow => "yellow",
            Self::Red => "red",
            Self::Orange => "orange",
            Self::Green => "green",
            Self::Blue => "blue",
            Self::Purple => "purple",
            Self::Gray => "gray",
        }
    }

    pub fn hex(self) -> &'static str {
        match self {
            Self::White => "#f4f4f4",
            Self::Yellow => "#ffd500",
            Self::Red => "#c8102e",
            Self::Orange => "#ff6a13",
            Self::Green => "#009b48",
            Self::Blue => "#0046ad",
            Self::Purple => "#7d3c98",
            Self::Gray => "#8c8c8c",
        }
    }

    /// Single-character code used in compact state strings.
    pub fn code(self) -> char {
        match self {
            Self::White => 'W',
            Self::Yellow => 'Y',
            Self::Red => 'R',
            Self::Orange => 'O',
            Self::Green => 'G',
            Self::Blue => 'B',
            Self::Purple => 'P',
            Self::Gray => 'A',
        }
    }

    pub fn from_code(c: char) -> Option<Color> {
        Self::ALL.into_iter().find(|col| col.code() == c)
    }

    /// Resolves a color word, accepting common synonyms.
    pub fn from_word(word: &str) -> Option<Color> {
        let w = word
            .trim_matches(|c: char| !c.is_ascii_alphabetic())
            .to_ascii_lowercase();
        let canonical = match w.as_str() {
            "grey" | "silver" => "gray",
            "violet" | "magenta" | "lilac" => "purple",
            "amber" => "orange",
            "gold" | "golden" => "yellow",
            "scarlet" | "crimson" => "red",
            "navy" => "blue",
            "emerald" | "lime" => "green",
            other => other,
        };
        Self::ALL.into_iter().find(|c| c.name() == canonical)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Color {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Color::from_word(s).ok_or_else(|| format!("unknown color `{s}`"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_codes_are_distinct() {
        for (i, a) in Color::ALL.iter().enumerate() {
            assert_eq!(Color::from_word(a.name()), Some(*a));
            assert_eq!(Color::from_code(a.code()), Some(*a));
            for b in &Color::ALL[i + 1..] {
                assert_ne!(a.code(), b.code());
                assert_ne!(a.hex(), b.hex());
            }
        }
    }

    #[test]
    fn synonyms() {
        assert_eq!(Color::from_word("Grey"), Some(Color::Gray));
        assert_eq!(Color::from_word("**red**."), Some(Color::Red));
        assert_eq!(Color::from_word("teal"), None);
    }
}
