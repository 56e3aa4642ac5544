use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::PatternError;

const DEFAULT_SYMBOLS: &str =
    "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789/:-_.,";

/// Ordered, finite set of characters that every automaton is built over.
///
/// The glob metacharacters `*` and `?` are never members.
#[derive(Clone, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<char>,
    ascii: [u8; 128],
    other: HashMap<char, u8>,
}

const NOT_PRESENT: u8 = u8::MAX;

impl Alphabet {
    /// Builds an alphabet from the given characters, keeping first-seen order
    /// and dropping duplicates.
    pub fn new<I: IntoIterator<Item = char>>(chars: I) -> Result<Self, PatternError> {
        let mut symbols = Vec::new();
        let mut ascii = [NOT_PRESENT; 128];
        let mut other = HashMap::new();
        for c in chars {
            if c == '*' || c == '?' {
                return Err(PatternError::InvalidAlphabet(format!(
                    "metacharacter {c:?} cannot be an alphabet symbol"
                )));
            }
            let present = if c.is_ascii() {
                ascii[c as usize] != NOT_PRESENT
            } else {
                other.contains_key(&c)
            };
            if present {
                continue;
            }
            if symbols.len() >= NOT_PRESENT as usize {
                return Err(PatternError::InvalidAlphabet(
                    "alphabet is limited to 254 symbols".into(),
                ));
            }
            let idx = symbols.len() as u8;
            if c.is_ascii() {
                ascii[c as usize] = idx;
            } else {
                other.insert(c, idx);
            }
            symbols.push(c);
        }
        if symbols.is_empty() {
            return Err(PatternError::InvalidAlphabet("alphabet is empty".into()));
        }
        Ok(Self {
            symbols,
            ascii,
            other,
        })
    }

    /// Letters in both cases, digits, and `/ : - _ . ,`.
    pub fn iam_default() -> Self {
        Self::new(DEFAULT_SYMBOLS.chars()).expect("default alphabet is valid")
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[char] {
        &self.symbols
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        if c.is_ascii() {
            match self.ascii[c as usize] {
                NOT_PRESENT => None,
                i => Some(i as usize),
            }
        } else {
            self.other.get(&c).map(|&i| i as usize)
        }
    }

    pub fn contains(&self, c: char) -> bool {
        self.index_of(c).is_some()
    }

    /// Checks that every non-metacharacter of `text` is a symbol.
    pub fn check_literals(&self, text: &str) -> Result<(), PatternError> {
        match text
            .chars()
            .find(|&c| c != '*' && c != '?' && !self.contains(c))
        {
            Some(c) => Err(PatternError::CharOutsideAlphabet {
                ch: c,
                text: text.to_string(),
            }),
            None => Ok(()),
        }
    }

    /// Stable identifier reported alongside every count.
    pub fn id(&self) -> String {
        if self.symbols.iter().copied().eq(DEFAULT_SYMBOLS.chars()) {
            return format!("iam-default-{}", self.len());
        }
        let text: String = self.symbols.iter().collect();
        let digest = Sha256::digest(text.as_bytes());
        let hex: String = digest[..4].iter().map(|b| format!("{b:02x}")).collect();
        format!("custom-{}-{}", self.len(), hex)
    }
}

impl Default for Alphabet {
    fn default() -> Self {
        Self::iam_default()
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let text: String = self.symbols.iter().collect();
        f.debug_tuple("Alphabet").field(&text).finish()
    }
}

impl Serialize for Alphabet {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let text: String = self.symbols.iter().collect();
        serializer.serialize_str(&text)
    }
}

impl<'de> Deserialize<'de> for Alphabet {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        Alphabet::new(text.chars()).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_alphabet_layout() {
        let a = Alphabet::iam_default();
        assert_eq!(a.len(), 68);
        assert_eq!(a.index_of('a'), Some(0));
        assert_eq!(a.index_of(','), Some(67));
        assert!(!a.contains('*'));
        assert!(!a.contains(' '));
        assert_eq!(a.id(), "iam-default-68");
    }

    #[test]
    fn rejects_metacharacters_and_empty() {
        assert!(Alphabet::new("ab*".chars()).is_err());
        assert!(Alphabet::new("".chars()).is_err());
    }

    #[test]
    fn duplicates_collapse() {
        let a = Alphabet::new("abab".chars()).unwrap();
        assert_eq!(a.symbols(), &['a', 'b']);
        assert!(a.id().starts_with("custom-2-"));
    }

    #[test]
    fn literal_check_ignores_metacharacters() {
        let a = Alphabet::new("ab".chars()).unwrap();
        assert!(a.check_literals("a*b?").is_ok());
        assert!(matches!(
            a.check_literals("abc"),
            Err(PatternError::CharOutsideAlphabet { ch: 'c', .. })
        ));
    }
}
