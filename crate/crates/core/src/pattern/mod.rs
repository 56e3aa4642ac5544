//! Glob patterns compiled to minimal complete automata over a finite
//! alphabet, with the boolean operations, emptiness and bounded counting
//! the analyzer builds policy denotations from.

mod alphabet;
mod count;
mod dfa;

use thiserror::Error;

pub use alphabet::Alphabet;
pub(crate) use count::decimal;
pub use count::{count_upto, CountResult};
pub use dfa::Dfa;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("character {ch:?} in {text:?} is outside the alphabet")]
    CharOutsideAlphabet { ch: char, text: String },
    #[error("automata are over different alphabets")]
    AlphabetMismatch,
    #[error("invalid alphabet: {0}")]
    InvalidAlphabet(String),
}
