//! Alphabet, the vertex shift, and anchored words.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A letter of the shift alphabet, or one of the two word terminators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Symbol {
    S0,
    S1,
    S2,
    /// Terminator that must never be read by a rule.
    Sentinel,
    /// Terminator standing for an arbitrary continuation by bits.
    Bowtie,
}

impl Symbol {
    pub const SHIFT: [Symbol; 3] = [Symbol::S0, Symbol::S1, Symbol::S2];

    pub fn is_shift(self) -> bool {
        matches!(self, Symbol::S0 | Symbol::S1 | Symbol::S2)
    }

    pub fn is_bit(self) -> bool {
        matches!(self, Symbol::S0 | Symbol::S1)
    }

    pub fn bit(value: bool) -> Symbol {
        if value {
            Symbol::S1
        } else {
            Symbol::S0
        }
    }

    /// Index into the shift alphabet `(0, 1, 2)`.
    pub fn index(self) -> Option<usize> {
        match self {
            Symbol::S0 => Some(0),
            Symbol::S1 => Some(1),
            Symbol::S2 => Some(2),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Symbol::S0 => '0',
            Symbol::S1 => '1',
            Symbol::S2 => '2',
            Symbol::Sentinel => '3',
            Symbol::Bowtie => '~',
        }
    }

    pub fn from_char(c: char) -> Result<Symbol> {
        match c {
            '0' => Ok(Symbol::S0),
            '1' => Ok(Symbol::S1),
            '2' => Ok(Symbol::S2),
            '3' => Ok(Symbol::Sentinel),
            '~' => Ok(Symbol::Bowtie),
            other => Err(Error::BadSymbol(other)),
        }
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Renders a symbol sequence without separators, e.g. `2001`.
pub fn word_string(word: &[Symbol]) -> String {
    word.iter().map(|s| s.as_char()).collect()
}

/// Parses a symbol sequence, ignoring whitespace.
pub fn parse_symbols(text: &str) -> Result<Vec<Symbol>> {
    text.chars()
        .filter(|c| !c.is_whitespace())
        .map(Symbol::from_char)
        .collect()
}

/// A vertex shift over a subset of `{0, 1, 2}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexShift {
    alphabet: Vec<Symbol>,
    adjacency: Vec<Vec<bool>>,
}

impl VertexShift {
    pub fn new(alphabet: Vec<Symbol>, adjacency: Vec<Vec<bool>>) -> Result<Self> {
        if alphabet.iter().any(|s| !s.is_shift()) {
            return Err(Error::MarkerInShiftWord);
        }
        let n = alphabet.len();
        if adjacency.len() != n || adjacency.iter().any(|row| row.len() != n) {
            return Err(Error::Invariant("adjacency matrix shape".into()));
        }
        Ok(VertexShift {
            alphabet,
            adjacency,
        })
    }

    /// The shift on `0, 1, 2` whose only forbidden transition is `0 -> 2`.
    pub fn standard() -> Self {
        VertexShift {
            alphabet: Symbol::SHIFT.to_vec(),
            adjacency: vec![
                vec![true, true, false],
                vec![true, true, true],
                vec![true, true, true],
            ],
        }
    }

    pub fn alphabet(&self) -> &[Symbol] {
        &self.alphabet
    }

    fn position(&self, s: Symbol) -> Option<usize> {
        self.alphabet.iter().position(|&x| x == s)
    }

    pub fn allows(&self, from: Symbol, to: Symbol) -> bool {
        match (self.position(from), self.position(to)) {
            (Some(i), Some(j)) => self.adjacency[i][j],
            _ => false,
        }
    }

    /// Legality of `word`, including the wrap-around pair when `circular`.
    pub fn is_legal_word(&self, word: &[Symbol], circular: bool) -> Result<bool> {
        if word.iter().any(|s| !s.is_shift()) {
            return Err(Error::MarkerInShiftWord);
        }
        if word.iter().any(|&s| self.position(s).is_none()) {
            return Ok(false);
        }
        let inner = word.windows(2).all(|p| self.allows(p[0], p[1]));
        let wrap = !circular || word.is_empty() || self.allows(word[word.len() - 1], word[0]);
        Ok(inner && wrap)
    }
}

impl Default for VertexShift {
    fn default() -> Self {
        Self::standard()
    }
}

/// Free-function form of [`VertexShift::is_legal_word`].
pub fn is_legal_word(word: &[Symbol], shift: &VertexShift, circular: bool) -> Result<bool> {
    shift.is_legal_word(word, circular)
}

/// How an anchored word continues past its last letter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    /// The word is one period of a bi-infinite periodic point.
    Circular,
    Sentinel,
    Bowtie,
}

impl Boundary {
    pub fn marker(self) -> Option<Symbol> {
        match self {
            Boundary::Circular => None,
            Boundary::Sentinel => Some(Symbol::Sentinel),
            Boundary::Bowtie => Some(Symbol::Bowtie),
        }
    }

    pub fn parse(text: &str) -> Result<Boundary> {
        match text {
            "circular" => Ok(Boundary::Circular),
            "sentinel" => Ok(Boundary::Sentinel),
            "bowtie" => Ok(Boundary::Bowtie),
            other => Err(Error::UnknownName(other.to_string())),
        }
    }
}

impl fmt::Display for Boundary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Boundary::Circular => "circular",
            Boundary::Sentinel => "sentinel",
            Boundary::Bowtie => "bowtie",
        })
    }
}

/// A finite word `2w` starting at an anchor, with a boundary convention.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct AnchoredWord {
    letters: Vec<Symbol>,
    boundary: Boundary,
}

impl AnchoredWord {
    pub fn new(letters: Vec<Symbol>, boundary: Boundary) -> Result<Self> {
        Self::with_shift(letters, boundary, &VertexShift::standard())
    }

    pub fn with_shift(
        letters: Vec<Symbol>,
        boundary: Boundary,
        shift: &VertexShift,
    ) -> Result<Self> {
        if letters.is_empty() {
            return Err(Error::EmptyWord);
        }
        if letters[0] != Symbol::S2 {
            return Err(Error::MissingAnchor(word_string(&letters)));
        }
        if !shift.is_legal_word(&letters, boundary == Boundary::Circular)? {
            return Err(Error::IllegalWord(word_string(&letters)));
        }
        Ok(AnchoredWord { letters, boundary })
    }

    /// `2` followed by the given bits.
    pub fn from_bits(bits: &str, boundary: Boundary) -> Result<Self> {
        let mut letters = vec![Symbol::S2];
        for c in bits.chars() {
            let s = Symbol::from_char(c)?;
            if !s.is_bit() {
                return Err(Error::BadSymbol(c));
            }
            letters.push(s);
        }
        Self::new(letters, boundary)
    }

    /// Parses a literal like `2001`, `2 0 0 1`, `2003` (sentinel) or `200~` (bowtie).
    /// Without a trailing marker the word is circular.
    pub fn parse(text: &str) -> Result<Self> {
        let (symbols, boundary) = Self::split_marker(text)?;
        Self::new(symbols, boundary.unwrap_or(Boundary::Circular))
    }

    /// Parses a literal with an explicit boundary; a trailing marker must agree with it.
    pub fn parse_with_boundary(text: &str, boundary: Boundary) -> Result<Self> {
        let (symbols, marked) = Self::split_marker(text)?;
        match marked {
            Some(m) if m != boundary => Err(Error::Invariant(format!(
                "word {text:?} ends in a {m} marker but boundary {boundary} was requested"
            ))),
            _ => Self::new(symbols, boundary),
        }
    }

    fn split_marker(text: &str) -> Result<(Vec<Symbol>, Option<Boundary>)> {
        let mut symbols = parse_symbols(text)?;
        let boundary = match symbols.last() {
            Some(Symbol::Sentinel) => Some(Boundary::Sentinel),
            Some(Symbol::Bowtie) => Some(Boundary::Bowtie),
            _ => None,
        };
        if boundary.is_some() {
            symbols.pop();
        }
        Ok((symbols, boundary))
    }

    pub fn letters(&self) -> &[Symbol] {
        &self.letters
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl fmt::Display for AnchoredWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&word_string(&self.letters))?;
        if let Some(m) = self.boundary.marker() {
            write!(f, "{m}")?;
        }
        Ok(())
    }
}
