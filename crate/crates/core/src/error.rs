use thiserror::Error;

/// Everything that can go wrong while building or rewriting flowed words.
///
/// Positions are letter indices counted from the first letter of the word the
/// failing step was applied to (index 0 is the anchor for anchored words).
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("marker in shift word")]
    MarkerInShiftWord,
    #[error("illegal word {0}: forbidden transition")]
    IllegalWord(String),
    #[error("anchored word must start with the anchor symbol 2, got {0}")]
    MissingAnchor(String),
    #[error("empty word")]
    EmptyWord,
    #[error("rotate requires circular word")]
    RotateRequiresCircular,
    #[error("rotation {0} outside [0, span)")]
    RotationOutOfRange(String),
    #[error("invariant violation: {0}")]
    Invariant(String),
    #[error("cannot parse symbol {0:?}")]
    BadSymbol(char),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("no covering mapping for cell {0}")]
    NoCoveringMapping(isize),
    #[error("ambiguous cover at cell {0}")]
    AmbiguousCover(isize),
    #[error("sentinel read at position {0}")]
    SentinelRead(isize),
    #[error("read before anchor at position {0}")]
    ReadBeforeAnchor(isize),
    #[error("bowtie-dependent choice at cell {0}")]
    BowtieDependent(isize),
    #[error("bowtie rewritten at position {0}")]
    BowtieRewritten(isize),
    #[error("unknown name {0:?}")]
    UnknownName(String),
    #[error("invalid prefix bijection: {0}")]
    InvalidBijection(String),
    #[error("compiled rule fails the partition check ({0} witnesses)")]
    Compile(usize),
    #[error("unknown generator {0:?}")]
    UnknownGenerator(char),
    #[error("step {step} ({generator}): {source}")]
    AtStep {
        step: usize,
        generator: char,
        source: Box<Error>,
    },
}

impl Error {
    /// The underlying engine error, without step annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtStep { source, .. } => source.root(),
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
