use thiserror::Error;

/// Errors raised by catalog groups, graph-of-groups moves and the hierarchy driver.
#[derive(Debug, Error)]
pub enum Error {
    /// A word-level query hit a handle that has no word-problem strategy.
    #[error("unsupported query on `{handle}`: {query}")]
    UnsupportedQuery { handle: String, query: String },

    #[error("generators come from different ambient groups: {0}")]
    MixedAmbient(String),

    #[error("invalid word: {0}")]
    InvalidWord(String),

    /// Structural validation failure; always names the offending vertex or edge.
    #[error("validation failed at `{id}`: {reason}")]
    Validation { id: String, reason: String },

    #[error("precondition violated: {reason} (witness: {witness})")]
    Precondition { reason: String, witness: String },

    #[error("classification error for `{handle}`: not two-ended ({witness})")]
    NotTwoEnded { handle: String, witness: String },

    #[error("resource guard tripped: {what} (reached {reached})")]
    Resource { what: String, reached: String },

    #[error("integer overflow in {0}")]
    Overflow(String),

    #[error("no catalog rule matches group `{0}`")]
    UnknownGroup(String),

    /// Lemma hypothesis failure in the refinement pushforward: neither folded
    /// edge group lies in the splitting edge group, and the finite-index
    /// precondition on the merged edge group does not hold.
    #[error("pushforward hypothesis violated: {0}")]
    LemmaHypothesis(String),

    #[error("fold move invalid: {0}")]
    InvalidFold(String),

    #[error("{0}")]
    Other(String),
}

pub type Result<T> = std::result::Result<T, Error>;

/// Three-valued answer for containment and properness checks.
///
/// `Indeterminate` is a first-class outcome: where the catalog strategy
/// cannot decide a conjugacy or containment exactly, the caller gets the
/// reason instead of a guess.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Decision {
    Yes,
    No,
    Indeterminate { reason: String },
}

impl Decision {
    pub fn is_yes(&self) -> bool {
        matches!(self, Decision::Yes)
    }
    pub fn is_no(&self) -> bool {
        matches!(self, Decision::No)
    }
    pub fn from_bool(b: bool) -> Self {
        if b {
            Decision::Yes
        } else {
            Decision::No
        }
    }
}
