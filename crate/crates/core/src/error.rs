use thiserror::Error;

use crate::election::CandidateId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ElectionError {
    #[error("an election needs at least one candidate")]
    NoCandidates,
    #[error("an election needs at least one voter")]
    NoVoters,
    #[error("utility of candidate {} must be a positive integer", candidate + 1)]
    NonPositiveUtility { candidate: usize },
    #[error("candidates {} and {} share utility {value}; utilities must be distinct", first + 1, second + 1)]
    DuplicateUtility { first: usize, second: usize, value: u64 },
    #[error("voter {}: expected {expected} utilities, found {found}", voter + 1)]
    UtilityLength { voter: usize, expected: usize, found: usize },
    #[error("voter {}: {source}", voter + 1)]
    InVoter {
        voter: usize,
        #[source]
        source: Box<ElectionError>,
    },
    #[error("ranking lists {found} candidates, expected {expected}")]
    RankingLength { expected: usize, found: usize },
    #[error("candidate {candidate} appears twice in a ranking")]
    RepeatedInRanking { candidate: CandidateId },
    #[error("candidate index {index} out of range for {m} candidates")]
    CandidateOutOfRange { index: usize, m: usize },
    #[error("ballot vector has {found} entries, expected {expected}")]
    BallotLength { expected: usize, found: usize },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GameError {
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error("voter index {voter} out of range for {n} strategic voters")]
    VoterOutOfRange { voter: usize, n: usize },
    #[error("search needs {required} steps but the budget is {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CharacterizationError {
    #[error("the truthful winning set is not a singleton")]
    TruthfulNotSingleton,
    #[error("ballot vector is truthful")]
    TruthfulBallot,
    #[error("winning set of the ballot vector is not a singleton")]
    NotSingleton,
    #[error("voter {voter} votes neither their top choice nor the winner")]
    NotTwoValued { voter: usize },
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecisionError {
    #[error("{problem} requires a target candidate")]
    MissingTarget { problem: &'static str },
    #[error("exist-ne takes no target candidate")]
    UnexpectedTarget,
    #[error("target {target} out of range")]
    TargetOutOfRange { target: CandidateId },
    #[error("answer unknown: {0}")]
    Unknown(GameError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HardnessError {
    #[error("set {set} contains element {element}, but there are only {n} elements")]
    ElementOutOfRange { set: usize, element: usize, n: usize },
    #[error("k = {k} must be between 1 and the number of sets ({m})")]
    BadK { k: usize, m: usize },
    #[error("q = {q} exceeds the number of elements ({n})")]
    BadQ { q: usize, n: usize },
    #[error("an instance needs at least one element")]
    NoElements,
    #[error("edge ({left}, {right}) leaves the vertex ranges")]
    EdgeOutOfRange { left: usize, right: usize },
    #[error("k = {k} exceeds a side of the bipartite graph")]
    BadBipartiteK { k: usize },
    #[error("block 3 would have negative size {size}")]
    NegativeBlock { size: i64 },
    #[error("certificate is not a valid {k}-subset with intersection of size at least {q}")]
    InvalidCertificate { k: usize, q: usize },
    #[error(transparent)]
    Game(#[from] GameError),
}
