//! Pure Nash equilibria of Plurality voting games with lazy or truth-biased
//! voters under lexicographic, random-candidate and random-voter
//! tie-breaking.

pub mod characterizations;
pub mod decision;
pub mod election;
pub mod error;
pub mod game;
pub mod hardness;
pub mod principled;

pub use election::{
    derive_preference, expected_utility, lottery, scores, Ballot, BallotVector, CandidateId,
    Election, Lottery, PreferenceOrder, ScoreBoard, TieRule, UtilityVector,
};
pub use error::{CharacterizationError, DecisionError, ElectionError, GameError, HardnessError};
pub use game::{
    enumerate_pne, is_pne, perturbed_utility, pne_outcomes, GameSpec, PerturbedValue, Setting,
    TrivialPolicy, Verdict, DEFAULT_BUDGET,
};
pub use principled::PrincipledProfile;
