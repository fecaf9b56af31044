//! Strategic games over an election: perturbed utilities, deviation checks and
//! the brute-force equilibrium oracle.

use std::cmp::Ordering;
use std::fmt;

use num_rational::BigRational;
use rayon::prelude::*;

use crate::election::{
    combined_board, expected_utility, lottery_from_board, Ballot, BallotVector, CandidateId,
    Election, Lottery, ScoreBoard, TieRule,
};
use crate::error::{ElectionError, GameError};
use crate::principled::PrincipledProfile;

/// Default search budget for exhaustive scans.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Secondary preference shared by all strategic voters.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Setting {
    /// Prefers abstaining when their vote does not change the outcome.
    Lazy,
    /// Never abstains; prefers voting their top choice when not pivotal.
    TruthBiased,
}

impl Setting {
    pub const ALL: [Setting; 2] = [Setting::Lazy, Setting::TruthBiased];
}

impl fmt::Display for Setting {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Setting::Lazy => "lazy",
            Setting::TruthBiased => "truth",
        })
    }
}

/// What happens when nobody votes at all.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub enum TrivialPolicy {
    /// Every candidate is tied.
    #[default]
    FullTie,
    /// The election is void and every voter gets utility minus infinity.
    Invalid,
}

/// A game `(S, R, u)`, optionally with a block of principled voters.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameSpec {
    election: Election,
    setting: Setting,
    rule: TieRule,
    principled: PrincipledProfile,
    trivial_policy: TrivialPolicy,
}

impl GameSpec {
    pub fn new(election: Election, setting: Setting, rule: TieRule) -> Self {
        let m = election.num_candidates();
        GameSpec {
            election,
            setting,
            rule,
            principled: PrincipledProfile::empty(m),
            trivial_policy: TrivialPolicy::FullTie,
        }
    }

    pub fn with_principled(mut self, p: PrincipledProfile) -> Result<Self, ElectionError> {
        if p.num_candidates() != self.election.num_candidates() {
            return Err(ElectionError::RankingLength {
                expected: self.election.num_candidates(),
                found: p.num_candidates(),
            });
        }
        self.principled = p;
        Ok(self)
    }

    pub fn with_trivial_policy(mut self, policy: TrivialPolicy) -> Self {
        self.trivial_policy = policy;
        self
    }

    pub fn election(&self) -> &Election {
        &self.election
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn rule(&self) -> TieRule {
        self.rule
    }

    pub fn principled(&self) -> &PrincipledProfile {
        &self.principled
    }

    pub fn trivial_policy(&self) -> TrivialPolicy {
        self.trivial_policy
    }

    fn principled_opt(&self) -> Option<&PrincipledProfile> {
        (!self.principled.is_empty()).then_some(&self.principled)
    }

    /// Scores of `b` together with the principled ballots.
    pub fn board(&self, b: &BallotVector) -> ScoreBoard {
        combined_board(&self.election, b, self.principled_opt())
    }

    /// The lottery `b` induces, or `None` when the election is void.
    pub fn outcome(&self, b: &BallotVector) -> Option<Lottery> {
        let board = self.board(b);
        self.outcome_on(b, &board)
    }

    fn outcome_on(&self, b: &BallotVector, board: &ScoreBoard) -> Option<Lottery> {
        if self.trivial_policy == TrivialPolicy::Invalid && board.total() == 0 {
            return None;
        }
        Some(lottery_from_board(
            &self.election,
            b,
            board,
            self.rule,
            self.principled_opt(),
        ))
    }

    fn value_on(&self, b: &BallotVector, board: &ScoreBoard, i: usize) -> PerturbedValue {
        let ballot = b.get(i);
        let bonus = match self.setting {
            Setting::Lazy => ballot.is_abstain(),
            Setting::TruthBiased => ballot == Ballot::Vote(self.election.top(i)),
        };
        if self.setting == Setting::TruthBiased && ballot.is_abstain() {
            return PerturbedValue::minus_infinity();
        }
        match self.outcome_on(b, board) {
            None => PerturbedValue { base: Base::MinusInfinity, bonus },
            Some(p) => PerturbedValue {
                base: Base::Finite(expected_utility(self.election.utility(i), &p)),
                bonus,
            },
        }
    }
}

/// Base part of a perturbed utility.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Base {
    MinusInfinity,
    Finite(BigRational),
}

/// Expected utility plus an infinitesimal bonus.
///
/// Compared lexicographically: the base decides, the bonus only breaks exact
/// ties. `MinusInfinity` sits below every finite value.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PerturbedValue {
    pub base: Base,
    pub bonus: bool,
}

impl PerturbedValue {
    pub fn minus_infinity() -> Self {
        PerturbedValue { base: Base::MinusInfinity, bonus: false }
    }

    pub fn finite(base: BigRational, bonus: bool) -> Self {
        PerturbedValue { base: Base::Finite(base), bonus }
    }
}

impl fmt::Display for PerturbedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.base {
            Base::MinusInfinity => f.write_str("-inf")?,
            Base::Finite(x) => write!(f, "{x}")?,
        }
        if self.bonus {
            f.write_str("+eps")?;
        }
        Ok(())
    }
}

/// `U_i(b)` under the game's setting and tie rule.
pub fn perturbed_utility(
    g: &GameSpec,
    b: &BallotVector,
    i: usize,
) -> Result<PerturbedValue, GameError> {
    g.election.check_ballots(b)?;
    let n = g.election.num_voters();
    if i >= n {
        return Err(GameError::VoterOutOfRange { voter: i, n });
    }
    Ok(g.value_on(b, &g.board(b), i))
}

/// A unilateral deviation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Deviation {
    pub voter: usize,
    pub ballot: Ballot,
}

/// Result of an equilibrium check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    /// First strictly improving deviation, if any.
    pub witness: Option<Deviation>,
}

impl Verdict {
    pub fn is_equilibrium(&self) -> bool {
        self.witness.is_none()
    }
}

/// Ballot alternatives in scan order: candidates by index, abstention last.
fn alternatives(m: usize) -> impl Iterator<Item = Ballot> {
    (0..m).map(|j| Ballot::Vote(CandidateId(j))).chain(std::iter::once(Ballot::Abstain))
}

fn shift(board: &mut ScoreBoard, from: Ballot, to: Ballot) {
    if let Ballot::Vote(c) = from {
        board.bump(c, -1);
    }
    if let Ballot::Vote(c) = to {
        board.bump(c, 1);
    }
}

fn first_deviation(g: &GameSpec, b: &BallotVector) -> Option<Deviation> {
    let m = g.election.num_candidates();
    let board = g.board(b);
    let mut scratch = b.clone();
    for i in 0..b.len() {
        let current = b.get(i);
        let now = g.value_on(b, &board, i);
        for alt in alternatives(m) {
            if alt == current {
                continue;
            }
            let mut moved = board.clone();
            shift(&mut moved, current, alt);
            scratch.0[i] = alt;
            let then = g.value_on(&scratch, &moved, i);
            scratch.0[i] = current;
            if then.cmp(&now) == Ordering::Greater {
                return Some(Deviation { voter: i, ballot: alt });
            }
        }
    }
    None
}

/// Checks every unilateral deviation of `b`.
///
/// Panics if `b` does not fit the election; use [`try_is_pne`] for untrusted
/// input.
pub fn is_pne(g: &GameSpec, b: &BallotVector) -> Verdict {
    try_is_pne(g, b).expect("ballot vector does not fit the election")
}

pub fn try_is_pne(g: &GameSpec, b: &BallotVector) -> Result<Verdict, ElectionError> {
    g.election.check_ballots(b)?;
    Ok(Verdict { witness: first_deviation(g, b) })
}

/// Necessary conditions every equilibrium satisfies: lazy voters vote only
/// for winners, truth-biased voters vote their top or a winner.
pub(crate) fn passes_structure(g: &GameSpec, b: &BallotVector, board: &ScoreBoard) -> bool {
    let e = &g.election;
    b.iter().enumerate().all(|(i, ballot)| match (g.setting, ballot) {
        (Setting::Lazy, Ballot::Abstain) => true,
        (Setting::Lazy, Ballot::Vote(c)) => board.is_winner(c),
        (Setting::TruthBiased, Ballot::Abstain) => false,
        (Setting::TruthBiased, Ballot::Vote(c)) => c == e.top(i) || board.is_winner(c),
    })
}

/// Number of ballot vectors, or `None` when it overflows.
pub fn ballot_space(m: usize, n: usize) -> Option<u128> {
    (m as u128 + 1).checked_pow(n as u32)
}

fn decode(mut index: u64, m: usize, n: usize) -> BallotVector {
    let base = m as u64 + 1;
    let mut v = vec![Ballot::Abstain; n];
    for slot in v.iter_mut().rev() {
        let d = (index % base) as usize;
        index /= base;
        *slot = if d < m { Ballot::Vote(CandidateId(d)) } else { Ballot::Abstain };
    }
    BallotVector(v)
}

fn scan(g: &GameSpec, budget: u64, prune: bool) -> Result<Vec<BallotVector>, GameError> {
    let m = g.election.num_candidates();
    let n = g.election.num_voters();
    let required = ballot_space(m, n).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(GameError::BudgetExceeded { required, budget });
    }
    let total = required as u64;
    Ok((0..total)
        .into_par_iter()
        .filter_map(|idx| {
            let b = decode(idx, m, n);
            if prune && !passes_structure(g, &b, &g.board(&b)) {
                return None;
            }
            first_deviation(g, &b).is_none().then_some(b)
        })
        .collect())
}

/// All pure Nash equilibria, in lexicographic ballot order.
///
/// Scans every ballot vector; vectors that fail a cheap structural necessary
/// condition are dropped before the full deviation check.
pub fn enumerate_pne(g: &GameSpec, budget: u64) -> Result<Vec<BallotVector>, GameError> {
    scan(g, budget, true)
}

/// Same as [`enumerate_pne`] without the structural filter.
pub fn enumerate_pne_exhaustive(g: &GameSpec, budget: u64) -> Result<Vec<BallotVector>, GameError> {
    scan(g, budget, false)
}

/// Outcome of a ballot vector: winning set and lottery.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Outcome {
    pub winners: Vec<CandidateId>,
    pub lottery: Lottery,
}

/// Outcome of `b`, or `None` when the election is void.
pub fn outcome_of(g: &GameSpec, b: &BallotVector) -> Option<Outcome> {
    let board = g.board(b);
    g.outcome_on(b, &board).map(|lottery| Outcome { winners: board.winners(), lottery })
}

/// Distinct outcomes over a list of equilibria.
pub fn outcomes_of(g: &GameSpec, equilibria: &[BallotVector]) -> Vec<Outcome> {
    let mut out: Vec<Outcome> = equilibria.iter().filter_map(|b| outcome_of(g, b)).collect();
    out.sort();
    out.dedup();
    out
}

/// Deduplicated outcomes over all equilibria.
pub fn pne_outcomes(g: &GameSpec, budget: u64) -> Result<Vec<Outcome>, GameError> {
    Ok(outcomes_of(g, &enumerate_pne(g, budget)?))
}
