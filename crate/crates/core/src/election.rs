//! Plurality election model: candidates, cardinal utilities, ballots, scores
//! and the lotteries produced by the three tie-breaking rules.
//!
//! Candidate indices double as the lexicographic tie-break priority: the
//! candidate with the smallest index wins a lexicographic tie.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::ElectionError;
use crate::principled::PrincipledProfile;

/// A candidate, identified by its zero-based position in the candidate list.
///
/// Displayed one-based (`c1`, `c2`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CandidateId(pub usize);

impl CandidateId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for CandidateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{}", self.0 + 1)
    }
}

/// Utilities of one voter for every candidate; strictly positive and pairwise
/// distinct.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct UtilityVector(Vec<u64>);

impl UtilityVector {
    pub fn new(values: Vec<u64>) -> Result<Self, ElectionError> {
        if values.is_empty() {
            return Err(ElectionError::NoCandidates);
        }
        if let Some(pos) = values.iter().position(|&v| v == 0) {
            return Err(ElectionError::NonPositiveUtility { candidate: pos });
        }
        for (a, &x) in values.iter().enumerate() {
            if let Some(b) = values[a + 1..].iter().position(|&y| y == x) {
                return Err(ElectionError::DuplicateUtility {
                    first: a,
                    second: a + 1 + b,
                    value: x,
                });
            }
        }
        Ok(UtilityVector(values))
    }

    /// Rank-derived utilities: the top candidate of `order` gets `m`, the last
    /// one gets `1`.
    pub fn from_ranking(order: &PreferenceOrder) -> Self {
        let m = order.len();
        let mut values = vec![0; m];
        for (rank, c) in order.iter().enumerate() {
            values[c.0] = (m - rank) as u64;
        }
        UtilityVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, c: CandidateId) -> u64 {
        self.0[c.0]
    }

    pub fn values(&self) -> &[u64] {
        &self.0
    }

    pub fn prefers(&self, a: CandidateId, b: CandidateId) -> bool {
        self.get(a) > self.get(b)
    }

    /// The candidate with the highest utility among `among`.
    pub fn favorite_in<I>(&self, among: I) -> Option<CandidateId>
    where
        I: IntoIterator<Item = CandidateId>,
    {
        among.into_iter().max_by_key(|&c| self.get(c))
    }
}

/// A strict ranking of all candidates, best first.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PreferenceOrder(Vec<CandidateId>);

impl PreferenceOrder {
    /// Validates that `order` is a permutation of `0..m`.
    pub fn new(order: Vec<CandidateId>, m: usize) -> Result<Self, ElectionError> {
        if order.len() != m {
            return Err(ElectionError::RankingLength {
                expected: m,
                found: order.len(),
            });
        }
        let mut seen = vec![false; m];
        for &c in &order {
            if c.0 >= m {
                return Err(ElectionError::CandidateOutOfRange { index: c.0, m });
            }
            if seen[c.0] {
                return Err(ElectionError::RepeatedInRanking { candidate: c });
            }
            seen[c.0] = true;
        }
        Ok(PreferenceOrder(order))
    }

    pub fn top(&self) -> CandidateId {
        self.0[0]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = CandidateId> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[CandidateId] {
        &self.0
    }

    /// First candidate of the ranking that satisfies `pred`.
    pub fn first_where(&self, mut pred: impl FnMut(CandidateId) -> bool) -> Option<CandidateId> {
        self.iter().find(|&c| pred(c))
    }

    pub fn position(&self, c: CandidateId) -> usize {
        self.0.iter().position(|&x| x == c).expect("ranking is a permutation")
    }
}

impl fmt::Display for PreferenceOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, c) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(">")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// Orders candidates by decreasing utility.
pub fn derive_preference(u: &UtilityVector) -> PreferenceOrder {
    let mut order: Vec<CandidateId> = (0..u.len()).map(CandidateId).collect();
    order.sort_by_key(|&c| std::cmp::Reverse(u.get(c)));
    PreferenceOrder(order)
}

/// Candidate count plus one utility vector per strategic voter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Election {
    m: usize,
    voters: Vec<UtilityVector>,
    orders: Vec<PreferenceOrder>,
}

impl Election {
    pub fn new(m: usize, voters: Vec<UtilityVector>) -> Result<Self, ElectionError> {
        if m == 0 {
            return Err(ElectionError::NoCandidates);
        }
        if voters.is_empty() {
            return Err(ElectionError::NoVoters);
        }
        for (i, u) in voters.iter().enumerate() {
            if u.len() != m {
                return Err(ElectionError::UtilityLength {
                    voter: i,
                    expected: m,
                    found: u.len(),
                });
            }
        }
        let orders = voters.iter().map(derive_preference).collect();
        Ok(Election { m, voters, orders })
    }

    /// Convenience constructor from raw utility rows.
    pub fn from_utilities(rows: Vec<Vec<u64>>) -> Result<Self, ElectionError> {
        let m = rows.first().map_or(0, Vec::len);
        let voters = rows
            .into_iter()
            .enumerate()
            .map(|(i, r)| {
                UtilityVector::new(r).map_err(|e| ElectionError::InVoter {
                    voter: i,
                    source: Box::new(e),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Election::new(m, voters)
    }

    /// Builds an election from rankings given as candidate index lists,
    /// using rank-derived utilities.
    pub fn from_rankings(m: usize, rankings: &[Vec<usize>]) -> Result<Self, ElectionError> {
        let voters = rankings
            .iter()
            .map(|r| {
                let order = PreferenceOrder::new(r.iter().map(|&c| CandidateId(c)).collect(), m)?;
                Ok(UtilityVector::from_ranking(&order))
            })
            .collect::<Result<Vec<_>, ElectionError>>()?;
        Election::new(m, voters)
    }

    pub fn num_candidates(&self) -> usize {
        self.m
    }

    pub fn num_voters(&self) -> usize {
        self.voters.len()
    }

    pub fn candidates(&self) -> impl Iterator<Item = CandidateId> {
        (0..self.m).map(CandidateId)
    }

    pub fn utility(&self, voter: usize) -> &UtilityVector {
        &self.voters[voter]
    }

    pub fn voters(&self) -> &[UtilityVector] {
        &self.voters
    }

    pub fn preference(&self, voter: usize) -> &PreferenceOrder {
        &self.orders[voter]
    }

    /// Top choice `a_i` of a voter.
    pub fn top(&self, voter: usize) -> CandidateId {
        self.orders[voter].top()
    }

    /// The truthful ballot vector `a`.
    pub fn truthful(&self) -> BallotVector {
        BallotVector((0..self.num_voters()).map(|i| Ballot::Vote(self.top(i))).collect())
    }

    pub fn check_ballots(&self, b: &BallotVector) -> Result<(), ElectionError> {
        if b.len() != self.num_voters() {
            return Err(ElectionError::BallotLength {
                expected: self.num_voters(),
                found: b.len(),
            });
        }
        for ballot in b.iter() {
            if let Ballot::Vote(c) = ballot {
                if c.0 >= self.m {
                    return Err(ElectionError::CandidateOutOfRange { index: c.0, m: self.m });
                }
            }
        }
        Ok(())
    }
}

/// A single ballot: a vote for a candidate or an abstention.
///
/// The derived order puts votes (by candidate index) before `Abstain`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Ballot {
    Vote(CandidateId),
    Abstain,
}

impl Ballot {
    pub fn candidate(self) -> Option<CandidateId> {
        match self {
            Ballot::Vote(c) => Some(c),
            Ballot::Abstain => None,
        }
    }

    pub fn is_abstain(self) -> bool {
        self == Ballot::Abstain
    }
}

impl fmt::Display for Ballot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Ballot::Vote(c) => write!(f, "{c}"),
            Ballot::Abstain => f.write_str("⊥"),
        }
    }
}

/// One ballot per strategic voter.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BallotVector(pub Vec<Ballot>);

impl BallotVector {
    pub fn trivial(n: usize) -> Self {
        BallotVector(vec![Ballot::Abstain; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_trivial(&self) -> bool {
        self.0.iter().all(|b| b.is_abstain())
    }

    pub fn get(&self, i: usize) -> Ballot {
        self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = Ballot> + '_ {
        self.0.iter().copied()
    }

    /// `(b_{-i}, ballot)`.
    pub fn with(&self, i: usize, ballot: Ballot) -> Self {
        let mut v = self.0.clone();
        v[i] = ballot;
        BallotVector(v)
    }

    pub fn num_active(&self) -> usize {
        self.0.iter().filter(|b| !b.is_abstain()).count()
    }
}

impl From<Vec<Ballot>> for BallotVector {
    fn from(v: Vec<Ballot>) -> Self {
        BallotVector(v)
    }
}

impl fmt::Display for BallotVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{b}")?;
        }
        f.write_str(")")
    }
}

/// Plurality scores with the derived sets `W`, `H` and `H'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScoreBoard {
    scores: Vec<usize>,
    max: usize,
}

impl ScoreBoard {
    pub fn from_scores(scores: Vec<usize>) -> Self {
        let max = scores.iter().copied().max().unwrap_or(0);
        ScoreBoard { scores, max }
    }

    pub fn score(&self, c: CandidateId) -> usize {
        self.scores[c.0]
    }

    pub fn scores(&self) -> &[usize] {
        &self.scores
    }

    /// `M(b)`.
    pub fn max(&self) -> usize {
        self.max
    }

    fn at_level(&self, level: Option<usize>) -> Vec<CandidateId> {
        match level {
            Some(l) => (0..self.scores.len())
                .filter(|&j| self.scores[j] == l)
                .map(CandidateId)
                .collect(),
            None => Vec::new(),
        }
    }

    /// Winning set `W(b)`; equal to all candidates on the trivial ballot.
    pub fn winners(&self) -> Vec<CandidateId> {
        self.at_level(Some(self.max))
    }

    /// `H(b)`: candidates one point behind.
    pub fn runners_up(&self) -> Vec<CandidateId> {
        self.at_level(self.max.checked_sub(1))
    }

    /// `H'(b)`: candidates two points behind.
    pub fn second_runners_up(&self) -> Vec<CandidateId> {
        self.at_level(self.max.checked_sub(2))
    }

    pub fn is_winner(&self, c: CandidateId) -> bool {
        self.scores[c.0] == self.max
    }

    /// Lowest-index member of `W(b)`.
    pub fn lex_winner(&self) -> CandidateId {
        CandidateId(
            self.scores
                .iter()
                .position(|&s| s == self.max)
                .expect("at least one candidate"),
        )
    }

    pub fn total(&self) -> usize {
        self.scores.iter().sum()
    }

    pub(crate) fn bump(&mut self, c: CandidateId, delta: isize) {
        let s = &mut self.scores[c.0];
        *s = (*s as isize + delta) as usize;
        self.max = self.scores.iter().copied().max().unwrap_or(0);
    }
}

/// Scores of the strategic ballots alone.
pub fn scores(e: &Election, b: &BallotVector) -> ScoreBoard {
    let mut s = vec![0; e.num_candidates()];
    for c in b.iter().filter_map(Ballot::candidate) {
        s[c.0] += 1;
    }
    ScoreBoard::from_scores(s)
}

/// Tie-breaking rule applied to the winning set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TieRule {
    /// Lowest index wins.
    Lex,
    /// Uniform over the winning set.
    RandCand,
    /// A uniformly random voter picks their favorite member of the winning set.
    RandVoter,
}

impl TieRule {
    pub const ALL: [TieRule; 3] = [TieRule::Lex, TieRule::RandCand, TieRule::RandVoter];

    pub fn is_randomized(self) -> bool {
        self != TieRule::Lex
    }
}

impl fmt::Display for TieRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TieRule::Lex => "lex",
            TieRule::RandCand => "rand-cand",
            TieRule::RandVoter => "rand-voter",
        })
    }
}

/// An exact probability distribution over candidates.
///
/// Stored as integer weights over a common positive denominator, reduced to
/// lowest terms so that structural equality is equality of distributions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lottery {
    weights: Vec<u64>,
    total: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Lottery {
    /// Builds a lottery from nonnegative weights with a positive sum.
    pub fn from_weights(mut weights: Vec<u64>) -> Self {
        let total: u64 = weights.iter().sum();
        assert!(total > 0, "lottery weights must not all be zero");
        let g = weights.iter().fold(total, |g, &w| gcd(g, w));
        for w in &mut weights {
            *w /= g;
        }
        Lottery { weights, total: total / g }
    }

    pub fn degenerate(m: usize, c: CandidateId) -> Self {
        let mut w = vec![0; m];
        w[c.0] = 1;
        Lottery { weights: w, total: 1 }
    }

    pub fn uniform(m: usize, support: &[CandidateId]) -> Self {
        let mut w = vec![0; m];
        for c in support {
            w[c.0] = 1;
        }
        Lottery::from_weights(w)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn probability(&self, c: CandidateId) -> BigRational {
        BigRational::new(BigInt::from(self.weights[c.0]), BigInt::from(self.total))
    }

    pub fn probabilities(&self) -> Vec<BigRational> {
        (0..self.weights.len()).map(|j| self.probability(CandidateId(j))).collect()
    }

    pub fn support(&self) -> Vec<CandidateId> {
        (0..self.weights.len())
            .filter(|&j| self.weights[j] > 0)
            .map(CandidateId)
            .collect()
    }

    pub fn is_degenerate(&self) -> bool {
        self.support().len() == 1
    }

    pub(crate) fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub(crate) fn denominator(&self) -> u64 {
        self.total
    }
}

impl fmt::Display for Lottery {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (j, p) in self.probabilities().iter().enumerate() {
            if j > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{p}")?;
        }
        f.write_str(")")
    }
}

/// Combined scores of strategic ballots plus the principled voters' tops.
pub(crate) fn combined_board(
    e: &Election,
    b: &BallotVector,
    principled: Option<&PrincipledProfile>,
) -> ScoreBoard {
    let mut board = scores(e, b);
    if let Some(p) = principled {
        for c in p.tops() {
            board.scores[c.0] += 1;
        }
        board.max = board.scores.iter().copied().max().unwrap_or(0);
    }
    board
}

/// Lottery given an already computed board. Principled voters are part of the
/// electorate for the random-voter rule.
pub(crate) fn lottery_from_board(
    e: &Election,
    b: &BallotVector,
    board: &ScoreBoard,
    rule: TieRule,
    principled: Option<&PrincipledProfile>,
) -> Lottery {
    let m = e.num_candidates();
    match rule {
        TieRule::Lex => Lottery::degenerate(m, board.lex_winner()),
        TieRule::RandCand => Lottery::uniform(m, &board.winners()),
        TieRule::RandVoter => {
            let mut w = vec![0u64; m];
            for (i, ballot) in b.iter().enumerate() {
                let pick = match ballot {
                    Ballot::Vote(c) if board.is_winner(c) => c,
                    _ => e
                        .utility(i)
                        .favorite_in(board.winners())
                        .expect("winning set is nonempty"),
                };
                w[pick.0] += 1;
            }
            if let Some(p) = principled {
                for order in p.rankings() {
                    let pick = order
                        .first_where(|c| board.is_winner(c))
                        .expect("winning set is nonempty");
                    w[pick.0] += 1;
                }
            }
            Lottery::from_weights(w)
        }
    }
}

/// The lottery over winners that `rule` induces on `b` (plus the principled
/// block, when given).
pub fn lottery(
    e: &Election,
    b: &BallotVector,
    rule: TieRule,
    principled: Option<&PrincipledProfile>,
) -> Lottery {
    let board = combined_board(e, b, principled);
    lottery_from_board(e, b, &board, rule, principled)
}

/// Exact expected utility `sum_j u(c_j) p_j`.
pub fn expected_utility(u: &UtilityVector, p: &Lottery) -> BigRational {
    assert_eq!(u.len(), p.len(), "utility and lottery dimensions differ");
    let mut num = BigInt::zero();
    for (&uj, &wj) in u.values().iter().zip(p.weights()) {
        if wj != 0 {
            num += BigInt::from(uj) * BigInt::from(wj);
        }
    }
    BigRational::new(num, BigInt::from(p.denominator()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ratio(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn v(c: usize) -> Ballot {
        Ballot::Vote(CandidateId(c))
    }

    #[test]
    fn preference_from_utilities() {
        let order = |u: Vec<u64>| {
            derive_preference(&UtilityVector::new(u).unwrap())
                .iter()
                .map(|c| c.0)
                .collect::<Vec<_>>()
        };
        assert_eq!(order(vec![3, 2, 1]), vec![0, 1, 2]);
        assert_eq!(order(vec![20, 4, 1]), vec![0, 1, 2]);
        assert_eq!(order(vec![1, 3, 2]), vec![1, 2, 0]);
    }

    #[test]
    fn duplicate_and_zero_utilities_rejected() {
        assert!(matches!(
            UtilityVector::new(vec![3, 1, 3]),
            Err(ElectionError::DuplicateUtility { first: 0, second: 2, value: 3 })
        ));
        assert!(matches!(
            UtilityVector::new(vec![2, 0]),
            Err(ElectionError::NonPositiveUtility { candidate: 1 })
        ));
    }

    #[test]
    fn election_shape_validation() {
        assert!(matches!(Election::new(3, vec![]), Err(ElectionError::NoVoters)));
        let u = UtilityVector::new(vec![1, 2]).unwrap();
        assert!(matches!(
            Election::new(3, vec![u]),
            Err(ElectionError::UtilityLength { voter: 0, .. })
        ));
    }

    #[test]
    fn scores_and_sets() {
        let e = Election::from_utilities(vec![vec![1, 3, 2], vec![1, 2, 3], vec![1, 2, 3], vec![1, 2, 3]])
            .unwrap();
        let b = BallotVector(vec![v(1), Ballot::Abstain, Ballot::Abstain, Ballot::Abstain]);
        let s = scores(&e, &b);
        assert_eq!(s.scores(), &[0, 1, 0]);
        assert_eq!(s.winners(), vec![CandidateId(1)]);

        let s = scores(&e, &BallotVector::trivial(4));
        assert_eq!(s.max(), 0);
        assert_eq!(s.winners().len(), 3);
        assert!(s.runners_up().is_empty());

        let b = BallotVector(vec![v(1), v(2), v(2), v(2)]);
        let s = scores(&e, &b);
        assert_eq!(s.scores(), &[0, 1, 3]);
        assert_eq!(s.winners(), vec![CandidateId(2)]);
        assert!(s.runners_up().is_empty());
        assert_eq!(s.second_runners_up(), vec![CandidateId(1)]);
    }

    #[test]
    fn lotteries_under_each_rule() {
        let e = Election::from_utilities(vec![vec![3, 2, 1], vec![2, 3, 1]]).unwrap();
        let b = BallotVector(vec![v(0), v(1)]);
        let p = lottery(&e, &b, TieRule::RandCand, None);
        assert_eq!(p.probabilities(), vec![ratio(1, 2), ratio(1, 2), ratio(0, 1)]);
        let p = lottery(&e, &b, TieRule::Lex, None);
        assert_eq!(p, Lottery::degenerate(3, CandidateId(0)));

        // Abstainers report their favorite in W under the random-voter rule.
        let e = Election::from_utilities(vec![vec![3, 2, 1], vec![1, 3, 2], vec![1, 2, 3]]).unwrap();
        let b = BallotVector(vec![v(0), v(1), Ballot::Abstain]);
        let p = lottery(&e, &b, TieRule::RandVoter, None);
        assert_eq!(p.probabilities(), vec![ratio(1, 3), ratio(2, 3), ratio(0, 1)]);
    }

    #[test]
    fn expected_utility_is_exact() {
        let u = UtilityVector::new(vec![20, 4, 1]).unwrap();
        let half = Lottery::from_weights(vec![1, 1, 0]);
        assert_eq!(expected_utility(&u, &half), ratio(12, 1));
        let skewed = Lottery::from_weights(vec![3, 2, 0]);
        assert_eq!(expected_utility(&u, &skewed), ratio(68, 5));
        let point = Lottery::degenerate(3, CandidateId(1));
        assert_eq!(expected_utility(&u, &point), ratio(4, 1));
    }

    #[test]
    fn lottery_weights_are_reduced() {
        assert_eq!(Lottery::from_weights(vec![2, 2, 0]), Lottery::from_weights(vec![1, 1, 0]));
    }
}
