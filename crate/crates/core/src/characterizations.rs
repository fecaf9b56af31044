//! Closed-form equilibrium characterizations for the six (setting, rule)
//! combinations, plus the structured searches used where no polynomial
//! characterization exists.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::election::{
    expected_utility, lottery, scores, Ballot, BallotVector, CandidateId, Election, TieRule,
};
use crate::error::{CharacterizationError, GameError};
use crate::game::{is_pne, GameSpec, PerturbedValue, Setting};

/// Equilibria of a lazy game under lexicographic tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LazyLexSolution {
    /// The unique candidate that wins in every equilibrium.
    pub winner: Option<CandidateId>,
    /// All equilibria, sorted.
    pub equilibria: Vec<BallotVector>,
}

impl LazyLexSolution {
    pub fn exists(&self) -> bool {
        self.winner.is_some()
    }
}

/// One voter votes `c`, everybody else abstains.
pub(crate) fn lone_vote(n: usize, i: usize, c: CandidateId) -> BallotVector {
    BallotVector::trivial(n).with(i, Ballot::Vote(c))
}

fn tops(e: &Election) -> Vec<CandidateId> {
    (0..e.num_voters()).map(|i| e.top(i)).collect()
}

pub fn lazy_lex_solve(e: &Election) -> LazyLexSolution {
    let n = e.num_voters();
    let a = tops(e);
    if a.iter().all(|c| c.0 == 0) {
        return LazyLexSolution {
            winner: Some(CandidateId(0)),
            equilibria: vec![BallotVector::trivial(n)],
        };
    }
    for j in (1..e.num_candidates()).map(CandidateId) {
        let supported = a.contains(&j);
        let dominant = e
            .voters()
            .iter()
            .all(|u| (0..j.0).all(|k| u.prefers(j, CandidateId(k))));
        if supported && dominant {
            let equilibria = (0..n).filter(|&i| a[i] == j).map(|i| lone_vote(n, i, j)).collect();
            return LazyLexSolution { winner: Some(j), equilibria };
        }
    }
    LazyLexSolution { winner: None, equilibria: Vec::new() }
}

/// The candidate every voter ranks first, if there is one.
pub fn check_rand_unanimity(e: &Election) -> Option<CandidateId> {
    let first = e.top(0);
    (1..e.num_voters()).all(|i| e.top(i) == first).then_some(first)
}

fn distinct(cands: &[CandidateId]) -> bool {
    let set: BTreeSet<_> = cands.iter().collect();
    set.len() == cands.len()
}

/// Tops pairwise distinct, and every voter weakly prefers the uniform lottery
/// over all tops to any other voter's top winning outright.
pub fn check_rand_singleton_votes(e: &Election) -> bool {
    let a = tops(e);
    if !distinct(&a) {
        return false;
    }
    let n = e.num_voters() as u64;
    e.voters().iter().enumerate().all(|(l, u)| {
        let sum: u64 = a.iter().map(|&c| u.get(c)).sum();
        let best_other = (0..a.len()).filter(|&i| i != l).map(|i| u.get(a[i])).max();
        best_other.is_none_or(|x| sum >= n * x)
    })
}

/// A tie set `X` together with the forced voter partition.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TieSetCertificate {
    pub candidates: Vec<CandidateId>,
    /// `groups[t]` holds the voters whose favorite in `X` is `candidates[t]`.
    pub groups: Vec<Vec<usize>>,
}

impl TieSetCertificate {
    /// Every voter votes for their favorite member of `X`.
    pub fn ballots(&self, n: usize) -> BallotVector {
        let mut b = BallotVector::trivial(n);
        for (c, members) in self.candidates.iter().zip(&self.groups) {
            for &i in members {
                b.0[i] = Ballot::Vote(*c);
            }
        }
        b
    }
}

pub(crate) fn check_subset_budget(m: usize, budget: u64) -> Result<(), GameError> {
    let required = 1u128.checked_shl(m as u32).unwrap_or(u128::MAX);
    if required > budget as u128 {
        return Err(GameError::BudgetExceeded { required, budget });
    }
    Ok(())
}

pub(crate) fn members(mask: u64, m: usize) -> Vec<CandidateId> {
    (0..m).filter(|&j| mask >> j & 1 == 1).map(CandidateId).collect()
}

/// Every voter prefers the uniform lottery over `x` to the best member of `x`
/// other than their favorite.
fn tie_inequality(u: &crate::election::UtilityVector, x: &[CandidateId], fav: CandidateId) -> bool {
    let sum: u64 = x.iter().map(|&c| u.get(c)).sum();
    let second = x.iter().filter(|&&c| c != fav).map(|&c| u.get(c)).max();
    second.is_none_or(|s| sum >= x.len() as u64 * s)
}

/// All tie sets `X` with `2 <= |X| <= n/2`, `|X|` dividing `n`, where the
/// voters' favorites within `X` split them evenly and every voter prefers the
/// uniform lottery over `X` to their second choice in `X`.
///
/// The partition is never searched: a voter in such an equilibrium must vote
/// for their favorite member of `X`, so `X` alone determines it.
pub fn find_tie_sets(e: &Election, budget: u64) -> Result<Vec<TieSetCertificate>, GameError> {
    let m = e.num_candidates();
    let n = e.num_voters();
    check_subset_budget(m, budget)?;
    let mut found = Vec::new();
    for mask in 1u64..(1u64 << m) {
        let k = mask.count_ones() as usize;
        if k < 2 || !n.is_multiple_of(k) || n / k < 2 {
            continue;
        }
        let x = members(mask, m);
        let mut groups = vec![Vec::new(); k];
        let mut ok = true;
        for (i, u) in e.voters().iter().enumerate() {
            let fav = u.favorite_in(x.iter().copied()).expect("X is nonempty");
            if !tie_inequality(u, &x, fav) {
                ok = false;
                break;
            }
            groups[x.iter().position(|&c| c == fav).expect("fav in X")].push(i);
        }
        if ok && groups.iter().all(|g| g.len() == n / k) {
            found.push(TieSetCertificate { candidates: x, groups });
        }
    }
    found.sort();
    Ok(found)
}

/// Equilibrium families of a lazy game under randomized tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandSolution {
    pub unanimity: Option<CandidateId>,
    pub singleton_votes: bool,
    pub tie_sets: Vec<TieSetCertificate>,
    /// All equilibria, sorted.
    pub equilibria: Vec<BallotVector>,
}

impl RandSolution {
    pub fn exists(&self) -> bool {
        !self.equilibria.is_empty()
    }
}

fn sorted_unique(mut v: Vec<BallotVector>) -> Vec<BallotVector> {
    v.sort();
    v.dedup();
    v
}

pub fn lazy_rand_solve(e: &Election, rule: TieRule, budget: u64) -> Result<RandSolution, GameError> {
    let n = e.num_voters();
    let m = e.num_candidates();
    let unanimity = check_rand_unanimity(e);
    let singleton_votes = check_rand_singleton_votes(e);
    let tie_sets = find_tie_sets(e, budget)?;
    let mut equilibria = Vec::new();
    if m == 1 {
        // Abstaining never changes the outcome, so nobody votes.
        equilibria.push(BallotVector::trivial(n));
    } else {
        if let Some(c) = unanimity {
            match rule {
                TieRule::RandVoter => equilibria.push(BallotVector::trivial(n)),
                _ => equilibria.extend((0..n).map(|i| lone_vote(n, i, c))),
            }
        }
        // A lone truthful voter could abstain without changing the selected
        // candidate under the random-voter rule; the single-voter case is
        // covered by unanimity.
        if singleton_votes && n >= 2 {
            equilibria.push(e.truthful());
        }
        equilibria.extend(tie_sets.iter().map(|t| t.ballots(n)));
    }
    Ok(RandSolution {
        unanimity,
        singleton_votes,
        tie_sets,
        equilibria: sorted_unique(equilibria),
    })
}

/// Whether truthful voting is an equilibrium of the truth-biased game with
/// lexicographic tie-breaking.
pub fn truthful_pne_truth_lex(e: &Election) -> bool {
    let a = e.truthful();
    let board = scores(e, &a);
    let cj = board.lex_winner();
    let w = board.winners();
    let h_before: Vec<CandidateId> = board.runners_up().into_iter().filter(|c| c.0 < cj.0).collect();
    !(0..e.num_voters()).any(|i| {
        let u = e.utility(i);
        let ai = e.top(i);
        w.iter().chain(&h_before).any(|&ck| ck != ai && ck != cj && u.prefers(ck, cj))
    })
}

/// Candidates that would win with one extra vote.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ThresholdSet {
    pub candidates: Vec<CandidateId>,
}

impl ThresholdSet {
    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }
}

/// `T(b)` relative to the lexicographic winner `c_j`: lower-index candidates
/// one point behind, and higher-index candidates level with `c_j`.
pub fn threshold_set(e: &Election, b: &BallotVector) -> ThresholdSet {
    let board = scores(e, b);
    let j = board.lex_winner();
    let top = board.max();
    let candidates = e
        .candidates()
        .filter(|&c| {
            let s = board.score(c);
            (c < j && s + 1 == top) || (c > j && s == top)
        })
        .collect();
    ThresholdSet { candidates }
}

/// Equilibrium families with a winning set of size at least two, for
/// truth-biased voters under randomized tie-breaking.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TieSolution {
    pub singleton_votes: bool,
    pub tie_sets: Vec<TieSetCertificate>,
    pub equilibria: Vec<BallotVector>,
}

impl TieSolution {
    pub fn exists(&self) -> bool {
        !self.equilibria.is_empty()
    }
}

pub fn truth_rand_tie_solve(e: &Election, rule: TieRule, budget: u64) -> Result<TieSolution, GameError> {
    let _ = rule;
    let n = e.num_voters();
    let singleton_votes = check_rand_singleton_votes(e);
    let tie_sets = find_tie_sets(e, budget)?;
    let mut equilibria: Vec<BallotVector> = tie_sets.iter().map(|t| t.ballots(n)).collect();
    if singleton_votes && n >= 2 {
        equilibria.push(e.truthful());
    }
    Ok(TieSolution {
        singleton_votes,
        tie_sets,
        equilibria: sorted_unique(equilibria),
    })
}

/// With a unique truthful winner `c_j`: truthful voting is an equilibrium iff
/// every voter prefers `c_j` to every runner-up other than their own top.
pub fn truth_rand_truthful_single(e: &Election, rule: TieRule) -> Result<bool, CharacterizationError> {
    let _ = rule;
    let board = scores(e, &e.truthful());
    let w = board.winners();
    if w.len() != 1 {
        return Err(CharacterizationError::TruthfulNotSingleton);
    }
    let cj = w[0];
    let h = board.runners_up();
    Ok((0..e.num_voters()).all(|i| {
        let u = e.utility(i);
        h.iter().all(|&ck| ck == e.top(i) || u.prefers(cj, ck))
    }))
}

/// Checks a non-truthful ballot vector with a unique winner `c_j` against the
/// four equilibrium conditions for truth-biased voters and randomized rules.
///
/// The last condition compares perturbed values: a voter whose top lies in
/// `H'(b)` gains the truthfulness bonus by moving there, so an exact tie in
/// expected utility already makes that move profitable.
pub fn verify_truth_rand_single(
    e: &Election,
    rule: TieRule,
    b: &BallotVector,
) -> Result<bool, CharacterizationError> {
    e.check_ballots(b).map_err(GameError::from)?;
    if *b == e.truthful() {
        return Err(CharacterizationError::TruthfulBallot);
    }
    let board = scores(e, b);
    let w = board.winners();
    if w.len() != 1 {
        return Err(CharacterizationError::NotSingleton);
    }
    let cj = w[0];
    let n = e.num_voters();
    // (1)
    if (0..n).any(|i| b.get(i) != Ballot::Vote(e.top(i)) && b.get(i) != Ballot::Vote(cj)) {
        return Ok(false);
    }
    // (2)
    let h = board.runners_up();
    if h.is_empty() {
        return Ok(false);
    }
    // (3)
    for i in 0..n {
        let u = e.utility(i);
        if h.iter().any(|&ck| Ballot::Vote(ck) != b.get(i) && !u.prefers(cj, ck)) {
            return Ok(false);
        }
    }
    // (4)
    let stay_base = |i: usize| BigRational::from_integer(BigInt::from(e.utility(i).get(cj)));
    for cl in board.second_runners_up() {
        for i in (0..n).filter(|&i| b.get(i) == Ballot::Vote(cj)) {
            let moved = b.with(i, Ballot::Vote(cl));
            let p = lottery(e, &moved, rule, None);
            let dev = PerturbedValue::finite(expected_utility(e.utility(i), &p), cl == e.top(i));
            let stay = PerturbedValue::finite(stay_base(i), cj == e.top(i));
            if dev > stay {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Voters partitioned into classes of identical utility vectors, in order of
/// first appearance. Identical voters are interchangeable in every game.
pub(crate) fn identical_voter_classes(e: &Election, eligible: impl Fn(usize) -> bool) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in (0..e.num_voters()).filter(|&i| eligible(i)) {
        match classes.iter_mut().find(|c| e.utility(c[0]) == e.utility(i)) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    classes
}

fn count_space(classes: &[Vec<usize>]) -> u128 {
    classes
        .iter()
        .fold(1u128, |acc, c| acc.saturating_mul(c.len() as u128 + 1))
}

/// Visits every nonzero count vector over `classes` (lexicographic, last
/// class fastest). Stops early when `visit` returns `true`.
pub(crate) fn for_each_count(classes: &[Vec<usize>], mut visit: impl FnMut(&[usize]) -> bool) {
    let mut counts = vec![0usize; classes.len()];
    loop {
        let mut t = classes.len();
        loop {
            if t == 0 {
                return;
            }
            t -= 1;
            if counts[t] < classes[t].len() {
                counts[t] += 1;
                break;
            }
            counts[t] = 0;
        }
        if visit(&counts) {
            return;
        }
    }
}

/// All ways of picking `counts[t]` members of each class.
pub(crate) fn expand_choices(classes: &[Vec<usize>], counts: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for (class, &k) in classes.iter().zip(counts) {
        let mut next = Vec::new();
        for pick in combinations(class, k) {
            for prefix in &out {
                let mut v = prefix.clone();
                v.extend_from_slice(&pick);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

pub(crate) fn combinations<T: Clone>(items: &[T], k: usize) -> Vec<Vec<T>> {
    fn go<T: Clone>(items: &[T], k: usize, start: usize, cur: &mut Vec<T>, out: &mut Vec<Vec<T>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for idx in start..items.len() {
            if items.len() - idx < k - cur.len() {
                break;
            }
            cur.push(items[idx].clone());
            go(items, k, idx + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Ballot vectors in which every voter votes either their top or `target`, with
/// at least one voter on `target` against their top.
#[derive(Debug, Clone)]
pub(crate) struct TwoValuedSearch<'a> {
    e: &'a Election,
    target: CandidateId,
    classes: Vec<Vec<usize>>,
}

impl<'a> TwoValuedSearch<'a> {
    pub(crate) fn new(e: &'a Election, target: CandidateId) -> Self {
        let classes = identical_voter_classes(e, |i| e.top(i) != target);
        TwoValuedSearch { e, target, classes }
    }

    pub(crate) fn space(&self) -> u128 {
        count_space(&self.classes) - 1
    }

    fn ballots(&self, counts: &[usize]) -> BallotVector {
        let mut b = self.e.truthful();
        for (class, &k) in self.classes.iter().zip(counts) {
            for &i in &class[..k] {
                b.0[i] = Ballot::Vote(self.target);
            }
        }
        b
    }

    /// Representatives of every accepted symmetry class; stops at the first
    /// one when `first_only` is set.
    pub(crate) fn run(
        &self,
        first_only: bool,
        mut accept: impl FnMut(&BallotVector) -> bool,
    ) -> Vec<(Vec<usize>, BallotVector)> {
        let mut found = Vec::new();
        for_each_count(&self.classes, |counts| {
            let b = self.ballots(counts);
            if accept(&b) {
                found.push((counts.to_vec(), b));
                return first_only;
            }
            false
        });
        found
    }

    /// Every member of the symmetry class of an accepted count vector.
    pub(crate) fn expand(&self, counts: &[usize]) -> Vec<BallotVector> {
        expand_choices(&self.classes, counts)
            .into_iter()
            .map(|switchers| {
                let mut b = self.e.truthful();
                for i in switchers {
                    b.0[i] = Ballot::Vote(self.target);
                }
                b
            })
            .collect()
    }
}

fn check_space(required: u128, budget: u64) -> Result<(), GameError> {
    if required > budget as u128 {
        return Err(GameError::BudgetExceeded { required, budget });
    }
    Ok(())
}

/// Cheap necessary condition for a non-truthful equilibrium under
/// lexicographic tie-breaking: a nonempty threshold set whose members kept
/// their truthful scores.
pub(crate) fn threshold_condition(e: &Election, b: &BallotVector) -> bool {
    let t = threshold_set(e, b);
    if t.is_empty() {
        return false;
    }
    let now = scores(e, b);
    let truthful = scores(e, &e.truthful());
    t.candidates.iter().all(|&c| now.score(c) == truthful.score(c))
}

fn lex_acceptor<'g>(g: &'g GameSpec, target: CandidateId) -> impl FnMut(&BallotVector) -> bool + 'g {
    move |b| {
        let e = g.election();
        scores(e, b).lex_winner() == target && threshold_condition(e, b) && is_pne(g, b).is_equilibrium()
    }
}

fn rand_acceptor<'e>(e: &'e Election, rule: TieRule, target: CandidateId) -> impl FnMut(&BallotVector) -> bool + 'e {
    move |b| {
        scores(e, b).winners() == [target]
            && verify_truth_rand_single(e, rule, b).expect("preconditions hold")
    }
}

/// Search space of the non-truthful single-winner searches, summed over the
/// given targets.
pub(crate) fn two_valued_space(e: &Election, targets: &[CandidateId]) -> u128 {
    targets
        .iter()
        .map(|&c| TwoValuedSearch::new(e, c).space())
        .fold(0u128, u128::saturating_add)
}

/// Non-truthful equilibria of the truth-biased game with lexicographic
/// tie-breaking whose winner is `target`.
///
/// In such an equilibrium every voter votes their top or the winner, so only
/// those vectors are generated; identical voters are treated as one class.
pub fn truth_lex_nontruthful(
    e: &Election,
    target: CandidateId,
    first_only: bool,
    budget: u64,
) -> Result<Vec<BallotVector>, GameError> {
    truth_lex_search(e, target, first_only, budget, |_| true)
}

/// [`truth_lex_nontruthful`] restricted to vectors satisfying `filter`.
/// The filter must be invariant under swapping identical voters.
pub(crate) fn truth_lex_search(
    e: &Election,
    target: CandidateId,
    first_only: bool,
    budget: u64,
    filter: impl Fn(&BallotVector) -> bool,
) -> Result<Vec<BallotVector>, GameError> {
    let search = TwoValuedSearch::new(e, target);
    check_space(search.space(), budget)?;
    let g = GameSpec::new(e.clone(), Setting::TruthBiased, TieRule::Lex);
    let mut accept = lex_acceptor(&g, target);
    let found = search.run(first_only, |b| filter(b) && accept(b));
    Ok(collect(&search, found, first_only))
}

/// Non-truthful equilibria with winning set `{target}` for truth-biased
/// voters under a randomized rule.
pub fn truth_rand_nontruthful_single(
    e: &Election,
    rule: TieRule,
    target: CandidateId,
    first_only: bool,
    budget: u64,
) -> Result<Vec<BallotVector>, GameError> {
    let search = TwoValuedSearch::new(e, target);
    check_space(search.space(), budget)?;
    Ok(collect(&search, search.run(first_only, rand_acceptor(e, rule, target)), first_only))
}

fn collect(
    search: &TwoValuedSearch<'_>,
    found: Vec<(Vec<usize>, BallotVector)>,
    first_only: bool,
) -> Vec<BallotVector> {
    if first_only {
        return found.into_iter().map(|(_, b)| b).collect();
    }
    sorted_unique(found.iter().flat_map(|(c, _)| search.expand(c)).collect())
}

/// The complete equilibrium set, assembled from the characterizations (and,
/// for truth-biased voters, the structured non-truthful searches).
pub fn characterized_pne(
    e: &Election,
    setting: Setting,
    rule: TieRule,
    budget: u64,
) -> Result<Vec<BallotVector>, GameError> {
    let all: Vec<CandidateId> = e.candidates().collect();
    let mut out = Vec::new();
    match (setting, rule) {
        (Setting::Lazy, TieRule::Lex) => out = lazy_lex_solve(e).equilibria,
        (Setting::Lazy, _) => out = lazy_rand_solve(e, rule, budget)?.equilibria,
        (Setting::TruthBiased, TieRule::Lex) => {
            check_space(two_valued_space(e, &all), budget)?;
            if truthful_pne_truth_lex(e) {
                out.push(e.truthful());
            }
            for &w in &all {
                out.extend(truth_lex_nontruthful(e, w, false, budget)?);
            }
        }
        (Setting::TruthBiased, _) => {
            check_space(two_valued_space(e, &all), budget)?;
            out.extend(truth_rand_tie_solve(e, rule, budget)?.equilibria);
            if let Ok(true) = truth_rand_truthful_single(e, rule) {
                out.push(e.truthful());
            }
            for &c in &all {
                out.extend(truth_rand_nontruthful_single(e, rule, c, false, budget)?);
            }
        }
    }
    Ok(sorted_unique(out))
}
