//! Games with a block of principled voters, who always vote for their top
//! choice and never abstain.

use crate::characterizations::{check_subset_budget, combinations, members};
use crate::election::{
    combined_board, Ballot, BallotVector, CandidateId, Election, PreferenceOrder, ScoreBoard,
    TieRule, UtilityVector,
};
use crate::error::{ElectionError, GameError};
use crate::game::{is_pne, GameSpec, Setting};

/// Full rankings of the principled voters; their ballots are the tops.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PrincipledProfile {
    m: usize,
    rankings: Vec<PreferenceOrder>,
}

impl PrincipledProfile {
    pub fn empty(m: usize) -> Self {
        PrincipledProfile { m, rankings: Vec::new() }
    }

    pub fn new(m: usize, rankings: Vec<PreferenceOrder>) -> Result<Self, ElectionError> {
        for r in &rankings {
            if r.len() != m {
                return Err(ElectionError::RankingLength { expected: m, found: r.len() });
            }
        }
        Ok(PrincipledProfile { m, rankings })
    }

    /// From rankings given as candidate index lists, best first.
    pub fn from_rankings(m: usize, rankings: &[Vec<usize>]) -> Result<Self, ElectionError> {
        let orders = rankings
            .iter()
            .map(|r| PreferenceOrder::new(r.iter().map(|&c| CandidateId(c)).collect(), m))
            .collect::<Result<Vec<_>, _>>()?;
        PrincipledProfile::new(m, orders)
    }

    pub fn num_candidates(&self) -> usize {
        self.m
    }

    /// Number of principled voters `s`.
    pub fn len(&self) -> usize {
        self.rankings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rankings.is_empty()
    }

    pub fn rankings(&self) -> &[PreferenceOrder] {
        &self.rankings
    }

    /// The fixed ballots `a^P`.
    pub fn tops(&self) -> impl Iterator<Item = CandidateId> + '_ {
        self.rankings.iter().map(PreferenceOrder::top)
    }

    /// Scores of the principled ballots alone.
    pub fn scores(&self) -> ScoreBoard {
        let mut s = vec![0; self.m];
        for c in self.tops() {
            s[c.0] += 1;
        }
        ScoreBoard::from_scores(s)
    }
}

/// Scores of `b + a^P`.
pub fn combined_scores(e: &Election, b: &BallotVector, p: &PrincipledProfile) -> ScoreBoard {
    combined_board(e, b, Some(p))
}

/// Runners-up of `a^P` that beat the lexicographic winner of `a^P` on the
/// tie-break order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct HPlusSet {
    pub candidates: Vec<CandidateId>,
}

pub fn h_plus(p: &PrincipledProfile) -> HPlusSet {
    let board = p.scores();
    let j = board.lex_winner();
    HPlusSet {
        candidates: board.runners_up().into_iter().filter(|&c| c < j).collect(),
    }
}

/// Whether a candidate can win some equilibrium of the lazy game with
/// lexicographic tie-breaking, and how.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Winnability {
    pub candidate: CandidateId,
    pub winnable: bool,
    /// Lazy votes the candidate needs in an equilibrium it wins.
    pub votes_needed: usize,
    /// Lazy voters eligible to cast those votes.
    pub supporters: Vec<usize>,
}

fn lazy_voters_prefer_none(e: &Election, c: CandidateId, rivals: &[CandidateId]) -> bool {
    e.voters()
        .iter()
        .all(|u| rivals.iter().all(|&r| r == c || u.prefers(c, r)))
}

/// Per-candidate winnability for lazy voters under lexicographic
/// tie-breaking.
///
/// The lexicographic winner `c_j` of `a^P` wins iff everybody abstaining is
/// an equilibrium. Another candidate `c_k` needs exactly `t` lazy votes
/// (`M + 1 - sc` above `c_j` in the order, `M - sc` before it), cast by voters
/// who prefer `c_k` to every other member of `W(a^P)` and `H^+(a^P)`. In
/// addition no lazy voter may prefer a candidate that would overturn `c_k`
/// with one more vote: the winners of `a^P` placed before `c_k` when `c_k`
/// comes after `c_j`, or all winners plus the runners-up placed before `c_k`
/// otherwise.
pub fn lazy_lex_principled_solve(e: &Election, p: &PrincipledProfile) -> Vec<Winnability> {
    let board = p.scores();
    let top = board.max();
    let w = board.winners();
    let h = board.runners_up();
    let j = board.lex_winner();
    let hp = h_plus(p).candidates;
    let guard: Vec<CandidateId> = w.iter().chain(&hp).copied().collect();
    let n = e.num_voters();

    e.candidates()
        .map(|ck| {
            if ck == j {
                let g = GameSpec::new(e.clone(), Setting::Lazy, TieRule::Lex)
                    .with_principled(p.clone())
                    .expect("profile matches election");
                return Winnability {
                    candidate: ck,
                    winnable: is_pne(&g, &BallotVector::trivial(n)).is_equilibrium(),
                    votes_needed: 0,
                    supporters: Vec::new(),
                };
            }
            let sc = board.score(ck);
            let (t, overturn): (usize, Vec<CandidateId>) = if ck > j {
                (top + 1 - sc, w.iter().copied().filter(|&c| c < ck).collect())
            } else {
                (
                    top - sc,
                    w.iter().chain(h.iter().filter(|&&c| c < ck)).copied().collect(),
                )
            };
            let supporters: Vec<usize> = (0..n)
                .filter(|&i| guard.iter().all(|&c| c == ck || e.utility(i).prefers(ck, c)))
                .collect();
            let winnable = supporters.len() >= t && lazy_voters_prefer_none(e, ck, &overturn);
            Winnability { candidate: ck, winnable, votes_needed: t, supporters }
        })
        .collect()
}

fn votes_for(n: usize, voters: &[usize], c: CandidateId) -> BallotVector {
    let mut b = BallotVector::trivial(n);
    for &i in voters {
        b.0[i] = Ballot::Vote(c);
    }
    b
}

/// Every equilibrium of the lazy game with lexicographic tie-breaking.
pub fn lazy_lex_principled_equilibria(e: &Election, p: &PrincipledProfile) -> Vec<BallotVector> {
    let n = e.num_voters();
    let mut out = Vec::new();
    for w in lazy_lex_principled_solve(e, p).into_iter().filter(|w| w.winnable) {
        for pick in combinations(&w.supporters, w.votes_needed) {
            out.push(votes_for(n, &pick, w.candidate));
        }
    }
    out.sort();
    out
}

struct SingleShape {
    /// Lazy votes `c_j` needs; zero when the principled block already elects it.
    votes_needed: usize,
    supporters: Vec<usize>,
}

fn rc_single_shape(e: &Election, p: &PrincipledProfile, cj: CandidateId) -> Option<SingleShape> {
    let board = p.scores();
    let others: Vec<CandidateId> = e.candidates().filter(|&c| c != cj).collect();
    let n = e.num_voters();
    let best_other = others.iter().map(|&c| board.score(c)).max();
    let own = board.score(cj);
    match best_other {
        None => Some(SingleShape { votes_needed: 0, supporters: Vec::new() }),
        Some(mo) if own > mo => {
            // c_j already wins alone: an abstainer may only tip a runner-up into a tie.
            let h = board.runners_up();
            lazy_voters_prefer_none(e, cj, &h)
                .then_some(SingleShape { votes_needed: 0, supporters: Vec::new() })
        }
        Some(mo) => {
            let rivals: Vec<CandidateId> = others.iter().copied().filter(|&c| board.score(c) == mo).collect();
            let near: Vec<CandidateId> = others
                .iter()
                .copied()
                .filter(|&c| mo >= 1 && board.score(c) == mo - 1)
                .collect();
            if !lazy_voters_prefer_none(e, cj, &rivals) {
                return None;
            }
            let supporters: Vec<usize> = (0..n)
                .filter(|&i| {
                    let u = e.utility(i);
                    let base: u64 = rivals.iter().map(|&c| u.get(c)).sum();
                    let k = rivals.len() as u64 + 1;
                    near.iter().all(|&cl| u.get(cj) * k >= base + u.get(cl))
                })
                .collect();
            let t = mo + 1 - own;
            (supporters.len() >= t).then_some(SingleShape { votes_needed: t, supporters })
        }
    }
}

/// Whether the lazy game with random-candidate tie-breaking has an
/// equilibrium whose winning set is `{c_j}`.
///
/// Let `M_o` be the best principled score among the other candidates and
/// `W_o`, `H_o` the others at `M_o` and `M_o - 1`. If `c_j` already leads,
/// everybody abstaining works iff every lazy voter prefers `c_j` to every
/// runner-up of `a^P`. Otherwise `c_j` needs `M_o + 1 - sc(c_j)` lazy votes:
/// every lazy voter must prefer `c_j` to all of `W_o`, and the voters casting
/// those votes must weakly prefer `c_j` to the uniform lottery over
/// `W_o + {c_j, c_l}` for every `c_l` in `H_o`.
pub fn lazy_rc_principled_single(e: &Election, p: &PrincipledProfile, cj: CandidateId) -> bool {
    rc_single_shape(e, p, cj).is_some()
}

/// All equilibria with winning set `{c_j}` (random-candidate rule).
pub fn lazy_rc_principled_single_equilibria(
    e: &Election,
    p: &PrincipledProfile,
    cj: CandidateId,
) -> Vec<BallotVector> {
    let n = e.num_voters();
    match rc_single_shape(e, p, cj) {
        None => Vec::new(),
        Some(shape) => combinations(&shape.supporters, shape.votes_needed)
            .into_iter()
            .map(|pick| votes_for(n, &pick, cj))
            .collect(),
    }
}

/// A tied winning set `X` at level `L` (score of each member in `b + a^P`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct PrincipledTieCertificate {
    pub candidates: Vec<CandidateId>,
    pub level: usize,
    /// Lazy voters whose favorite in `X` is the matching candidate.
    pub groups: Vec<Vec<usize>>,
}

impl PrincipledTieCertificate {
    pub fn ballots(&self, n: usize) -> BallotVector {
        let mut b = BallotVector::trivial(n);
        for (c, g) in self.candidates.iter().zip(&self.groups) {
            for &i in g {
                b.0[i] = Ballot::Vote(*c);
            }
        }
        b
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrincipledTieSolution {
    /// All tops of `N + P` distinct and every lazy voter prefers the uniform
    /// lottery over them to any other voter's top.
    pub distinct_tops: bool,
    /// Tie sets at level two or more.
    pub certificates: Vec<PrincipledTieCertificate>,
}

impl PrincipledTieSolution {
    pub fn exists(&self) -> bool {
        self.distinct_tops || !self.certificates.is_empty()
    }
}

fn distinct_tops_condition(e: &Election, p: &PrincipledProfile) -> bool {
    let mut all: Vec<CandidateId> = (0..e.num_voters()).map(|i| e.top(i)).collect();
    let n = all.len();
    all.extend(p.tops());
    let total = all.len();
    if total < 2 {
        return false;
    }
    let mut sorted = all.clone();
    sorted.sort();
    sorted.dedup();
    if sorted.len() != total {
        return false;
    }
    (0..n).all(|l| {
        let u = e.utility(l);
        let sum: u64 = all.iter().map(|&c| u.get(c)).sum();
        let best = (0..total).filter(|&i| i != l).map(|i| u.get(all[i])).max();
        best.is_none_or(|x| sum >= total as u64 * x)
    })
}

fn tie_certificate(
    e: &Election,
    board: &ScoreBoard,
    x: Vec<CandidateId>,
    min_level: usize,
) -> Option<PrincipledTieCertificate> {
    let k = x.len();
    let pool = e.num_voters() + x.iter().map(|&c| board.score(c)).sum::<usize>();
    if !pool.is_multiple_of(k) || pool / k < min_level {
        return None;
    }
    let level = pool / k;
    let outside: Vec<CandidateId> = e.candidates().filter(|c| !x.contains(c)).collect();
    if outside.iter().any(|&c| board.score(c) >= level) {
        return None;
    }
    let edge: Vec<CandidateId> = outside.into_iter().filter(|&c| board.score(c) + 1 == level).collect();
    let mut groups = vec![Vec::new(); k];
    for (i, u) in e.voters().iter().enumerate() {
        let fav = u.favorite_in(x.iter().copied()).expect("X nonempty");
        if !tie_ok(u, &x, fav, &edge) {
            return None;
        }
        groups[x.iter().position(|&c| c == fav).expect("fav in X")].push(i);
    }
    let sizes_match = x
        .iter()
        .zip(&groups)
        .all(|(&c, g)| board.score(c) + g.len() == level);
    sizes_match.then_some(PrincipledTieCertificate { candidates: x, level, groups })
}

fn tie_ok(u: &UtilityVector, x: &[CandidateId], fav: CandidateId, edge: &[CandidateId]) -> bool {
    let sum: u64 = x.iter().map(|&c| u.get(c)).sum();
    let k = x.len() as u64;
    let second = x.iter().filter(|&&c| c != fav).map(|&c| u.get(c)).max();
    second.is_none_or(|s| sum >= k * s) && edge.iter().all(|&c| u.prefers(fav, c))
}

fn tie_search(
    e: &Election,
    p: &PrincipledProfile,
    min_level: usize,
    budget: u64,
) -> Result<Vec<PrincipledTieCertificate>, GameError> {
    let m = e.num_candidates();
    check_subset_budget(m, budget)?;
    let board = p.scores();
    let mut out: Vec<PrincipledTieCertificate> = (1u64..(1u64 << m))
        .filter(|mask| mask.count_ones() >= 2)
        .filter_map(|mask| tie_certificate(e, &board, members(mask, m), min_level))
        .collect();
    out.sort();
    Ok(out)
}

/// Equilibria with two or more tied winners (random-candidate rule).
///
/// In such an equilibrium no lazy voter abstains and each votes their favorite
/// member of the tied set `X`, so the level is `L = (n + sc(X, a^P)) / |X|`.
pub fn lazy_rc_principled_tie(
    e: &Election,
    p: &PrincipledProfile,
    budget: u64,
) -> Result<PrincipledTieSolution, GameError> {
    Ok(PrincipledTieSolution {
        distinct_tops: distinct_tops_condition(e, p),
        certificates: tie_search(e, p, 2, budget)?,
    })
}

/// Every equilibrium of the lazy game with random-candidate tie-breaking.
pub fn lazy_rc_principled_equilibria(
    e: &Election,
    p: &PrincipledProfile,
    budget: u64,
) -> Result<Vec<BallotVector>, GameError> {
    let n = e.num_voters();
    let mut out: Vec<BallotVector> = e
        .candidates()
        .flat_map(|c| lazy_rc_principled_single_equilibria(e, p, c))
        .collect();
    let ties = lazy_rc_principled_tie(e, p, budget)?;
    if ties.distinct_tops {
        out.push(e.truthful());
    }
    out.extend(ties.certificates.iter().map(|c| c.ballots(n)));
    out.sort();
    out.dedup();
    Ok(out)
}

/// Whether truthful voting is an equilibrium for truth-biased voters under
/// lexicographic tie-breaking, with the principled block counted in.
pub fn truth_lex_principled_truthful(e: &Election, p: &PrincipledProfile) -> bool {
    let board = combined_scores(e, &e.truthful(), p);
    let cj = board.lex_winner();
    let threats: Vec<CandidateId> = board
        .winners()
        .into_iter()
        .chain(board.runners_up().into_iter().filter(|&c| c < cj))
        .collect();
    !(0..e.num_voters()).any(|i| {
        let u = e.utility(i);
        threats.iter().any(|&ck| ck != e.top(i) && ck != cj && u.prefers(ck, cj))
    })
}
