//! ExistNE / TieNE / SingleNE decisions, additive price of anarchy, and
//! generators for the classic example profiles.

use std::fmt;

use crate::characterizations::{
    characterized_pne, check_rand_singleton_votes, check_rand_unanimity, lazy_lex_solve,
    lazy_rand_solve, lone_vote, truth_lex_search, truth_rand_nontruthful_single,
    truth_rand_tie_solve, truth_rand_truthful_single, truthful_pne_truth_lex, two_valued_space,
};
use crate::election::{scores, BallotVector, CandidateId, Election, ScoreBoard, TieRule};
use crate::error::{DecisionError, ElectionError, GameError};
use crate::game::{enumerate_pne, outcome_of, GameSpec, Setting, TrivialPolicy};
use crate::principled::PrincipledProfile;

/// Which equilibrium question to ask.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Problem {
    /// Is there any equilibrium?
    ExistNe,
    /// Is there an equilibrium with several tied winners including the target?
    TieNe,
    /// Is there an equilibrium whose only winner is the target?
    SingleNe,
}

impl Problem {
    pub fn needs_target(self) -> bool {
        self != Problem::ExistNe
    }

    pub fn name(self) -> &'static str {
        match self {
            Problem::ExistNe => "exist-ne",
            Problem::TieNe => "tie-ne",
            Problem::SingleNe => "single-ne",
        }
    }
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DecisionQuery {
    problem: Problem,
    setting: Setting,
    rule: TieRule,
    target: Option<CandidateId>,
}

impl DecisionQuery {
    pub fn new(
        problem: Problem,
        setting: Setting,
        rule: TieRule,
        target: Option<CandidateId>,
    ) -> Result<Self, DecisionError> {
        match (problem.needs_target(), target) {
            (true, None) => Err(DecisionError::MissingTarget { problem: problem.name() }),
            (false, Some(_)) => Err(DecisionError::UnexpectedTarget),
            _ => Ok(DecisionQuery { problem, setting, rule, target }),
        }
    }

    pub fn problem(&self) -> Problem {
        self.problem
    }

    pub fn setting(&self) -> Setting {
        self.setting
    }

    pub fn rule(&self) -> TieRule {
        self.rule
    }

    pub fn target(&self) -> Option<CandidateId> {
        self.target
    }
}

/// How an answer was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Polynomial-time characterization.
    Poly,
    /// Bounded search that ran to completion.
    Search,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Poly => "poly",
            Method::Search => "search",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decision {
    pub answer: bool,
    /// An equilibrium with the requested property, on a yes answer.
    pub witness: Option<BallotVector>,
    pub method: Method,
}

impl Decision {
    fn found(witness: Option<BallotVector>, method: Method) -> Self {
        Decision { answer: witness.is_some(), witness, method }
    }
}

fn matches(problem: Problem, target: Option<CandidateId>, board: &ScoreBoard) -> bool {
    let w = board.winners();
    match problem {
        Problem::ExistNe => true,
        Problem::SingleNe => w == [target.expect("validated")],
        Problem::TieNe => w.len() > 1 && w.contains(&target.expect("validated")),
    }
}

fn first_matching(
    e: &Election,
    problem: Problem,
    target: Option<CandidateId>,
    candidates: impl IntoIterator<Item = BallotVector>,
) -> Option<BallotVector> {
    candidates.into_iter().find(|b| matches(problem, target, &scores(e, b)))
}

/// Answers an equilibrium question with the cheapest applicable method.
///
/// Returns [`DecisionError::Unknown`] when a search would exceed `budget`;
/// a `false` answer is always backed by a complete argument.
pub fn decide(q: &DecisionQuery, e: &Election, budget: u64) -> Result<Decision, DecisionError> {
    if let Some(t) = q.target {
        if t.0 >= e.num_candidates() {
            return Err(DecisionError::TargetOutOfRange { target: t });
        }
    }
    let unknown = DecisionError::Unknown;
    let (p, t) = (q.problem, q.target);
    match (q.setting, q.rule) {
        (Setting::Lazy, TieRule::Lex) => {
            let sol = lazy_lex_solve(e);
            Ok(Decision::found(first_matching(e, p, t, sol.equilibria), Method::Poly))
        }
        (Setting::Lazy, rule) => {
            let n = e.num_voters();
            let m = e.num_candidates();
            if p == Problem::SingleNe {
                let target = t.expect("validated");
                let witness = if m == 1 {
                    Some(BallotVector::trivial(n))
                } else if rule == TieRule::RandCand && check_rand_unanimity(e) == Some(target) {
                    Some(lone_vote(n, 0, target))
                } else {
                    None
                };
                return Ok(Decision::found(witness, Method::Poly));
            }
            if p == Problem::ExistNe {
                let quick = if m == 1 {
                    Some(BallotVector::trivial(n))
                } else if let Some(c) = check_rand_unanimity(e) {
                    Some(match rule {
                        TieRule::RandVoter => BallotVector::trivial(n),
                        _ => lone_vote(n, 0, c),
                    })
                } else if n >= 2 && check_rand_singleton_votes(e) {
                    Some(e.truthful())
                } else {
                    None
                };
                if quick.is_some() {
                    return Ok(Decision::found(quick, Method::Poly));
                }
            }
            let sol = lazy_rand_solve(e, rule, budget).map_err(unknown)?;
            Ok(Decision::found(first_matching(e, p, t, sol.equilibria), Method::Search))
        }
        (Setting::TruthBiased, TieRule::Lex) => {
            let truthful = e.truthful();
            if truthful_pne_truth_lex(e) && matches(p, t, &scores(e, &truthful)) {
                return Ok(Decision::found(Some(truthful), Method::Poly));
            }
            let winners: Vec<CandidateId> = match (p, t) {
                (Problem::SingleNe, Some(c)) => vec![c],
                _ => e.candidates().collect(),
            };
            let required = two_valued_space(e, &winners);
            if required > budget as u128 {
                return Err(unknown(GameError::BudgetExceeded { required, budget }));
            }
            for w in winners {
                let hit = truth_lex_search(e, w, true, budget, |b| matches(p, t, &scores(e, b)))
                    .map_err(unknown)?;
                if let Some(b) = hit.into_iter().next() {
                    return Ok(Decision::found(Some(b), Method::Search));
                }
            }
            Ok(Decision::found(None, Method::Search))
        }
        (Setting::TruthBiased, rule) => {
            let truthful = e.truthful();
            let truthful_single = truth_rand_truthful_single(e, rule) == Ok(true);
            if p != Problem::TieNe && truthful_single && matches(p, t, &scores(e, &truthful)) {
                return Ok(Decision::found(Some(truthful), Method::Poly));
            }
            if p != Problem::SingleNe {
                if check_rand_singleton_votes(e)
                    && e.num_voters() >= 2
                    && matches(p, t, &scores(e, &truthful))
                {
                    return Ok(Decision::found(Some(truthful), Method::Poly));
                }
                let ties = truth_rand_tie_solve(e, rule, budget).map_err(unknown)?;
                if let Some(b) = first_matching(e, p, t, ties.equilibria) {
                    return Ok(Decision::found(Some(b), Method::Search));
                }
                if p == Problem::TieNe {
                    return Ok(Decision::found(None, Method::Search));
                }
            }
            let targets: Vec<CandidateId> = match t {
                Some(c) => vec![c],
                None => e.candidates().collect(),
            };
            let required = two_valued_space(e, &targets);
            if required > budget as u128 {
                return Err(unknown(GameError::BudgetExceeded { required, budget }));
            }
            for c in targets {
                let hit = truth_rand_nontruthful_single(e, rule, c, true, budget).map_err(unknown)?;
                if let Some(b) = hit.into_iter().next() {
                    return Ok(Decision::found(Some(b), Method::Search));
                }
            }
            Ok(Decision::found(None, Method::Search))
        }
    }
}

/// Additive price of anarchy of one game.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PoAReport {
    /// Truthful score of the truthful winner.
    pub truthful_winner_score: usize,
    /// Lowest truthful score of any candidate that wins some equilibrium with
    /// positive probability.
    pub worst_pne_winner_truthful_score: usize,
    pub gap: usize,
    /// An equilibrium attaining the worst score.
    pub witness: Option<BallotVector>,
    /// False when the game has no equilibrium; the scores are then zero.
    pub defined: bool,
}

/// Worst-case loss in truthful score over all equilibria.
///
/// Lottery outcomes are scored by their worst support member.
pub fn poa_additive(g: &GameSpec, budget: u64) -> Result<PoAReport, GameError> {
    let e = g.election();
    let equilibria = if g.principled().is_empty() && g.trivial_policy() == TrivialPolicy::FullTie {
        characterized_pne(e, g.setting(), g.rule(), budget)?
    } else {
        enumerate_pne(g, budget)?
    };
    let truthful = g.board(&e.truthful());
    let best = truthful.max();
    let worst = equilibria
        .iter()
        .filter_map(|b| {
            let out = outcome_of(g, b)?;
            let low = out.lottery.support().into_iter().map(|c| truthful.score(c)).min()?;
            Some((low, b))
        })
        .min_by_key(|(low, _)| *low);
    Ok(match worst {
        Some((low, b)) => PoAReport {
            truthful_winner_score: best,
            worst_pne_winner_truthful_score: low,
            gap: best - low,
            witness: Some(b.clone()),
            defined: true,
        },
        None => PoAReport {
            truthful_winner_score: best,
            worst_pne_winner_truthful_score: 0,
            gap: 0,
            witness: None,
            defined: false,
        },
    })
}

/// Invalid generator parameters.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeneratorError {
    #[error("n must be at least 3")]
    TooFewVoters,
    #[error("n must be a multiple of 3 and at least 6")]
    NotMultipleOfThree,
    #[error(transparent)]
    Election(#[from] ElectionError),
}

/// `head`, then the remaining candidates by descending index.
fn ranking_with_head(m: usize, head: &[usize]) -> Vec<usize> {
    let mut r = head.to_vec();
    r.extend((0..m).rev().filter(|c| !head.contains(c)));
    r
}

/// `n` voters over `n` candidates: one voter ranks `c2` first, the others
/// rank `c3 > c2 > c1` on top. Lazy voters with lexicographic tie-breaking
/// lose `n - 2` points of truthful score.
pub fn gen_lazy_poa(n: usize) -> Result<Election, GeneratorError> {
    if n < 3 {
        return Err(GeneratorError::TooFewVoters);
    }
    let mut rankings = vec![ranking_with_head(n, &[1])];
    rankings.extend((1..n).map(|_| ranking_with_head(n, &[2, 1, 0])));
    Ok(Election::from_rankings(n, &rankings)?)
}

/// Three blocks over three candidates: `n/3` voters `c1 > c2 > c3`, then
/// `n/3 + 1` and `n/3 - 1` voters `c3 > c2 > c1`. Truth-biased voters with
/// lexicographic tie-breaking lose `2n/3` points of truthful score.
pub fn gen_truth_poa(n: usize) -> Result<Election, GeneratorError> {
    if !n.is_multiple_of(3) || n < 6 {
        return Err(GeneratorError::NotMultipleOfThree);
    }
    let third = n / 3;
    let mut rankings = vec![vec![0, 1, 2]; third];
    rankings.extend(vec![vec![2, 1, 0]; 2 * third]);
    Ok(Election::from_rankings(3, &rankings)?)
}

/// One voter `c2 > c3 > c1` and three voters `c3 > c2 > c1`: lazy voters
/// elect `c2`, truth-biased voters elect `c3`.
pub fn gen_comparison_example() -> Election {
    Election::from_rankings(3, &[vec![1, 2, 0], vec![2, 1, 0], vec![2, 1, 0], vec![2, 1, 0]])
        .expect("fixed profile is valid")
}

/// Two voters sharing their top: `x > y > z` and `x > z > y`.
pub fn gen_shared_top_example() -> Election {
    Election::from_rankings(3, &[vec![0, 1, 2], vec![0, 2, 1]]).expect("fixed profile is valid")
}

/// Four lazy voters, two with utilities `(20, 4, 1)` and two with
/// `(4, 20, 1)`, plus one principled voter `c3 > c1 > c2`.
///
/// `(c1, c1, c2, c2)` is an equilibrium under both randomized rules, with
/// lotteries `(1/2, 1/2, 0)` for random-candidate and `(3/5, 2/5, 0)` for
/// random-voter tie-breaking.
pub fn gen_rc_vs_rv() -> (Election, PrincipledProfile) {
    let e = Election::from_utilities(vec![
        vec![20, 4, 1],
        vec![20, 4, 1],
        vec![4, 20, 1],
        vec![4, 20, 1],
    ])
    .expect("fixed profile is valid");
    let p = PrincipledProfile::from_rankings(3, &[vec![2, 0, 1]]).expect("fixed ranking is valid");
    (e, p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::election::Ballot;
    use crate::game::{is_pne, DEFAULT_BUDGET};

    fn v(c: usize) -> Ballot {
        Ballot::Vote(CandidateId(c))
    }

    fn ask(p: Problem, s: Setting, r: TieRule, t: Option<usize>, e: &Election) -> Decision {
        let q = DecisionQuery::new(p, s, r, t.map(CandidateId)).unwrap();
        decide(&q, e, DEFAULT_BUDGET).unwrap()
    }

    #[test]
    fn query_validation() {
        assert_eq!(
            DecisionQuery::new(Problem::TieNe, Setting::Lazy, TieRule::Lex, None),
            Err(DecisionError::MissingTarget { problem: "tie-ne" })
        );
        assert_eq!(
            DecisionQuery::new(Problem::ExistNe, Setting::Lazy, TieRule::Lex, Some(CandidateId(0))),
            Err(DecisionError::UnexpectedTarget)
        );
    }

    #[test]
    fn decision_examples() {
        let e = gen_comparison_example();
        let d = ask(Problem::SingleNe, Setting::Lazy, TieRule::Lex, Some(1), &e);
        assert!(d.answer);
        assert_eq!(d.method, Method::Poly);

        let d = ask(Problem::ExistNe, Setting::Lazy, TieRule::RandCand, None, &e);
        assert!(!d.answer);

        let unanimous = Election::from_rankings(3, &[vec![1, 0, 2], vec![1, 2, 0]]).unwrap();
        let d = ask(Problem::SingleNe, Setting::Lazy, TieRule::RandCand, Some(1), &unanimous);
        assert!(d.answer);
        assert_eq!(d.witness, Some(BallotVector(vec![v(1), Ballot::Abstain])));
    }

    #[test]
    fn budget_exhaustion_is_unknown() {
        let e = gen_comparison_example();
        let q = DecisionQuery::new(Problem::ExistNe, Setting::Lazy, TieRule::RandCand, None).unwrap();
        assert!(matches!(decide(&q, &e, 4), Err(DecisionError::Unknown(_))));
    }

    #[test]
    fn poa_examples() {
        let g = GameSpec::new(gen_lazy_poa(7).unwrap(), Setting::Lazy, TieRule::Lex);
        assert_eq!(poa_additive(&g, DEFAULT_BUDGET).unwrap().gap, 5);
        let g = GameSpec::new(gen_lazy_poa(3).unwrap(), Setting::Lazy, TieRule::Lex);
        assert_eq!(poa_additive(&g, DEFAULT_BUDGET).unwrap().gap, 1);
        let g = GameSpec::new(gen_truth_poa(9).unwrap(), Setting::TruthBiased, TieRule::Lex);
        assert_eq!(poa_additive(&g, DEFAULT_BUDGET).unwrap().gap, 6);
        let g = GameSpec::new(gen_truth_poa(6).unwrap(), Setting::TruthBiased, TieRule::Lex);
        assert_eq!(poa_additive(&g, DEFAULT_BUDGET).unwrap().gap, 4);

        let single = Election::from_utilities(vec![vec![2, 5, 1]]).unwrap();
        for setting in Setting::ALL {
            for rule in TieRule::ALL {
                let r = poa_additive(&GameSpec::new(single.clone(), setting, rule), DEFAULT_BUDGET).unwrap();
                assert!(!r.defined || r.gap == 0);
            }
        }
        let g = GameSpec::new(gen_comparison_example(), Setting::Lazy, TieRule::RandCand);
        assert!(!poa_additive(&g, DEFAULT_BUDGET).unwrap().defined);
    }

    #[test]
    fn generator_figures() {
        let e = gen_lazy_poa(4).unwrap();
        let a = scores(&e, &e.truthful());
        assert_eq!(a.lex_winner(), CandidateId(2));
        assert_eq!(a.max(), 3);
        let g = GameSpec::new(e, Setting::Lazy, TieRule::Lex);
        let b = BallotVector(vec![v(1), Ballot::Abstain, Ballot::Abstain, Ballot::Abstain]);
        assert!(is_pne(&g, &b).is_equilibrium());

        let e = gen_truth_poa(9).unwrap();
        let mut b = e.truthful();
        for i in 3..7 {
            b.0[i] = v(1);
        }
        assert_eq!(scores(&e, &b).scores(), &[3, 4, 2]);
        let g = GameSpec::new(e, Setting::TruthBiased, TieRule::Lex);
        assert!(is_pne(&g, &b).is_equilibrium());

        assert_eq!(gen_lazy_poa(2), Err(GeneratorError::TooFewVoters));
        assert_eq!(gen_truth_poa(7), Err(GeneratorError::NotMultipleOfThree));
    }
}
