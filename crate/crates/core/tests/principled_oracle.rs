mod common;

use plurality_core::characterizations::{
    check_rand_unanimity, find_tie_sets, lazy_lex_solve, truthful_pne_truth_lex,
};
use plurality_core::principled::{
    lazy_lex_principled_equilibria, lazy_lex_principled_solve, lazy_rc_principled_equilibria,
    lazy_rc_principled_single, lazy_rc_principled_tie, truth_lex_principled_truthful,
};
use plurality_core::{
    enumerate_pne, is_pne, CandidateId, GameSpec, PrincipledProfile, Setting, TieRule,
    DEFAULT_BUDGET,
};
use rand::Rng;

#[test]
fn agrees_with_oracle_for_small_blocks() {
    let mut rng = common::rng(21);
    for round in 0..300 {
        let e = if round % 2 == 0 {
            common::random_election(&mut rng, 4, 4)
        } else {
            common::clustered_election(&mut rng, 4, 4)
        };
        let s = rng.gen_range(1..=2);
        let p = common::principled(&mut rng, e.num_candidates(), s);
        let game = |setting, rule| {
            GameSpec::new(e.clone(), setting, rule).with_principled(p.clone()).unwrap()
        };
        let ctx = format!("round {round}: {:?} / {:?}", e.voters(), p.rankings());

        let oracle = enumerate_pne(&game(Setting::Lazy, TieRule::Lex), DEFAULT_BUDGET).unwrap();
        assert_eq!(lazy_lex_principled_equilibria(&e, &p), oracle, "lex {ctx}");

        let oracle = enumerate_pne(&game(Setting::Lazy, TieRule::RandCand), DEFAULT_BUDGET).unwrap();
        assert_eq!(
            lazy_rc_principled_equilibria(&e, &p, DEFAULT_BUDGET).unwrap(),
            oracle,
            "rc {ctx}"
        );

        let g = game(Setting::TruthBiased, TieRule::Lex);
        assert_eq!(
            truth_lex_principled_truthful(&e, &p),
            is_pne(&g, &e.truthful()).is_equilibrium(),
            "truthful {ctx}"
        );
    }
}

#[test]
fn empty_block_reduces_to_base() {
    let mut rng = common::rng(22);
    for _ in 0..300 {
        let e = common::clustered_election(&mut rng, 5, 4);
        let m = e.num_candidates();
        let p = PrincipledProfile::empty(m);

        let base = lazy_lex_solve(&e);
        let winners: Vec<CandidateId> = lazy_lex_principled_solve(&e, &p)
            .into_iter()
            .filter(|w| w.winnable)
            .map(|w| w.candidate)
            .collect();
        assert_eq!(winners, base.winner.into_iter().collect::<Vec<_>>());
        assert_eq!(lazy_lex_principled_equilibria(&e, &p), base.equilibria);

        for c in e.candidates() {
            let unanimous = if m == 1 { true } else { check_rand_unanimity(&e) == Some(c) };
            assert_eq!(lazy_rc_principled_single(&e, &p, c), unanimous);
        }

        let ties = lazy_rc_principled_tie(&e, &p, DEFAULT_BUDGET).unwrap();
        let base_sets: Vec<_> = find_tie_sets(&e, DEFAULT_BUDGET)
            .unwrap()
            .into_iter()
            .map(|t| (t.candidates, t.groups))
            .collect();
        let ours: Vec<_> = ties.certificates.into_iter().map(|t| (t.candidates, t.groups)).collect();
        assert_eq!(ours, base_sets);

        assert_eq!(truth_lex_principled_truthful(&e, &p), truthful_pne_truth_lex(&e));
    }
}
