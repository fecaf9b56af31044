//! End-to-end checks, one line per criterion.

mod common;

use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use num_traits::{One, Zero};
use plurality_core::characterizations::{
    characterized_pne, lazy_lex_solve, lazy_rand_solve, threshold_set, truthful_pne_truth_lex,
};
use plurality_core::decision::{
    gen_comparison_example, gen_lazy_poa, gen_rc_vs_rv, gen_shared_top_example, gen_truth_poa,
    poa_additive,
};
use plurality_core::game::Deviation;
use plurality_core::hardness::{
    bcbs_brute, bcbs_to_msi, certificate_to_ballots, msi_brute, msi_to_election,
    single_ne_specialized, BcbsInstance, MsiInstance,
};
use plurality_core::principled::{
    lazy_lex_principled_equilibria, lazy_rc_principled_equilibria, truth_lex_principled_truthful,
};
use plurality_core::{
    enumerate_pne, is_pne, lottery, scores, Ballot, BallotVector, CandidateId, Election, GameSpec,
    PrincipledProfile, Setting, TieRule, DEFAULT_BUDGET,
};
use rand::Rng;

fn v(c: usize) -> Ballot {
    Ballot::Vote(CandidateId(c))
}

const A: Ballot = Ballot::Abstain;

fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(n.into(), d.into())
}

fn comparison_example() {
    let e = gen_comparison_example();
    let lazy = enumerate_pne(&GameSpec::new(e.clone(), Setting::Lazy, TieRule::Lex), DEFAULT_BUDGET).unwrap();
    assert_eq!(lazy, vec![BallotVector(vec![v(1), A, A, A])]);
    assert_eq!(scores(&e, &lazy[0]).lex_winner(), CandidateId(1));
    let truth =
        enumerate_pne(&GameSpec::new(e.clone(), Setting::TruthBiased, TieRule::Lex), DEFAULT_BUDGET).unwrap();
    assert_eq!(truth, vec![BallotVector(vec![v(1), v(2), v(2), v(2)])]);
    assert_eq!(scores(&e, &truth[0]).lex_winner(), CandidateId(2));
}

fn shared_top_correction() {
    let e = gen_shared_top_example();
    let g = GameSpec::new(e.clone(), Setting::Lazy, TieRule::RandCand);
    let verdict = is_pne(&g, &BallotVector(vec![v(1), v(2)]));
    assert_eq!(verdict.witness, Some(Deviation { voter: 0, ballot: v(0) }));
    let s = lazy_rand_solve(&e, TieRule::RandCand, DEFAULT_BUDGET).unwrap();
    assert_eq!(s.unanimity, Some(CandidateId(0)));
    assert!(s.exists());
}

/// Structural facts every equilibrium must satisfy.
fn check_structure(e: &Election, setting: Setting, rule: TieRule, b: &BallotVector) {
    let board = scores(e, b);
    let w = board.winners();
    match setting {
        Setting::Lazy => {
            for ballot in b.iter() {
                if let Ballot::Vote(c) = ballot {
                    assert!(w.contains(&c), "lazy vote outside W in {b}");
                }
            }
            if w.len() == 1 && !b.is_trivial() {
                assert_eq!(b.num_active(), 1, "singleton W with several voters in {b}");
            }
        }
        Setting::TruthBiased => {
            for (i, ballot) in b.iter().enumerate() {
                let c = ballot.candidate().expect("truth-biased voters never abstain");
                assert!(c == e.top(i) || w.contains(&c), "ballot {i} of {b} neither truthful nor winning");
            }
            if rule == TieRule::Lex && *b != e.truthful() {
                let t = threshold_set(e, b);
                assert!(!t.is_empty(), "no threshold candidate in {b}");
                let a = scores(e, &e.truthful());
                for &c in &t.candidates {
                    assert_eq!(board.score(c), a.score(c), "threshold {c:?} lost votes in {b}");
                }
            }
        }
    }
    let p = lottery(e, b, rule, None);
    let probs = p.probabilities();
    assert_eq!(probs.iter().fold(BigRational::zero(), |s, x| s + x), BigRational::one());
    assert!(probs.iter().all(|x| *x >= BigRational::zero() && *x <= BigRational::one()));
    let support = p.support();
    assert!(!support.is_empty());
    assert!(support.iter().all(|c| w.contains(c)), "lottery support outside W in {b}");
    if rule == TieRule::Lex {
        assert_eq!(support, vec![board.lex_winner()]);
    }
}

/// Runs the oracle comparison and returns how many equilibria were checked
/// structurally.
fn oracle_suite(structure: bool) -> usize {
    let mut rng = common::rng(2024);
    let mut checked = 0;
    for round in 0..500 {
        let n = rng.gen_range(1..=5);
        let m = rng.gen_range(1..=4);
        let e = common::election(&mut rng, n, m);
        for setting in Setting::ALL {
            for rule in TieRule::ALL {
                let oracle = enumerate_pne(&GameSpec::new(e.clone(), setting, rule), DEFAULT_BUDGET).unwrap();
                if structure {
                    for b in &oracle {
                        check_structure(&e, setting, rule, b);
                        checked += 1;
                    }
                } else {
                    let ours = characterized_pne(&e, setting, rule, DEFAULT_BUDGET).unwrap();
                    assert_eq!(ours, oracle, "round {round}, {setting}/{rule}, profile {:?}", e.voters());
                }
            }
        }
    }
    checked
}

fn poa_closed_forms() {
    for n in 3..=10 {
        let g = GameSpec::new(gen_lazy_poa(n).unwrap(), Setting::Lazy, TieRule::Lex);
        assert_eq!(poa_additive(&g, DEFAULT_BUDGET).unwrap().gap, n - 2, "lazy n={n}");
    }
    for n in [6, 9, 12] {
        let g = GameSpec::new(gen_truth_poa(n).unwrap(), Setting::TruthBiased, TieRule::Lex);
        assert_eq!(poa_additive(&g, DEFAULT_BUDGET).unwrap().gap, 2 * n / 3, "truth n={n}");
    }
}

fn tie_breaking_divergence() {
    let (e, p) = gen_rc_vs_rv();
    let b = BallotVector(vec![v(0), v(0), v(1), v(1)]);
    let expected = [
        (TieRule::RandCand, [ratio(1, 2), ratio(1, 2), ratio(0, 1)]),
        (TieRule::RandVoter, [ratio(3, 5), ratio(2, 5), ratio(0, 1)]),
    ];
    for (rule, probs) in expected {
        let g = GameSpec::new(e.clone(), Setting::Lazy, rule).with_principled(p.clone()).unwrap();
        assert!(is_pne(&g, &b).is_equilibrium(), "{rule}");
        assert_eq!(lottery(&e, &b, rule, Some(&p)).probabilities(), probs.to_vec(), "{rule}");
    }
}

/// Tiny MSI instances whose padded form has at most six sets.
fn tiny_instances() -> Vec<MsiInstance> {
    let mut rng = common::rng(606);
    let (mut yes, mut no) = (Vec::new(), Vec::new());
    while yes.len() < 12 || no.len() < 12 {
        let n = rng.gen_range(1..=3);
        let sets_len = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=sets_len);
        let q = rng.gen_range(1..=n);
        let sets = (0..sets_len)
            .map(|_| (0..n).filter(|_| rng.gen_bool(0.5)).collect::<BTreeSet<_>>())
            .collect();
        let inst = MsiInstance::new(n, sets, k, q).unwrap();
        if inst.padded().num_sets() > 6 || msi_to_election(&inst).is_err() {
            continue;
        }
        let bucket = if msi_brute(&inst, DEFAULT_BUDGET).unwrap().answer { &mut yes } else { &mut no };
        if bucket.len() < 12 && !bucket.contains(&inst) {
            bucket.push(inst);
        }
    }
    yes.into_iter().chain(no).collect()
}

fn reduction_chain() {
    let instances = tiny_instances();
    assert!(instances.len() >= 20);
    for inst in &instances {
        let brute = msi_brute(inst, DEFAULT_BUDGET).unwrap();
        let r = msi_to_election(inst).unwrap();
        assert_eq!(single_ne_specialized(&r, DEFAULT_BUDGET).unwrap(), brute.answer, "{inst:?}");
        if let Some(cert) = brute.certificate {
            let b = certificate_to_ballots(&r, &cert).unwrap();
            let g = GameSpec::new(r.election.clone(), Setting::TruthBiased, TieRule::Lex);
            assert!(is_pne(&g, &b).is_equilibrium(), "{inst:?}");
            let board = scores(&r.election, &b);
            assert_eq!(board.winners(), vec![r.target]);
            assert_eq!(board.score(r.target), r.s);
        }
    }
    for left in 1..=4 {
        for right in 1..=4 {
            let slots: Vec<(usize, usize)> = (0..left).flat_map(|l| (0..right).map(move |r| (l, r))).collect();
            for mask in 0u32..1 << slots.len() {
                let edges: Vec<_> = (0..slots.len()).filter(|i| mask >> i & 1 == 1).map(|i| slots[i]).collect();
                for k in 1..=2.min(left).min(right) {
                    let g = BcbsInstance::new(left, right, edges.iter().copied(), k).unwrap();
                    assert_eq!(bcbs_brute(&g), msi_brute(&bcbs_to_msi(&g), DEFAULT_BUDGET).unwrap().answer);
                }
            }
        }
    }
}

fn principled_reduction() {
    let mut rng = common::rng(808);
    for _ in 0..200 {
        let e = common::random_election(&mut rng, 5, 4);
        let p = PrincipledProfile::empty(e.num_candidates());
        assert_eq!(lazy_lex_principled_equilibria(&e, &p), lazy_lex_solve(&e).equilibria);
        assert_eq!(
            lazy_rc_principled_equilibria(&e, &p, DEFAULT_BUDGET).unwrap(),
            lazy_rand_solve(&e, TieRule::RandCand, DEFAULT_BUDGET).unwrap().equilibria
        );
        assert_eq!(truth_lex_principled_truthful(&e, &p), truthful_pne_truth_lex(&e));
    }
    for round in 0..200 {
        let e = common::random_election(&mut rng, 4, 4);
        let s = rng.gen_range(1..=2);
        let p = common::principled(&mut rng, e.num_candidates(), s);
        let game = |setting, rule| GameSpec::new(e.clone(), setting, rule).with_principled(p.clone()).unwrap();
        let ctx = format!("round {round}: {:?} / {:?}", e.voters(), p.rankings());
        let oracle = enumerate_pne(&game(Setting::Lazy, TieRule::Lex), DEFAULT_BUDGET).unwrap();
        assert_eq!(lazy_lex_principled_equilibria(&e, &p), oracle, "{ctx}");
        let oracle = enumerate_pne(&game(Setting::Lazy, TieRule::RandCand), DEFAULT_BUDGET).unwrap();
        assert_eq!(lazy_rc_principled_equilibria(&e, &p, DEFAULT_BUDGET).unwrap(), oracle, "{ctx}");
        let g = game(Setting::TruthBiased, TieRule::Lex);
        assert_eq!(truth_lex_principled_truthful(&e, &p), is_pne(&g, &e.truthful()).is_equilibrium(), "{ctx}");
    }
}

fn run(id: usize, name: &str, limit: Duration, f: impl FnOnce()) -> bool {
    let start = Instant::now();
    let ok = catch_unwind(AssertUnwindSafe(f)).is_ok();
    let took = start.elapsed();
    let status = if ok { "PASS" } else { "FAIL" };
    let note = if took > limit { format!(" (slower than {limit:?})") } else { String::new() };
    println!("criterion {id}: {status} {name} [{:.2}s]{note}", took.as_secs_f64());
    ok
}

fn main() -> ExitCode {
    let results = [
        run(1, "comparison example equilibria", Duration::from_secs(1), comparison_example),
        run(2, "shared-top profile under random-candidate", Duration::from_secs(1), shared_top_correction),
        run(3, "characterizations equal the oracle", Duration::from_secs(300), || {
            oracle_suite(false);
        }),
        run(4, "price of anarchy closed forms", Duration::from_secs(30), poa_closed_forms),
        run(5, "random-candidate vs random-voter lotteries", Duration::from_secs(1), tie_breaking_divergence),
        run(6, "MSI reduction chain", Duration::from_secs(600), reduction_chain),
        run(7, "structural invariants of every equilibrium", Duration::from_secs(300), || {
            assert!(oracle_suite(true) > 0);
        }),
        run(8, "principled voters reduce and match the oracle", Duration::from_secs(300), principled_reduction),
    ];
    if results.iter().all(|&ok| ok) {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
