#![allow(dead_code)]

use plurality_core::{Election, PrincipledProfile};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Distinct utilities drawn from 1..=100.
pub fn utilities(rng: &mut ChaCha8Rng, m: usize) -> Vec<u64> {
    let mut pool: Vec<u64> = (1..=100).collect();
    pool.shuffle(rng);
    pool.truncate(m);
    pool
}

pub fn election(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Election {
    Election::from_utilities((0..n).map(|_| utilities(rng, m)).collect()).unwrap()
}

/// Random profile with sizes drawn from the given ranges.
pub fn random_election(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Election {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    election(rng, n, m)
}

/// Profiles where voters share a few utility templates, so that ties and
/// coordinated equilibria show up often.
pub fn clustered_election(rng: &mut ChaCha8Rng, max_n: usize, max_m: usize) -> Election {
    let n = rng.gen_range(1..=max_n);
    let m = rng.gen_range(1..=max_m);
    let templates: Vec<Vec<u64>> = (0..rng.gen_range(1..=3)).map(|_| utilities(rng, m)).collect();
    Election::from_utilities((0..n).map(|_| templates.choose(rng).unwrap().clone()).collect()).unwrap()
}

pub fn principled(rng: &mut ChaCha8Rng, m: usize, s: usize) -> PrincipledProfile {
    let rankings: Vec<Vec<usize>> = (0..s)
        .map(|_| {
            let mut r: Vec<usize> = (0..m).collect();
            r.shuffle(rng);
            r
        })
        .collect();
    PrincipledProfile::from_rankings(m, &rankings).unwrap()
}
