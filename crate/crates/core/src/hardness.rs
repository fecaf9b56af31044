//! Maximum k-Subset Intersection, balanced complete bipartite subgraphs, and
//! the reduction from MSI to single-winner equilibria of truth-biased voters
//! with lexicographic tie-breaking.

use std::collections::BTreeSet;

use crate::characterizations::combinations;
use crate::election::{Ballot, BallotVector, CandidateId, Election, UtilityVector};
use crate::error::{GameError, HardnessError};
use crate::game::{is_pne, GameSpec, Setting};
use crate::election::{scores, TieRule};

/// Do `k` of the sets share at least `q` elements?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsiInstance {
    num_elements: usize,
    sets: Vec<BTreeSet<usize>>,
    k: usize,
    q: usize,
}

impl MsiInstance {
    /// Elements are `0..num_elements`.
    pub fn new(
        num_elements: usize,
        sets: Vec<BTreeSet<usize>>,
        k: usize,
        q: usize,
    ) -> Result<Self, HardnessError> {
        if num_elements == 0 {
            return Err(HardnessError::NoElements);
        }
        for (i, set) in sets.iter().enumerate() {
            if let Some(&x) = set.iter().find(|&&x| x >= num_elements) {
                return Err(HardnessError::ElementOutOfRange { set: i, element: x, n: num_elements });
            }
        }
        if k == 0 || k > sets.len() {
            return Err(HardnessError::BadK { k, m: sets.len() });
        }
        if q > num_elements {
            return Err(HardnessError::BadQ { q, n: num_elements });
        }
        Ok(MsiInstance { num_elements, sets, k, q })
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn num_sets(&self) -> usize {
        self.sets.len()
    }

    pub fn sets(&self) -> &[BTreeSet<usize>] {
        &self.sets
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn intersection(&self, picks: &[usize]) -> BTreeSet<usize> {
        let mut it = picks.iter().map(|&i| &self.sets[i]);
        let first = it.next().cloned().unwrap_or_default();
        it.fold(first, |acc, s| acc.intersection(s).copied().collect())
    }

    /// Whether the reduction's preconditions hold: more sets than
    /// `n + k + q`, and every element missing from some set.
    pub fn is_padded(&self) -> bool {
        let m = self.sets.len();
        m > self.num_elements + self.k + self.q
            && (0..self.num_elements).all(|x| self.sets.iter().any(|s| !s.contains(&x)))
    }

    /// Appends empty sets until [`is_padded`](Self::is_padded) holds. Empty
    /// sets never help a `k`-subset reach `q >= 1`, so the answer is kept.
    pub fn padded(&self) -> MsiInstance {
        let mut out = self.clone();
        while !out.is_padded() {
            out.sets.push(BTreeSet::new());
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MsiAnswer {
    pub answer: bool,
    /// Indices of `k` sets with a large enough intersection.
    pub certificate: Option<Vec<usize>>,
}

fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Exhaustive scan over all `k`-subsets of sets.
pub fn msi_brute(i: &MsiInstance, budget: u64) -> Result<MsiAnswer, GameError> {
    let required = binomial(i.num_sets(), i.k);
    if required > budget as u128 {
        return Err(GameError::BudgetExceeded { required, budget });
    }
    let indices: Vec<usize> = (0..i.num_sets()).collect();
    let certificate = combinations(&indices, i.k)
        .into_iter()
        .find(|pick| i.intersection(pick).len() >= i.q);
    Ok(MsiAnswer { answer: certificate.is_some(), certificate })
}

/// Does a bipartite graph contain `K_{k,k}`?
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BcbsInstance {
    left: usize,
    right: usize,
    edges: BTreeSet<(usize, usize)>,
    k: usize,
}

impl BcbsInstance {
    pub fn new(
        left: usize,
        right: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        k: usize,
    ) -> Result<Self, HardnessError> {
        let edges: BTreeSet<(usize, usize)> = edges.into_iter().collect();
        if let Some(&(l, r)) = edges.iter().find(|&&(l, r)| l >= left || r >= right) {
            return Err(HardnessError::EdgeOutOfRange { left: l, right: r });
        }
        if k == 0 || k > left.min(right) {
            return Err(HardnessError::BadBipartiteK { k });
        }
        Ok(BcbsInstance { left, right, edges, k })
    }

    pub fn left(&self) -> usize {
        self.left
    }

    pub fn right(&self) -> usize {
        self.right
    }

    pub fn edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn k(&self) -> usize {
        self.k
    }
}

pub fn bcbs_brute(g: &BcbsInstance) -> bool {
    let lefts: Vec<usize> = (0..g.left).collect();
    let rights: Vec<usize> = (0..g.right).collect();
    let right_picks = combinations(&rights, g.k);
    combinations(&lefts, g.k).iter().any(|l| {
        right_picks
            .iter()
            .any(|r| l.iter().all(|&x| r.iter().all(|&y| g.edges.contains(&(x, y)))))
    })
}

/// Elements are the left vertices; each right vertex contributes its
/// neighborhood; `k' = q = k`.
pub fn bcbs_to_msi(g: &BcbsInstance) -> MsiInstance {
    let sets = (0..g.right)
        .map(|r| g.edges.iter().filter(|e| e.1 == r).map(|e| e.0).collect())
        .collect();
    MsiInstance::new(g.left, sets, g.k, g.k).expect("k fits both sides")
}

/// Voter block of the reduced election.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Block {
    /// One voter per set: `w3 > E \ A > w2 > A > w1`.
    Sets = 1,
    /// `w1 > w2 > w3 > E`.
    W1 = 2,
    /// `w2 > w1 > w3 > E`.
    W2 = 3,
    /// Per element `e`: `e > w3 > w2 > w1 > E \ {e}`.
    Elements = 4,
    /// `w3 > w2 > E > w1`.
    Last = 5,
}

/// The election built from a (padded) MSI instance.
///
/// Candidates are the elements `e_1..e_n` followed by `w3`, `w1`, `w2`, so
/// index order realizes the tie-break `e_1 > ... > e_n > w3 > w1 > w2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReducedElection {
    pub election: Election,
    pub target: CandidateId,
    pub blocks: Vec<Block>,
    pub s: usize,
    /// Factor turning the construction's rational utilities into integers.
    pub scale: u64,
    pub instance: MsiInstance,
}

impl ReducedElection {
    pub fn w1(&self) -> CandidateId {
        CandidateId(self.instance.num_elements + 1)
    }

    pub fn w2(&self) -> CandidateId {
        CandidateId(self.instance.num_elements + 2)
    }

    pub fn w3(&self) -> CandidateId {
        CandidateId(self.instance.num_elements)
    }

    pub fn voters_in(&self, block: Block) -> Vec<usize> {
        (0..self.blocks.len()).filter(|&i| self.blocks[i] == block).collect()
    }

    pub fn set_voter(&self, set: usize) -> usize {
        set
    }

    /// Block-4 voters ranking element `e` first.
    pub fn element_supporters(&self, e: usize) -> Vec<usize> {
        self.voters_in(Block::Elements)
            .into_iter()
            .filter(|&i| self.election.top(i) == CandidateId(e))
            .collect()
    }

    /// Non-truthful votes every equilibrium electing `w2` needs.
    pub fn deviators_needed(&self) -> usize {
        let i = &self.instance;
        i.k + i.num_elements - i.q + 1
    }

    /// Display names: `e1..en`, `w3`, `w1`, `w2`.
    pub fn candidate_names(&self) -> Vec<String> {
        let mut names: Vec<String> = (1..=self.instance.num_elements).map(|j| format!("e{j}")).collect();
        names.extend(["w3", "w1", "w2"].map(String::from));
        names
    }
}

/// Utilities from a ranking, decreasing by 2 per position from `top`.
fn stepped(order: &[usize], m: usize, top: u64) -> UtilityVector {
    let mut u = vec![0; m];
    for (rank, &c) in order.iter().enumerate() {
        u[c] = top - 2 * rank as u64;
    }
    UtilityVector::new(u).expect("stepped utilities are distinct and positive")
}

/// Builds the reduced election, padding the instance first.
pub fn msi_to_election(i: &MsiInstance) -> Result<ReducedElection, HardnessError> {
    let inst = i.padded();
    let n = inst.num_elements;
    let m = inst.sets.len();
    let (k, q) = (inst.k, inst.q);
    let s = m - k + 3;
    let block3 = s as i64 - k as i64 - (n - q) as i64 - 1;
    if block3 < 0 {
        return Err(HardnessError::NegativeBlock { size: block3 });
    }
    let scale = 12 * (n + m) as u64;
    let total = n + 3;
    let (w3, w1, w2) = (n, n + 1, n + 2);
    let elements: Vec<usize> = (0..n).collect();
    let mut voters = Vec::new();
    let mut blocks = Vec::new();

    for set in &inst.sets {
        let mut u = vec![0; total];
        u[w3] = scale;
        u[w2] = scale / 2;
        u[w1] = scale / 4;
        for (rank, &e) in elements.iter().filter(|e| !set.contains(e)).enumerate() {
            u[e] = scale - 2 * (rank as u64 + 1);
        }
        for (rank, &e) in elements.iter().filter(|e| set.contains(e)).enumerate() {
            u[e] = scale / 2 - 2 * (rank as u64 + 1);
        }
        voters.push(UtilityVector::new(u).expect("block-1 utilities are distinct"));
        blocks.push(Block::Sets);
    }
    let push = |order: Vec<usize>, count: usize, block: Block, voters: &mut Vec<UtilityVector>, blocks: &mut Vec<Block>| {
        for _ in 0..count {
            voters.push(stepped(&order, total, scale));
            blocks.push(block);
        }
    };
    let with_elements = |head: &[usize]| {
        let mut o = head.to_vec();
        o.extend(&elements);
        o
    };
    push(with_elements(&[w1, w2, w3]), s - 1, Block::W1, &mut voters, &mut blocks);
    push(with_elements(&[w2, w1, w3]), block3 as usize, Block::W2, &mut voters, &mut blocks);
    for &e in &elements {
        let mut order = vec![e, w3, w2, w1];
        order.extend(elements.iter().filter(|&&x| x != e));
        push(order, s - 2, Block::Elements, &mut voters, &mut blocks);
    }
    let mut last = vec![w3, w2];
    last.extend(&elements);
    last.push(w1);
    push(last, 1, Block::Last, &mut voters, &mut blocks);

    let election = Election::new(total, voters).expect("reduced election is well formed");
    Ok(ReducedElection {
        election,
        target: CandidateId(w2),
        blocks,
        s,
        scale,
        instance: inst,
    })
}

/// Turns an MSI certificate into an equilibrium electing `w2`: the chosen
/// sets' voters, the last-block voter, and element supporters move to `w2`.
pub fn certificate_to_ballots(r: &ReducedElection, cert: &[usize]) -> Result<BallotVector, HardnessError> {
    let inst = &r.instance;
    let distinct: BTreeSet<usize> = cert.iter().copied().collect();
    let invalid = HardnessError::InvalidCertificate { k: inst.k, q: inst.q };
    if distinct.len() != inst.k || cert.iter().any(|&x| x >= inst.num_sets()) {
        return Err(invalid);
    }
    let common = inst.intersection(cert);
    if common.len() < inst.q {
        return Err(invalid);
    }
    let mut movers: Vec<usize> = cert.iter().map(|&set| r.set_voter(set)).collect();
    movers.extend(r.voters_in(Block::Last));
    let supporters: Vec<Vec<usize>> = (0..inst.num_elements).map(|e| r.element_supporters(e)).collect();
    // Elements outside the intersection first, then the rest, one voter per
    // element per round.
    let order: Vec<usize> = (0..inst.num_elements)
        .filter(|e| !common.contains(e))
        .chain((0..inst.num_elements).filter(|e| common.contains(e)))
        .collect();
    let need = r.deviators_needed();
    let mut round = 0;
    while movers.len() < need {
        for &e in &order {
            if movers.len() == need {
                break;
            }
            if let Some(&v) = supporters[e].get(round) {
                movers.push(v);
            }
        }
        round += 1;
    }
    let mut b = r.election.truthful();
    for v in movers {
        b.0[v] = Ballot::Vote(r.target);
    }
    Ok(b)
}

/// Searches the reduced election for an equilibrium electing `w2` among
/// vectors where exactly `k + n - q + 1` voters from blocks 1, 4 and 5 move
/// to `w2` and everyone else is truthful; each candidate vector is checked
/// with the generic equilibrium test. Voters with identical utilities are
/// interchangeable, so only how many of each kind move is enumerated.
pub fn single_ne_specialized(r: &ReducedElection, budget: u64) -> Result<bool, GameError> {
    let e = &r.election;
    let mut classes: Vec<Vec<usize>> = Vec::new();
    for i in (0..e.num_voters()).filter(|&i| matches!(r.blocks[i], Block::Sets | Block::Elements | Block::Last)) {
        match classes.iter_mut().find(|c| e.utility(c[0]) == e.utility(i)) {
            Some(c) => c.push(i),
            None => classes.push(vec![i]),
        }
    }
    let need = r.deviators_needed();
    let required = count_compositions(&classes, need);
    if required > budget as u128 {
        return Err(GameError::BudgetExceeded { required, budget });
    }
    let g = GameSpec::new(e.clone(), Setting::TruthBiased, TieRule::Lex);
    let mut counts = vec![0; classes.len()];
    Ok(search(&classes, 0, need, &mut counts, &mut |counts| {
        let mut b = e.truthful();
        for (class, &c) in classes.iter().zip(counts) {
            for &v in &class[..c] {
                b.0[v] = Ballot::Vote(r.target);
            }
        }
        scores(e, &b).winners() == [r.target] && is_pne(&g, &b).is_equilibrium()
    }))
}

fn count_compositions(classes: &[Vec<usize>], total: usize) -> u128 {
    // ways[t] = number of count vectors over the classes seen so far summing to t
    let mut ways = vec![0u128; total + 1];
    ways[0] = 1;
    for class in classes {
        let mut next = vec![0u128; total + 1];
        for (t, &w) in ways.iter().enumerate() {
            for c in 0..=class.len().min(total - t) {
                next[t + c] = next[t + c].saturating_add(w);
            }
        }
        ways = next;
    }
    ways[total]
}

fn search(
    classes: &[Vec<usize>],
    at: usize,
    left: usize,
    counts: &mut Vec<usize>,
    test: &mut impl FnMut(&[usize]) -> bool,
) -> bool {
    if at == classes.len() {
        return left == 0 && test(counts);
    }
    let room: usize = classes[at + 1..].iter().map(Vec::len).sum();
    for c in 0..=classes[at].len().min(left) {
        if left - c > room {
            continue;
        }
        counts[at] = c;
        if search(classes, at + 1, left - c, counts, test) {
            return true;
        }
    }
    counts[at] = 0;
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::DEFAULT_BUDGET;

    fn set(xs: &[usize]) -> BTreeSet<usize> {
        xs.iter().copied().collect()
    }

    fn triangle(k: usize, q: usize) -> MsiInstance {
        MsiInstance::new(3, vec![set(&[0, 1]), set(&[0, 2]), set(&[1, 2])], k, q).unwrap()
    }

    #[test]
    fn msi_brute_examples() {
        let yes = msi_brute(&triangle(2, 1), DEFAULT_BUDGET).unwrap();
        assert!(yes.answer);
        assert_eq!(yes.certificate, Some(vec![0, 1]));
        assert!(!msi_brute(&triangle(2, 2), DEFAULT_BUDGET).unwrap().answer);
        assert!(msi_brute(&triangle(3, 0), DEFAULT_BUDGET).unwrap().answer);
    }

    #[test]
    fn instance_validation() {
        assert!(matches!(
            MsiInstance::new(2, vec![set(&[3])], 1, 1),
            Err(HardnessError::ElementOutOfRange { .. })
        ));
        assert!(matches!(MsiInstance::new(2, vec![set(&[0])], 2, 1), Err(HardnessError::BadK { .. })));
        assert!(matches!(MsiInstance::new(2, vec![set(&[0])], 1, 3), Err(HardnessError::BadQ { .. })));
        assert!(matches!(
            BcbsInstance::new(2, 2, [(0, 2)], 1),
            Err(HardnessError::EdgeOutOfRange { .. })
        ));
    }

    #[test]
    fn bcbs_examples() {
        let k22 = BcbsInstance::new(2, 2, [(0, 0), (0, 1), (1, 0), (1, 1)], 2).unwrap();
        let msi = bcbs_to_msi(&k22);
        assert_eq!(msi.sets(), &[set(&[0, 1]), set(&[0, 1])]);
        assert!(bcbs_brute(&k22));
        assert!(msi_brute(&msi, DEFAULT_BUDGET).unwrap().answer);

        let empty = BcbsInstance::new(2, 2, [], 1).unwrap();
        assert!(!bcbs_brute(&empty));
        assert!(!msi_brute(&bcbs_to_msi(&empty), DEFAULT_BUDGET).unwrap().answer);

        let matching = BcbsInstance::new(2, 2, [(0, 0), (1, 1)], 2).unwrap();
        assert!(!bcbs_brute(&matching));
        assert!(!msi_brute(&bcbs_to_msi(&matching), DEFAULT_BUDGET).unwrap().answer);
    }

    #[test]
    fn reduced_election_shape() {
        let inst = MsiInstance::new(3, vec![set(&[0, 1, 2]), set(&[0, 1]), set(&[1, 2])], 2, 2).unwrap();
        let r = msi_to_election(&inst).unwrap();
        assert!(r.instance.is_padded());
        let m = r.instance.num_sets();
        assert_eq!(m, 8);
        assert_eq!(r.s, 9);
        assert_eq!(r.voters_in(Block::Sets).len(), 8);
        assert_eq!(r.voters_in(Block::W1).len(), 8);
        assert_eq!(r.voters_in(Block::W2).len(), 5);
        assert_eq!(r.voters_in(Block::Elements).len(), 21);
        assert_eq!(r.voters_in(Block::Last).len(), 1);

        let a = scores(&r.election, &r.election.truthful());
        assert_eq!(a.score(r.w1()), r.s - 1);
        assert_eq!(a.score(r.w3()), m + 1);
        assert_eq!(a.score(r.w3()), r.s + inst.k() - 2);
        assert_eq!(a.score(r.w2()), 5);
        for e in 0..3 {
            assert_eq!(a.score(CandidateId(e)), r.s - 2);
        }
        assert_eq!(r.scale, 12 * 11);
    }

    #[test]
    fn negative_block_is_rejected() {
        let inst = MsiInstance::new(1, vec![BTreeSet::new(); 7], 7, 1).unwrap();
        assert!(matches!(msi_to_election(&inst), Err(HardnessError::NegativeBlock { .. })));
    }

    #[test]
    fn certificates_become_equilibria() {
        let inst = MsiInstance::new(3, vec![set(&[0, 1]), set(&[0, 2]), set(&[1, 2])], 1, 2).unwrap();
        let r = msi_to_election(&inst).unwrap();
        let b = certificate_to_ballots(&r, &[2]).unwrap();
        let moved = (0..b.len()).filter(|&i| b.get(i) != Ballot::Vote(r.election.top(i))).count();
        assert_eq!(moved, r.deviators_needed());
        let board = scores(&r.election, &b);
        assert_eq!(board.winners(), vec![r.w2()]);
        assert_eq!(board.score(r.w2()), r.s);
        let g = GameSpec::new(r.election.clone(), Setting::TruthBiased, TieRule::Lex);
        assert!(is_pne(&g, &b).is_equilibrium());
        assert!(single_ne_specialized(&r, DEFAULT_BUDGET).unwrap());
        assert!(certificate_to_ballots(&r, &[0, 1]).is_err());
    }

    #[test]
    fn composition_count() {
        let classes = vec![vec![0, 1], vec![2], vec![3, 4, 5]];
        assert_eq!(count_compositions(&classes, 2), 5);
    }
}
