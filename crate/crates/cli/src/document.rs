//! File formats: elections, MSI instances and bipartite graphs, all TOML.

use std::collections::{BTreeSet, HashMap};

use plurality_core::hardness::{BcbsInstance, MsiInstance};
use plurality_core::{
    derive_preference, CandidateId, Election, ElectionError, HardnessError, PreferenceOrder,
    PrincipledProfile, UtilityVector,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("{0}")]
    Syntax(#[from] toml::de::Error),
    #[error("candidate names must be unique; {0:?} appears twice")]
    DuplicateName(String),
    #[error("voter {voter}: give exactly one of `utilities` or `ranking`")]
    VoterShape { voter: usize },
    #[error("{context}: unknown candidate {name:?}")]
    UnknownName { context: String, name: String },
    #[error("{context}: {source}")]
    Invalid {
        context: String,
        #[source]
        source: ElectionError,
    },
    #[error(transparent)]
    Election(#[from] ElectionError),
    #[error(transparent)]
    Hardness(#[from] HardnessError),
}

/// One strategic voter: cardinal utilities or a ranking by candidate name.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VoterEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub utilities: Option<Vec<u64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ranking: Option<Vec<String>>,
}

/// An election file. Candidate order is the lexicographic tie-break
/// priority.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ElectionDocument {
    pub candidates: Vec<String>,
    pub voters: Vec<VoterEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub principled: Vec<Vec<String>>,
}

/// A validated election with its candidate names.
#[derive(Debug, Clone)]
pub struct Loaded {
    pub names: Vec<String>,
    pub election: Election,
    pub principled: PrincipledProfile,
}

impl Loaded {
    pub fn name(&self, c: CandidateId) -> &str {
        &self.names[c.0]
    }

    pub fn lookup(&self, name: &str) -> Option<CandidateId> {
        self.names.iter().position(|n| n == name).map(CandidateId)
    }
}

impl ElectionDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("documents always serialize")
    }

    pub fn load(&self) -> Result<Loaded, DocumentError> {
        let m = self.candidates.len();
        if m == 0 {
            return Err(ElectionError::NoCandidates.into());
        }
        let mut index = HashMap::new();
        for (i, name) in self.candidates.iter().enumerate() {
            if index.insert(name.as_str(), i).is_some() {
                return Err(DocumentError::DuplicateName(name.clone()));
            }
        }
        let order = |names: &[String], context: String| -> Result<PreferenceOrder, DocumentError> {
            let ids = names
                .iter()
                .map(|n| {
                    index.get(n.as_str()).map(|&i| CandidateId(i)).ok_or_else(|| DocumentError::UnknownName {
                        context: context.clone(),
                        name: n.clone(),
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            PreferenceOrder::new(ids, m).map_err(|source| DocumentError::Invalid { context, source })
        };
        let mut voters = Vec::with_capacity(self.voters.len());
        for (i, v) in self.voters.iter().enumerate() {
            let context = format!("voter {}", i + 1);
            let u = match (&v.utilities, &v.ranking) {
                (Some(u), None) => {
                    if u.len() != m {
                        return Err(ElectionError::UtilityLength { voter: i, expected: m, found: u.len() }.into());
                    }
                    UtilityVector::new(u.clone()).map_err(|source| DocumentError::Invalid { context, source })?
                }
                (None, Some(r)) => UtilityVector::from_ranking(&order(r, context)?),
                _ => return Err(DocumentError::VoterShape { voter: i + 1 }),
            };
            voters.push(u);
        }
        let election = Election::new(m, voters)?;
        let rankings = self
            .principled
            .iter()
            .enumerate()
            .map(|(i, r)| order(r, format!("principled voter {}", i + 1)))
            .collect::<Result<Vec<_>, _>>()?;
        let principled = PrincipledProfile::new(m, rankings)?;
        Ok(Loaded { names: self.candidates.clone(), election, principled })
    }

    /// Writes voters whose utilities are rank-derived as rankings, the rest
    /// as utilities.
    pub fn from_election(names: &[String], e: &Election, p: &PrincipledProfile) -> Self {
        let ranking = |o: &PreferenceOrder| o.iter().map(|c| names[c.0].clone()).collect::<Vec<_>>();
        let voters = e
            .voters()
            .iter()
            .map(|u| {
                let order = derive_preference(u);
                if UtilityVector::from_ranking(&order) == *u {
                    VoterEntry { ranking: Some(ranking(&order)), utilities: None }
                } else {
                    VoterEntry { utilities: Some(u.values().to_vec()), ranking: None }
                }
            })
            .collect();
        ElectionDocument {
            candidates: names.to_vec(),
            voters,
            principled: p.rankings().iter().map(ranking).collect(),
        }
    }
}

/// Default names `c1..cm`.
pub fn default_names(m: usize) -> Vec<String> {
    (1..=m).map(|j| format!("c{j}")).collect()
}

/// An MSI instance: elements `0..elements`, sets of element indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MsiDocument {
    pub elements: usize,
    pub sets: Vec<Vec<usize>>,
    pub k: usize,
    pub q: usize,
}

impl MsiDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("documents always serialize")
    }

    pub fn instance(&self) -> Result<MsiInstance, DocumentError> {
        let sets = self.sets.iter().map(|s| s.iter().copied().collect::<BTreeSet<_>>()).collect();
        Ok(MsiInstance::new(self.elements, sets, self.k, self.q)?)
    }

    pub fn from_instance(i: &MsiInstance) -> Self {
        MsiDocument {
            elements: i.num_elements(),
            sets: i.sets().iter().map(|s| s.iter().copied().collect()).collect(),
            k: i.k(),
            q: i.q(),
        }
    }
}

/// A bipartite graph with vertex counts per side and `[left, right]` edges.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BcbsDocument {
    pub left: usize,
    pub right: usize,
    pub edges: Vec<[usize; 2]>,
    pub k: usize,
}

impl BcbsDocument {
    pub fn parse(text: &str) -> Result<Self, DocumentError> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("documents always serialize")
    }

    pub fn instance(&self) -> Result<BcbsInstance, DocumentError> {
        Ok(BcbsInstance::new(self.left, self.right, self.edges.iter().map(|e| (e[0], e[1])), self.k)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
candidates = ["c1", "c2", "c3"]

[[voters]]
ranking = ["c2", "c3", "c1"]

[[voters]]
utilities = [1, 5, 9]
"#;

    #[test]
    fn parses_rankings_and_utilities() {
        let doc = ElectionDocument::parse(EXAMPLE).unwrap();
        let loaded = doc.load().unwrap();
        assert_eq!(loaded.election.utility(0).values(), &[1, 3, 2]);
        assert_eq!(loaded.election.top(1), CandidateId(2));
        assert_eq!(loaded.lookup("c2"), Some(CandidateId(1)));
    }

    #[test]
    fn rejects_bad_documents() {
        let dup = "candidates = [\"a\", \"a\"]\nvoters = [{ ranking = [\"a\"] }]";
        assert!(matches!(ElectionDocument::parse(dup).unwrap().load(), Err(DocumentError::DuplicateName(_))));
        let both = "candidates = [\"a\"]\nvoters = [{ ranking = [\"a\"], utilities = [1] }]";
        assert!(matches!(ElectionDocument::parse(both).unwrap().load(), Err(DocumentError::VoterShape { .. })));
        let unknown = "candidates = [\"a\", \"b\"]\nvoters = [{ ranking = [\"a\", \"z\"] }]";
        assert!(matches!(
            ElectionDocument::parse(unknown).unwrap().load(),
            Err(DocumentError::UnknownName { .. })
        ));
        let empty = "candidates = [\"a\"]\nvoters = []";
        assert!(ElectionDocument::parse(empty).unwrap().load().is_err());
        let typo = "candidates = [\"a\"]\nvoter = []";
        let err = ElectionDocument::parse(typo).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
    }

    #[test]
    fn election_round_trip() {
        let loaded = ElectionDocument::parse(EXAMPLE).unwrap().load().unwrap();
        let doc = ElectionDocument::from_election(&loaded.names, &loaded.election, &loaded.principled);
        assert_eq!(doc.voters[0].ranking.as_deref(), Some(&["c2".to_string(), "c3".into(), "c1".into()][..]));
        assert_eq!(doc.voters[1].utilities.as_deref(), Some(&[1, 5, 9][..]));
        let back = ElectionDocument::parse(&doc.to_toml()).unwrap();
        assert_eq!(back, doc);
    }
}
