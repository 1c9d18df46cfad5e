use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use super::PlayerId;

/// Width in bytes of every team signature.
pub const SIGNATURE_LEN: usize = 32;

/// Team identity used for deduplication: SHA-256 over the canonical form
/// `sorted(players).join(";") + "|" + captain + "|" + vice_captain`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Signature([u8; SIGNATURE_LEN]);

impl Signature {
    pub fn as_bytes(&self) -> &[u8; SIGNATURE_LEN] {
        &self.0
    }

    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let bytes = hex::decode(s).ok()?;
        Some(Signature(bytes.try_into().ok()?))
    }
}

impl fmt::Debug for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Signature({})", &self.to_hex()[..16])
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl Serialize for Signature {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_hex())
    }
}

impl<'de> Deserialize<'de> for Signature {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        Signature::from_hex(&s).ok_or_else(|| serde::de::Error::custom("bad signature hex"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TeamStructureError {
    #[error("team has {0} players, expected 11")]
    WrongSize(usize),
    #[error("player `{0}` listed more than once")]
    DuplicatePlayer(PlayerId),
    #[error("captain `{0}` is not in the team")]
    CaptainNotInTeam(PlayerId),
    #[error("vice-captain `{0}` is not in the team")]
    ViceCaptainNotInTeam(PlayerId),
    #[error("captain and vice-captain are both `{0}`")]
    SameCaptainAndVice(PlayerId),
    #[error("player id must be non-empty")]
    EmptyId,
}

/// A fantasy lineup: 11 players, a captain and a vice-captain.
///
/// The struct is a plain carrier so that malformed proposals (e.g. from an
/// LLM) can still be represented and reported on; [`FantasyTeam::check`]
/// enforces the structural invariants.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FantasyTeam {
    pub players: Vec<PlayerId>,
    pub captain: PlayerId,
    pub vice_captain: PlayerId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rationale: Option<String>,
}

impl FantasyTeam {
    pub fn new(
        players: impl IntoIterator<Item = PlayerId>,
        captain: impl Into<PlayerId>,
        vice_captain: impl Into<PlayerId>,
    ) -> Self {
        FantasyTeam {
            players: players.into_iter().collect(),
            captain: captain.into(),
            vice_captain: vice_captain.into(),
            name: None,
            rationale: None,
        }
    }

    /// Every structural problem, in a stable order.
    pub fn structure_errors(&self) -> Vec<TeamStructureError> {
        let mut errors = Vec::new();
        let mut seen = BTreeSet::new();
        for p in &self.players {
            if p.as_str().is_empty() {
                errors.push(TeamStructureError::EmptyId);
            } else if !seen.insert(p) {
                errors.push(TeamStructureError::DuplicatePlayer(p.clone()));
            }
        }
        if self.players.len() != 11 {
            errors.push(TeamStructureError::WrongSize(self.players.len()));
        }
        if !seen.contains(&self.captain) {
            errors.push(TeamStructureError::CaptainNotInTeam(self.captain.clone()));
        }
        if !seen.contains(&self.vice_captain) {
            errors.push(TeamStructureError::ViceCaptainNotInTeam(
                self.vice_captain.clone(),
            ));
        }
        if self.captain == self.vice_captain {
            errors.push(TeamStructureError::SameCaptainAndVice(self.captain.clone()));
        }
        errors
    }

    pub fn check(&self) -> Result<(), TeamStructureError> {
        match self.structure_errors().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    pub fn sorted_players(&self) -> Vec<PlayerId> {
        let mut v = self.players.clone();
        v.sort();
        v
    }

    pub fn contains(&self, id: &PlayerId) -> bool {
        self.players.contains(id)
    }

    /// Same membership and C/VC with the players in ascending id order, label fields dropped.
    pub fn canonical(&self) -> FantasyTeam {
        FantasyTeam {
            players: self.sorted_players(),
            captain: self.captain.clone(),
            vice_captain: self.vice_captain.clone(),
            name: None,
            rationale: None,
        }
    }
}

/// Order-independent team identity; captain and vice-captain are part of it.
pub fn canonical_signature(team: &FantasyTeam) -> Result<Signature, TeamStructureError> {
    team.check()?;
    Ok(signature_of_parts(
        team.sorted_players().iter().map(PlayerId::as_str),
        team.captain.as_str(),
        team.vice_captain.as_str(),
    ))
}

/// Hashes already-sorted member ids. Callers guarantee structural validity.
pub(crate) fn signature_of_parts<'a>(
    sorted_members: impl Iterator<Item = &'a str>,
    captain: &str,
    vice_captain: &str,
) -> Signature {
    let mut h = Sha256::new();
    for (i, id) in sorted_members.enumerate() {
        if i > 0 {
            h.update(b";");
        }
        h.update(id.as_bytes());
    }
    h.update(b"|");
    h.update(captain.as_bytes());
    h.update(b"|");
    h.update(vice_captain.as_bytes());
    Signature(h.finalize().into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;

    fn ids(n: usize) -> Vec<PlayerId> {
        (1..=n).map(|i| PlayerId::new(format!("p{i}"))).collect()
    }

    #[test]
    fn listing_order_does_not_matter() {
        let a = FantasyTeam::new(ids(11), "p1", "p2");
        let mut rev = ids(11);
        rev.reverse();
        let b = FantasyTeam::new(rev, "p1", "p2");
        assert_eq!(canonical_signature(&a).unwrap(), canonical_signature(&b).unwrap());
    }

    #[test]
    fn captaincy_is_part_of_identity() {
        let a = FantasyTeam::new(ids(11), "p1", "p2");
        let b = FantasyTeam::new(ids(11), "p2", "p1");
        assert_ne!(canonical_signature(&a).unwrap(), canonical_signature(&b).unwrap());
    }

    #[test]
    fn thousand_permutations_one_signature() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let mut members = ids(11);
        let mut seen = std::collections::HashSet::new();
        for _ in 0..1000 {
            members.shuffle(&mut rng);
            let t = FantasyTeam::new(members.clone(), "p5", "p9");
            seen.insert(canonical_signature(&t).unwrap());
        }
        assert_eq!(seen.len(), 1);
    }

    #[test]
    fn malformed_team_rejected() {
        let t = FantasyTeam::new(ids(10), "p1", "p2");
        assert_eq!(canonical_signature(&t), Err(TeamStructureError::WrongSize(10)));
        let t = FantasyTeam::new(ids(11), "p1", "p1");
        assert!(canonical_signature(&t).is_err());
        let t = FantasyTeam::new(ids(11), "p1", "zz");
        assert!(matches!(
            canonical_signature(&t),
            Err(TeamStructureError::ViceCaptainNotInTeam(_))
        ));
    }

    #[test]
    fn signature_is_fixed_width_and_stable() {
        let t = FantasyTeam::new(ids(11), "p1", "p2");
        let sig = canonical_signature(&t).unwrap();
        assert_eq!(sig.as_bytes().len(), SIGNATURE_LEN);
        // Frozen: guards against accidental changes to the canonical form.
        let mut sorted: Vec<String> = (1..=11).map(|i| format!("p{i}")).collect();
        sorted.sort();
        let text = format!("{}|p1|p2", sorted.join(";"));
        let expected = hex::encode(Sha256::digest(text.as_bytes()));
        assert_eq!(sig.to_hex(), expected);
        assert_eq!(Signature::from_hex(&sig.to_hex()), Some(sig));
    }
}
