//! Streaming ingestion and deduplication of contest entries.
//!
//! Line format, one record per line:
//!
//! ```text
//! entry_id,p1;p2;p3;p4;p5;p6;p7;p8;p9;p10;p11,captain_id,vc_id
//! ```
//!
//! Teams are stored compactly (player ids interned to indices) so tens of
//! millions of rows fit on a desktop. The finished set is canonical: the
//! player table is sorted and unique teams are ordered by signature, so the
//! result does not depend on chunking or input order.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::Serialize;
use sha2::{Digest, Sha256};

use super::AnalyticsError;
use crate::model::team::signature_of_parts;
use crate::model::{FantasyTeam, PlayerId, Signature};

pub const STORE_HEADER: &str = "signature,multiplicity,players,captain,vice_captain";

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    /// Abort when malformed lines exceed this fraction of non-blank lines.
    pub max_malformed_fraction: f64,
    /// Lines parsed per parallel batch.
    pub chunk_lines: usize,
}

impl Default for IngestOptions {
    fn default() -> Self {
        IngestOptions {
            max_malformed_fraction: 0.05,
            chunk_lines: 1 << 16,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MalformedLine {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct CompactTeam {
    pub signature: Signature,
    /// Indices into the player table, ascending.
    pub members: [u32; 11],
    pub captain: u32,
    pub vice_captain: u32,
    pub multiplicity: u64,
}

/// Deduplicated entry population.
#[derive(Debug, Clone, PartialEq)]
pub struct ContestEntrySet {
    raw_count: u64,
    players: Vec<PlayerId>,
    unique: Vec<CompactTeam>,
    source_digest: String,
    malformed: Vec<MalformedLine>,
}

/// Borrowed view of one unique team.
#[derive(Debug, Clone, Copy)]
pub struct UniqueTeam<'a> {
    set: &'a ContestEntrySet,
    inner: &'a CompactTeam,
}

impl<'a> UniqueTeam<'a> {
    pub fn signature(&self) -> Signature {
        self.inner.signature
    }

    pub fn multiplicity(&self) -> u64 {
        self.inner.multiplicity
    }

    pub fn members(&self) -> impl Iterator<Item = &'a PlayerId> + 'a {
        let set = self.set;
        self.inner.members.iter().map(move |&i| &set.players[i as usize])
    }

    pub fn captain(&self) -> &'a PlayerId {
        &self.set.players[self.inner.captain as usize]
    }

    pub fn vice_captain(&self) -> &'a PlayerId {
        &self.set.players[self.inner.vice_captain as usize]
    }

    pub fn team(&self) -> FantasyTeam {
        FantasyTeam::new(
            self.members().cloned(),
            self.captain().clone(),
            self.vice_captain().clone(),
        )
    }
}

impl ContestEntrySet {
    pub fn empty() -> Self {
        ContestEntrySet {
            raw_count: 0,
            players: Vec::new(),
            unique: Vec::new(),
            source_digest: hex::encode(Sha256::digest(b"")),
            malformed: Vec::new(),
        }
    }

    pub fn raw_count(&self) -> u64 {
        self.raw_count
    }

    pub fn unique_count(&self) -> usize {
        self.unique.len()
    }

    pub fn is_empty(&self) -> bool {
        self.unique.is_empty()
    }

    pub fn source_digest(&self) -> &str {
        &self.source_digest
    }

    pub fn malformed(&self) -> &[MalformedLine] {
        &self.malformed
    }

    /// Player table in ascending id order; compact indices point into it.
    pub fn players(&self) -> &[PlayerId] {
        &self.players
    }

    pub fn unique(&self) -> impl ExactSizeIterator<Item = UniqueTeam<'_>> + '_ {
        self.unique.iter().map(move |inner| UniqueTeam { set: self, inner })
    }

    pub(crate) fn compact_teams(&self) -> &[CompactTeam] {
        &self.unique
    }

    pub fn get(&self, signature: &Signature) -> Option<UniqueTeam<'_>> {
        self.unique
            .binary_search_by(|t| t.signature.cmp(signature))
            .ok()
            .map(|i| UniqueTeam {
                set: self,
                inner: &self.unique[i],
            })
    }

    /// Builds a set from in-memory teams (each counted once per occurrence).
    pub fn from_teams<'t>(teams: impl IntoIterator<Item = &'t FantasyTeam>) -> Result<Self, AnalyticsError> {
        let mut b = Builder::default();
        let mut hasher = Sha256::new();
        for t in teams {
            let sig = crate::model::canonical_signature(t)?;
            let sorted = t.sorted_players();
            hasher.update(sig.as_bytes());
            b.insert(
                sig,
                sorted.iter().map(PlayerId::as_str),
                t.captain.as_str(),
                t.vice_captain.as_str(),
                1,
            );
        }
        Ok(b.finish(hex::encode(hasher.finalize()), Vec::new()))
    }

    /// Associative merge of two shards. The merged digest hashes both shard digests in order.
    pub fn merge(self, other: ContestEntrySet) -> ContestEntrySet {
        let mut b = Builder::default();
        for set in [&self, &other] {
            for t in set.unique() {
                b.insert(
                    t.signature(),
                    t.members().map(PlayerId::as_str),
                    t.captain().as_str(),
                    t.vice_captain().as_str(),
                    t.multiplicity(),
                );
            }
        }
        let digest = hex::encode(Sha256::digest(
            format!("{}{}", self.source_digest, other.source_digest).as_bytes(),
        ));
        let mut malformed = self.malformed;
        malformed.extend(other.malformed);
        let mut merged = b.finish(digest, malformed);
        merged.raw_count = self.raw_count + other.raw_count;
        merged
    }

    /// Writes the compact store: one line per unique team with its multiplicity.
    pub fn write_store<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{STORE_HEADER}")?;
        for t in self.unique() {
            let members: Vec<&str> = t.members().map(PlayerId::as_str).collect();
            writeln!(
                w,
                "{},{},{},{},{}",
                t.signature(),
                t.multiplicity(),
                members.join(";"),
                t.captain(),
                t.vice_captain()
            )?;
        }
        Ok(())
    }

    /// Writes entry lines; `expand` repeats each team by its multiplicity.
    pub fn write_entry_lines<W: Write>(&self, mut w: W, expand: bool) -> std::io::Result<()> {
        for t in self.unique() {
            let members: Vec<&str> = t.members().map(PlayerId::as_str).collect();
            let reps = if expand { t.multiplicity() } else { 1 };
            let short = &t.signature().to_hex()[..16];
            for k in 0..reps {
                writeln!(
                    w,
                    "{short}-{k},{},{},{}",
                    members.join(";"),
                    t.captain(),
                    t.vice_captain()
                )?;
            }
        }
        Ok(())
    }

    /// Writes the malformed-line sidecar report (`line<TAB>reason`).
    pub fn write_malformed_report<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "line\treason")?;
        for m in &self.malformed {
            writeln!(w, "{}\t{}", m.line, m.reason)?;
        }
        Ok(())
    }
}

#[derive(Default)]
struct Builder {
    index: HashMap<String, u32>,
    players: Vec<PlayerId>,
    by_sig: HashMap<Signature, usize>,
    unique: Vec<CompactTeam>,
    raw_count: u64,
}

impl Builder {
    fn intern(&mut self, id: &str) -> u32 {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.players.len() as u32;
        self.players.push(PlayerId::new(id));
        self.index.insert(id.to_string(), i);
        i
    }

    fn insert<'a>(
        &mut self,
        sig: Signature,
        members: impl Iterator<Item = &'a str>,
        captain: &str,
        vice: &str,
        multiplicity: u64,
    ) {
        self.raw_count += multiplicity;
        if let Some(&slot) = self.by_sig.get(&sig) {
            self.unique[slot].multiplicity += multiplicity;
            return;
        }
        let mut m = [0u32; 11];
        for (slot, id) in m.iter_mut().zip(members) {
            *slot = self.intern(id);
        }
        let captain = self.intern(captain);
        let vice_captain = self.intern(vice);
        self.by_sig.insert(sig, self.unique.len());
        self.unique.push(CompactTeam {
            signature: sig,
            members: m,
            captain,
            vice_captain,
            multiplicity,
        });
    }

    fn finish(self, source_digest: String, malformed: Vec<MalformedLine>) -> ContestEntrySet {
        // Canonicalise: sorted player table, teams ordered by signature.
        let mut order: Vec<u32> = (0..self.players.len() as u32).collect();
        order.sort_by(|a, b| self.players[*a as usize].cmp(&self.players[*b as usize]));
        let mut remap = vec![0u32; order.len()];
        for (new, old) in order.iter().enumerate() {
            remap[*old as usize] = new as u32;
        }
        let players: Vec<PlayerId> = order
            .iter()
            .map(|&old| self.players[old as usize].clone())
            .collect();
        let mut unique = self.unique;
        for t in &mut unique {
            for m in &mut t.members {
                *m = remap[*m as usize];
            }
            t.members.sort_unstable();
            t.captain = remap[t.captain as usize];
            t.vice_captain = remap[t.vice_captain as usize];
        }
        unique.sort_unstable_by(|a, b| a.signature.cmp(&b.signature));
        ContestEntrySet {
            raw_count: self.raw_count,
            players,
            unique,
            source_digest,
            malformed,
        }
    }
}

struct ParsedLine<'a> {
    signature: Signature,
    members: Vec<&'a str>,
    captain: &'a str,
    vice: &'a str,
}

/// Parses one entry line; the error string names the first problem found.
fn parse_entry_line(line: &str) -> Result<ParsedLine<'_>, String> {
    let fields: Vec<&str> = line.split(',').collect();
    if fields.len() != 4 {
        return Err(format!("expected 4 comma-separated fields, found {}", fields.len()));
    }
    if fields[0].is_empty() {
        return Err("empty entry_id".into());
    }
    let mut members: Vec<&str> = fields[1].split(';').collect();
    if members.len() != 11 {
        return Err(format!("expected 11 players, found {}", members.len()));
    }
    if members.iter().any(|m| m.is_empty()) {
        return Err("empty player id".into());
    }
    members.sort_unstable();
    if members.windows(2).any(|w| w[0] == w[1]) {
        return Err("duplicate player id".into());
    }
    let (captain, vice) = (fields[2], fields[3]);
    if members.binary_search(&captain).is_err() {
        return Err(format!("captain `{captain}` not in team"));
    }
    if members.binary_search(&vice).is_err() {
        return Err(format!("vice-captain `{vice}` not in team"));
    }
    if captain == vice {
        return Err("captain equals vice-captain".into());
    }
    let signature = signature_of_parts(members.iter().copied(), captain, vice);
    Ok(ParsedLine {
        signature,
        members,
        captain,
        vice,
    })
}

/// Parses a full entry file, counting malformed lines instead of failing on them.
pub fn ingest_entries<R: BufRead>(
    mut reader: R,
    options: &IngestOptions,
) -> Result<ContestEntrySet, AnalyticsError> {
    let mut builder = Builder::default();
    let mut hasher = Sha256::new();
    let mut malformed = Vec::new();
    let mut line_no: u64 = 0;
    let mut non_blank: u64 = 0;
    let mut chunk: Vec<(u64, String)> = Vec::with_capacity(options.chunk_lines);
    let mut buf = String::new();

    let flush = |chunk: &mut Vec<(u64, String)>,
                     builder: &mut Builder,
                     malformed: &mut Vec<MalformedLine>| {
        let parsed: Vec<Result<ParsedLine<'_>, String>> = chunk
            .par_iter()
            .map(|(_, line)| parse_entry_line(line))
            .collect();
        for ((no, _), p) in chunk.iter().zip(parsed) {
            match p {
                Ok(p) => builder.insert(p.signature, p.members.into_iter(), p.captain, p.vice, 1),
                Err(reason) => malformed.push(MalformedLine { line: *no, reason }),
            }
        }
        chunk.clear();
    };

    loop {
        buf.clear();
        let n = reader.read_line(&mut buf)?;
        if n == 0 {
            break;
        }
        hasher.update(buf.as_bytes());
        line_no += 1;
        let line = buf.strip_suffix('\n').unwrap_or(&buf);
        if line.is_empty() {
            continue;
        }
        non_blank += 1;
        chunk.push((line_no, line.to_string()));
        if chunk.len() >= options.chunk_lines {
            flush(&mut chunk, &mut builder, &mut malformed);
        }
    }
    flush(&mut chunk, &mut builder, &mut malformed);

    if non_blank > 0 {
        let fraction = malformed.len() as f64 / non_blank as f64;
        if fraction > options.max_malformed_fraction {
            return Err(AnalyticsError::TooManyMalformed {
                malformed: malformed.len() as u64,
                total: non_blank,
                first: malformed.first().cloned(),
            });
        }
    }
    Ok(builder.finish(hex::encode(hasher.finalize()), malformed))
}

/// Reads a store written by [`ContestEntrySet::write_store`].
pub fn read_store<R: BufRead>(reader: R) -> Result<ContestEntrySet, AnalyticsError> {
    let mut builder = Builder::default();
    let mut hasher = Sha256::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        hasher.update(line.as_bytes());
        hasher.update(b"\n");
        if i == 0 {
            if line != STORE_HEADER {
                return Err(AnalyticsError::BadStore {
                    line: 1,
                    reason: "missing store header".into(),
                });
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let bad = |reason: String| AnalyticsError::BadStore {
            line: i as u64 + 1,
            reason,
        };
        let (sig_hex, rest) = line.split_once(',').ok_or_else(|| bad("no fields".into()))?;
        let (mult, entry) = rest.split_once(',').ok_or_else(|| bad("no multiplicity".into()))?;
        let multiplicity: u64 = mult.parse().map_err(|_| bad(format!("bad multiplicity `{mult}`")))?;
        let record = format!("x,{entry}");
        let parsed = parse_entry_line(&record).map_err(bad)?;
        if parsed.signature.to_hex() != sig_hex {
            return Err(bad("signature does not match team".into()));
        }
        builder.insert(
            parsed.signature,
            parsed.members.iter().copied(),
            parsed.captain,
            parsed.vice,
            multiplicity,
        );
    }
    Ok(builder.finish(hex::encode(hasher.finalize()), Vec::new()))
}

/// Reads either a raw entry file or a store, detected from the first line.
pub fn load_entries<R: BufRead>(
    mut reader: R,
    options: &IngestOptions,
) -> Result<ContestEntrySet, AnalyticsError> {
    let head = reader.fill_buf()?;
    if head.starts_with(STORE_HEADER.as_bytes()) {
        read_store(reader)
    } else {
        ingest_entries(reader, options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(id: &str, members: &[&str], c: &str, vc: &str) -> String {
        format!("{id},{},{c},{vc}\n", members.join(";"))
    }

    const M: [&str; 11] = ["p1", "p2", "p3", "p4", "p5", "p6", "p7", "p8", "p9", "p10", "p11"];

    #[test]
    fn empty_stream() {
        let set = ingest_entries("".as_bytes(), &IngestOptions::default()).unwrap();
        assert_eq!(set.raw_count(), 0);
        assert_eq!(set.unique_count(), 0);
    }

    #[test]
    fn permuted_duplicates_collapse() {
        let mut rev = M;
        rev.reverse();
        let text = line("e1", &M, "p1", "p2") + &line("e2", &rev, "p1", "p2") + &line("e3", &M, "p2", "p1");
        let set = ingest_entries(text.as_bytes(), &IngestOptions::default()).unwrap();
        assert_eq!(set.raw_count(), 3);
        assert_eq!(set.unique_count(), 2);
        let total: u64 = set.unique().map(|t| t.multiplicity()).sum();
        assert_eq!(total, 3);
    }

    #[test]
    fn malformed_lines_are_counted_not_fatal() {
        let mut text = String::new();
        for i in 0..40 {
            text += &line(&format!("e{i}"), &M, "p1", "p2");
        }
        text += "bad line\n";
        text += &line("e99", &M[..10], "p1", "p2");
        let opts = IngestOptions {
            max_malformed_fraction: 0.1,
            ..Default::default()
        };
        let set = ingest_entries(text.as_bytes(), &opts).unwrap();
        assert_eq!(set.raw_count(), 40);
        assert_eq!(set.malformed().len(), 2);
        assert_eq!(set.malformed()[0].line, 41);
        assert_eq!(set.malformed()[1].line, 42);
        let mut report = Vec::new();
        set.write_malformed_report(&mut report).unwrap();
        assert!(String::from_utf8(report).unwrap().contains("42\texpected 11 players"));
    }

    #[test]
    fn malformed_threshold_aborts() {
        let text = line("e1", &M, "p1", "p2") + "junk\n";
        let err = ingest_entries(text.as_bytes(), &IngestOptions::default()).unwrap_err();
        assert!(matches!(err, AnalyticsError::TooManyMalformed { malformed: 1, total: 2, .. }));
    }

    #[test]
    fn captain_must_be_member() {
        assert!(parse_entry_line(&line("e", &M, "p12", "p2")[..]).is_err());
        assert!(parse_entry_line(line("e", &M, "p1", "p1").trim_end()).is_err());
    }

    #[test]
    fn chunking_does_not_change_result() {
        let mut text = String::new();
        for i in 0..100 {
            let c = M[i % 11];
            let vc = M[(i + 1) % 11];
            text += &line(&format!("e{i}"), &M, c, vc);
        }
        let a = ingest_entries(text.as_bytes(), &IngestOptions::default()).unwrap();
        let b = ingest_entries(
            text.as_bytes(),
            &IngestOptions {
                chunk_lines: 7,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.unique_count(), 11);
    }

    #[test]
    fn store_roundtrip_and_merge() {
        let text = line("e1", &M, "p1", "p2") + &line("e2", &M, "p1", "p2") + &line("e3", &M, "p3", "p2");
        let set = ingest_entries(text.as_bytes(), &IngestOptions::default()).unwrap();
        let mut store = Vec::new();
        set.write_store(&mut store).unwrap();
        let back = load_entries(store.as_slice(), &IngestOptions::default()).unwrap();
        assert_eq!(back.raw_count(), 3);
        assert_eq!(back.unique_count(), 2);
        let merged = set.clone().merge(back);
        assert_eq!(merged.raw_count(), 6);
        assert_eq!(merged.unique_count(), 2);
    }
}
