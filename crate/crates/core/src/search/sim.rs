//! Deterministic simulated corpus: lexical-overlap retrieval plus
//! seeded noise and conflict injection, standing in for the messiness
//! of a real web engine.

use super::{cap_content, DocSource, Document, SearchBackend};
use crate::error::SearchError;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

/// One corpus entry.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimDoc {
    pub doc_id: String,
    pub title: String,
    pub content: String,
    #[serde(default)]
    pub tags: Vec<String>,
}

/// An immutable simulated corpus. `conflict_sets` group documents that
/// assert mutually contradictory facts; `noise_ratio` is the per-slot
/// probability that a result is swapped for an off-topic document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SimCorpus {
    pub docs: Vec<SimDoc>,
    #[serde(default)]
    pub noise_ratio: f64,
    #[serde(default)]
    pub conflict_sets: Vec<Vec<String>>,
    pub seed: u64,
    #[serde(default = "default_content_budget")]
    pub content_char_budget: usize,
}

fn default_content_budget() -> usize {
    2000
}

impl SimCorpus {
    pub fn load(path: &std::path::Path) -> Result<Self, crate::error::DataError> {
        let text = std::fs::read_to_string(path).map_err(|source| crate::error::DataError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let corpus: SimCorpus =
            serde_json::from_str(&text).map_err(|e| crate::error::DataError::BadRecord {
                line: 0,
                message: e.to_string(),
            })?;
        corpus
            .validate()
            .map_err(crate::error::DataError::Validation)?;
        Ok(corpus)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(0.0..=1.0).contains(&self.noise_ratio) {
            return Err(format!(
                "noise_ratio: {} outside [0, 1]",
                self.noise_ratio
            ));
        }
        let ids: BTreeSet<&str> = self.docs.iter().map(|d| d.doc_id.as_str()).collect();
        if ids.len() != self.docs.len() {
            return Err("docs: duplicate doc_id".into());
        }
        for (i, set) in self.conflict_sets.iter().enumerate() {
            for id in set {
                if !ids.contains(id.as_str()) {
                    return Err(format!("conflict_sets[{i}]: unknown doc_id {id}"));
                }
            }
        }
        for doc in &self.docs {
            if doc.content.is_empty() {
                return Err(format!("docs: empty content in {}", doc.doc_id));
            }
        }
        Ok(())
    }

    fn doc_by_id(&self, id: &str) -> Option<&SimDoc> {
        self.docs.iter().find(|d| d.doc_id == id)
    }

    fn to_document(&self, doc: &SimDoc, rank: usize) -> Document {
        Document {
            url: format!("sim://{}", doc.doc_id),
            title: doc.title.clone(),
            content: cap_content(&doc.content, self.content_char_budget),
            rank,
            source: DocSource::Simulated,
        }
    }
}

/// Case-folded whitespace/punctuation tokenization.
pub fn tokenize(text: &str) -> Vec<String> {
    text.to_lowercase()
        .split(|c: char| c.is_whitespace() || (c.is_ascii_punctuation() && c != '_'))
        .filter(|s| !s.is_empty())
        .map(|s| s.to_string())
        .collect()
}

/// Lexical relevance: |query tokens ∩ doc tokens| / (1 + ln(1 + doc
/// token count)), over the document's title and content.
pub fn sim_score(query: &str, doc: &SimDoc) -> f64 {
    let query_tokens: BTreeSet<String> = tokenize(query).into_iter().collect();
    let doc_tokens_list = tokenize(&format!("{} {}", doc.title, doc.content));
    let doc_token_count = doc_tokens_list.len();
    let doc_tokens: BTreeSet<String> = doc_tokens_list.into_iter().collect();
    let overlap = query_tokens.intersection(&doc_tokens).count();
    overlap as f64 / (1.0 + ((1 + doc_token_count) as f64).ln())
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

/// Ranks the corpus for one query: descending score, ties broken by
/// ascending doc_id, zero-score documents dropped.
fn rank_query(corpus: &SimCorpus, query: &str, k: usize) -> Vec<Document> {
    let mut scored: Vec<(&SimDoc, f64)> = corpus
        .docs
        .iter()
        .map(|d| (d, sim_score(query, d)))
        .filter(|(_, s)| *s > 0.0)
        .collect();
    scored.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap()
            .then_with(|| a.0.doc_id.cmp(&b.0.doc_id))
    });
    scored
        .into_iter()
        .take(k)
        .enumerate()
        .map(|(i, (d, _))| corpus.to_document(d, i + 1))
        .collect()
}

fn doc_id_from_url(url: &str) -> Option<&str> {
    url.strip_prefix("sim://")
}

/// Applies seeded noise and conflict injection to per-query result
/// lists.
///
/// Per slot, with probability `noise_ratio`, the result is replaced by
/// a random document scoring zero for that query. Afterwards, for every
/// returned member of a conflict set whose contradicting partners are
/// all absent, the highest-scoring partner is appended, evicting the
/// last slot when the list is already at `k`.
pub fn inject_adversity(
    corpus: &SimCorpus,
    queries: &[String],
    mut results: Vec<Vec<Document>>,
    k: usize,
) -> Vec<Vec<Document>> {
    let mut seed = corpus.seed;
    for q in queries {
        seed ^= fnv1a(q.as_bytes());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    for (qi, list) in results.iter_mut().enumerate() {
        let query = &queries[qi];
        // Noise pass: swap slots for off-topic documents.
        if corpus.noise_ratio > 0.0 {
            for slot in 0..list.len() {
                if rng.random::<f64>() >= corpus.noise_ratio {
                    continue;
                }
                let present: BTreeSet<&str> = list
                    .iter()
                    .filter_map(|d| doc_id_from_url(&d.url))
                    .collect();
                let off_topic: Vec<&SimDoc> = corpus
                    .docs
                    .iter()
                    .filter(|d| sim_score(query, d) == 0.0 && !present.contains(d.doc_id.as_str()))
                    .collect();
                if off_topic.is_empty() {
                    continue;
                }
                let pick = off_topic[rng.random_range(0..off_topic.len())];
                list[slot] = corpus.to_document(pick, slot + 1);
            }
        }

        // Conflict pass: guarantee a contradicting partner is visible.
        if k >= 2 {
            let mut idx = 0;
            while idx < list.len() {
                let Some(doc_id) = doc_id_from_url(&list[idx].url).map(str::to_string) else {
                    idx += 1;
                    continue;
                };
                for set in &corpus.conflict_sets {
                    if !set.iter().any(|id| *id == doc_id) {
                        continue;
                    }
                    let present: BTreeSet<&str> = list
                        .iter()
                        .filter_map(|d| doc_id_from_url(&d.url))
                        .collect();
                    let has_partner = set
                        .iter()
                        .any(|id| *id != doc_id && present.contains(id.as_str()));
                    if has_partner {
                        continue;
                    }
                    let mut partners: Vec<&SimDoc> = set
                        .iter()
                        .filter(|id| **id != doc_id)
                        .filter_map(|id| corpus.doc_by_id(id))
                        .collect();
                    partners.sort_by(|a, b| {
                        sim_score(query, b)
                            .partial_cmp(&sim_score(query, a))
                            .unwrap()
                            .then_with(|| a.doc_id.cmp(&b.doc_id))
                    });
                    if let Some(partner) = partners.first() {
                        if list.len() >= k {
                            list.pop();
                        }
                        let rank = list.len() + 1;
                        list.push(corpus.to_document(partner, rank));
                    }
                }
                idx += 1;
            }
        }

        for (i, doc) in list.iter_mut().enumerate() {
            doc.rank = i + 1;
        }
    }
    results
}

/// Simulated search backend: pure function of (corpus, seed, queries,
/// k).
#[derive(Debug, Clone)]
pub struct SimSearch {
    corpus: SimCorpus,
}

impl SimSearch {
    pub fn new(corpus: SimCorpus) -> Self {
        Self { corpus }
    }

    pub fn corpus(&self) -> &SimCorpus {
        &self.corpus
    }
}

impl SearchBackend for SimSearch {
    fn search(&self, queries: &[String], k: usize) -> Result<Vec<Vec<Document>>, SearchError> {
        let raw: Vec<Vec<Document>> = queries
            .iter()
            .map(|q| rank_query(&self.corpus, q, k))
            .collect();
        Ok(inject_adversity(&self.corpus, queries, raw, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(id: &str, title: &str, content: &str) -> SimDoc {
        SimDoc {
            doc_id: id.into(),
            title: title.into(),
            content: content.into(),
            tags: vec![],
        }
    }

    fn corpus(docs: Vec<SimDoc>) -> SimCorpus {
        SimCorpus {
            docs,
            noise_ratio: 0.0,
            conflict_sets: vec![],
            seed: 5,
            content_char_budget: 2000,
        }
    }

    #[test]
    fn empty_corpus_returns_empty_lists() {
        let backend = SimSearch::new(corpus(vec![]));
        let out = backend.search(&["anything".into()], 2).unwrap();
        assert_eq!(out, vec![Vec::new()]);
    }

    #[test]
    fn score_is_zero_for_disjoint_tokens() {
        let d = doc("d1", "alpha", "beta gamma");
        assert_eq!(sim_score("delta epsilon", &d), 0.0);
    }

    #[test]
    fn single_token_identity_score() {
        // One shared token over a one-token document: 1 / (1 + ln 2).
        let d = SimDoc {
            doc_id: "d1".into(),
            title: "".into(),
            content: "alpha".into(),
            tags: vec![],
        };
        let expected = 1.0 / (1.0 + 2.0_f64.ln());
        assert!((sim_score("alpha", &d) - expected).abs() < 1e-12);
    }

    // Independent recomputation of the scoring formula, kept separate
    // from the implementation on purpose.
    fn oracle_score(query: &str, title: &str, content: &str) -> f64 {
        use std::collections::HashSet;
        let norm = |s: &str| -> Vec<String> {
            s.to_lowercase()
                .split(|c: char| c.is_whitespace() || (c.is_ascii_punctuation() && c != '_'))
                .filter(|t| !t.is_empty())
                .map(|t| t.to_string())
                .collect()
        };
        let q: HashSet<String> = norm(query).into_iter().collect();
        let all = norm(&format!("{title} {content}"));
        let n = all.len();
        let d: HashSet<String> = all.into_iter().collect();
        q.intersection(&d).count() as f64 / (1.0 + ((1 + n) as f64).ln())
    }

    #[test]
    fn five_doc_fixture_matches_independent_recomputation() {
        let docs = vec![
            doc("a", "rust borrow checker", "ownership and lifetimes in rust"),
            doc("b", "python asyncio", "event loops and coroutines"),
            doc("c", "rust async", "futures executors and wakers in rust"),
            doc("d", "cooking pasta", "boil water add salt"),
            doc("e", "rust macros", "declarative and procedural macros"),
        ];
        for query in ["rust async futures", "pasta salt", "event loops"] {
            for d in &docs {
                let got = sim_score(query, d);
                let want = oracle_score(query, &d.title, &d.content);
                assert!((got - want).abs() < 1e-12, "query={query} doc={}", d.doc_id);
            }
        }
    }

    #[test]
    fn three_doc_ranking_matches_hand_computed_order() {
        // Scores for query "alpha beta":
        //   d1: tokens {alpha, beta} count 2 -> 2/(1+ln 3)
        //   d2: tokens {alpha, x, y, z} count 4, overlap 1 -> 1/(1+ln 5)
        //   d3: no overlap -> dropped
        let docs = vec![
            doc("d1", "", "alpha beta"),
            doc("d2", "", "alpha x y z"),
            doc("d3", "", "unrelated words here"),
        ];
        let backend = SimSearch::new(corpus(docs));
        let out = backend.search(&["alpha beta".into()], 3).unwrap();
        let ids: Vec<&str> = out[0]
            .iter()
            .map(|d| d.url.strip_prefix("sim://").unwrap())
            .collect();
        assert_eq!(ids, vec!["d1", "d2"]);
        assert_eq!(out[0][0].rank, 1);
        assert_eq!(out[0][1].rank, 2);
    }

    #[test]
    fn per_query_lists_respect_k() {
        let docs: Vec<SimDoc> = (0..6)
            .map(|i| doc(&format!("d{i}"), "alpha", "alpha common text"))
            .collect();
        let backend = SimSearch::new(corpus(docs));
        let out = backend
            .search(&["alpha".into(), "common".into()], 2)
            .unwrap();
        assert_eq!(out.len(), 2);
        assert!(out.iter().all(|list| list.len() <= 2));
    }

    #[test]
    fn zero_noise_no_conflicts_is_identity() {
        let docs = vec![doc("d1", "", "alpha"), doc("d2", "", "alpha beta")];
        let c = corpus(docs);
        let queries = vec!["alpha".to_string()];
        let raw = vec![rank_query(&c, "alpha", 2)];
        let injected = inject_adversity(&c, &queries, raw.clone(), 2);
        assert_eq!(injected, raw);
    }

    #[test]
    fn full_noise_replaces_every_slot_deterministically() {
        let docs = vec![
            doc("d1", "", "alpha"),
            doc("d2", "", "alpha beta"),
            doc("off1", "", "unrelated one"),
            doc("off2", "", "unrelated two"),
        ];
        let mut c = corpus(docs);
        c.noise_ratio = 1.0;
        let queries = vec!["alpha".to_string()];
        let raw = vec![rank_query(&c, "alpha", 2)];
        let a = inject_adversity(&c, &queries, raw.clone(), 2);
        let b = inject_adversity(&c, &queries, raw, 2);
        assert_eq!(a, b);
        for d in &a[0] {
            let id = d.url.strip_prefix("sim://").unwrap();
            assert!(id.starts_with("off"), "slot not replaced: {id}");
        }
    }

    #[test]
    fn conflict_partner_occupies_second_slot() {
        // d1 matches the query; its conflict partner d2 does not, so the
        // partner must be appended into slot 2.
        let docs = vec![
            doc("d1", "", "alpha fact-one"),
            doc("d2", "", "contradiction text"),
            doc("d3", "", "alpha filler body"),
        ];
        let mut c = corpus(docs);
        c.conflict_sets = vec![vec!["d1".into(), "d2".into()]];
        let backend = SimSearch::new(c);
        let out = backend.search(&["alpha".into()], 2).unwrap();
        let ids: Vec<&str> = out[0]
            .iter()
            .map(|d| d.url.strip_prefix("sim://").unwrap())
            .collect();
        assert!(ids.contains(&"d1"));
        assert!(ids.contains(&"d2"), "partner missing: {ids:?}");
        assert_eq!(out[0].len(), 2);
    }

    #[test]
    fn search_is_pure_in_corpus_seed_queries_k() {
        let docs = vec![
            doc("d1", "", "alpha beta"),
            doc("d2", "", "alpha"),
            doc("n1", "", "noise body"),
        ];
        let mut c = corpus(docs);
        c.noise_ratio = 0.5;
        let backend = SimSearch::new(c);
        let queries = vec!["alpha".to_string(), "beta".to_string()];
        let a = backend.search(&queries, 2).unwrap();
        let b = backend.search(&queries, 2).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn content_capped_to_budget() {
        let long = "字".repeat(3000);
        let mut c = corpus(vec![doc("d1", "alpha", &long)]);
        c.content_char_budget = 100;
        let backend = SimSearch::new(c);
        let out = backend.search(&["alpha".into()], 1).unwrap();
        assert_eq!(out[0][0].content.chars().count(), 100);
    }
}
