//! Episode execution: drives the model/search backends through the
//! reasoning-retrieval loop and records a provenance-tagged trajectory.

use super::{
    parse_turn, render_agent_prompt, render_agent_prompt_no_search, render_documents_turn, Action,
    AgentConfig, Provenance, Round, TerminatedBy, TokenSpan, Trajectory, FORCED_ANSWER_RETRY,
};
use crate::backends::{ChatBackend, ChatMessage, Role, TurnCtx};
use crate::dataset::QARecord;
use crate::search::{Document, SearchBackend};
use std::collections::HashSet;

/// Episode variations beyond the agent config.
#[derive(Debug, Clone, Copy)]
pub struct EpisodeOptions {
    /// 1-based attempt index, forwarded to scripted backends.
    pub attempt: usize,
    /// When false, the episode uses the no-search prompt variant and
    /// rejects tool calls: the first one gets a forced-answer retry,
    /// a second terminates the episode as a parse failure.
    pub search_enabled: bool,
}

impl Default for EpisodeOptions {
    fn default() -> Self {
        Self {
            attempt: 1,
            search_enabled: true,
        }
    }
}

/// Runs one episode with the default options.
pub fn run_episode(
    record: &QARecord,
    model: &dyn ChatBackend,
    search: &dyn SearchBackend,
    config: &AgentConfig,
) -> Trajectory {
    run_episode_opts(record, model, search, config, EpisodeOptions::default())
}

/// Runs one episode. Backend failures never panic or propagate; they
/// terminate the trajectory with the matching `TerminatedBy` cause.
pub fn run_episode_opts(
    record: &QARecord,
    model: &dyn ChatBackend,
    search: &dyn SearchBackend,
    config: &AgentConfig,
    opts: EpisodeOptions,
) -> Trajectory {
    let initial_prompt = if opts.search_enabled {
        render_agent_prompt(&record.question)
    } else {
        render_agent_prompt_no_search(&record.question)
    };
    let mut messages = vec![ChatMessage::new(Role::System, initial_prompt.clone())];
    let mut spans = vec![TokenSpan::new(initial_prompt, Provenance::Prompt)];
    let mut rounds: Vec<Round> = Vec::new();
    let mut warnings: Vec<String> = Vec::new();
    let mut final_answer = None;
    let mut forced_answer_retries = 0usize;

    let terminated_by = 'episode: loop {
        let round_index = rounds.len() + 1;
        if round_index > config.max_rounds {
            break TerminatedBy::RoundCapExceeded;
        }
        let ctx = TurnCtx::new(record.id.as_str(), opts.attempt, round_index);
        let raw_turn = match model.complete(&ctx, &messages) {
            Ok(text) => text,
            Err(e) => {
                warnings.push(format!("round {round_index}: model backend error: {e}"));
                break TerminatedBy::BackendError;
            }
        };
        spans.push(TokenSpan::new(raw_turn.clone(), Provenance::ModelGenerated));

        let parsed = match parse_turn(&raw_turn, config) {
            Ok(parsed) => parsed,
            Err(e) => {
                warnings.push(format!("round {round_index}: {e}"));
                break TerminatedBy::ParseFailure;
            }
        };
        if parsed.query_overflow {
            warnings.push(format!(
                "round {round_index}: query list truncated to {}",
                config.max_queries_per_round
            ));
        }

        match parsed.action {
            Action::Answer { text } => {
                rounds.push(Round {
                    index: round_index,
                    reasoning: parsed.reasoning,
                    action: Action::Answer { text: text.clone() },
                    documents: vec![],
                });
                final_answer = Some(text);
                break TerminatedBy::Answered;
            }
            Action::Search { queries } => {
                if !opts.search_enabled {
                    rounds.push(Round {
                        index: round_index,
                        reasoning: parsed.reasoning,
                        action: Action::Search { queries },
                        documents: vec![],
                    });
                    if forced_answer_retries > 0 {
                        warnings
                            .push(format!("round {round_index}: tool call while search disabled"));
                        break TerminatedBy::ParseFailure;
                    }
                    forced_answer_retries += 1;
                    messages.push(ChatMessage::new(Role::Assistant, raw_turn));
                    messages.push(ChatMessage::new(Role::User, FORCED_ANSWER_RETRY));
                    spans.push(TokenSpan::new(FORCED_ANSWER_RETRY, Provenance::Prompt));
                    continue 'episode;
                }
                if round_index == config.max_rounds {
                    // No retrieval budget left for the results to ever
                    // reach the model.
                    rounds.push(Round {
                        index: round_index,
                        reasoning: parsed.reasoning,
                        action: Action::Search { queries },
                        documents: vec![],
                    });
                    break TerminatedBy::RoundCapExceeded;
                }
                let per_query = match search.search(&queries, config.top_k_per_query) {
                    Ok(lists) => lists,
                    Err(e) => {
                        rounds.push(Round {
                            index: round_index,
                            reasoning: parsed.reasoning,
                            action: Action::Search { queries },
                            documents: vec![],
                        });
                        warnings.push(format!("round {round_index}: search backend error: {e}"));
                        break TerminatedBy::BackendError;
                    }
                };
                let documents = merge_results(per_query);
                rounds.push(Round {
                    index: round_index,
                    reasoning: parsed.reasoning,
                    action: Action::Search { queries },
                    documents: documents.clone(),
                });
                let doc_spans = render_documents_turn(&documents);
                let docs_turn: String = doc_spans.iter().map(|s| s.text.as_str()).collect();
                messages.push(ChatMessage::new(Role::Assistant, raw_turn));
                messages.push(ChatMessage::new(Role::User, docs_turn));
                spans.extend(doc_spans);
            }
        }
    };

    let used_search = rounds
        .iter()
        .any(|r| matches!(r.action, Action::Search { .. }));
    Trajectory {
        record_id: record.id.clone(),
        rounds,
        final_answer,
        terminated_by,
        token_spans: spans,
        used_search,
        warnings,
    }
}

/// Concatenates per-query result lists in query order and drops
/// documents whose URL already appeared earlier in the round.
fn merge_results(per_query: Vec<Vec<Document>>) -> Vec<Document> {
    let mut seen: HashSet<String> = HashSet::new();
    let mut merged = Vec::new();
    for list in per_query {
        for doc in list {
            if seen.insert(doc.url.clone()) {
                merged.push(doc);
            }
        }
    }
    merged
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::serialize_action;
    use crate::backends::ScriptedBackend;
    use crate::dataset::{Category, QuestionId};
    use crate::search::{NoopSearch, SimCorpus, SimDoc, SimSearch};

    fn record(id: &str) -> QARecord {
        QARecord {
            id: QuestionId::new(id),
            question: "测试问题".into(),
            solution: "答案".into(),
            checklist: vec![],
            category: Category::Other,
            difficulty: None,
            language: "zh".into(),
        }
    }

    fn corpus() -> SimSearch {
        SimSearch::new(SimCorpus {
            docs: vec![
                SimDoc {
                    doc_id: "d1".into(),
                    title: "相关 alpha".into(),
                    content: "alpha 的内容".into(),
                    tags: vec![],
                },
                SimDoc {
                    doc_id: "d2".into(),
                    title: "也相关 alpha".into(),
                    content: "alpha 其他内容".into(),
                    tags: vec![],
                },
            ],
            noise_ratio: 0.0,
            conflict_sets: vec![],
            seed: 1,
            content_char_budget: 2000,
        })
    }

    fn search_turn(queries: &[&str]) -> String {
        serialize_action(
            "思考",
            &Action::Search {
                queries: queries.iter().map(|q| q.to_string()).collect(),
            },
        )
    }

    fn answer_turn(text: &str) -> String {
        serialize_action("思考", &Action::Answer { text: text.into() })
    }

    #[test]
    fn immediate_answer_gives_one_round_no_search() {
        let model = ScriptedBackend::single_record("r1", vec![answer_turn("直接回答")]);
        let traj = run_episode(&record("r1"), &model, &NoopSearch, &AgentConfig::default());
        assert_eq!(traj.rounds.len(), 1);
        assert!(!traj.used_search);
        assert_eq!(traj.terminated_by, TerminatedBy::Answered);
        assert_eq!(traj.final_answer.as_deref(), Some("直接回答"));
    }

    #[test]
    fn seven_searches_hit_round_cap_without_answer() {
        let turns: Vec<String> = (0..7).map(|_| search_turn(&["alpha"])).collect();
        let model = ScriptedBackend::single_record("r1", turns);
        let traj = run_episode(&record("r1"), &model, &corpus(), &AgentConfig::default());
        assert_eq!(traj.terminated_by, TerminatedBy::RoundCapExceeded);
        assert_eq!(traj.rounds.len(), 7);
        assert!(traj.final_answer.is_none());
        assert!(traj.used_search);
        // The capped round issued no retrieval.
        assert!(traj.rounds[6].documents.is_empty());
    }

    #[test]
    fn search_then_answer_replays_transcript() {
        let turns = vec![search_turn(&["alpha"]), answer_turn("最终回答")];
        let model = ScriptedBackend::single_record("r1", turns.clone());
        let search = corpus();
        let traj = run_episode(&record("r1"), &model, &search, &AgentConfig::default());
        assert_eq!(traj.rounds.len(), 2);
        assert!(traj.used_search);
        assert_eq!(traj.terminated_by, TerminatedBy::Answered);

        let round1 = &traj.rounds[0];
        let backend_docs = search.search(&["alpha".to_string()], 2).unwrap();
        assert_eq!(round1.documents, super::merge_results(backend_docs));

        // Transcript equals prompt + turn1 + docs turn + turn2,
        // reconstructed independently of the episode loop.
        let expected: String = {
            let mut s = render_agent_prompt("测试问题");
            s.push_str(&turns[0]);
            let doc_spans = render_documents_turn(&round1.documents);
            for span in &doc_spans {
                s.push_str(&span.text);
            }
            s.push_str(&turns[1]);
            s
        };
        assert_eq!(traj.transcript(), expected);
    }

    #[test]
    fn parse_failure_terminates_episode() {
        let model = ScriptedBackend::single_record("r1", vec!["no tags".into()]);
        let traj = run_episode(&record("r1"), &model, &NoopSearch, &AgentConfig::default());
        assert_eq!(traj.terminated_by, TerminatedBy::ParseFailure);
        assert!(traj.rounds.is_empty());
        assert!(traj.final_answer.is_none());
        assert!(!traj.warnings.is_empty());
    }

    #[test]
    fn missing_script_surfaces_as_backend_error() {
        let model = ScriptedBackend::single_record("other", vec![answer_turn("x")]);
        let traj = run_episode(&record("r1"), &model, &NoopSearch, &AgentConfig::default());
        assert_eq!(traj.terminated_by, TerminatedBy::BackendError);
    }

    #[test]
    fn scripted_episode_is_deterministic() {
        let turns = vec![search_turn(&["alpha", "beta"]), answer_turn("答")];
        let record = record("r1");
        let run = || {
            let model = ScriptedBackend::single_record("r1", turns.clone());
            run_episode(&record, &model, &corpus(), &AgentConfig::default())
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn duplicate_urls_deduplicated_within_round() {
        // Both queries hit the same corpus docs; merged round keeps one
        // copy of each URL.
        let turns = vec![search_turn(&["alpha", "alpha 内容"]), answer_turn("答")];
        let model = ScriptedBackend::single_record("r1", turns);
        let traj = run_episode(&record("r1"), &model, &corpus(), &AgentConfig::default());
        let urls: Vec<&str> = traj.rounds[0]
            .documents
            .iter()
            .map(|d| d.url.as_str())
            .collect();
        let mut unique = urls.clone();
        unique.sort();
        unique.dedup();
        assert_eq!(urls.len(), unique.len());
    }

    #[test]
    fn disabled_search_forces_answer_retry_then_parse_failure() {
        let opts = EpisodeOptions {
            attempt: 1,
            search_enabled: false,
        };
        // Complies after the retry nudge.
        let model = ScriptedBackend::single_record(
            "r1",
            vec![search_turn(&["q"]), answer_turn("服从")],
        );
        let traj = run_episode_opts(
            &record("r1"),
            &model,
            &NoopSearch,
            &AgentConfig::default(),
            opts,
        );
        assert_eq!(traj.terminated_by, TerminatedBy::Answered);
        assert_eq!(traj.final_answer.as_deref(), Some("服从"));
        assert!(traj.rounds[0].documents.is_empty());

        // Keeps searching: episode fails.
        let model = ScriptedBackend::single_record(
            "r1",
            vec![search_turn(&["q"]), search_turn(&["q2"])],
        );
        let traj = run_episode_opts(
            &record("r1"),
            &model,
            &NoopSearch,
            &AgentConfig::default(),
            opts,
        );
        assert_eq!(traj.terminated_by, TerminatedBy::ParseFailure);
    }

    #[test]
    fn answered_iff_final_answer_present() {
        for turns in [
            vec![answer_turn("a")],
            vec![search_turn(&["alpha"]), answer_turn("b")],
            vec![search_turn(&["alpha"]); 7],
            vec!["garbage".to_string()],
        ] {
            let model = ScriptedBackend::single_record("r1", turns);
            let traj = run_episode(&record("r1"), &model, &corpus(), &AgentConfig::default());
            assert_eq!(
                traj.terminated_by == TerminatedBy::Answered,
                traj.final_answer.is_some()
            );
        }
    }
}
