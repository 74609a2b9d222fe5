//! Token-level provenance masks. Spans are tokenized independently so
//! tokens can never straddle a provenance boundary; the mask marks
//! exactly the model-generated positions.

use super::{Provenance, Trajectory};
use crate::error::ProvenanceError;

/// A lossless tokenizer: concatenating the tokens of a span must
/// reproduce the span text exactly.
pub trait Tokenization {
    fn tokenize(&self, text: &str) -> Vec<String>;
}

/// Splits runs of whitespace, CJK characters (one token each), and
/// other characters. Lossless by construction.
#[derive(Debug, Default, Clone, Copy)]
pub struct CharClassTokenizer;

fn char_class(c: char) -> u8 {
    if c.is_whitespace() {
        0
    } else if (c as u32) >= 0x2E80 {
        // CJK and beyond: one token per char.
        1
    } else {
        2
    }
}

impl Tokenization for CharClassTokenizer {
    fn tokenize(&self, text: &str) -> Vec<String> {
        let mut tokens = Vec::new();
        let mut current = String::new();
        let mut current_class = None;
        for c in text.chars() {
            let class = char_class(c);
            let breaks = current_class != Some(class) || class == 1;
            if breaks && !current.is_empty() {
                tokens.push(std::mem::take(&mut current));
            }
            current.push(c);
            current_class = Some(class);
        }
        if !current.is_empty() {
            tokens.push(current);
        }
        tokens
    }
}

/// Builds the per-token loss mask for a trajectory: true exactly for
/// tokens inside model-generated spans.
pub fn provenance_mask(
    trajectory: &Trajectory,
    tokenizer: &dyn Tokenization,
) -> Result<Vec<bool>, ProvenanceError> {
    let mut mask = Vec::new();
    for (span_index, span) in trajectory.token_spans.iter().enumerate() {
        let tokens = tokenizer.tokenize(&span.text);
        let reconstructed: String = tokens.concat();
        if reconstructed != span.text {
            return Err(ProvenanceError::SpanAlignment { span_index });
        }
        let generated = span.provenance == Provenance::ModelGenerated;
        mask.extend(std::iter::repeat(generated).take(tokens.len()));
    }
    Ok(mask)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::agent::{TerminatedBy, TokenSpan};
    use crate::dataset::QuestionId;

    fn trajectory(spans: Vec<TokenSpan>) -> Trajectory {
        Trajectory {
            record_id: QuestionId::new("t"),
            rounds: vec![],
            final_answer: None,
            terminated_by: TerminatedBy::Answered,
            token_spans: spans,
            used_search: false,
            warnings: vec![],
        }
    }

    #[test]
    fn tokenizer_is_lossless() {
        let t = CharClassTokenizer;
        for text in ["hello  world", "中文词语 mixed text", "", "a\nb\tc", "。，！"] {
            assert_eq!(t.tokenize(text).concat(), text);
        }
    }

    #[test]
    fn mask_without_retrieved_spans() {
        let traj = trajectory(vec![
            TokenSpan::new("prompt text ", Provenance::Prompt),
            TokenSpan::new("model reply", Provenance::ModelGenerated),
        ]);
        let mask = provenance_mask(&traj, &CharClassTokenizer).unwrap();
        let prompt_tokens = CharClassTokenizer.tokenize("prompt text ").len();
        let model_tokens = CharClassTokenizer.tokenize("model reply").len();
        assert_eq!(mask.len(), prompt_tokens + model_tokens);
        assert!(mask[..prompt_tokens].iter().all(|m| !m));
        assert!(mask[prompt_tokens..].iter().all(|m| *m));
    }

    #[test]
    fn retrieved_span_contributes_exactly_its_token_count_as_false() {
        let traj = trajectory(vec![
            TokenSpan::new("gen one", Provenance::ModelGenerated),
            TokenSpan::new("doc doc doc", Provenance::Retrieved),
            TokenSpan::new("gen two", Provenance::ModelGenerated),
        ]);
        let mask = provenance_mask(&traj, &CharClassTokenizer).unwrap();
        let n_doc = CharClassTokenizer.tokenize("doc doc doc").len();
        let falses = mask.iter().filter(|m| !**m).count();
        assert_eq!(falses, n_doc);
    }

    #[test]
    fn three_span_mask_matches_hand_enumeration() {
        // "ab cd" -> [ab][ ][cd]; "中文" -> [中][文]; "x y" -> [x][ ][y]
        let traj = trajectory(vec![
            TokenSpan::new("ab cd", Provenance::Prompt),
            TokenSpan::new("中文", Provenance::ModelGenerated),
            TokenSpan::new("x y", Provenance::Retrieved),
        ]);
        let mask = provenance_mask(&traj, &CharClassTokenizer).unwrap();
        assert_eq!(
            mask,
            vec![false, false, false, true, true, false, false, false]
        );
    }

    struct LossyTokenizer;
    impl Tokenization for LossyTokenizer {
        fn tokenize(&self, text: &str) -> Vec<String> {
            text.split_whitespace().map(str::to_string).collect()
        }
    }

    #[test]
    fn lossy_tokenizer_raises_span_alignment() {
        let traj = trajectory(vec![TokenSpan::new("a b", Provenance::Prompt)]);
        assert_eq!(
            provenance_mask(&traj, &LossyTokenizer),
            Err(ProvenanceError::SpanAlignment { span_index: 0 })
        );
    }

    #[test]
    fn spans_concatenate_to_transcript() {
        let traj = trajectory(vec![
            TokenSpan::new("头部", Provenance::Prompt),
            TokenSpan::new("回答", Provenance::ModelGenerated),
        ]);
        assert_eq!(traj.transcript(), "头部回答");
    }
}
