//! Seeded mixture selection over (category, difficulty) cells.

use super::{Category, Difficulty, QARecord};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Target counts per (category, difficulty) cell plus the sampling seed.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MixtureSpec {
    pub targets: BTreeMap<(Category, Difficulty), usize>,
    pub seed: u64,
}

/// A cell whose target exceeded the available records.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortfallWarning {
    pub category: Category,
    pub difficulty: Difficulty,
    pub requested: usize,
    pub available: usize,
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x1000_0000_01b3);
    }
    h
}

/// Samples records per cell without replacement, up to each cell's
/// target. Records are sorted by id before the seeded shuffle, so the
/// output is deterministic regardless of input order. Untagged records
/// are never selected. Returns the subset (ordered by id) and one
/// warning per under-filled cell.
pub fn select_mixture(
    records: &[QARecord],
    spec: &MixtureSpec,
) -> (Vec<QARecord>, Vec<ShortfallWarning>) {
    let mut cells: BTreeMap<(Category, Difficulty), Vec<&QARecord>> = BTreeMap::new();
    for record in records {
        if let Some(difficulty) = record.difficulty {
            cells
                .entry((record.category, difficulty))
                .or_default()
                .push(record);
        }
    }

    let mut selected = Vec::new();
    let mut warnings = Vec::new();
    for (&(category, difficulty), &target) in &spec.targets {
        if target == 0 {
            continue;
        }
        let mut pool: Vec<&QARecord> = cells.remove(&(category, difficulty)).unwrap_or_default();
        pool.sort_by(|a, b| a.id.cmp(&b.id));
        if pool.len() < target {
            warnings.push(ShortfallWarning {
                category,
                difficulty,
                requested: target,
                available: pool.len(),
            });
        }
        let cell_key = format!("{}|{}", category.as_str(), difficulty.as_str());
        let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ fnv1a(cell_key.as_bytes()));
        pool.shuffle(&mut rng);
        selected.extend(pool.into_iter().take(target).cloned());
    }
    selected.sort_by(|a, b| a.id.cmp(&b.id));
    (selected, warnings)
}
