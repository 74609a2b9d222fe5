//! Shared HTTP plumbing: dot-path JSON field extraction and backoff
//! schedules.

use serde_json::Value;
use std::time::Duration;

/// Looks up a dot-separated path in a JSON value. Numeric segments
/// index into arrays: `choices.0.message.content`.
pub(crate) fn json_path<'a>(value: &'a Value, path: &str) -> Option<&'a Value> {
    let mut cursor = value;
    for segment in path.split('.') {
        cursor = match cursor {
            Value::Object(map) => map.get(segment)?,
            Value::Array(items) => items.get(segment.parse::<usize>().ok()?)?,
            _ => return None,
        };
    }
    Some(cursor)
}

/// Exponential backoff delays for `max_retries` re-attempts.
pub(crate) fn backoff_delays(max_retries: u32, base: Duration) -> Vec<Duration> {
    (0..max_retries).map(|i| base * 2u32.pow(i)).collect()
}
