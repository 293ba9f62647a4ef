//! `# key: value` comment lines ahead of a CSV body.

use std::collections::BTreeMap;

/// Splits leading `#` comment lines off `text`. Comments of the form
/// `# key: value` are collected; other comments are dropped.
pub(crate) fn split(text: &str) -> (BTreeMap<String, String>, &str) {
    let mut meta = BTreeMap::new();
    let mut rest = text;
    loop {
        let trimmed = rest.trim_start_matches(['\r', '\n']);
        let Some(comment) = trimmed.strip_prefix('#') else {
            return (meta, trimmed);
        };
        let (line, tail) = comment.split_once('\n').unwrap_or((comment, ""));
        if let Some((k, v)) = line.split_once(':') {
            meta.insert(k.trim().to_string(), v.trim().to_string());
        }
        rest = tail;
    }
}
