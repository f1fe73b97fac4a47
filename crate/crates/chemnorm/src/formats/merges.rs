//! Merges file: `#bpe-merges v1`, then one `left right` merge per line in
//! training order.
//!
//! Files written here carry a second header line `#base-chars` listing the
//! base alphabet (space-separated), so that characters never involved in a
//! merge survive a round trip. Files without it take the base alphabet from
//! the merges alone.

use std::collections::BTreeSet;

use chemnorm_core::bpe::{MergeTable, SymbolPair};

pub const HEADER: &str = "#bpe-merges v1";
const BASE_PREFIX: &str = "#base-chars";

pub fn format_merges(table: &MergeTable) -> String {
    let mut out = String::from(HEADER);
    out.push('\n');
    out.push_str(BASE_PREFIX);
    for c in table.base_chars() {
        out.push(' ');
        out.push(*c);
    }
    out.push('\n');
    for m in table.merges() {
        out.push_str(&m.left);
        out.push(' ');
        out.push_str(&m.right);
        out.push('\n');
    }
    out
}

pub fn parse_merges(text: &str) -> Result<MergeTable, String> {
    let mut lines = text.lines().enumerate().peekable();
    match lines.next() {
        Some((_, l)) if l.trim_end() == HEADER => {}
        _ => return Err(format!("line 1: expected header {HEADER:?}")),
    }
    let mut base = BTreeSet::new();
    if let Some((_, l)) = lines.peek() {
        if let Some(rest) = l.strip_prefix(BASE_PREFIX) {
            for field in rest.split(' ').filter(|f| !f.is_empty()) {
                let mut chars = field.chars();
                match (chars.next(), chars.next()) {
                    (Some(c), None) => {
                        base.insert(c);
                    }
                    _ => return Err(format!("line 2: bad base character {field:?}")),
                }
            }
            lines.next();
        }
    }
    let mut merges = Vec::new();
    for (i, line) in lines {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(' ').collect();
        if fields.len() != 2 {
            return Err(format!("line {}: expected \"left right\"", i + 1));
        }
        merges.push(SymbolPair::new(fields[0], fields[1]).map_err(|e| format!("line {}: {e}", i + 1))?);
    }
    MergeTable::new(base, merges).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;
    use chemnorm_core::bpe::train_bpe;

    #[test]
    fn round_trip_keeps_unmerged_characters() {
        let table = train_bpe(&["aaab", "xyz q"], 2).unwrap();
        let text = format_merges(&table);
        assert!(text.starts_with("#bpe-merges v1\n#base-chars a b q x y z\n"));
        assert_eq!(parse_merges(&text).unwrap(), table);
    }

    #[test]
    fn plain_files_are_accepted() {
        let t = parse_merges("#bpe-merges v1\na a\naa b\n").unwrap();
        assert_eq!(t.merges().len(), 2);
        assert_eq!(t.base_chars().len(), 2);
    }

    #[test]
    fn rejects_bad_files() {
        assert!(parse_merges("a b\n").is_err());
        assert!(parse_merges("#bpe-merges v1\na b c\n").unwrap_err().contains("line 2"));
        assert!(parse_merges("#bpe-merges v1\na b\na b\n").is_err());
    }
}
