//! Vocabulary file: one lower-case word per line, sorted, with an optional
//! tab-separated frequency column.

use chemnorm_core::fuzzy::Lexicon;

pub fn format_lexicon(lexicon: &Lexicon) -> String {
    let mut out = String::new();
    for (word, freq) in lexicon.entries() {
        out.push_str(word);
        out.push('\t');
        out.push_str(&freq.to_string());
        out.push('\n');
    }
    out
}

/// Words without a frequency column count once. Blank lines are skipped.
pub fn parse_lexicon(text: &str) -> Result<Lexicon, String> {
    let mut entries = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split('\t');
        let word = fields.next().unwrap_or_default().trim();
        let freq = match fields.next() {
            None => 1,
            Some(f) => f
                .trim()
                .parse::<u64>()
                .map_err(|_| format!("line {}: bad frequency {f:?}", i + 1))?,
        };
        if fields.next().is_some() {
            return Err(format!("line {}: expected at most two fields", i + 1));
        }
        if word.is_empty() || word.chars().any(char::is_whitespace) {
            return Err(format!("line {}: bad word {word:?}", i + 1));
        }
        entries.push((word.to_string(), freq));
    }
    Ok(Lexicon::from_entries(entries))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip() {
        let lex = Lexicon::from_entries([("methyl", 7), ("Chloro", 3), ("benzene", 1)]);
        let text = format_lexicon(&lex);
        assert_eq!(text, "benzene\t1\nchloro\t3\nmethyl\t7\n");
        assert_eq!(parse_lexicon(&text).unwrap(), lex);
    }

    #[test]
    fn frequency_is_optional() {
        let lex = parse_lexicon("ethane\n\nmethane\t4\n").unwrap();
        assert_eq!(lex.entries(), &[("ethane".to_string(), 1), ("methane".to_string(), 4)]);
    }

    #[test]
    fn errors_name_the_line() {
        assert!(parse_lexicon("a\t1\nb\tx\n").unwrap_err().contains("line 2"));
        assert!(parse_lexicon("a\t1\t2\n").unwrap_err().contains("line 1"));
    }
}
