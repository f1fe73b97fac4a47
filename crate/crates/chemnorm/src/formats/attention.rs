//! Attention matrix CSV: first row the source tokens, first column the
//! target tokens, cells the weights.

use std::io::Write;

pub fn write_attention_csv<W: Write>(
    out: W,
    source: &[String],
    target: &[String],
    alpha: &[Vec<f64>],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec![String::new()];
    header.extend(source.iter().cloned());
    w.write_record(&header)?;
    for (tok, row) in target.iter().zip(alpha) {
        let mut rec = vec![tok.clone()];
        rec.extend(row.iter().map(|a| a.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn layout() {
        let mut buf = Vec::new();
        let src = vec!["eth@@".to_string(), "ane".to_string()];
        let tgt = vec!["ethane".to_string(), "</s>".to_string()];
        write_attention_csv(&mut buf, &src, &tgt, &[vec![0.75, 0.25], vec![0.5, 0.5]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), ",eth@@,ane\nethane,0.75,0.25\n</s>,0.5,0.5\n");
    }
}
