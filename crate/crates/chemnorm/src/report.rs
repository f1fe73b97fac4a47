//! Evaluation and training reports: a plain-text summary plus CSV tables.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use chemnorm_core::neural::EpochLog;

use crate::error::{Error, Result};
use crate::pipeline::Evaluation;

pub fn render_text(eval: &Evaluation) -> String {
    let r = &eval.report;
    let b = &r.bleu;
    let mut s = String::new();
    writeln!(s, "examples        {}", r.n_examples).unwrap();
    writeln!(s, "correct         {}", r.n_correct).unwrap();
    writeln!(s, "accuracy        {:.4}", r.accuracy).unwrap();
    writeln!(s, "bleu            {:.2}", b.score).unwrap();
    let p: Vec<String> = b.precisions.iter().map(|x| format!("{x:.4}")).collect();
    writeln!(s, "bleu precisions {}", p.join(" ")).unwrap();
    writeln!(s, "bleu order      {}", b.effective_order).unwrap();
    writeln!(s, "brevity penalty {:.4}", b.brevity_penalty).unwrap();
    if b.zero_precision {
        writeln!(s, "warning         an n-gram order has zero matches; BLEU is 0 (no smoothing)").unwrap();
    }
    writeln!(s, "\naccuracy by reference length (width {})", eval.bucket_width).unwrap();
    for bucket in &eval.by_length {
        writeln!(
            s,
            "  [{:>3}, {:>3})  {:>6}/{:<6} {:.4}",
            bucket.lo,
            bucket.lo + eval.bucket_width,
            bucket.correct,
            bucket.total,
            bucket.accuracy()
        )
        .unwrap();
    }
    writeln!(s, "\ninput-to-reference edit distance").unwrap();
    for (d, n) in &eval.input_distances {
        writeln!(s, "  {d:>3}  {n}").unwrap();
    }
    s
}

fn csv_string<F>(fill: F) -> String
where
    F: FnOnce(&mut csv::Writer<Vec<u8>>) -> csv::Result<()>,
{
    let mut w = csv::Writer::from_writer(Vec::new());
    fill(&mut w).expect("writing to memory");
    String::from_utf8(w.into_inner().expect("flush to memory")).expect("csv of strings is UTF-8")
}

pub fn metrics_csv(eval: &Evaluation) -> String {
    let r = &eval.report;
    csv_string(|w| {
        w.write_record(["metric", "value"])?;
        let mut rows = vec![
            ("examples".to_string(), r.n_examples.to_string()),
            ("correct".to_string(), r.n_correct.to_string()),
            ("accuracy".to_string(), r.accuracy.to_string()),
            ("bleu".to_string(), r.bleu.score.to_string()),
            ("brevity_penalty".to_string(), r.bleu.brevity_penalty.to_string()),
            ("bleu_zero_precision".to_string(), r.bleu.zero_precision.to_string()),
        ];
        for (i, p) in r.bleu.precisions.iter().enumerate() {
            rows.push((format!("precision_{}", i + 1), p.to_string()));
        }
        for (k, v) in rows {
            w.write_record([k, v])?;
        }
        Ok(())
    })
}

pub fn histogram_csv(hist: &BTreeMap<usize, usize>) -> String {
    csv_string(|w| {
        w.write_record(["distance", "count"])?;
        for (d, n) in hist {
            w.write_record([d.to_string(), n.to_string()])?;
        }
        Ok(())
    })
}

pub fn buckets_csv(eval: &Evaluation) -> String {
    csv_string(|w| {
        w.write_record(["length_from", "accuracy"])?;
        for b in &eval.by_length {
            w.write_record([b.lo.to_string(), b.accuracy().to_string()])?;
        }
        Ok(())
    })
}

pub fn examples_csv(eval: &Evaluation) -> String {
    csv_string(|w| {
        w.write_record(["input", "prediction", "reference", "match"])?;
        for r in &eval.rows {
            w.write_record([&r.input, &r.prediction, &r.reference, &r.correct.to_string()])?;
        }
        Ok(())
    })
}

pub fn train_log_csv(log: &[EpochLog]) -> String {
    csv_string(|w| {
        w.write_record(["epoch", "lr", "train_loss", "train_perplexity", "dev_perplexity"])?;
        for e in log {
            w.write_record([
                e.epoch.to_string(),
                e.lr.to_string(),
                e.train_loss.to_string(),
                e.train_perplexity.to_string(),
                e.dev_perplexity.map(|p| p.to_string()).unwrap_or_default(),
            ])?;
        }
        Ok(())
    })
}

pub(crate) fn write_train_log(path: &Path, log: &[EpochLog]) -> Result<()> {
    fs::write(path, train_log_csv(log)).map_err(|e| Error::io(path, e))
}

/// Writes `report.txt`, `metrics.csv`, `examples.csv`, `input_distance.csv`,
/// `output_distance.csv` and `accuracy_by_length.csv` into `dir`.
pub fn save_report(dir: &Path, eval: &Evaluation) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let files = [
        ("report.txt", render_text(eval)),
        ("metrics.csv", metrics_csv(eval)),
        ("examples.csv", examples_csv(eval)),
        ("input_distance.csv", histogram_csv(&eval.input_distances)),
        ("output_distance.csv", histogram_csv(&eval.output_distances)),
        ("accuracy_by_length.csv", buckets_csv(eval)),
    ];
    for (name, text) in files {
        let path = dir.join(name);
        fs::write(&path, text).map_err(|e| Error::io(path, e))?;
    }
    Ok(())
}
