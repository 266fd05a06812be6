//! CSV formats shared between the library and the command-line tool.
//!
//! All emitted files have a header row, UTF-8 text, LF line endings, floats
//! printed with nine significant digits, and booleans as `0`/`1`. Readers
//! validate the exact header they expect so a mis-shaped file fails loudly
//! instead of silently parsing the wrong column.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::fit::{ChoiceRecord, FitResult, GoodnessOfFit, LikelihoodRatioTest};
use crate::inference::{QualityEstimate, VoteLedger};
use crate::normalize::NormalizationStats;
use crate::simulate::CheckpointEstimate;
use crate::stability::PhasePoint;

/// Format with nine significant digits, in the shortest decimal notation
/// that round-trips the rounded value.
pub fn fmt_sig(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 || x.abs() < 1e-300 {
        return "0".to_string();
    }
    let exponent = x.abs().log10().floor() as i32;
    let scale = 10f64.powi(8 - exponent);
    let rounded = (x * scale).round() / scale;
    format!("{rounded}")
}

fn check_header(actual: &csv::StringRecord, expected: &[&str]) -> Result<()> {
    let actual: Vec<&str> = actual.iter().map(str::trim).collect();
    if actual != expected {
        return Err(Error::CsvField {
            row: 0,
            context: format!(
                "expected header {:?}, found {:?}",
                expected.join(","),
                actual.join(",")
            ),
        });
    }
    Ok(())
}

fn field(record: &csv::StringRecord, idx: usize, row: usize) -> Result<&str> {
    record.get(idx).map(str::trim).ok_or(Error::CsvField {
        row,
        context: format!("missing column {idx}"),
    })
}

fn parse_u64(text: &str, row: usize, name: &str) -> Result<u64> {
    text.parse().map_err(|_| Error::CsvField {
        row,
        context: format!("{name}: expected a non-negative integer, found {text:?}"),
    })
}

fn parse_f64(text: &str, row: usize, name: &str) -> Result<f64> {
    text.parse().map_err(|_| Error::CsvField {
        row,
        context: format!("{name}: expected a number, found {text:?}"),
    })
}

fn parse_bool01(text: &str, row: usize, name: &str) -> Result<bool> {
    match text {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(Error::CsvField {
            row,
            context: format!("{name}: expected 0 or 1, found {other:?}"),
        }),
    }
}

/// Read `question_id,guess` rows. A guess cell that is not a number comes
/// back as NaN so the cleaning step counts it among the removed entries
/// rather than aborting the whole file.
pub fn read_guess_csv<R: Read>(reader: R) -> Result<Vec<(String, f64)>> {
    let mut csv = csv::Reader::from_reader(reader);
    check_header(csv.headers()?, &["question_id", "guess"])?;
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let id = field(&record, 0, row)?.to_owned();
        let guess = field(&record, 1, row)?.parse().unwrap_or(f64::NAN);
        rows.push((id, guess));
    }
    Ok(rows)
}

/// Write `question_id,mean_log,std_log,n` rows.
pub fn write_stats_csv<W: Write>(
    mut writer: W,
    rows: &[(String, NormalizationStats)],
) -> Result<()> {
    writeln!(writer, "question_id,mean_log,std_log,n")?;
    for (id, stats) in rows {
        writeln!(
            writer,
            "{id},{},{},{}",
            fmt_sig(stats.mean_log),
            fmt_sig(stats.std_log),
            stats.n
        )?;
    }
    Ok(())
}

/// Read `answer_id,n_t,N_t,n_b,N_b` ledger rows.
pub fn read_ledger_csv<R: Read>(reader: R) -> Result<Vec<(String, VoteLedger)>> {
    let mut csv = csv::Reader::from_reader(reader);
    check_header(csv.headers()?, &["answer_id", "n_t", "N_t", "n_b", "N_b"])?;
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let row = i + 1;
        let id = field(&record, 0, row)?.to_owned();
        let ledger = VoteLedger::new(
            parse_u64(field(&record, 1, row)?, row, "n_t")?,
            parse_u64(field(&record, 2, row)?, row, "N_t")?,
            parse_u64(field(&record, 3, row)?, row, "n_b")?,
            parse_u64(field(&record, 4, row)?, row, "N_b")?,
        )?;
        rows.push((id, ledger));
    }
    Ok(rows)
}

/// Write `answer_id,q_hat,rank_first` inference rows.
pub fn write_inference_csv<W: Write>(
    mut writer: W,
    rows: &[(String, QualityEstimate)],
) -> Result<()> {
    writeln!(writer, "answer_id,q_hat,rank_first")?;
    for (id, estimate) in rows {
        writeln!(
            writer,
            "{id},{},{}",
            fmt_sig(estimate.q_hat),
            u8::from(estimate.rank_first)
        )?;
    }
    Ok(())
}

/// Read `a_first,a_last,chose_first` choice rows (booleans as 0/1).
pub fn read_choice_csv<R: Read>(reader: R) -> Result<Vec<ChoiceRecord>> {
    let mut csv = csv::Reader::from_reader(reader);
    check_header(csv.headers()?, &["a_first", "a_last", "chose_first"])?;
    let mut rows = Vec::new();
    for (i, record) in csv.records().enumerate() {
        let record = record?;
        let row = i + 1;
        rows.push(ChoiceRecord {
            a_first: parse_f64(field(&record, 0, row)?, row, "a_first")?,
            a_last: parse_f64(field(&record, 1, row)?, row, "a_last")?,
            chose_first: parse_bool01(field(&record, 2, row)?, row, "chose_first")?,
        });
    }
    Ok(rows)
}

/// One experiment output row: a checkpoint estimate in its policy context.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub policy: String,
    pub a_worst: f64,
    pub estimate: CheckpointEstimate,
}

/// Write `policy,a_worst,checkpoint,prob_best_first,ci_low,ci_high` rows.
pub fn write_experiment_csv<W: Write>(mut writer: W, rows: &[ExperimentRow]) -> Result<()> {
    writeln!(
        writer,
        "policy,a_worst,checkpoint,prob_best_first,ci_low,ci_high"
    )?;
    for row in rows {
        writeln!(
            writer,
            "{},{},{},{},{},{}",
            row.policy,
            fmt_sig(row.a_worst),
            row.estimate.votes,
            fmt_sig(row.estimate.prob_best_first),
            fmt_sig(row.estimate.ci_low),
            fmt_sig(row.estimate.ci_high)
        )?;
    }
    Ok(())
}

/// Write `p,a_worst,stable` phase-diagram rows (stable as 0/1).
pub fn write_phase_csv<W: Write>(mut writer: W, points: &[PhasePoint]) -> Result<()> {
    writeln!(writer, "p,a_worst,stable")?;
    for point in points {
        writeln!(
            writer,
            "{},{},{}",
            fmt_sig(point.p),
            fmt_sig(point.a_worst),
            u8::from(point.stable)
        )?;
    }
    Ok(())
}

/// Everything the fit pipeline produces for one dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub fit: FitResult,
    pub lr_position_bias_zero: LikelihoodRatioTest,
    pub lr_random_choice_zero: LikelihoodRatioTest,
    pub lr_both_zero: LikelihoodRatioTest,
    pub goodness_of_fit: Option<GoodnessOfFit>,
}

/// Write the one-row fit report. Goodness-of-fit columns are left empty when
/// the check was not run.
pub fn write_fit_report_csv<W: Write>(mut writer: W, report: &FitReport) -> Result<()> {
    writeln!(
        writer,
        "n,p_hat,r_hat,log_likelihood,p_err,r_err,degenerate,\
         lr_p_zero_stat,lr_p_zero_pvalue,lr_r_zero_stat,lr_r_zero_pvalue,\
         lr_both_stat,lr_both_pvalue,gof_pvalue,gof_agrees"
    )?;
    let (gof_pvalue, gof_agrees) = match &report.goodness_of_fit {
        Some(gof) => (fmt_sig(gof.p_value), u8::from(gof.agrees).to_string()),
        None => (String::new(), String::new()),
    };
    writeln!(
        writer,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{gof_pvalue},{gof_agrees}",
        report.fit.n,
        fmt_sig(report.fit.p_hat),
        fmt_sig(report.fit.r_hat),
        fmt_sig(report.fit.log_likelihood),
        fmt_sig(report.fit.p_err),
        fmt_sig(report.fit.r_err),
        u8::from(report.fit.degenerate),
        fmt_sig(report.lr_position_bias_zero.statistic),
        fmt_sig(report.lr_position_bias_zero.p_value),
        fmt_sig(report.lr_random_choice_zero.statistic),
        fmt_sig(report.lr_random_choice_zero.p_value),
        fmt_sig(report.lr_both_zero.statistic),
        fmt_sig(report.lr_both_zero.p_value),
    )?;
    Ok(())
}
