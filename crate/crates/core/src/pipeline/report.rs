use std::fmt::Write as _;
use std::str::FromStr;

use super::ScanReport;
use crate::error::{Error, Result};
use crate::features::FEATURE_NAMES;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    /// Pretty-printed JSON; parses back into an identical report.
    Json,
    /// Aligned plain text for terminals.
    Table,
    /// One row per suspicious pair.
    Csv,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(ReportFormat::Json),
            "table" => Ok(ReportFormat::Table),
            "csv" => Ok(ReportFormat::Csv),
            other => Err(Error::Usage(format!("unknown report format {other:?} (expected json, table or csv)"))),
        }
    }
}

fn table(r: &ScanReport) -> String {
    let mut s = String::new();
    let t = &r.totals;
    let _ = writeln!(s, "seed        {}", r.seed);
    let _ = writeln!(s, "generated   {}", t.generated);
    let _ = writeln!(
        s,
        "active      {}  suspended {}  not found {}  unresolved {}",
        t.active, t.suspended, t.not_found, t.unresolved
    );
    let _ = writeln!(
        s,
        "classified  {}  suspicious {}  benign {}  post-filtered {}  no face {}",
        r.classified(),
        r.suspicious_pairs.len(),
        r.benign_count,
        r.post_filtered_count,
        r.skipped_no_face
    );
    let hist: Vec<String> = r.ed_histogram.iter().map(|(k, v)| format!("{k}:{v}")).collect();
    let _ = writeln!(s, "ed buckets  {}", hist.join("  "));
    if !r.suspicious_pairs.is_empty() {
        let width = r.suspicious_pairs.iter().map(|p| p.variant.len()).max().unwrap_or(0).max(7);
        let _ = writeln!(s);
        let _ = writeln!(s, "{:<width$}  probability", "variant");
        for p in &r.suspicious_pairs {
            let _ = writeln!(s, "{:<width$}  {:.4}", p.variant, p.probability);
        }
    }
    if !r.post_filtered.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "post-filtered: {}", r.post_filtered.join(", "));
    }
    s
}

fn csv_rows(r: &ScanReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["seed", "variant", "probability"];
    header.extend(FEATURE_NAMES);
    w.write_record(&header)?;
    for p in &r.suspicious_pairs {
        let mut row = vec![r.seed.clone(), p.variant.clone(), format!("{:?}", p.probability)];
        row.extend(p.features.to_array().iter().map(|v| format!("{v:?}")));
        w.write_record(&row)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn report_render(report: &ScanReport, format: ReportFormat) -> Result<String> {
    match format {
        ReportFormat::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
        ReportFormat::Table => Ok(table(report)),
        ReportFormat::Csv => csv_rows(report),
    }
}
