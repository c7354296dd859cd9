//! Variant set export: newline-delimited JSON records and a columnar CSV
//! with columns `username,seed,provenance,depth,edit_distance`, where the
//! provenance chain is joined by `+`.

use std::io::{Read, Write};

use super::{GenerationModelId, VariantRecord};
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 5] = ["username", "seed", "provenance", "depth", "edit_distance"];

pub fn write_ndjson<W: Write>(records: &[VariantRecord], mut out: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut out, r)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_ndjson<R: Read>(input: R) -> Result<Vec<VariantRecord>> {
    serde_json::Deserializer::from_reader(input)
        .into_iter::<VariantRecord>()
        .map(|r| r.map_err(Error::from))
        .collect()
}

pub fn write_csv<W: Write>(records: &[VariantRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in records {
        w.write_record([
            r.username.as_str(),
            r.seed.as_str(),
            &r.provenance_label(),
            &r.repetition_depth.to_string(),
            &r.edit_distance.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<VariantRecord>> {
    let mut rd = csv::Reader::from_reader(input);
    let headers = rd.headers()?.clone();
    if headers.iter().ne(CSV_HEADER) {
        return Err(Error::data(format!("unexpected variant csv header: {headers:?}")));
    }
    let mut records = Vec::new();
    for row in rd.records() {
        let row = row?;
        let provenance = row[2]
            .split('+')
            .map(str::parse::<GenerationModelId>)
            .collect::<Result<Vec<_>>>()
            .map_err(|e| Error::data(e.to_string()))?;
        let parse = |i: usize| {
            row[i]
                .parse::<usize>()
                .map_err(|e| Error::data(format!("column {}: {e}", CSV_HEADER[i])))
        };
        records.push(VariantRecord {
            username: row[0].to_string(),
            seed: row[1].to_string(),
            provenance,
            repetition_depth: parse(3)?,
            edit_distance: parse(4)?,
        });
    }
    Ok(records)
}
