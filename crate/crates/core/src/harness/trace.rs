//! Per-round records and their CSV form.
//!
//! The CSV has exactly the columns `t, mistake, cum_mistakes, log_volume,
//! recompute, wallclock_us`. Flags are written as `0`/`1`; a missing volume
//! surrogate is `NaN`.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 6] = [
    "t",
    "mistake",
    "cum_mistakes",
    "log_volume",
    "recompute",
    "wallclock_us",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: u64,
    /// Context, kept only for small `d`.
    pub x: Option<Vec<f64>>,
    /// Revealed label (or observed loss) in scalar form.
    pub y: f64,
    pub yhat: f64,
    pub mistake: bool,
    pub cum_mistakes: u64,
    pub log_volume: f64,
    pub recompute: bool,
    pub wallclock_us: u64,
    pub binary_updates: u32,
    pub erm_input: Option<usize>,
    pub unknown_piece: bool,
    /// Instantaneous bandit regret; 0 elsewhere.
    pub regret: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trace {
    /// Volume surrogate before the first round (NaN if none).
    pub initial_log_volume: f64,
    pub rounds: Vec<RoundRecord>,
}

/// The six CSV columns of one round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub t: u64,
    pub mistake: u8,
    pub cum_mistakes: u64,
    pub log_volume: f64,
    pub recompute: u8,
    pub wallclock_us: u64,
}

impl Trace {
    pub fn total_mistakes(&self) -> u64 {
        self.rounds.last().map_or(0, |r| r.cum_mistakes)
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    pub fn csv_rows(&self) -> impl Iterator<Item = CsvRow> + '_ {
        self.rounds.iter().map(|r| CsvRow {
            t: r.t,
            mistake: r.mistake as u8,
            cum_mistakes: r.cum_mistakes,
            log_volume: r.log_volume,
            recompute: r.recompute as u8,
            wallclock_us: r.wallclock_us,
        })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
        out.write_record(CSV_HEADER).map_err(csv_err)?;
        for row in self.csv_rows() {
            out.serialize(row).map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }
}

/// Reads the six-column trace CSV back; the header must match exactly.
pub fn read_csv<R: Read>(r: R) -> Result<Vec<CsvRow>> {
    let mut rdr = csv::Reader::from_reader(r);
    let header = rdr.headers().map_err(csv_err)?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(Error::Config(format!("unexpected trace header {header:?}")));
    }
    rdr.deserialize().map(|row| row.map_err(csv_err)).collect()
}

fn csv_err(e: csv::Error) -> Error {
    match e.kind() {
        csv::ErrorKind::Io(_) => Error::Io(e.to_string()),
        _ => Error::Config(format!("malformed trace: {e}")),
    }
}
