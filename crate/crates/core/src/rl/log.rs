//! Training log rows and their CSV form.

use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// One checkpoint of a training run. `best_Ts`/`best_Tp` are over exact
/// sequences only and empty until one is found.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LogRow {
    pub training_steps: u64,
    pub best_d: f64,
    #[serde(rename = "best_Ts")]
    pub best_ts: Option<f64>,
    #[serde(rename = "best_Tp")]
    pub best_tp: Option<f64>,
    pub wall_seconds: f64,
    pub seed: u64,
}

pub const LOG_COLUMNS: [&str; 6] = [
    "training_steps",
    "best_d",
    "best_Ts",
    "best_Tp",
    "wall_seconds",
    "seed",
];

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainingLog {
    pub rows: Vec<LogRow>,
}

impl TrainingLog {
    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let io = |e: csv::Error| Error::Io(e.to_string());
        let mut wr = csv::Writer::from_writer(w);
        if self.rows.is_empty() {
            wr.write_record(LOG_COLUMNS).map_err(io)?;
        }
        for row in &self.rows {
            wr.serialize(row).map_err(io)?;
        }
        wr.flush().map_err(|e| Error::Io(e.to_string()))
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_to(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv is utf-8")
    }

    pub fn read_from<R: Read>(r: R) -> Result<TrainingLog> {
        let mut rd = csv::Reader::from_reader(r);
        let headers = rd.headers().map_err(|e| Error::Parse(e.to_string()))?;
        if headers.iter().ne(LOG_COLUMNS) {
            return Err(Error::Parse(format!(
                "unexpected training log columns {headers:?}"
            )));
        }
        let rows = rd
            .deserialize()
            .collect::<std::result::Result<Vec<LogRow>, _>>()
            .map_err(|e| Error::Parse(e.to_string()))?;
        Ok(TrainingLog { rows })
    }

    pub fn from_csv(text: &str) -> Result<TrainingLog> {
        Self::read_from(text.as_bytes())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    pub fn last(&self) -> Option<&LogRow> {
        self.rows.last()
    }
}

/// One grid point of a bench curve. The `fw_*`/`inverse_fw_*` columns are the
/// reference times, repeated on every row so plots can draw them as lines.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub steps: u64,
    pub best_d: Option<f64>,
    #[serde(rename = "best_Ts")]
    pub best_ts: Option<f64>,
    #[serde(rename = "best_Tp")]
    pub best_tp: Option<f64>,
    #[serde(rename = "fw_Ts")]
    pub fw_ts: f64,
    #[serde(rename = "inverse_fw_Ts")]
    pub inverse_fw_ts: f64,
    #[serde(rename = "fw_Tp")]
    pub fw_tp: f64,
    #[serde(rename = "inverse_fw_Tp")]
    pub inverse_fw_tp: f64,
    pub seed: u64,
    /// `ok` or the error that stopped the run.
    pub status: String,
}

pub const CURVE_COLUMNS: [&str; 10] = [
    "steps",
    "best_d",
    "best_Ts",
    "best_Tp",
    "fw_Ts",
    "inverse_fw_Ts",
    "fw_Tp",
    "inverse_fw_Tp",
    "seed",
    "status",
];

impl CurveRow {
    pub fn new(steps: u64, seed: u64) -> CurveRow {
        use crate::references::{
            FW_T_PARALLEL, FW_T_SEQUENTIAL, INVERSE_FW_T_PARALLEL, INVERSE_FW_T_SEQUENTIAL,
        };
        CurveRow {
            steps,
            best_d: None,
            best_ts: None,
            best_tp: None,
            fw_ts: FW_T_SEQUENTIAL,
            inverse_fw_ts: INVERSE_FW_T_SEQUENTIAL,
            fw_tp: FW_T_PARALLEL,
            inverse_fw_tp: INVERSE_FW_T_PARALLEL,
            seed,
            status: "ok".into(),
        }
    }
}

pub fn curve_to_csv(rows: &[CurveRow]) -> String {
    let mut wr = csv::Writer::from_writer(Vec::new());
    if rows.is_empty() {
        wr.write_record(CURVE_COLUMNS).expect("writing to memory");
    }
    for r in rows {
        wr.serialize(r).expect("writing to memory");
    }
    String::from_utf8(wr.into_inner().expect("flush to memory")).expect("csv is utf-8")
}

pub fn curve_from_csv(text: &str) -> Result<Vec<CurveRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let headers = rd.headers().map_err(|e| Error::Parse(e.to_string()))?;
    if headers.iter().ne(CURVE_COLUMNS) {
        return Err(Error::Parse(format!(
            "unexpected curve columns {headers:?}"
        )));
    }
    rd.deserialize()
        .collect::<std::result::Result<Vec<CurveRow>, _>>()
        .map_err(|e| Error::Parse(e.to_string()))
}
