//! Reading trace CSVs back and hashing artifact files.

use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

use super::ExperimentError;

/// A trace CSV loaded back into memory.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceTable {
    pub steps: Vec<usize>,
    pub selected: Vec<Option<usize>>,
    pub coords: Vec<Option<Vec<f64>>>,
    pub sigma: Vec<f64>,
    pub stop_reason: Option<String>,
}

impl TraceTable {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// Coordinates of the selected nodes in selection order.
    pub fn points(&self) -> Vec<Vec<f64>> {
        self.coords.iter().flatten().cloned().collect()
    }
}

fn bad(path: &Path, msg: impl std::fmt::Display) -> ExperimentError {
    ExperimentError::Trace(format!("{}: {msg}", path.display()))
}

pub fn read_trace_csv(path: &Path) -> Result<TraceTable, ExperimentError> {
    if !path.is_file() {
        return Err(bad(path, "trace file not found"));
    }
    let mut rdr = csv::Reader::from_path(path).map_err(|e| bad(path, e))?;
    let headers = rdr.headers().map_err(|e| bad(path, e))?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name);
    let (Some(step_c), Some(sel_c), Some(sigma_c), Some(stop_c)) =
        (col("step"), col("selected_id"), col("sigma"), col("stop_reason"))
    else {
        return Err(bad(path, "expected columns step,selected_id,x0,..,sigma,stop_reason"));
    };
    let coord_cols: Vec<usize> = (0..).map_while(|j| col(&format!("x{j}"))).collect();

    let mut t = TraceTable {
        steps: Vec::new(),
        selected: Vec::new(),
        coords: Vec::new(),
        sigma: Vec::new(),
        stop_reason: None,
    };
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(path, e))?;
        let field = |c: usize| rec.get(c).unwrap_or("");
        let parse_err = |what: &str| bad(path, format!("row {}: invalid {what}", line + 1));
        t.steps.push(field(step_c).parse().map_err(|_| parse_err("step"))?);
        t.sigma.push(field(sigma_c).parse().map_err(|_| parse_err("sigma"))?);
        let sel = match field(sel_c) {
            "" => None,
            s => Some(s.parse().map_err(|_| parse_err("selected_id"))?),
        };
        t.selected.push(sel);
        t.coords.push(match sel {
            None => None,
            Some(_) => Some(
                coord_cols
                    .iter()
                    .map(|&c| field(c).parse().map_err(|_| parse_err("coordinate")))
                    .collect::<Result<_, _>>()?,
            ),
        });
        if !field(stop_c).is_empty() {
            t.stop_reason = Some(field(stop_c).to_string());
        }
    }
    if t.is_empty() {
        return Err(bad(path, "trace has no rows"));
    }
    Ok(t)
}

pub fn sha256_file(path: &Path) -> Result<String, ExperimentError> {
    let bytes = fs::read(path).map_err(|e| ExperimentError::io(path, e))?;
    Ok(hex::encode(Sha256::digest(bytes)))
}
