//! Sample files for `estimate`: one row per set, the measured value followed
//! by the `m` tie indicators of that set. A first row whose leading cell is not
//! a number is taken as a header. Blank lines and `#` comments are skipped.

use std::path::Path;

use anyhow::{bail, Context, Result};
use pns_core::{Direction, TieMatrix};

pub fn read(path: &Path, direction: Direction) -> Result<(Vec<f64>, TieMatrix)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse(&text, direction).with_context(|| format!("in {}", path.display()))
}

pub fn parse(text: &str, direction: Direction) -> Result<(Vec<f64>, TieMatrix)> {
    let mut values = Vec::new();
    let mut rows: Vec<Vec<u8>> = Vec::new();
    let mut m = None;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cells: Vec<&str> = line.split([',', '\t', ';']).map(str::trim).collect();
        let Ok(value) = cells[0].parse::<f64>() else {
            if values.is_empty() && m.is_none() {
                m = Some(cells.len() - 1);
                continue;
            }
            bail!("line {}: value {:?} is not a number", i + 1, cells[0]);
        };
        let width = *m.get_or_insert(cells.len() - 1);
        if cells.len() - 1 != width || width == 0 {
            bail!("line {}: expected {} tie columns, found {}", i + 1, width, cells.len() - 1);
        }
        let row = cells[1..]
            .iter()
            .map(|c| match *c {
                "0" => Ok(0u8),
                "1" => Ok(1u8),
                other => bail!("line {}: tie indicator {other:?} is not 0 or 1", i + 1),
            })
            .collect::<Result<Vec<_>>>()?;
        values.push(value);
        rows.push(row);
    }
    let Some(m) = m.filter(|_| !values.is_empty()) else {
        bail!("no sample rows");
    };
    Ok((values, TieMatrix::new(m, direction, rows)?))
}
