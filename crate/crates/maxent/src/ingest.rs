//! Load raw price tables, synchronize across assets, and binarize
//! open-to-close returns into a [`SignPanel`].
//!
//! CSV contract (long format): header `timestamp,asset,open,close`, one row
//! per (timestamp, asset). Wide format `timestamp,<asset>_open,<asset>_close,...`
//! is auto-detected by header.

use std::collections::{BTreeMap, HashSet};
use std::path::Path;

use crate::core::SignPanel;
use crate::error::{MaxentError, Result};

/// One asset's (timestamp, open, close) rows, timestamps strictly increasing.
#[derive(Debug, Clone)]
pub struct PriceTable {
    pub asset: String,
    pub rows: Vec<PriceRow>,
}

#[derive(Debug, Clone)]
pub struct PriceRow {
    pub timestamp: String,
    pub open: f64,
    pub close: f64,
}

impl PriceTable {
    pub fn new(asset: String, rows: Vec<PriceRow>) -> Result<Self> {
        for (idx, row) in rows.iter().enumerate() {
            if !(row.open > 0.0) || !(row.close > 0.0) {
                return Err(MaxentError::NonPositivePrice {
                    line: idx + 1,
                    value: if row.open <= 0.0 { row.open } else { row.close },
                });
            }
            if idx > 0 && rows[idx - 1].timestamp >= row.timestamp {
                return Err(MaxentError::NonMonotoneTimestamp { line: idx + 1 });
            }
        }
        Ok(PriceTable { asset, rows })
    }
}

/// Parse a price CSV (long or wide format, auto-detected) into one
/// [`PriceTable`] per asset, ordered by first appearance in the file.
pub fn load_price_tables<P: AsRef<Path>>(path: P) -> Result<Vec<PriceTable>> {
    let content = std::fs::read_to_string(path)?;
    parse_price_csv(&content)
}

/// Parse price CSV content; see module docs for the format contract.
pub fn parse_price_csv(content: &str) -> Result<Vec<PriceTable>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(content.as_bytes());
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| MaxentError::ParseError {
            line: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(|h| h.to_string())
        .collect();

    if headers == ["timestamp", "asset", "open", "close"] {
        parse_long(reader)
    } else if is_wide_header(&headers) {
        parse_wide(reader, &headers)
    } else {
        Err(MaxentError::ParseError {
            line: 1,
            message: format!(
                "unrecognized header {:?}; expected `timestamp,asset,open,close` or \
                 `timestamp,<asset>_open,<asset>_close,...`",
                headers.join(",")
            ),
        })
    }
}

fn is_wide_header(headers: &[String]) -> bool {
    if headers.first().map(String::as_str) != Some("timestamp") || headers.len() < 3 {
        return false;
    }
    let rest = &headers[1..];
    if rest.len() % 2 != 0 {
        return false;
    }
    rest.chunks(2).all(|pair| {
        match (pair[0].strip_suffix("_open"), pair[1].strip_suffix("_close")) {
            (Some(a), Some(b)) => a == b && !a.is_empty(),
            _ => false,
        }
    })
}

fn parse_price(field: &str, line: usize, column: &str) -> Result<f64> {
    field.parse::<f64>().map_err(|_| MaxentError::ParseError {
        line,
        message: format!("column `{column}`: cannot parse `{field}` as a price"),
    })
}

fn parse_long(mut reader: csv::Reader<&[u8]>) -> Result<Vec<PriceTable>> {
    // Asset order = first appearance; per-asset rows in file order.
    let mut order: Vec<String> = Vec::new();
    let mut rows_by_asset: BTreeMap<String, Vec<PriceRow>> = BTreeMap::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2; // header is line 1
        let record = record.map_err(|e| MaxentError::ParseError {
            line,
            message: e.to_string(),
        })?;
        if record.len() != 4 {
            return Err(MaxentError::ParseError {
                line,
                message: format!("expected 4 fields, got {}", record.len()),
            });
        }
        let timestamp = record[0].to_string();
        let asset = record[1].to_string();
        let open = parse_price(&record[2], line, "open")?;
        let close = parse_price(&record[3], line, "close")?;
        if !(open > 0.0) {
            return Err(MaxentError::NonPositivePrice { line, value: open });
        }
        if !(close > 0.0) {
            return Err(MaxentError::NonPositivePrice { line, value: close });
        }
        if !rows_by_asset.contains_key(&asset) {
            order.push(asset.clone());
        }
        let rows = rows_by_asset.entry(asset).or_default();
        if let Some(last) = rows.last() {
            if last.timestamp >= timestamp {
                return Err(MaxentError::NonMonotoneTimestamp { line });
            }
        }
        rows.push(PriceRow {
            timestamp,
            open,
            close,
        });
    }
    if order.is_empty() {
        return Err(MaxentError::ParseError {
            line: 2,
            message: "file contains no data rows".into(),
        });
    }
    order
        .into_iter()
        .map(|asset| {
            let rows = rows_by_asset.remove(&asset).expect("asset recorded");
            PriceTable::new(asset, rows)
        })
        .collect()
}

fn parse_wide(mut reader: csv::Reader<&[u8]>, headers: &[String]) -> Result<Vec<PriceTable>> {
    let assets: Vec<String> = headers[1..]
        .chunks(2)
        .map(|pair| pair[0].strip_suffix("_open").unwrap().to_string())
        .collect();
    let mut rows: Vec<Vec<PriceRow>> = vec![Vec::new(); assets.len()];
    let mut prev_timestamp: Option<String> = None;
    let mut any = false;
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| MaxentError::ParseError {
            line,
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(MaxentError::ParseError {
                line,
                message: format!("expected {} fields, got {}", headers.len(), record.len()),
            });
        }
        let timestamp = record[0].to_string();
        if let Some(prev) = &prev_timestamp {
            if *prev >= timestamp {
                return Err(MaxentError::NonMonotoneTimestamp { line });
            }
        }
        prev_timestamp = Some(timestamp.clone());
        any = true;
        for (a, asset_rows) in rows.iter_mut().enumerate() {
            let open = parse_price(&record[1 + 2 * a], line, &headers[1 + 2 * a])?;
            let close = parse_price(&record[2 + 2 * a], line, &headers[2 + 2 * a])?;
            if !(open > 0.0) {
                return Err(MaxentError::NonPositivePrice { line, value: open });
            }
            if !(close > 0.0) {
                return Err(MaxentError::NonPositivePrice { line, value: close });
            }
            asset_rows.push(PriceRow {
                timestamp: timestamp.clone(),
                open,
                close,
            });
        }
    }
    if !any {
        return Err(MaxentError::ParseError {
            line: 2,
            message: "file contains no data rows".into(),
        });
    }
    assets
        .into_iter()
        .zip(rows)
        .map(|(asset, rows)| PriceTable::new(asset, rows))
        .collect()
}

/// Remove every timestamp that is missing from at least one table, so all
/// outputs share an identical timestamp set. Ordering is preserved.
pub fn synchronize_panel(tables: &[PriceTable]) -> Result<Vec<PriceTable>> {
    if tables.is_empty() {
        return Err(MaxentError::InvalidInput(
            "synchronize needs at least one table".into(),
        ));
    }
    let mut common: HashSet<&str> = tables[0]
        .rows
        .iter()
        .map(|r| r.timestamp.as_str())
        .collect();
    for table in &tables[1..] {
        let set: HashSet<&str> = table.rows.iter().map(|r| r.timestamp.as_str()).collect();
        common.retain(|t| set.contains(t));
    }
    if common.is_empty() {
        return Err(MaxentError::EmptyIntersection);
    }
    tables
        .iter()
        .map(|table| {
            let rows = table
                .rows
                .iter()
                .filter(|r| common.contains(r.timestamp.as_str()))
                .cloned()
                .collect();
            PriceTable::new(table.asset.clone(), rows)
        })
        .collect()
}

/// Binarize synchronized open-to-close returns: s = +1 if close >= open
/// (ties resolve to +1), -1 otherwise.
pub fn binarize_returns(tables: &[PriceTable]) -> Result<SignPanel> {
    if tables.is_empty() {
        return Err(MaxentError::InvalidInput(
            "binarize needs at least one table".into(),
        ));
    }
    let times: Vec<String> = tables[0].rows.iter().map(|r| r.timestamp.clone()).collect();
    for table in tables {
        let t: Vec<&str> = table.rows.iter().map(|r| r.timestamp.as_str()).collect();
        if t.len() != times.len() || t.iter().zip(&times).any(|(a, b)| *a != b.as_str()) {
            return Err(MaxentError::UnsynchronizedInput(format!(
                "asset {} has a different timestamp set; run synchronize first",
                table.asset
            )));
        }
    }
    let assets = tables.iter().map(|t| t.asset.clone()).collect();
    let rows: Vec<Vec<i8>> = tables
        .iter()
        .map(|table| {
            table
                .rows
                .iter()
                .map(|r| if r.close >= r.open { 1 } else { -1 })
                .collect()
        })
        .collect();
    SignPanel::from_rows(assets, times, &rows)
}
