//! Long-format CSV ingestion: `timestamp,building,quantity,value`.

use chrono::{DateTime, NaiveDate, NaiveDateTime};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Quantity {
    P,
    S,
}

impl std::str::FromStr for Quantity {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "P" | "p" => Ok(Quantity::P),
            "S" | "s" => Ok(Quantity::S),
            other => Err(Error::Config(format!("quantity must be P or S, got {other:?}"))),
        }
    }
}

impl std::fmt::Display for Quantity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Quantity::P => "P",
            Quantity::S => "S",
        })
    }
}

/// What to do with blank or `NaN` values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapPolicy {
    #[default]
    Drop,
    InterpolateLinear,
}

impl std::str::FromStr for GapPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "drop" => Ok(GapPolicy::Drop),
            "interpolate-linear" => Ok(GapPolicy::InterpolateLinear),
            other => Err(Error::Config(format!("unknown gap policy {other:?}"))),
        }
    }
}

/// One observed series for a (building, quantity) key, sorted by time.
#[derive(Debug, Clone, PartialEq)]
pub struct RawSeries {
    pub building_id: String,
    pub quantity: Quantity,
    pub timestamps: Vec<NaiveDateTime>,
    pub values: Vec<f64>,
    /// Notes from ingestion (gap handling, irregular spacing).
    pub warnings: Vec<String>,
}

impl RawSeries {
    /// Builds a series, checking finiteness and strictly increasing time.
    pub fn new(
        building_id: impl Into<String>,
        quantity: Quantity,
        timestamps: Vec<NaiveDateTime>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(Error::LengthMismatch {
                expected: timestamps.len(),
                got: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("non-finite value at index {i}")));
        }
        if let Some(w) = timestamps.windows(2).find(|w| w[0] >= w[1]) {
            return Err(Error::Domain(format!(
                "timestamps not strictly increasing at {}",
                w[1]
            )));
        }
        Ok(Self {
            building_id: building_id.into(),
            quantity,
            timestamps,
            values,
            warnings: Vec::new(),
        })
    }

    /// Series on an hourly grid starting at 2000-01-01T00:00.
    pub fn hourly(building_id: impl Into<String>, quantity: Quantity, values: Vec<f64>) -> Result<Self> {
        let start = NaiveDate::from_ymd_opt(2000, 1, 1)
            .and_then(|d| d.and_hms_opt(0, 0, 0))
            .expect("valid date");
        let ts = (0..values.len())
            .map(|i| start + chrono::Duration::hours(i as i64))
            .collect();
        Self::new(building_id, quantity, ts, values)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.values.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, Default)]
pub struct LoadedData {
    /// Ordered by (building, quantity).
    pub series: Vec<RawSeries>,
    pub warnings: Vec<String>,
}

pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.naive_utc());
    }
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M:%S%.f",
        "%Y-%m-%d %H:%M:%S%.f",
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%d %H:%M",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| {
            NaiveDate::parse_from_str(s, "%Y-%m-%d")
                .ok()
                .and_then(|d| d.and_hms_opt(0, 0, 0))
        })
}

fn is_missing(s: &str) -> bool {
    matches!(
        s.trim().to_ascii_lowercase().as_str(),
        "" | "na" | "nan" | "null" | "?"
    )
}

pub fn load_csv(path: impl AsRef<Path>, gaps: GapPolicy) -> Result<LoadedData> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_csv(file, gaps)
}

type Key = (String, Quantity);
type Row = (NaiveDateTime, Option<f64>, u64);

pub fn parse_csv<R: Read>(reader: R, gaps: GapPolicy) -> Result<LoadedData> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(reader);

    let headers = rdr.headers().map_err(|e| Error::Input {
        line: 1,
        message: e.to_string(),
    })?;
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::Input {
                line: 1,
                message: format!(
                    "missing column {name:?}; expected header timestamp,building,quantity,value"
                ),
            })
    };
    let (ti, bi, qi, vi) = (col("timestamp")?, col("building")?, col("quantity")?, col("value")?);

    let mut groups: BTreeMap<Key, Vec<Row>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Input {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let field = |i: usize| rec.get(i).unwrap_or("");
        let ts = parse_timestamp(field(ti)).ok_or_else(|| Error::Input {
            line,
            message: format!("unparsable timestamp {:?}", field(ti)),
        })?;
        let building = field(bi).to_string();
        if building.is_empty() {
            return Err(Error::Input {
                line,
                message: "empty building id".into(),
            });
        }
        let quantity: Quantity = field(qi).parse().map_err(|_| Error::Input {
            line,
            message: format!("quantity must be P or S, got {:?}", field(qi)),
        })?;
        let raw = field(vi);
        let value = if is_missing(raw) {
            None
        } else {
            let v: f64 = raw.parse().map_err(|_| Error::Input {
                line,
                message: format!("unparsable value {raw:?}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Input {
                    line,
                    message: format!("non-finite value {raw:?}"),
                });
            }
            Some(v)
        };
        groups.entry((building, quantity)).or_default().push((ts, value, line));
    }

    let mut out = LoadedData::default();
    for ((building, quantity), mut rows) in groups {
        rows.sort_by_key(|r| r.0);
        if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::Input {
                line: w[1].2,
                message: format!(
                    "duplicate timestamp {} for building {building:?}, quantity {quantity}",
                    w[1].0
                ),
            });
        }
        let label = format!("{building}/{quantity}");
        let (timestamps, values, mut warnings) = apply_gap_policy(&rows, gaps);
        if let Some(msg) = irregular_spacing(&timestamps) {
            warnings.push(msg);
        }
        out.warnings.extend(warnings.iter().map(|w| format!("{label}: {w}")));
        let mut series = RawSeries::new(building, quantity, timestamps, values)?;
        series.warnings = warnings;
        out.series.push(series);
    }
    Ok(out)
}

fn apply_gap_policy(rows: &[Row], gaps: GapPolicy) -> (Vec<NaiveDateTime>, Vec<f64>, Vec<String>) {
    let missing = rows.iter().filter(|r| r.1.is_none()).count();
    let mut warnings = Vec::new();
    if missing == 0 {
        return (
            rows.iter().map(|r| r.0).collect(),
            rows.iter().map(|r| r.1.unwrap_or_default()).collect(),
            warnings,
        );
    }
    match gaps {
        GapPolicy::Drop => {
            warnings.push(format!("dropped {missing} missing value(s)"));
            let kept: Vec<_> = rows.iter().filter_map(|r| r.1.map(|v| (r.0, v))).collect();
            (
                kept.iter().map(|r| r.0).collect(),
                kept.iter().map(|r| r.1).collect(),
                warnings,
            )
        }
        GapPolicy::InterpolateLinear => {
            let known: Vec<usize> = (0..rows.len()).filter(|&i| rows[i].1.is_some()).collect();
            let (Some(&first), Some(&last)) = (known.first(), known.last()) else {
                warnings.push(format!("all {missing} value(s) missing"));
                return (Vec::new(), Vec::new(), warnings);
            };
            let mut ts = Vec::new();
            let mut vs = Vec::new();
            let mut filled = 0;
            let mut k = 0;
            for i in first..=last {
                while known[k + 1..].first().is_some_and(|&j| j <= i) {
                    k += 1;
                }
                let v = match rows[i].1 {
                    Some(v) => v,
                    None => {
                        let (a, b) = (known[k], known[k + 1]);
                        let t = |j: usize| rows[j].0.and_utc().timestamp() as f64;
                        let w = (t(i) - t(a)) / (t(b) - t(a));
                        filled += 1;
                        rows[a].1.unwrap_or_default() * (1.0 - w) + rows[b].1.unwrap_or_default() * w
                    }
                };
                ts.push(rows[i].0);
                vs.push(v);
            }
            if filled > 0 {
                warnings.push(format!("interpolated {filled} missing value(s)"));
            }
            let edge = missing - filled;
            if edge > 0 {
                warnings.push(format!("dropped {edge} missing value(s) at the series edges"));
            }
            (ts, vs, warnings)
        }
    }
}

fn irregular_spacing(ts: &[NaiveDateTime]) -> Option<String> {
    if ts.len() < 3 {
        return None;
    }
    let step = ts[1] - ts[0];
    let irregular = ts.windows(2).filter(|w| w[1] - w[0] != step).count();
    (irregular > 0).then(|| format!("{irregular} irregular time step(s); series treated as equally spaced"))
}

/// Reads one numeric column (the last field of each line). Blank lines and
/// `#` comments are skipped; a non-numeric first line is taken as a header.
pub fn load_values(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_values(BufReader::new(file))
}

pub fn parse_values<R: BufRead>(reader: R) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    let mut seen_data_line = false;
    for (idx, line) in reader.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let field = trimmed.rsplit(',').next().unwrap_or("").trim();
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => out.push(v),
            Ok(_) => {
                return Err(Error::Input {
                    line: idx as u64 + 1,
                    message: format!("non-finite value {field:?}"),
                })
            }
            Err(_) if !seen_data_line => {}
            Err(_) => {
                return Err(Error::Input {
                    line: idx as u64 + 1,
                    message: format!("unparsable value {field:?}"),
                })
            }
        }
        seen_data_line = true;
    }
    Ok(out)
}
