//! Agent record encoding: one record per agent, as JSON lines or CSV.
//!
//! Schema: `{"id": <int>, "u": [<m reals>], "order": "1>4>2=3", "cell":
//! "Facet|Edge|Vertex|Other|Indifference"}`. Utility coordinates are the
//! canonical sphere representative, written with 17 significant digits so
//! decoding reproduces the exact doubles; the indifference point is stored
//! as the zero vector. Mallows populations carry no `u` field. CSV files
//! hold the same fields (`id,u1..um,order,cell`), with no quoting needed:
//! order strings only contain digits, `>` and `=`.

use serde::Deserialize;

use utilgeo::{
    canonicalize, cell_kind, to_order, PreferenceOrder, RawUtility, Sample, UtilityPoint,
    DEFAULT_TIE_TOL,
};

/// 17 significant digits: enough for exact f64 round-trips.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum FileFormat {
    Jsonl,
    Csv,
}

/// One agent as written to disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Record {
    pub id: u64,
    pub u: Option<Vec<f64>>,
    pub order: String,
    pub cell: String,
}

fn cell_label(o: &PreferenceOrder) -> String {
    if o.tier_count() == 1 && o.m() > 1 {
        "Indifference".to_string()
    } else {
        cell_kind(o).to_string()
    }
}

impl Record {
    pub fn from_sample(id: u64, sample: &Sample) -> Self {
        match sample {
            Sample::Utility(p) => {
                let order = to_order(p, DEFAULT_TIE_TOL);
                let cell = if p.is_indifference() {
                    "Indifference".to_string()
                } else {
                    cell_kind(&order).to_string()
                };
                Record {
                    id,
                    u: Some(p.coords_or_zero()),
                    order: order.to_string(),
                    cell,
                }
            }
            Sample::Ranking(o) => Record {
                id,
                u: None,
                order: o.to_string(),
                cell: cell_label(o),
            },
        }
    }

    pub fn to_jsonl(&self) -> String {
        let mut line = format!("{{\"id\":{}", self.id);
        if let Some(u) = &self.u {
            line.push_str(",\"u\":[");
            for (i, x) in u.iter().enumerate() {
                if i > 0 {
                    line.push(',');
                }
                line.push_str(&fmt17(*x));
            }
            line.push(']');
        }
        line.push_str(&format!(
            ",\"order\":\"{}\",\"cell\":\"{}\"}}",
            self.order, self.cell
        ));
        line
    }

    pub fn to_csv(&self) -> String {
        let mut fields = vec![self.id.to_string()];
        if let Some(u) = &self.u {
            fields.extend(u.iter().map(|x| fmt17(*x)));
        }
        fields.push(self.order.clone());
        fields.push(self.cell.clone());
        fields.join(",")
    }

    /// The point this record encodes, when it has coordinates. Canonical
    /// vectors (what `generate` writes) are taken verbatim so decoding is
    /// bit-exact; anything else, including the zero vector standing for
    /// the indifference point, goes through canonicalization.
    pub fn utility_point(&self) -> Result<Option<UtilityPoint>, String> {
        match &self.u {
            None => Ok(None),
            Some(u) => {
                if let Ok(p) = UtilityPoint::from_canonical(u.clone()) {
                    return Ok(Some(p));
                }
                let raw = RawUtility::new(u.clone()).map_err(|e| e.to_string())?;
                Ok(Some(canonicalize(&raw)))
            }
        }
    }
}

pub fn csv_header(m: usize, with_u: bool) -> String {
    let mut fields = vec!["id".to_string()];
    if with_u {
        fields.extend((1..=m).map(|i| format!("u{i}")));
    }
    fields.push("order".to_string());
    fields.push("cell".to_string());
    fields.join(",")
}

#[derive(Deserialize)]
struct JsonRecord {
    id: u64,
    #[serde(default)]
    u: Option<Vec<f64>>,
    order: String,
    #[serde(default)]
    cell: Option<String>,
}

/// Parses a whole population file, sniffing JSONL vs CSV from the first
/// non-empty line.
pub fn parse_population(content: &str) -> Result<Vec<Record>, String> {
    let first = content.lines().find(|l| !l.trim().is_empty());
    match first {
        None => Ok(vec![]),
        Some(l) if l.trim_start().starts_with('{') => parse_jsonl(content),
        Some(_) => parse_csv(content),
    }
}

fn parse_jsonl(content: &str) -> Result<Vec<Record>, String> {
    let mut out = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonRecord = serde_json::from_str(line)
            .map_err(|e| format!("line {}: {e}", lineno + 1))?;
        out.push(Record {
            id: rec.id,
            u: rec.u,
            order: rec.order,
            cell: rec.cell.unwrap_or_default(),
        });
    }
    Ok(out)
}

fn parse_csv(content: &str) -> Result<Vec<Record>, String> {
    let mut lines = content.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or("empty csv")?;
    let cols: Vec<&str> = header.split(',').collect();
    if cols.first() != Some(&"id") || cols.last() != Some(&"cell") {
        return Err(format!("unrecognized csv header {header:?}"));
    }
    let with_u = cols.iter().any(|c| c.starts_with('u'));
    let m = if with_u { cols.len() - 3 } else { 0 };
    let mut out = Vec::new();
    for (lineno, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != cols.len() {
            return Err(format!(
                "line {}: expected {} fields, got {}",
                lineno + 2,
                cols.len(),
                fields.len()
            ));
        }
        let id: u64 = fields[0]
            .parse()
            .map_err(|e| format!("line {}: bad id: {e}", lineno + 2))?;
        let u = if with_u {
            let mut coords = Vec::with_capacity(m);
            for f in &fields[1..=m] {
                coords.push(
                    f.parse::<f64>()
                        .map_err(|e| format!("line {}: bad coordinate: {e}", lineno + 2))?,
                );
            }
            Some(coords)
        } else {
            None
        };
        out.push(Record {
            id,
            u,
            order: fields[cols.len() - 2].to_string(),
            cell: fields[cols.len() - 1].to_string(),
        });
    }
    Ok(out)
}

/// Set file for `sumcheck`: JSON lines that are either bare arrays of
/// reals or objects with a `u` field (i.e. generated population records).
pub fn parse_vector_set(content: &str) -> Result<Vec<UtilityPoint>, String> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Line {
        Bare(Vec<f64>),
        Object(JsonRecord),
    }
    let mut out = Vec::new();
    for (lineno, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let parsed: Line =
            serde_json::from_str(line).map_err(|e| format!("line {}: {e}", lineno + 1))?;
        let values = match parsed {
            Line::Bare(v) => v,
            Line::Object(r) => r
                .u
                .ok_or_else(|| format!("line {}: record has no utility vector", lineno + 1))?,
        };
        let raw = RawUtility::new(values).map_err(|e| format!("line {}: {e}", lineno + 1))?;
        out.push(canonicalize(&raw));
    }
    Ok(out)
}
