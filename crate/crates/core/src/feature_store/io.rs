//! Text formats for datasets, schema sidecars and feedback lists.
//!
//! Dataset file: comma separated, `#` starts a comment line, a header row
//! `id,category,word_1:M_1,...,word_W:M_W`, then one item per row:
//! `id,category,v_1_1..v_1_M1,v_2_1..`.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Dataset, FeatureSchema, FeedbackSet, Item};
use crate::error::{Error, Result};

fn header_tokens(schema: &FeatureSchema) -> Vec<String> {
    let mut out = vec!["id".to_string(), "category".to_string()];
    out.extend(
        schema
            .dims()
            .iter()
            .enumerate()
            .map(|(c, d)| format!("word_{}:{}", c + 1, d)),
    );
    out
}

fn parse_header(fields: &[&str], line: usize) -> Result<FeatureSchema> {
    if fields.len() < 3 || fields[0] != "id" || fields[1] != "category" {
        return Err(Error::Parse {
            line,
            message: "expected header `id,category,word_1:<dim>,...`".into(),
        });
    }
    let dims = fields[2..]
        .iter()
        .enumerate()
        .map(|(c, tok)| {
            let (name, dim) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line,
                message: format!("malformed schema token `{tok}`"),
            })?;
            if name != format!("word_{}", c + 1) {
                return Err(Error::Parse {
                    line,
                    message: format!("expected `word_{}`, found `{name}`", c + 1),
                });
            }
            dim.parse::<usize>().map_err(|_| Error::Parse {
                line,
                message: format!("bad dimension in `{tok}`"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    FeatureSchema::new(dims).map_err(|e| match e {
        Error::Schema { message, .. } => Error::Schema {
            line: Some(line),
            message,
        },
        other => other,
    })
}

/// Reads only the header of a dataset file and returns the schema it names.
pub fn read_header_schema(path: &Path) -> Result<FeatureSchema> {
    let mut rdr = open_csv(path)?;
    match rdr.records().next() {
        Some(rec) => {
            let rec = rec.map_err(|e| csv_error(path, e))?;
            let line = rec.position().map_or(1, |p| p.line() as usize);
            let fields: Vec<&str> = rec.iter().map(str::trim).collect();
            parse_header(&fields, line)
        }
        None => Err(Error::EmptyDataset),
    }
}

fn open_csv(path: &Path) -> Result<csv::Reader<File>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .from_reader(file))
}

fn csv_error(path: &Path, e: csv::Error) -> Error {
    let line = e.position().map_or(0, |p| p.line() as usize);
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::Parse {
            line,
            message: format!("{other:?}"),
        },
    }
}

/// Loads and validates a dataset file against `schema`. Row order is kept.
pub fn load_dataset(path: impl AsRef<Path>, schema: &FeatureSchema) -> Result<Dataset> {
    let path = path.as_ref();
    let mut rdr = open_csv(path)?;
    let mut records = rdr.records();

    let header = match records.next() {
        Some(rec) => rec.map_err(|e| csv_error(path, e))?,
        None => return Err(Error::EmptyDataset),
    };
    let header_line = header.position().map_or(1, |p| p.line() as usize);
    let fields: Vec<&str> = header.iter().map(str::trim).collect();
    let named = parse_header(&fields, header_line)?;
    if named != *schema {
        return Err(Error::Schema {
            line: Some(header_line),
            message: format!(
                "header names dims {:?}, schema expects {:?}",
                named.dims(),
                schema.dims()
            ),
        });
    }

    let expected = 2 + schema.total_dim();
    let mut items = Vec::new();
    for rec in records {
        let rec = rec.map_err(|e| csv_error(path, e))?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.len() != expected {
            return Err(Error::Schema {
                line: Some(line),
                message: format!("expected {expected} values, found {}", rec.len()),
            });
        }
        let features = rec
            .iter()
            .skip(2)
            .map(|tok| {
                let v: f64 = tok.trim().parse().map_err(|_| Error::Parse {
                    line,
                    message: format!("`{}` is not a number", tok.trim()),
                })?;
                if v.is_finite() {
                    Ok(v)
                } else {
                    Err(Error::Parse {
                        line,
                        message: format!("non-finite value `{}`", tok.trim()),
                    })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        items.push(Item::from_flat(
            rec[0].trim(),
            rec[1].trim(),
            features,
            schema,
        )?);
    }
    if items.is_empty() {
        return Err(Error::EmptyDataset);
    }
    Dataset::new(schema.clone(), items)
}

/// Writes `dataset` with its header. Each entry of `comments` becomes a `# ` line.
pub fn write_dataset(path: impl AsRef<Path>, dataset: &Dataset, comments: &[String]) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    let io = |e| Error::io(path, e);
    for c in comments {
        writeln!(out, "# {c}").map_err(io)?;
    }
    writeln!(out, "{}", header_tokens(dataset.schema()).join(",")).map_err(io)?;
    let mut line = String::new();
    for item in dataset.items() {
        line.clear();
        line.push_str(item.id());
        line.push(',');
        line.push_str(item.category());
        for v in item.features() {
            line.push(',');
            line.push_str(&v.to_string());
        }
        writeln!(out, "{line}").map_err(io)?;
    }
    out.flush().map_err(io)
}

/// Reads a `key = value` schema sidecar with keys `word_count` and `dims`.
pub fn load_schema(path: impl AsRef<Path>) -> Result<FeatureSchema> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut word_count = None;
    let mut dims = None;
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let (key, value) = trimmed.split_once('=').ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected `key = value`, found `{trimmed}`"),
        })?;
        let bad = |what: &str| Error::Parse {
            line: line_no,
            message: format!("bad {what} `{}`", value.trim()),
        };
        match key.trim() {
            "word_count" => {
                word_count = Some(value.trim().parse::<usize>().map_err(|_| bad("word_count"))?)
            }
            "dims" => {
                dims = Some(
                    value
                        .split(',')
                        .map(|t| t.trim().parse::<usize>())
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(|_| bad("dims"))?,
                )
            }
            other => {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("unknown key `{other}`"),
                })
            }
        }
    }
    let dims = dims.ok_or_else(|| Error::Schema {
        line: None,
        message: "schema sidecar lacks `dims`".into(),
    })?;
    if let Some(w) = word_count {
        if w != dims.len() {
            return Err(Error::Schema {
                line: None,
                message: format!("word_count = {w} but {} dims listed", dims.len()),
            });
        }
    }
    FeatureSchema::new(dims)
}

pub fn write_schema(path: impl AsRef<Path>, schema: &FeatureSchema, comments: &[String]) -> Result<()> {
    let path = path.as_ref();
    let mut text = String::new();
    for c in comments {
        text.push_str(&format!("# {c}\n"));
    }
    text.push_str(&format!("word_count = {}\n", schema.word_count()));
    let dims: Vec<String> = schema.dims().iter().map(usize::to_string).collect();
    text.push_str(&format!("dims = {}\n", dims.join(",")));
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Reads a feedback list: one item id per line, optionally followed by a
/// relevance weight (comma, tab or space separated). Missing weights are 1.
pub fn read_feedback(path: impl AsRef<Path>) -> Result<FeedbackSet> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut positives = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut parts = trimmed
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty());
        let id = parts.next().unwrap_or_default();
        let weight = parts.next();
        if id == "id" && positives.is_empty() && matches!(weight, None | Some("weight")) {
            continue;
        }
        let weight = match weight {
            Some(w) => w.parse::<f64>().map_err(|_| Error::Parse {
                line: i + 1,
                message: format!("bad weight `{w}`"),
            })?,
            None => 1.0,
        };
        if parts.next().is_some() {
            return Err(Error::Parse {
                line: i + 1,
                message: "expected `id[,weight]`".into(),
            });
        }
        positives.push((id.to_string(), weight));
    }
    FeedbackSet::new(positives, Vec::new())
}
