//! Feature tables as CSV and ARFF.
//!
//! CSV layout: `participant_id,instance_id,<features...>,label`. Nominal
//! values are written as level names. The CSV header carries no types, so
//! parsing infers them: `gender` keeps its fixed levels, other columns are
//! numeric when every value parses as a number and nominal (sorted levels)
//! otherwise. ARFF carries types and the granularity (in the relation name)
//! explicitly.

use std::collections::BTreeSet;
use std::io::{BufRead, BufReader, Read, Write};

use gazemark_core::features::{FeatureColumn, FeatureSet, FeatureTable, FeatureType, FeatureValue, FeatureVector, Granularity};
use gazemark_core::ingest::{Gender, Label};
use thiserror::Error;

use super::fmt_f64;

#[derive(Debug, Error)]
pub enum TableError {
    #[error("refusing to export an empty feature table")]
    EmptyTable,
    #[error("feature table line {line}: {reason}")]
    Parse { line: u64, reason: String },
    #[error("unreadable feature CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn parse_err(line: u64, reason: impl Into<String>) -> TableError {
    TableError::Parse { line, reason: reason.into() }
}

/// File stem `features_<set>_<granularity>`.
pub fn table_stem(set: FeatureSet, granularity: Granularity) -> String {
    format!("features_{}_{}", set.as_str(), granularity.as_str())
}

/// Recovers (set, granularity) from a name produced by [`table_stem`].
pub fn parse_table_stem(stem: &str) -> Option<(FeatureSet, Granularity)> {
    let rest = stem.strip_prefix("features_")?;
    let (set, g) = rest.rsplit_once('_')?;
    Some((set.parse().ok()?, g.parse().ok()?))
}

fn cell(v: FeatureValue, ty: &FeatureType) -> String {
    match (v, ty) {
        (FeatureValue::Nominal(l), FeatureType::Nominal(levels)) => levels[l].clone(),
        (v, _) => fmt_f64(v.as_f64()),
    }
}

pub fn write_table_csv<W: Write>(out: W, t: &FeatureTable) -> Result<(), TableError> {
    if t.rows.is_empty() {
        return Err(TableError::EmptyTable);
    }
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["participant_id", "instance_id"];
    header.extend(t.schema.iter().map(|c| c.name.as_str()));
    header.push("label");
    w.write_record(&header)?;
    for r in &t.rows {
        let mut rec = vec![r.participant_id.clone(), r.instance_id.clone()];
        rec.extend(r.values.iter().zip(&t.schema).map(|(&v, c)| cell(v, &c.ty)));
        rec.push(r.label.as_str().into());
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn gender_levels() -> Vec<String> {
    Gender::ALL.iter().map(|g| g.as_str().to_string()).collect()
}

fn parse_value(s: &str, ty: &FeatureType, line: u64, name: &str) -> Result<FeatureValue, TableError> {
    match ty {
        FeatureType::Numeric => {
            let v: f64 = if s == "inf" { f64::INFINITY } else { s.parse().map_err(|_| parse_err(line, format!("{name}: `{s}` is not a number")))? };
            Ok(FeatureValue::Numeric(v))
        }
        FeatureType::Nominal(levels) => levels
            .iter()
            .position(|l| l == s)
            .map(FeatureValue::Nominal)
            .ok_or_else(|| parse_err(line, format!("{name}: `{s}` is not one of its levels"))),
    }
}

fn parse_label(s: &str, line: u64) -> Result<Label, TableError> {
    s.parse().map_err(|_| parse_err(line, format!("label `{s}` is neither ADHD nor NonADHD")))
}

pub fn parse_table_csv<R: Read>(input: R, granularity: Granularity) -> Result<FeatureTable, TableError> {
    let mut reader = csv::Reader::from_reader(input);
    let headers: Vec<String> = reader.headers()?.iter().map(|h| h.trim().to_string()).collect();
    let n = headers.len();
    if n < 3 || headers[0] != "participant_id" || headers[1] != "instance_id" || headers[n - 1] != "label" {
        return Err(parse_err(1, "header must be participant_id,instance_id,<features>,label"));
    }
    let mut raw: Vec<(u64, csv::StringRecord)> = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() != n {
            return Err(parse_err(rec.position().map_or(0, |p| p.line()), format!("expected {n} fields, found {}", rec.len())));
        }
        raw.push((rec.position().map_or(0, |p| p.line()), rec));
    }
    let schema: Vec<FeatureColumn> = (2..n - 1)
        .map(|j| {
            let name = headers[j].clone();
            let ty = if name == "gender" {
                FeatureType::Nominal(gender_levels())
            } else if raw.iter().all(|(_, r)| r[j] == *"inf" || r[j].parse::<f64>().is_ok()) {
                FeatureType::Numeric
            } else {
                FeatureType::Nominal(raw.iter().map(|(_, r)| r[j].to_string()).collect::<BTreeSet<_>>().into_iter().collect())
            };
            FeatureColumn { name, ty }
        })
        .collect();
    let mut rows = Vec::with_capacity(raw.len());
    for (line, r) in &raw {
        let values =
            schema.iter().enumerate().map(|(j, c)| parse_value(&r[j + 2], &c.ty, *line, &c.name)).collect::<Result<Vec<_>, _>>()?;
        rows.push(FeatureVector { participant_id: r[0].to_string(), instance_id: r[1].to_string(), values, label: parse_label(&r[n - 1], *line)? });
    }
    Ok(FeatureTable { schema, rows, granularity })
}

fn arff_quote(s: &str) -> String {
    if !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) {
        s.to_string()
    } else {
        format!("'{}'", s.replace('\\', "\\\\").replace('\'', "\\'"))
    }
}

/// ARFF export. `relation` should be a [`table_stem`] so the granularity
/// survives a round trip.
pub fn write_table_arff<W: Write>(mut out: W, t: &FeatureTable, relation: &str) -> Result<(), TableError> {
    if t.rows.is_empty() {
        return Err(TableError::EmptyTable);
    }
    writeln!(out, "@relation {}", arff_quote(relation))?;
    writeln!(out)?;
    writeln!(out, "@attribute participant_id string")?;
    writeln!(out, "@attribute instance_id string")?;
    for c in &t.schema {
        match &c.ty {
            FeatureType::Numeric => writeln!(out, "@attribute {} numeric", arff_quote(&c.name))?,
            FeatureType::Nominal(levels) => {
                let l: Vec<String> = levels.iter().map(|l| arff_quote(l)).collect();
                writeln!(out, "@attribute {} {{{}}}", arff_quote(&c.name), l.join(","))?
            }
        }
    }
    writeln!(out, "@attribute label {{ADHD,NonADHD}}")?;
    writeln!(out)?;
    writeln!(out, "@data")?;
    for r in &t.rows {
        let mut f = vec![arff_quote(&r.participant_id), arff_quote(&r.instance_id)];
        f.extend(r.values.iter().zip(&t.schema).map(|(&v, c)| arff_quote(&cell(v, &c.ty))));
        f.push(r.label.as_str().into());
        writeln!(out, "{}", f.join(","))?;
    }
    Ok(())
}

/// Splits on unquoted commas, unquoting single- or double-quoted tokens.
fn split_arff(line: &str) -> Result<Vec<String>, String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = line.chars().peekable();
    let mut quote: Option<char> = None;
    let mut quoted_token = false;
    while let Some(c) = chars.next() {
        match quote {
            Some(q) => match c {
                '\\' => cur.push(chars.next().ok_or("dangling escape")?),
                c if c == q => quote = None,
                c => cur.push(c),
            },
            None => match c {
                '\'' | '"' if cur.trim().is_empty() => {
                    cur.clear();
                    quote = Some(c);
                    quoted_token = true;
                }
                ',' => {
                    out.push(if quoted_token { std::mem::take(&mut cur) } else { cur.trim().to_string() });
                    cur.clear();
                    quoted_token = false;
                }
                c => cur.push(c),
            },
        }
    }
    if quote.is_some() {
        return Err("unterminated quote".into());
    }
    out.push(if quoted_token { cur } else { cur.trim().to_string() });
    Ok(out)
}

/// Splits `@attribute <name> <type>` into name and type text.
fn attribute_parts(rest: &str) -> Result<(String, String), String> {
    let rest = rest.trim_start();
    if let Some(q) = rest.chars().next().filter(|c| *c == '\'' || *c == '"') {
        let mut name = String::new();
        let mut it = rest[1..].char_indices();
        while let Some((i, c)) = it.next() {
            match c {
                '\\' => name.push(it.next().ok_or("dangling escape")?.1),
                c if c == q => return Ok((name, rest[i + 2..].trim().to_string())),
                c => name.push(c),
            }
        }
        Err("unterminated attribute name".into())
    } else {
        let (name, ty) = rest.split_once(char::is_whitespace).ok_or("attribute without type")?;
        Ok((name.to_string(), ty.trim().to_string()))
    }
}

enum AttrType {
    String,
    Numeric,
    Nominal(Vec<String>),
}

pub fn parse_table_arff<R: Read>(input: R) -> Result<FeatureTable, TableError> {
    let mut relation = None;
    let mut attrs: Vec<(String, AttrType)> = Vec::new();
    let mut data_rows: Vec<(u64, Vec<String>)> = Vec::new();
    let mut in_data = false;
    for (i, line) in BufReader::new(input).lines().enumerate() {
        let line_no = i as u64 + 1;
        let line = line?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        if in_data {
            data_rows.push((line_no, split_arff(t).map_err(|e| parse_err(line_no, e))?));
            continue;
        }
        let lower = t.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            let name = split_arff(t["@relation".len()..].trim()).map_err(|e| parse_err(line_no, e))?;
            relation = name.into_iter().next();
        } else if lower.starts_with("@attribute") {
            let (name, ty) = attribute_parts(&t["@attribute".len()..]).map_err(|e| parse_err(line_no, e))?;
            let ty_l = ty.to_ascii_lowercase();
            let ty = if ty_l == "string" {
                AttrType::String
            } else if ty_l == "numeric" || ty_l == "real" || ty_l == "integer" {
                AttrType::Numeric
            } else if ty.starts_with('{') && ty.ends_with('}') {
                AttrType::Nominal(split_arff(&ty[1..ty.len() - 1]).map_err(|e| parse_err(line_no, e))?)
            } else {
                return Err(parse_err(line_no, format!("unsupported attribute type `{ty}`")));
            };
            attrs.push((name, ty));
        } else if lower == "@data" {
            in_data = true;
        } else {
            return Err(parse_err(line_no, format!("unexpected header line `{t}`")));
        }
    }
    let granularity = relation
        .as_deref()
        .and_then(parse_table_stem)
        .map(|(_, g)| g)
        .ok_or_else(|| parse_err(1, "relation name must be features_<set>_<granularity>"))?;
    let n = attrs.len();
    let shape_ok = n >= 3
        && attrs[0].0 == "participant_id"
        && attrs[1].0 == "instance_id"
        && attrs[n - 1].0 == "label"
        && matches!(attrs[0].1, AttrType::String)
        && matches!(attrs[1].1, AttrType::String);
    if !shape_ok {
        return Err(parse_err(1, "attributes must be participant_id, instance_id, <features>, label"));
    }
    let schema: Vec<FeatureColumn> = attrs[2..n - 1]
        .iter()
        .map(|(name, ty)| match ty {
            AttrType::Numeric => Ok(FeatureColumn { name: name.clone(), ty: FeatureType::Numeric }),
            AttrType::Nominal(l) => Ok(FeatureColumn { name: name.clone(), ty: FeatureType::Nominal(l.clone()) }),
            AttrType::String => Err(parse_err(1, format!("string attribute {name} cannot be a feature"))),
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::with_capacity(data_rows.len());
    for (line, f) in data_rows {
        if f.len() != n {
            return Err(parse_err(line, format!("expected {n} values, found {}", f.len())));
        }
        let values = schema.iter().enumerate().map(|(j, c)| parse_value(&f[j + 2], &c.ty, line, &c.name)).collect::<Result<Vec<_>, _>>()?;
        rows.push(FeatureVector { participant_id: f[0].clone(), instance_id: f[1].clone(), values, label: parse_label(&f[n - 1], line)? });
    }
    Ok(FeatureTable { schema, rows, granularity })
}
