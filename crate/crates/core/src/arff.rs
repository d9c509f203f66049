//! Reader and writer for the dense ARFF subset used by ASlib scenario files.
//!
//! Supported: `@RELATION`, `@ATTRIBUTE name type` with `NUMERIC`/`REAL`/`INTEGER`,
//! `STRING` and nominal `{a, b, c}` types, `@DATA` followed by comma-separated rows,
//! `?` for missing cells and `%` comment lines. Keywords are case-insensitive and
//! names or values may be single- or double-quoted.

use std::fmt::Write as _;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum AttributeKind {
    Numeric,
    Text,
    Nominal(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribute {
    pub name: String,
    pub kind: AttributeKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Missing,
    Number(f64),
    Text(String),
}

impl Value {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Number(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_missing(&self) -> bool {
        matches!(self, Value::Missing)
    }
}

/// In-memory contents of an ARFF file.
#[derive(Debug, Clone, PartialEq)]
pub struct RelationTable {
    pub relation: String,
    pub attributes: Vec<Attribute>,
    pub rows: Vec<Vec<Value>>,
}

impl RelationTable {
    /// Index of the attribute called `name`, compared case-insensitively.
    pub fn column(&self, name: &str) -> Option<usize> {
        self.attributes
            .iter()
            .position(|a| a.name.eq_ignore_ascii_case(name))
    }
}

fn parse_error(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Splits on `sep` outside of quotes, trimming each token and stripping its quotes.
fn split_quoted(text: &str, sep: char, line: usize) -> Result<Vec<(String, bool)>> {
    let mut out = Vec::new();
    let mut current = String::new();
    let mut quoted = false;
    let mut quote: Option<char> = None;
    let mut chars = text.chars().peekable();
    while let Some(c) = chars.next() {
        match quote {
            Some(q) if c == '\\' => {
                if let Some(&next) = chars.peek() {
                    if next == q || next == '\\' {
                        current.push(next);
                        chars.next();
                        continue;
                    }
                }
                current.push(c);
            }
            Some(q) if c == q => quote = None,
            Some(_) => current.push(c),
            None if c == '\'' || c == '"' => {
                if !current.trim().is_empty() {
                    return Err(parse_error(line, "quote inside unquoted value"));
                }
                current.clear();
                quote = Some(c);
                quoted = true;
            }
            None if c == sep => {
                out.push(finish_token(&current, quoted));
                current.clear();
                quoted = false;
            }
            None if quoted => {
                if !c.is_whitespace() {
                    return Err(parse_error(line, "text after closing quote"));
                }
            }
            None => current.push(c),
        }
    }
    if quote.is_some() {
        return Err(parse_error(line, "unterminated quote"));
    }
    out.push(finish_token(&current, quoted));
    Ok(out)
}

fn finish_token(raw: &str, quoted: bool) -> (String, bool) {
    if quoted {
        (raw.to_string(), true)
    } else {
        (raw.trim().to_string(), false)
    }
}

/// Splits off the first (possibly quoted) word of `text`.
fn take_word(text: &str, line: usize) -> Result<(String, &str)> {
    let text = text.trim_start();
    let mut chars = text.char_indices();
    match chars.next() {
        None => Err(parse_error(line, "expected a name")),
        Some((_, q)) if q == '\'' || q == '"' => {
            let end = text[1..]
                .find(q)
                .ok_or_else(|| parse_error(line, "unterminated quoted name"))?;
            Ok((text[1..1 + end].to_string(), &text[end + 2..]))
        }
        Some(_) => {
            let end = text
                .find(|c: char| c.is_whitespace() || c == '{')
                .unwrap_or(text.len());
            Ok((text[..end].to_string(), &text[end..]))
        }
    }
}

fn parse_attribute(rest: &str, line: usize) -> Result<Attribute> {
    let (name, rest) = take_word(rest, line)?;
    let type_spec = rest.trim();
    if type_spec.is_empty() {
        return Err(parse_error(line, format!("attribute `{name}` has no type")));
    }
    let kind = if let Some(inner) = type_spec.strip_prefix('{') {
        let inner = inner
            .strip_suffix('}')
            .ok_or_else(|| parse_error(line, "unterminated nominal specification"))?;
        let values = split_quoted(inner, ',', line)?
            .into_iter()
            .map(|(v, _)| v)
            .collect();
        AttributeKind::Nominal(values)
    } else {
        match type_spec.to_ascii_lowercase().as_str() {
            "numeric" | "real" | "integer" => AttributeKind::Numeric,
            "string" => AttributeKind::Text,
            other => {
                return Err(parse_error(
                    line,
                    format!("unsupported attribute type `{other}`"),
                ))
            }
        }
    };
    Ok(Attribute { name, kind })
}

fn parse_cell(token: &str, quoted: bool, attribute: &Attribute, line: usize) -> Result<Value> {
    if !quoted && token == "?" {
        return Ok(Value::Missing);
    }
    match &attribute.kind {
        AttributeKind::Numeric => {
            let x: f64 = token.parse().map_err(|_| {
                parse_error(
                    line,
                    format!(
                        "cannot parse `{token}` as a number for `{}`",
                        attribute.name
                    ),
                )
            })?;
            if !x.is_finite() {
                return Err(parse_error(
                    line,
                    format!("non-finite value `{token}` for `{}`", attribute.name),
                ));
            }
            Ok(Value::Number(x))
        }
        AttributeKind::Text | AttributeKind::Nominal(_) => Ok(Value::Text(token.to_string())),
    }
}

/// Parses ARFF text into a [`RelationTable`].
pub fn parse_arff(text: &str) -> Result<RelationTable> {
    let mut relation = None;
    let mut attributes = Vec::new();
    let mut rows = Vec::new();
    let mut in_data = false;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        if in_data {
            let cells = split_quoted(trimmed, ',', line)?;
            if cells.len() != attributes.len() {
                return Err(parse_error(
                    line,
                    format!(
                        "row has {} cells but {} attributes are declared",
                        cells.len(),
                        attributes.len()
                    ),
                ));
            }
            let row = cells
                .iter()
                .zip(&attributes)
                .map(|((token, quoted), attr)| parse_cell(token, *quoted, attr, line))
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
            continue;
        }
        if !trimmed.starts_with('@') {
            return Err(parse_error(line, "expected a header declaration"));
        }
        let keyword_end = trimmed.find(char::is_whitespace).unwrap_or(trimmed.len());
        let keyword = trimmed[..keyword_end].to_ascii_lowercase();
        let rest = &trimmed[keyword_end..];
        match keyword.as_str() {
            "@relation" => {
                let (name, _) = take_word(rest, line)?;
                relation = Some(name);
            }
            "@attribute" => {
                if relation.is_none() {
                    return Err(parse_error(line, "@ATTRIBUTE before @RELATION"));
                }
                attributes.push(parse_attribute(rest, line)?);
            }
            "@data" => {
                if attributes.is_empty() {
                    return Err(parse_error(line, "@DATA without attributes"));
                }
                in_data = true;
            }
            other => return Err(parse_error(line, format!("unknown declaration `{other}`"))),
        }
    }

    let relation = relation.ok_or_else(|| parse_error(1, "missing @RELATION"))?;
    if !in_data {
        return Err(parse_error(
            text.lines().count().max(1),
            "missing @DATA section",
        ));
    }
    Ok(RelationTable {
        relation,
        attributes,
        rows,
    })
}

fn needs_quotes(s: &str) -> bool {
    s.is_empty()
        || s == "?"
        || s.chars()
            .any(|c| c.is_whitespace() || matches!(c, ',' | '\'' | '"' | '{' | '}' | '%' | '\\'))
}

fn quote(s: &str) -> String {
    if needs_quotes(s) {
        let escaped = s.replace('\\', "\\\\").replace('\'', "\\'");
        format!("'{escaped}'")
    } else {
        s.to_string()
    }
}

fn format_number(x: f64) -> String {
    // `{}` on f64 is the shortest representation that round-trips.
    format!("{x}")
}

/// Serializes a table back to ARFF text.
pub fn write_arff(table: &RelationTable) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "@RELATION {}", quote(&table.relation));
    out.push('\n');
    for attr in &table.attributes {
        let kind = match &attr.kind {
            AttributeKind::Numeric => "NUMERIC".to_string(),
            AttributeKind::Text => "STRING".to_string(),
            AttributeKind::Nominal(values) => {
                let inner: Vec<String> = values.iter().map(|v| quote(v)).collect();
                format!("{{{}}}", inner.join(","))
            }
        };
        let _ = writeln!(out, "@ATTRIBUTE {} {}", quote(&attr.name), kind);
    }
    out.push_str("\n@DATA\n");
    for row in &table.rows {
        let cells: Vec<String> = row
            .iter()
            .map(|v| match v {
                Value::Missing => "?".to_string(),
                Value::Number(x) => format_number(*x),
                Value::Text(s) => quote(s),
            })
            .collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
