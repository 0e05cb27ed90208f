//! Deterministic machine-readable output.
//!
//! Floats always print with 17 significant digits (`{:.16e}`), so reruns of
//! the same command diff byte-for-byte and values survive a parse roundtrip.
//! Object keys keep their insertion order.

use anyhow::{bail, Result};

#[derive(Debug, Clone)]
pub enum JsonValue {
    Bool(bool),
    UInt(u64),
    Float(f64),
    Str(String),
    Array(Vec<JsonValue>),
    Object(Vec<(String, JsonValue)>),
}

impl From<bool> for JsonValue {
    fn from(v: bool) -> Self {
        JsonValue::Bool(v)
    }
}

impl From<u64> for JsonValue {
    fn from(v: u64) -> Self {
        JsonValue::UInt(v)
    }
}

impl From<f64> for JsonValue {
    fn from(v: f64) -> Self {
        JsonValue::Float(v)
    }
}

impl From<String> for JsonValue {
    fn from(v: String) -> Self {
        JsonValue::Str(v)
    }
}

impl From<&str> for JsonValue {
    fn from(v: &str) -> Self {
        JsonValue::Str(v.to_owned())
    }
}

pub fn object<'a>(fields: impl IntoIterator<Item = (&'a str, JsonValue)>) -> JsonValue {
    JsonValue::Object(fields.into_iter().map(|(k, v)| (k.to_owned(), v)).collect())
}

impl JsonValue {
    pub fn render(&self) -> String {
        let mut buf = String::new();
        self.render_into(&mut buf);
        buf
    }

    fn render_into(&self, buf: &mut String) {
        match self {
            JsonValue::Bool(b) => buf.push_str(if *b { "true" } else { "false" }),
            JsonValue::UInt(v) => buf.push_str(&v.to_string()),
            JsonValue::Float(v) => buf.push_str(&render_float(*v)),
            JsonValue::Str(s) => {
                buf.push('"');
                for c in s.chars() {
                    match c {
                        '"' => buf.push_str("\\\""),
                        '\\' => buf.push_str("\\\\"),
                        '\n' => buf.push_str("\\n"),
                        '\r' => buf.push_str("\\r"),
                        '\t' => buf.push_str("\\t"),
                        c if (c as u32) < 0x20 => {
                            buf.push_str(&format!("\\u{:04x}", c as u32));
                        }
                        c => buf.push(c),
                    }
                }
                buf.push('"');
            }
            JsonValue::Array(items) => {
                buf.push('[');
                for (i, item) in items.iter().enumerate() {
                    if i > 0 {
                        buf.push(',');
                    }
                    item.render_into(buf);
                }
                buf.push(']');
            }
            JsonValue::Object(fields) => {
                buf.push('{');
                for (i, (key, value)) in fields.iter().enumerate() {
                    if i > 0 {
                        buf.push(',');
                    }
                    JsonValue::Str(key.clone()).render_into(buf);
                    buf.push(':');
                    value.render_into(buf);
                }
                buf.push('}');
            }
        }
    }

    fn render_cell(&self) -> Result<String> {
        Ok(match self {
            JsonValue::Bool(b) => b.to_string(),
            JsonValue::UInt(v) => v.to_string(),
            JsonValue::Float(v) => render_float(*v),
            JsonValue::Str(s) => {
                if s.contains('\t') || s.contains('\n') {
                    bail!("string {s:?} cannot be a TSV cell");
                }
                s.clone()
            }
            JsonValue::Array(_) | JsonValue::Object(_) => {
                bail!("nested values cannot be TSV cells")
            }
        })
    }

    /// One flat object as a two-line TSV: header then row.
    pub fn render_tsv(&self) -> Result<String> {
        render_tsv_table(std::slice::from_ref(self))
    }
}

/// Flat objects as a TSV table; columns are the union of keys in first-seen
/// order, missing values render empty.
pub fn render_tsv_table(rows: &[JsonValue]) -> Result<String> {
    let mut columns: Vec<&str> = Vec::new();
    for row in rows {
        let JsonValue::Object(fields) = row else {
            bail!("TSV output needs objects");
        };
        for (key, _) in fields {
            if !columns.iter().any(|c| c == key) {
                columns.push(key);
            }
        }
    }
    let mut out = columns.join("\t");
    out.push('\n');
    for row in rows {
        let JsonValue::Object(fields) = row else {
            unreachable!()
        };
        let cells: Vec<String> = columns
            .iter()
            .map(|col| {
                fields
                    .iter()
                    .find(|(key, _)| key == col)
                    .map(|(_, value)| value.render_cell())
                    .transpose()
                    .map(|v| v.unwrap_or_default())
            })
            .collect::<Result<_>>()?;
        out.push_str(&cells.join("\t"));
        out.push('\n');
    }
    Ok(out)
}

/// 17 significant digits in scientific notation; valid JSON and exact to
/// reparse.
fn render_float(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        // timing and metric outputs are always finite; null keeps the JSON valid
        "null".to_owned()
    }
}
