//! CSV output shared by every tool.
//!
//! Each file starts with one comment line
//! `# cca-nm <version> schema=<id>/<rev> <meta>` followed by a header row.
//! Floats are written with 17 significant digits so goldens are bit-stable.

pub const TOOL: &str = "cca-nm";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SCHEMA_REVISION: u32 = 1;

/// 17 significant digits; non-finite values as `inf`, `-inf`, `nan`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:.16e}")
    }
}

pub fn parse_f64(s: &str) -> Option<f64> {
    match s.trim() {
        "inf" => Some(f64::INFINITY),
        "-inf" => Some(f64::NEG_INFINITY),
        "nan" => Some(f64::NAN),
        other => other.parse().ok(),
    }
}

pub struct CsvWriter {
    out: String,
    columns: usize,
}

impl CsvWriter {
    pub fn new(schema: &str, meta: &str, header: &[&str]) -> Self {
        let mut out = format!("# {TOOL} {VERSION} schema={schema}/{SCHEMA_REVISION}");
        if !meta.is_empty() {
            out.push(' ');
            out.push_str(meta);
        }
        out.push('\n');
        out.push_str(&header.join(","));
        out.push('\n');
        Self {
            out,
            columns: header.len(),
        }
    }

    pub fn row<S: AsRef<str>>(&mut self, cells: &[S]) {
        assert_eq!(cells.len(), self.columns, "row width mismatch");
        let mut first = true;
        for c in cells {
            if !first {
                self.out.push(',');
            }
            first = false;
            self.out.push_str(c.as_ref());
        }
        self.out.push('\n');
    }

    pub fn finish(self) -> String {
        self.out
    }
}

/// A parsed CSV produced by [`CsvWriter`].
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub schema: String,
    pub meta: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        let first = lines.next().ok_or("empty file")?;
        let comment = first
            .strip_prefix("# ")
            .ok_or("missing header comment line")?;
        let mut parts = comment.splitn(4, ' ');
        let tool = parts.next().unwrap_or_default();
        if tool != TOOL {
            return Err(format!("unexpected tool tag '{tool}'"));
        }
        let _version = parts.next().ok_or("missing version")?;
        let schema = parts
            .next()
            .and_then(|s| s.strip_prefix("schema="))
            .ok_or("missing schema id")?
            .to_string();
        let meta = parts.next().unwrap_or_default().to_string();
        let header: Vec<String> = lines
            .next()
            .ok_or("missing header row")?
            .split(',')
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.is_empty() {
                continue;
            }
            let row: Vec<String> = line.split(',').map(str::to_string).collect();
            if row.len() != header.len() {
                return Err(format!(
                    "row {} has {} cells, expected {}",
                    i + 1,
                    row.len(),
                    header.len()
                ));
            }
            rows.push(row);
        }
        Ok(Self {
            schema,
            meta,
            header,
            rows,
        })
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| h == name)
    }

    pub fn column_f64(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.column_index(name)?;
        self.rows.iter().map(|r| parse_f64(&r[idx])).collect()
    }
}
