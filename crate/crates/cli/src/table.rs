use std::fmt::Write as _;

use serde_json::{Map, Value};

use crate::config::Format;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(v) => match serde_json::Number::from_f64(*v) {
                Some(n) => n.to_string(),
                None => format!("{v}"),
            },
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) if s.contains([',', '"', '\n']) => format!("\"{}\"", s.replace('"', "\"\"")),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(v) => serde_json::Number::from_f64(*v).map(Value::Number).unwrap_or(Value::Null),
            Cell::Int(v) => Value::from(*v),
            Cell::Text(s) => Value::String(s.clone()),
            Cell::Empty => Value::Null,
        }
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Cell::Num(v) => Some(*v),
            Cell::Int(v) => Some(*v as f64),
            _ => None,
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Num(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_string())
    }
}

impl From<String> for Cell {
    fn from(v: String) -> Self {
        Cell::Text(v)
    }
}

impl From<Option<f64>> for Cell {
    fn from(v: Option<f64>) -> Self {
        v.map_or(Cell::Empty, Cell::Num)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.header.iter().position(|h| *h == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for r in &self.rows {
            let line: Vec<String> = r.iter().map(Cell::csv).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }

    pub fn to_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                let mut m = Map::new();
                for (h, c) in self.header.iter().zip(r) {
                    m.insert(h.to_string(), c.json());
                }
                Value::Object(m)
            })
            .collect();
        let mut s = serde_json::to_string_pretty(&Value::Array(rows)).expect("serializable");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    /// One polyline per `(t, branch, solver)` group of an evolve table.
    pub fn to_svg(&self) -> Option<String> {
        let (ti, xi, ui) = (self.column("t")?, self.column("x")?, self.column("u")?);
        let (bi, si) = (self.column("branch")?, self.column("solver")?);
        let mut groups: Vec<((String, String, String), Vec<(f64, f64)>)> = Vec::new();
        for r in &self.rows {
            let (Some(x), Some(u)) = (r[xi].as_num(), r[ui].as_num()) else { continue };
            if !(x.is_finite() && u.is_finite()) {
                continue;
            }
            let key = (r[ti].csv(), r[bi].csv(), r[si].csv());
            match groups.iter_mut().find(|(k, _)| *k == key) {
                Some((_, pts)) => pts.push((x, u)),
                None => groups.push((key, vec![(x, u)])),
            }
        }
        let all = || groups.iter().flat_map(|(_, p)| p.iter());
        let (mut x0, mut x1) = (f64::INFINITY, f64::NEG_INFINITY);
        for &(x, _) in all() {
            x0 = x0.min(x);
            x1 = x1.max(x);
        }
        // the vertical range follows the primary branch so that far overhangs do not flatten the plot
        let (mut u0, mut u1) = (f64::INFINITY, f64::NEG_INFINITY);
        for ((_, b, _), pts) in &groups {
            if b == "0" || b == "W0" {
                for &(_, u) in pts {
                    u0 = u0.min(u);
                    u1 = u1.max(u);
                }
            }
        }
        if !u0.is_finite() {
            for &(_, u) in all() {
                u0 = u0.min(u);
                u1 = u1.max(u);
            }
        }
        if !u0.is_finite() {
            (u0, u1) = (-1.0, 1.0);
        }
        if !x0.is_finite() {
            (x0, x1) = (0.0, 1.0);
        }
        if !(x0 < x1) {
            x1 = x0 + 1.0;
        }
        let pad = 0.25 * (u1 - u0).max(1e-9);
        let (u0, u1) = (u0 - pad, u1 + pad);
        let (w, h) = (800.0, 500.0);
        let mut out = String::new();
        let _ = writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
        let _ = writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
        let palette = ["#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e", "#e6ab02"];
        for (i, ((t, b, s), pts)) in groups.iter().enumerate() {
            let colour = if b == "0" || b == "W0" { palette[0] } else { palette[1 + i % (palette.len() - 1)] };
            let mut line = String::new();
            for &(x, u) in pts {
                let u = u.clamp(u0, u1);
                let px = (x - x0) / (x1 - x0) * w;
                let py = h - (u - u0) / (u1 - u0) * h;
                let _ = write!(line, "{px:.2},{py:.2} ");
            }
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{colour}" stroke-width="1.5" points="{}"><title>t={t} branch={b} solver={s}</title></polyline>"#,
                line.trim_end()
            );
        }
        out.push_str("</svg>\n");
        Some(out)
    }
}
