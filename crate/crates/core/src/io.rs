//! CSV readers and writers for every file format the pipeline exchanges.
//!
//! Floats are written with Rust's shortest round-trip representation, so
//! `read(write(x)) == x` bit for bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph::ArealGraph;
use crate::model::Dataset;
use crate::prior::FieldDraw;

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| Error::io(path, e))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

fn parse_err(path: &Path, line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: path.to_path_buf(),
        line,
        msg: msg.into(),
    }
}

fn reader(text: &str) -> csv::Reader<&[u8]> {
    csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes())
}

fn parse_f64(path: &Path, line: usize, tok: &str) -> Result<f64> {
    tok.parse::<f64>()
        .map_err(|_| parse_err(path, line, format!("not a number: `{tok}`")))
}

pub fn write_edge_list(path: &Path, g: &ArealGraph) -> Result<()> {
    let mut w = create(path)?;
    let mut body = String::from("src,dst\n");
    for &(u, v) in g.edges() {
        body.push_str(&format!("{u},{v}\n"));
    }
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let text = read_text(path)?;
    let mut rdr = reader(&text);
    let header = rdr.headers()?.clone();
    if header.len() < 3 || &header[0] != "id" || &header[1] != "y" || &header[2] != "expected" {
        return Err(parse_err(path, 1, "expected header `id,y,expected[,x1,...]`"));
    }
    let k = header.len() - 3;
    let mut rows: Vec<(usize, u64, f64, Vec<f64>)> = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = r + 2;
        if rec.len() != header.len() {
            return Err(parse_err(path, line, "wrong number of fields"));
        }
        let id = rec[0]
            .parse::<usize>()
            .map_err(|_| parse_err(path, line, format!("bad id `{}`", &rec[0])))?;
        let y = rec[1]
            .parse::<u64>()
            .map_err(|_| parse_err(path, line, format!("count must be a nonnegative integer, got `{}`", &rec[1])))?;
        let e = parse_f64(path, line, &rec[2])?;
        let xs = (0..k)
            .map(|j| parse_f64(path, line, &rec[3 + j]))
            .collect::<Result<Vec<_>>>()?;
        rows.push((id, y, e, xs));
    }
    let n = rows.len();
    if n == 0 {
        return Err(parse_err(path, 1, "no data rows"));
    }
    let mut slots: Vec<Option<(u64, f64, Vec<f64>)>> = vec![None; n];
    for (id, y, e, xs) in rows {
        if id >= n {
            return Err(Error::invalid(format!("{}: id {id} outside 0..{n}", path.display())));
        }
        if slots[id].is_some() {
            return Err(Error::invalid(format!("{}: duplicate id {id}", path.display())));
        }
        slots[id] = Some((y, e, xs));
    }
    let mut y = Vec::with_capacity(n);
    let mut expected = Vec::with_capacity(n);
    let mut x = DMatrix::zeros(n, k);
    for (i, slot) in slots.into_iter().enumerate() {
        let (yi, ei, xi) = slot.expect("ids form a permutation of 0..n");
        y.push(yi);
        expected.push(ei);
        for (j, v) in xi.into_iter().enumerate() {
            x[(i, j)] = v;
        }
    }
    Dataset::new(y, expected, x)
}

pub fn write_dataset(path: &Path, data: &Dataset) -> Result<()> {
    let mut w = create(path)?;
    let mut header = String::from("id,y,expected");
    for j in 1..=data.k() {
        header.push_str(&format!(",x{j}"));
    }
    let mut body = header + "\n";
    for i in 0..data.n() {
        body.push_str(&format!("{i},{},{}", data.y[i], data.expected[i]));
        for j in 0..data.k() {
            body.push_str(&format!(",{}", data.x[(i, j)]));
        }
        body.push('\n');
    }
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

/// Node coordinates, indexed by node id.
pub fn read_coords(path: &Path) -> Result<Vec<(f64, f64)>> {
    let text = read_text(path)?;
    let mut rdr = reader(&text);
    let header = rdr.headers()?.clone();
    if header.len() != 3 || &header[0] != "id" || &header[1] != "x" || &header[2] != "y" {
        return Err(parse_err(path, 1, "expected header `id,x,y`"));
    }
    let mut entries = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let line = r + 2;
        let id = rec[0]
            .parse::<usize>()
            .map_err(|_| parse_err(path, line, format!("bad id `{}`", &rec[0])))?;
        entries.push((id, parse_f64(path, line, &rec[1])?, parse_f64(path, line, &rec[2])?));
    }
    let n = entries.iter().map(|e| e.0 + 1).max().unwrap_or(0);
    let mut coords = vec![(f64::NAN, f64::NAN); n];
    for (id, x, y) in entries {
        coords[id] = (x, y);
    }
    Ok(coords)
}

pub fn write_coords(path: &Path, coords: &[(f64, f64)]) -> Result<()> {
    let mut w = create(path)?;
    let mut body = String::from("id,x,y\n");
    for (i, (x, y)) in coords.iter().enumerate() {
        body.push_str(&format!("{i},{x},{y}\n"));
    }
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

/// `draw,u,rho.1..rho.p,theta.1..theta.n`; CAR draws omit `u` and `rho`.
pub fn write_field_draws(path: &Path, draws: &[FieldDraw]) -> Result<()> {
    let mut w = create(path)?;
    let first = draws
        .first()
        .ok_or_else(|| Error::invalid("no draws to write"))?;
    let n = first.theta.len();
    let mut header = vec!["draw".to_string()];
    if let Some(rho) = &first.rho {
        header.push("u".into());
        header.extend((1..=rho.len()).map(|j| format!("rho.{j}")));
    }
    header.extend((1..=n).map(|j| format!("theta.{j}")));
    let mut body = header.join(",");
    body.push('\n');
    for (j, d) in draws.iter().enumerate() {
        body.push_str(&(j + 1).to_string());
        if let (Some(u), Some(rho)) = (d.u, &d.rho) {
            body.push_str(&format!(",{u}"));
            for v in rho {
                body.push_str(&format!(",{v}"));
            }
        }
        for v in &d.theta {
            body.push_str(&format!(",{v}"));
        }
        body.push('\n');
    }
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

/// A numeric table with named columns.
#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[j]).collect())
    }
}

pub fn read_table(path: &Path) -> Result<Table> {
    let text = read_text(path)?;
    let mut rdr = reader(&text);
    let columns: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for (r, rec) in rdr.records().enumerate() {
        let rec = rec?;
        rows.push(
            rec.iter()
                .map(|t| parse_f64(path, r + 2, t))
                .collect::<Result<Vec<_>>>()?,
        );
    }
    Ok(Table { columns, rows })
}

pub fn write_table(path: &Path, table: &Table) -> Result<()> {
    let mut w = create(path)?;
    let mut body = table.columns.join(",");
    body.push('\n');
    for row in &table.rows {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        body.push_str(&line.join(","));
        body.push('\n');
    }
    w.write_all(body.as_bytes()).map_err(|e| Error::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = create(path)?;
    w.write_all(text.as_bytes()).map_err(|e| Error::io(path, e))
}
