//! Text wind-file format.
//!
//! ```text
//! # windfield v1 axes=x,y,h origin=0,0,0 spacing=1000,1000,500 counts=2,2,2 interp=trilinear
//! 0,0,0,3.5,-1
//! 0,0,1,4,-1.25
//! ...
//! ```
//!
//! Data rows are `xi,yi,hi[,ti],u,v` with integer node indices, in row-major
//! order (x slowest). Every node appears exactly once.

use std::io::Write;
use std::path::Path;

use super::{GridSpec, Interpolation, WindField, WindVector};
use crate::error::{Error, Result};

const MAGIC: &str = "windfield";
const VERSION: &str = "v1";

pub fn load_windfield(path: impl AsRef<Path>) -> Result<WindField> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_windfield(&text)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse_list<T: std::str::FromStr>(key: &str, value: &str, n: usize) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(|s| s.trim().parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| parse_err(1, format!("bad value list for {key}: {value:?}")))?;
    if items.len() != n {
        return Err(parse_err(
            1,
            format!("{key} needs {n} values, got {}", items.len()),
        ));
    }
    Ok(items)
}

struct Header {
    grid: GridSpec,
    interpolation: Interpolation,
}

fn parse_header(line: &str) -> Result<Header> {
    let mut words = line.split_whitespace();
    if words.next() != Some("#") || words.next() != Some(MAGIC) {
        return Err(parse_err(
            1,
            format!("expected header starting with \"# {MAGIC}\""),
        ));
    }
    match words.next() {
        Some(VERSION) => {}
        other => return Err(parse_err(1, format!("unsupported version {other:?}"))),
    }
    let mut axes = None;
    let mut origin = None;
    let mut spacing = None;
    let mut counts = None;
    let mut interp = None;
    for word in words {
        let (key, value) = word
            .split_once('=')
            .ok_or_else(|| parse_err(1, format!("expected key=value, got {word:?}")))?;
        let slot = match key {
            "axes" => &mut axes,
            "origin" => &mut origin,
            "spacing" => &mut spacing,
            "counts" => &mut counts,
            "interp" => &mut interp,
            _ => return Err(parse_err(1, format!("unknown header key {key:?}"))),
        };
        if slot.replace(value).is_some() {
            return Err(parse_err(1, format!("duplicate header key {key:?}")));
        }
    }
    let missing = |k: &str| parse_err(1, format!("header is missing {k}="));
    let has_time = match axes.ok_or_else(|| missing("axes"))? {
        "x,y,h" => false,
        "x,y,h,t" => true,
        other => {
            return Err(parse_err(
                1,
                format!("axes must be x,y,h or x,y,h,t, got {other:?}"),
            ))
        }
    };
    let n = if has_time { 4 } else { 3 };
    let origin_v: Vec<f64> = parse_list("origin", origin.ok_or_else(|| missing("origin"))?, n)?;
    let spacing_v: Vec<f64> = parse_list("spacing", spacing.ok_or_else(|| missing("spacing"))?, n)?;
    let counts_v: Vec<usize> = parse_list("counts", counts.ok_or_else(|| missing("counts"))?, n)?;
    let interpolation = interp
        .ok_or_else(|| missing("interp"))?
        .parse()
        .map_err(|e: Error| parse_err(1, e.to_string()))?;
    let mut grid = GridSpec {
        origin: [0.0; 4],
        spacing: [1.0; 4],
        counts: [1; 4],
        has_time,
    };
    grid.origin[..n].copy_from_slice(&origin_v);
    grid.spacing[..n].copy_from_slice(&spacing_v);
    grid.counts[..n].copy_from_slice(&counts_v);
    Ok(Header {
        grid,
        interpolation,
    })
}

pub fn parse_windfield(text: &str) -> Result<WindField> {
    let (first, rest) = text.split_once('\n').unwrap_or((text, ""));
    let Header {
        grid,
        interpolation,
    } = parse_header(first.trim_end_matches('\r'))?;
    let axes = if grid.has_time { 4 } else { 3 };
    let total: usize = grid.counts.iter().product();

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(rest.as_bytes());
    let mut data = Vec::with_capacity(total);
    let mut expected = [0usize; 4];
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize + 1);
            parse_err(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize) + 1;
        if record.len() == 1 && record[0].is_empty() {
            continue;
        }
        if record.len() != axes + 2 {
            return Err(parse_err(
                line,
                format!("expected {} fields, got {}", axes + 2, record.len()),
            ));
        }
        if data.len() == total {
            return Err(parse_err(
                line,
                format!("more rows than the {total} nodes declared in counts"),
            ));
        }
        for axis in 0..axes {
            let idx: usize = record[axis]
                .parse()
                .map_err(|_| parse_err(line, format!("bad node index {:?}", &record[axis])))?;
            if idx != expected[axis] {
                return Err(parse_err(
                    line,
                    format!("row out of order: expected index {:?}", &expected[..axes]),
                ));
            }
        }
        let component = |i: usize, name: &str| -> Result<f64> {
            let value: f64 = record[i]
                .parse()
                .map_err(|_| parse_err(line, format!("bad {name} component {:?}", &record[i])))?;
            if value.is_finite() {
                Ok(value)
            } else {
                Err(parse_err(
                    line,
                    format!("non-finite {name} component in row {}", data.len() + 1),
                ))
            }
        };
        data.push(WindVector::new(
            component(axes, "u")?,
            component(axes + 1, "v")?,
        ));
        for axis in (0..4).rev() {
            expected[axis] += 1;
            if expected[axis] < grid.counts[axis] {
                break;
            }
            expected[axis] = 0;
        }
    }
    if data.len() != total {
        let line = 1 + rest.lines().count();
        return Err(parse_err(
            line,
            format!(
                "counts declare {total} nodes but file has {} rows",
                data.len()
            ),
        ));
    }
    WindField::new(grid, data, interpolation).map_err(|e| parse_err(1, e.to_string()))
}

fn join<T: ToString>(items: &[T]) -> String {
    items
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(",")
}

pub fn write_windfield<W: Write>(field: &WindField, out: W) -> Result<()> {
    let grid = field.grid();
    let axes = if grid.has_time { 4 } else { 3 };
    let io_err = |e: std::io::Error| Error::io("<wind output>", e);
    let mut out = std::io::BufWriter::new(out);
    writeln!(
        out,
        "# {MAGIC} {VERSION} axes={} origin={} spacing={} counts={} interp={}",
        if grid.has_time { "x,y,h,t" } else { "x,y,h" },
        join(&grid.origin[..axes]),
        join(&grid.spacing[..axes]),
        join(&grid.counts[..axes]),
        field.interpolation().as_str()
    )
    .map_err(io_err)?;
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    let [cx, cy, ch, ct] = grid.counts;
    for ix in 0..cx {
        for iy in 0..cy {
            for ih in 0..ch {
                for it in 0..ct {
                    let w = field.node(ix, iy, ih, it);
                    let mut row = vec![ix.to_string(), iy.to_string(), ih.to_string()];
                    if grid.has_time {
                        row.push(it.to_string());
                    }
                    row.push(w.u.to_string());
                    row.push(w.v.to_string());
                    writer
                        .write_record(&row)
                        .map_err(|e| Error::Config(format!("writing wind file: {e}")))?;
                }
            }
        }
    }
    writer.flush().map_err(io_err)
}
