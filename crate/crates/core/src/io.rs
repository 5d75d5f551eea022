//! CSV readers and writers for edge lists, numeric tables and feature maps.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path as FsPath;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measure::Signal;
use crate::scattering::{FeatureKey, FeatureValues, ScatteringFeatureMap};

/// Parsed edge list; `n` is one more than the largest node id.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeList {
    pub n: usize,
    pub edges: Vec<(usize, usize, f64)>,
    /// True when the weight column was absent and every weight defaulted to 1.
    pub default_weights: bool,
}

fn reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .comment(Some(b'#'))
        .from_reader(r)
}

fn records<R: Read>(r: R) -> Result<Vec<(usize, Vec<String>)>> {
    let mut out = Vec::new();
    for rec in reader(r).records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(|f| f.is_empty()) {
            continue;
        }
        out.push((line, rec.iter().map(str::to_string).collect()));
    }
    Ok(out)
}

fn parse_at<T: std::str::FromStr>(line: usize, field: &str, what: &str) -> Result<T> {
    field.parse().map_err(|_| Error::Parse {
        line,
        message: format!("cannot parse {what} from `{field}`"),
    })
}

/// Reads `src,dst[,weight]` rows. A header row is optional; a missing weight
/// column defaults every weight to 1 and logs a warning.
pub fn read_edges<R: Read>(r: R) -> Result<EdgeList> {
    let mut rows = records(r)?;
    let mut has_weight = None;
    if let Some((_, first)) = rows.first() {
        if first.first().is_some_and(|f| f.parse::<usize>().is_err()) {
            let names: Vec<String> = first.iter().map(|s| s.to_ascii_lowercase()).collect();
            if names.len() < 2 || names[0] != "src" || names[1] != "dst" || (names.len() > 2 && names[2] != "weight") {
                return Err(Error::Parse {
                    line: rows[0].0,
                    message: "expected header `src,dst,weight`".into(),
                });
            }
            has_weight = Some(names.len() > 2);
            rows.remove(0);
        }
    }
    let mut edges = Vec::with_capacity(rows.len());
    let mut n = 0;
    let mut defaulted = false;
    for (line, row) in rows {
        if row.len() < 2 || row.len() > 3 {
            return Err(Error::Parse {
                line,
                message: format!("expected 2 or 3 fields, found {}", row.len()),
            });
        }
        let u: usize = parse_at(line, &row[0], "source node id")?;
        let v: usize = parse_at(line, &row[1], "target node id")?;
        let w = match row.get(2) {
            Some(w) if has_weight != Some(false) => {
                let w: f64 = parse_at(line, w, "weight")?;
                if !w.is_finite() {
                    return Err(Error::Parse {
                        line,
                        message: "weight must be finite".into(),
                    });
                }
                w
            }
            _ => {
                defaulted = true;
                1.0
            }
        };
        n = n.max(u + 1).max(v + 1);
        edges.push((u, v, w));
    }
    if defaulted {
        log::warn!("edge list has no weight column; using weight 1.0");
    }
    Ok(EdgeList {
        n,
        edges,
        default_weights: defaulted,
    })
}

/// Reads a rectangular numeric table; a non-numeric first row is treated as a header.
pub fn read_table<R: Read>(r: R) -> Result<Vec<Vec<f64>>> {
    let mut rows = records(r)?;
    if let Some((_, first)) = rows.first() {
        if first.iter().any(|f| f.parse::<f64>().is_err()) {
            rows.remove(0);
        }
    }
    let mut out = Vec::with_capacity(rows.len());
    let mut width = None;
    for (line, row) in rows {
        let vals: Vec<f64> = row.iter().map(|f| parse_at(line, f, "number")).collect::<Result<_>>()?;
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line,
                message: "non-finite value".into(),
            });
        }
        match width {
            None => width = Some(vals.len()),
            Some(w) if w != vals.len() => {
                return Err(Error::Parse {
                    line,
                    message: format!("expected {w} columns, found {}", vals.len()),
                })
            }
            _ => {}
        }
        out.push(vals);
    }
    if out.is_empty() {
        return Err(Error::input("table has no data rows"));
    }
    Ok(out)
}

/// An n×s table read as s signals of length n.
pub fn read_signals<R: Read>(r: R) -> Result<Vec<Signal>> {
    let t = read_table(r)?;
    (0..t[0].len())
        .map(|c| Signal::from_real(&t.iter().map(|row| row[c]).collect::<Vec<_>>()))
        .collect()
}

/// A single-column table of point masses.
pub fn read_measure<R: Read>(r: R) -> Result<Vec<f64>> {
    let t = read_table(r)?;
    if t[0].len() != 1 {
        return Err(Error::input(format!("measure file must have one column, found {}", t[0].len())));
    }
    Ok(t.into_iter().map(|r| r[0]).collect())
}

pub fn open(path: &FsPath) -> Result<File> {
    File::open(path).map_err(|e| Error::input(format!("{}: {e}", path.display())))
}

fn writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::input(format!("{other:?}")),
    }
}

fn fmt(v: f64) -> String {
    format!("{v:e}")
}

/// Writes feature maps. Scalar features give one row per signal with one column
/// per key; signal-valued features give one row per (signal, node) with
/// `signal,node` leading columns and `;im` columns only when some value is complex.
pub fn write_features<W: Write>(w: W, maps: &[ScatteringFeatureMap]) -> Result<()> {
    let mut out = writer(w);
    let Some(first) = maps.first() else {
        return Err(Error::input("no feature maps to write"));
    };
    let keys: Vec<String> = first.keys.iter().map(FeatureKey::to_string).collect();
    match &first.values {
        FeatureValues::Scalars(_) => {
            out.write_record(&keys).map_err(csv_err)?;
            for m in maps {
                let v = m.scalars().ok_or_else(|| Error::input("mixed feature kinds"))?;
                out.write_record(v.iter().map(|x| fmt(*x))).map_err(csv_err)?;
            }
        }
        FeatureValues::Signals(_) => {
            let complex = maps
                .iter()
                .filter_map(|m| m.signals())
                .flatten()
                .any(|s| s.values().iter().any(|z| z.im != 0.0));
            let mut header = vec!["signal".to_string(), "node".to_string()];
            header.extend(keys.iter().cloned());
            if complex {
                header.extend(keys.iter().map(|k| format!("{k};im")));
            }
            out.write_record(&header).map_err(csv_err)?;
            for (s, m) in maps.iter().enumerate() {
                let sig = m.signals().ok_or_else(|| Error::input("mixed feature kinds"))?;
                let n = sig.first().map_or(0, Signal::len);
                for node in 0..n {
                    let mut row = vec![s.to_string(), node.to_string()];
                    row.extend(sig.iter().map(|x| fmt(x.values()[node].re)));
                    if complex {
                        row.extend(sig.iter().map(|x| fmt(x.values()[node].im)));
                    }
                    out.write_record(&row).map_err(csv_err)?;
                }
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads back a scalar feature CSV as (header, rows).
pub fn read_features<R: Read>(r: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let rows = records(r)?;
    let Some(((_, header), body)) = rows.split_first() else {
        return Err(Error::input("empty feature file"));
    };
    let data = body
        .iter()
        .map(|(line, row)| row.iter().map(|f| parse_at(*line, f, "feature")).collect())
        .collect::<Result<_>>()?;
    Ok((header.clone(), data))
}

pub fn write_json<T: Serialize>(path: &FsPath, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    f.write_all(b"\n")?;
    Ok(())
}

/// Writes a headerless table, one row per entry.
pub fn write_table<W: Write>(w: W, header: Option<&[&str]>, rows: &[Vec<f64>]) -> Result<()> {
    let mut out = writer(w);
    if let Some(h) = header {
        out.write_record(h).map_err(csv_err)?;
    }
    for r in rows {
        out.write_record(r.iter().map(|x| fmt(*x))).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scattering::{Path, FeatureKey};
    use num_complex::Complex64;

    #[test]
    fn edges_with_and_without_weights() {
        let e = read_edges("src,dst,weight\n0,1,2.5\n1,2,1\n".as_bytes()).unwrap();
        assert_eq!(e.n, 3);
        assert_eq!(e.edges, vec![(0, 1, 2.5), (1, 2, 1.0)]);
        assert!(!e.default_weights);

        let e = read_edges("src,dst\n0,1\n3,1\n".as_bytes()).unwrap();
        assert_eq!((e.n, e.default_weights), (4, true));
        assert!(e.edges.iter().all(|x| x.2 == 1.0));

        let e = read_edges("0,1\n1,2,0.5\n".as_bytes()).unwrap();
        assert_eq!(e.edges[1].2, 0.5);
    }

    #[test]
    fn edge_errors_carry_line_numbers() {
        match read_edges("src,dst,weight\n0,1,1\n0,x,1\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("{other:?}"),
        }
        match read_edges("src,dst,weight\n0,1,1,4\n".as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(matches!(read_edges("a,b\n0,1\n".as_bytes()), Err(Error::Parse { line: 1, .. })));
    }

    #[test]
    fn tables_and_signals() {
        let t = read_table("x,y\n1,2\n3,4\n".as_bytes()).unwrap();
        assert_eq!(t, vec![vec![1.0, 2.0], vec![3.0, 4.0]]);
        let s = read_signals("1,2\n3,4\n5,6\n".as_bytes()).unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s[1].real_parts(), vec![2.0, 4.0, 6.0]);
        assert!(matches!(read_table("1,2\n3\n".as_bytes()), Err(Error::Parse { line: 2, .. })));
        assert_eq!(read_measure("mu\n0.5\n2\n".as_bytes()).unwrap(), vec![0.5, 2.0]);
        assert!(read_measure("1,2\n".as_bytes()).is_err());
    }

    fn keys() -> Vec<FeatureKey> {
        vec![
            FeatureKey { path: Path::empty(), q: 1 },
            FeatureKey { path: Path(vec![0, 1]), q: 2 },
        ]
    }

    #[test]
    fn scalar_feature_round_trip() {
        let maps = vec![
            ScatteringFeatureMap { keys: keys(), values: FeatureValues::Scalars(vec![0.5, 1.25]) },
            ScatteringFeatureMap { keys: keys(), values: FeatureValues::Scalars(vec![-1.0, 3.0]) },
        ];
        let mut buf = Vec::new();
        write_features(&mut buf, &maps).unwrap();
        let (h, rows) = read_features(buf.as_slice()).unwrap();
        assert_eq!(h, vec!["p=e;q=1", "p=0-1;q=2"]);
        assert_eq!(rows, vec![vec![0.5, 1.25], vec![-1.0, 3.0]]);
    }

    #[test]
    fn signal_features_add_imaginary_columns_only_when_needed() {
        let real = Signal::from_real(&[1.0, 2.0]).unwrap();
        let maps = vec![ScatteringFeatureMap { keys: keys(), values: FeatureValues::Signals(vec![real.clone(), real.clone()]) }];
        let mut buf = Vec::new();
        write_features(&mut buf, &maps).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next().unwrap(), "signal,node,p=e;q=1,p=0-1;q=2");
        assert_eq!(text.lines().count(), 3);

        let cplx = Signal::new(vec![Complex64::new(1.0, 1.0), Complex64::new(0.0, 0.0)]).unwrap();
        let maps = vec![ScatteringFeatureMap { keys: keys(), values: FeatureValues::Signals(vec![real, cplx]) }];
        let mut buf = Vec::new();
        write_features(&mut buf, &maps).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.lines().next().unwrap().ends_with("p=e;q=1;im,p=0-1;q=2;im"));
    }
}
