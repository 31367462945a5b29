//! File formats.
//!
//! * Edge lists: a header line `N <order>`, then one `i j [weight]` line per edge. Blank lines
//!   and lines starting with `#` are ignored; the weight defaults to 1.
//! * Matrices: headerless CSV, one row per line. Vectors are single-column matrices.
//! * Decompositions and kernels: `U` (or `K`) as CSV plus a JSON summary of the spectrum.

use std::fs::File;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde_json::json;

use crate::error::{GsisError, Result};
use crate::graph::Graph;
use crate::kernels::ShiftInvariantKernel;
use crate::spectral::SpectralDecomposition;

pub fn parse_edge_list<R: Read>(input: R) -> Result<Graph> {
    let mut graph: Option<Graph> = None;
    for (idx, line) in BufReader::new(input).lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let text = line.trim();
        if text.is_empty() || text.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = text.split_whitespace().collect();
        let err = |message: String| GsisError::Parse { line: line_no, message };
        match graph.as_mut() {
            None => {
                if fields.len() != 2 || fields[0] != "N" {
                    return Err(err(format!("expected header `N <order>`, found {text:?}")));
                }
                let n: usize = fields[1].parse().map_err(|_| err(format!("bad order {:?}", fields[1])))?;
                graph = Some(Graph::new(n).map_err(|e| err(e.to_string()))?);
            }
            Some(g) => {
                if !(2..=3).contains(&fields.len()) {
                    return Err(err(format!("expected `i j [weight]`, found {text:?}")));
                }
                let vertex = |s: &str| s.parse::<usize>().map_err(|_| err(format!("bad vertex {s:?}")));
                let (i, j) = (vertex(fields[0])?, vertex(fields[1])?);
                let w = match fields.get(2) {
                    Some(s) => s.parse::<f64>().map_err(|_| err(format!("bad weight {s:?}")))?,
                    None => 1.0,
                };
                g.add_edge(i, j, w).map_err(|e| err(e.to_string()))?;
            }
        }
    }
    graph.ok_or(GsisError::Parse { line: 0, message: "missing `N <order>` header".into() })
}

pub fn read_edge_list(path: &Path) -> Result<Graph> {
    parse_edge_list(File::open(path)?)
}

pub fn write_edge_list<W: Write>(graph: &Graph, mut out: W) -> Result<()> {
    writeln!(out, "N {}", graph.order())?;
    for (i, j, w) in graph.edges() {
        writeln!(out, "{i} {j} {w}")?;
    }
    Ok(())
}

pub fn write_matrix_csv<W: Write>(m: &DMatrix<f64>, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    for row in m.row_iter() {
        w.write_record(row.iter().map(|v| format!("{v:.17e}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn parse_matrix_csv<R: Read>(input: R) -> Result<DMatrix<f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(input);
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        let record = record?;
        let row = record
            .iter()
            .enumerate()
            .map(|(c, cell)| {
                cell.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| GsisError::CsvCell {
                    row: r + 1,
                    column: (c + 1).to_string(),
                    message: format!("not a finite number: {cell:?}"),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(GsisError::DimensionMismatch { expected: first.len(), actual: row.len() });
            }
        }
        rows.push(row);
    }
    let ncols = rows.first().map_or(0, Vec::len);
    Ok(DMatrix::from_row_iterator(rows.len(), ncols, rows.into_iter().flatten()))
}

pub fn read_matrix_csv(path: &Path) -> Result<DMatrix<f64>> {
    parse_matrix_csv(File::open(path)?)
}

/// Accepts a single column or a single row.
pub fn read_vector_csv(path: &Path) -> Result<DVector<f64>> {
    let m = read_matrix_csv(path)?;
    match (m.nrows(), m.ncols()) {
        (_, 1) => Ok(m.column(0).into_owned()),
        (1, _) => Ok(m.row(0).transpose()),
        (0, 0) => Ok(DVector::zeros(0)),
        (r, c) => Err(GsisError::InvalidParameter(format!("expected a vector, found a {r}×{c} matrix"))),
    }
}

pub fn write_vector_csv<W: Write>(v: &DVector<f64>, out: W) -> Result<()> {
    write_matrix_csv(&DMatrix::from_column_slice(v.len(), 1, v.as_slice()), out)
}

pub fn decomposition_json(decomp: &SpectralDecomposition) -> serde_json::Value {
    let lambdas: Vec<Vec<f64>> = decomp.lambdas().row_iter().map(|r| r.iter().copied().collect()).collect();
    json!({
        "order": decomp.order(),
        "shift_count": decomp.shift_count(),
        "eigenvalues": lambdas,
        "assumption1_holds": decomp.assumption1_holds(),
        "min_spectral_gap": decomp.min_spectral_gap(),
        "coincidence_tolerance": decomp.coincidence_tolerance(),
        "clusters": decomp.clusters().into_iter().filter(|c| c.len() > 1).collect::<Vec<_>>(),
    })
}

/// Writes `U.csv` and `spectrum.json` into `dir`.
pub fn write_decomposition(decomp: &SpectralDecomposition, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_matrix_csv(decomp.u(), File::create(dir.join("U.csv"))?)?;
    let mut f = File::create(dir.join("spectrum.json"))?;
    serde_json::to_writer_pretty(&mut f, &decomposition_json(decomp))?;
    writeln!(f)?;
    Ok(())
}

/// Writes `K.csv` and `kernel.json` into `dir`.
pub fn write_kernel(kernel: &ShiftInvariantKernel, meta: serde_json::Value, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_matrix_csv(kernel.matrix(), File::create(dir.join("K.csv"))?)?;
    let summary = json!({
        "meta": meta,
        "spectral_diag": kernel.spectral_diag().as_slice(),
        "omega_k": kernel.omega_k(),
    });
    let mut f = File::create(dir.join("kernel.json"))?;
    serde_json::to_writer_pretty(&mut f, &summary)?;
    writeln!(f)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edges(4, [(0, 1, 1.0), (1, 2, 2.5), (0, 3, 1.0)]).unwrap();
        let mut buf = Vec::new();
        write_edge_list(&g, &mut buf).unwrap();
        assert_eq!(parse_edge_list(buf.as_slice()).unwrap(), g);
    }

    #[test]
    fn edge_list_errors_name_the_line() {
        let text = "# comment\nN 3\n0 1\n0 x\n";
        match parse_edge_list(text.as_bytes()) {
            Err(GsisError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
        assert!(parse_edge_list("0 1\n".as_bytes()).is_err());
        assert!(parse_edge_list("N 2\n0 0\n".as_bytes()).is_err());
        assert!(parse_edge_list("".as_bytes()).is_err());
    }

    #[test]
    fn matrix_round_trip_is_exact() {
        let m = DMatrix::from_row_slice(2, 3, &[1.0 / 3.0, -2.0, 1e-300, 0.0, std::f64::consts::PI, 7.0]);
        let mut buf = Vec::new();
        write_matrix_csv(&m, &mut buf).unwrap();
        assert_eq!(parse_matrix_csv(buf.as_slice()).unwrap(), m);
        assert!(parse_matrix_csv("1,2\n3\n".as_bytes()).is_err());
        assert!(parse_matrix_csv("1,nan\n".as_bytes()).is_err());
    }
}
