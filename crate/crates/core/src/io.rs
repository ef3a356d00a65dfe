//! Origin-destination files and JSON Lines route records.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Result, RevcError};
use crate::graph::{Cost, Graph, VertexId};
use crate::lo::AdmissibleRoute;
use crate::oracle::OracleRoute;

#[derive(Debug, Default)]
pub struct OdFile {
    /// Distinct pairs in file order.
    pub pairs: Vec<(VertexId, VertexId)>,
    pub duplicates: usize,
    /// Rows naming vertices that are not in the graph.
    pub row_errors: Vec<RevcError>,
}

impl OdFile {
    pub fn origins(&self) -> Vec<VertexId> {
        let mut o: Vec<_> = self.pairs.iter().map(|p| p.0).collect();
        o.sort_unstable();
        o.dedup();
        o
    }

    pub fn destinations(&self) -> Vec<VertexId> {
        let mut d: Vec<_> = self.pairs.iter().map(|p| p.1).collect();
        d.sort_unstable();
        d.dedup();
        d
    }
}

/// Reads `origin<TAB>destination` rows. A first row `origin destination`
/// is taken as a header; blank lines and `#` comments are skipped.
pub fn read_od_pairs<R: BufRead>(g: &Graph, reader: R) -> Result<OdFile> {
    let mut out = OdFile::default();
    let mut seen = HashSet::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        let row = line.trim_end_matches('\r');
        if row.trim().is_empty() || row.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = row.split('\t').collect();
        if fields.len() != 2 {
            return Err(RevcError::Parse { line: k + 1, message: format!("expected 2 fields, found {}", fields.len()) });
        }
        if k == 0 && fields[0] == "origin" && fields[1] == "destination" {
            continue;
        }
        let (s, t) = match (g.vertex(fields[0]), g.vertex(fields[1])) {
            (Some(s), Some(t)) => (s, t),
            (None, _) => {
                out.row_errors.push(RevcError::UnknownVertex(format!("{} (line {})", fields[0], k + 1)));
                continue;
            }
            (_, None) => {
                out.row_errors.push(RevcError::UnknownVertex(format!("{} (line {})", fields[1], k + 1)));
                continue;
            }
        };
        if seen.insert((s, t)) {
            out.pairs.push((s, t));
        } else {
            out.duplicates += 1;
        }
    }
    if out.duplicates > 0 {
        log::warn!("{} duplicate origin-destination rows ignored", out.duplicates);
    }
    Ok(out)
}

pub fn write_od_pairs<W: Write>(g: &Graph, pairs: &[(VertexId, VertexId)], mut w: W) -> Result<()> {
    writeln!(w, "origin\tdestination")?;
    for &(s, t) in pairs {
        writeln!(w, "{}\t{}", g.label(s), g.label(t))?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RouteRecord {
    pub origin: String,
    pub destination: String,
    pub via: String,
    pub cost: Cost,
    pub guaranteed_alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub exact_factor: Option<f64>,
    pub vertices: Vec<String>,
}

impl RouteRecord {
    pub fn from_route(g: &Graph, r: &AdmissibleRoute) -> Self {
        RouteRecord {
            origin: g.label(r.origin).to_string(),
            destination: g.label(r.destination).to_string(),
            via: g.label(r.via).to_string(),
            cost: r.length,
            guaranteed_alpha: r.guaranteed_alpha,
            exact_factor: None,
            vertices: r.vertices.iter().map(|&v| g.label(v).to_string()).collect(),
        }
    }

    pub fn from_oracle(g: &Graph, r: &OracleRoute) -> Self {
        RouteRecord {
            origin: g.label(r.origin).to_string(),
            destination: g.label(r.destination).to_string(),
            via: g.label(r.via).to_string(),
            cost: r.length,
            guaranteed_alpha: r.exact_factor,
            exact_factor: Some(r.exact_factor),
            vertices: r.vertices.iter().map(|&v| g.label(v).to_string()).collect(),
        }
    }
}

pub fn write_jsonl<W: Write, T: Serialize>(records: &[T], mut w: W) -> Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r).map_err(std::io::Error::from)?;
        w.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_route_records<R: BufRead>(reader: R) -> Result<Vec<RouteRecord>> {
    let mut out = Vec::new();
    for (k, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| RevcError::Parse { line: k + 1, message: e.to_string() })?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g() -> Graph {
        Graph::load_str("from\tto\tcost\nA\tB\t1\nB\tC\t1\n").unwrap()
    }

    #[test]
    fn od_with_header_duplicates_and_unknowns() {
        let od = read_od_pairs(&g(), "origin\tdestination\nA\tC\nA\tC\n# note\n\nB\tZ\nB\tC\n".as_bytes()).unwrap();
        assert_eq!(od.pairs, vec![(0, 2), (1, 2)]);
        assert_eq!(od.duplicates, 1);
        assert_eq!(od.row_errors.len(), 1);
        assert_eq!(od.origins(), vec![0, 1]);
    }

    #[test]
    fn od_bad_row_is_parse_error() {
        assert!(matches!(read_od_pairs(&g(), "A\tB\tC\n".as_bytes()), Err(RevcError::Parse { line: 1, .. })));
    }

    #[test]
    fn empty_od() {
        assert!(read_od_pairs(&g(), "".as_bytes()).unwrap().pairs.is_empty());
    }

    #[test]
    fn record_round_trip() {
        let g = g();
        let r = AdmissibleRoute {
            s_ord: 0,
            t_ord: 0,
            origin: 0,
            destination: 2,
            via: 1,
            vertices: vec![0, 1, 2],
            length: 2.0,
            shortest: 2.0,
            guaranteed_alpha: 0.2,
            batch_accepted: false,
        };
        let rec = RouteRecord::from_route(&g, &r);
        let mut buf = Vec::new();
        write_jsonl(&[rec.clone()], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("{\"origin\":\"A\""));
        assert_eq!(read_route_records(buf.as_slice()).unwrap(), vec![rec]);
    }
}
