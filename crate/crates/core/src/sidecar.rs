//! Binary persistence of a [`ReachIndex`], keyed by a hash of everything the
//! index was derived from.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Result, RevcError};
use crate::graph::{Cost, PerturbationSpec};
use crate::reach::{ReachIndex, Shortcut};

const MAGIC: &[u8; 8] = b"REVCIDX1";

pub type IndexKey = [u8; 32];

/// Hash of the graph file, the optional trimming OD file, the perturbation
/// and the shortcut cap.
pub fn index_key(graph_bytes: &[u8], od_bytes: Option<&[u8]>, perturb: &PerturbationSpec, cap: Cost) -> IndexKey {
    let mut h = Sha256::new();
    h.update((graph_bytes.len() as u64).to_le_bytes());
    h.update(graph_bytes);
    match od_bytes {
        Some(b) => {
            h.update([1u8]);
            h.update((b.len() as u64).to_le_bytes());
            h.update(b);
        }
        None => h.update([0u8]),
    }
    h.update(perturb.relative_magnitude.to_le_bytes());
    h.update(perturb.seed.to_le_bytes());
    h.update(cap.to_le_bytes());
    let mut key = [0u8; 32];
    key.copy_from_slice(h.finalize().as_slice());
    key
}

pub fn key_hex(key: &IndexKey) -> String {
    key.iter().map(|b| format!("{b:02x}")).collect()
}

struct Out<W: Write>(W);

impl<W: Write> Out<W> {
    fn u32(&mut self, x: u32) -> Result<()> {
        Ok(self.0.write_all(&x.to_le_bytes())?)
    }
    fn u64(&mut self, x: u64) -> Result<()> {
        Ok(self.0.write_all(&x.to_le_bytes())?)
    }
    fn f64(&mut self, x: f64) -> Result<()> {
        Ok(self.0.write_all(&x.to_le_bytes())?)
    }
    fn f64s(&mut self, xs: &[f64]) -> Result<()> {
        self.u64(xs.len() as u64)?;
        xs.iter().try_for_each(|&x| self.f64(x))
    }
    fn u32s(&mut self, xs: &[u32]) -> Result<()> {
        self.u64(xs.len() as u64)?;
        xs.iter().try_for_each(|&x| self.u32(x))
    }
}

struct In<R: Read>(R);

impl<R: Read> In<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N]> {
        let mut b = [0u8; N];
        self.0.read_exact(&mut b).map_err(|e| RevcError::BadIndex(e.to_string()))?;
        Ok(b)
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.bytes()?))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.bytes()?))
    }
    fn len(&mut self) -> Result<usize> {
        let n = self.u64()?;
        if n > u32::MAX as u64 {
            return Err(RevcError::BadIndex(format!("implausible length {n}")));
        }
        Ok(n as usize)
    }
    fn f64s(&mut self) -> Result<Vec<f64>> {
        let n = self.len()?;
        (0..n).map(|_| self.f64()).collect()
    }
    fn u32s(&mut self) -> Result<Vec<u32>> {
        let n = self.len()?;
        (0..n).map(|_| self.u32()).collect()
    }
}

pub fn write_index<W: Write>(w: W, key: &IndexKey, idx: &ReachIndex) -> Result<()> {
    let mut o = Out(w);
    o.0.write_all(MAGIC)?;
    o.0.write_all(key)?;
    o.f64(idx.cap)?;
    o.f64s(&idx.bound)?;
    o.f64s(&idx.query_bound)?;
    o.u64(idx.shortcuts.len() as u64)?;
    for s in &idx.shortcuts {
        o.u32(s.tail)?;
        o.u32(s.head)?;
        o.f64(s.cost)?;
        o.u32s(&s.bypassed)?;
        o.u32s(&s.edges)?;
    }
    o.0.flush()?;
    Ok(())
}

pub fn read_index<R: Read>(r: R) -> Result<(IndexKey, ReachIndex)> {
    let mut i = In(r);
    if &i.bytes::<8>()? != MAGIC {
        return Err(RevcError::BadIndex("wrong magic bytes".into()));
    }
    let key = i.bytes::<32>()?;
    let cap = i.f64()?;
    let bound = i.f64s()?;
    let query_bound = i.f64s()?;
    let n = i.len()?;
    let mut shortcuts = Vec::with_capacity(n.min(1 << 20));
    for _ in 0..n {
        shortcuts.push(Shortcut { tail: i.u32()?, head: i.u32()?, cost: i.f64()?, bypassed: i.u32s()?, edges: i.u32s()? });
    }
    if bound.len() != query_bound.len() {
        return Err(RevcError::BadIndex("bound vectors differ in length".into()));
    }
    Ok((key, ReachIndex { bound, shortcuts, cap, query_bound }))
}

pub fn save(path: &Path, key: &IndexKey, idx: &ReachIndex) -> Result<()> {
    write_index(BufWriter::new(File::create(path)?), key, idx)
}

/// `Ok(None)` if there is no file; a stale key is an error unless `force`.
pub fn load_checked(path: &Path, key: &IndexKey, force: bool) -> Result<Option<ReachIndex>> {
    if !path.exists() {
        return Ok(None);
    }
    let (stored, idx) = read_index(BufReader::new(File::open(path)?))?;
    if &stored != key && !force {
        return Err(RevcError::StaleIndex(format!(
            "{} was built for {}, expected {}",
            path.display(),
            key_hex(&stored),
            key_hex(key)
        )));
    }
    Ok(Some(idx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::reach::compute_reach_bounds;

    #[test]
    fn round_trip_and_staleness() {
        let text = "from\tto\tcost\tbidir\nA\tB\t1\t1\nB\tC\t2\t1\nC\tD\t1\t1\n";
        let g = Graph::load_str(text).unwrap();
        let idx = compute_reach_bounds(&g, 5.0);
        let p = PerturbationSpec::none();
        let key = index_key(text.as_bytes(), None, &p, 5.0);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.idx");
        assert!(load_checked(&path, &key, false).unwrap().is_none());
        save(&path, &key, &idx).unwrap();
        assert_eq!(load_checked(&path, &key, false).unwrap().unwrap(), idx);
        let other = index_key(text.as_bytes(), None, &p, 4.0);
        assert!(matches!(load_checked(&path, &other, false), Err(RevcError::StaleIndex(_))));
        assert!(load_checked(&path, &other, true).unwrap().is_some());
        assert!(idx.bound.iter().all(|b| b.is_finite()));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let g = Graph::load_str("from\tto\tcost\nA\tB\t1\n").unwrap();
        let idx = compute_reach_bounds(&g, 0.0);
        let mut buf = Vec::new();
        write_index(&mut buf, &[7; 32], &idx).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(matches!(read_index(buf.as_slice()), Err(RevcError::BadIndex(_))));
    }
}
