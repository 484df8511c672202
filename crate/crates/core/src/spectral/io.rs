//! Field snapshots on disk.
//!
//! Binary layout (little endian): magic `DSNAP001`, `n: u64`, `box_len: f64`,
//! `components: u64`, `tau: f64`, then each component as `n^3` f64 values in
//! row-major `(i, j, k)` order.
//!
//! CSV layout: `# n=<n>,box_len=<L>,components=<c>,tau=<tau>` then a header
//! row `i,j,k,c0,c1,...` and one row per grid point in the same order.

use std::path::Path;

use super::grid::Grid3;
use crate::error::{Error, Result};
use crate::table::fmt_f64;

const MAGIC: &[u8; 8] = b"DSNAP001";

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub n: usize,
    pub box_len: f64,
    pub tau: f64,
    pub components: Vec<Vec<f64>>,
}

impl Snapshot {
    pub fn new(grid: &Grid3, tau: f64, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.iter().any(|c| c.len() != grid.len()) {
            return Err(Error::input("snapshot component length does not match grid"));
        }
        Ok(Self {
            n: grid.n(),
            box_len: grid.box_len(),
            tau,
            components,
        })
    }

    pub fn grid(&self) -> Result<Grid3> {
        Grid3::new(self.n, self.box_len)
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(40 + 8 * self.components.len() * self.n.pow(3));
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(self.n as u64).to_le_bytes());
        out.extend_from_slice(&self.box_len.to_le_bytes());
        out.extend_from_slice(&(self.components.len() as u64).to_le_bytes());
        out.extend_from_slice(&self.tau.to_le_bytes());
        for c in &self.components {
            for v in c {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 40 || &bytes[..8] != MAGIC {
            return Err(Error::input("not a snapshot file"));
        }
        let word = |i: usize| -> [u8; 8] { bytes[8 + 8 * i..16 + 8 * i].try_into().unwrap() };
        let n = u64::from_le_bytes(word(0)) as usize;
        let box_len = f64::from_le_bytes(word(1));
        let nc = u64::from_le_bytes(word(2)) as usize;
        let tau = f64::from_le_bytes(word(3));
        let len = n
            .checked_pow(3)
            .ok_or_else(|| Error::input("snapshot grid too large"))?;
        if bytes.len() != 40 + 8 * nc * len {
            return Err(Error::input("snapshot size does not match its header"));
        }
        let mut vals = bytes[40..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let components = (0..nc).map(|_| vals.by_ref().take(len).collect()).collect();
        Ok(Self {
            n,
            box_len,
            tau,
            components,
        })
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# n={},box_len={},components={},tau={}\n",
            self.n,
            fmt_f64(self.box_len),
            self.components.len(),
            fmt_f64(self.tau)
        );
        s.push_str("i,j,k");
        for c in 0..self.components.len() {
            s.push_str(&format!(",c{c}"));
        }
        s.push('\n');
        let n = self.n;
        for idx in 0..n * n * n {
            s.push_str(&format!("{},{},{}", idx / (n * n), (idx / n) % n, idx % n));
            for c in &self.components {
                s.push(',');
                s.push_str(&fmt_f64(c[idx]));
            }
            s.push('\n');
        }
        s
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let meta = lines
            .next()
            .and_then(|l| l.strip_prefix("# "))
            .ok_or_else(|| Error::input("missing snapshot header"))?;
        let mut n = None;
        let mut box_len = None;
        let mut nc = None;
        let mut tau = None;
        for kv in meta.split(',') {
            let (k, v) = kv.split_once('=').ok_or_else(|| Error::input("bad snapshot header"))?;
            let bad = |_| Error::input(format!("bad snapshot header value {kv}"));
            match k {
                "n" => n = Some(v.parse::<usize>().map_err(|_| Error::input("bad n"))?),
                "box_len" => box_len = Some(v.parse::<f64>().map_err(bad)?),
                "components" => nc = Some(v.parse::<usize>().map_err(|_| Error::input("bad components"))?),
                "tau" => tau = Some(v.parse::<f64>().map_err(bad)?),
                _ => return Err(Error::input(format!("unknown snapshot header key {k}"))),
            }
        }
        let (n, box_len, nc, tau) = match (n, box_len, nc, tau) {
            (Some(a), Some(b), Some(c), Some(d)) => (a, b, c, d),
            _ => return Err(Error::input("incomplete snapshot header")),
        };
        lines.next();
        let mut components = vec![Vec::with_capacity(n * n * n); nc];
        for line in lines.filter(|l| !l.is_empty()) {
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 3 + nc {
                return Err(Error::input("snapshot row has wrong width"));
            }
            for (c, f) in fields[3..].iter().enumerate() {
                components[c].push(
                    f.parse::<f64>()
                        .map_err(|e| Error::input(format!("snapshot value: {e}")))?,
                );
            }
        }
        if components.iter().any(|c| c.len() != n * n * n) {
            return Err(Error::input("snapshot row count does not match n"));
        }
        Ok(Self {
            n,
            box_len,
            tau,
            components,
        })
    }

    pub fn write_binary(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_bytes())?)
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        Self::from_bytes(&std::fs::read(path)?)
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        Ok(std::fs::write(path, self.to_csv())?)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        Self::from_csv(&std::fs::read_to_string(path)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Snapshot {
        let g = Grid3::new(4, 3.5).unwrap();
        let a: Vec<f64> = (0..64).map(|i| (i as f64).sin() / 3.0).collect();
        let b: Vec<f64> = (0..64).map(|i| 1e-9 * i as f64).collect();
        Snapshot::new(&g, -12.25, vec![a, b]).unwrap()
    }

    #[test]
    fn binary_round_trip() {
        let s = sample();
        assert_eq!(Snapshot::from_bytes(&s.to_bytes()).unwrap(), s);
        assert!(Snapshot::from_bytes(&s.to_bytes()[..100]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let s = sample();
        let text = s.to_csv();
        assert!(text.starts_with("# n=4,"));
        assert_eq!(Snapshot::from_csv(&text).unwrap(), s);
    }
}
