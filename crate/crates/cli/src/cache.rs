//! Content-addressed cache for convolution tables, checksummed on read.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use fpwalk::arena::Arena;
use fpwalk::measures::{ConvolutionTable, ProductMeasure};
use serde::Serialize;
use sha2::{Digest, Sha256};

const MAGIC: &[u8; 8] = b"FPWCT\x001\x00";

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CacheStats {
    pub hits: usize,
    pub misses: usize,
    /// Entries whose checksum failed; they were recomputed and replaced.
    pub corrupt: usize,
}

pub struct Cache {
    dir: Option<PathBuf>,
    pub stats: CacheStats,
}

/// Key of a table: the measure atoms, depth and element cap.
pub fn table_key(base: &ProductMeasure, depth: usize, cap: usize) -> String {
    let mut h = Sha256::new();
    h.update(env!("CARGO_PKG_VERSION").as_bytes());
    for (g, w) in base.atoms() {
        h.update(g.to_string().as_bytes());
        h.update(w.to_bits().to_le_bytes());
    }
    h.update((depth as u64).to_le_bytes());
    h.update((cap as u64).to_le_bytes());
    hex::encode(h.finalize())
}

fn encode(table: &ConvolutionTable) -> Vec<u8> {
    let flat = table.arena().encode();
    let mut body = Vec::new();
    body.extend((flat.len() as u64).to_le_bytes());
    for x in flat {
        body.extend(x.to_le_bytes());
    }
    body.extend(((table.max_n() + 1) as u64).to_le_bytes());
    for n in 0..=table.max_n() {
        let p = table.power(n);
        body.extend((p.len() as u64).to_le_bytes());
        for x in p {
            body.extend(x.to_le_bytes());
        }
    }
    let mut out = MAGIC.to_vec();
    out.extend(Sha256::digest(&body));
    out.extend(body);
    out
}

struct Reader<'a>(&'a [u8]);

impl Reader<'_> {
    fn u64(&mut self) -> Option<u64> {
        let (head, rest) = self.0.split_first_chunk::<8>()?;
        self.0 = rest;
        Some(u64::from_le_bytes(*head))
    }

    fn len(&mut self) -> Option<usize> {
        let n = usize::try_from(self.u64()?).ok()?;
        (n <= self.0.len() / 8).then_some(n)
    }
}

fn decode(bytes: &[u8], base: &ProductMeasure, cap: usize) -> Option<ConvolutionTable> {
    let rest = bytes.strip_prefix(MAGIC)?;
    let (sum, body) = rest.split_first_chunk::<32>()?;
    if Sha256::digest(body).as_slice() != sum {
        return None;
    }
    let mut r = Reader(body);
    let n = r.len()?;
    let flat: Vec<i64> = (0..n).map(|_| r.u64().map(|x| x as i64)).collect::<Option<_>>()?;
    let arena = Arena::decode(&flat)?;
    let count = r.len()?;
    let mut powers = Vec::with_capacity(count);
    for _ in 0..count {
        let len = r.len()?;
        powers.push((0..len).map(|_| r.u64().map(f64::from_bits)).collect::<Option<Vec<_>>>()?);
    }
    if !r.0.is_empty() {
        return None;
    }
    ConvolutionTable::from_parts(base.clone(), arena, powers, cap).ok()
}

/// Writes through a temporary sibling and renames, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension(format!("{}.tmp", path.extension().and_then(|e| e.to_str()).unwrap_or("")));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)
}

impl Cache {
    pub fn new(dir: Option<PathBuf>) -> io::Result<Self> {
        if let Some(d) = &dir {
            fs::create_dir_all(d)?;
        }
        Ok(Self { dir, stats: CacheStats::default() })
    }

    fn path(&self, key: &str) -> Option<PathBuf> {
        self.dir.as_ref().map(|d| d.join(format!("conv-{key}.bin")))
    }

    /// `μ^{*n}` for `n ≤ depth`, from disk when a valid entry exists.
    pub fn table(&mut self, base: &ProductMeasure, depth: usize, cap: usize) -> Result<ConvolutionTable, CacheError> {
        let path = self.path(&table_key(base, depth, cap));
        if let Some(p) = &path {
            match fs::read(p) {
                Ok(bytes) => match decode(&bytes, base, cap) {
                    Some(t) if t.max_n() == depth => {
                        self.stats.hits += 1;
                        return Ok(t);
                    }
                    _ => self.stats.corrupt += 1,
                },
                Err(e) if e.kind() == io::ErrorKind::NotFound => {}
                Err(e) => return Err(CacheError::Io(e)),
            }
        }
        self.stats.misses += 1;
        let mut t = ConvolutionTable::new(base.clone(), cap);
        t.extend_to(depth).map_err(CacheError::Compute)?;
        if let Some(p) = &path {
            write_atomic(p, &encode(&t)).map_err(CacheError::Io)?;
        }
        Ok(t)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CacheError {
    #[error("cache i/o: {0}")]
    Io(io::Error),
    #[error(transparent)]
    Compute(fpwalk::Error),
}

#[cfg(test)]
mod tests {
    use super::*;
    use fpwalk::group::FreeProductSpec;
    use fpwalk::measures::AdaptedMeasure;

    fn base() -> ProductMeasure {
        let spec = FreeProductSpec::from_ranks(&[1, 1]).unwrap();
        AdaptedMeasure::srw(&spec, vec![0.5, 0.5]).unwrap().lift()
    }

    #[test]
    fn put_then_get_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = Cache::new(Some(dir.path().to_path_buf())).unwrap();
        let a = c.table(&base(), 6, 1 << 20).unwrap();
        let b = c.table(&base(), 6, 1 << 20).unwrap();
        assert_eq!(c.stats, CacheStats { hits: 1, misses: 1, corrupt: 0 });
        for n in 0..=6 {
            assert_eq!(a.power(n), b.power(n));
        }
    }

    #[test]
    fn mutated_entry_is_recomputed() {
        let dir = tempfile::tempdir().unwrap();
        let mut c = Cache::new(Some(dir.path().to_path_buf())).unwrap();
        let a = c.table(&base(), 5, 1 << 20).unwrap();
        let path = c.path(&table_key(&base(), 5, 1 << 20)).unwrap();
        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 3;
        bytes[last] ^= 0x40;
        fs::write(&path, bytes).unwrap();
        let b = c.table(&base(), 5, 1 << 20).unwrap();
        assert_eq!(c.stats.corrupt, 1);
        assert_eq!(a.power(5), b.power(5));
        let _ = c.table(&base(), 5, 1 << 20).unwrap();
        assert_eq!(c.stats.hits, 1);
    }
}
