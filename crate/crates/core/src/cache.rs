//! On-disk memo of generation tests, keyed by the set of entry codes.
//!
//! File layout, little-endian: the magic `PRALABGC`, a `u16` version, a
//! `u8` group kind (0 PSL, 1 PGL), the `u32` field order, a `u64` entry
//! count, then per entry a `u8` length, that many `u128` codes in
//! ascending order, and a `u8` result.

use std::collections::HashMap;
use std::fs;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::group::GroupKind;
use crate::subgroup::generates;
use crate::table::{ElemId, GroupTable};

pub const CACHE_ENV: &str = "PRALAB_CACHE_DIR";
const MAGIC: &[u8; 8] = b"PRALABGC";
const VERSION: u16 = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenCache {
    kind: GroupKind,
    q: u32,
    map: HashMap<Vec<u128>, bool>,
    dirty: bool,
}

impl GenCache {
    pub fn new(kind: GroupKind, q: u32) -> GenCache {
        GenCache {
            kind,
            q,
            map: HashMap::new(),
            dirty: false,
        }
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn is_dirty(&self) -> bool {
        self.dirty
    }

    pub fn key(table: &GroupTable, entries: &[ElemId]) -> Vec<u128> {
        let mut key: Vec<u128> = entries.iter().map(|&x| table.code(x)).collect();
        key.sort_unstable();
        key.dedup();
        key
    }

    pub fn get(&self, key: &[u128]) -> Option<bool> {
        self.map.get(key).copied()
    }

    pub fn insert(&mut self, key: Vec<u128>, value: bool) {
        if self.map.insert(key, value) != Some(value) {
            self.dirty = true;
        }
    }

    /// Whether `entries` generate the table's group, consulting the memo.
    pub fn generates(&mut self, table: &GroupTable, entries: &[ElemId]) -> bool {
        let key = GenCache::key(table, entries);
        if let Some(v) = self.get(&key) {
            return v;
        }
        let v = generates(table, entries);
        self.insert(key, v);
        v
    }

    pub fn write_to<W: Write>(&self, w: W) -> Result<()> {
        let mut w = BufWriter::new(w);
        w.write_all(MAGIC)?;
        w.write_all(&VERSION.to_le_bytes())?;
        w.write_all(&[kind_byte(self.kind)])?;
        w.write_all(&self.q.to_le_bytes())?;
        w.write_all(&(self.map.len() as u64).to_le_bytes())?;
        let mut entries: Vec<(&Vec<u128>, &bool)> = self.map.iter().collect();
        entries.sort();
        for (key, &v) in entries {
            let len = u8::try_from(key.len())
                .map_err(|_| Error::Cache(format!("key of {} codes is too long", key.len())))?;
            w.write_all(&[len])?;
            for c in key {
                w.write_all(&c.to_le_bytes())?;
            }
            w.write_all(&[v as u8])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(r: R, kind: GroupKind, q: u32) -> Result<GenCache> {
        let mut r = BufReader::new(r);
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != MAGIC {
            return Err(Error::Cache("bad magic".into()));
        }
        let version = u16::from_le_bytes(read_array(&mut r)?);
        if version != VERSION {
            return Err(Error::Cache(format!("unsupported version {version}")));
        }
        let [k] = read_array::<1>(&mut r)?;
        let file_q = u32::from_le_bytes(read_array(&mut r)?);
        if k != kind_byte(kind) || file_q != q {
            return Err(Error::Cache(format!(
                "cache belongs to another group (kind byte {k}, q = {file_q})"
            )));
        }
        let count = u64::from_le_bytes(read_array(&mut r)?);
        let mut cache = GenCache::new(kind, q);
        for _ in 0..count {
            let [len] = read_array::<1>(&mut r)?;
            let key = (0..len)
                .map(|_| read_array(&mut r).map(u128::from_le_bytes))
                .collect::<Result<Vec<_>>>()?;
            let [v] = read_array::<1>(&mut r)?;
            if v > 1 {
                return Err(Error::Cache(format!("bad result byte {v}")));
            }
            cache.map.insert(key, v == 1);
        }
        Ok(cache)
    }

    pub fn file_name(kind: GroupKind, q: u32) -> String {
        format!("gen-{kind}-{q}.bin")
    }

    /// Loads the cache for `table` from `dir`, or starts an empty one.
    pub fn load(dir: &Path, table: &GroupTable) -> Result<GenCache> {
        let path = dir.join(GenCache::file_name(table.kind(), table.q()));
        match fs::File::open(&path) {
            Ok(f) => GenCache::read_from(f, table.kind(), table.q()),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
                Ok(GenCache::new(table.kind(), table.q()))
            }
            Err(e) => Err(e.into()),
        }
    }

    /// Writes atomically through a temporary file in `dir`.
    pub fn save(&self, dir: &Path) -> Result<PathBuf> {
        fs::create_dir_all(dir)?;
        let path = dir.join(GenCache::file_name(self.kind, self.q));
        let tmp = path.with_extension("tmp");
        self.write_to(fs::File::create(&tmp)?)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// The directory named by `PRALAB_CACHE_DIR`, if set.
    pub fn env_dir() -> Option<PathBuf> {
        std::env::var_os(CACHE_ENV)
            .filter(|v| !v.is_empty())
            .map(PathBuf::from)
    }
}

fn kind_byte(kind: GroupKind) -> u8 {
    match kind {
        GroupKind::Psl => 0,
        GroupKind::Pgl => 1,
    }
}

fn read_array<const N: usize>(r: &mut impl Read) -> Result<[u8; N]> {
    let mut buf = [0u8; N];
    r.read_exact(&mut buf)
        .map_err(|e| Error::Cache(format!("truncated cache file: {e}")))?;
    Ok(buf)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_lookup() {
        let g = GroupTable::build(GroupKind::Psl, 5, 1).unwrap();
        let mut c = GenCache::new(g.kind(), g.q());
        let u = g.parse_elem("1,1,0,1").unwrap();
        let v = g.parse_elem("1,0,1,1").unwrap();
        assert!(c.generates(&g, &[u, v, u]));
        assert!(!c.generates(&g, &[u]));
        assert_eq!(c.get(&GenCache::key(&g, &[v, u])), Some(true));
        let mut bytes = Vec::new();
        c.write_to(&mut bytes).unwrap();
        assert_eq!(&bytes[..8], MAGIC);
        let back = GenCache::read_from(&bytes[..], g.kind(), g.q()).unwrap();
        assert_eq!(back.map, c.map);
        assert!(GenCache::read_from(&bytes[..], GroupKind::Pgl, 5).is_err());
        assert!(GenCache::read_from(&bytes[..bytes.len() - 1], g.kind(), g.q()).is_err());
    }
}
