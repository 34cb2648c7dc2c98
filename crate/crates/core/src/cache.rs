//! On-disk cache of deduplicated levels.
//!
//! Layout: `<dir>/<h[0..2]>/<h>.lvl` where `h` is the SHA-256 of the key.
//! A record is the magic `BCLEVEL1` followed by length-prefixed big-endian
//! signed integers (4-byte length, then two's-complement bytes):
//!
//! ```text
//! header: kind, d+1, coeffs (descending)…, n, alphabet size, count
//! entry:  d residue numerators, denominator, multiplicity, witness
//! ```
//!
//! Writers take `<h>.lock` with `create_new`, write a temporary file and
//! publish it with an atomic rename; readers never lock.

use std::fs::{self, File, OpenOptions};
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use num_bigint::BigInt;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::poly::IntPolynomial;

const MAGIC: &[u8; 8] = b"BCLEVEL1";

/// Identity of a cached level.
#[derive(Clone, Debug)]
pub struct CacheKey {
    pub kind: u8,
    pub coeffs: Vec<BigInt>,
    pub n: usize,
    pub alphabet_size: usize,
}

impl CacheKey {
    pub fn new(kind: u8, p: &IntPolynomial, n: usize, alphabet_size: usize) -> Self {
        CacheKey { kind, coeffs: p.coeffs(), n, alphabet_size }
    }

    fn digest(&self) -> String {
        let mut h = Sha256::new();
        h.update(MAGIC);
        for v in self.header_ints() {
            let b = v.to_signed_bytes_be();
            h.update((b.len() as u32).to_be_bytes());
            h.update(&b);
        }
        hex::encode(h.finalize())
    }

    fn header_ints(&self) -> Vec<BigInt> {
        let mut out = vec![BigInt::from(self.kind), BigInt::from(self.coeffs.len())];
        out.extend(self.coeffs.iter().cloned());
        out.push(BigInt::from(self.n));
        out.push(BigInt::from(self.alphabet_size));
        out
    }

    pub fn path(&self, dir: &Path) -> PathBuf {
        let h = self.digest();
        dir.join(&h[..2]).join(format!("{h}.lvl"))
    }
}

/// Cached content: flat residue numerators with a common denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Record {
    pub d: usize,
    pub den: BigInt,
    pub keys: Vec<i64>,
    pub mult: Vec<u64>,
    pub witness: Vec<u64>,
}

fn put(w: &mut impl Write, v: &BigInt) -> std::io::Result<()> {
    let b = v.to_signed_bytes_be();
    w.write_all(&(b.len() as u32).to_be_bytes())?;
    w.write_all(&b)
}

fn get(r: &mut impl Read) -> Result<BigInt> {
    let mut len = [0u8; 4];
    r.read_exact(&mut len)?;
    let len = u32::from_be_bytes(len) as usize;
    if len > 1 << 20 {
        return Err(Error::CacheFormat("oversized integer".into()));
    }
    let mut b = vec![0u8; len];
    r.read_exact(&mut b)?;
    Ok(BigInt::from_signed_bytes_be(&b))
}

fn get_as<T: TryFrom<BigInt>>(r: &mut impl Read, what: &str) -> Result<T> {
    T::try_from(get(r)?).map_err(|_| Error::CacheFormat(format!("{what} out of range")))
}

pub fn load(dir: &Path, key: &CacheKey) -> Result<Option<Record>> {
    let path = key.path(dir);
    let file = match File::open(&path) {
        Ok(f) => f,
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    };
    let mut r = BufReader::new(file);
    let mut magic = [0u8; 8];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::CacheFormat(format!("bad magic in {}", path.display())));
    }
    for expect in key.header_ints() {
        if get(&mut r)? != expect {
            return Err(Error::CacheFormat(format!("header mismatch in {}", path.display())));
        }
    }
    let count: usize = get_as(&mut r, "count")?;
    let d = key.coeffs.len() - 1;
    let mut rec = Record {
        d,
        den: BigInt::from(1),
        keys: Vec::with_capacity(count * d),
        mult: Vec::with_capacity(count),
        witness: Vec::with_capacity(count),
    };
    for i in 0..count {
        for _ in 0..d {
            rec.keys.push(get_as(&mut r, "residue")?);
        }
        let den = get(&mut r)?;
        if i == 0 {
            rec.den = den;
        } else if den != rec.den {
            return Err(Error::CacheFormat("inconsistent denominators".into()));
        }
        rec.mult.push(get_as(&mut r, "multiplicity")?);
        rec.witness.push(get_as(&mut r, "witness")?);
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(Error::CacheFormat("trailing bytes".into()));
    }
    Ok(Some(rec))
}

/// Publish a record; silently skipped when another writer holds the lock.
pub fn store(dir: &Path, key: &CacheKey, rec: &Record) -> Result<()> {
    let path = key.path(dir);
    let parent = path.parent().expect("cache path has a parent");
    fs::create_dir_all(parent)?;
    let lock = path.with_extension("lock");
    match OpenOptions::new().write(true).create_new(true).open(&lock) {
        Ok(_) => {}
        Err(e) if e.kind() == std::io::ErrorKind::AlreadyExists => return Ok(()),
        Err(e) => return Err(e.into()),
    }
    let result = write_record(&path, key, rec);
    let _ = fs::remove_file(&lock);
    result
}

fn write_record(path: &Path, key: &CacheKey, rec: &Record) -> Result<()> {
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut w = BufWriter::new(File::create(&tmp)?);
        w.write_all(MAGIC)?;
        for v in key.header_ints() {
            put(&mut w, &v)?;
        }
        put(&mut w, &BigInt::from(rec.mult.len()))?;
        for i in 0..rec.mult.len() {
            for &k in &rec.keys[i * rec.d..(i + 1) * rec.d] {
                put(&mut w, &BigInt::from(k))?;
            }
            put(&mut w, &rec.den)?;
            put(&mut w, &BigInt::from(rec.mult[i]))?;
            put(&mut w, &BigInt::from(rec.witness[i]))?;
        }
        w.into_inner().map_err(|e| e.into_error())?.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::parse_polynomial;

    #[test]
    fn round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let key = CacheKey::new(0, &parse_polynomial("x^2-x-1").unwrap(), 3, 2);
        let rec = Record {
            d: 2,
            den: BigInt::from(1),
            keys: vec![0, 0, -5, 3, 1 << 40, -(1 << 50)],
            mult: vec![1, 2, 5],
            witness: vec![0, 3, 7],
        };
        assert!(load(dir.path(), &key).unwrap().is_none());
        store(dir.path(), &key, &rec).unwrap();
        assert_eq!(load(dir.path(), &key).unwrap(), Some(rec));
        let other = CacheKey::new(0, &parse_polynomial("x^2-x-1").unwrap(), 4, 2);
        assert!(load(dir.path(), &other).unwrap().is_none());
    }

    #[test]
    fn corrupt_record_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let key = CacheKey::new(1, &parse_polynomial("x^3-x-1").unwrap(), 2, 3);
        let path = key.path(dir.path());
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, b"BCLEVEL1\x00\x00").unwrap();
        assert!(load(dir.path(), &key).is_err());
        fs::write(&path, b"garbage!").unwrap();
        assert!(matches!(load(dir.path(), &key), Err(Error::CacheFormat(_))));
    }
}
