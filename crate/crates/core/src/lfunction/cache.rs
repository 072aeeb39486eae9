//! On-disk L-coefficient tables, one file per (q, g).
//!
//! Layout (text):
//!
//! ```text
//! # ffquad-lcache version=1 q=5 g=2 rows=2500
//! <rank of D>,c_0,...,c_{2g}
//! ...
//! # sha256=<hex of every preceding byte>
//! ```

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::LPoly;
use crate::error::{Error, Result};
use crate::ffpoly::{Fq, MonicPoly};

pub const CACHE_VERSION: u32 = 1;

pub fn cache_path(dir: &Path, q: u32, g: usize) -> PathBuf {
    dir.join(format!("lcoeffs_q{q}_g{g}_v{CACHE_VERSION}.csv"))
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

pub fn render(q: u32, g: usize, rows: &[LPoly]) -> String {
    let mut body = format!("# ffquad-lcache version={CACHE_VERSION} q={q} g={g} rows={}\n", rows.len());
    for l in rows {
        body.push_str(&l.discriminant().rank().to_string());
        for c in l.coeffs() {
            body.push(',');
            body.push_str(&c.to_string());
        }
        body.push('\n');
    }
    let digest = Sha256::digest(body.as_bytes());
    body.push_str(&format!("# sha256={}\n", hex(&digest)));
    body
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

/// Write atomically: temp file in the same directory, then rename.
pub fn store(dir: &Path, q: u32, g: usize, rows: &[LPoly]) -> Result<PathBuf> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let path = cache_path(dir, q, g);
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut f = fs::File::create(&tmp).map_err(|e| io_err(&tmp, e))?;
        f.write_all(render(q, g, rows).as_bytes()).map_err(|e| io_err(&tmp, e))?;
        f.sync_all().map_err(|e| io_err(&tmp, e))?;
    }
    fs::rename(&tmp, &path).map_err(|e| io_err(&path, e))?;
    Ok(path)
}

pub fn parse(text: &str, q: u32, g: usize) -> Result<Vec<LPoly>> {
    let bad = |m: &str| Error::Cache(m.to_string());
    let body_end = text.rfind("# sha256=").ok_or_else(|| bad("missing checksum line"))?;
    let (body, tail) = text.split_at(body_end);
    let want = tail.trim_start_matches("# sha256=").trim();
    if hex(&Sha256::digest(body.as_bytes())) != want {
        return Err(bad("checksum mismatch"));
    }
    let mut lines = body.lines();
    let header = lines.next().ok_or_else(|| bad("empty file"))?;
    let expect = format!("# ffquad-lcache version={CACHE_VERSION} q={q} g={g} rows=");
    let rows: usize = header
        .strip_prefix(&expect)
        .ok_or_else(|| bad("header does not match (q, g, version)"))?
        .parse()
        .map_err(|_| bad("bad row count"))?;
    let fq = Fq::new(q)?;
    let mut out = Vec::with_capacity(rows);
    for line in lines {
        let mut it = line.split(',');
        let rank: u64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| bad("bad rank"))?;
        let coeffs: Vec<i64> = it
            .map(|s| s.parse().map_err(|_| bad("bad coefficient")))
            .collect::<Result<_>>()?;
        if rank >= fq.norm(2 * g + 1) as u64 {
            return Err(bad("rank out of range"));
        }
        let d = MonicPoly::unrank(fq, 2 * g + 1, rank);
        out.push(LPoly::from_coeffs(d, coeffs).map_err(|e| bad(&e.to_string()))?);
    }
    if out.len() != rows {
        return Err(bad("row count mismatch"));
    }
    Ok(out)
}

pub fn load(dir: &Path, q: u32, g: usize) -> Result<Vec<LPoly>> {
    let path = cache_path(dir, q, g);
    let text = fs::read_to_string(&path).map_err(|e| io_err(&path, e))?;
    parse(&text, q, g)
}

/// Outcome of a cached ensemble lookup.
#[derive(Debug)]
pub enum CacheStatus {
    Hit,
    Created,
    /// The file existed but failed validation; it was rebuilt.
    Rebuilt(String),
}

/// Full ensemble for (q, g), read from the cache when valid.
pub fn ensemble_cached(dir: &Path, fq: Fq, g: usize) -> Result<(Vec<LPoly>, CacheStatus)> {
    let path = cache_path(dir, fq.q(), g);
    let status = if path.exists() {
        match load(dir, fq.q(), g) {
            Ok(rows) => return Ok((rows, CacheStatus::Hit)),
            Err(e) => CacheStatus::Rebuilt(e.to_string()),
        }
    } else {
        CacheStatus::Created
    };
    let rows = super::full_ensemble(fq, g)?;
    store(dir, fq.q(), g, &rows)?;
    Ok((rows, status))
}
