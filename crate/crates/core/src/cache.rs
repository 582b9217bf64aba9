//! Line-oriented on-disk persistence for the memo store.
//!
//! Format:
//!
//! ```text
//! SWPV-CACHE 1
//! g|d1,d2,...,dn|num/den
//! ...
//! #count=<N>
//! ```
//!
//! Entries are sorted lexicographically as byte strings, fractions are
//! reduced, and the trailing count line doubles as a truncation check. The
//! format is text so that caches diff cleanly; exactness is preserved because
//! every value is a reduced fraction (the pi power is implied by the key).

use std::fs;
use std::path::Path;

use crate::bracket::MemoStore;
use crate::error::{Error, Result};
use crate::rational::{format_ratio, parse_ratio};

const HEADER: &str = "SWPV-CACHE 1";

/// Serialize a store. Writing is atomic via a sibling temp file.
pub fn cache_save(store: &MemoStore, path: &Path) -> Result<()> {
    let mut lines: Vec<String> = store
        .entries()
        .map(|(g, parts, v)| {
            let ds: Vec<String> = parts.iter().map(|d| d.to_string()).collect();
            format!("{g}|{}|{}", ds.join(","), format_ratio(v))
        })
        .collect();
    lines.sort_unstable();
    let mut out = String::with_capacity(lines.len() * 24 + 32);
    out.push_str(HEADER);
    out.push('\n');
    for l in &lines {
        out.push_str(l);
        out.push('\n');
    }
    out.push_str(&format!("#count={}\n", lines.len()));
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, &out)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Load a cache file into a fresh store. Any malformed line is fatal and
/// reported with its line number.
pub fn cache_load(path: &Path) -> Result<MemoStore> {
    let text = fs::read_to_string(path)?;
    let mut store = MemoStore::new();
    let mut count: Option<usize> = None;
    let mut entries = 0usize;
    let mut lines = 0usize;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        lines += 1;
        if idx == 0 {
            if line != HEADER {
                return Err(Error::CacheVersion {
                    line: lineno,
                    found: line.to_string(),
                });
            }
            continue;
        }
        if count.is_some() {
            return Err(Error::CacheMalformed {
                line: lineno,
                reason: "content after #count line".into(),
            });
        }
        if let Some(c) = line.strip_prefix("#count=") {
            let c: usize = c.parse().map_err(|_| Error::CacheMalformed {
                line: lineno,
                reason: format!("bad count {line:?}"),
            })?;
            count = Some(c);
            continue;
        }
        let (genus, parts, value) = parse_entry(line, lineno)?;
        store
            .insert(genus, &parts, value)
            .map_err(|e| Error::CacheMalformed {
                line: lineno,
                reason: e.to_string(),
            })?;
        entries += 1;
    }
    match count {
        None => Err(Error::CacheMalformed {
            line: lines,
            reason: "missing #count line".into(),
        }),
        Some(c) if c != entries => Err(Error::CacheChecksum {
            line: lines,
            expected: c,
            actual: entries,
        }),
        Some(_) => Ok(store),
    }
}

fn parse_entry(line: &str, lineno: usize) -> Result<(u32, Vec<u16>, crate::rational::Rational)> {
    let mut it = line.split('|');
    let (g, d, v) = match (it.next(), it.next(), it.next(), it.next()) {
        (Some(g), Some(d), Some(v), None) => (g, d, v),
        _ => {
            return Err(Error::CacheMalformed {
                line: lineno,
                reason: "expected g|parts|num/den".into(),
            })
        }
    };
    let genus: u32 = g.parse().map_err(|_| Error::CacheMalformed {
        line: lineno,
        reason: format!("bad genus {g:?}"),
    })?;
    let mut parts: Vec<u16> = Vec::new();
    if !d.is_empty() {
        for piece in d.split(',') {
            parts.push(piece.parse().map_err(|_| Error::CacheMalformed {
                line: lineno,
                reason: format!("bad part {piece:?}"),
            })?);
        }
    }
    if genus < 1 || 2 * genus as i64 - 2 + parts.len() as i64 <= 0 {
        return Err(Error::CacheMalformed {
            line: lineno,
            reason: format!("unstable key g={genus}, n={}", parts.len()),
        });
    }
    let mut sorted = parts.clone();
    sorted.sort_unstable_by(|a, b| b.cmp(a));
    if sorted != parts {
        return Err(Error::CacheMalformed {
            line: lineno,
            reason: "parts not sorted descending".into(),
        });
    }
    let value = parse_ratio(v).map_err(|e| Error::CacheMalformed {
        line: lineno,
        reason: e.to_string(),
    })?;
    Ok((genus, parts, value))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bracket::{bracket, BracketKey};
    use crate::rational::rat;

    fn tmpfile(name: &str) -> std::path::PathBuf {
        let mut p = std::env::temp_dir();
        p.push(format!("swpv-cache-test-{}-{name}", std::process::id()));
        p
    }

    #[test]
    fn round_trip_identity() {
        let mut store = MemoStore::new();
        for (g, parts) in [(2u32, vec![1u16]), (2, vec![0]), (3, vec![2, 1])] {
            bracket(&BracketKey::new(g, parts).unwrap(), &mut store).unwrap();
        }
        let path = tmpfile("roundtrip");
        cache_save(&store, &path).unwrap();
        let loaded = cache_load(&path).unwrap();
        assert_eq!(loaded.len(), store.len());
        for (g, parts, v) in store.entries() {
            assert_eq!(loaded.get(g, parts), Some(v));
        }
        // second save is byte-identical
        let first = std::fs::read(&path).unwrap();
        cache_save(&loaded, &path).unwrap();
        let second = std::fs::read(&path).unwrap();
        assert_eq!(first, second);
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn bad_header_rejected() {
        let path = tmpfile("badheader");
        std::fs::write(&path, "SWPV-CACHE 2\n#count=0\n").unwrap();
        let err = cache_load(&path).unwrap_err();
        assert!(matches!(err, Error::CacheVersion { line: 1, .. }));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn unreduced_fraction_rejected() {
        let path = tmpfile("unreduced");
        std::fs::write(&path, "SWPV-CACHE 1\n2|1|2/4\n#count=1\n").unwrap();
        let err = cache_load(&path).unwrap_err();
        match err {
            Error::CacheMalformed { line, .. } => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn count_mismatch_rejected() {
        let path = tmpfile("count");
        std::fs::write(&path, "SWPV-CACHE 1\n2|1|9/32\n#count=3\n").unwrap();
        let err = cache_load(&path).unwrap_err();
        assert!(matches!(err, Error::CacheChecksum { expected: 3, actual: 1, .. }));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn missing_count_rejected() {
        let path = tmpfile("nocount");
        std::fs::write(&path, "SWPV-CACHE 1\n2|1|9/32\n").unwrap();
        assert!(matches!(
            cache_load(&path).unwrap_err(),
            Error::CacheMalformed { .. }
        ));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn empty_parts_field_is_n_zero() {
        let mut store = MemoStore::new();
        store.insert(2, &[], rat(3, 64)).unwrap();
        let path = tmpfile("nzero");
        cache_save(&store, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.contains("2||3/64"));
        let loaded = cache_load(&path).unwrap();
        assert_eq!(loaded.get(2, &[]), Some(&rat(3, 64)));
        std::fs::remove_file(&path).ok();
    }
}
