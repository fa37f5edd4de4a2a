//! Output plumbing: atomic file writes, number formatting, and parsing of
//! grid/list arguments.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{bail, Context, Result};

/// Writes via a temporary file in the target directory plus rename, so a
/// crash never leaves a half-written artifact.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    let mut tmp = match dir {
        Some(d) => tempfile::NamedTempFile::new_in(d),
        None => tempfile::NamedTempFile::new_in("."),
    }
    .context("creating temporary file")?;
    std::io::Write::write_all(&mut tmp, bytes)?;
    tmp.persist(path)
        .with_context(|| format!("renaming into {}", path.display()))?;
    Ok(())
}

/// 12 significant digits, scientific.
pub fn sig12(v: f64) -> String {
    format!("{v:.11e}")
}

/// Assembles a CSV with `\n` line endings, a mandatory header row and no
/// trailing separator.
pub fn csv(header: &str, rows: impl IntoIterator<Item = String>) -> String {
    let mut out = String::new();
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row);
        out.push('\n');
    }
    out
}

/// Parses `a:b:factor` as a geometric grid, or a comma list of explicit
/// points. Grids must be ascending.
pub fn parse_grid(s: &str) -> Result<Vec<u64>> {
    let grid = if s.contains(':') {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            bail!("grid must be a:b:factor or a comma list, got {s:?}");
        }
        let a: u64 = parts[0].parse().context("grid start")?;
        let b: u64 = parts[1].parse().context("grid end")?;
        let f: u64 = parts[2].parse().context("grid factor")?;
        if a == 0 || f < 2 || a > b {
            bail!("grid needs start >= 1, factor >= 2 and start <= end");
        }
        let mut grid = Vec::new();
        let mut x = a;
        loop {
            grid.push(x);
            match x.checked_mul(f) {
                Some(next) if next <= b => x = next,
                _ => break,
            }
        }
        grid
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<u64>().with_context(|| format!("grid point {p:?}")))
            .collect::<Result<Vec<u64>>>()?
    };
    if grid.is_empty() || grid.windows(2).any(|w| w[0] >= w[1]) {
        bail!("grid must be nonempty and strictly ascending");
    }
    Ok(grid)
}

/// Parses `4`, `1,2,3` or `2..6` into an ascending list.
pub fn parse_klist(s: &str) -> Result<Vec<u32>> {
    let list: Vec<u32> = if let Some((lo, hi)) = s.split_once("..") {
        let lo: u32 = lo.parse().context("k range start")?;
        let hi: u32 = hi.parse().context("k range end")?;
        if lo > hi {
            bail!("empty k range {s:?}");
        }
        (lo..=hi).collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<u32>().with_context(|| format!("k value {p:?}")))
            .collect::<Result<Vec<u32>>>()?
    };
    if list.is_empty() || list.windows(2).any(|w| w[0] >= w[1]) {
        bail!("k list must be nonempty and strictly ascending");
    }
    Ok(list)
}

/// Renders a compact JSON table: an array of objects with the given keys.
pub fn json_rows(rows: Vec<serde_json::Value>) -> String {
    let mut out = String::new();
    out.push_str("[\n");
    for (i, row) in rows.iter().enumerate() {
        let _ = write!(out, "  {row}");
        if i + 1 < rows.len() {
            out.push(',');
        }
        out.push('\n');
    }
    out.push_str("]\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_forms() {
        assert_eq!(parse_grid("10:1000:10").unwrap(), vec![10, 100, 1000]);
        assert_eq!(parse_grid("5,7,11").unwrap(), vec![5, 7, 11]);
        assert!(parse_grid("10:5:10").is_err());
        assert!(parse_grid("0:5:2").is_err());
        assert!(parse_grid("7,7").is_err());
    }

    #[test]
    fn k_forms() {
        assert_eq!(parse_klist("4").unwrap(), vec![4]);
        assert_eq!(parse_klist("1,2,3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_klist("2..6").unwrap(), vec![2, 3, 4, 5, 6]);
        assert!(parse_klist("6..2").is_err());
    }

    #[test]
    fn sig12_width() {
        assert_eq!(sig12(1.0), "1.00000000000e0");
        assert_eq!(sig12(19.0 / 10.0), "1.90000000000e0");
    }
}
