//! Text file formats: edge lists (`src dst` per line) and edge batch files
//! (`+ src dst` / `- src dst` per line). `#` starts a comment; parse errors
//! carry the offending line number.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{bail, Context, Result};
use streamwalk::hybrid::{EdgeBatch, EdgeOp, VertexId};

fn content_lines(path: &Path) -> Result<Vec<(usize, String)>> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.with_context(|| format!("{}:{}", path.display(), i + 1))?;
        let body = line.split('#').next().unwrap_or("").trim().to_string();
        if !body.is_empty() {
            out.push((i + 1, body));
        }
    }
    Ok(out)
}

fn parse_id(token: &str, path: &Path, line: usize) -> Result<VertexId> {
    token
        .parse::<VertexId>()
        .with_context(|| format!("{}:{line}: invalid vertex id {token:?}", path.display()))
}

/// Reads `src dst` pairs.
pub fn read_edge_list(path: &Path) -> Result<Vec<(VertexId, VertexId)>> {
    let mut edges = Vec::new();
    for (line, body) in content_lines(path)? {
        let mut it = body.split_whitespace();
        let (Some(a), Some(b), None) = (it.next(), it.next(), it.next()) else {
            bail!(
                "{}:{line}: expected `src dst`, got {body:?}",
                path.display()
            );
        };
        edges.push((parse_id(a, path, line)?, parse_id(b, path, line)?));
    }
    Ok(edges)
}

pub fn write_edge_list(path: &Path, edges: &[(VertexId, VertexId)]) -> Result<()> {
    let mut out = BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    for &(a, b) in edges {
        writeln!(out, "{a} {b}")?;
    }
    Ok(())
}

/// Reads one edge batch: `+ src dst` inserts, `- src dst` deletes.
pub fn read_batch_file(path: &Path) -> Result<EdgeBatch> {
    let mut ops = Vec::new();
    for (line, body) in content_lines(path)? {
        let mut it = body.split_whitespace();
        let (Some(op), Some(a), Some(b), None) = (it.next(), it.next(), it.next(), it.next())
        else {
            bail!(
                "{}:{line}: expected `+|- src dst`, got {body:?}",
                path.display()
            );
        };
        let op = match op {
            "+" => EdgeOp::Insert,
            "-" => EdgeOp::Delete,
            other => bail!(
                "{}:{line}: unknown op {other:?}, expected `+` or `-`",
                path.display()
            ),
        };
        ops.push((op, parse_id(a, path, line)?, parse_id(b, path, line)?));
    }
    EdgeBatch::new(ops).with_context(|| format!("validating batch {}", path.display()))
}

pub fn write_batch_file(path: &Path, batch: &EdgeBatch) -> Result<()> {
    let mut out = BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    );
    for &(op, s, d) in batch.ops() {
        let sign = match op {
            EdgeOp::Insert => '+',
            EdgeOp::Delete => '-',
        };
        writeln!(out, "{sign} {s} {d}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str, contents: &str) -> std::path::PathBuf {
        let path = std::env::temp_dir().join(format!("streamwalk-fmt-{name}-{}", std::process::id()));
        let mut f = File::create(&path).unwrap();
        f.write_all(contents.as_bytes()).unwrap();
        path
    }

    #[test]
    fn edge_list_round_trip_with_comments() {
        let path = tmp("edges", "# header\n1 2\n3 4 # inline\n\n5 6\n");
        let edges = read_edge_list(&path).unwrap();
        assert_eq!(edges, vec![(1, 2), (3, 4), (5, 6)]);
        write_edge_list(&path, &edges).unwrap();
        assert_eq!(read_edge_list(&path).unwrap(), edges);
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let path = tmp("bad-edges", "1 2\nnot numbers\n");
        let err = read_edge_list(&path).unwrap_err().to_string();
        assert!(err.contains(":2"), "error missing line number: {err}");
        std::fs::remove_file(path).ok();

        let path = tmp("bad-batch", "+ 1 2\n* 3 4\n");
        let err = read_batch_file(&path).unwrap_err().to_string();
        assert!(err.contains(":2"), "error missing line number: {err}");
        std::fs::remove_file(path).ok();
    }

    #[test]
    fn batch_round_trip() {
        let path = tmp("batch", "+ 1 2\n- 3 4\n# done\n");
        let batch = read_batch_file(&path).unwrap();
        assert_eq!(
            batch.ops(),
            &[(EdgeOp::Insert, 1, 2), (EdgeOp::Delete, 3, 4)]
        );
        write_batch_file(&path, &batch).unwrap();
        let again = read_batch_file(&path).unwrap();
        assert_eq!(again.ops(), batch.ops());
        std::fs::remove_file(path).ok();
    }
}
