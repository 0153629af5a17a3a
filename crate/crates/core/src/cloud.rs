//! Point clouds in 3-6 dimensional embedding spaces and their file formats.
//!
//! Text format: one point per row, `D` comma-separated columns, optional
//! `# dim=D` header line. Binary format: magic `TPC1`, `u32` dim, `u64` count,
//! then little-endian `f64` values in row-major order.

use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use thiserror::Error;

pub const MIN_DIM: usize = 3;
pub const MAX_DIM: usize = 6;
pub const MIN_POINTS: usize = 4;
pub const BINARY_MAGIC: &[u8; 4] = b"TPC1";

#[derive(Debug, Error)]
pub enum CloudError {
    #[error("dimension {0} outside 3..=6")]
    InvalidDim(usize),
    #[error("need at least {MIN_POINTS} points, got {0}")]
    TooFewPoints(usize),
    #[error("point {index} has a non-finite coordinate")]
    NonFinite { index: usize },
    #[error("point {index} has {got} coordinates, expected {expected}")]
    RowWidth { index: usize, got: usize, expected: usize },
    #[error("duplicate point at rows {first} and {second}")]
    Duplicate { first: usize, second: usize },
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("header declares dim={declared}, caller expected {expected}")]
    DimMismatch { declared: usize, expected: usize },
    #[error("bad binary point cloud: {0}")]
    Binary(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Synthetic,
    StandardMap,
    Cr3bpLinear,
    Cr3bpIntegrated,
    External,
}

/// `N` distinct finite points in `D` dimensions, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    dim: usize,
    coords: Vec<f64>,
    provenance: Provenance,
}

impl PointCloud {
    /// Validates dimension, count, finiteness and distinctness.
    pub fn new(dim: usize, points: Vec<Vec<f64>>, provenance: Provenance) -> Result<Self, CloudError> {
        let mut coords = Vec::with_capacity(points.len() * dim);
        for (index, p) in points.iter().enumerate() {
            if p.len() != dim {
                return Err(CloudError::RowWidth { index, got: p.len(), expected: dim });
            }
            coords.extend_from_slice(p);
        }
        Self::from_flat(dim, coords, provenance)
    }

    pub fn from_flat(dim: usize, coords: Vec<f64>, provenance: Provenance) -> Result<Self, CloudError> {
        if !(MIN_DIM..=MAX_DIM).contains(&dim) {
            return Err(CloudError::InvalidDim(dim));
        }
        if !coords.len().is_multiple_of(dim) {
            return Err(CloudError::RowWidth { index: coords.len() / dim, got: coords.len() % dim, expected: dim });
        }
        let n = coords.len() / dim;
        if n < MIN_POINTS {
            return Err(CloudError::TooFewPoints(n));
        }
        let cloud = Self { dim, coords, provenance };
        for i in 0..n {
            if !cloud.point(i).iter().all(|c| c.is_finite()) {
                return Err(CloudError::NonFinite { index: i });
            }
        }
        if let Some((first, second)) = cloud.first_duplicate() {
            return Err(CloudError::Duplicate { first, second });
        }
        Ok(cloud)
    }

    /// Like [`PointCloud::new`] but drops exact duplicates instead of failing.
    /// Returns the cloud and the number of rows removed.
    pub fn new_dedup(dim: usize, points: Vec<Vec<f64>>, provenance: Provenance) -> Result<(Self, usize), CloudError> {
        let mut seen = HashSet::with_capacity(points.len());
        let mut kept = Vec::with_capacity(points.len());
        let mut removed = 0;
        for (index, p) in points.into_iter().enumerate() {
            if p.len() != dim {
                return Err(CloudError::RowWidth { index, got: p.len(), expected: dim });
            }
            if seen.insert(bit_key(&p)) {
                kept.push(p);
            } else {
                removed += 1;
            }
        }
        Ok((Self::new(dim, kept, provenance)?, removed))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Squared Euclidean distance between two stored points.
    pub fn dist2(&self, i: usize, j: usize) -> f64 {
        sq_dist(self.point(i), self.point(j))
    }

    /// Reorders embedding axes: output axis `a` takes input axis `perm[a]`.
    pub fn permute_axes(&self, perm: &[usize]) -> Result<Self, CloudError> {
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.points() {
            coords.extend(perm.iter().map(|&a| p[a]));
        }
        Self::from_flat(perm.len(), coords, self.provenance)
    }

    fn first_duplicate(&self) -> Option<(usize, usize)> {
        let mut seen = std::collections::HashMap::with_capacity(self.len());
        for (i, p) in self.points().enumerate() {
            if let Some(&first) = seen.get(&bit_key(p)) {
                return Some((first, i));
            }
            seen.insert(bit_key(p), i);
        }
        None
    }

    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "# dim={}", self.dim)?;
        for p in self.points() {
            let row: Vec<String> = p.iter().map(|c| format!("{c:.16e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<(), CloudError> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_csv(&mut out)?;
        out.flush()?;
        Ok(())
    }

    pub fn write_binary<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        out.write_all(BINARY_MAGIC)?;
        out.write_all(&(self.dim as u32).to_le_bytes())?;
        out.write_all(&(self.len() as u64).to_le_bytes())?;
        for c in &self.coords {
            out.write_all(&c.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn save_binary(&self, path: &Path) -> Result<(), CloudError> {
        let mut out = BufWriter::new(File::create(path)?);
        self.write_binary(&mut out)?;
        out.flush()?;
        Ok(())
    }
}

pub(crate) fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn bit_key(p: &[f64]) -> Vec<u64> {
    // +0.0 and -0.0 are the same point.
    p.iter().map(|c| if *c == 0.0 { 0 } else { c.to_bits() }).collect()
}

/// Parses the text format. Rows whose width differs from `dim` are errors,
/// exact duplicate rows are dropped and counted.
pub fn read_csv<R: BufRead>(input: R, dim: usize) -> Result<(PointCloud, usize), CloudError> {
    if !(MIN_DIM..=MAX_DIM).contains(&dim) {
        return Err(CloudError::InvalidDim(dim));
    }
    let mut rows = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(comment) = trimmed.strip_prefix('#') {
            if let Some(d) = comment.trim().strip_prefix("dim=") {
                let declared: usize = d
                    .trim()
                    .parse()
                    .map_err(|_| CloudError::Parse { line: lineno + 1, message: format!("bad dim header {trimmed:?}") })?;
                if declared != dim {
                    return Err(CloudError::DimMismatch { declared, expected: dim });
                }
            }
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if fields.len() != dim {
            return Err(CloudError::Parse {
                line: lineno + 1,
                message: format!("expected {dim} columns, found {}", fields.len()),
            });
        }
        let mut row = Vec::with_capacity(dim);
        for f in fields {
            let v: f64 =
                f.parse().map_err(|_| CloudError::Parse { line: lineno + 1, message: format!("not a number: {f:?}") })?;
            row.push(v);
        }
        rows.push(row);
    }
    PointCloud::new_dedup(dim, rows, Provenance::External)
}

pub fn read_binary<R: Read>(mut input: R) -> Result<PointCloud, CloudError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != BINARY_MAGIC {
        return Err(CloudError::Binary(format!("magic {magic:?}")));
    }
    let mut b4 = [0u8; 4];
    input.read_exact(&mut b4)?;
    let dim = u32::from_le_bytes(b4) as usize;
    let mut b8 = [0u8; 8];
    input.read_exact(&mut b8)?;
    let count = u64::from_le_bytes(b8) as usize;
    let mut coords = Vec::with_capacity(count.saturating_mul(dim).min(1 << 28));
    for _ in 0..count * dim {
        input.read_exact(&mut b8)?;
        coords.push(f64::from_le_bytes(b8));
    }
    PointCloud::from_flat(dim, coords, Provenance::External)
}

/// Loads either format (sniffed by magic bytes). Duplicate rows are removed
/// with a logged warning.
/// Embedding dimension of a cloud file: the binary header, the CSV
/// `# dim=` header, or the width of the first CSV row.
pub fn sniff_dim(path: &Path) -> Result<usize, CloudError> {
    let mut file = BufReader::new(File::open(path)?);
    if file.fill_buf()?.starts_with(BINARY_MAGIC) {
        let mut head = [0u8; 8];
        file.read_exact(&mut head)?;
        return Ok(u32::from_le_bytes([head[4], head[5], head[6], head[7]]) as usize);
    }
    for (i, line) in file.lines().enumerate() {
        let line = line?;
        let t = line.trim();
        if t.is_empty() {
            continue;
        }
        if let Some(c) = t.strip_prefix('#') {
            if let Some(d) = c.trim().strip_prefix("dim=") {
                return d.trim().parse().map_err(|_| CloudError::Parse { line: i + 1, message: format!("bad dim header {t:?}") });
            }
            continue;
        }
        return Ok(t.split(',').count());
    }
    Err(CloudError::TooFewPoints(0))
}

pub fn load_point_cloud(path: &Path, dim: usize) -> Result<PointCloud, CloudError> {
    let mut file = BufReader::new(File::open(path)?);
    let is_binary = file.fill_buf()?.starts_with(BINARY_MAGIC);
    if is_binary {
        let cloud = read_binary(file)?;
        if cloud.dim() != dim {
            return Err(CloudError::DimMismatch { declared: cloud.dim(), expected: dim });
        }
        return Ok(cloud);
    }
    let (cloud, removed) = read_csv(file, dim)?;
    if removed > 0 {
        log::warn!("{}: removed {removed} duplicate row(s)", path.display());
    }
    Ok(cloud)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> Vec<Vec<f64>> {
        vec![vec![0.0, 0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0, 1.0], vec![1.0, 1.0, 0.0, 1.0], vec![0.0, 1.0, 0.0, 1.0]]
    }

    #[test]
    fn rejects_bad_shapes() {
        assert!(matches!(PointCloud::new(2, vec![vec![0.0, 0.0]; 4], Provenance::Synthetic), Err(CloudError::InvalidDim(2))));
        assert!(matches!(PointCloud::new(4, square()[..3].to_vec(), Provenance::Synthetic), Err(CloudError::TooFewPoints(3))));
        let mut dup = square();
        dup.push(dup[1].clone());
        assert!(matches!(PointCloud::new(4, dup, Provenance::Synthetic), Err(CloudError::Duplicate { first: 1, second: 4 })));
        let mut nan = square();
        nan[2][0] = f64::NAN;
        assert!(matches!(PointCloud::new(4, nan, Provenance::Synthetic), Err(CloudError::NonFinite { index: 2 })));
    }

    #[test]
    fn csv_parse_errors_carry_line_numbers() {
        let text = "# dim=3\n0,0,0\n1,0,0\n1,x,0\n";
        match read_csv(text.as_bytes(), 3) {
            Err(CloudError::Parse { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
        let wide = "0,0,0\n1,0,0,2\n";
        assert!(matches!(read_csv(wide.as_bytes(), 3), Err(CloudError::Parse { line: 2, .. })));
        let header = "# dim=4\n0,0,0,0\n";
        assert!(matches!(read_csv(header.as_bytes(), 3), Err(CloudError::DimMismatch { declared: 4, expected: 3 })));
    }

    #[test]
    fn csv_dedups_with_count() {
        let text = "0,0,0,1\n1,0,0,1\n1,1,0,1\n0,1,0,1\n1,0,0,1\n";
        let (cloud, removed) = read_csv(text.as_bytes(), 4).unwrap();
        assert_eq!(cloud.len(), 4);
        assert_eq!(removed, 1);
        assert_eq!(cloud.provenance(), Provenance::External);
    }

    #[test]
    fn binary_roundtrip() {
        let cloud = PointCloud::new(4, square(), Provenance::Synthetic).unwrap();
        let mut buf = Vec::new();
        cloud.write_binary(&mut buf).unwrap();
        assert_eq!(&buf[..4], b"TPC1");
        assert_eq!(buf.len(), 4 + 4 + 8 + 16 * 8);
        let back = read_binary(buf.as_slice()).unwrap();
        assert_eq!(back.coords(), cloud.coords());
        assert!(read_binary(&b"TPC2xxxxxxxxxxxx"[..]).is_err());
    }
}
