//! Sparse symmetric storage, the matrix-free operator capability, and
//! Matrix Market ingestion.
//!
//! Matrices are kept in compressed sparse column form with both triangles
//! materialized, so a column can be handed to the coordinate solver in
//! `O(nnz(column))` without stitching triangles together. Indices are
//! 0-based everywhere in memory; Matrix Market files are 1-based at the
//! boundary only.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::dense::DenseMatrix;
use crate::error::{Error, Result};

/// Reusable buffer holding one sparse column as parallel index/value arrays.
#[derive(Debug, Clone, Default)]
pub struct ColumnBuf {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl ColumnBuf {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn clear(&mut self) {
        self.indices.clear();
        self.values.clear();
    }

    pub fn push(&mut self, index: usize, value: f64) {
        self.indices.push(index);
        self.values.push(value);
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.indices.iter().copied().zip(self.values.iter().copied())
    }
}

/// Matrix-free capability of a sparse symmetric matrix.
///
/// Implementors expose the dimension, single columns, the diagonal, and a
/// block product. Columns are produced on demand; nothing forces the full
/// matrix to exist in memory. Operators are immutable after construction
/// and safe to share across concurrent solver runs.
pub trait SymmetricOperator: Sync {
    fn dim(&self) -> usize;

    /// Writes column `k` into `out` (cleared first), indices strictly
    /// increasing, values nonzero.
    ///
    /// Panics if `k >= dim()`; use [`SymmetricOperator::column`] for a
    /// checked variant.
    fn column_into(&self, k: usize, out: &mut ColumnBuf);

    /// Dense copy of the diagonal, length `dim()`.
    fn diagonal(&self) -> Vec<f64>;

    /// Range-checked column access.
    fn column(&self, k: usize) -> Result<ColumnBuf> {
        if k >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: k,
                dim: self.dim(),
            });
        }
        let mut buf = ColumnBuf::new();
        self.column_into(k, &mut buf);
        Ok(buf)
    }

    /// Block product `A X`; cost proportional to `nnz(A) * X.cols()`.
    fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        let n = self.dim();
        if x.rows() != n {
            return Err(Error::Dimension(format!(
                "operator of dimension {n} applied to {}x{} block",
                x.rows(),
                x.cols()
            )));
        }
        let mut out = DenseMatrix::zeros(n, x.cols());
        let mut buf = ColumnBuf::new();
        for k in 0..n {
            self.column_into(k, &mut buf);
            for l in 0..x.cols() {
                let xk = x.get(k, l);
                if xk == 0.0 {
                    continue;
                }
                let ocol = out.col_mut(l);
                for (i, a) in buf.iter() {
                    ocol[i] += a * xk;
                }
            }
        }
        Ok(out)
    }
}

/// Compressed sparse column storage of a symmetric matrix with both
/// triangles stored explicitly.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseColumnMatrix {
    dim: usize,
    col_start: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<f64>,
}

/// Dimension bound below which symmetry is verified exhaustively; larger
/// matrices are checked on a deterministic sample.
const EXHAUSTIVE_SYMMETRY_DIM: usize = 2000;

impl SparseColumnMatrix {
    /// Assembles CSC storage from (row, col, value) triplets.
    ///
    /// Duplicate positions are summed, exact zeros are dropped, and the
    /// result is verified to be symmetric (exhaustively up to dimension
    /// 2000, by deterministic sampling above).
    pub fn from_triplets(dim: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut per_col: Vec<Vec<(usize, f64)>> = vec![Vec::new(); dim];
        for &(i, j, v) in triplets {
            if i >= dim || j >= dim {
                return Err(Error::Data(format!(
                    "entry ({i}, {j}) outside declared dimension {dim}"
                )));
            }
            per_col[j].push((i, v));
        }
        let mut col_start = Vec::with_capacity(dim + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        col_start.push(0);
        for col in &mut per_col {
            col.sort_by_key(|&(i, _)| i);
            let mut k = 0;
            while k < col.len() {
                let i = col[k].0;
                let mut v = 0.0;
                while k < col.len() && col[k].0 == i {
                    v += col[k].1;
                    k += 1;
                }
                if v != 0.0 {
                    row_idx.push(i);
                    values.push(v);
                }
            }
            col_start.push(row_idx.len());
        }
        let m = Self {
            dim,
            col_start,
            row_idx,
            values,
        };
        m.verify_symmetry()?;
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored entries, counting both triangles.
    #[inline]
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// Borrowed view of column `k` as (row indices, values).
    #[inline]
    pub fn col(&self, k: usize) -> (&[usize], &[f64]) {
        let (s, e) = (self.col_start[k], self.col_start[k + 1]);
        (&self.row_idx[s..e], &self.values[s..e])
    }

    /// Stored value at (i, j), or 0.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (rows, vals) = self.col(j);
        match rows.binary_search(&i) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.dim, self.dim);
        for j in 0..self.dim {
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                out.set(i, j, v);
            }
        }
        out
    }

    fn verify_symmetry(&self) -> Result<()> {
        let check = |j: usize| -> Result<()> {
            let (rows, vals) = self.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                let mirror = self.get(j, i);
                if mirror != v {
                    return Err(Error::Data(format!(
                        "matrix is not symmetric: a[{i},{j}] = {v} but a[{j},{i}] = {mirror}"
                    )));
                }
            }
            Ok(())
        };
        if self.dim <= EXHAUSTIVE_SYMMETRY_DIM {
            for j in 0..self.dim {
                check(j)?;
            }
        } else {
            // xorshift walk over columns keeps the check deterministic.
            let mut state = 0x9e37_79b9_7f4a_7c15u64;
            for _ in 0..1000 {
                state ^= state << 13;
                state ^= state >> 7;
                state ^= state << 17;
                check((state % self.dim as u64) as usize)?;
            }
        }
        Ok(())
    }
}

impl SymmetricOperator for SparseColumnMatrix {
    fn dim(&self) -> usize {
        self.dim
    }

    fn column_into(&self, k: usize, out: &mut ColumnBuf) {
        out.clear();
        let (rows, vals) = self.col(k);
        out.indices.extend_from_slice(rows);
        out.values.extend_from_slice(vals);
    }

    fn diagonal(&self) -> Vec<f64> {
        (0..self.dim).map(|k| self.get(k, k)).collect()
    }

    fn apply(&self, x: &DenseMatrix) -> Result<DenseMatrix> {
        if x.rows() != self.dim {
            return Err(Error::Dimension(format!(
                "operator of dimension {} applied to {}x{} block",
                self.dim,
                x.rows(),
                x.cols()
            )));
        }
        let mut out = DenseMatrix::zeros(self.dim, x.cols());
        for l in 0..x.cols() {
            let xcol = x.col(l);
            let ocol = out.col_mut(l);
            for k in 0..self.dim {
                let xk = xcol[k];
                if xk == 0.0 {
                    continue;
                }
                let (rows, vals) = self.col(k);
                for (&i, &a) in rows.iter().zip(vals) {
                    ocol[i] += a * xk;
                }
            }
        }
        Ok(out)
    }
}

/// Upper bound on the largest eigenvalue from column data:
/// `max_k (a_kk + Σ_{i≠k} |a_ik|)`.
pub fn gershgorin_upper_bound(op: &dyn SymmetricOperator) -> f64 {
    let n = op.dim();
    let mut bound = f64::NEG_INFINITY;
    let mut buf = ColumnBuf::new();
    for k in 0..n {
        op.column_into(k, &mut buf);
        let mut center = 0.0;
        let mut radius = 0.0;
        for (i, v) in buf.iter() {
            if i == k {
                center = v;
            } else {
                radius += v.abs();
            }
        }
        bound = bound.max(center + radius);
    }
    if bound.is_finite() {
        bound
    } else {
        0.0
    }
}

#[derive(PartialEq)]
enum MmSymmetry {
    Symmetric,
    General,
}

/// Loads a Matrix Market "coordinate real" file declared symmetric or
/// general into fully expanded CSC storage.
///
/// Symmetric files must store the lower triangle; each off-diagonal entry
/// is mirrored. General files are accepted only when numerically
/// symmetric. Explicit zeros are dropped. The reported [`SparseColumnMatrix::nnz`]
/// counts every stored entry including mirrored off-diagonals.
pub fn load_matrix_market(path: impl AsRef<Path>) -> Result<SparseColumnMatrix> {
    let file = File::open(path.as_ref())?;
    read_matrix_market(BufReader::new(file))
}

/// Same as [`load_matrix_market`] but from any reader.
pub fn read_matrix_market(reader: impl BufRead) -> Result<SparseColumnMatrix> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| Error::Format("empty file".into()))??;
    let symmetry = parse_header(&header)?;

    let mut size_line: Option<String> = None;
    for line in lines.by_ref() {
        let line = line?;
        if line.starts_with('%') || line.trim().is_empty() {
            continue;
        }
        size_line = Some(line);
        break;
    }
    let size_line = size_line.ok_or_else(|| Error::Format("missing size line".into()))?;
    let mut it = size_line.split_whitespace();
    let rows: usize = parse_field(it.next(), "row count")?;
    let cols: usize = parse_field(it.next(), "column count")?;
    let declared_nnz: usize = parse_field(it.next(), "entry count")?;
    if rows != cols {
        return Err(Error::UnsupportedFormat(format!(
            "matrix must be square, got {rows}x{cols}"
        )));
    }

    let mut triplets = Vec::with_capacity(declared_nnz * 2);
    let mut seen = 0usize;
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let i: usize = parse_field(it.next(), "row index")?;
        let j: usize = parse_field(it.next(), "column index")?;
        let v: f64 = parse_field(it.next(), "value")?;
        if i < 1 || i > rows || j < 1 || j > cols {
            return Err(Error::Data(format!(
                "entry ({i}, {j}) outside declared bounds {rows}x{cols}"
            )));
        }
        let (i, j) = (i - 1, j - 1);
        match symmetry {
            MmSymmetry::Symmetric => {
                if i < j {
                    return Err(Error::Format(format!(
                        "symmetric file stores an upper-triangle entry ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                triplets.push((i, j, v));
                if i != j {
                    triplets.push((j, i, v));
                }
            }
            MmSymmetry::General => triplets.push((i, j, v)),
        }
        seen += 1;
    }
    if seen != declared_nnz {
        return Err(Error::Data(format!(
            "header declares {declared_nnz} entries but file holds {seen}"
        )));
    }
    SparseColumnMatrix::from_triplets(rows, &triplets)
}

fn parse_header(header: &str) -> Result<MmSymmetry> {
    let fields: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" {
        return Err(Error::Format(format!("bad Matrix Market header: {header}")));
    }
    if fields[1] != "matrix" {
        return Err(Error::UnsupportedFormat(format!("object {}", fields[1])));
    }
    if fields[2] != "coordinate" {
        return Err(Error::UnsupportedFormat(format!("format {}", fields[2])));
    }
    if fields[3] != "real" {
        return Err(Error::UnsupportedFormat(format!("field {}", fields[3])));
    }
    match fields[4].as_str() {
        "symmetric" => Ok(MmSymmetry::Symmetric),
        "general" => Ok(MmSymmetry::General),
        other => Err(Error::UnsupportedFormat(format!("symmetry {other}"))),
    }
}

fn parse_field<T: std::str::FromStr>(field: Option<&str>, what: &str) -> Result<T> {
    field
        .ok_or_else(|| Error::Format(format!("missing {what}")))?
        .parse()
        .map_err(|_| Error::Format(format!("cannot parse {what}: {field:?}")))
}

/// Writes `coordinate real symmetric` storage of the lower triangle with
/// 17 significant decimal digits.
pub fn write_matrix_market(m: &SparseColumnMatrix, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    emit_matrix_market(m, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Same as [`write_matrix_market`] but to any writer.
pub fn emit_matrix_market(m: &SparseColumnMatrix, w: &mut impl Write) -> Result<()> {
    let n = m.dim();
    let mut lower = 0usize;
    for j in 0..n {
        let (rows, _) = m.col(j);
        lower += rows.iter().filter(|&&i| i >= j).count();
    }
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{n} {n} {lower}")?;
    for j in 0..n {
        let (rows, vals) = m.col(j);
        for (&i, &v) in rows.iter().zip(vals) {
            if i >= j {
                writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn laplacian_triplets(n: usize) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i + 1, i, -1.0));
                t.push((i, i + 1, -1.0));
            }
        }
        t
    }

    fn random_symmetric_triplets(
        n: usize,
        fill: f64,
        rng: &mut impl Rng,
    ) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, rng.gen_range(0.5..2.0)));
            for j in 0..i {
                if rng.gen_bool(fill) {
                    let v = rng.gen_range(-1.0..1.0);
                    t.push((i, j, v));
                    t.push((j, i, v));
                }
            }
        }
        t
    }

    #[test]
    fn two_by_two_symmetric_file() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 2.0\n2 1 1.0\n";
        let m = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(m.nnz(), 3);
        let (rows, vals) = m.col(0);
        assert_eq!(rows, &[0, 1]);
        assert_eq!(vals, &[2.0, 1.0]);
        let (rows, vals) = m.col(1);
        assert_eq!(rows, &[0]);
        assert_eq!(vals, &[1.0]);
        assert_eq!(m.get(0, 1), 1.0);
        assert_eq!(m.get(1, 1), 0.0);
    }

    #[test]
    fn lower_triangle_of_diagonal_matrix() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n3 3 3\n1 1 1.0\n2 2 2.0\n3 3 3.0\n";
        let m = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(m.nnz(), 3);
        for k in 0..3 {
            let (rows, vals) = m.col(k);
            assert_eq!(rows, &[k]);
            assert_eq!(vals, &[(k + 1) as f64]);
        }
    }

    #[test]
    fn random_load_matches_dense_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let triplets = random_symmetric_triplets(50, 0.15, &mut rng);
        let m = SparseColumnMatrix::from_triplets(50, &triplets).unwrap();

        let mut text = String::new();
        let mut lower: Vec<(usize, usize, f64)> = Vec::new();
        for j in 0..50 {
            let (rows, vals) = m.col(j);
            for (&i, &v) in rows.iter().zip(vals) {
                if i >= j {
                    lower.push((i, j, v));
                }
            }
        }
        text.push_str("%%MatrixMarket matrix coordinate real symmetric\n");
        text.push_str(&format!("50 50 {}\n", lower.len()));
        for (i, j, v) in lower {
            text.push_str(&format!("{} {} {:.16e}\n", i + 1, j + 1, v));
        }
        let loaded = read_matrix_market(text.as_bytes()).unwrap();
        let d = loaded.to_dense();
        let reference = m.to_dense();
        for i in 0..50 {
            for j in 0..50 {
                assert_eq!(d.get(i, j), d.get(j, i));
                assert_eq!(d.get(i, j), reference.get(i, j));
            }
        }
    }

    #[test]
    fn general_file_requires_numeric_symmetry() {
        let good = "%%MatrixMarket matrix coordinate real general\n2 2 4\n1 1 2.0\n2 1 1.0\n1 2 1.0\n2 2 3.0\n";
        assert!(read_matrix_market(good.as_bytes()).is_ok());
        let bad = "%%MatrixMarket matrix coordinate real general\n2 2 4\n1 1 2.0\n2 1 1.0\n1 2 1.5\n2 2 3.0\n";
        assert!(matches!(
            read_matrix_market(bad.as_bytes()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn header_errors() {
        let malformed = "%%NotMatrixMarket x\n1 1 0\n";
        assert!(matches!(
            read_matrix_market(malformed.as_bytes()),
            Err(Error::Format(_))
        ));
        let skew = "%%MatrixMarket matrix coordinate real skew-symmetric\n2 2 1\n2 1 1.0\n";
        assert!(matches!(
            read_matrix_market(skew.as_bytes()),
            Err(Error::UnsupportedFormat(_))
        ));
        let pattern = "%%MatrixMarket matrix coordinate pattern symmetric\n2 2 1\n2 1\n";
        assert!(matches!(
            read_matrix_market(pattern.as_bytes()),
            Err(Error::UnsupportedFormat(_))
        ));
    }

    #[test]
    fn out_of_bounds_index_is_data_error() {
        let text = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n";
        assert!(matches!(
            read_matrix_market(text.as_bytes()),
            Err(Error::Data(_))
        ));
    }

    #[test]
    fn explicit_zeros_are_dropped() {
        let text =
            "%%MatrixMarket matrix coordinate real symmetric\n2 2 3\n1 1 1.0\n2 1 0.0\n2 2 1.0\n";
        let m = read_matrix_market(text.as_bytes()).unwrap();
        assert_eq!(m.nnz(), 2);
    }

    #[test]
    fn column_access_identity_and_laplacian() {
        let eye = SparseColumnMatrix::from_triplets(3, &[(0, 0, 1.0), (1, 1, 1.0), (2, 2, 1.0)])
            .unwrap();
        let c = eye.column(1).unwrap();
        assert_eq!(c.indices, &[1]);
        assert_eq!(c.values, &[1.0]);

        let lap = SparseColumnMatrix::from_triplets(4, &laplacian_triplets(4)).unwrap();
        let c = lap.column(1).unwrap();
        assert_eq!(c.indices, &[0, 1, 2]);
        assert_eq!(c.values, &[-1.0, 2.0, -1.0]);

        assert!(matches!(
            lap.column(4),
            Err(Error::IndexOutOfRange { .. })
        ));
    }

    #[test]
    fn columns_match_dense_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let m =
            SparseColumnMatrix::from_triplets(30, &random_symmetric_triplets(30, 0.2, &mut rng))
                .unwrap();
        let d = m.to_dense();
        for k in 0..30 {
            let c = m.column(k).unwrap();
            let mut densified = vec![0.0; 30];
            for (i, v) in c.iter() {
                densified[i] = v;
            }
            for i in 0..30 {
                assert_eq!(densified[i], d.get(i, k));
            }
        }
    }

    #[test]
    fn block_apply_identity_and_diagonal() {
        let eye = SparseColumnMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 1.0)]).unwrap();
        let x = DenseMatrix::from_fn(2, 2, |i, j| (1 + i + 2 * j) as f64);
        let ax = eye.apply(&x).unwrap();
        assert_eq!(ax, x);

        let d = SparseColumnMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let ones = DenseMatrix::from_fn(2, 1, |_, _| 1.0);
        let out = d.apply(&ones).unwrap();
        assert_eq!(out.col(0), &[1.0, 2.0]);

        let bad = DenseMatrix::zeros(3, 1);
        assert!(matches!(d.apply(&bad), Err(Error::Dimension(_))));
    }

    #[test]
    fn block_apply_matches_dense_triple_loop() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m =
            SparseColumnMatrix::from_triplets(30, &random_symmetric_triplets(30, 0.2, &mut rng))
                .unwrap();
        let x = DenseMatrix::from_fn(30, 3, |_, _| rng.gen_range(-1.0..1.0));
        let ax = m.apply(&x).unwrap();
        let dense = m.to_dense();
        for l in 0..3 {
            for i in 0..30 {
                let mut s = 0.0;
                for k in 0..30 {
                    s += dense.get(i, k) * x.get(k, l);
                }
                let rel = (ax.get(i, l) - s).abs() / s.abs().max(1.0);
                assert!(rel <= 1e-14, "mismatch at ({i},{l}): {} vs {s}", ax.get(i, l));
            }
        }
    }

    #[test]
    fn block_apply_unit_vectors_match_columns() {
        let lap = SparseColumnMatrix::from_triplets(12, &laplacian_triplets(12)).unwrap();
        for k in 0..12 {
            let e = DenseMatrix::from_fn(12, 1, |i, _| if i == k { 1.0 } else { 0.0 });
            let ae = lap.apply(&e).unwrap();
            let c = lap.column(k).unwrap();
            let mut densified = vec![0.0; 12];
            for (i, v) in c.iter() {
                densified[i] = v;
            }
            assert_eq!(ae.col(0), &densified[..]);
        }
    }

    #[test]
    fn nnz_survives_serialization_round_trip() {
        let lap = SparseColumnMatrix::from_triplets(5, &laplacian_triplets(5)).unwrap();
        assert_eq!(lap.nnz(), 13);
        let mut buf = Vec::new();
        emit_matrix_market(&lap, &mut buf).unwrap();
        let reloaded = read_matrix_market(buf.as_slice()).unwrap();
        assert_eq!(reloaded.nnz(), 13);
        assert_eq!(reloaded, lap);
    }

    #[test]
    fn gershgorin_bounds_laplacian_spectrum() {
        let lap = SparseColumnMatrix::from_triplets(40, &laplacian_triplets(40)).unwrap();
        let bound = gershgorin_upper_bound(&lap);
        assert_eq!(bound, 4.0);
    }
}
