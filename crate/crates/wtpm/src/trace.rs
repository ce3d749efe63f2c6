//! Per-checkpoint convergence records and their CSV serialization.

use std::io::{self, Write};

/// One checkpoint of a solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    /// Updates applied so far (iterations for the gradient solver,
    /// coordinate updates for the coordinate solver).
    pub update_count: u64,
    /// Progress in full-gradient-iteration equivalents: for the
    /// coordinate solver, `update_count * (p + 2) / (n * p)`.
    pub relative_iteration: f64,
    /// Wall-clock milliseconds since the run started. Kept in memory for
    /// benchmark summaries; written to CSV only on request because it is
    /// not reproducible across runs.
    pub wall_ms: f64,
    /// Rayleigh quotient per column.
    pub ritz: Vec<f64>,
    /// Max absolute Ritz error against a reference spectrum, when one was
    /// supplied.
    pub err: Option<f64>,
    pub nnz_x: usize,
    pub nnz_y: usize,
    pub objective: Option<f64>,
    /// Gradient Frobenius norm; recorded by the gradient solver, absent
    /// from the CSV schema.
    pub grad_norm: Option<f64>,
}

/// Ordered checkpoint records of one solver run.
#[derive(Debug, Clone, Default)]
pub struct ConvergenceTrace {
    rows: Vec<TraceRow>,
}

impl ConvergenceTrace {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a row; update counts must be strictly increasing.
    pub fn push(&mut self, row: TraceRow) {
        if let Some(last) = self.rows.last() {
            assert!(
                row.update_count > last.update_count,
                "trace update counts must strictly increase ({} then {})",
                last.update_count,
                row.update_count
            );
            debug_assert!(row.nnz_y >= row.nnz_x || row.nnz_y == 0);
        }
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[TraceRow] {
        &self.rows
    }

    pub fn last(&self) -> Option<&TraceRow> {
        self.rows.last()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    /// CSV header for a run with block width `p`. Column order is fixed:
    /// `update_count,relative_iteration[,wall_ms],ritz_1..ritz_p,err,nnz_x,nnz_y,objective`.
    pub fn csv_header(p: usize, include_timing: bool) -> String {
        let mut cols = vec!["update_count".to_string(), "relative_iteration".to_string()];
        if include_timing {
            cols.push("wall_ms".to_string());
        }
        for l in 1..=p {
            cols.push(format!("ritz_{l}"));
        }
        cols.push("err".to_string());
        cols.push("nnz_x".to_string());
        cols.push("nnz_y".to_string());
        cols.push("objective".to_string());
        cols.join(",")
    }

    /// Writes header and rows. Optional fields serialize as empty cells.
    /// With `include_timing = false` the output is a pure function of the
    /// solver path, so identical runs produce byte-identical files.
    pub fn write_csv(&self, w: &mut impl Write, p: usize, include_timing: bool) -> io::Result<()> {
        writeln!(w, "{}", Self::csv_header(p, include_timing))?;
        for row in &self.rows {
            debug_assert_eq!(row.ritz.len(), p);
            write!(w, "{},{}", row.update_count, row.relative_iteration)?;
            if include_timing {
                write!(w, ",{}", row.wall_ms)?;
            }
            for r in &row.ritz {
                write!(w, ",{r}")?;
            }
            match row.err {
                Some(e) => write!(w, ",{e}")?,
                None => write!(w, ",")?,
            }
            write!(w, ",{},{}", row.nnz_x, row.nnz_y)?;
            match row.objective {
                Some(o) => writeln!(w, ",{o}")?,
                None => writeln!(w, ",")?,
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(count: u64, ritz: Vec<f64>) -> TraceRow {
        TraceRow {
            update_count: count,
            relative_iteration: count as f64,
            wall_ms: 1.5,
            ritz,
            err: None,
            nnz_x: 4,
            nnz_y: 6,
            objective: Some(-1.25),
            grad_norm: None,
        }
    }

    #[test]
    fn header_layout() {
        assert_eq!(
            ConvergenceTrace::csv_header(2, false),
            "update_count,relative_iteration,ritz_1,ritz_2,err,nnz_x,nnz_y,objective"
        );
        assert_eq!(
            ConvergenceTrace::csv_header(1, true),
            "update_count,relative_iteration,wall_ms,ritz_1,err,nnz_x,nnz_y,objective"
        );
    }

    #[test]
    #[should_panic(expected = "strictly increase")]
    fn update_counts_must_increase() {
        let mut t = ConvergenceTrace::new();
        t.push(row(5, vec![1.0]));
        t.push(row(5, vec![1.0]));
    }

    #[test]
    fn csv_round_trip_with_strict_reader() {
        let mut t = ConvergenceTrace::new();
        let mut r1 = row(10, vec![1.5, 2.5]);
        r1.err = Some(0.25);
        t.push(r1);
        t.push(row(20, vec![1.25, 2.25]));
        let mut buf = Vec::new();
        t.write_csv(&mut buf, 2, false).unwrap();

        let mut reader = csv::ReaderBuilder::new()
            .flexible(false)
            .from_reader(buf.as_slice());
        let headers = reader.headers().unwrap().clone();
        assert_eq!(headers.len(), 8);
        let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
        assert_eq!(rows.len(), 2);
        assert_eq!(&rows[0][0], "10");
        assert_eq!(&rows[0][2], "1.5");
        assert_eq!(&rows[0][4], "0.25");
        assert_eq!(&rows[1][4], "");
        assert_eq!(&rows[1][7], "-1.25");
    }
}
