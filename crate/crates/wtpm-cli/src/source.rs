//! Matrix sources: files, the generator mini-language, and reference
//! spectra.

use std::fs;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use wtpm::dense::DenseMatrix;
use wtpm::hamiltonian::{
    hubbard_operator, laplacian_operator, Boundary, HubbardSpec, Lattice, DEFAULT_DIMENSION_CAP,
};
use wtpm::sparse::{load_matrix_market, SymmetricOperator};

/// Parses a generator spec of the form `name:args`.
///
/// Supported generators:
/// - `laplacian:N` — 1-D Laplacian of dimension N
/// - `hubbard:SITES,NUP,NDN[,T[,U[,open|periodic]]]` — Hubbard model on a
///   chain (`SITES` = `L`) or grid (`SITES` = `LXxLY`); defaults T=1,
///   U=0, open boundary
pub fn build_generated(spec: &str) -> Result<Box<dyn SymmetricOperator>> {
    let (name, args) = spec
        .split_once(':')
        .ok_or_else(|| anyhow!("generator spec must look like name:args, got {spec:?}"))?;
    match name {
        "laplacian" => {
            let n: usize = args
                .parse()
                .with_context(|| format!("bad laplacian dimension {args:?}"))?;
            Ok(Box::new(laplacian_operator(n)?))
        }
        "hubbard" => {
            let parts: Vec<&str> = args.split(',').collect();
            if parts.len() < 3 {
                bail!("hubbard spec needs SITES,NUP,NDN, got {args:?}");
            }
            let lattice = parse_lattice(parts[0])?;
            let n_up: usize = parts[1]
                .parse()
                .with_context(|| format!("bad spin-up count {:?}", parts[1]))?;
            let n_down: usize = parts[2]
                .parse()
                .with_context(|| format!("bad spin-down count {:?}", parts[2]))?;
            let hopping: f64 = match parts.get(3) {
                Some(s) => s.parse().with_context(|| format!("bad hopping {s:?}"))?,
                None => 1.0,
            };
            let onsite: f64 = match parts.get(4) {
                Some(s) => s.parse().with_context(|| format!("bad onsite term {s:?}"))?,
                None => 0.0,
            };
            let boundary = match parts.get(5) {
                Some(&"open") | None => Boundary::Open,
                Some(&"periodic") => Boundary::Periodic,
                Some(other) => bail!("boundary must be open or periodic, got {other:?}"),
            };
            let spec = HubbardSpec {
                lattice,
                n_up,
                n_down,
                hopping,
                onsite,
                boundary,
            };
            Ok(Box::new(hubbard_operator(spec, DEFAULT_DIMENSION_CAP)?))
        }
        other => bail!("unknown generator {other:?} (expected laplacian or hubbard)"),
    }
}

fn parse_lattice(s: &str) -> Result<Lattice> {
    if let Some((w, h)) = s.split_once('x') {
        let width: usize = w.parse().with_context(|| format!("bad grid width {w:?}"))?;
        let height: usize = h
            .parse()
            .with_context(|| format!("bad grid height {h:?}"))?;
        Ok(Lattice::Grid { width, height })
    } else {
        let l: usize = s.parse().with_context(|| format!("bad chain length {s:?}"))?;
        Ok(Lattice::Chain(l))
    }
}

/// Loads the operator named by `--matrix` or `--gen`.
pub fn build_operator(
    matrix: Option<&Path>,
    gen: Option<&str>,
) -> Result<Box<dyn SymmetricOperator>> {
    match (matrix, gen) {
        (Some(path), None) => {
            let m = load_matrix_market(path)
                .with_context(|| format!("loading {}", path.display()))?;
            Ok(Box::new(m))
        }
        (None, Some(spec)) => build_generated(spec),
        (None, None) => bail!("one of --matrix or --gen is required"),
        (Some(_), Some(_)) => bail!("--matrix and --gen are mutually exclusive"),
    }
}

/// Reads an ascending plain-text spectrum (one value per line, `#`
/// comments and blank lines ignored).
pub fn load_reference(path: &Path) -> Result<Vec<f64>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut values = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let v: f64 = line
            .parse()
            .with_context(|| format!("{}:{}: bad value {line:?}", path.display(), lineno + 1))?;
        values.push(v);
    }
    if values.is_empty() {
        bail!("{}: no reference eigenvalues", path.display());
    }
    if values.windows(2).any(|w| w[1] < w[0]) {
        bail!("{}: reference eigenvalues must be ascending", path.display());
    }
    Ok(values)
}

/// The `p` smallest diagonal entries (ties by index), returned as
/// `(indices ascending, their diagonal values in that order)`.
pub fn smallest_diagonal_indices(op: &dyn SymmetricOperator, p: usize) -> Result<(Vec<usize>, Vec<f64>)> {
    let n = op.dim();
    if n < p {
        bail!("matrix dimension {n} smaller than block width {p}");
    }
    let diag = op.diagonal();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| diag[a].partial_cmp(&diag[b]).unwrap().then(a.cmp(&b)));
    let mut picked: Vec<usize> = order[..p].to_vec();
    picked.sort_unstable();
    let values = picked.iter().map(|&i| diag[i]).collect();
    Ok((picked, values))
}

/// Unit columns on the `p` smallest diagonal entries — the gradient
/// solver's starting iterate, matching the coordinate solver's
/// initialization.
pub fn default_start(op: &dyn SymmetricOperator, p: usize) -> Result<DenseMatrix> {
    let (indices, _) = smallest_diagonal_indices(op, p)?;
    let mut x = DenseMatrix::zeros(op.dim(), p);
    for (l, &i) in indices.iter().enumerate() {
        x.set(i, l, 1.0);
    }
    Ok(x)
}
