//! On-the-fly second-quantized Hamiltonians (Hubbard model) and simple
//! test operators.
//!
//! The Hubbard operator never materializes its matrix: a column is built
//! from the determinant's bitstrings when asked for. Each column holds the
//! on-site repulsion on the diagonal plus one entry of `-t * sign` per
//! allowed single-particle hop, so the number of nonzeros per column is
//! bounded by a polynomial in the particle count while the dimension grows
//! combinatorially.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::sparse::{ColumnBuf, SparseColumnMatrix, SymmetricOperator};

/// Default cap on basis dimension for generated operators.
pub const DEFAULT_DIMENSION_CAP: usize = 4_000_000;

/// Default cap on stored entries when caching a generated operator into
/// explicit sparse storage.
pub const DEFAULT_CACHE_NNZ_CAP: usize = 1_000_000;

/// Site connectivity of the lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Lattice {
    /// One-dimensional chain of `L` sites.
    Chain(usize),
    /// Rectangular grid, sites indexed row-major as `x + y * width`.
    Grid { width: usize, height: usize },
}

impl Lattice {
    pub fn sites(&self) -> usize {
        match *self {
            Lattice::Chain(l) => l,
            Lattice::Grid { width, height } => width * height,
        }
    }

    /// Undirected nearest-neighbour bonds, each unordered pair once.
    fn edges(&self, boundary: Boundary) -> Vec<(usize, usize)> {
        let mut set = std::collections::BTreeSet::new();
        let mut add = |a: usize, b: usize| {
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        };
        match *self {
            Lattice::Chain(l) => {
                for i in 0..l.saturating_sub(1) {
                    add(i, i + 1);
                }
                if boundary == Boundary::Periodic && l > 2 {
                    add(l - 1, 0);
                }
            }
            Lattice::Grid { width, height } => {
                let idx = |x: usize, y: usize| x + y * width;
                for y in 0..height {
                    for x in 0..width {
                        if x + 1 < width {
                            add(idx(x, y), idx(x + 1, y));
                        } else if boundary == Boundary::Periodic && width > 2 {
                            add(idx(x, y), idx(0, y));
                        }
                        if y + 1 < height {
                            add(idx(x, y), idx(x, y + 1));
                        } else if boundary == Boundary::Periodic && height > 2 {
                            add(idx(x, y), idx(x, 0));
                        }
                    }
                }
            }
        }
        set.into_iter().collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Boundary {
    #[default]
    Open,
    Periodic,
}

/// Parameters of a Hubbard model instance.
#[derive(Debug, Clone, PartialEq)]
pub struct HubbardSpec {
    pub lattice: Lattice,
    pub n_up: usize,
    pub n_down: usize,
    /// Hopping amplitude `t`.
    pub hopping: f64,
    /// On-site repulsion `U`.
    pub onsite: f64,
    pub boundary: Boundary,
}

impl HubbardSpec {
    pub fn chain(l: usize, n_up: usize, n_down: usize, hopping: f64, onsite: f64) -> Self {
        Self {
            lattice: Lattice::Chain(l),
            n_up,
            n_down,
            hopping,
            onsite,
            boundary: Boundary::Open,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let sites = self.lattice.sites();
        if sites == 0 {
            return Err(Error::InvalidInput("lattice has no sites".into()));
        }
        if sites > 63 {
            return Err(Error::Capacity(format!(
                "{sites} sites exceed the 63-bit determinant encoding"
            )));
        }
        if self.n_up > sites || self.n_down > sites {
            return Err(Error::InvalidInput(format!(
                "particle counts ({}, {}) exceed {sites} sites",
                self.n_up, self.n_down
            )));
        }
        Ok(())
    }

    /// Basis dimension `C(sites, n_up) * C(sites, n_down)`.
    pub fn dimension(&self) -> Result<usize> {
        self.validate()?;
        let sites = self.lattice.sites();
        let up = binomial(sites, self.n_up)
            .ok_or_else(|| Error::Capacity("spin-up sector count overflows".into()))?;
        let down = binomial(sites, self.n_down)
            .ok_or_else(|| Error::Capacity("spin-down sector count overflows".into()))?;
        up.checked_mul(down)
            .map(|d| d as usize)
            .ok_or_else(|| Error::Capacity("basis dimension overflows".into()))
    }
}

fn binomial(n: usize, k: usize) -> Option<u64> {
    if k > n {
        return Some(0);
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u64)?;
        acc /= (i + 1) as u64;
    }
    Some(acc)
}

/// All `sites`-bit masks with `count` bits set, in ascending numeric order.
fn enumerate_sector(sites: usize, count: usize) -> Vec<u64> {
    if count == 0 {
        return vec![0];
    }
    let mut states = Vec::new();
    let limit: u64 = 1 << sites;
    // Gosper's hack walks masks of fixed popcount in ascending order.
    let mut v: u64 = (1 << count) - 1;
    while v < limit {
        states.push(v);
        let c = v & v.wrapping_neg();
        let r = v + c;
        if c == 0 {
            break;
        }
        v = (((r ^ v) >> 2) / c) | r;
        if r >= limit {
            break;
        }
    }
    states
}

/// Parity of occupied sites strictly between `a` and `b` in `state`:
/// +1 for even, -1 for odd.
fn hop_sign(state: u64, a: usize, b: usize) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    if hi - lo <= 1 {
        return 1.0;
    }
    let mask = ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1);
    if (state & mask).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Matrix-free Hubbard Hamiltonian on the fixed `(n_up, n_down)` sector.
///
/// Determinants are composite-indexed as
/// `up_index * C(sites, n_down) + down_index` with each spin sector
/// enumerated in ascending bitstring order, so column indexing is
/// reproducible across runs.
pub struct HubbardOperator {
    spec: HubbardSpec,
    edges: Vec<(usize, usize)>,
    up_states: Vec<u64>,
    down_states: Vec<u64>,
    up_rank: HashMap<u64, usize>,
    down_rank: HashMap<u64, usize>,
    diagonal: Vec<f64>,
}

impl HubbardOperator {
    pub fn spec(&self) -> &HubbardSpec {
        &self.spec
    }

    #[inline]
    fn split(&self, k: usize) -> (u64, u64) {
        let nd = self.down_states.len();
        (self.up_states[k / nd], self.down_states[k % nd])
    }

    /// Caches the operator into explicit sparse storage, refusing beyond
    /// `nnz_cap` stored entries.
    pub fn to_sparse(&self, nnz_cap: usize) -> Result<SparseColumnMatrix> {
        operator_to_sparse(self, nnz_cap)
    }
}

/// Builds the matrix-free operator for `spec`, refusing basis dimensions
/// beyond `dimension_cap` (use [`DEFAULT_DIMENSION_CAP`]).
pub fn hubbard_operator(spec: HubbardSpec, dimension_cap: usize) -> Result<HubbardOperator> {
    let dim = spec.dimension()?;
    if dim > dimension_cap {
        return Err(Error::Capacity(format!(
            "basis dimension {dim} exceeds cap {dimension_cap}"
        )));
    }
    let sites = spec.lattice.sites();
    let up_states = enumerate_sector(sites, spec.n_up);
    let down_states = enumerate_sector(sites, spec.n_down);
    let up_rank = up_states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let down_rank = down_states
        .iter()
        .enumerate()
        .map(|(i, &s)| (s, i))
        .collect();
    let edges = spec.lattice.edges(spec.boundary);
    let nd = down_states.len();
    let mut diagonal = Vec::with_capacity(dim);
    for &up in &up_states {
        for &down in &down_states[..nd] {
            diagonal.push(spec.onsite * (up & down).count_ones() as f64);
        }
    }
    Ok(HubbardOperator {
        spec,
        edges,
        up_states,
        down_states,
        up_rank,
        down_rank,
        diagonal,
    })
}

impl SymmetricOperator for HubbardOperator {
    fn dim(&self) -> usize {
        self.diagonal.len()
    }

    fn column_into(&self, k: usize, out: &mut ColumnBuf) {
        assert!(k < self.dim(), "column {k} out of range");
        out.clear();
        let (up, down) = self.split(k);
        let nd = self.down_states.len();
        let up_base = (k / nd) * nd;
        let down_off = k % nd;
        let t = self.spec.hopping;

        let mut entries: Vec<(usize, f64)> = Vec::with_capacity(1 + 2 * self.edges.len());
        if self.diagonal[k] != 0.0 {
            entries.push((k, self.diagonal[k]));
        }
        if t != 0.0 {
            for &(a, b) in &self.edges {
                for (src, dst) in [(a, b), (b, a)] {
                    if (up >> src) & 1 == 1 && (up >> dst) & 1 == 0 {
                        let moved = (up & !(1 << src)) | (1 << dst);
                        let row = self.up_rank[&moved] * nd + down_off;
                        entries.push((row, -t * hop_sign(up, src, dst)));
                    }
                    if (down >> src) & 1 == 1 && (down >> dst) & 1 == 0 {
                        let moved = (down & !(1 << src)) | (1 << dst);
                        let row = up_base + self.down_rank[&moved];
                        entries.push((row, -t * hop_sign(down, src, dst)));
                    }
                }
            }
        }
        entries.sort_by_key(|&(i, _)| i);
        for (i, v) in entries {
            // Distinct hops land on distinct determinants, so no merging.
            debug_assert!(out.indices.last() != Some(&i));
            out.push(i, v);
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        self.diagonal.clone()
    }
}

/// One-dimensional Laplacian stencil: 2 on the diagonal, -1 off.
///
/// Eigenvalues are `2 - 2 cos(k π / (n+1))` for `k = 1..n`, which makes it
/// a convenient test operator with a fully known spectrum.
pub struct LaplacianOperator {
    n: usize,
}

pub fn laplacian_operator(n: usize) -> Result<LaplacianOperator> {
    if n < 2 {
        return Err(Error::InvalidInput(format!(
            "laplacian needs dimension >= 2, got {n}"
        )));
    }
    Ok(LaplacianOperator { n })
}

impl LaplacianOperator {
    pub fn to_sparse(&self) -> SparseColumnMatrix {
        operator_to_sparse(self, usize::MAX).expect("tridiagonal matrix always fits")
    }
}

impl SymmetricOperator for LaplacianOperator {
    fn dim(&self) -> usize {
        self.n
    }

    fn column_into(&self, k: usize, out: &mut ColumnBuf) {
        assert!(k < self.n, "column {k} out of range");
        out.clear();
        if k > 0 {
            out.push(k - 1, -1.0);
        }
        out.push(k, 2.0);
        if k + 1 < self.n {
            out.push(k + 1, -1.0);
        }
    }

    fn diagonal(&self) -> Vec<f64> {
        vec![2.0; self.n]
    }
}

/// Closed-form ascending spectrum of [`LaplacianOperator`].
pub fn laplacian_eigenvalues(n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| 2.0 - 2.0 * (k as f64 * std::f64::consts::PI / (n as f64 + 1.0)).cos())
        .collect()
}

/// Caches any matrix-free operator into explicit CSC storage.
pub fn operator_to_sparse(
    op: &dyn SymmetricOperator,
    nnz_cap: usize,
) -> Result<SparseColumnMatrix> {
    let n = op.dim();
    let mut triplets = Vec::new();
    let mut buf = ColumnBuf::new();
    for k in 0..n {
        op.column_into(k, &mut buf);
        if triplets.len() + buf.len() > nnz_cap {
            return Err(Error::Capacity(format!(
                "operator exceeds {nnz_cap} cached entries"
            )));
        }
        for (i, v) in buf.iter() {
            triplets.push((i, k, v));
        }
    }
    SparseColumnMatrix::from_triplets(n, &triplets)
}
