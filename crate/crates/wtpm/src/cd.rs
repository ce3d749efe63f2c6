//! Coordinate-descent solver over compressed sparse state.
//!
//! One update touches a single entry `(k, ℓ)` of the iterate: the column
//! is chosen round-robin, the row by scanning the gradient over the
//! nonzero pattern of a recently used matrix column, and the increment by
//! exactly minimizing the quartic restriction of the objective along that
//! coordinate (a depressed cubic root problem). The solver maintains
//! `Y ≈ AX`, the upper triangle of `S = XᵀX`, and the Rayleigh numerators
//! `d` incrementally, so one update costs `O(p + nnz(column))` work and
//! never forms a dense object. Entries of `Y` are compressed: increments
//! below the threshold that would create a new entry are dropped, which
//! bounds memory on instances whose eigenvectors are approximately
//! sparse.
//!
//! Weight choice caveat: every `μ wℓ` must exceed the diagonal values at
//! the chosen starting indices, or the exact line search zeroes those
//! columns on their first visit and a zero column can never re-enter the
//! search pattern. Weights from [`crate::weights::rayleigh_weights`]
//! guarantee this margin by construction (`w_p = r_p + ε`); spectral
//! midpoints do not when the diagonal is flat.

use std::collections::{HashMap, VecDeque};
use std::io::{Read, Write};
use std::time::Instant;

use crate::dense::{dot, DenseMatrix};
use crate::error::{Error, Result};
use crate::model::WeightedPenaltyProblem;
use crate::oracle::eigen_error;
use crate::solver::{SolveResult, SolveStatus};
use crate::sparse::ColumnBuf;
use crate::trace::{ConvergenceTrace, TraceRow};

/// Configuration of one coordinate-descent run.
///
/// `tol` bounds the geometrically weighted window sum of absolute
/// increments, `Σ_{i=0..h} γⁱ |α⁽ʲ⁻ⁱ⁾| < tol`; the residual itself is
/// never formed because the gradient is only tracked on the touched
/// pattern.
#[derive(Debug, Clone)]
pub struct CdConfig {
    pub tol: f64,
    /// Window length of the stopping rule.
    pub h: usize,
    /// Geometric decay of the stopping rule.
    pub gamma: f64,
    /// Compression threshold ε; 0 keeps `Y = AX` exact.
    pub eps_compress: f64,
    pub max_updates: u64,
    pub checkpoint_every: u64,
    /// Reference eigenvalues for the trace's error column.
    pub reference: Option<Vec<f64>>,
}

impl CdConfig {
    pub fn new(tol: f64, max_updates: u64) -> Self {
        Self {
            tol,
            h: 100,
            gamma: 0.99,
            eps_compress: 0.0,
            max_updates,
            checkpoint_every: 1000,
            reference: None,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::InvalidInput(format!(
                "tol must be positive, got {}",
                self.tol
            )));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::InvalidInput(format!(
                "gamma must lie in (0, 1), got {}",
                self.gamma
            )));
        }
        if self.eps_compress < 0.0 {
            return Err(Error::InvalidInput(format!(
                "compression threshold must be nonnegative, got {}",
                self.eps_compress
            )));
        }
        if self.max_updates < 1 {
            return Err(Error::InvalidInput("max_updates must be at least 1".into()));
        }
        if self.checkpoint_every == 0 {
            return Err(Error::InvalidInput(
                "checkpoint_every must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Running totals of the work done, used to assert the per-update cost
/// bound in tests.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WorkCounters {
    /// Operator columns fetched.
    pub column_reads: u64,
    /// Entries delivered by those fetches.
    pub column_entries: u64,
    /// Scalar multiply/add/compare operations in the update kernels.
    pub basic_ops: u64,
}

/// Compressed solver state: sparse `X`, sparse `Y ≈ AX`, packed upper
/// triangle of `S = XᵀX`, Rayleigh numerators `d = diag(XᵀAX)`, the
/// per-column ring of recently updated rows, and the increment history
/// feeding the stopping rule.
pub struct CdState {
    n: usize,
    p: usize,
    x: Vec<HashMap<usize, f64>>,
    y: Vec<HashMap<usize, f64>>,
    s_upper: Vec<f64>,
    d: Vec<f64>,
    diag: Vec<f64>,
    last_rows: Vec<usize>,
    increments: VecDeque<f64>,
    history_len: usize,
    eps_compress: f64,
    update_count: u64,
    counters: WorkCounters,
}

#[inline]
fn upper_index(i: usize, j: usize) -> usize {
    debug_assert!(i <= j);
    i + j * (j + 1) / 2
}

impl CdState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn update_count(&self) -> u64 {
        self.update_count
    }

    /// Entry of the packed symmetric `S = XᵀX`.
    #[inline]
    pub fn s(&self, i: usize, j: usize) -> f64 {
        let (a, b) = if i <= j { (i, j) } else { (j, i) };
        self.s_upper[upper_index(a, b)]
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    pub fn last_rows(&self) -> &[usize] {
        &self.last_rows
    }

    pub fn increments(&self) -> impl Iterator<Item = f64> + '_ {
        self.increments.iter().copied()
    }

    pub fn x_entry(&self, l: usize, i: usize) -> f64 {
        self.x[l].get(&i).copied().unwrap_or(0.0)
    }

    pub fn y_entry(&self, l: usize, i: usize) -> f64 {
        self.y[l].get(&i).copied().unwrap_or(0.0)
    }

    pub fn x_map(&self, l: usize) -> &HashMap<usize, f64> {
        &self.x[l]
    }

    pub fn y_map(&self, l: usize) -> &HashMap<usize, f64> {
        &self.y[l]
    }

    /// Stored entries of `X`, explicit zeros included.
    pub fn nnz_x(&self) -> usize {
        self.x.iter().map(HashMap::len).sum()
    }

    /// Stored entries of `Y`, explicit zeros included.
    pub fn nnz_y(&self) -> usize {
        self.y.iter().map(HashMap::len).sum()
    }

    pub fn counters(&self) -> WorkCounters {
        self.counters
    }

    pub fn reset_counters(&mut self) {
        self.counters = WorkCounters::default();
    }

    pub fn eps_compress(&self) -> f64 {
        self.eps_compress
    }

    /// Sets the compression threshold and stopping-window length used by
    /// subsequent updates. Called by [`cd_solve`] with its config; tests
    /// drive it directly.
    pub fn configure(&mut self, eps_compress: f64, h: usize) {
        self.eps_compress = eps_compress;
        self.history_len = h + 1;
        while self.increments.len() > self.history_len {
            self.increments.pop_front();
        }
    }

    /// Dense copy of the iterate.
    pub fn densify(&self) -> DenseMatrix {
        let mut out = DenseMatrix::zeros(self.n, self.p);
        for l in 0..self.p {
            let col = out.col_mut(l);
            for (&i, &v) in &self.x[l] {
                col[i] = v;
            }
        }
        out
    }

    fn record_increment(&mut self, alpha: f64) {
        if self.increments.len() == self.history_len {
            self.increments.pop_front();
        }
        self.increments.push_back(alpha.abs());
    }

    /// Gradient entry `(i, ℓ)` from the maintained quantities:
    /// `Y[ℓ](i) + μ (Σ_m X[m](i) S_{mℓ} - X[ℓ](i) w_ℓ)`.
    fn gradient_entry(&self, prob: &WeightedPenaltyProblem, i: usize, l: usize) -> f64 {
        let mut acc = 0.0;
        for m in 0..self.p {
            let xm = self.x_entry(m, i);
            if xm != 0.0 {
                acc += xm * self.s(m, l);
            }
        }
        acc -= self.x_entry(l, i) * prob.weights().get(l);
        self.y_entry(l, i) + prob.mu() * acc
    }

    /// Exact `(AᵀX)_{kℓ} = Σ_m a_{km} X[ℓ](m)` over a fetched column `k`.
    fn exact_y_entry(&self, col_k: &ColumnBuf, l: usize) -> f64 {
        let mut acc = 0.0;
        for (m, a) in col_k.iter() {
            let xm = self.x_entry(l, m);
            if xm != 0.0 {
                acc += a * xm;
            }
        }
        acc
    }
}

/// Builds the initial state: unit columns on the `p` smallest diagonal
/// entries (ties broken by index), `Y` the matching operator columns,
/// `S = I`, and `d` the selected diagonal values.
pub fn cd_init(prob: &WeightedPenaltyProblem) -> Result<CdState> {
    let n = prob.dim();
    let p = prob.p();
    if n < p {
        return Err(Error::Dimension(format!(
            "dimension {n} smaller than block width {p}"
        )));
    }
    let diag = prob.operator().diagonal();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        diag[a]
            .partial_cmp(&diag[b])
            .expect("diagonal entries must not be NaN")
            .then(a.cmp(&b))
    });
    let mut picked: Vec<usize> = order[..p].to_vec();
    picked.sort_unstable();

    let mut x = Vec::with_capacity(p);
    let mut y = Vec::with_capacity(p);
    let mut d = Vec::with_capacity(p);
    let mut buf = ColumnBuf::new();
    for &i in &picked {
        let mut xcol = HashMap::new();
        xcol.insert(i, 1.0);
        x.push(xcol);
        prob.operator().column_into(i, &mut buf);
        let mut ycol: HashMap<usize, f64> = buf.iter().collect();
        // keep Y's support a superset of X's even when a_ii = 0
        ycol.entry(i).or_insert(0.0);
        y.push(ycol);
        d.push(diag[i]);
    }
    let mut s_upper = vec![0.0; p * (p + 1) / 2];
    for l in 0..p {
        s_upper[upper_index(l, l)] = 1.0;
    }
    Ok(CdState {
        n,
        p,
        x,
        y,
        s_upper,
        d,
        diag,
        last_rows: picked,
        increments: VecDeque::new(),
        history_len: 101,
        eps_compress: 0.0,
        update_count: 0,
        counters: WorkCounters::default(),
    })
}

fn pick_coordinate_with(
    state: &mut CdState,
    prob: &WeightedPenaltyProblem,
    j: u64,
    buf: &mut ColumnBuf,
) -> Result<(usize, usize)> {
    let p = state.p;
    let l = (j % p as u64) as usize;
    let k_prev = state.last_rows[l];
    prob.operator().column_into(k_prev, buf);
    state.counters.column_reads += 1;
    state.counters.column_entries += buf.len() as u64;
    if buf.is_empty() {
        return Err(Error::EmptyPattern(k_prev));
    }
    let mut best_row = usize::MAX;
    let mut best_mag = f64::NEG_INFINITY;
    for &i in &buf.indices {
        let mag = state.gradient_entry(prob, i, l).abs();
        state.counters.basic_ops += 2 * p as u64 + 4;
        // candidates come in ascending row order, so strict improvement
        // keeps the smallest row index on ties
        if mag > best_mag {
            best_mag = mag;
            best_row = i;
        }
    }
    Ok((best_row, l))
}

/// Chooses the coordinate for update `j`: column `ℓ = j mod p`, row by
/// the largest-magnitude gradient entry over the nonzero pattern of the
/// matrix column updated `p` iterations ago (the initialization indices
/// during the first `p` picks). Ties go to the smallest row index.
pub fn pick_coordinate(
    state: &mut CdState,
    prob: &WeightedPenaltyProblem,
    j: u64,
) -> Result<(usize, usize)> {
    let mut buf = ColumnBuf::new();
    pick_coordinate_with(state, prob, j, &mut buf)
}

fn cubic_coefficients_with(
    state: &mut CdState,
    prob: &WeightedPenaltyProblem,
    k: usize,
    l: usize,
    col_k: &ColumnBuf,
) -> (f64, f64) {
    let mu = prob.mu();
    let a_kk = state.diag[k];
    let w_l = prob.weights().get(l);
    let s_ll = state.s(l, l);
    let x_kl = state.x_entry(l, k);

    let mut row_sq = 0.0;
    let mut cross = 0.0;
    for m in 0..state.p {
        let xkm = state.x_entry(m, k);
        if xkm != 0.0 {
            row_sq += xkm * xkm;
            cross += xkm * state.s(m, l);
        }
    }
    state.counters.basic_ops += 4 * state.p as u64 + 12;

    let c1 = a_kk / mu - w_l + s_ll + row_sq - 2.0 * x_kl * x_kl;

    // (AX)_{kℓ}: trusted from Y only in exact mode
    let ax_kl = if state.eps_compress == 0.0 {
        state.y_entry(l, k)
    } else {
        state.counters.basic_ops += 2 * col_k.len() as u64;
        state.exact_y_entry(col_k, l)
    };
    let c0 = (ax_kl - a_kk * x_kl) / mu + cross + x_kl * x_kl * x_kl
        - x_kl * (row_sq + s_ll);
    (c1, c0)
}

/// Coefficients `(c₁, c₀)` of the depressed cubic
/// `(α + x_{kℓ})³ + c₁ (α + x_{kℓ}) + c₀ = 0` whose roots are the
/// stationary points of the objective restricted to coordinate `(k, ℓ)`.
pub fn cubic_coefficients(
    state: &mut CdState,
    prob: &WeightedPenaltyProblem,
    k: usize,
    l: usize,
) -> (f64, f64) {
    if state.eps_compress == 0.0 {
        let empty = ColumnBuf::new();
        cubic_coefficients_with(state, prob, k, l, &empty)
    } else {
        let mut buf = ColumnBuf::new();
        prob.operator().column_into(k, &mut buf);
        state.counters.column_reads += 1;
        state.counters.column_entries += buf.len() as u64;
        cubic_coefficients_with(state, prob, k, l, &buf)
    }
}

/// All real roots of `t³ + c₁ t + c₀ = 0`, each polished by one Newton
/// step.
fn depressed_cubic_roots(c1: f64, c0: f64) -> Vec<f64> {
    let mut roots = Vec::with_capacity(3);
    if c0 == 0.0 {
        roots.push(0.0);
        if c1 < 0.0 {
            let r = (-c1).sqrt();
            roots.push(r);
            roots.push(-r);
        }
    } else if c1 == 0.0 {
        roots.push((-c0).cbrt());
    } else {
        let half_q = 0.5 * c0;
        let third_p = c1 / 3.0;
        let disc = half_q * half_q + third_p * third_p * third_p;
        if disc > 0.0 {
            let s = disc.sqrt();
            roots.push((-half_q + s).cbrt() + (-half_q - s).cbrt());
        } else {
            // three real roots via the trigonometric branch
            let amp = 2.0 * (-third_p).sqrt();
            let arg = (3.0 * c0 / (amp * c1)).clamp(-1.0, 1.0);
            let theta = arg.acos();
            for k in 0..3 {
                roots.push(amp * ((theta + 2.0 * std::f64::consts::PI * k as f64) / 3.0).cos());
            }
        }
    }
    for t in &mut roots {
        let f = *t * *t * *t + c1 * *t + c0;
        let df = 3.0 * *t * *t + c1;
        if df.abs() > 1e-12 * (1.0 + t.abs() * t.abs()) {
            *t -= f / df;
        }
    }
    roots
}

/// Exact line search along one coordinate: returns the increment
/// `α = t* - x_{kℓ}` where `t*` globally minimizes the quartic
/// `t⁴/4 + c₁ t²/2 + c₀ t` over the real roots of its derivative. Equal
/// minima resolve to the smallest `|α|`.
pub fn minimize_quartic(c1: f64, c0: f64, x_kl: f64) -> f64 {
    let quartic = |t: f64| 0.25 * t * t * t * t + 0.5 * c1 * t * t + c0 * t;
    let roots = depressed_cubic_roots(c1, c0);
    debug_assert!(!roots.is_empty());
    let mut best_t = roots[0];
    let mut best_q = quartic(roots[0]);
    for &t in &roots[1..] {
        let q = quartic(t);
        let tie_scale = 1e-12 * (1.0 + best_q.abs().max(q.abs()));
        if q < best_q - tie_scale {
            best_t = t;
            best_q = q;
        } else if (q - best_q).abs() <= tie_scale
            && (t - x_kl).abs() < (best_t - x_kl).abs()
        {
            best_t = t;
            best_q = q;
        }
    }
    best_t - x_kl
}

fn apply_update_with(
    state: &mut CdState,
    _prob: &WeightedPenaltyProblem,
    k: usize,
    l: usize,
    alpha: f64,
    col_k: &ColumnBuf,
) {
    state.last_rows[l] = k;
    state.record_increment(alpha);
    state.update_count += 1;
    if alpha == 0.0 {
        return;
    }

    let old_x = state.x_entry(l, k);
    state.x[l].insert(k, old_x + alpha);

    // compressed propagation of the increment through column k
    let eps = state.eps_compress;
    for (i, a) in col_k.iter() {
        let inc = alpha * a;
        match state.y[l].entry(i) {
            std::collections::hash_map::Entry::Occupied(mut e) => *e.get_mut() += inc,
            std::collections::hash_map::Entry::Vacant(e) => {
                if inc.abs() > eps {
                    e.insert(inc);
                }
            }
        }
    }
    // the updated position is recomputed exactly so the Rayleigh
    // numerator stays reliable under compression
    let y_kl = state.exact_y_entry(col_k, l);
    state.y[l].insert(k, y_kl);

    let a_kk = state.diag[k];
    state.d[l] += 2.0 * alpha * y_kl - alpha * alpha * a_kk;

    for m in 0..state.p {
        if m == l {
            state.s_upper[upper_index(l, l)] += 2.0 * alpha * old_x + alpha * alpha;
        } else {
            let xkm = state.x_entry(m, k);
            if xkm != 0.0 {
                let (a, b) = if m < l { (m, l) } else { (l, m) };
                state.s_upper[upper_index(a, b)] += alpha * xkm;
            }
        }
    }
    state.counters.basic_ops += 4 * col_k.len() as u64 + 3 * state.p as u64 + 10;
}

/// Applies increment `alpha` at `(k, ℓ)`: updates `X`, propagates through
/// `Y` with compression, recomputes `Y[ℓ](k)` exactly, and maintains `d`
/// and the upper triangle of `S`. A zero increment only advances the
/// rings and the counter.
pub fn apply_update(
    state: &mut CdState,
    prob: &WeightedPenaltyProblem,
    k: usize,
    l: usize,
    alpha: f64,
) {
    if alpha == 0.0 {
        let empty = ColumnBuf::new();
        apply_update_with(state, prob, k, l, alpha, &empty);
        return;
    }
    let mut buf = ColumnBuf::new();
    prob.operator().column_into(k, &mut buf);
    state.counters.column_reads += 1;
    state.counters.column_entries += buf.len() as u64;
    apply_update_with(state, prob, k, l, alpha, &buf);
}

/// Stopping rule `Σ_{i=0..h} γⁱ |α⁽ʲ⁻ⁱ⁾| < tol`, treating missing history
/// as zero.
pub fn should_stop(state: &CdState, cfg: &CdConfig) -> bool {
    let mut sum = 0.0;
    let mut weight = 1.0;
    for (i, alpha) in state.increments.iter().rev().enumerate() {
        if i > cfg.h {
            break;
        }
        sum += weight * alpha;
        weight *= cfg.gamma;
    }
    sum < cfg.tol
}

/// Runs coordinate descent from the standard initialization until the
/// stopping rule fires or the update budget runs out.
pub fn cd_solve(prob: &WeightedPenaltyProblem, cfg: &CdConfig) -> Result<SolveResult> {
    let state = cd_init(prob)?;
    cd_solve_from(prob, state, cfg)
}

/// Continues coordinate descent from an existing state (fresh from
/// [`cd_init`] or restored from a snapshot).
pub fn cd_solve_from(
    prob: &WeightedPenaltyProblem,
    state: CdState,
    cfg: &CdConfig,
) -> Result<SolveResult> {
    cd_solve_with_state(prob, state, cfg).map(|(result, _)| result)
}

/// Like [`cd_solve_from`] but hands the final state back, e.g. for
/// snapshotting.
pub fn cd_solve_with_state(
    prob: &WeightedPenaltyProblem,
    mut state: CdState,
    cfg: &CdConfig,
) -> Result<(SolveResult, CdState)> {
    cfg.validate()?;
    if state.n != prob.dim() || state.p != prob.p() {
        return Err(Error::Dimension(format!(
            "state is {}x{}, problem needs {}x{}",
            state.n,
            state.p,
            prob.dim(),
            prob.p()
        )));
    }
    state.configure(cfg.eps_compress, cfg.h);

    let start = Instant::now();
    let mut trace = ConvergenceTrace::new();
    let mut last_emitted: Option<u64> = None;
    emit(&mut trace, &mut last_emitted, &state, prob, cfg, &start);

    let mut buf = ColumnBuf::new();
    let mut status = SolveStatus::IterationLimit;
    while state.update_count < cfg.max_updates {
        let j = state.update_count;
        let (k, l) = pick_coordinate_with(&mut state, prob, j, &mut buf)?;
        prob.operator().column_into(k, &mut buf);
        state.counters.column_reads += 1;
        state.counters.column_entries += buf.len() as u64;
        let (c1, c0) = cubic_coefficients_with(&mut state, prob, k, l, &buf);
        let alpha = minimize_quartic(c1, c0, state.x_entry(l, k));
        if !alpha.is_finite() {
            status = SolveStatus::Diverged;
            break;
        }
        apply_update_with(&mut state, prob, k, l, alpha, &buf);
        if state.update_count % cfg.checkpoint_every == 0 {
            emit(&mut trace, &mut last_emitted, &state, prob, cfg, &start);
        }
        if should_stop(&state, cfg) {
            status = SolveStatus::Converged;
            break;
        }
    }
    emit(&mut trace, &mut last_emitted, &state, prob, cfg, &start);

    // final eigenvalue estimates recompute Rayleigh quotients exactly
    // from the densified iterate; the incremental d may drift under
    // compression
    let x = state.densify();
    let ax = prob.operator().apply(&x)?;
    let ritz = (0..state.p)
        .map(|l| {
            let den = dot(x.col(l), x.col(l));
            if den == 0.0 {
                f64::NAN
            } else {
                dot(x.col(l), ax.col(l)) / den
            }
        })
        .collect();
    Ok((
        SolveResult {
            x,
            ritz,
            trace,
            status,
        },
        state,
    ))
}

fn emit(
    trace: &mut ConvergenceTrace,
    last_emitted: &mut Option<u64>,
    state: &CdState,
    prob: &WeightedPenaltyProblem,
    cfg: &CdConfig,
    start: &Instant,
) {
    if *last_emitted == Some(state.update_count) {
        return;
    }
    let p = state.p;
    let ritz: Vec<f64> = (0..p)
        .map(|l| {
            let den = state.s(l, l);
            if den == 0.0 {
                f64::NAN
            } else {
                state.d[l] / den
            }
        })
        .collect();
    let err = cfg.reference.as_deref().and_then(|r| {
        if r.len() >= p {
            eigen_error(&ritz, &r[..p]).ok()
        } else {
            None
        }
    });
    // objective from maintained quantities: d is exact even under
    // compression thanks to the per-update recompute of Y[ℓ](k)
    let mu = prob.mu();
    let mut penalty = 0.0;
    for j in 0..p {
        for i in 0..=j {
            let w = if i == j { prob.weights().get(i) } else { 0.0 };
            let r = state.s(i, j) - w;
            penalty += if i == j { r * r } else { 2.0 * r * r };
        }
    }
    let objective = 0.5 * state.d.iter().sum::<f64>() + 0.25 * mu * penalty;
    trace.push(TraceRow {
        update_count: state.update_count,
        relative_iteration: state.update_count as f64 * (p as f64 + 2.0)
            / (state.n as f64 * p as f64),
        wall_ms: start.elapsed().as_secs_f64() * 1e3,
        ritz,
        err,
        nnz_x: state.nnz_x(),
        nnz_y: state.nnz_y(),
        objective: Some(objective),
        grad_norm: None,
    });
    *last_emitted = Some(state.update_count);
}

const SNAPSHOT_MAGIC: &[u8; 8] = b"WTPMCDS1";
const SNAPSHOT_VERSION: u32 = 1;

impl CdState {
    /// Serializes the state as a versioned little-endian snapshot.
    ///
    /// Layout after the 8-byte magic `WTPMCDS1` and a `u32` version:
    /// `n, p, update_count` as `u64`; `eps_compress` as `f64`;
    /// `history_len` as `u64`; `last_rows` as `p × u64`; `d` as
    /// `p × f64`; the packed upper triangle of `S` as
    /// `p(p+1)/2 × f64`; the increment ring as a `u64` length plus that
    /// many `f64`; then for each column of `X` and then of `Y` a `u64`
    /// length followed by `(u64 index, f64 value)` pairs sorted by index.
    /// The operator diagonal is not stored; restoring requires the same
    /// operator.
    pub fn write_snapshot(&self, w: &mut impl Write) -> Result<()> {
        w.write_all(SNAPSHOT_MAGIC)?;
        w.write_all(&SNAPSHOT_VERSION.to_le_bytes())?;
        for v in [self.n as u64, self.p as u64, self.update_count] {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.eps_compress.to_le_bytes())?;
        w.write_all(&(self.history_len as u64).to_le_bytes())?;
        for &r in &self.last_rows {
            w.write_all(&(r as u64).to_le_bytes())?;
        }
        for &v in &self.d {
            w.write_all(&v.to_le_bytes())?;
        }
        for &v in &self.s_upper {
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&(self.increments.len() as u64).to_le_bytes())?;
        for &v in &self.increments {
            w.write_all(&v.to_le_bytes())?;
        }
        for maps in [&self.x, &self.y] {
            for col in maps {
                let mut entries: Vec<(usize, f64)> =
                    col.iter().map(|(&i, &v)| (i, v)).collect();
                entries.sort_unstable_by_key(|&(i, _)| i);
                w.write_all(&(entries.len() as u64).to_le_bytes())?;
                for (i, v) in entries {
                    w.write_all(&(i as u64).to_le_bytes())?;
                    w.write_all(&v.to_le_bytes())?;
                }
            }
        }
        Ok(())
    }

    /// Restores a snapshot written by [`CdState::write_snapshot`]; the
    /// problem must wrap the same operator.
    pub fn read_snapshot(r: &mut impl Read, prob: &WeightedPenaltyProblem) -> Result<CdState> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != SNAPSHOT_MAGIC {
            return Err(Error::Format("bad snapshot magic".into()));
        }
        let version = read_u32(r)?;
        if version != SNAPSHOT_VERSION {
            return Err(Error::UnsupportedFormat(format!(
                "snapshot version {version}"
            )));
        }
        let n = read_u64(r)? as usize;
        let p = read_u64(r)? as usize;
        let update_count = read_u64(r)?;
        if n != prob.dim() || p != prob.p() {
            return Err(Error::Dimension(format!(
                "snapshot is {n}x{p}, problem needs {}x{}",
                prob.dim(),
                prob.p()
            )));
        }
        let eps_compress = read_f64(r)?;
        let history_len = read_u64(r)? as usize;
        let mut last_rows = Vec::with_capacity(p);
        for _ in 0..p {
            last_rows.push(read_u64(r)? as usize);
        }
        let mut d = Vec::with_capacity(p);
        for _ in 0..p {
            d.push(read_f64(r)?);
        }
        let mut s_upper = Vec::with_capacity(p * (p + 1) / 2);
        for _ in 0..p * (p + 1) / 2 {
            s_upper.push(read_f64(r)?);
        }
        let inc_len = read_u64(r)? as usize;
        let mut increments = VecDeque::with_capacity(inc_len);
        for _ in 0..inc_len {
            increments.push_back(read_f64(r)?);
        }
        let read_maps = |r: &mut dyn Read| -> Result<Vec<HashMap<usize, f64>>> {
            let mut maps = Vec::with_capacity(p);
            for _ in 0..p {
                let len = read_u64(r)? as usize;
                let mut m = HashMap::with_capacity(len);
                for _ in 0..len {
                    let i = read_u64(r)? as usize;
                    let v = read_f64(r)?;
                    m.insert(i, v);
                }
                maps.push(m);
            }
            Ok(maps)
        };
        let x = read_maps(r)?;
        let y = read_maps(r)?;
        Ok(CdState {
            n,
            p,
            x,
            y,
            s_upper,
            d,
            diag: prob.operator().diagonal(),
            last_rows,
            increments,
            history_len,
            eps_compress,
            update_count,
            counters: WorkCounters::default(),
        })
    }
}

fn read_u32(r: &mut impl Read) -> Result<u32> {
    let mut b = [0u8; 4];
    r.read_exact(&mut b)?;
    Ok(u32::from_le_bytes(b))
}

fn read_u64(r: &mut (impl Read + ?Sized)) -> Result<u64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(u64::from_le_bytes(b))
}

fn read_f64(r: &mut (impl Read + ?Sized)) -> Result<f64> {
    let mut b = [0u8; 8];
    r.read_exact(&mut b)?;
    Ok(f64::from_le_bytes(b))
}
