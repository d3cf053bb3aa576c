//! Orthogonal matching pursuit over the empirical inner product
//! `<a, b>_n = n^{-1} sum_i a_i b_i`.
//!
//! The path is built incrementally: each step picks the column with the
//! largest normalized correlation with the current residual, orthogonalizes
//! it against the basis built so far (modified Gram-Schmidt with one
//! re-orthogonalization pass), and downdates the residual. Squared residual
//! norms `r_m^2`, the orthonormal basis, and the triangular change-of-basis
//! factor are all retained, so least-squares coefficients and projection
//! diagnostics never require solving normal equations from scratch.

use crate::dataset::{Dataset, PopCovariance};
use crate::error::{Error, Result};
use crate::linalg::{axpy, dot};

/// Relative threshold below which a new direction counts as degenerate.
const DEGENERATE_REL_TOL: f64 = 1e-12;

/// `<a, b>_n = n^{-1} sum_i a_i b_i`.
pub fn empirical_inner(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::contract(format!(
            "empirical inner product needs equal lengths, got {} and {}",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::contract(
            "empirical inner product over empty vectors",
        ));
    }
    Ok(dot(a, b) / a.len() as f64)
}

/// `||a||_n = sqrt(<a, a>_n)`.
pub fn empirical_norm(a: &[f64]) -> Result<f64> {
    Ok(empirical_inner(a, a)?.sqrt())
}

#[inline]
fn inner_n(a: &[f64], b: &[f64]) -> f64 {
    dot(a, b) / a.len() as f64
}

/// Why a path stopped before reaching the requested length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Termination {
    /// The selected column was numerically in the span of the previous ones.
    DegenerateColumn { index: usize, step: usize },
    /// No eligible column remained.
    NoCandidate,
}

/// The full greedy trajectory: selected indices, the orthonormal basis in the
/// empirical inner product, the current residual, and `r_m^2` per iteration.
#[derive(Clone, Debug)]
pub struct OmpPath {
    n: usize,
    p: usize,
    selected: Vec<usize>,
    is_selected: Vec<bool>,
    /// Orthonormal directions `q_1, ..., q_m` with `<q_i, q_j>_n = delta_ij`.
    q_basis: Vec<Vec<f64>>,
    /// Column k of the triangular factor: the selected column
    /// `X^(selected[k])` equals `sum_{i <= k} r_factor[k][i] * q_i`.
    r_factor: Vec<Vec<f64>>,
    /// `<Y, q_k>_n`, the fitted coordinate along each direction.
    y_coef: Vec<f64>,
    /// `r_m^2` for `m = 0..=len`; entry 0 is `||Y||_n^2`.
    r_sq: Vec<f64>,
    residual: Vec<f64>,
    col_norms: Vec<f64>,
    termination: Option<Termination>,
    /// Steps whose best normalized correlation was exactly zero while the
    /// residual was nonzero (selection proceeded by tie-break).
    zero_correlation_steps: Vec<usize>,
}

impl OmpPath {
    /// Empty path (`m = 0`, fit identically zero).
    pub fn new(data: &Dataset) -> Self {
        let n = data.n();
        let y = data.y();
        let col_norms = (0..data.p())
            .map(|j| inner_n(data.x().col(j), data.x().col(j)).sqrt())
            .collect();
        OmpPath {
            n,
            p: data.p(),
            selected: Vec::new(),
            is_selected: vec![false; data.p()],
            q_basis: Vec::new(),
            r_factor: Vec::new(),
            y_coef: Vec::new(),
            r_sq: vec![inner_n(y, y)],
            residual: y.to_vec(),
            col_norms,
            termination: None,
            zero_correlation_steps: Vec::new(),
        }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.selected.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.selected.is_empty()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn selected(&self) -> &[usize] {
        &self.selected
    }

    /// `r_m^2` for `m = 0..=len()`.
    pub fn r_sq(&self) -> &[f64] {
        &self.r_sq
    }

    pub fn q_basis(&self) -> &[Vec<f64>] {
        &self.q_basis
    }

    pub fn residual(&self) -> &[f64] {
        &self.residual
    }

    pub fn termination(&self) -> Option<&Termination> {
        self.termination.as_ref()
    }

    pub fn zero_correlation_steps(&self) -> &[usize] {
        &self.zero_correlation_steps
    }

    /// Fitted coordinates `<Y, q_k>_n` along the orthonormal directions.
    pub fn y_coef(&self) -> &[f64] {
        &self.y_coef
    }

    /// Materialize the fitted vector `F_m = Pi_m Y`.
    pub fn fitted(&self, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for (c, q) in self.y_coef.iter().zip(&self.q_basis).take(m) {
            axpy(*c, q, &mut out);
        }
        out
    }

    /// Append one greedy step. Fails with `DegenerateColumn` when the chosen
    /// column adds no new direction; callers usually terminate the path then.
    pub fn advance(&mut self, data: &Dataset) -> Result<()> {
        let m = self.len();
        if m >= self.n.min(self.p) {
            return Err(Error::contract(format!(
                "path length {m} already at min(n, p) = {}",
                self.n.min(self.p)
            )));
        }
        let (j, best) = select_next_scored(&self.residual, data, &self.is_selected)?;
        let flag_zero_correlation = best == 0.0 && self.r_sq[m] > 0.0;

        // Modified Gram-Schmidt with one re-orthogonalization pass.
        let mut v = data.x().col(j).to_vec();
        let mut r_col = vec![0.0; m + 1];
        for _pass in 0..2 {
            for (i, q) in self.q_basis.iter().enumerate() {
                let c = inner_n(&v, q);
                axpy(-c, q, &mut v);
                r_col[i] += c;
            }
        }
        let new_norm = inner_n(&v, &v).sqrt();
        if new_norm <= DEGENERATE_REL_TOL * self.col_norms[j] {
            return Err(Error::DegenerateColumn {
                index: j,
                step: m + 1,
            });
        }
        let inv = 1.0 / new_norm;
        for vi in v.iter_mut() {
            *vi *= inv;
        }
        r_col[m] = new_norm;

        let y_c = inner_n(&self.residual, &v);
        axpy(-y_c, &v, &mut self.residual);
        let next_r_sq = (self.r_sq[m] - y_c * y_c).max(0.0);

        if flag_zero_correlation {
            self.zero_correlation_steps.push(m + 1);
        }
        self.selected.push(j);
        self.is_selected[j] = true;
        self.q_basis.push(v);
        self.r_factor.push(r_col);
        self.y_coef.push(y_c);
        self.r_sq.push(next_r_sq);
        Ok(())
    }

    /// From-scratch recomputation of the `r_m^2` sequence through the stored
    /// basis (debug aid for the incremental update).
    pub fn recompute_r_sq(&self, data: &Dataset) -> Vec<f64> {
        let y = data.y();
        let mut res = y.to_vec();
        let mut out = Vec::with_capacity(self.len() + 1);
        out.push(inner_n(&res, &res));
        for q in &self.q_basis {
            let c = inner_n(y, q);
            axpy(-c, q, &mut res);
            out.push(inner_n(&res, &res));
        }
        out
    }

    /// Max absolute deviation of `<q_i, q_j>_n` from the identity.
    pub fn basis_orthonormality_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, qi) in self.q_basis.iter().enumerate() {
            for (j, qj) in self.q_basis.iter().enumerate().take(i + 1) {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((inner_n(qi, qj) - target).abs());
            }
        }
        worst
    }

    /// Projection `Pi_m v` of an arbitrary vector onto the first `m` selected
    /// directions.
    pub fn project(&self, v: &[f64], m: usize) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        for q in self.q_basis.iter().take(m) {
            axpy(inner_n(v, q), q, &mut out);
        }
        out
    }
}

/// Argmax over eligible columns of `|<residual, X^(j) / ||X^(j)||_n>_n|`;
/// ties break to the smallest index.
pub fn select_next(residual: &[f64], data: &Dataset, excluded: &[bool]) -> Result<usize> {
    select_next_scored(residual, data, excluded).map(|(j, _)| j)
}

fn select_next_scored(residual: &[f64], data: &Dataset, excluded: &[bool]) -> Result<(usize, f64)> {
    if residual.len() != data.n() {
        return Err(Error::contract("residual length does not match n"));
    }
    if excluded.len() != data.p() {
        return Err(Error::contract("exclusion mask length does not match p"));
    }
    let mut best: Option<(usize, f64)> = None;
    for (j, _) in excluded.iter().enumerate().filter(|(_, &skip)| !skip) {
        let col = data.x().col(j);
        let norm = inner_n(col, col).sqrt();
        if norm <= 0.0 {
            continue;
        }
        let score = (inner_n(residual, col) / norm).abs();
        match best {
            Some((_, s)) if score <= s => {}
            _ => best = Some((j, score)),
        }
    }
    best.ok_or_else(|| {
        Error::NoCandidate("every column is excluded or has zero empirical norm".into())
    })
}

/// Run the greedy path for up to `m_max` steps. Degenerate columns or
/// candidate exhaustion terminate the path early with the cause recorded.
pub fn run_path(data: &Dataset, m_max: usize) -> Result<OmpPath> {
    run_path_until(data, m_max, |_, _| false)
}

/// Like [`run_path`], but additionally stops as soon as
/// `stop(m, r_m^2)` returns true (checked at every iteration count,
/// including `m = 0` before any work is done). This is the sequential-cost
/// entry point: stopping at `tau` only ever pays for `tau` iterations.
pub fn run_path_until(
    data: &Dataset,
    m_max: usize,
    mut stop: impl FnMut(usize, f64) -> bool,
) -> Result<OmpPath> {
    if m_max > data.n().min(data.p()) {
        return Err(Error::contract(format!(
            "m_max = {m_max} exceeds min(n, p) = {}",
            data.n().min(data.p())
        )));
    }
    let mut path = OmpPath::new(data);
    while path.len() < m_max {
        let m = path.len();
        if stop(m, path.r_sq[m]) {
            return Ok(path);
        }
        match path.advance(data) {
            Ok(()) => {}
            Err(Error::DegenerateColumn { index, step }) => {
                path.termination = Some(Termination::DegenerateColumn { index, step });
                return Ok(path);
            }
            Err(Error::NoCandidate(_)) => {
                path.termination = Some(Termination::NoCandidate);
                return Ok(path);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(path)
}

/// Least-squares coefficients of `Y` on the first `m` selected columns,
/// scattered into a length-`p` vector. Solved by back-substitution through
/// the stored triangular factor.
pub fn coefficients_at(path: &OmpPath, m: usize, data: &Dataset) -> Result<Vec<f64>> {
    if m > path.len() {
        return Err(Error::contract(format!(
            "m = {m} exceeds path length {}",
            path.len()
        )));
    }
    if data.p() != path.p {
        return Err(Error::contract("dataset does not match path dimensions"));
    }
    let mut beta_sel = vec![0.0; m];
    for k in (0..m).rev() {
        let mut acc = path.y_coef[k];
        for (k2, b) in beta_sel.iter().enumerate().take(m).skip(k + 1) {
            acc -= path.r_factor[k2][k] * b;
        }
        beta_sel[k] = acc / path.r_factor[k][k];
    }
    let mut beta = vec![0.0; path.p];
    for (k, &j) in path.selected.iter().take(m).enumerate() {
        beta[j] = beta_sel[k];
    }
    Ok(beta)
}

/// Per-iteration oracle quantities, computable only with ground truth:
/// squared empirical bias, empirical stochastic error, the cross term,
/// and the empirical risk, for `m = 0..=len`.
#[derive(Clone, Debug)]
pub struct PathDiagnostics {
    /// `b_m^2 = ||f* - Pi_m f*||_n^2`.
    pub b_sq: Vec<f64>,
    /// `s_m = ||Pi_m eps||_n^2`.
    pub s: Vec<f64>,
    /// `c_m = <f* - Pi_m f*, eps>_n`.
    pub c: Vec<f64>,
    /// `||F_m - f*||_n^2`, computed directly from the fitted vector.
    pub emp_risk: Vec<f64>,
    /// `||eps||_n^2`, the empirical noise level.
    pub eps_norm_sq: f64,
    /// Drop of the squared residual norm, `r_{m-1}^2 - r_m^2 >= 0`;
    /// entry 0 is 0.
    pub delta_r_sq: Vec<f64>,
    /// Increment of the stochastic error, `s_m - s_{m-1} >= 0`; entry 0 is 0.
    pub delta_s: Vec<f64>,
}

impl PathDiagnostics {
    /// Number of iterations covered (arrays run over `m = 0..=len`).
    pub fn len(&self) -> usize {
        self.b_sq.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Compute [`PathDiagnostics`] for a path over a dataset with ground truth.
pub fn diagnostics(path: &OmpPath, data: &Dataset) -> Result<PathDiagnostics> {
    let truth = data.truth().ok_or(Error::MissingTruth("diagnostics"))?;
    let f_star = &truth.f_star;
    let eps = &truth.epsilon;
    let len = path.len();

    let eps_norm_sq = inner_n(eps, eps);
    let mut b_sq = Vec::with_capacity(len + 1);
    let mut s = Vec::with_capacity(len + 1);
    let mut c = Vec::with_capacity(len + 1);
    let mut emp_risk = Vec::with_capacity(len + 1);

    b_sq.push(inner_n(f_star, f_star));
    s.push(0.0);
    c.push(inner_n(f_star, eps));

    // Fitted vector maintained incrementally for a direct risk evaluation.
    let mut fit = vec![0.0; path.n];
    let mut diff: Vec<f64> = f_star.iter().map(|v| -v).collect();
    emp_risk.push(inner_n(&diff, &diff));

    for (k, q) in path.q_basis.iter().enumerate() {
        let fc = inner_n(f_star, q);
        let ec = inner_n(eps, q);
        b_sq.push((b_sq[k] - fc * fc).max(0.0));
        s.push(s[k] + ec * ec);
        c.push(c[k] - fc * ec);

        axpy(path.y_coef[k], q, &mut fit);
        for (d, (f, t)) in diff.iter_mut().zip(fit.iter().zip(f_star)) {
            *d = f - t;
        }
        emp_risk.push(inner_n(&diff, &diff));
    }

    let mut delta_r_sq = vec![0.0; len + 1];
    let mut delta_s = vec![0.0; len + 1];
    for m in 1..=len {
        delta_r_sq[m] = path.r_sq[m - 1] - path.r_sq[m];
        delta_s[m] = s[m] - s[m - 1];
    }

    Ok(PathDiagnostics {
        b_sq,
        s,
        c,
        emp_risk,
        eps_norm_sq,
        delta_r_sq,
        delta_s,
    })
}

/// Population risk of a linear fit: `(beta_hat - beta_star)' Gamma
/// (beta_hat - beta_star)`.
pub fn population_risk(beta_hat: &[f64], beta_star: &[f64], gamma: &PopCovariance) -> Result<f64> {
    if beta_hat.len() != beta_star.len() {
        return Err(Error::contract(format!(
            "coefficient lengths differ: {} vs {}",
            beta_hat.len(),
            beta_star.len()
        )));
    }
    if !gamma.dim_matches(beta_hat.len()) {
        return Err(Error::contract("covariance dimension does not match p"));
    }
    let d: Vec<f64> = beta_hat.iter().zip(beta_star).map(|(a, b)| a - b).collect();
    Ok(gamma.quadratic_form(&d).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;

    fn dataset(cols: Vec<Vec<f64>>, y: Vec<f64>) -> Dataset {
        Dataset::new(Mat::from_columns(cols).unwrap(), y).unwrap()
    }

    #[test]
    fn empirical_inner_basics() {
        let zero = vec![0.0; 5];
        let b = vec![1.0, -2.0, 3.0, 0.5, 9.0];
        assert_eq!(empirical_inner(&zero, &b).unwrap(), 0.0);
        let ones = vec![1.0; 4];
        assert_eq!(empirical_inner(&ones, &ones).unwrap(), 1.0);
        assert!(empirical_inner(&zero, &ones).is_err());
    }

    #[test]
    fn empirical_inner_matches_direct_summation() {
        let a = vec![0.3, -1.2, 2.0, 0.0, 4.4, -0.5, 1.1];
        let b = vec![1.0, 0.7, -0.3, 2.2, 0.1, 0.9, -1.5];
        let direct: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>() / 7.0;
        assert!((empirical_inner(&a, &b).unwrap() - direct).abs() < 1e-14);
    }

    #[test]
    fn select_next_perfect_correlation() {
        // Orthogonal columns; Y equals column 3 (index 2).
        let cols = vec![
            vec![1.0, 0.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.0],
            vec![0.0, 0.0, 0.0, 1.0],
        ];
        let y = vec![0.0, 0.0, 1.0, 0.0];
        let ds = dataset(cols, y.clone());
        let j = select_next(&y, &ds, &[false; 4]).unwrap();
        assert_eq!(j, 2);
    }

    #[test]
    fn select_next_matches_full_scan() {
        // Deterministic pseudo-random instance, n = 10, p = 6.
        let mut state = 42u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let cols: Vec<Vec<f64>> = (0..6).map(|_| (0..10).map(|_| next()).collect()).collect();
        let residual: Vec<f64> = (0..10).map(|_| next()).collect();
        let ds = dataset(cols, residual.clone());

        let mut best_j = usize::MAX;
        let mut best_s = -1.0;
        for j in 0..ds.p() {
            let col = ds.x().col(j);
            let norm = empirical_norm(col).unwrap();
            let s = (empirical_inner(&residual, col).unwrap() / norm).abs();
            if s > best_s {
                best_s = s;
                best_j = j;
            }
        }
        assert_eq!(select_next(&residual, &ds, &[false; 6]).unwrap(), best_j);
    }

    #[test]
    fn select_next_prefers_the_only_correlated_column() {
        // Residual is empirically orthogonal to every column except index 1.
        let cols = vec![
            vec![1.0, 1.0, 0.0, 0.0],
            vec![0.0, 0.0, 1.0, 0.5],
            vec![0.0, 0.0, 1.0, -2.0],
        ];
        let residual = vec![1.0, -1.0, 2.0, 4.0];
        let ds = dataset(cols, residual.clone());
        assert_eq!(select_next(&residual, &ds, &[false; 3]).unwrap(), 1);
    }

    #[test]
    fn zero_correlation_step_is_flagged() {
        // Nonzero residual orthogonal to every column: selection proceeds by
        // tie-break and the step is flagged.
        let cols = vec![vec![1.0, 1.0], vec![2.0, 2.0]];
        let y = vec![1.0, -1.0];
        let ds = dataset(cols, y);
        let path = run_path(&ds, 2).unwrap();
        assert_eq!(path.selected()[0], 0);
        assert_eq!(path.zero_correlation_steps(), &[1]);
        assert!((path.r_sq()[1] - path.r_sq()[0]).abs() < 1e-15);
    }

    #[test]
    fn select_next_fails_when_all_excluded() {
        let ds = dataset(vec![vec![1.0, 2.0]], vec![1.0, 1.0]);
        assert!(matches!(
            select_next(&[1.0, 1.0], &ds, &[true]),
            Err(Error::NoCandidate(_))
        ));
    }

    #[test]
    fn advance_single_column_projection() {
        // Orthonormal design in the empirical norm, noise-free Y = 2 X^(1).
        let root2 = 2.0f64.sqrt();
        let cols = vec![vec![root2, 0.0], vec![0.0, root2]];
        let y = vec![2.0 * root2, 0.0];
        let ds = dataset(cols, y.clone());
        let mut path = OmpPath::new(&ds);
        path.advance(&ds).unwrap();
        assert_eq!(path.selected(), &[0]);
        let y_norm_sq = empirical_inner(&y, &y).unwrap();
        let corr = empirical_inner(&y, ds.x().col(0)).unwrap();
        assert!((path.r_sq()[1] - (y_norm_sq - corr * corr)).abs() < 1e-12);
        let resid_corr = empirical_inner(path.residual(), ds.x().col(0)).unwrap();
        assert!(resid_corr.abs() < 1e-12);
    }

    #[test]
    fn advance_rejects_duplicate_direction() {
        // Second column is a multiple of the first; once column 0 is in the
        // basis, advancing onto column 1 must fail as degenerate.
        let cols = vec![
            vec![1.0, 2.0, 3.0],
            vec![2.0, 4.0, 6.0],
            vec![0.0, 1.0, 0.0],
        ];
        let ds = dataset(cols, vec![1.0, 2.0, 3.0]);
        let mut path = OmpPath::new(&ds);
        path.advance(&ds).unwrap();
        assert_eq!(path.selected(), &[0]);
        // The residual is ~0, so tie-breaking proposes column 1 next.
        let err = path.advance(&ds).unwrap_err();
        assert!(matches!(err, Error::DegenerateColumn { index: 1, step: 2 }));
        // run_path absorbs the degeneracy as early termination.
        let full = run_path(&ds, 3).unwrap();
        assert_eq!(full.len(), 1);
        assert!(matches!(
            full.termination(),
            Some(Termination::DegenerateColumn { index: 1, step: 2 })
        ));
        assert!(full.r_sq()[1] <= 1e-12 * full.r_sq()[0]);
    }

    #[test]
    fn full_rank_path_drives_residual_to_zero() {
        let mut state = 7u64;
        let mut next = move || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            ((state >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let n = 8;
        let cols: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| next()).collect()).collect();
        let y: Vec<f64> = (0..n).map(|_| next()).collect();
        let ds = dataset(cols, y.clone());
        let path = run_path(&ds, n).unwrap();
        assert_eq!(path.len(), n);
        let y_norm_sq = empirical_inner(&y, &y).unwrap();
        assert!(path.r_sq()[n] <= 1e-10 * y_norm_sq);
        assert!(path.basis_orthonormality_defect() < 1e-8);
    }

    #[test]
    fn zero_response_keeps_tie_break_order() {
        let cols = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let ds = dataset(cols, vec![0.0, 0.0]);
        let path = run_path(&ds, 2).unwrap();
        assert_eq!(path.selected(), &[0, 1]);
        assert!(path.r_sq().iter().all(|&r| r == 0.0));
        assert_eq!(path.zero_correlation_steps(), &[] as &[usize]);
    }

    #[test]
    fn coefficients_recover_orthonormal_projection() {
        let root2 = 2.0f64.sqrt();
        let cols = vec![vec![root2, 0.0], vec![0.0, root2]];
        let y = vec![3.0, 5.0];
        let ds = dataset(cols.clone(), y.clone());
        let path = run_path(&ds, 2).unwrap();
        let beta0 = coefficients_at(&path, 0, &ds).unwrap();
        assert_eq!(beta0, vec![0.0, 0.0]);
        let beta1 = coefficients_at(&path, 1, &ds).unwrap();
        let j = path.selected()[0];
        let expect = empirical_inner(&y, ds.x().col(j)).unwrap();
        assert!((beta1[j] - expect).abs() < 1e-12);
    }

    #[test]
    fn diagnostics_at_zero_iterations() {
        let cols = vec![vec![1.0, 0.0, 1.0], vec![0.0, 1.0, -1.0]];
        let f_star = vec![1.0, 2.0, 0.0];
        let eps = vec![0.1, -0.2, 0.3];
        let y: Vec<f64> = f_star.iter().zip(&eps).map(|(a, b)| a + b).collect();
        let ds = dataset(cols, y)
            .with_truth(crate::dataset::Truth {
                beta_star: None,
                epsilon: eps.clone(),
                f_star: f_star.clone(),
            })
            .unwrap();
        let path = OmpPath::new(&ds);
        let d = diagnostics(&path, &ds).unwrap();
        assert!((d.b_sq[0] - empirical_inner(&f_star, &f_star).unwrap()).abs() < 1e-14);
        assert_eq!(d.s[0], 0.0);
        assert!((d.c[0] - empirical_inner(&f_star, &eps).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn diagnostics_requires_truth() {
        let ds = dataset(vec![vec![1.0, 2.0]], vec![1.0, 1.0]);
        let path = OmpPath::new(&ds);
        assert!(matches!(
            diagnostics(&path, &ds),
            Err(Error::MissingTruth(_))
        ));
    }

    #[test]
    fn population_risk_basics() {
        let b = vec![1.0, -2.0, 0.5];
        assert_eq!(
            population_risk(&b, &b, &PopCovariance::Identity).unwrap(),
            0.0
        );
        let a = vec![2.0, -2.0, 0.5];
        assert!((population_risk(&a, &b, &PopCovariance::Identity).unwrap() - 1.0).abs() < 1e-14);
        assert!(population_risk(&a, &b[..2], &PopCovariance::Identity).is_err());
    }
}
