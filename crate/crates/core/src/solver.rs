//! Fits log-abilities `x = ln a` by minimizing
//! `R(x) = Σ_papers (ln q − Σ_authors f x)²`, optionally subject to `x ≥ 0`.
//!
//! The constrained fit is projected gradient descent with a backtracking
//! sufficient-decrease line search started from `1 / L`, where
//! `L = 2 · max row sum of FᵀF` bounds the gradient's Lipschitz constant. The
//! unconstrained fit is a direct minimum-norm least-squares solve.

use std::collections::HashMap;

use num_traits::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::min_norm_lstsq;
use crate::model::{AuthorshipMatrix, Dataset};
use crate::scalar::Scalar;

const MAX_HALVINGS: usize = 60;
const MAX_POLISH_ROUNDS: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    /// `ln a ≥ 0` for every author.
    Constrained,
    /// Abilities below one allowed.
    Unconstrained,
}

impl SolveMode {
    pub fn as_str(self) -> &'static str {
        match self {
            SolveMode::Constrained => "constrained",
            SolveMode::Unconstrained => "unconstrained",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Initialization<T> {
    /// `x0 = ln(max(1, mean fractional citations per paper))`.
    FractionalCitations,
    /// `x0 = 0`, i.e. every ability starts at one.
    Ones,
    Explicit(Vec<T>),
}

/// How citation counts map to the regression target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LogTransform {
    /// `ln q`; undefined for uncited papers.
    #[default]
    Log,
    /// `ln(q + 1)`.
    LogPlusOne,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveConfig<T> {
    pub mode: SolveMode,
    pub max_iterations: usize,
    /// Bound on the infinity norm of the projected gradient.
    pub gradient_tolerance: T,
    /// Bound on the relative decrease of `R` between iterations.
    pub objective_tolerance: T,
    pub initialization: Initialization<T>,
    /// Finish the descent with an exact solve on the identified free set.
    pub polish: bool,
}

impl<T: Scalar> Default for SolveConfig<T> {
    fn default() -> Self {
        Self {
            mode: SolveMode::Constrained,
            max_iterations: 10_000,
            gradient_tolerance: T::of(1e-8),
            objective_tolerance: T::of(1e-12),
            initialization: Initialization::FractionalCitations,
            polish: true,
        }
    }
}

impl<T: Scalar> SolveConfig<T> {
    pub fn with_mode(mode: SolveMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iterations < 1 {
            return Err(Error::InvalidConfig("max_iterations must be at least 1".into()));
        }
        if !(self.gradient_tolerance > T::zero()) || !(self.objective_tolerance > T::zero()) {
            return Err(Error::InvalidConfig("tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    GradientTolerance,
    ObjectiveTolerance,
    MaxIterations,
    /// No step passed the line search (rounding floor reached).
    LineSearch,
    DirectSolve,
}

/// Fitted log-abilities in matrix column order.
#[derive(Debug, Clone, PartialEq)]
pub struct AbilityVector<T> {
    author_ids: Vec<String>,
    log_abilities: Vec<T>,
    index: HashMap<String, usize>,
    pub residual: T,
    pub iterations: usize,
    pub converged: bool,
    pub mode: SolveMode,
}

impl<T: Scalar> AbilityVector<T> {
    pub fn author_ids(&self) -> &[String] {
        &self.author_ids
    }

    pub fn log_abilities(&self) -> &[T] {
        &self.log_abilities
    }

    pub fn get(&self, author_id: &str) -> Option<T> {
        self.index.get(author_id).map(|&i| self.log_abilities[i])
    }

    /// `a = exp(x)`.
    pub fn ability(&self, author_id: &str) -> Option<T> {
        self.get(author_id).map(Float::exp)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, T)> + '_ {
        self.author_ids
            .iter()
            .map(String::as_str)
            .zip(self.log_abilities.iter().copied())
    }

    pub fn len(&self) -> usize {
        self.author_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.author_ids.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveDiagnostics<T> {
    /// `R` at the start and after every accepted iterate.
    pub objective_trace: Vec<T>,
    /// Authors pinned at `x = 0` (constrained mode only).
    pub active_constraints: Vec<String>,
    pub kkt_violation: T,
    pub stop_reason: StopReason,
    /// Identical-column author groups; their individual values are not identifiable.
    pub inseparable_groups: Vec<Vec<String>>,
    /// Numerical rank of `F` (unconstrained mode only).
    pub rank: Option<usize>,
}

/// A matrix paired with its regression target and, when it came from a
/// dataset, the raw citation counts in row order.
#[derive(Debug, Clone)]
pub struct Problem<T> {
    pub matrix: AuthorshipMatrix,
    pub log_q: Vec<T>,
    pub citations: Option<Vec<f64>>,
}

impl<T: Scalar> Problem<T> {
    pub fn from_dataset(dataset: &Dataset, transform: LogTransform) -> Result<Self> {
        dataset.ensure_solvable()?;
        let matrix = AuthorshipMatrix::build(dataset)?;
        let citations: Vec<f64> = dataset.papers.iter().map(|p| p.citations).collect();
        let log_q = log_quality(dataset, transform)?;
        Ok(Self {
            matrix,
            log_q,
            citations: Some(citations),
        })
    }

    pub fn new(matrix: AuthorshipMatrix, log_q: Vec<T>) -> Result<Self> {
        check_dims(&matrix, &log_q, None)?;
        Ok(Self {
            matrix,
            log_q,
            citations: None,
        })
    }
}

/// Regression targets in dataset paper order.
pub fn log_quality<T: Scalar>(dataset: &Dataset, transform: LogTransform) -> Result<Vec<T>> {
    dataset
        .papers
        .iter()
        .map(|p| {
            let v = match transform {
                LogTransform::Log => p.citations.ln(),
                LogTransform::LogPlusOne => p.citations.ln_1p(),
            };
            if v.is_finite() {
                Ok(T::of(v))
            } else {
                Err(Error::NonFinite(format!(
                    "log citations of paper `{}` (q = {})",
                    p.paper_id, p.citations
                )))
            }
        })
        .collect()
}

fn check_dims<T: Scalar>(matrix: &AuthorshipMatrix, log_q: &[T], x: Option<&[T]>) -> Result<()> {
    if log_q.len() != matrix.n_papers() {
        return Err(Error::DimensionMismatch {
            what: "log-quality entries",
            expected: matrix.n_papers(),
            got: log_q.len(),
        });
    }
    if let Some(x) = x {
        if x.len() != matrix.n_authors() {
            return Err(Error::DimensionMismatch {
                what: "log-ability entries",
                expected: matrix.n_authors(),
                got: x.len(),
            });
        }
    }
    if log_q.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("log-quality target".into()));
    }
    Ok(())
}

/// `ln q − F x`.
fn residuals<T: Scalar>(matrix: &AuthorshipMatrix, log_q: &[T], x: &[T]) -> Vec<T> {
    matrix
        .predict(x)
        .into_iter()
        .zip(log_q)
        .map(|(p, &b)| b - p)
        .collect()
}

fn sum_squares<T: Scalar>(r: &[T]) -> T {
    r.iter().map(|&v| v * v).sum()
}

fn gradient_from_residuals<T: Scalar>(matrix: &AuthorshipMatrix, r: &[T]) -> Vec<T> {
    let minus_two = T::of(-2.0);
    matrix.transpose_mul(r).into_iter().map(|v| minus_two * v).collect()
}

/// Sum of squared residuals `R(x)`.
pub fn objective<T: Scalar>(matrix: &AuthorshipMatrix, log_q: &[T], x: &[T]) -> Result<T> {
    check_dims(matrix, log_q, Some(x))?;
    Ok(sum_squares(&residuals(matrix, log_q, x)))
}

/// `∂R/∂x_i = −2 Σ_α f_αi (ln q_α − Σ_j f_αj x_j)`.
pub fn gradient<T: Scalar>(matrix: &AuthorshipMatrix, log_q: &[T], x: &[T]) -> Result<Vec<T>> {
    check_dims(matrix, log_q, Some(x))?;
    Ok(gradient_from_residuals(matrix, &residuals(matrix, log_q, x)))
}

/// First-order optimality violation: `|g_i|` on free coordinates and
/// `max(0, −g_i)` on coordinates at the bound. Plain `‖g‖∞` when unconstrained.
pub fn kkt_violation<T: Scalar>(x: &[T], g: &[T], mode: SolveMode) -> T {
    x.iter().zip(g).fold(T::zero(), |worst, (&xi, &gi)| {
        let v = match mode {
            SolveMode::Constrained if xi <= T::zero() => (-gi).max(T::zero()),
            _ => gi.abs(),
        };
        worst.max(v)
    })
}

/// Starting point for the iterative fit.
pub fn initialize<T: Scalar>(
    dataset: &Dataset,
    matrix: &AuthorshipMatrix,
    strategy: &Initialization<T>,
) -> Result<Vec<T>> {
    let mut citations = vec![0.0; matrix.n_papers()];
    for p in &dataset.papers {
        let row = matrix.paper_row(&p.paper_id).ok_or_else(|| Error::DimensionMismatch {
            what: "papers",
            expected: matrix.n_papers(),
            got: dataset.n_papers(),
        })?;
        citations[row] = p.citations;
    }
    initial_point(matrix, Some(&citations), strategy)
}

fn initial_point<T: Scalar>(
    matrix: &AuthorshipMatrix,
    citations: Option<&[f64]>,
    strategy: &Initialization<T>,
) -> Result<Vec<T>> {
    match strategy {
        Initialization::Ones => Ok(vec![T::zero(); matrix.n_authors()]),
        Initialization::Explicit(x) => {
            if x.len() != matrix.n_authors() {
                return Err(Error::DimensionMismatch {
                    what: "initial log-abilities",
                    expected: matrix.n_authors(),
                    got: x.len(),
                });
            }
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("initial log-abilities".into()));
            }
            Ok(x.clone())
        }
        Initialization::FractionalCitations => {
            let citations = citations.ok_or_else(|| {
                Error::InvalidConfig("fractional-citation initialization needs citation counts".into())
            })?;
            Ok((0..matrix.n_authors())
                .map(|c| {
                    let papers = matrix.col(c);
                    if papers.is_empty() {
                        return T::zero();
                    }
                    let frac: f64 = papers
                        .iter()
                        .map(|&r| citations[r] / matrix.row(r).len() as f64)
                        .sum();
                    T::of((frac / papers.len() as f64).max(1.0).ln())
                })
                .collect())
        }
    }
}

/// Fits the problem in `config.mode`.
pub fn solve<T: Scalar>(
    problem: &Problem<T>,
    config: &SolveConfig<T>,
) -> Result<(AbilityVector<T>, SolveDiagnostics<T>)> {
    config.validate()?;
    let matrix = &problem.matrix;
    if matrix.n_papers() == 0 {
        return Err(Error::EmptyDataset("papers"));
    }
    if matrix.n_authors() == 0 {
        return Err(Error::EmptyDataset("authors"));
    }
    check_dims(matrix, &problem.log_q, None)?;
    match config.mode {
        SolveMode::Constrained => {
            let x0 = initial_point(matrix, problem.citations.as_deref(), &config.initialization)?;
            projected_gradient(matrix, &problem.log_q, x0, config)
        }
        SolveMode::Unconstrained => direct_least_squares(matrix, &problem.log_q, config),
    }
}

/// Fits `matrix` against `log_q` from an explicit start (ignores
/// `config.initialization`).
pub fn solve_from<T: Scalar>(
    matrix: &AuthorshipMatrix,
    log_q: &[T],
    x0: Vec<T>,
    config: &SolveConfig<T>,
) -> Result<(AbilityVector<T>, SolveDiagnostics<T>)> {
    let config = SolveConfig {
        initialization: Initialization::Explicit(x0),
        ..config.clone()
    };
    let problem = Problem::new(matrix.clone(), log_q.to_vec())?;
    solve(&problem, &config)
}

fn projected_gradient<T: Scalar>(
    matrix: &AuthorshipMatrix,
    log_q: &[T],
    x0: Vec<T>,
    config: &SolveConfig<T>,
) -> Result<(AbilityVector<T>, SolveDiagnostics<T>)> {
    let mode = SolveMode::Constrained;
    let lipschitz = T::of(2.0) * T::of(matrix.max_gram_row_sum() as f64);
    let mut state = Descent::new(matrix, log_q, x0.into_iter().map(|v| v.max(T::zero())).collect())?;
    let mut stop = StopReason::MaxIterations;

    for _ in 0..MAX_POLISH_ROUNDS {
        stop = state.run(lipschitz, config)?;
        if state.kkt <= config.gradient_tolerance || !config.polish {
            break;
        }
        let before = state.value;
        if !state.polish()? {
            break;
        }
        if state.kkt <= config.gradient_tolerance {
            stop = StopReason::GradientTolerance;
            break;
        }
        if state.value >= before || state.iterations >= config.max_iterations {
            break;
        }
    }

    let Descent { x, kkt, trace, iterations, .. } = state;
    let active = x
        .iter()
        .enumerate()
        .filter(|(_, &v)| v <= T::zero())
        .map(|(i, _)| matrix.author_ids()[i].clone())
        .collect();
    let converged = kkt <= config.gradient_tolerance;
    Ok(finish(matrix, log_q, x, iterations, converged, mode, SolveDiagnostics {
        objective_trace: trace,
        active_constraints: active,
        kkt_violation: kkt,
        stop_reason: stop,
        inseparable_groups: matrix.find_inseparable_groups(),
        rank: None,
    }))
}

/// Iterate of the constrained fit with its cached residual and gradient.
struct Descent<'a, T> {
    matrix: &'a AuthorshipMatrix,
    log_q: &'a [T],
    x: Vec<T>,
    r: Vec<T>,
    g: Vec<T>,
    value: T,
    kkt: T,
    trace: Vec<T>,
    iterations: usize,
}

impl<'a, T: Scalar> Descent<'a, T> {
    fn new(matrix: &'a AuthorshipMatrix, log_q: &'a [T], x: Vec<T>) -> Result<Self> {
        let r = residuals(matrix, log_q, &x);
        let value = sum_squares(&r);
        ensure_finite(value)?;
        let g = gradient_from_residuals(matrix, &r);
        let kkt = kkt_violation(&x, &g, SolveMode::Constrained);
        Ok(Self {
            matrix,
            log_q,
            x,
            r,
            g,
            value,
            kkt,
            trace: vec![value],
            iterations: 0,
        })
    }

    fn accept(&mut self, x: Vec<T>, r: Vec<T>, value: T) {
        self.x = x;
        self.r = r;
        self.value = value;
        self.g = gradient_from_residuals(self.matrix, &self.r);
        self.kkt = kkt_violation(&self.x, &self.g, SolveMode::Constrained);
        self.trace.push(value);
    }

    /// Projected gradient steps until a tolerance fires, the line search
    /// stalls, or the iteration budget is spent.
    fn run(&mut self, lipschitz: T, config: &SolveConfig<T>) -> Result<StopReason> {
        let two = T::of(2.0);
        let base_step = T::one() / lipschitz;
        let mut candidate = vec![T::zero(); self.x.len()];
        while self.iterations < config.max_iterations {
            if self.kkt <= config.gradient_tolerance {
                return Ok(StopReason::GradientTolerance);
            }
            let mut step = base_step;
            let mut accepted = None;
            for _ in 0..MAX_HALVINGS {
                for ((c, &xi), &gi) in candidate.iter_mut().zip(&self.x).zip(&self.g) {
                    *c = (xi - step * gi).max(T::zero());
                }
                let r_new = residuals(self.matrix, self.log_q, &candidate);
                let v_new = sum_squares(&r_new);
                ensure_finite(v_new)?;
                let (lin, sq) = candidate.iter().zip(&self.x).zip(&self.g).fold(
                    (T::zero(), T::zero()),
                    |(lin, sq), ((&c, &xi), &gi)| {
                        let d = c - xi;
                        (lin + gi * d, sq + d * d)
                    },
                );
                if v_new <= self.value + lin + sq / (two * step) {
                    accepted = Some((r_new, v_new));
                    break;
                }
                step = step / two;
            }
            let Some((r_new, v_new)) = accepted.filter(|(_, v)| *v <= self.value) else {
                return Ok(StopReason::LineSearch);
            };

            let previous = self.value;
            let next = candidate.clone();
            self.accept(next, r_new, v_new);
            self.iterations += 1;
            if self.kkt <= config.gradient_tolerance {
                return Ok(StopReason::GradientTolerance);
            }
            if previous - v_new <= config.objective_tolerance * previous {
                return Ok(StopReason::ObjectiveTolerance);
            }
        }
        Ok(StopReason::MaxIterations)
    }

    /// Exact least-squares solve on the current free set, walking back along
    /// the segment towards it whenever the subspace minimizer leaves the
    /// feasible region. Every intermediate point has `R` no larger than the
    /// start, so the accepted result keeps the trace monotone.
    fn polish(&mut self) -> Result<bool> {
        let m = self.matrix.n_papers();
        let mut x = self.x.clone();
        for _ in 0..=x.len() {
            let free: Vec<usize> = (0..x.len()).filter(|&i| x[i] > T::zero()).collect();
            if free.is_empty() {
                break;
            }
            let dense = self.matrix.dense_columns::<T>(&free);
            let z = min_norm_lstsq(&dense, m, free.len(), self.log_q)?.solution;
            let blocking = free
                .iter()
                .zip(&z)
                .filter(|(_, &zj)| zj <= T::zero())
                .map(|(&i, &zj)| x[i] / (x[i] - zj))
                .fold(None, |acc: Option<T>, a| Some(acc.map_or(a, |b| b.min(a))));
            match blocking {
                None => {
                    for (&i, &zj) in free.iter().zip(&z) {
                        x[i] = zj;
                    }
                    break;
                }
                Some(alpha) => {
                    for (&i, &zj) in free.iter().zip(&z) {
                        let moved = x[i] + alpha * (zj - x[i]);
                        x[i] = if zj <= T::zero() && x[i] / (x[i] - zj) <= alpha {
                            T::zero()
                        } else {
                            moved.max(T::zero())
                        };
                    }
                }
            }
        }
        let r = residuals(self.matrix, self.log_q, &x);
        let value = sum_squares(&r);
        ensure_finite(value)?;
        if value > self.value {
            return Ok(false);
        }
        self.accept(x, r, value);
        Ok(true)
    }
}

fn direct_least_squares<T: Scalar>(
    matrix: &AuthorshipMatrix,
    log_q: &[T],
    config: &SolveConfig<T>,
) -> Result<(AbilityVector<T>, SolveDiagnostics<T>)> {
    let mode = SolveMode::Unconstrained;
    let cols: Vec<usize> = (0..matrix.n_authors()).collect();
    let dense = matrix.dense_columns::<T>(&cols);
    let ls = min_norm_lstsq(&dense, matrix.n_papers(), matrix.n_authors(), log_q)?;
    let x = ls.solution;
    let r = residuals(matrix, log_q, &x);
    let value = sum_squares(&r);
    ensure_finite(value)?;
    let g = gradient_from_residuals(matrix, &r);
    let kkt = kkt_violation(&x, &g, mode);
    let converged = kkt <= config.gradient_tolerance;
    Ok(finish(matrix, log_q, x, 1, converged, mode, SolveDiagnostics {
        objective_trace: vec![value],
        active_constraints: Vec::new(),
        kkt_violation: kkt,
        stop_reason: StopReason::DirectSolve,
        inseparable_groups: matrix.find_inseparable_groups(),
        rank: Some(ls.rank),
    }))
}

fn finish<T: Scalar>(
    matrix: &AuthorshipMatrix,
    log_q: &[T],
    x: Vec<T>,
    iterations: usize,
    converged: bool,
    mode: SolveMode,
    diagnostics: SolveDiagnostics<T>,
) -> (AbilityVector<T>, SolveDiagnostics<T>) {
    let residual = sum_squares(&residuals(matrix, log_q, &x));
    let author_ids = matrix.author_ids().to_vec();
    let index = author_ids.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect();
    (
        AbilityVector {
            author_ids,
            log_abilities: x,
            index,
            residual,
            iterations,
            converged,
            mode,
        },
        diagnostics,
    )
}

fn ensure_finite<T: Scalar>(v: T) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::NonFinite("objective".into()))
    }
}
