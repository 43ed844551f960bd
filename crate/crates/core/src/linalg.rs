//! Dense minimum-norm least squares through a complete orthogonal
//! decomposition: Householder QR with column pivoting followed, when the
//! matrix is rank deficient, by an LQ step on the trapezoidal factor.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct LeastSquares<T> {
    pub solution: Vec<T>,
    /// Numerical rank detected by the pivoted QR.
    pub rank: usize,
}

/// Minimum-norm minimizer of `‖A x − b‖²` for column-major `A` (`m × n`).
///
/// Columns whose remaining norm falls below `10 · ε · max(m, n) · |R₀₀|`
/// are treated as linearly dependent.
pub fn min_norm_lstsq<T: Scalar>(a: &[T], m: usize, n: usize, b: &[T]) -> Result<LeastSquares<T>> {
    if a.len() != m * n {
        return Err(Error::DimensionMismatch {
            what: "matrix entries",
            expected: m * n,
            got: a.len(),
        });
    }
    if b.len() != m {
        return Err(Error::DimensionMismatch {
            what: "right-hand side entries",
            expected: m,
            got: b.len(),
        });
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares input".into()));
    }

    let mut a = a.to_vec();
    let mut c = b.to_vec();
    let mut perm: Vec<usize> = (0..n).collect();
    let at = |i: usize, j: usize| j * m + i;
    let tol_factor = T::epsilon() * T::of(10.0 * m.max(n) as f64);

    let mut rank = 0;
    let mut leading = T::zero();
    for k in 0..m.min(n) {
        let (pivot, norm) = (k..n)
            .map(|j| (j, col_norm(&a[at(k, j)..at(m, j)])))
            .fold((k, -T::one()), |best, cand| if cand.1 > best.1 { cand } else { best });
        if k == 0 {
            leading = norm;
        }
        if norm <= T::zero() || norm <= tol_factor * leading {
            break;
        }
        if pivot != k {
            for i in 0..m {
                a.swap(at(i, k), at(i, pivot));
            }
            perm.swap(k, pivot);
        }

        let head = a[at(k, k)];
        let alpha = if head >= T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[at(k, k)..at(m, k)].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        if vnorm2 > T::zero() {
            let beta = T::of(2.0) / vnorm2;
            for j in k + 1..n {
                reflect(&v, beta, &mut a[at(k, j)..at(m, j)]);
            }
            reflect(&v, beta, &mut c[k..m]);
        }
        a[at(k, k)] = alpha;
        for i in k + 1..m {
            a[at(i, k)] = T::zero();
        }
        rank += 1;
    }

    let mut xp = vec![T::zero(); n];
    if rank == n {
        for i in (0..n).rev() {
            let mut s = c[i];
            for j in i + 1..n {
                s = s - a[at(i, j)] * xp[j];
            }
            xp[i] = s / a[at(i, i)];
        }
    } else if rank > 0 {
        // W = Rᵀ (n × rank, column-major) factored as Z [U; 0].
        let mut w = vec![T::zero(); n * rank];
        for i in 0..rank {
            for j in i..n {
                w[i * n + j] = a[at(i, j)];
            }
        }
        let mut reflectors: Vec<(Vec<T>, T)> = Vec::with_capacity(rank);
        let mut diag = vec![T::zero(); rank];
        for i in 0..rank {
            let norm = col_norm(&w[i * n + i..(i + 1) * n]);
            let head = w[i * n + i];
            let alpha = if head >= T::zero() { -norm } else { norm };
            let mut v: Vec<T> = w[i * n + i..(i + 1) * n].to_vec();
            v[0] = v[0] - alpha;
            let vnorm2: T = v.iter().map(|&x| x * x).sum();
            let beta = if vnorm2 > T::zero() { T::of(2.0) / vnorm2 } else { T::zero() };
            for l in i + 1..rank {
                reflect(&v, beta, &mut w[l * n + i..(l + 1) * n]);
            }
            diag[i] = alpha;
            reflectors.push((v, beta));
        }
        // Uᵀ y = c₁ by forward substitution; U[l, i] sits at w[i * n + l].
        for i in 0..rank {
            let mut s = c[i];
            for l in 0..i {
                s = s - w[i * n + l] * xp[l];
            }
            xp[i] = s / diag[i];
        }
        for (i, (v, beta)) in reflectors.iter().enumerate().rev() {
            reflect(v, *beta, &mut xp[i..n]);
        }
    }

    let mut solution = vec![T::zero(); n];
    for (j, &p) in perm.iter().enumerate() {
        solution[p] = xp[j];
    }
    if solution.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("least-squares solution".into()));
    }
    Ok(LeastSquares { solution, rank })
}

fn col_norm<T: Scalar>(v: &[T]) -> T {
    // Scaled to avoid overflow on large entries.
    let scale = v.iter().fold(T::zero(), |m, &x| m.max(x.abs()));
    if scale == T::zero() {
        return T::zero();
    }
    let s: T = v.iter().map(|&x| (x / scale) * (x / scale)).sum();
    scale * s.sqrt()
}

/// `y ← (I − β v vᵀ) y`.
fn reflect<T: Scalar>(v: &[T], beta: T, y: &mut [T]) {
    let dot: T = v.iter().zip(y.iter()).map(|(&a, &b)| a * b).sum();
    let f = beta * dot;
    for (yi, &vi) in y.iter_mut().zip(v) {
        *yi = *yi - f * vi;
    }
}
