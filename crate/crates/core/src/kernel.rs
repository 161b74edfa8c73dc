//! Kernel evaluation primitives and the small regularized solves used by
//! affine-projection updates.

use crate::error::{Error, Result};

/// Kernel family. Only the Gaussian kernel is implemented; the enum keeps
/// call sites stable if alternatives are added later.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelFamily {
    Gaussian,
}

/// Exponent convention for the Gaussian kernel. The two common forms differ
/// by a factor of two in the exponent, so the choice is explicit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GaussianExponent {
    /// κ(x, y) = exp(−‖x−y‖² / (2h²)) with `bandwidth` as h.
    Bandwidth,
    /// κ(x, y) = exp(−a·‖x−y‖²) with `bandwidth` as a.
    Scale,
}

/// Kernel function selector: family plus bandwidth parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelSpec {
    pub family: KernelFamily,
    pub bandwidth: f64,
    pub exponent: GaussianExponent,
}

impl KernelSpec {
    /// Gaussian kernel in the `Bandwidth` convention.
    pub fn gaussian(bandwidth: f64) -> Self {
        KernelSpec {
            family: KernelFamily::Gaussian,
            bandwidth,
            exponent: GaussianExponent::Bandwidth,
        }
    }

    pub fn with_exponent(mut self, exponent: GaussianExponent) -> Self {
        self.exponent = exponent;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !self.bandwidth.is_finite() || self.bandwidth <= 0.0 {
            return Err(Error::InvalidConfig(format!(
                "kernel bandwidth must be a positive real, got {}",
                self.bandwidth
            )));
        }
        Ok(())
    }

    /// κ(x, y) without argument checks; callers have validated lengths and spec.
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        let sq_dist: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        let exponent = match self.exponent {
            GaussianExponent::Bandwidth => -sq_dist / (2.0 * self.bandwidth * self.bandwidth),
            GaussianExponent::Scale => -self.bandwidth * sq_dist,
        };
        exponent.exp()
    }
}

/// Evaluates κ(x, y). Symmetric bit-exactly: both argument orders run the
/// same arithmetic, and (a−b)² equals (b−a)² in IEEE floats.
pub fn kernel_eval(x: &[f64], y: &[f64], spec: &KernelSpec) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            expected: x.len(),
            got: y.len(),
        });
    }
    spec.validate()?;
    Ok(spec.eval_unchecked(x, y))
}

/// Symmetric matrix of pairwise kernel evaluations over a window of stored
/// inputs. Each unordered pair is evaluated once, so symmetry is exact.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl GramMatrix {
    /// Builds a dim×dim symmetric matrix, calling `f(j, l)` once per j ≤ l.
    pub fn from_symmetric_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for j in 0..dim {
            for l in j..dim {
                let v = f(j, l);
                entries[j * dim + l] = v;
                entries[l * dim + j] = v;
            }
        }
        GramMatrix { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, j: usize, l: usize) -> f64 {
        self.entries[j * self.dim + l]
    }
}

/// Pairwise kernel matrix κ(centers[j], centers[l]).
pub fn gram<S: AsRef<[f64]>>(centers: &[S], spec: &KernelSpec) -> Result<GramMatrix> {
    if centers.is_empty() {
        return Err(Error::EmptyInput("gram requires at least one center"));
    }
    let n = centers[0].as_ref().len();
    for c in centers {
        if c.as_ref().len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: c.as_ref().len(),
            });
        }
    }
    spec.validate()?;
    Ok(GramMatrix::from_symmetric_fn(centers.len(), |j, l| {
        spec.eval_unchecked(centers[j].as_ref(), centers[l].as_ref())
    }))
}

/// Solves (G + εI)·v = rhs by Cholesky factorization with iterative
/// refinement. The systems are tiny (window size, at most ~16), so a direct
/// dense factorization keeps the residual well under the 1e−10 contract.
///
/// Fails with [`Error::SingularSystem`] when the regularized matrix is not
/// numerically positive definite; with a kernel Gram matrix this can happen
/// only at ε = 0 with duplicate centers.
pub fn regularized_solve(g: &GramMatrix, rhs: &[f64], epsilon: f64) -> Result<Vec<f64>> {
    let n = g.dim();
    if rhs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: rhs.len(),
        });
    }
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "regularizer epsilon must be nonnegative, got {epsilon}"
        )));
    }

    let mut a = vec![0.0; n * n];
    let mut max_diag: f64 = 0.0;
    for j in 0..n {
        for l in 0..n {
            a[j * n + l] = g.get(j, l);
        }
        a[j * n + j] += epsilon;
        max_diag = max_diag.max(a[j * n + j].abs());
    }

    let factor = cholesky(&a, n, max_diag)?;
    let mut v = forward_backward(&factor, n, rhs);

    // One or two refinement passes keep the residual near machine precision
    // even when the window holds nearly coincident centers.
    for _ in 0..2 {
        let r = residual(&a, n, &v, rhs);
        let max_r = r.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
        if max_r <= 1e-13 * max_diag.max(1.0) {
            break;
        }
        let dv = forward_backward(&factor, n, &r);
        for (vi, di) in v.iter_mut().zip(&dv) {
            *vi += di;
        }
    }
    Ok(v)
}

/// Lower-triangular L with A = L·Lᵀ. `scale` sets the pivot tolerance.
fn cholesky(a: &[f64], n: usize, scale: f64) -> Result<Vec<f64>> {
    let tol = (n as f64) * f64::EPSILON * scale.max(f64::MIN_POSITIVE);
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        for i in j..n {
            let mut sum = a[i * n + j];
            for k in 0..j {
                sum -= l[i * n + k] * l[j * n + k];
            }
            if i == j {
                if !sum.is_finite() || sum <= tol {
                    return Err(Error::SingularSystem(format!(
                        "pivot {j} is {sum:.3e}; the window holds duplicate centers and epsilon is too small"
                    )));
                }
                l[j * n + j] = sum.sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }
    Ok(l)
}

fn forward_backward(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = b[i];
        for k in 0..i {
            sum -= l[i * n + k] * y[k];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for k in (i + 1)..n {
            sum -= l[k * n + i] * x[k];
        }
        x[i] = sum / l[i * n + i];
    }
    x
}

fn residual(a: &[f64], n: usize, v: &[f64], rhs: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| {
            let av: f64 = (0..n).map(|k| a[i * n + k] * v[k]).sum();
            rhs[i] - av
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> KernelSpec {
        KernelSpec::gaussian(1.0)
    }

    #[test]
    fn self_similarity_is_one() {
        let x = vec![0.3, -1.2, 4.5];
        assert_eq!(kernel_eval(&x, &x, &spec()).unwrap(), 1.0);
    }

    #[test]
    fn known_distances() {
        // squared distance 2 at h = 1 → exp(−1)
        let x = vec![1.0, 0.0];
        let y = vec![0.0, 1.0];
        let k = kernel_eval(&x, &y, &spec()).unwrap();
        assert!((k - (-1.0f64).exp()).abs() < 1e-15);

        // same pair at h = √2 → exp(−0.5)
        let wide = KernelSpec::gaussian(2.0f64.sqrt());
        let k = kernel_eval(&x, &y, &wide).unwrap();
        assert!((k - (-0.5f64).exp()).abs() < 1e-15);

        // scale convention: exp(−a·d²) with a = 1 → exp(−2)
        let scaled = spec().with_exponent(GaussianExponent::Scale);
        let k = kernel_eval(&x, &y, &scaled).unwrap();
        assert!((k - (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch_rejected() {
        let e = kernel_eval(&[1.0, 2.0], &[1.0], &spec()).unwrap_err();
        assert!(matches!(e, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn nonpositive_bandwidth_rejected() {
        let bad = KernelSpec::gaussian(0.0);
        assert!(kernel_eval(&[1.0], &[1.0], &bad).is_err());
    }

    #[test]
    fn gram_single_center() {
        let g = gram(&[vec![1.0, 2.0]], &spec()).unwrap();
        assert_eq!(g.dim(), 1);
        assert_eq!(g.get(0, 0), 1.0);
    }

    #[test]
    fn gram_identical_centers() {
        let g = gram(&[vec![0.5, 0.5], vec![0.5, 0.5]], &spec()).unwrap();
        for j in 0..2 {
            for l in 0..2 {
                assert_eq!(g.get(j, l), 1.0);
            }
        }
    }

    #[test]
    fn gram_known_offdiagonal() {
        let g = gram(&[vec![1.0, 0.0], vec![0.0, 1.0]], &spec()).unwrap();
        assert_eq!(g.get(0, 0), 1.0);
        assert_eq!(g.get(1, 1), 1.0);
        assert!((g.get(0, 1) - (-1.0f64).exp()).abs() < 1e-15);
        assert_eq!(g.get(0, 1), g.get(1, 0));
    }

    #[test]
    fn gram_empty_rejected() {
        let centers: Vec<Vec<f64>> = Vec::new();
        assert!(matches!(
            gram(&centers, &spec()).unwrap_err(),
            Error::EmptyInput(_)
        ));
    }

    #[test]
    fn solve_identity_case() {
        let g = GramMatrix::from_symmetric_fn(1, |_, _| 1.0);
        let v = regularized_solve(&g, &[1.0], 0.0).unwrap();
        assert_eq!(v, vec![1.0]);
    }

    #[test]
    fn solve_diagonal_case() {
        let g = GramMatrix::from_symmetric_fn(2, |j, l| if j == l { 1.0 } else { 0.0 });
        let v = regularized_solve(&g, &[1.0, 0.0], 1.0).unwrap();
        assert!((v[0] - 0.5).abs() < 1e-15);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn solve_duplicate_centers_singular_at_zero_epsilon() {
        let g = gram(&[vec![0.1, 0.2], vec![0.1, 0.2]], &spec()).unwrap();
        assert!(matches!(
            regularized_solve(&g, &[1.0, 0.0], 0.0).unwrap_err(),
            Error::SingularSystem(_)
        ));
        // the default regularizer keeps the same system solvable
        assert!(regularized_solve(&g, &[1.0, 0.0], 1e-4).is_ok());
    }

    #[test]
    fn solve_residual_on_random_gram() {
        // Deterministic pseudo-random centers; verify by multiplying back.
        let mut state = 0x2545f4914f6cdd1du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let centers: Vec<Vec<f64>> = (0..7)
            .map(|_| (0..5).map(|_| next() * 2.0 - 1.0).collect())
            .collect();
        let g = gram(&centers, &spec()).unwrap();
        let rhs: Vec<f64> = (0..7).map(|_| next() * 2.0 - 1.0).collect();
        let v = regularized_solve(&g, &rhs, 1e-4).unwrap();
        for j in 0..7 {
            let mut acc = 1e-4 * v[j];
            for (l, &vl) in v.iter().enumerate() {
                acc += g.get(j, l) * vl;
            }
            assert!(
                (acc - rhs[j]).abs() < 1e-10,
                "residual {} at row {j}",
                acc - rhs[j]
            );
        }
    }
}
