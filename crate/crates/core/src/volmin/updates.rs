use crate::error::{Error, Result};
use crate::numerics::{project_simplex_columns, solve_monotone_cubic, thin_svd, RealMatrix, RealVector};

/// Smoothed identity: `x` for `|x| ≥ ε`, `x²/(2ε) + ε/2` inside.
pub fn g_eps(x: f64, eps: f64) -> f64 {
    if x.abs() >= eps {
        x
    } else {
        x * x / (2.0 * eps) + eps / 2.0
    }
}

pub fn g_eps_derivative(x: f64, eps: f64) -> f64 {
    if x.abs() >= eps {
        1.0
    } else {
        x / eps
    }
}

/// `f_ε(XᵀX) = Σ log g_ε(σ_i(X)²)`.
pub fn f_eps(x: &RealMatrix, eps: f64) -> Result<f64> {
    let svd = thin_svd(x)?;
    Ok(svd.sigma.iter().map(|s| g_eps(s * s, eps).ln()).sum())
}

/// Gradient of [`f_eps`]: `U·diag(2σ g'(σ²)/g(σ²))·Vᵀ`.
pub fn f_eps_gradient(x: &RealMatrix, eps: f64) -> Result<RealMatrix> {
    let svd = thin_svd(x)?;
    let d = svd.sigma.map(|s| 2.0 * s * g_eps_derivative(s * s, eps) / g_eps(s * s, eps));
    Ok(&svd.u * RealMatrix::from_diagonal(&d) * svd.v.transpose())
}

/// Variables and multipliers of the split problem
/// `min f_ε(XᵀX)` s.t. `A = YS`, `X = Y`, columns of `S` on the simplex.
#[derive(Debug, Clone, PartialEq)]
pub struct VolMinIterate {
    pub x: RealMatrix,
    pub s: RealMatrix,
    pub y: RealMatrix,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolMinDuals {
    pub p: RealMatrix,
    pub q: RealMatrix,
}

impl VolMinDuals {
    pub fn zeros(n: usize, k: usize, l: usize) -> Self {
        Self { p: RealMatrix::zeros(n, l), q: RealMatrix::zeros(n, k) }
    }

    /// Stacked layout: `P` column-major, then `Q` column-major.
    pub fn to_vector(&self) -> RealVector {
        RealVector::from_iterator(self.p.len() + self.q.len(), self.p.iter().chain(self.q.iter()).copied())
    }

    pub fn from_vector(v: &RealVector, n: usize, k: usize, l: usize) -> Self {
        let s = v.as_slice();
        Self {
            p: RealMatrix::from_column_slice(n, l, &s[..n * l]),
            q: RealMatrix::from_column_slice(n, k, &s[n * l..n * l + n * k]),
        }
    }
}

/// `Y = ((A + ρP)Sᵀ + X + ρQ)(I + SSᵀ)⁻¹`.
pub fn update_y(a: &RealMatrix, z: &VolMinIterate, duals: &VolMinDuals, rho: f64) -> Result<RealMatrix> {
    let k = z.s.nrows();
    let gram = RealMatrix::identity(k, k) + &z.s * z.s.transpose();
    let rhs = (a + &duals.p * rho) * z.s.transpose() + &z.x + &duals.q * rho;
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::numerical("Y update: I + SSᵀ is not positive definite", f64::NAN))?;
    // Y·G = R  ⇔  G·Yᵀ = Rᵀ for symmetric G.
    Ok(chol.solve(&rhs.transpose()).transpose())
}

/// Default majorization constant `β = 1.01·σ₁(Y)² + 10⁻¹²`.
pub fn default_beta(y: &RealMatrix) -> Result<f64> {
    let s1 = thin_svd(y)?.sigma.max();
    Ok(1.01 * s1 * s1 + 1e-12)
}

/// One majorize-minimize step on `½‖A + ρP − YS‖²` over simplex columns:
/// `S̄ = (1/β)(Yᵀ(A + ρP) + (βI − YᵀY)S̃)`, projected column-wise.
pub fn update_s(a: &RealMatrix, z: &VolMinIterate, duals: &VolMinDuals, rho: f64, beta: f64) -> Result<RealMatrix> {
    let k = z.s.nrows();
    let yt = z.y.transpose();
    let target = a + &duals.p * rho;
    let sbar = (&yt * target + (RealMatrix::identity(k, k) * beta - &yt * &z.y) * &z.s) / beta;
    project_simplex_columns(&sbar)
}

/// Value of the per-singular-value surrogate `g_ε(σ²)/g̃ + (σ − σ̄)²/(2ρ)`.
pub fn sigma_objective(sigma: f64, sigma_bar: f64, g_tilde: f64, rho: f64, eps: f64) -> f64 {
    g_eps(sigma * sigma, eps) / g_tilde + (sigma - sigma_bar).powi(2) / (2.0 * rho)
}

/// Minimiser over `σ ≥ 0` of [`sigma_objective`]: the better of the
/// quadratic branch (`σ ≥ √ε`) and the quartic branch (`σ ≤ √ε`, a
/// monotone cubic stationarity condition). Ties go to the smaller `σ`.
pub fn solve_sigma(sigma_bar: f64, g_tilde: f64, rho: f64, eps: f64) -> Result<f64> {
    let root = eps.sqrt();
    let s1 = (g_tilde * sigma_bar / (2.0 * rho + g_tilde)).max(root);
    let s2 = solve_monotone_cubic(2.0 / (eps * g_tilde), 1.0 / rho, sigma_bar.max(0.0) / rho)?.min(root);
    let v1 = sigma_objective(s1, sigma_bar, g_tilde, rho, eps);
    let v2 = sigma_objective(s2, sigma_bar, g_tilde, rho, eps);
    Ok(if v2 <= v1 { s2 } else { s1 })
}

/// `X` update: singular vectors of `X̄ = Y − ρQ`, singular values from
/// [`solve_sigma`] with `g̃_i = g_ε(σ_i(X̃)²)` taken from the previous `X`.
pub fn update_x(z: &VolMinIterate, duals: &VolMinDuals, rho: f64, eps: f64) -> Result<RealMatrix> {
    let prev = thin_svd(&z.x)?.sigma;
    let xbar = &z.y - &duals.q * rho;
    let svd = thin_svd(&xbar)?;
    let mut sigma = RealVector::zeros(svd.sigma.len());
    for i in 0..sigma.len() {
        let g_tilde = g_eps(prev[i] * prev[i], eps);
        sigma[i] = solve_sigma(svd.sigma[i], g_tilde, rho, eps)?;
    }
    Ok(&svd.u * RealMatrix::from_diagonal(&sigma) * svd.v.transpose())
}
