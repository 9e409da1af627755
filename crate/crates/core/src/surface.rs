//! The two-dimensional semantic-loss surface
//!
//! ```text
//! ξ(q, s) = μ₀ + Σₖ (μ₁ₖ + μ₂ₖ·σₖ(s))·exp(μ₅ₖ·q),   σₖ(s) = 1 / (1 + exp(−μ₃ₖ·s − μ₄ₖ))
//! ```
//!
//! and the analytic SSE gradients used by batch gradient descent.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::AccuracyGrid;
use crate::model::EXP_ARG_LIMIT;

/// One sigmoid × exponential term.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Term {
    pub mu1: f64,
    pub mu2: f64,
    pub mu3: f64,
    pub mu4: f64,
    pub mu5: f64,
}

impl Term {
    pub const ZERO: Term = Term { mu1: 0.0, mu2: 0.0, mu3: 0.0, mu4: 0.0, mu5: 0.0 };

    pub fn to_array(self) -> [f64; 5] {
        [self.mu1, self.mu2, self.mu3, self.mu4, self.mu5]
    }

    pub fn from_array(a: [f64; 5]) -> Self {
        Term { mu1: a[0], mu2: a[1], mu3: a[2], mu4: a[3], mu5: a[4] }
    }

    fn sigma(&self, s: f64, k: usize) -> Result<f64> {
        let arg = -self.mu3 * s - self.mu4;
        if arg.is_nan() || arg.abs() > EXP_ARG_LIMIT {
            return Err(Error::ExponentRange { arg, term: Some(k) });
        }
        let sigma = 1.0 / (1.0 + arg.exp());
        // Rounds to exactly 1 once exp(arg) drops below half an ulp of 1.
        debug_assert!(sigma > 0.0 && sigma <= 1.0);
        Ok(sigma)
    }

    /// This term's contribution (μ₁ + μ₂·σ(s))·exp(μ₅·q); `k` labels errors.
    pub fn value(&self, q: f64, s: f64, k: usize) -> Result<f64> {
        Ok((self.mu1 + self.mu2 * self.sigma(s, k)?) * self.beta(q, k)?)
    }

    fn beta(&self, q: f64, k: usize) -> Result<f64> {
        let arg = self.mu5 * q;
        if arg.is_nan() || arg.abs() > EXP_ARG_LIMIT {
            return Err(Error::ExponentRange { arg, term: Some(k) });
        }
        let beta = arg.exp();
        debug_assert!(beta > 0.0);
        Ok(beta)
    }
}

/// μ₀ plus `N_c` terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticLossParams {
    pub mu0: f64,
    pub terms: Vec<Term>,
}

impl SemanticLossParams {
    pub fn new(mu0: f64, terms: Vec<Term>) -> Result<Self> {
        let p = SemanticLossParams { mu0, terms };
        if !p.is_finite() {
            return Err(Error::InvalidArgument("non-finite semantic-loss parameter".into()));
        }
        Ok(p)
    }

    pub fn constant(mu0: f64) -> Self {
        SemanticLossParams { mu0, terms: Vec::new() }
    }

    pub fn n_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_finite(&self) -> bool {
        self.mu0.is_finite() && self.terms.iter().all(|t| t.to_array().iter().all(|v| v.is_finite()))
    }

    /// `[μ₀, μ₁₁..μ₅₁, μ₁₂..μ₅₂, ...]`
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(1 + 5 * self.terms.len());
        out.push(self.mu0);
        for t in &self.terms {
            out.extend(t.to_array());
        }
        out
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        if flat.is_empty() || (flat.len() - 1) % 5 != 0 {
            return Err(Error::InvalidArgument(format!(
                "flat parameter vector of length {} is not 1 + 5·N_c",
                flat.len()
            )));
        }
        let terms = flat[1..]
            .chunks_exact(5)
            .map(|c| Term::from_array([c[0], c[1], c[2], c[3], c[4]]))
            .collect();
        Ok(SemanticLossParams { mu0: flat[0], terms })
    }

    /// Append a term with every coefficient zero; the surface is unchanged.
    pub fn padded_with_zero_term(&self) -> Self {
        let mut p = self.clone();
        p.terms.push(Term::ZERO);
        p
    }
}

/// Per-term intermediates and the residual at one grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientTerms {
    pub sigma: Vec<f64>,
    pub beta: Vec<f64>,
    pub residual: f64,
}

pub fn gradient_terms(params: &SemanticLossParams, q: f64, s: f64, measured: f64) -> Result<GradientTerms> {
    let mut sigma = Vec::with_capacity(params.n_terms());
    let mut beta = Vec::with_capacity(params.n_terms());
    let mut xi = params.mu0;
    for (k, t) in params.terms.iter().enumerate() {
        let sg = t.sigma(s, k)?;
        let b = t.beta(q, k)?;
        xi += (t.mu1 + t.mu2 * sg) * b;
        sigma.push(sg);
        beta.push(b);
    }
    Ok(GradientTerms { sigma, beta, residual: measured - xi })
}

pub fn eval_semantic_loss(params: &SemanticLossParams, q: f64, s: f64) -> Result<f64> {
    if !q.is_finite() || !s.is_finite() {
        return Err(Error::InvalidArgument(format!("non-finite input (q={q}, s={s})")));
    }
    let mut xi = params.mu0;
    for (k, t) in params.terms.iter().enumerate() {
        xi += (t.mu1 + t.mu2 * t.sigma(s, k)?) * t.beta(q, k)?;
    }
    Ok(xi)
}

/// Fitting target in the units fed to the model. q is divided by
/// `q_divisor` before evaluation; values are s-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceData {
    q: Vec<f64>,
    s: Vec<f64>,
    y: Vec<f64>,
}

impl SurfaceData {
    pub fn from_grid(grid: &AccuracyGrid, q_divisor: f64) -> Self {
        SurfaceData {
            q: grid.q_axis().iter().map(|q| q / q_divisor).collect(),
            s: grid.s_axis().to_vec(),
            y: grid.flat_values(),
        }
    }

    pub fn new(q: Vec<f64>, s: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if y.len() != q.len() * s.len() {
            return Err(Error::LengthMismatch(y.len(), q.len() * s.len()));
        }
        Ok(SurfaceData { q, s, y })
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn s(&self) -> &[f64] {
        &self.s
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.y.iter().sum::<f64>() / self.y.len() as f64
    }

    pub fn std_dev(&self) -> f64 {
        let m = self.mean();
        (self.y.iter().map(|v| (v - m).powi(2)).sum::<f64>() / self.y.len() as f64).sqrt()
    }
}

/// ξ over a whole grid with the separable factors kept for gradient use.
/// `sigma[k][i]` is term k at s index i, `beta[k][j]` term k at q index j.
#[derive(Debug, Clone)]
pub struct SurfaceEval {
    pub xi: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    pub beta: Vec<Vec<f64>>,
}

impl SurfaceEval {
    pub fn sse(&self, data: &SurfaceData) -> f64 {
        data.y.iter().zip(&self.xi).map(|(y, f)| (y - f).powi(2)).sum()
    }

    pub fn residuals(&self, data: &SurfaceData) -> Vec<f64> {
        data.y.iter().zip(&self.xi).map(|(y, f)| y - f).collect()
    }
}

pub fn eval_surface(params: &SemanticLossParams, data: &SurfaceData) -> Result<SurfaceEval> {
    let nq = data.q.len();
    let mut sigma = Vec::with_capacity(params.n_terms());
    let mut beta = Vec::with_capacity(params.n_terms());
    for (k, t) in params.terms.iter().enumerate() {
        sigma.push(data.s.iter().map(|&s| t.sigma(s, k)).collect::<Result<Vec<_>>>()?);
        beta.push(data.q.iter().map(|&q| t.beta(q, k)).collect::<Result<Vec<_>>>()?);
    }
    let mut xi = vec![params.mu0; data.y.len()];
    for (k, t) in params.terms.iter().enumerate() {
        for i in 0..data.s.len() {
            let amp = t.mu1 + t.mu2 * sigma[k][i];
            let row = &mut xi[i * nq..(i + 1) * nq];
            for (x, b) in row.iter_mut().zip(&beta[k]) {
                *x += amp * b;
            }
        }
    }
    Ok(SurfaceEval { xi, sigma, beta })
}

pub fn surface_sse(params: &SemanticLossParams, data: &SurfaceData) -> Result<f64> {
    Ok(eval_surface(params, data)?.sse(data))
}

/// ∂SSE/∂μ, same shape as [`SemanticLossParams`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemanticLossGradient {
    pub mu0: f64,
    pub terms: Vec<[f64; 5]>,
}

impl SemanticLossGradient {
    pub fn zeros(n_terms: usize) -> Self {
        SemanticLossGradient { mu0: 0.0, terms: vec![[0.0; 5]; n_terms] }
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = vec![self.mu0];
        for t in &self.terms {
            out.extend_from_slice(t);
        }
        out
    }

    pub fn from_flat(flat: &[f64]) -> Result<Self> {
        let p = SemanticLossParams::from_flat(flat)?;
        Ok(SemanticLossGradient {
            mu0: p.mu0,
            terms: p.terms.into_iter().map(Term::to_array).collect(),
        })
    }

    pub fn add_assign(&mut self, other: &SemanticLossGradient) {
        self.mu0 += other.mu0;
        for (a, b) in self.terms.iter_mut().zip(&other.terms) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

/// Accumulate the SSE gradient over every grid point, given an already
/// evaluated surface.
pub fn accumulate_gradients(
    params: &SemanticLossParams,
    data: &SurfaceData,
    eval: &SurfaceEval,
) -> SemanticLossGradient {
    let nq = data.q.len();
    let mut grad = SemanticLossGradient::zeros(params.n_terms());
    for (i, &s) in data.s.iter().enumerate() {
        for (j, &q) in data.q.iter().enumerate() {
            let eps = data.y[i * nq + j] - eval.xi[i * nq + j];
            for (k, t) in params.terms.iter().enumerate() {
                let sigma = eval.sigma[k][i];
                let beta = eval.beta[k][j];
                let g = &mut grad.terms[k];
                let dsig = t.mu2 * sigma * (1.0 - sigma);
                g[0] -= 2.0 * eps * beta;
                g[1] -= 2.0 * eps * beta * sigma;
                g[2] -= 2.0 * eps * beta * dsig * s;
                g[3] -= 2.0 * eps * beta * dsig;
                g[4] -= 2.0 * eps * beta * q * (t.mu1 + t.mu2 * sigma);
            }
            grad.mu0 -= 2.0 * eps;
        }
    }
    grad
}

/// Analytic ∂SSE/∂μ over `grid` with q in raw units.
pub fn semantic_loss_gradients(params: &SemanticLossParams, grid: &AccuracyGrid) -> Result<SemanticLossGradient> {
    let data = SurfaceData::from_grid(grid, 1.0);
    let eval = eval_surface(params, &data)?;
    Ok(accumulate_gradients(params, &data, &eval))
}
