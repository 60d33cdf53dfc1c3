//! Strongly convex quadratic family with closed-form ground truth.
//!
//! `G_i(x; φ) = M_i x + φ`, `φ ~ N(0, σ_φ² I)` and
//! `F_i(z; ζ) = ½ zᵀ Q_i z + ζᵀ z`, `ζ ~ N(c_i, σ_ζ² I)`, so
//! `h(x) = (1/n) Σ_i ½ (M_i x)ᵀ Q_i (M_i x) + c_iᵀ M_i x`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{check_nonneg, check_positive, Capabilities, NormalityData, Problem};
use crate::error::{config_err, Error, Result};
use crate::linalg::{random_orthogonal, standard_normal_matrix, standard_normal_vector};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticParams {
    pub agents: usize,
    pub dim: usize,
    /// Inner dimension `p`; defaults to `dim`.
    pub inner_dim: Option<usize>,
    pub seed: u64,
    pub noise_inner: f64,
    pub noise_outer: f64,
    /// Upper bound on the condition number of each `Q_i`.
    pub conditioning: f64,
}

impl Default for QuadraticParams {
    fn default() -> Self {
        Self { agents: 3, dim: 2, inner_dim: None, seed: 0, noise_inner: 0.0, noise_outer: 0.0, conditioning: 4.0 }
    }
}

#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    m: Vec<DMatrix<f64>>,
    q: Vec<DMatrix<f64>>,
    c: Vec<DVector<f64>>,
    sigma_phi: f64,
    sigma_zeta: f64,
    x_star: DVector<f64>,
    /// `Σ_j M_jᵀ c_j`
    linear: DVector<f64>,
    normality: NormalityData,
}

pub fn make_quadratic(params: &QuadraticParams) -> Result<QuadraticProblem> {
    check_positive("agents", params.agents)?;
    check_positive("dim", params.dim)?;
    let p = params.inner_dim.unwrap_or(params.dim);
    check_positive("inner_dim", p)?;
    check_nonneg("noise_inner", params.noise_inner)?;
    check_nonneg("noise_outer", params.noise_outer)?;
    if !(params.conditioning >= 1.0 && params.conditioning.is_finite()) {
        return config_err(format!("conditioning must be >= 1, got {}", params.conditioning));
    }
    let d = params.dim;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut ms = Vec::new();
    let mut qs = Vec::new();
    let mut cs = Vec::new();
    let log_kappa = params.conditioning.ln();
    for _ in 0..params.agents {
        let m = DMatrix::identity(p, d) + standard_normal_matrix(p, d, &mut rng) * (0.5 / (d as f64).sqrt());
        let u = random_orthogonal(p, &mut rng);
        let spectrum = DVector::from_fn(p, |k, _| {
            // extremes pinned so every Q_i has condition number exactly κ
            let t = match k {
                0 => 0.0,
                k if k + 1 == p => 1.0,
                _ => rng.random::<f64>(),
            };
            (t * log_kappa).exp()
        });
        let q = &u * DMatrix::from_diagonal(&spectrum) * u.transpose();
        let q = (&q + q.transpose()) * 0.5;
        ms.push(m);
        qs.push(q);
        cs.push(standard_normal_vector(p, &mut rng));
    }
    QuadraticProblem::from_parts(ms, qs, cs, params.noise_inner, params.noise_outer)
}

impl QuadraticProblem {
    /// Build from explicit `M_i` (`p_i × d`), symmetric positive definite
    /// `Q_i` and linear terms `c_i`.
    pub fn from_parts(
        m: Vec<DMatrix<f64>>,
        q: Vec<DMatrix<f64>>,
        c: Vec<DVector<f64>>,
        sigma_phi: f64,
        sigma_zeta: f64,
    ) -> Result<Self> {
        let n = m.len();
        if n == 0 || q.len() != n || c.len() != n {
            return config_err("quadratic parts must be non-empty and of equal length");
        }
        check_nonneg("noise_inner", sigma_phi)?;
        check_nonneg("noise_outer", sigma_zeta)?;
        let d = m[0].ncols();
        for i in 0..n {
            let p = m[i].nrows();
            if m[i].ncols() != d || q[i].shape() != (p, p) || c[i].len() != p {
                return config_err(format!("agent {i}: inconsistent quadratic dimensions"));
            }
        }
        let mut h = DMatrix::zeros(d, d);
        let mut linear = DVector::zeros(d);
        let mut s1 = DMatrix::zeros(d, d);
        let mut s2 = DMatrix::zeros(d, d);
        let mut jac = Vec::with_capacity(n);
        for i in 0..n {
            let mt = m[i].transpose();
            h += &mt * &q[i] * &m[i];
            linear += &mt * &c[i];
            s1 += &mt * &m[i];
            s2 += &mt * &q[i] * q[i].transpose() * &m[i];
            jac.push(mt);
        }
        s1 *= sigma_zeta * sigma_zeta;
        s2 *= sigma_phi * sigma_phi;
        let chol = h.clone().cholesky().ok_or_else(|| Error::Config("quadratic Hessian is not positive definite".into()))?;
        let x_star = -chol.solve(&linear);
        let normality = NormalityData { h, t: q.clone(), inner_jacobian: jac, s1, s2 };
        Ok(Self { m, q, c, sigma_phi, sigma_zeta, x_star, linear, normality })
    }

    /// `M_i = Q_i = I_d`, `c_i = 0`: `h(x) = ½‖x‖²`.
    pub fn identity(agents: usize, dim: usize, sigma_phi: f64, sigma_zeta: f64) -> Result<Self> {
        check_positive("agents", agents)?;
        check_positive("dim", dim)?;
        let eye = DMatrix::identity(dim, dim);
        Self::from_parts(
            vec![eye.clone(); agents],
            vec![eye; agents],
            vec![DVector::zeros(dim); agents],
            sigma_phi,
            sigma_zeta,
        )
    }

    pub fn inner_map(&self, agent: usize) -> &DMatrix<f64> {
        &self.m[agent]
    }

    pub fn outer_curvature(&self, agent: usize) -> &DMatrix<f64> {
        &self.q[agent]
    }

    pub fn outer_linear(&self, agent: usize) -> &DVector<f64> {
        &self.c[agent]
    }

    /// `∇f_i(z) = Q_i z + c_i`.
    pub fn outer_grad(&self, agent: usize, z: &DVector<f64>) -> DVector<f64> {
        &self.q[agent] * z + &self.c[agent]
    }

    /// `max_i ‖M_i‖² ‖Q_i‖`, the constant `C_g² L_f` of this family
    /// (`L_g = 0`).
    pub fn smoothness(&self) -> f64 {
        self.m
            .iter()
            .zip(&self.q)
            .map(|(m, q)| {
                let sm = m.clone().singular_values().max();
                sm * sm * q.clone().singular_values().max()
            })
            .fold(0.0, f64::max)
    }

    /// Strong-convexity modulus of `h`, `λ_min(H)/n`.
    pub fn strong_convexity(&self) -> f64 {
        crate::linalg::min_symmetric_eigenvalue(&self.normality.h) / self.agents() as f64
    }

    /// `H = Σ_j M_jᵀ Q_j M_j`.
    pub fn hessian_sum(&self) -> &DMatrix<f64> {
        &self.normality.h
    }
}

impl Problem for QuadraticProblem {
    type Inner = DVector<f64>;
    type Outer = DVector<f64>;

    fn family(&self) -> &'static str {
        "quadratic"
    }

    fn agents(&self) -> usize {
        self.m.len()
    }

    fn dim(&self) -> usize {
        self.x_star.len()
    }

    fn inner_dim(&self, agent: usize) -> usize {
        self.m[agent].nrows()
    }

    fn draw_inner(&self, agent: usize, rng: &mut dyn RngCore) -> DVector<f64> {
        let p = self.inner_dim(agent);
        DVector::from_fn(p, |_, _| self.sigma_phi * rng.sample::<f64, _>(StandardNormal))
    }

    fn draw_outer(&self, agent: usize, rng: &mut dyn RngCore) -> DVector<f64> {
        let c = &self.c[agent];
        DVector::from_fn(c.len(), |k, _| c[k] + self.sigma_zeta * rng.sample::<f64, _>(StandardNormal))
    }

    fn inner_value(&self, agent: usize, x: &DVector<f64>, phi: &DVector<f64>) -> DVector<f64> {
        &self.m[agent] * x + phi
    }

    fn gradient_product(
        &self,
        agent: usize,
        _x: &DVector<f64>,
        z: &DVector<f64>,
        _phi: &DVector<f64>,
        zeta: &DVector<f64>,
    ) -> DVector<f64> {
        self.m[agent].tr_mul(&(&self.q[agent] * z + zeta))
    }

    fn capabilities(&self) -> Capabilities {
        Capabilities { true_g: true, true_grad: true, optimum: true, normality: true }
    }

    fn true_inner(&self, agent: usize, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some(&self.m[agent] * x)
    }

    fn true_grad(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        Some((&self.normality.h * x + &self.linear) / self.agents() as f64)
    }

    fn objective(&self, x: &DVector<f64>) -> Option<f64> {
        let mut total = 0.0;
        for i in 0..self.agents() {
            let g = &self.m[i] * x;
            total += 0.5 * g.dot(&(&self.q[i] * &g)) + self.c[i].dot(&g);
        }
        Some(total / self.agents() as f64)
    }

    fn optimum(&self) -> Option<&DVector<f64>> {
        Some(&self.x_star)
    }

    fn normality_data(&self) -> Option<&NormalityData> {
        Some(&self.normality)
    }
}
