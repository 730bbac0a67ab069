//! Energy and constraint models behind two behavioral contracts.
//!
//! Every model works on plain interior-value slices; the discrete Hilbert
//! structure is carried by [`Space`], a uniform quadrature weight: grid models
//! use the mesh width `h`, sequence-space models use weight one (Euclidean).
//!
//! Gradients are exact gradients of the *discrete* energies (the discrete
//! functional is differentiated, not the continuum formula sampled), so the
//! finite-difference identities in [`gradient_checks`] hold to quadrature
//! rounding and the flow decreases the discrete energy monotonically.

mod grid_models;
mod seq_models;

pub use grid_models::{
    allen_cahn_model, graph_area_model, integral_constraint, mass_constraint, revolution_model,
    revolution_volume_constraint, AllenCahnModel, GraphAreaModel, IntegralConstraint, NamedScalar,
    RevolutionModel, RevolutionVolumeConstraint, ScalarFunction,
};
pub use seq_models::{
    constraint_hessian_example, lambda_profile, CoordinateEnergy, FreeConstraint,
    GraphExampleConstraint, GraphExampleEnergy, LambdaRule, MonomialModel, SeqQuadModel,
    SphereConstraint,
};

use crate::error::{Error, Result};
use crate::numerics::Grid1D;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Uniform-weight discrete Hilbert space: `<u, v> = weight * sum_i u_i v_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Space {
    pub dim: usize,
    pub weight: f64,
}

impl Space {
    pub fn euclidean(dim: usize) -> Self {
        Self { dim, weight: 1.0 }
    }

    pub fn of_grid(grid: &Grid1D) -> Self {
        Self {
            dim: grid.n(),
            weight: grid.h(),
        }
    }

    pub fn inner(&self, u: &[f64], v: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.dim);
        debug_assert_eq!(v.len(), self.dim);
        self.weight * u.iter().zip(v).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn norm(&self, u: &[f64]) -> f64 {
        self.inner(u, u).sqrt()
    }
}

pub(crate) fn expect_dim(space: Space, u: &[f64], what: &str) -> Result<()> {
    if u.len() != space.dim {
        return Err(Error::Contract(format!(
            "{what}: expected length {}, got {}",
            space.dim,
            u.len()
        )));
    }
    Ok(())
}

/// Behavioral contract for a constrained energy.
pub trait EnergyModel: Send + Sync {
    fn space(&self) -> Space;

    fn energy(&self, u: &[f64]) -> Result<f64>;

    /// Gradient of the discrete energy with respect to the [`Space`] inner
    /// product: `energy'(u) v = <h_gradient(u), v>`.
    fn h_gradient(&self, u: &[f64]) -> Result<Vec<f64>>;

    /// Second derivative applied to a direction; linear and symmetric with
    /// respect to the inner product.
    fn hessian_apply(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>>;

    /// Membership in the open set on which the model is defined.
    fn admissible(&self, _u: &[f64]) -> bool {
        true
    }

    /// Scale of a stable explicit Euler step (`h^2 / amax` for grid models);
    /// the flow uses `dt = min(dt_max, cfl * stable_step)`.
    fn stable_step(&self, _u: &[f64]) -> f64 {
        1.0
    }
}

/// Behavioral contract for an `R^m`-valued constraint; `m = 0` encodes an
/// unconstrained problem.
pub trait ConstraintModel: Send + Sync {
    fn space(&self) -> Space;

    /// Number of scalar constraints `m`.
    fn count(&self) -> usize;

    fn value(&self, u: &[f64]) -> Result<Vec<f64>>;

    /// One gradient per component, exact for the discrete value.
    fn h_gradients(&self, u: &[f64]) -> Result<Vec<Vec<f64>>>;

    fn hessian_apply(&self, u: &[f64], k: usize, v: &[f64]) -> Result<Vec<f64>>;

    /// Magnitude of the constraint target; residual tolerances are relative
    /// to `1 + natural_scale()`.
    fn natural_scale(&self) -> f64 {
        1.0
    }
}

/// Outcome of the randomized derivative checks for one model.
#[derive(Debug, Clone)]
pub struct GradientCheckReport {
    pub trials: usize,
    pub max_gradient_err: f64,
    pub gradient_tol: f64,
    pub max_hessian_asym: f64,
    pub hessian_sym_tol: f64,
    pub max_hessian_fd_err: f64,
    pub hessian_fd_tol: f64,
}

impl GradientCheckReport {
    pub fn pass(&self) -> bool {
        self.max_gradient_err <= self.gradient_tol
            && self.max_hessian_asym <= self.hessian_sym_tol
            && self.max_hessian_fd_err <= self.hessian_fd_tol
    }
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize, amplitude: f64) -> Vec<f64> {
    (0..dim)
        .map(|_| rng.random_range(-amplitude..amplitude))
        .collect()
}

const FD_EPS: f64 = 1e-5;

/// Central-difference verification of `h_gradient` and `hessian_apply` on
/// random admissible states:
///
/// * `|<g(u), v> - (E(u+ev) - E(u-ev)) / 2e| <= 1e-6 (1 + |E(u)|)`,
/// * `|<Hv, w> - <v, Hw>| <= 1e-9 (1 + |Hv||w|)`,
/// * `|Hv - (g(u+ev) - g(u-ev)) / 2e| <= 1e-5 (1 + |Hv|)`.
pub fn gradient_checks(
    model: &dyn EnergyModel,
    trials: usize,
    seed: u64,
    amplitude: f64,
) -> Result<GradientCheckReport> {
    let space = model.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradientCheckReport {
        trials,
        max_gradient_err: 0.0,
        gradient_tol: 1e-6,
        max_hessian_asym: 0.0,
        hessian_sym_tol: 1e-9,
        max_hessian_fd_err: 0.0,
        hessian_fd_tol: 1e-5,
    };
    for _ in 0..trials {
        let mut u = random_state(&mut rng, space.dim, amplitude);
        let mut guard = 0;
        while !model.admissible(&u) {
            u = random_state(&mut rng, space.dim, amplitude);
            guard += 1;
            if guard > 100 {
                return Err(Error::Contract(
                    "gradient_checks: could not sample an admissible state".into(),
                ));
            }
        }
        let v = random_state(&mut rng, space.dim, amplitude);
        let w = random_state(&mut rng, space.dim, amplitude);

        let e0 = model.energy(&u)?;
        let g = model.h_gradient(&u)?;
        let plus: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + FD_EPS * b).collect();
        let minus: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - FD_EPS * b).collect();
        let fd = (model.energy(&plus)? - model.energy(&minus)?) / (2.0 * FD_EPS);
        let err = (space.inner(&g, &v) - fd).abs() / (1.0 + e0.abs());
        report.max_gradient_err = report.max_gradient_err.max(err);

        let hv = model.hessian_apply(&u, &v)?;
        let hw = model.hessian_apply(&u, &w)?;
        let asym = (space.inner(&hv, &w) - space.inner(&v, &hw)).abs()
            / (1.0 + space.norm(&hv) * space.norm(&w));
        report.max_hessian_asym = report.max_hessian_asym.max(asym);

        let gp = model.h_gradient(&plus)?;
        let gm = model.h_gradient(&minus)?;
        let mut fd_err = 0.0_f64;
        for i in 0..space.dim {
            fd_err = fd_err.max((hv[i] - (gp[i] - gm[i]) / (2.0 * FD_EPS)).abs());
        }
        let hv_scale = hv.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
        report.max_hessian_fd_err = report.max_hessian_fd_err.max(fd_err / (1.0 + hv_scale));
    }
    Ok(report)
}

/// Same checks for every component of a constraint model.
pub fn constraint_gradient_checks(
    model: &dyn ConstraintModel,
    trials: usize,
    seed: u64,
    amplitude: f64,
) -> Result<GradientCheckReport> {
    let space = model.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = GradientCheckReport {
        trials,
        max_gradient_err: 0.0,
        gradient_tol: 1e-6,
        max_hessian_asym: 0.0,
        hessian_sym_tol: 1e-9,
        max_hessian_fd_err: 0.0,
        hessian_fd_tol: 1e-5,
    };
    for _ in 0..trials {
        let u = random_state(&mut rng, space.dim, amplitude);
        let v = random_state(&mut rng, space.dim, amplitude);
        let w = random_state(&mut rng, space.dim, amplitude);
        let plus: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + FD_EPS * b).collect();
        let minus: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a - FD_EPS * b).collect();
        let g0 = model.value(&u)?;
        let gp = model.value(&plus)?;
        let gm = model.value(&minus)?;
        let grads = model.h_gradients(&u)?;
        for k in 0..model.count() {
            let fd = (gp[k] - gm[k]) / (2.0 * FD_EPS);
            let err = (space.inner(&grads[k], &v) - fd).abs() / (1.0 + g0[k].abs());
            report.max_gradient_err = report.max_gradient_err.max(err);

            let hv = model.hessian_apply(&u, k, &v)?;
            let hw = model.hessian_apply(&u, k, &w)?;
            let asym = (space.inner(&hv, &w) - space.inner(&v, &hw)).abs()
                / (1.0 + space.norm(&hv) * space.norm(&w));
            report.max_hessian_asym = report.max_hessian_asym.max(asym);
        }
    }
    Ok(report)
}
