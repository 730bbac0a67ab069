use std::f64::consts::PI;

use super::{expect_dim, ConstraintModel, EnergyModel, Space};
use crate::error::{Error, Result};
use crate::numerics::{d2_slice, Grid1D};

/// Edge slopes `p_i = (u_{i+1} - u_i)/h` and edge midpoint values
/// `m_i = (u_i + u_{i+1})/2` for the `n + 1` cells of the closed grid, with
/// the zero Dirichlet values at both ends.
fn edge_quantities(h: f64, u: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = u.len();
    let at = |i: usize| -> f64 {
        if i == 0 || i > n {
            0.0
        } else {
            u[i - 1]
        }
    };
    let mut p = Vec::with_capacity(n + 1);
    let mut m = Vec::with_capacity(n + 1);
    for i in 0..=n {
        p.push((at(i + 1) - at(i)) / h);
        m.push(0.5 * (at(i) + at(i + 1)));
    }
    (p, m)
}

/// Divided difference of an edge array back onto the nodes:
/// `out_j = (w_j - w_{j-1}) / h` for `j = 1..=n` (edge index `j` sits to the
/// right of node `j`).
fn edge_divergence(h: f64, w: &[f64]) -> Vec<f64> {
    (1..w.len()).map(|j| (w[j] - w[j - 1]) / h).collect()
}

/// Node average of an edge array: `out_j = (w_{j-1} + w_j)/2`.
fn edge_average(w: &[f64]) -> Vec<f64> {
    (1..w.len()).map(|j| 0.5 * (w[j - 1] + w[j])).collect()
}

/// Graph-surface area of a zero-trace function: `E(u) = int sqrt(1 + (u')^2)`,
/// discretized over the closed cells with exact edge slopes.
#[derive(Debug, Clone, Copy)]
pub struct GraphAreaModel {
    grid: Grid1D,
}

pub fn graph_area_model(grid: Grid1D) -> GraphAreaModel {
    GraphAreaModel { grid }
}

impl GraphAreaModel {
    pub fn grid(&self) -> Grid1D {
        self.grid
    }
}

impl EnergyModel for GraphAreaModel {
    fn space(&self) -> Space {
        Space::of_grid(&self.grid)
    }

    fn energy(&self, u: &[f64]) -> Result<f64> {
        expect_dim(self.space(), u, "graph_area energy")?;
        let h = self.grid.h();
        let (p, _) = edge_quantities(h, u);
        Ok(h * p.iter().map(|pi| (1.0 + pi * pi).sqrt()).sum::<f64>())
    }

    fn h_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "graph_area gradient")?;
        let h = self.grid.h();
        let (p, _) = edge_quantities(h, u);
        let w: Vec<f64> = p.iter().map(|pi| pi / (1.0 + pi * pi).sqrt()).collect();
        Ok(edge_divergence(h, &w).iter().map(|x| -x).collect())
    }

    fn hessian_apply(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "graph_area hessian")?;
        expect_dim(self.space(), v, "graph_area hessian direction")?;
        let h = self.grid.h();
        let (p, _) = edge_quantities(h, u);
        let (dp, _) = edge_quantities(h, v);
        let dw: Vec<f64> = p
            .iter()
            .zip(&dp)
            .map(|(pi, dpi)| dpi / (1.0 + pi * pi).powf(1.5))
            .collect();
        Ok(edge_divergence(h, &dw).iter().map(|x| -x).collect())
    }

    fn stable_step(&self, _u: &[f64]) -> f64 {
        // Diffusion coefficient (1 + p^2)^{-3/2} <= 1.
        self.grid.h() * self.grid.h()
    }
}

const DOUBLE_WELL_AT_ZERO: f64 = 0.25;

fn double_well(s: f64) -> f64 {
    0.25 * (1.0 - s * s) * (1.0 - s * s)
}

fn double_well_d1(s: f64) -> f64 {
    s * s * s - s
}

fn double_well_d2(s: f64) -> f64 {
    3.0 * s * s - 1.0
}

/// Ginzburg-Landau free energy `E(u) = int (|u'|^2 / 2 + W(u))` with the
/// double-well potential `W(s) = (1 - s^2)^2 / 4` (diffusion scale fixed to
/// one). Edge quadrature for the Dirichlet part, closed trapezoid for `W`, so
/// the exact discrete gradient is `-d2(u) + W'(u)`.
#[derive(Debug, Clone, Copy)]
pub struct AllenCahnModel {
    grid: Grid1D,
}

pub fn allen_cahn_model(grid: Grid1D) -> AllenCahnModel {
    AllenCahnModel { grid }
}

impl AllenCahnModel {
    pub fn grid(&self) -> Grid1D {
        self.grid
    }
}

impl EnergyModel for AllenCahnModel {
    fn space(&self) -> Space {
        Space::of_grid(&self.grid)
    }

    fn energy(&self, u: &[f64]) -> Result<f64> {
        expect_dim(self.space(), u, "allen_cahn energy")?;
        let h = self.grid.h();
        let (p, _) = edge_quantities(h, u);
        let dirichlet = 0.5 * h * p.iter().map(|pi| pi * pi).sum::<f64>();
        let well = h * (u.iter().map(|&s| double_well(s)).sum::<f64>() + DOUBLE_WELL_AT_ZERO);
        Ok(dirichlet + well)
    }

    fn h_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "allen_cahn gradient")?;
        let h = self.grid.h();
        let lap = d2_slice(h, u);
        Ok(u.iter()
            .zip(&lap)
            .map(|(&s, &l)| -l + double_well_d1(s))
            .collect())
    }

    fn hessian_apply(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "allen_cahn hessian")?;
        expect_dim(self.space(), v, "allen_cahn hessian direction")?;
        let h = self.grid.h();
        let lap = d2_slice(h, v);
        Ok(u.iter()
            .zip(v)
            .zip(&lap)
            .map(|((&s, &vi), &l)| -l + double_well_d2(s) * vi)
            .collect())
    }

    fn stable_step(&self, _u: &[f64]) -> f64 {
        self.grid.h() * self.grid.h()
    }
}

/// Area of the surface of revolution swept by the graph of `1 + u`:
/// `E(u) = 2 pi int (1 + u) sqrt(1 + (u')^2)`, admissible while
/// `1 + u > 0` on the closed interval (the boundary carries `1 + 0 = 1`).
#[derive(Debug, Clone, Copy)]
pub struct RevolutionModel {
    grid: Grid1D,
}

pub fn revolution_model(grid: Grid1D) -> RevolutionModel {
    RevolutionModel { grid }
}

impl RevolutionModel {
    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    fn check_admissible(&self, u: &[f64], what: &str) -> Result<()> {
        for (i, &ui) in u.iter().enumerate() {
            if !(1.0 + ui > 0.0) {
                return Err(Error::Inadmissible {
                    node: i,
                    detail: format!("{what}: 1 + u = {} at x = {}", 1.0 + ui, self.grid.x(i)),
                });
            }
        }
        Ok(())
    }
}

impl EnergyModel for RevolutionModel {
    fn space(&self) -> Space {
        Space::of_grid(&self.grid)
    }

    fn energy(&self, u: &[f64]) -> Result<f64> {
        expect_dim(self.space(), u, "revolution energy")?;
        self.check_admissible(u, "energy")?;
        let h = self.grid.h();
        let (p, m) = edge_quantities(h, u);
        Ok(2.0
            * PI
            * h
            * p.iter()
                .zip(&m)
                .map(|(pi, mi)| (1.0 + mi) * (1.0 + pi * pi).sqrt())
                .sum::<f64>())
    }

    fn h_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "revolution gradient")?;
        self.check_admissible(u, "gradient")?;
        let h = self.grid.h();
        let (p, m) = edge_quantities(h, u);
        let s: Vec<f64> = p.iter().map(|pi| (1.0 + pi * pi).sqrt()).collect();
        let w: Vec<f64> = p
            .iter()
            .zip(&m)
            .zip(&s)
            .map(|((pi, mi), si)| (1.0 + mi) * pi / si)
            .collect();
        let avg = edge_average(&s);
        let div = edge_divergence(h, &w);
        Ok(avg
            .iter()
            .zip(&div)
            .map(|(a, d)| 2.0 * PI * (a - d))
            .collect())
    }

    fn hessian_apply(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "revolution hessian")?;
        expect_dim(self.space(), v, "revolution hessian direction")?;
        self.check_admissible(u, "hessian")?;
        let h = self.grid.h();
        let (p, m) = edge_quantities(h, u);
        let (dp, dm) = edge_quantities(h, v);
        let mut ds = Vec::with_capacity(p.len());
        let mut dw = Vec::with_capacity(p.len());
        for i in 0..p.len() {
            let si = (1.0 + p[i] * p[i]).sqrt();
            ds.push(p[i] * dp[i] / si);
            dw.push(dm[i] * p[i] / si + (1.0 + m[i]) * dp[i] / (si * si * si));
        }
        let avg = edge_average(&ds);
        let div = edge_divergence(h, &dw);
        Ok(avg
            .iter()
            .zip(&div)
            .map(|(a, d)| 2.0 * PI * (a - d))
            .collect())
    }

    fn admissible(&self, u: &[f64]) -> bool {
        u.iter().all(|&ui| 1.0 + ui > 0.0)
    }

    fn stable_step(&self, u: &[f64]) -> f64 {
        let radius_max = u.iter().fold(1.0_f64, |acc, &ui| acc.max(1.0 + ui));
        self.grid.h() * self.grid.h() / (2.0 * PI * radius_max)
    }
}

/// Analytic scalar function with two derivatives, used by the integral
/// constraint.
pub trait ScalarFunction: Send + Sync {
    fn eval(&self, s: f64) -> f64;
    fn d(&self, s: f64) -> f64;
    fn dd(&self, s: f64) -> f64;
}

/// Named profiles accepted by the experiment configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedScalar {
    /// `g(s) = s` (mass constraint integrand).
    Identity,
    /// `g(s) = s^2`.
    Square,
    /// `g(s) = 1`; derivative-free, deliberately rank-deficient.
    Constant,
}

impl ScalarFunction for NamedScalar {
    fn eval(&self, s: f64) -> f64 {
        match self {
            NamedScalar::Identity => s,
            NamedScalar::Square => s * s,
            NamedScalar::Constant => 1.0,
        }
    }

    fn d(&self, s: f64) -> f64 {
        match self {
            NamedScalar::Identity => 1.0,
            NamedScalar::Square => 2.0 * s,
            NamedScalar::Constant => 0.0,
        }
    }

    fn dd(&self, _s: f64) -> f64 {
        match self {
            NamedScalar::Identity => 0.0,
            NamedScalar::Square => 2.0,
            NamedScalar::Constant => 0.0,
        }
    }
}

/// Scalar integral constraint `G(u) = h sum_i g(u_i) - target`.
pub struct IntegralConstraint {
    grid: Grid1D,
    g: Box<dyn ScalarFunction>,
    target: f64,
}

pub fn integral_constraint(
    grid: Grid1D,
    g: Box<dyn ScalarFunction>,
    target: f64,
) -> IntegralConstraint {
    IntegralConstraint { grid, g, target }
}

/// Mass constraint: `g(s) = s` with the given target.
pub fn mass_constraint(grid: Grid1D, target: f64) -> IntegralConstraint {
    integral_constraint(grid, Box::new(NamedScalar::Identity), target)
}

impl ConstraintModel for IntegralConstraint {
    fn space(&self) -> Space {
        Space::of_grid(&self.grid)
    }

    fn count(&self) -> usize {
        1
    }

    fn value(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "integral constraint value")?;
        let h = self.grid.h();
        Ok(vec![
            h * u.iter().map(|&s| self.g.eval(s)).sum::<f64>() - self.target,
        ])
    }

    fn h_gradients(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        expect_dim(self.space(), u, "integral constraint gradient")?;
        Ok(vec![u.iter().map(|&s| self.g.d(s)).collect()])
    }

    fn hessian_apply(&self, u: &[f64], k: usize, v: &[f64]) -> Result<Vec<f64>> {
        if k != 0 {
            return Err(Error::Contract(format!(
                "integral constraint has one component, got index {k}"
            )));
        }
        expect_dim(self.space(), u, "integral constraint hessian")?;
        expect_dim(self.space(), v, "integral constraint hessian direction")?;
        Ok(u.iter().zip(v).map(|(&s, &vi)| self.g.dd(s) * vi).collect())
    }

    fn natural_scale(&self) -> f64 {
        self.target.abs()
    }
}

/// Enclosed-volume constraint of the surface of revolution:
/// `G(u) = pi int (1 + u)^2 - nu`, discretized by the closed trapezoid rule
/// (the boundary cells carry the fixed radius one), so `G(0) = pi (b-a) - nu`.
#[derive(Debug, Clone, Copy)]
pub struct RevolutionVolumeConstraint {
    grid: Grid1D,
    nu: f64,
}

pub fn revolution_volume_constraint(grid: Grid1D, nu: f64) -> RevolutionVolumeConstraint {
    RevolutionVolumeConstraint { grid, nu }
}

impl ConstraintModel for RevolutionVolumeConstraint {
    fn space(&self) -> Space {
        Space::of_grid(&self.grid)
    }

    fn count(&self) -> usize {
        1
    }

    fn value(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "volume constraint value")?;
        let h = self.grid.h();
        let interior: f64 = u.iter().map(|&s| (1.0 + s) * (1.0 + s)).sum();
        Ok(vec![PI * h * (interior + 1.0) - self.nu])
    }

    fn h_gradients(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        expect_dim(self.space(), u, "volume constraint gradient")?;
        Ok(vec![u.iter().map(|&s| 2.0 * PI * (1.0 + s)).collect()])
    }

    fn hessian_apply(&self, u: &[f64], k: usize, v: &[f64]) -> Result<Vec<f64>> {
        if k != 0 {
            return Err(Error::Contract(format!(
                "volume constraint has one component, got index {k}"
            )));
        }
        expect_dim(self.space(), u, "volume constraint hessian")?;
        expect_dim(self.space(), v, "volume constraint hessian direction")?;
        Ok(v.iter().map(|&vi| 2.0 * PI * vi).collect())
    }

    fn natural_scale(&self) -> f64 {
        self.nu.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> Grid1D {
        Grid1D::new(0.0, 1.0, n).unwrap()
    }

    #[test]
    fn graph_area_flat() {
        let g = grid(99);
        let m = graph_area_model(g);
        let u = vec![0.0; 99];
        assert!((m.energy(&u).unwrap() - 1.0).abs() < 1e-14);
        let grad = m.h_gradient(&u).unwrap();
        assert!(grad.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn allen_cahn_flat() {
        let g = grid(99);
        let m = allen_cahn_model(g);
        let u = vec![0.0; 99];
        assert!((m.energy(&u).unwrap() - 0.25).abs() < 1e-14);
        assert!(m.h_gradient(&u).unwrap().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn allen_cahn_hessian_at_zero_is_neg_lap_minus_id() {
        let g = grid(49);
        let m = allen_cahn_model(g);
        let u = vec![0.0; 49];
        let v = g.field_from_fn(|x| x * x * (1.0 - x)).into_values();
        let hv = m.hessian_apply(&u, &v).unwrap();
        let lap = d2_slice(g.h(), &v);
        for i in 0..49 {
            assert!((hv[i] - (-lap[i] - v[i])).abs() < 1e-12);
        }
    }

    #[test]
    fn revolution_cylinder_area_and_gradient() {
        let g = grid(99);
        let m = revolution_model(g);
        let u = vec![0.0; 99];
        assert!((m.energy(&u).unwrap() - 2.0 * PI).abs() < 1e-12);
        let grad = m.h_gradient(&u).unwrap();
        for x in grad {
            assert!((x - 2.0 * PI).abs() < 1e-12);
        }
    }

    #[test]
    fn revolution_rejects_pinched_neck() {
        let g = grid(9);
        let m = revolution_model(g);
        let mut u = vec![0.0; 9];
        u[4] = -1.5;
        let err = m.energy(&u).unwrap_err();
        match err {
            Error::Inadmissible { node, .. } => assert_eq!(node, 4),
            other => panic!("expected Inadmissible, got {other}"),
        }
        assert!(!m.admissible(&u));
    }

    #[test]
    fn mass_constraint_examples() {
        let g = grid(99);
        let c = mass_constraint(g, 0.0);
        let u = vec![0.0; 99];
        assert_eq!(c.value(&u).unwrap()[0], 0.0);
        let grads = c.h_gradients(&u).unwrap();
        assert!(grads[0].iter().all(|&x| x == 1.0));
    }

    #[test]
    fn mass_of_full_periods_vanishes() {
        let g = grid(199);
        let c = mass_constraint(g, 0.0);
        let u = g.field_from_fn(|x| (2.0 * PI * x).sin()).into_values();
        assert!(c.value(&u).unwrap()[0].abs() < 1e-12);
    }

    #[test]
    fn square_integrand_constant_field() {
        // Discrete value of g(s) = s^2 at u = c on the interior nodes is
        // exactly c^2 * h * n (the Dirichlet boundary cells contribute zero).
        let g = grid(99);
        let c = integral_constraint(g, Box::new(NamedScalar::Square), 0.3);
        let u = vec![2.0; 99];
        let expected = 4.0 * g.h() * 99.0 - 0.3;
        assert!((c.value(&u).unwrap()[0] - expected).abs() < 1e-12);
        let grads = c.h_gradients(&u).unwrap();
        assert!(grads[0].iter().all(|&x| (x - 4.0).abs() < 1e-14));
    }

    #[test]
    fn volume_constraint_cylinder() {
        let g = grid(99);
        let c = revolution_volume_constraint(g, PI);
        let u = vec![0.0; 99];
        assert!(c.value(&u).unwrap()[0].abs() < 1e-12);
        let grads = c.h_gradients(&u).unwrap();
        for x in &grads[0] {
            assert!((x - 2.0 * PI).abs() < 1e-14);
        }
    }
}
