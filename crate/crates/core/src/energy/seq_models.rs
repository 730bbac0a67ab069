use super::{expect_dim, ConstraintModel, EnergyModel, Space};
use crate::error::{Error, Result};

/// Weight profiles for the truncated sequence-space energies. Both are
/// summable, so the truncations have no uniform Lojasiewicz constant at the
/// origin as the dimension grows.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaRule {
    /// `lambda_k = 2^{-k}`.
    Geometric,
    /// `lambda_k = k^{-2}`.
    InverseSquare,
}

/// First `n` weights of a profile (`k = 1..=n`).
pub fn lambda_profile(rule: LambdaRule, n: usize) -> Vec<f64> {
    (1..=n)
        .map(|k| match rule {
            LambdaRule::Geometric => 0.5_f64.powi(k as i32),
            LambdaRule::InverseSquare => 1.0 / ((k * k) as f64),
        })
        .collect()
}

/// Diagonal quadratic energy `E(x) = sum_k lambda_k x_k^2 / 2` on Euclidean
/// `R^N` (the truncation of a weighted sequence-space energy).
#[derive(Debug, Clone)]
pub struct SeqQuadModel {
    lambda: Vec<f64>,
}

impl SeqQuadModel {
    pub fn new(n: usize, rule: LambdaRule) -> Self {
        Self {
            lambda: lambda_profile(rule, n),
        }
    }

    /// Explicit weights; entries must be finite and nonnegative (a zero
    /// weight models a degenerate direction).
    pub fn from_lambda(lambda: Vec<f64>) -> Result<Self> {
        if lambda.is_empty() {
            return Err(Error::Contract("seq_quad needs at least one weight".into()));
        }
        if lambda.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::Contract(
                "seq_quad weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Self { lambda })
    }

    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }
}

impl EnergyModel for SeqQuadModel {
    fn space(&self) -> Space {
        Space::euclidean(self.lambda.len())
    }

    fn energy(&self, u: &[f64]) -> Result<f64> {
        expect_dim(self.space(), u, "seq_quad energy")?;
        Ok(0.5
            * self
                .lambda
                .iter()
                .zip(u)
                .map(|(l, x)| l * x * x)
                .sum::<f64>())
    }

    fn h_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "seq_quad gradient")?;
        Ok(self.lambda.iter().zip(u).map(|(l, x)| l * x).collect())
    }

    fn hessian_apply(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "seq_quad hessian")?;
        expect_dim(self.space(), v, "seq_quad hessian direction")?;
        Ok(self.lambda.iter().zip(v).map(|(l, x)| l * x).collect())
    }

    fn stable_step(&self, _u: &[f64]) -> f64 {
        let lmax = self.lambda.iter().fold(0.0_f64, |m, &l| m.max(l));
        1.0 / lmax.max(1e-30)
    }
}

/// Energy half of the non-compact constraint-Hessian example on
/// `R x R^N`: `E(x) = x_0 + sum |x_k'|^2` with coordinates `(x_0, x')`.
#[derive(Debug, Clone)]
pub struct GraphExampleEnergy {
    n: usize,
}

/// Constraint half: `G(x) = x_0 - sum (lambda_k - 1) |x_k'|^2`; its zero set
/// is globally the graph `x_0 = psi(x')`, and the pulled-back energy is
/// `sum lambda_k |x_k'|^2`.
#[derive(Debug, Clone)]
pub struct GraphExampleConstraint {
    lambda: Vec<f64>,
}

/// Build the example pair for given weights.
pub fn constraint_hessian_example(
    lambda: Vec<f64>,
) -> Result<(GraphExampleEnergy, GraphExampleConstraint)> {
    if lambda.is_empty() {
        return Err(Error::Contract(
            "constraint_hessian_example needs at least one weight".into(),
        ));
    }
    if lambda.iter().any(|l| !l.is_finite()) {
        return Err(Error::Contract("weights must be finite".into()));
    }
    Ok((
        GraphExampleEnergy { n: lambda.len() },
        GraphExampleConstraint { lambda },
    ))
}

impl GraphExampleConstraint {
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    /// Closed form of the graph function `psi(x') = sum (lambda_k - 1) x_k'^2`.
    pub fn graph_height(&self, x_prime: &[f64]) -> f64 {
        self.lambda
            .iter()
            .zip(x_prime)
            .map(|(l, x)| (l - 1.0) * x * x)
            .sum()
    }
}

impl EnergyModel for GraphExampleEnergy {
    fn space(&self) -> Space {
        Space::euclidean(self.n + 1)
    }

    fn energy(&self, u: &[f64]) -> Result<f64> {
        expect_dim(self.space(), u, "graph example energy")?;
        Ok(u[0] + u[1..].iter().map(|x| x * x).sum::<f64>())
    }

    fn h_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "graph example gradient")?;
        let mut g = Vec::with_capacity(self.n + 1);
        g.push(1.0);
        g.extend(u[1..].iter().map(|x| 2.0 * x));
        Ok(g)
    }

    fn hessian_apply(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "graph example hessian")?;
        expect_dim(self.space(), v, "graph example hessian direction")?;
        let mut h = Vec::with_capacity(self.n + 1);
        h.push(0.0);
        h.extend(v[1..].iter().map(|x| 2.0 * x));
        Ok(h)
    }

    fn stable_step(&self, _u: &[f64]) -> f64 {
        0.5
    }
}

impl ConstraintModel for GraphExampleConstraint {
    fn space(&self) -> Space {
        Space::euclidean(self.lambda.len() + 1)
    }

    fn count(&self) -> usize {
        1
    }

    fn value(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "graph example constraint")?;
        Ok(vec![u[0] - self.graph_height(&u[1..])])
    }

    fn h_gradients(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        expect_dim(self.space(), u, "graph example constraint gradient")?;
        let mut g = Vec::with_capacity(u.len());
        g.push(1.0);
        g.extend(
            self.lambda
                .iter()
                .zip(&u[1..])
                .map(|(l, x)| -2.0 * (l - 1.0) * x),
        );
        Ok(vec![g])
    }

    fn hessian_apply(&self, u: &[f64], k: usize, v: &[f64]) -> Result<Vec<f64>> {
        if k != 0 {
            return Err(Error::Contract(format!(
                "graph example constraint has one component, got index {k}"
            )));
        }
        expect_dim(self.space(), u, "graph example constraint hessian")?;
        let mut h = Vec::with_capacity(u.len());
        h.push(0.0);
        h.extend(
            self.lambda
                .iter()
                .zip(&v[1..])
                .map(|(l, x)| -2.0 * (l - 1.0) * x),
        );
        Ok(h)
    }
}

/// Monomial toy `E(x) = x^degree` on the line; with an even degree `2p` the
/// origin is a degenerate minimum with exact exponent `theta = 1/(2p)`.
#[derive(Debug, Clone, Copy)]
pub struct MonomialModel {
    degree: u32,
}

impl MonomialModel {
    pub fn new(degree: u32) -> Result<Self> {
        if degree < 2 || degree % 2 != 0 {
            return Err(Error::Contract(format!(
                "monomial degree must be even and >= 2, got {degree}"
            )));
        }
        Ok(Self { degree })
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }
}

impl EnergyModel for MonomialModel {
    fn space(&self) -> Space {
        Space::euclidean(1)
    }

    fn energy(&self, u: &[f64]) -> Result<f64> {
        expect_dim(self.space(), u, "monomial energy")?;
        Ok(u[0].powi(self.degree as i32))
    }

    fn h_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "monomial gradient")?;
        let d = self.degree as f64;
        Ok(vec![d * u[0].powi(self.degree as i32 - 1)])
    }

    fn hessian_apply(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "monomial hessian")?;
        let d = self.degree as f64;
        Ok(vec![
            d * (d - 1.0) * u[0].powi(self.degree as i32 - 2) * v[0],
        ])
    }
}

/// Unit-sphere constraint `G(x) = |x|^2 - 1` on Euclidean `R^dim`.
#[derive(Debug, Clone, Copy)]
pub struct SphereConstraint {
    dim: usize,
}

impl SphereConstraint {
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Contract(format!(
                "sphere constraint needs dim >= 2, got {dim}"
            )));
        }
        Ok(Self { dim })
    }
}

impl ConstraintModel for SphereConstraint {
    fn space(&self) -> Space {
        Space::euclidean(self.dim)
    }

    fn count(&self) -> usize {
        1
    }

    fn value(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "sphere constraint")?;
        Ok(vec![u.iter().map(|x| x * x).sum::<f64>() - 1.0])
    }

    fn h_gradients(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        expect_dim(self.space(), u, "sphere constraint gradient")?;
        Ok(vec![u.iter().map(|x| 2.0 * x).collect()])
    }

    fn hessian_apply(&self, u: &[f64], k: usize, v: &[f64]) -> Result<Vec<f64>> {
        if k != 0 {
            return Err(Error::Contract(format!(
                "sphere constraint has one component, got index {k}"
            )));
        }
        expect_dim(self.space(), u, "sphere constraint hessian")?;
        Ok(v.iter().map(|x| 2.0 * x).collect())
    }
}

/// Linear height function `E(x) = x_axis`; its restriction to the unit
/// sphere is critical exactly at the poles of the chosen axis.
#[derive(Debug, Clone, Copy)]
pub struct CoordinateEnergy {
    dim: usize,
    axis: usize,
}

impl CoordinateEnergy {
    pub fn new(dim: usize, axis: usize) -> Result<Self> {
        if axis >= dim {
            return Err(Error::Contract(format!(
                "axis {axis} out of range for dim {dim}"
            )));
        }
        Ok(Self { dim, axis })
    }
}

impl EnergyModel for CoordinateEnergy {
    fn space(&self) -> Space {
        Space::euclidean(self.dim)
    }

    fn energy(&self, u: &[f64]) -> Result<f64> {
        expect_dim(self.space(), u, "coordinate energy")?;
        Ok(u[self.axis])
    }

    fn h_gradient(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "coordinate energy gradient")?;
        let mut g = vec![0.0; self.dim];
        g[self.axis] = 1.0;
        Ok(g)
    }

    fn hessian_apply(&self, u: &[f64], _v: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space(), u, "coordinate energy hessian")?;
        Ok(vec![0.0; self.dim])
    }
}

/// The empty constraint (`m = 0`); turns the constrained machinery into the
/// plain unconstrained one.
#[derive(Debug, Clone, Copy)]
pub struct FreeConstraint {
    space: Space,
}

impl FreeConstraint {
    pub fn new(space: Space) -> Self {
        Self { space }
    }

    pub fn for_model(model: &dyn EnergyModel) -> Self {
        Self {
            space: model.space(),
        }
    }
}

impl ConstraintModel for FreeConstraint {
    fn space(&self) -> Space {
        self.space
    }

    fn count(&self) -> usize {
        0
    }

    fn value(&self, u: &[f64]) -> Result<Vec<f64>> {
        expect_dim(self.space, u, "free constraint")?;
        Ok(Vec::new())
    }

    fn h_gradients(&self, u: &[f64]) -> Result<Vec<Vec<f64>>> {
        expect_dim(self.space, u, "free constraint gradient")?;
        Ok(Vec::new())
    }

    fn hessian_apply(&self, _u: &[f64], k: usize, _v: &[f64]) -> Result<Vec<f64>> {
        Err(Error::Contract(format!(
            "free constraint has no components, got index {k}"
        )))
    }
}
