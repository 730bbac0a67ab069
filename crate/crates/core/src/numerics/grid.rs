use crate::error::{Error, Result};

/// Uniform 1-D mesh on `[a, b]` with homogeneous Dirichlet boundary.
///
/// The mesh carries `n` interior nodes `x_i = a + i*h`, `i = 1..=n`, with
/// spacing `h = (b - a) / (n + 1)`. Boundary values are identically zero, so
/// interior vectors encode zero-trace data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n: usize,
    h: f64,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !a.is_finite() || !b.is_finite() || a >= b {
            return Err(Error::Contract(format!(
                "grid endpoints must be finite with a < b, got a={a}, b={b}"
            )));
        }
        if n < 3 {
            return Err(Error::Contract(format!(
                "grid needs at least 3 interior nodes, got n={n}"
            )));
        }
        let h = (b - a) / (n as f64 + 1.0);
        Ok(Self { a, b, n, h })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of interior nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Mesh spacing.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Coordinate of interior node `i` (0-based, `x = a + (i+1)h`).
    pub fn x(&self, i: usize) -> f64 {
        self.a + (i as f64 + 1.0) * self.h
    }

    /// Sample a function at the interior nodes.
    pub fn field_from_fn<F: Fn(f64) -> f64>(&self, f: F) -> Field {
        Field {
            grid: *self,
            values: (0..self.n).map(|i| f(self.x(i))).collect(),
        }
    }

    pub fn zeros(&self) -> Field {
        Field {
            grid: *self,
            values: vec![0.0; self.n],
        }
    }

    pub fn field(&self, values: Vec<f64>) -> Result<Field> {
        if values.len() != self.n {
            return Err(Error::Contract(format!(
                "field length {} does not match grid with n={}",
                values.len(),
                self.n
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Contract("field entries must be finite".into()));
        }
        Ok(Field {
            grid: *self,
            values,
        })
    }
}

/// Real values at the interior nodes of a [`Grid1D`]; the discrete element of
/// the zero-trace space, with boundary values identically zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Field {
    pub fn grid(&self) -> Grid1D {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

fn assert_same_grid(u: &Field, v: &Field, op: &str) {
    assert!(
        u.grid == v.grid,
        "grid mismatch in {op}: [{}, {}] n={} vs [{}, {}] n={}",
        u.grid.a,
        u.grid.b,
        u.grid.n,
        v.grid.a,
        v.grid.b,
        v.grid.n
    );
}

/// Discrete L2 pairing `<u, v> = h * sum_i u_i v_i`.
///
/// Panics on a grid mismatch; that is a programming error, not a runtime
/// condition.
pub fn inner(u: &Field, v: &Field) -> f64 {
    assert_same_grid(u, v, "inner");
    u.grid.h
        * u.values
            .iter()
            .zip(&v.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
}

/// Central first difference `(u_{i+1} - u_{i-1}) / (2h)` with zero ghost
/// values at both boundaries (second-order accurate on the zero extension).
pub fn d1(u: &Field) -> Field {
    Field {
        grid: u.grid,
        values: d1_slice(u.grid.h, &u.values),
    }
}

/// Slice form of [`d1`]; `values` are the interior nodes, ghosts are zero.
pub fn d1_slice(h: f64, values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let at = |i: isize| -> f64 {
        if i < 0 || i >= n as isize {
            0.0
        } else {
            values[i as usize]
        }
    };
    (0..n as isize)
        .map(|i| (at(i + 1) - at(i - 1)) / (2.0 * h))
        .collect()
}

/// Second difference `(u_{i+1} - 2u_i + u_{i-1}) / h^2` with zero ghosts; the
/// discrete Dirichlet Laplacian.
pub fn d2(u: &Field) -> Field {
    Field {
        grid: u.grid,
        values: d2_slice(u.grid.h, &u.values),
    }
}

/// Slice form of [`d2`].
pub fn d2_slice(h: f64, values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let at = |i: isize| -> f64 {
        if i < 0 || i >= n as isize {
            0.0
        } else {
            values[i as usize]
        }
    };
    (0..n as isize)
        .map(|i| (at(i + 1) - 2.0 * at(i) + at(i - 1)) / (h * h))
        .collect()
}
