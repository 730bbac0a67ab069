//! Oracle tests for the energy and constraint models: independent quadrature
//! of the continuum integrands, grid-refinement convergence of the discrete
//! gradients to the closed-form continuum gradients, and the randomized
//! exact-derivative suites.

use std::f64::consts::PI;

use loja_lab::energy::{
    allen_cahn_model, constraint_gradient_checks, constraint_hessian_example, gradient_checks,
    graph_area_model, lambda_profile, mass_constraint, revolution_model,
    revolution_volume_constraint, ConstraintModel, EnergyModel, LambdaRule, SeqQuadModel,
};
use loja_lab::numerics::Grid1D;

/// Adaptive Simpson quadrature, an implementation-independent oracle for the
/// continuum energies.
fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b))
    }
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let mid = 0.5 * (a + b);
        let left = simpson(f, a, mid);
        let right = simpson(f, mid, b);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            left + right + (left + right - whole) / 15.0
        } else {
            recurse(f, a, mid, left, tol / 2.0, depth - 1)
                + recurse(f, mid, b, right, tol / 2.0, depth - 1)
        }
    }
    recurse(f, a, b, simpson(f, a, b), tol, 40)
}

fn sample(grid: &Grid1D, f: impl Fn(f64) -> f64) -> Vec<f64> {
    grid.field_from_fn(f).into_values()
}

#[test]
fn revolution_energy_matches_quadrature() {
    // u = 0.1 sin(pi x) on [0,1], n = 199: discrete energy within 1e-3
    // relative of the adaptive quadrature of 2 pi (1+u) sqrt(1+(u')^2).
    let grid = Grid1D::new(0.0, 1.0, 199).unwrap();
    let model = revolution_model(grid);
    let u = sample(&grid, |x| 0.1 * (PI * x).sin());
    let discrete = model.energy(&u).unwrap();
    let integrand = |x: f64| {
        let u = 0.1 * (PI * x).sin();
        let du = 0.1 * PI * (PI * x).cos();
        2.0 * PI * (1.0 + u) * (1.0 + du * du).sqrt()
    };
    let exact = adaptive_simpson(&integrand, 0.0, 1.0, 1e-12);
    assert!(
        (discrete - exact).abs() <= 1e-3 * exact.abs(),
        "{discrete} vs {exact}"
    );
}

#[test]
fn graph_area_energy_matches_quadrature() {
    let grid = Grid1D::new(0.0, 1.0, 199).unwrap();
    let model = graph_area_model(grid);
    let u = sample(&grid, |x| 0.2 * x * (1.0 - x));
    let discrete = model.energy(&u).unwrap();
    let integrand = |x: f64| {
        let du = 0.2 * (1.0 - 2.0 * x);
        (1.0 + du * du).sqrt()
    };
    let exact = adaptive_simpson(&integrand, 0.0, 1.0, 1e-12);
    assert!(
        (discrete - exact).abs() <= 1e-3 * exact.abs(),
        "{discrete} vs {exact}"
    );
}

#[test]
fn volume_constraint_matches_quadrature_and_closed_form() {
    // u = 0.1 sin(pi x), nu = pi: value = pi (0.01 int sin^2 + 0.2 int sin)
    // = pi (0.005 + 0.4 / pi) via int_0^1 sin = 2/pi and int_0^1 sin^2 = 1/2.
    let grid = Grid1D::new(0.0, 1.0, 799).unwrap();
    let c = revolution_volume_constraint(grid, PI);
    let u = sample(&grid, |x| 0.1 * (PI * x).sin());
    let value = c.value(&u).unwrap()[0];
    let integrand = |x: f64| {
        let u = 0.1 * (PI * x).sin();
        PI * (1.0 + u) * (1.0 + u)
    };
    let exact = adaptive_simpson(&integrand, 0.0, 1.0, 1e-13) - PI;
    let closed = PI * (0.005 + 0.4 / PI);
    assert!((exact - closed).abs() < 1e-10);
    // The trapezoid discretization of the smooth periodic-ish integrand is
    // spectrally accurate in h here; 1e-6 absolute is comfortable.
    assert!((value - exact).abs() <= 1e-6, "{value} vs {exact}");
}

/// Max-norm distance between the discrete gradient and the sampled continuum
/// gradient for mesh width `1/(n+1)`.
fn gradient_consistency_error(n: usize, which: &str) -> f64 {
    let grid = Grid1D::new(0.0, 1.0, n).unwrap();
    let u = sample(&grid, |x| 0.1 * (PI * x).sin());
    let du = |x: f64| 0.1 * PI * (PI * x).cos();
    let ddu = |x: f64| -0.1 * PI * PI * (PI * x).sin();
    let uval = |x: f64| 0.1 * (PI * x).sin();

    let (discrete, continuum): (Vec<f64>, Box<dyn Fn(f64) -> f64>) = match which {
        "graph_area" => (
            graph_area_model(grid).h_gradient(&u).unwrap(),
            Box::new(move |x| -ddu(x) / (1.0 + du(x) * du(x)).powf(1.5)),
        ),
        "allen_cahn" => (
            allen_cahn_model(grid).h_gradient(&u).unwrap(),
            Box::new(move |x| {
                let s = uval(x);
                -ddu(x) + s * s * s - s
            }),
        ),
        "revolution" => (
            revolution_model(grid).h_gradient(&u).unwrap(),
            Box::new(move |x| {
                let p = du(x);
                let s = (1.0 + p * p).sqrt();
                2.0 * PI * (1.0 / s - (1.0 + uval(x)) * ddu(x) / (s * s * s))
            }),
        ),
        other => panic!("unknown model {other}"),
    };
    (0..n)
        .map(|i| (discrete[i] - continuum(grid.x(i))).abs())
        .fold(0.0_f64, f64::max)
}

#[test]
fn discrete_gradients_converge_at_order_two() {
    // h in {1/100, 1/200, 1/400}: observed order >= 1.9 on both refinements.
    for which in ["graph_area", "allen_cahn", "revolution"] {
        let e1 = gradient_consistency_error(99, which);
        let e2 = gradient_consistency_error(199, which);
        let e3 = gradient_consistency_error(399, which);
        let p12 = (e1 / e2).log2();
        let p23 = (e2 / e3).log2();
        assert!(
            p12 >= 1.9 && p23 >= 1.9,
            "{which}: orders {p12:.3}, {p23:.3} (errors {e1:.3e}, {e2:.3e}, {e3:.3e})"
        );
    }
}

#[test]
fn randomized_exact_derivative_suites() {
    let grid = Grid1D::new(0.0, 1.0, 49).unwrap();
    let models: Vec<(&str, Box<dyn EnergyModel>)> = vec![
        ("graph_area", Box::new(graph_area_model(grid))),
        ("allen_cahn", Box::new(allen_cahn_model(grid))),
        ("revolution", Box::new(revolution_model(grid))),
        (
            "seq_quad",
            Box::new(SeqQuadModel::new(12, LambdaRule::Geometric)),
        ),
        (
            "constraint_hessian_example",
            Box::new(
                constraint_hessian_example(lambda_profile(LambdaRule::Geometric, 8))
                    .unwrap()
                    .0,
            ),
        ),
    ];
    for (name, model) in &models {
        let report = gradient_checks(model.as_ref(), 25, 7, 0.3).unwrap();
        assert!(
            report.pass(),
            "{name}: gradient {:.3e}, hessian asym {:.3e}, hessian fd {:.3e}",
            report.max_gradient_err,
            report.max_hessian_asym,
            report.max_hessian_fd_err
        );
    }

    let constraints: Vec<(&str, Box<dyn ConstraintModel>)> = vec![
        ("mass", Box::new(mass_constraint(grid, 0.0))),
        ("volume", Box::new(revolution_volume_constraint(grid, PI))),
        (
            "integral_square",
            Box::new(loja_lab::energy::integral_constraint(
                grid,
                Box::new(loja_lab::energy::NamedScalar::Square),
                0.1,
            )),
        ),
        (
            "graph_example",
            Box::new(
                constraint_hessian_example(lambda_profile(LambdaRule::Geometric, 8))
                    .unwrap()
                    .1,
            ),
        ),
    ];
    for (name, c) in &constraints {
        let report = constraint_gradient_checks(c.as_ref(), 25, 11, 0.3).unwrap();
        assert!(report.pass(), "{name} constraint checks failed");
    }
}
