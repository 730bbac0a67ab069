//! The five experiment commands. Each takes a parsed config plus the raw
//! config bytes (hashed into the manifest), writes its outputs into `out`,
//! and returns a process exit code:
//!
//! * `0`: success (flow converged / checks passed),
//! * `2`: flow hit `t_max` without converging,
//! * `3`: runtime failure (solver error, failed check, degenerate constraint),
//! * `64`: invalid configuration; the message names the offending field.

use std::fs;
use std::path::Path;
use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};

use loja_lab::energy::{constraint_gradient_checks, gradient_checks};
use loja_lab::flow::{run_flow, FlowStatus};
use loja_lab::geometry::{
    build_chart, norm_comparison, psi, psi_prime, retract, tangent_identity_check,
};
use loja_lab::loja::{
    blowup_sweep, constant_at_theta, find_critical, fit_exponent, fit_exponent_plain,
    hessian_report, pullback_blowup_sweep, sample_near,
};

use crate::config::{ConfigError, ExperimentConfig, ModelKind, Problem};

pub const EXIT_OK: i32 = 0;
pub const EXIT_TMAX: i32 = 2;
pub const EXIT_FAILURE: i32 = 3;
pub const EXIT_CONFIG: i32 = 64;

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    config_hash: String,
    artifact_version: &'a str,
    wall_time_seconds: f64,
    exit_code: i32,
}

fn config_hash(raw: &str) -> String {
    let digest = Sha256::digest(raw.as_bytes());
    let mut hex = String::with_capacity(64);
    for byte in digest {
        hex.push_str(&format!("{byte:02x}"));
    }
    hex
}

fn write_manifest(out: &Path, command: &str, raw: &str, started: Instant, exit_code: i32) {
    let manifest = Manifest {
        command,
        config_hash: config_hash(raw),
        artifact_version: env!("CARGO_PKG_VERSION"),
        wall_time_seconds: started.elapsed().as_secs_f64(),
        exit_code,
    };
    let path = out.join("manifest.json");
    if let Ok(body) = serde_json::to_string_pretty(&manifest) {
        let _ = fs::write(path, body + "\n");
    }
}

fn config_failure(err: &ConfigError) -> i32 {
    eprintln!("{err}");
    EXIT_CONFIG
}

fn ensure_out(out: &Path) -> Result<(), i32> {
    fs::create_dir_all(out).map_err(|e| {
        eprintln!("cannot create output directory {}: {e}", out.display());
        EXIT_FAILURE
    })
}

#[derive(Serialize)]
struct CheckRecord {
    check: &'static str,
    value: f64,
    tol: f64,
    pass: bool,
}

#[derive(Serialize)]
struct HessianRecord {
    check: &'static str,
    min_eigenvalue: f64,
    max_eigenvalue: f64,
    kernel_dim: usize,
    index_zero_analog: bool,
}

fn jsonl<T: Serialize>(records: &[T]) -> String {
    let mut out = String::new();
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("serialization cannot fail"));
        out.push('\n');
    }
    out
}

/// `flow --config c.json --out dir`: integrate the projected flow, write
/// `trace.csv` (and optionally `trace.svg`).
pub fn cmd_flow(config: &ExperimentConfig, raw: &str, out: &Path) -> i32 {
    let started = Instant::now();
    let code = (|| -> i32 {
        let problem = match config.build_problem() {
            Ok(p) => p,
            Err(e) => return config_failure(&e),
        };
        let opts = match config.flow_options() {
            Ok(o) => o,
            Err(e) => return config_failure(&e),
        };
        let u0 = match config.build_initial(&problem) {
            Ok(u) => u,
            Err(e) => return config_failure(&e),
        };
        if let Err(code) = ensure_out(out) {
            return code;
        }
        let trace = match run_flow(
            problem.energy.as_ref(),
            problem.constraint.as_ref(),
            &u0,
            &opts,
        ) {
            Ok(t) => t,
            Err(e) => {
                eprintln!("flow failed: {e}");
                return EXIT_FAILURE;
            }
        };
        if fs::write(out.join("trace.csv"), trace.to_csv()).is_err() {
            eprintln!("cannot write trace.csv");
            return EXIT_FAILURE;
        }
        if config.output.emit_svg {
            let svg = crate::svg::render_trace_svg(&trace.records);
            let _ = fs::write(out.join("trace.svg"), svg);
        }
        let last = trace.records.last();
        println!(
            "flow: {:?} after {} steps, final energy {:.9e}, pgrad {:.3e}",
            trace.status,
            trace.steps_taken,
            last.map_or(f64::NAN, |r| r.energy),
            last.map_or(f64::NAN, |r| r.pgrad_norm),
        );
        match trace.status {
            FlowStatus::Converged => EXIT_OK,
            FlowStatus::TMaxReached => EXIT_TMAX,
            FlowStatus::Failed(reason) => {
                eprintln!("flow failed: {reason}");
                EXIT_FAILURE
            }
        }
    })();
    write_manifest(out, "flow", raw, started, code);
    code
}

/// Deterministic coordinate-ray points of the constraint set, the extremal
/// family of the sequence-space models; appended to the random samples when
/// computing pinned-exponent constants.
fn coordinate_rays(config: &ExperimentConfig, problem: &Problem, radius: f64) -> Vec<Vec<f64>> {
    let mut rays = Vec::new();
    let dim = problem.energy.space().dim;
    let x_dims = match config.model {
        ModelKind::SeqQuad => 0..dim,
        ModelKind::ConstraintHessianExample => 1..dim,
        _ => return rays,
    };
    for k in x_dims {
        for j in 0..=16 {
            let t = radius * 10f64.powf(-(j as f64) / 8.0);
            let mut x = vec![0.0; dim];
            x[k] = t;
            if let Ok(on_set) = retract(problem.constraint.as_ref(), &x) {
                rays.push(on_set);
            }
        }
    }
    rays
}

/// `loja-fit`: polish the critical point, sample the constraint set around
/// it, fit the refined exponent, and write `fit.jsonl` (first record the free
/// fit, then one record per pinned `theta_grid` entry).
pub fn cmd_loja_fit(config: &ExperimentConfig, raw: &str, out: &Path) -> i32 {
    let started = Instant::now();
    let code = (|| -> i32 {
        let problem = match config.build_problem() {
            Ok(p) => p,
            Err(e) => return config_failure(&e),
        };
        let opts = match config.flow_options() {
            Ok(o) => o,
            Err(e) => return config_failure(&e),
        };
        let analysis = match config.analysis() {
            Ok(a) => a.clone(),
            Err(e) => return config_failure(&e),
        };
        let seed = match config.seed() {
            Ok(s) => s,
            Err(e) => return config_failure(&e),
        };
        if analysis.radius <= 0.0 || analysis.count == 0 {
            return config_failure(&ConfigError(
                "analysis.radius and analysis.count must be positive".into(),
            ));
        }
        for theta in &analysis.theta_grid {
            if !(*theta > 0.0 && *theta <= 0.5) {
                return config_failure(&ConfigError(format!(
                    "analysis.theta_grid: {theta} outside (0, 1/2]"
                )));
            }
        }
        let u0 = match config.build_initial(&problem) {
            Ok(u) => u,
            Err(e) => return config_failure(&e),
        };
        if let Err(code) = ensure_out(out) {
            return code;
        }

        let e = problem.energy.as_ref();
        let g = problem.constraint.as_ref();
        let u_bar = match find_critical(e, g, &u0, &opts) {
            Ok(u) => u,
            Err(err) => {
                eprintln!("critical point search failed: {err}");
                return EXIT_FAILURE;
            }
        };
        let samples = match sample_near(e, g, &u_bar, analysis.radius, analysis.count, seed) {
            Ok(s) => s,
            Err(err) => {
                eprintln!("sampling failed: {err}");
                return EXIT_FAILURE;
            }
        };
        let refined = match fit_exponent(e, g, &u_bar, &samples) {
            Ok(f) => f,
            Err(err) => {
                eprintln!("exponent fit failed: {err}");
                return EXIT_FAILURE;
            }
        };
        let mut records = vec![refined.clone()];

        // Pinned-exponent constants over the samples, augmented with the
        // coordinate rays for the sequence-space models (their extremal
        // directions have measure zero under random sampling).
        let mut pinned_samples = samples.clone();
        pinned_samples.extend(coordinate_rays(config, &problem, analysis.radius));
        for &theta in &analysis.theta_grid {
            match constant_at_theta(e, g, &u_bar, &pinned_samples, theta) {
                Ok(fit) => records.push(fit),
                Err(err) => {
                    eprintln!("pinned fit at theta = {theta} failed: {err}");
                    return EXIT_FAILURE;
                }
            }
        }
        if fs::write(out.join("fit.jsonl"), jsonl(&records)).is_err() {
            eprintln!("cannot write fit.jsonl");
            return EXIT_FAILURE;
        }

        println!(
            "loja-fit: theta = {:.6} (C = {:.6e}, r2 = {:.6}, {} samples)",
            refined.theta, refined.c, refined.r2, refined.n_samples
        );
        // The refined and plain exponents are reported side by side; the two
        // need not coincide in general.
        match fit_exponent_plain(e, g, &u_bar, &samples) {
            Ok(plain) => println!(
                "loja-fit: plain-gradient theta = {:.6} (C = {:.6e})",
                plain.theta, plain.c
            ),
            Err(err) => println!("loja-fit: plain-gradient fit unavailable ({err})"),
        }
        EXIT_OK
    })();
    write_manifest(out, "loja-fit", raw, started, code);
    code
}

/// `counterexample`: blow-up sweep of the best constants against truncation
/// dimension; `sweep.csv` has columns `N,C,ratio`.
pub fn cmd_counterexample(config: &ExperimentConfig, raw: &str, out: &Path) -> i32 {
    let started = Instant::now();
    let code = (|| -> i32 {
        let sweep = match config.sweep() {
            Ok(s) => s.clone(),
            Err(e) => return config_failure(&e),
        };
        if !(sweep.theta > 0.0 && sweep.theta <= 0.5) {
            return config_failure(&ConfigError(format!(
                "counterexample.theta: {} outside (0, 1/2]",
                sweep.theta
            )));
        }
        if sweep.sigma <= 0.0 {
            return config_failure(&ConfigError(
                "counterexample.sigma: must be positive".into(),
            ));
        }
        if sweep.ns.windows(2).any(|w| w[0] >= w[1]) {
            return config_failure(&ConfigError(
                "counterexample.ns: must be strictly ascending".into(),
            ));
        }
        let table = match config.model {
            ModelKind::SeqQuad => blowup_sweep(
                &sweep.ns,
                sweep.lambda_rule.into(),
                sweep.theta,
                sweep.sigma,
            ),
            ModelKind::ConstraintHessianExample => pullback_blowup_sweep(
                &sweep.ns,
                sweep.lambda_rule.into(),
                sweep.theta,
                sweep.sigma,
            ),
            _ => {
                return config_failure(&ConfigError(
                    "model: counterexample needs seq_quad or constraint_hessian_example".into(),
                ))
            }
        };
        let table = match table {
            Ok(t) => t,
            Err(err) => {
                eprintln!("sweep failed: {err}");
                return EXIT_FAILURE;
            }
        };
        if let Err(code) = ensure_out(out) {
            return code;
        }
        if fs::write(out.join("sweep.csv"), table.to_csv()).is_err() {
            eprintln!("cannot write sweep.csv");
            return EXIT_FAILURE;
        }
        let last = table.rows.last().expect("nonempty sweep");
        println!(
            "counterexample: C grows to {:.6e} at N = {} ({} rows)",
            last.c,
            last.n,
            table.rows.len()
        );
        EXIT_OK
    })();
    write_manifest(out, "counterexample", raw, started, code);
    code
}

/// `chart-check`: chart split, tangent-space identities, graph-derivative
/// finite-difference check, two-sided norm comparison, and the Hessian
/// spectrum report at the model's base critical point.
pub fn cmd_chart_check(config: &ExperimentConfig, raw: &str, out: &Path) -> i32 {
    let started = Instant::now();
    let code = (|| -> i32 {
        let problem = match config.build_problem() {
            Ok(p) => p,
            Err(e) => return config_failure(&e),
        };
        let analysis = match config.analysis() {
            Ok(a) => a.clone(),
            Err(e) => return config_failure(&e),
        };
        let seed = match config.seed() {
            Ok(s) => s,
            Err(e) => return config_failure(&e),
        };
        if let Err(code) = ensure_out(out) {
            return code;
        }
        let e = problem.energy.as_ref();
        let g = problem.constraint.as_ref();
        let base = match retract(g, &problem.base) {
            Ok(b) => b,
            Err(err) => {
                eprintln!("chart-check: base point retraction failed: {err}");
                return EXIT_FAILURE;
            }
        };
        let chart = match build_chart(g, &base) {
            Ok(c) => c,
            Err(err) => {
                eprintln!("chart-check: {err}");
                return EXIT_FAILURE;
            }
        };

        let mut checks: Vec<CheckRecord> = Vec::new();
        let ambient = e.space().dim;
        let codim_ok = chart.dim_v1() == g.count() && chart.dim_v0() + g.count() == ambient;
        checks.push(CheckRecord {
            check: "codimension_split",
            value: chart.dim_v1() as f64,
            tol: g.count() as f64,
            pass: codim_ok,
        });

        // Perturbed chart points from the seed.
        use rand::Rng;
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let d = chart.dim_v0();
        let n_points = analysis.count.clamp(2, 50);
        let mut omegas = vec![vec![0.0; d]];
        for _ in 0..n_points {
            let omega: Vec<f64> = (0..d)
                .map(|_| rng.random_range(-analysis.radius..analysis.radius))
                .collect();
            omegas.push(omega);
        }

        let mut max_angle = 0.0_f64;
        for omega in omegas.iter().take(6) {
            match tangent_identity_check(&chart, g, omega) {
                Ok((a1, _)) => max_angle = max_angle.max(a1),
                Err(err) => {
                    eprintln!("chart-check: tangent identity: {err}");
                    return EXIT_FAILURE;
                }
            }
        }
        checks.push(CheckRecord {
            check: "tangent_principal_angle",
            value: max_angle,
            tol: 1e-6,
            pass: max_angle <= 1e-6,
        });

        // Graph derivative against central differences of the graph solve.
        let mut psi_prime_err = 0.0_f64;
        {
            let omega = &omegas[omegas.len() - 1];
            let pp = match psi_prime(&chart, g, omega) {
                Ok(p) => p,
                Err(err) => {
                    eprintln!("chart-check: graph derivative: {err}");
                    return EXIT_FAILURE;
                }
            };
            let step = 1e-5 * (1.0 + analysis.radius);
            for i in 0..d.min(8) {
                let mut plus = omega.clone();
                plus[i] += step;
                let mut minus = omega.clone();
                minus[i] -= step;
                match (psi(&chart, g, &plus), psi(&chart, g, &minus)) {
                    (Ok(xp), Ok(xm)) => {
                        for k in 0..chart.dim_v1() {
                            let fd = (xp[k] - xm[k]) / (2.0 * step);
                            let err = (pp.get(k, i) - fd).abs() / (1.0 + fd.abs());
                            psi_prime_err = psi_prime_err.max(err);
                        }
                    }
                    _ => {
                        eprintln!("chart-check: graph solve failed near the base point");
                        return EXIT_FAILURE;
                    }
                }
            }
        }
        checks.push(CheckRecord {
            check: "psi_prime_vs_finite_difference",
            value: psi_prime_err,
            tol: 1e-6,
            pass: psi_prime_err <= 1e-6,
        });

        // Two-sided bounds between chart gradient and projected gradient.
        let report = match norm_comparison(&chart, e, g, &omegas) {
            Ok(r) => r,
            Err(err) => {
                eprintln!("chart-check: norm comparison: {err}");
                return EXIT_FAILURE;
            }
        };
        let violations = report.upper_violations.len() + report.lower_violations.len();
        checks.push(CheckRecord {
            check: "norm_comparison_violations",
            value: violations as f64,
            tol: 0.0,
            pass: violations == 0,
        });
        checks.push(CheckRecord {
            check: "phi_prime_sup",
            value: report.sup_phi_prime,
            tol: f64::INFINITY,
            pass: report.sup_phi_prime.is_finite(),
        });

        let hessian = match hessian_report(&chart, e, g) {
            Ok(h) => h,
            Err(err) => {
                eprintln!("chart-check: hessian report: {err}");
                return EXIT_FAILURE;
            }
        };

        let all_pass = checks.iter().all(|c| c.pass);
        let mut body = jsonl(&checks);
        body.push_str(&jsonl(&[HessianRecord {
            check: "hessian_report",
            min_eigenvalue: hessian.min_eigenvalue(),
            max_eigenvalue: hessian.eigenvalues.last().copied().unwrap_or(0.0),
            kernel_dim: hessian.kernel_dim,
            index_zero_analog: hessian.index_zero_analog,
        }]));
        if fs::write(out.join("chartcheck.jsonl"), body).is_err() {
            eprintln!("cannot write chartcheck.jsonl");
            return EXIT_FAILURE;
        }
        println!(
            "chart-check: angles <= {max_angle:.3e}, psi' fd err {psi_prime_err:.3e}, {} norm violations, kernel_dim {}",
            violations, hessian.kernel_dim
        );
        if all_pass {
            EXIT_OK
        } else {
            eprintln!("chart-check: at least one check failed");
            EXIT_FAILURE
        }
    })();
    write_manifest(out, "chart-check", raw, started, code);
    code
}

/// `grad-check`: randomized exact-gradient and Hessian-symmetry suites on the
/// configured model pair.
pub fn cmd_grad_check(config: &ExperimentConfig, raw: &str, out: &Path) -> i32 {
    let started = Instant::now();
    let code = (|| -> i32 {
        let problem = match config.build_problem() {
            Ok(p) => p,
            Err(e) => return config_failure(&e),
        };
        let analysis = match config.analysis() {
            Ok(a) => a.clone(),
            Err(e) => return config_failure(&e),
        };
        let seed = match config.seed() {
            Ok(s) => s,
            Err(e) => return config_failure(&e),
        };
        if analysis.count == 0 {
            return config_failure(&ConfigError("analysis.count: must be positive".into()));
        }
        if let Err(code) = ensure_out(out) {
            return code;
        }
        let amplitude = 0.3;
        let energy_report =
            match gradient_checks(problem.energy.as_ref(), analysis.count, seed, amplitude) {
                Ok(r) => r,
                Err(err) => {
                    eprintln!("grad-check: {err}");
                    return EXIT_FAILURE;
                }
            };
        let mut records = vec![
            CheckRecord {
                check: "energy_gradient_vs_central_difference",
                value: energy_report.max_gradient_err,
                tol: energy_report.gradient_tol,
                pass: energy_report.max_gradient_err <= energy_report.gradient_tol,
            },
            CheckRecord {
                check: "energy_hessian_symmetry",
                value: energy_report.max_hessian_asym,
                tol: energy_report.hessian_sym_tol,
                pass: energy_report.max_hessian_asym <= energy_report.hessian_sym_tol,
            },
            CheckRecord {
                check: "energy_hessian_vs_gradient_difference",
                value: energy_report.max_hessian_fd_err,
                tol: energy_report.hessian_fd_tol,
                pass: energy_report.max_hessian_fd_err <= energy_report.hessian_fd_tol,
            },
        ];
        if problem.constraint.count() > 0 {
            match constraint_gradient_checks(
                problem.constraint.as_ref(),
                analysis.count,
                seed ^ 0x636f_6e73,
                amplitude,
            ) {
                Ok(r) => {
                    records.push(CheckRecord {
                        check: "constraint_gradient_vs_central_difference",
                        value: r.max_gradient_err,
                        tol: r.gradient_tol,
                        pass: r.max_gradient_err <= r.gradient_tol,
                    });
                    records.push(CheckRecord {
                        check: "constraint_hessian_symmetry",
                        value: r.max_hessian_asym,
                        tol: r.hessian_sym_tol,
                        pass: r.max_hessian_asym <= r.hessian_sym_tol,
                    });
                }
                Err(err) => {
                    eprintln!("grad-check: constraint suite: {err}");
                    return EXIT_FAILURE;
                }
            }
        }
        let all_pass = records.iter().all(|c| c.pass);
        if fs::write(out.join("gradcheck.jsonl"), jsonl(&records)).is_err() {
            eprintln!("cannot write gradcheck.jsonl");
            return EXIT_FAILURE;
        }
        for r in &records {
            println!(
                "grad-check: {} = {:.3e} (tol {:.1e}) {}",
                r.check,
                r.value,
                r.tol,
                if r.pass { "ok" } else { "FAIL" }
            );
        }
        if all_pass {
            EXIT_OK
        } else {
            EXIT_FAILURE
        }
    })();
    write_manifest(out, "grad-check", raw, started, code);
    code
}
