//! Critical-point polishing, empirical Lojasiewicz exponent and constant
//! estimation, and blow-up sweeps for the sequence-space counterexamples.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::Serialize;

use crate::energy::{
    constraint_hessian_example, lambda_profile, ConstraintModel, EnergyModel, LambdaRule,
    SeqQuadModel,
};
use crate::error::{Error, Result};
use crate::flow::{run_flow, FlowOptions, FlowStatus, FlowTrace};
use crate::geometry::{
    build_chart, phi, project_tangent, pullback_energy, pullback_grad, pullback_hessian,
    retract_detailed, ChartData, RetractOptions,
};
use crate::numerics::{linfit, sym_eigs};

fn euclid_norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Fitted exponent/constant pair with regression diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct LojaFit {
    /// Fitted exponent, `theta = 1 - slope` of the log-log regression.
    pub theta: f64,
    /// Smallest constant valid on the sample set (max ratio).
    #[serde(rename = "C")]
    pub c: f64,
    /// Slope of `log |P grad E|` against `log |E - E(u_bar)|`.
    pub slope: f64,
    pub r2: f64,
    pub n_samples: usize,
    /// Energy-gap range used by the fit.
    pub window: FitWindow,
    /// Whether `theta` lies in `(0, 1/2]`.
    pub in_range_flag: bool,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitWindow {
    pub emin: f64,
    pub emax: f64,
}

/// Flow to a rough tolerance, then damped Newton on the chart gradient down
/// to `|P grad E| <= 1e-12 (1 + |grad E|)`.
pub fn find_critical(
    e: &dyn EnergyModel,
    g: &dyn ConstraintModel,
    u0: &[f64],
    opts: &FlowOptions,
) -> Result<Vec<f64>> {
    let mut flow_opts = *opts;
    flow_opts.tol_pgrad = flow_opts.tol_pgrad.max(1e-6);
    let trace = run_flow(e, g, u0, &flow_opts)?;
    let coarse = match trace.status {
        FlowStatus::Converged => trace.final_state,
        FlowStatus::TMaxReached | FlowStatus::Failed(_) => {
            let p = project_tangent(e, g, &trace.final_state)?;
            let pn = e.space().norm(&p);
            return Err(Error::SearchFailure {
                last: trace.final_state,
                pgrad: pn,
                iterations: trace.steps_taken as usize,
            });
        }
    };

    let space = e.space();
    let (u_start, _) = retract_detailed(g, &coarse, RetractOptions::for_constraint(g))?;
    let chart = build_chart(g, &u_start)?;
    let d = chart.dim_v0();
    let mut omega = vec![0.0; d];
    let mut u = u_start;
    for _newton in 0..40 {
        let pt = project_tangent(e, g, &u)?;
        let pn = space.norm(&pt);
        let grad_norm = space.norm(&e.h_gradient(&u)?);
        if pn <= 1e-12 * (1.0 + grad_norm) {
            return Ok(u);
        }
        let fp = pullback_grad(&chart, e, g, &omega)?;
        let h = pullback_hessian(&chart, e, g, &omega)?;
        let (vals, vecs) = sym_eigs(&h)?;
        let rho = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let floor = 1e-10 * rho.max(1e-30);
        // Newton direction through the eigen-decomposition with a magnitude
        // floor; signs are kept (root finding on F').
        let mut delta = vec![0.0; d];
        for j in 0..d {
            let vj = vecs.column(j);
            let lam = vals[j];
            let denom = if lam.abs() < floor {
                floor.copysign(if lam == 0.0 { 1.0 } else { lam })
            } else {
                lam
            };
            let coeff = -vj.iter().zip(&fp).map(|(a, b)| a * b).sum::<f64>() / denom;
            for i in 0..d {
                delta[i] += coeff * vj[i];
            }
        }
        let fp_norm = euclid_norm(&fp);
        let mut alpha = 1.0_f64;
        let mut accepted = false;
        while alpha > 1e-6 {
            let cand: Vec<f64> = omega
                .iter()
                .zip(&delta)
                .map(|(w, dw)| w + alpha * dw)
                .collect();
            match pullback_grad(&chart, e, g, &cand) {
                Ok(fp_new) if euclid_norm(&fp_new) <= (1.0 - 1e-4 * alpha) * fp_norm => {
                    omega = cand;
                    u = phi(&chart, g, &omega)?;
                    accepted = true;
                    break;
                }
                _ => alpha *= 0.5,
            }
        }
        if !accepted {
            let pt = project_tangent(e, g, &u)?;
            return Err(Error::SearchFailure {
                pgrad: space.norm(&pt),
                last: u,
                iterations: 40,
            });
        }
    }
    let pt = project_tangent(e, g, &u)?;
    let pn = space.norm(&pt);
    let grad_norm = space.norm(&e.h_gradient(&u)?);
    if pn <= 1e-12 * (1.0 + grad_norm) {
        Ok(u)
    } else {
        Err(Error::SearchFailure {
            pgrad: pn,
            last: u,
            iterations: 40,
        })
    }
}

/// Random admissible points of the constraint set near `u_bar`: kernel-space
/// directions with log-uniform amplitudes in `[radius/100, radius]`, retracted
/// onto the constraint set. Exactly `count` draws are attempted; failures are
/// skipped, and fewer than `count/2` successes is an error. Deterministic per
/// seed.
pub fn sample_near(
    e: &dyn EnergyModel,
    g: &dyn ConstraintModel,
    u_bar: &[f64],
    radius: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>> {
    if radius <= 0.0 || !radius.is_finite() {
        return Err(Error::Contract(format!(
            "radius must be positive, got {radius}"
        )));
    }
    if count == 0 {
        return Err(Error::Contract("sample count must be positive".into()));
    }
    let space = e.space();
    let (base, _) = retract_detailed(g, u_bar, RetractOptions::for_constraint(g))?;
    let chart = build_chart(g, &base)?;
    let d = chart.dim_v0();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let uniform = Uniform::new(0.0_f64, 1.0_f64).map_err(|e| Error::Contract(e.to_string()))?;
    let retract_opts = RetractOptions {
        tol: 1e-12 * (1.0 + g.natural_scale()),
        max_iter: 50,
    };
    let mut samples = Vec::with_capacity(count);
    let mut failures = 0usize;
    for _ in 0..count {
        let mut dir: Vec<f64> = (0..d)
            .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        let norm = euclid_norm(&dir);
        let amplitude = radius * 10f64.powf(-2.0 * uniform.sample(&mut rng));
        if norm < 1e-12 {
            failures += 1;
            continue;
        }
        for x in dir.iter_mut() {
            *x *= amplitude / norm;
        }
        let trial = chart.embed(&dir, &vec![0.0; chart.dim_v1()]);
        let retracted = match retract_detailed(g, &trial, retract_opts) {
            Ok((v, _)) => v,
            Err(_) => {
                failures += 1;
                continue;
            }
        };
        let dist: Vec<f64> = retracted.iter().zip(&base).map(|(a, b)| a - b).collect();
        if space.norm(&dist) > radius * 1.01 || !e.admissible(&retracted) {
            failures += 1;
            continue;
        }
        samples.push(retracted);
    }
    if samples.len() * 2 < count {
        return Err(Error::SamplingFailure {
            requested: count,
            succeeded: samples.len(),
            failures,
        });
    }
    Ok(samples)
}

fn fit_exponent_impl(
    e: &dyn EnergyModel,
    g: &dyn ConstraintModel,
    u_bar: &[f64],
    samples: &[Vec<f64>],
    projected: bool,
) -> Result<LojaFit> {
    let space = e.space();
    let e_bar = e.energy(u_bar)?;
    let mut gaps = Vec::new();
    let mut grads = Vec::new();
    for s in samples {
        let gap = (e.energy(s)? - e_bar).abs();
        let gnorm = if projected {
            space.norm(&project_tangent(e, g, s)?)
        } else {
            space.norm(&e.h_gradient(s)?)
        };
        if gap > 1e-14 && gnorm > 1e-14 {
            gaps.push(gap);
            grads.push(gnorm);
        }
    }
    if gaps.len() < 8 {
        return Err(Error::InsufficientSamples {
            needed: 8,
            got: gaps.len(),
        });
    }
    let emin = gaps.iter().cloned().fold(f64::INFINITY, f64::min);
    let emax = gaps.iter().cloned().fold(0.0_f64, f64::max);
    let spread = emax / emin;
    if spread < 10.0 {
        return Err(Error::IllConditionedFit { spread });
    }
    let x: Vec<f64> = gaps.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = grads.iter().map(|v| v.ln()).collect();
    let fit = linfit(&x, &y)?;
    let theta = 1.0 - fit.slope;
    let c = gaps
        .iter()
        .zip(&grads)
        .map(|(gap, gn)| gap.powf(1.0 - theta) / gn)
        .fold(0.0_f64, f64::max);
    Ok(LojaFit {
        theta,
        c,
        slope: fit.slope,
        r2: fit.r2,
        n_samples: gaps.len(),
        window: FitWindow { emin, emax },
        in_range_flag: theta > 0.0 && theta <= 0.5 + 1e-9,
    })
}

/// Fit the refined inequality: regression of `log |P grad E|` against
/// `log |E - E(u_bar)|` over the samples; `theta = 1 - slope` and `C` the
/// maximal ratio `|E - E(u_bar)|^{1-theta} / |P grad E|`.
pub fn fit_exponent(
    e: &dyn EnergyModel,
    g: &dyn ConstraintModel,
    u_bar: &[f64],
    samples: &[Vec<f64>],
) -> Result<LojaFit> {
    fit_exponent_impl(e, g, u_bar, samples, true)
}

/// Same fit against the plain (unprojected) gradient norm, for side-by-side
/// comparison with the refined fit.
pub fn fit_exponent_plain(
    e: &dyn EnergyModel,
    g: &dyn ConstraintModel,
    u_bar: &[f64],
    samples: &[Vec<f64>],
) -> Result<LojaFit> {
    fit_exponent_impl(e, g, u_bar, samples, false)
}

/// `C` at a pinned exponent: the maximal ratio over the sample set, together
/// with the slope-constrained regression diagnostics.
pub fn constant_at_theta(
    e: &dyn EnergyModel,
    g: &dyn ConstraintModel,
    u_bar: &[f64],
    samples: &[Vec<f64>],
    theta: f64,
) -> Result<LojaFit> {
    let mut fit = fit_exponent_impl(e, g, u_bar, samples, true)?;
    let space = e.space();
    let e_bar = e.energy(u_bar)?;
    let mut c = 0.0_f64;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for s in samples {
        let gap = (e.energy(s)? - e_bar).abs();
        let gnorm = space.norm(&project_tangent(e, g, s)?);
        if gap > 1e-14 && gnorm > 1e-14 {
            c = c.max(gap.powf(1.0 - theta) / gnorm);
            xs.push(gap.ln());
            ys.push(gnorm.ln());
        }
    }
    // r2 of the slope-pinned line with free intercept.
    let slope = 1.0 - theta;
    let n = xs.len() as f64;
    let intercept = (ys.iter().sum::<f64>() - slope * xs.iter().sum::<f64>()) / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let ss_tot: f64 = ys.iter().map(|v| (v - mean_y).powi(2)).sum();
    let ss_res: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    fit.theta = theta;
    fit.slope = slope;
    fit.c = c;
    fit.r2 = if ss_tot > 0.0 {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    } else {
        1.0
    };
    fit.in_range_flag = theta > 0.0 && theta <= 0.5 + 1e-9;
    Ok(fit)
}

fn amplitude_grid(sigma: f64) -> impl Iterator<Item = f64> {
    (0..=32).map(move |j| sigma * 10f64.powf(-(j as f64) / 8.0))
}

fn validate_theta_sigma(theta: f64, sigma: f64) -> Result<()> {
    if !(theta > 0.0 && theta <= 0.5 + 1e-12) {
        return Err(Error::Contract(format!(
            "theta must lie in (0, 1/2], got {theta}"
        )));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Contract(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    Ok(())
}

/// Best (smallest valid) constant for the diagonal quadratic on the ball of
/// radius `sigma`: the maximum of `|E|^{1-theta} / |grad E|` over coordinate
/// directions and a log-spaced amplitude grid. For `theta = 1/2` the ratio is
/// amplitude-independent and the maximum is `(2 lambda_min)^{-1/2}`.
pub fn best_constant(model: &SeqQuadModel, theta: f64, sigma: f64) -> Result<f64> {
    validate_theta_sigma(theta, sigma)?;
    let n = model.lambda().len();
    let mut best = 0.0_f64;
    for k in 0..n {
        for t in amplitude_grid(sigma) {
            let mut x = vec![0.0; n];
            x[k] = t;
            let energy = model.energy(&x)?;
            let gnorm = euclid_norm(&model.h_gradient(&x)?);
            if gnorm > 1e-300 {
                best = best.max(energy.abs().powf(1.0 - theta) / gnorm);
            }
        }
    }
    Ok(best)
}

/// One row of a blow-up sweep.
#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub c: f64,
    /// Ratio against the previous row's constant (absent on the first row).
    pub ratio: Option<f64>,
}

/// Table of constants against truncation dimension.
#[derive(Debug, Clone)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
}

impl SweepTable {
    fn from_constants(ns: &[usize], cs: Vec<f64>) -> Self {
        let rows = ns
            .iter()
            .zip(&cs)
            .enumerate()
            .map(|(i, (&n, &c))| SweepRow {
                n,
                c,
                ratio: if i == 0 { None } else { Some(c / cs[i - 1]) },
            })
            .collect();
        Self { rows }
    }

    /// CSV with header `N,C,ratio`; the first ratio cell is empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("N,C,ratio\n");
        for row in &self.rows {
            match row.ratio {
                Some(r) => out.push_str(&format!("{},{:.16e},{:.16e}\n", row.n, row.c, r)),
                None => out.push_str(&format!("{},{:.16e},\n", row.n, row.c)),
            }
        }
        out
    }
}

fn validate_ns(ns: &[usize]) -> Result<()> {
    if ns.is_empty() {
        return Err(Error::Contract(
            "sweep needs a nonempty list of dimensions".into(),
        ));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Contract(
            "sweep dimensions must be strictly ascending".into(),
        ));
    }
    if ns[0] == 0 {
        return Err(Error::Contract("sweep dimensions must be positive".into()));
    }
    Ok(())
}

/// Best constants of the truncated diagonal quadratic against dimension; for
/// summable weight profiles the constants blow up, which is exactly the
/// failure of a uniform gradient inequality at the origin.
pub fn blowup_sweep(ns: &[usize], rule: LambdaRule, theta: f64, sigma: f64) -> Result<SweepTable> {
    validate_ns(ns)?;
    validate_theta_sigma(theta, sigma)?;
    let mut cs = Vec::with_capacity(ns.len());
    for &n in ns {
        let model = SeqQuadModel::new(n, rule);
        cs.push(best_constant(&model, theta, sigma)?);
    }
    Ok(SweepTable::from_constants(ns, cs))
}

/// Same sweep through the chart route: constants of the pulled-back energy of
/// the non-compact constraint-Hessian example, computed with the chart
/// machinery (graph solve plus chart gradient) rather than closed forms.
pub fn pullback_blowup_sweep(
    ns: &[usize],
    rule: LambdaRule,
    theta: f64,
    sigma: f64,
) -> Result<SweepTable> {
    validate_ns(ns)?;
    validate_theta_sigma(theta, sigma)?;
    let mut cs = Vec::with_capacity(ns.len());
    for &n in ns {
        let lambda = lambda_profile(rule, n);
        let (e, g) = constraint_hessian_example(lambda)?;
        let origin = vec![0.0; n + 1];
        let chart = build_chart(&g, &origin)?;
        let d = chart.dim_v0();
        let mut best = 0.0_f64;
        for k in 0..d {
            for t in amplitude_grid(sigma) {
                let mut omega = vec![0.0; d];
                omega[k] = t;
                let f = pullback_energy(&chart, &e, &g, &omega)?;
                let fp = pullback_grad(&chart, &e, &g, &omega)?;
                let gnorm = euclid_norm(&fp);
                if gnorm > 1e-300 {
                    best = best.max(f.abs().powf(1.0 - theta) / gnorm);
                }
            }
        }
        cs.push(best);
    }
    Ok(SweepTable::from_constants(ns, cs))
}

/// Spectrum of the pullback Hessian at the chart base point with the kernel
/// dimension under the `1e-6 * spectral radius` threshold. In the discrete
/// symmetric setting the index-zero property is automatic; the kernel
/// dimension is the meaningful degeneracy diagnostic.
#[derive(Debug, Clone, Serialize)]
pub struct HessianReport {
    pub eigenvalues: Vec<f64>,
    pub kernel_dim: usize,
    pub index_zero_analog: bool,
}

impl HessianReport {
    /// Smallest eigenvalue (the linearized decay rate at a minimum).
    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }
}

pub fn hessian_report(
    chart: &ChartData,
    e: &dyn EnergyModel,
    g: &dyn ConstraintModel,
) -> Result<HessianReport> {
    let omega_bar = vec![0.0; chart.dim_v0()];
    let h = pullback_hessian(chart, e, g, &omega_bar)?;
    let (vals, _) = sym_eigs(&h)?;
    let rho = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let kernel_dim = if rho == 0.0 {
        vals.len()
    } else {
        vals.iter().filter(|v| v.abs() < 1e-6 * rho).count()
    };
    Ok(HessianReport {
        eigenvalues: vals,
        kernel_dim,
        index_zero_analog: true,
    })
}

/// Exponential decay rate of the energy gap over the final resolvable decade
/// of a flow trace: fits `log(E(t) - e_inf)` against `t` and returns
/// `(rate, r2)`, or `None` when fewer than four usable rows remain.
pub fn decay_rate(trace: &FlowTrace, e_inf: f64) -> Option<(f64, f64)> {
    let cutoff = 1e-11 * (1.0 + e_inf.abs());
    let usable: Vec<(f64, f64)> = trace
        .records
        .iter()
        .filter_map(|r| {
            let gap = r.energy - e_inf;
            (gap > cutoff).then_some((r.t, gap))
        })
        .collect();
    if usable.len() < 4 {
        return None;
    }
    let g_lo = usable.iter().map(|&(_, g)| g).fold(f64::INFINITY, f64::min);
    for decades in [1.0, 2.0] {
        let window: Vec<&(f64, f64)> = usable
            .iter()
            .filter(|&&(_, g)| g <= g_lo * 10f64.powf(decades))
            .collect();
        if window.len() >= 4 {
            let x: Vec<f64> = window.iter().map(|&&(t, _)| t).collect();
            let y: Vec<f64> = window.iter().map(|&&(_, g)| g.ln()).collect();
            if let Ok(fit) = linfit(&x, &y) {
                return Some((-fit.slope, fit.r2));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::energy::{FreeConstraint, MonomialModel};

    #[test]
    fn monomial_exponents_exact() {
        // theta = 1/(2p) for E = x^{2p}, recovered to machine precision.
        for (degree, expected) in [(2u32, 0.5), (4, 0.25), (6, 1.0 / 6.0)] {
            let model = MonomialModel::new(degree).unwrap();
            let free = FreeConstraint::for_model(&model);
            let samples: Vec<Vec<f64>> = (1..=12)
                .map(|j| vec![10f64.powf(-(j as f64) / 6.0)])
                .collect();
            let fit = fit_exponent(&model, &free, &[0.0], &samples).unwrap();
            assert!(
                (fit.theta - expected).abs() < 1e-12,
                "degree {degree}: {} vs {expected}",
                fit.theta
            );
            assert!(fit.r2 > 1.0 - 1e-12);
            assert!(fit.in_range_flag);
        }
    }

    #[test]
    fn fitted_constant_certifies_its_sample_set() {
        let model = MonomialModel::new(4).unwrap();
        let free = FreeConstraint::for_model(&model);
        let samples: Vec<Vec<f64>> = (1..=12)
            .map(|j| vec![10f64.powf(-(j as f64) / 3.0)])
            .collect();
        let fit = fit_exponent(&model, &free, &[0.0], &samples).unwrap();
        for s in &samples {
            let gap = model.energy(s).unwrap().abs();
            let gn = model.h_gradient(s).unwrap()[0].abs();
            assert!(gap.powf(1.0 - fit.theta) <= (1.0 + 1e-9) * fit.c * gn);
        }
    }

    #[test]
    fn fit_requires_enough_samples_and_spread() {
        let model = MonomialModel::new(2).unwrap();
        let free = FreeConstraint::for_model(&model);
        let few: Vec<Vec<f64>> = (1..=5).map(|j| vec![0.1 * j as f64]).collect();
        assert!(matches!(
            fit_exponent(&model, &free, &[0.0], &few),
            Err(Error::InsufficientSamples { .. })
        ));
        let narrow: Vec<Vec<f64>> = (0..10).map(|j| vec![0.1 + 1e-4 * j as f64]).collect();
        assert!(matches!(
            fit_exponent(&model, &free, &[0.0], &narrow),
            Err(Error::IllConditionedFit { .. })
        ));
    }

    #[test]
    fn best_constant_closed_form() {
        // (2 lambda_N)^{-1/2} = 2^{(N-1)/2} for the geometric profile.
        for (n, expected) in [(1usize, 1.0), (10, 2f64.powf(4.5)), (20, 2f64.powf(9.5))] {
            let model = SeqQuadModel::new(n, LambdaRule::Geometric);
            let c = best_constant(&model, 0.5, 0.1).unwrap();
            assert!(
                (c - expected).abs() <= 1e-6 * expected,
                "N={n}: {c} vs {expected}"
            );
        }
    }

    #[test]
    fn blowup_geometric_ratio_two() {
        let ns: Vec<usize> = (1..=10).map(|k| 2 * k).collect();
        let table = blowup_sweep(&ns, LambdaRule::Geometric, 0.5, 0.1).unwrap();
        let cs: Vec<f64> = table.rows.iter().map(|r| r.c).collect();
        for w in cs.windows(2) {
            assert!(w[1] > w[0]);
        }
        for row in table.rows.iter().skip(1) {
            let r = row.ratio.unwrap();
            assert!((r - 2.0).abs() < 1e-6, "ratio {r}");
        }
    }

    #[test]
    fn blowup_inverse_square_linear_growth() {
        // lambda_k = k^{-2}: C_N = (2 lambda_N)^{-1/2} = N / sqrt(2).
        let ns = [3usize, 5, 9, 17];
        let table = blowup_sweep(&ns, LambdaRule::InverseSquare, 0.5, 0.1).unwrap();
        for row in &table.rows {
            let expected = row.n as f64 / 2f64.sqrt();
            assert!((row.c - expected).abs() < 1e-6 * expected);
        }
    }

    #[test]
    fn sweep_validation() {
        assert!(blowup_sweep(&[], LambdaRule::Geometric, 0.5, 0.1).is_err());
        assert!(blowup_sweep(&[4, 2], LambdaRule::Geometric, 0.5, 0.1).is_err());
        assert!(blowup_sweep(&[2, 4], LambdaRule::Geometric, 0.9, 0.1).is_err());
    }

    #[test]
    fn seq_quad_kernel_dimension() {
        let mut lambda = lambda_profile(LambdaRule::Geometric, 6);
        lambda[2] = 0.0;
        let model = SeqQuadModel::from_lambda(lambda.clone()).unwrap();
        let free = FreeConstraint::for_model(&model);
        let chart = build_chart(&free, &vec![0.0; 6]).unwrap();
        let report = hessian_report(&chart, &model, &free).unwrap();
        assert!(report.index_zero_analog);
        assert_eq!(report.kernel_dim, 1);
        // Eigenvalues equal the weights (the FD Hessian of a quadratic is
        // exact).
        let mut expected = lambda;
        expected.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (got, want) in report.eigenvalues.iter().zip(&expected) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }
}
