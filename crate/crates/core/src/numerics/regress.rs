use crate::error::{Error, Result};

/// Least-squares line fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y = slope * x + intercept` with the coefficient of
/// determination. Needs at least 3 points and non-degenerate abscissas.
pub fn linfit(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::Contract("linfit: mismatched lengths".into()));
    }
    if x.len() < 3 {
        return Err(Error::Contract(format!(
            "linfit needs at least 3 points, got {}",
            x.len()
        )));
    }
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mean_x).powi(2)).sum();
    let sxy: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (a - mean_x) * (b - mean_y))
        .sum();
    let syy: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let x_scale: f64 = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if sxx <= (1e-14 * (1.0 + x_scale)).powi(2) * n {
        return Err(Error::Contract(
            "linfit: degenerate abscissas (all x equal)".into(),
        ));
    }
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let ss_res = syy - slope * sxy;
    let r2 = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok(LineFit {
        slope,
        intercept,
        r2,
    })
}
