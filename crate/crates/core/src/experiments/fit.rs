use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares line `y ≈ slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub points: usize,
}

/// Ordinary least squares through `(x, y)` pairs.
///
/// Needs two distinct abscissae. `r2` is clamped to `[0, 1]` and equals 1
/// when the ordinates are constant.
pub fn fit_line(pts: &[(f64, f64)]) -> Result<FitResult> {
    if pts.len() < 2 {
        return Err(Error::Domain(format!("a line fit needs 2 points, got {}", pts.len())));
    }
    if pts.iter().any(|(x, y)| !x.is_finite() || !y.is_finite()) {
        return Err(Error::Domain("non-finite point in line fit".into()));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("line fit with a single abscissa".into()));
    }
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Ok(FitResult {
        slope,
        intercept: my - slope * mx,
        r2,
        points: pts.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = fit_line(&[(0.0, 1.0), (1.0, -1.0), (2.0, -3.0)]).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15);
        assert_eq!((f.r2, f.points), (1.0, 3));
    }

    #[test]
    fn noisy_line_has_r2_below_one() {
        let f = fit_line(&[(0.0, 0.0), (1.0, 1.0), (2.0, 0.5), (3.0, 2.0)]).unwrap();
        assert!(f.r2 > 0.0 && f.r2 < 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[(1.0, 1.0)]).is_err());
        assert!(fit_line(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
        assert!(fit_line(&[(1.0, f64::NAN), (2.0, 2.0)]).is_err());
    }
}
