use crate::error::{Error, Result};

/// `y ≈ slope * x + intercept` by ordinary least squares.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            got: ys.len(),
        });
    }
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return Err(Error::DegenerateFit(format!(
            "linear fit needs 2 points, got {}",
            xs.len()
        )));
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::DegenerateFit("all abscissae coincide".into()));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).powi(2))
        .sum();
    Ok(LinearFit {
        slope,
        intercept,
        residual,
    })
}

/// `y ≈ amplitude * exp(-rate * x)`, fitted as a line through `(x, ln y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialFit {
    pub amplitude: f64,
    pub rate: f64,
    /// Sum of squared residuals of `ln y`.
    pub log_residual: f64,
}

pub fn fit_exponential(xs: &[f64], ys: &[f64]) -> Result<ExponentialFit> {
    if let Some(bad) = ys.iter().find(|y| y.is_nan() || **y <= 0.0) {
        return Err(Error::DegenerateFit(format!(
            "exponential fit needs positive values, got {bad}"
        )));
    }
    let logs: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let line = linear_fit(xs, &logs)?;
    Ok(ExponentialFit {
        amplitude: line.intercept.exp(),
        rate: -line.slope,
        log_residual: line.residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential_is_recovered() {
        let xs: Vec<f64> = (0..20).map(|i| 3.0 + 0.25 * i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 6.0 * (-1.3 * x).exp()).collect();
        let f = fit_exponential(&xs, &ys).unwrap();
        assert!((f.amplitude - 6.0).abs() < 1e-9);
        assert!((f.rate - 1.3).abs() < 1e-12);
        assert!(fit_exponential(&xs[..2], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn line_through_two_points() {
        let f = linear_fit(&[1.0, 3.0], &[2.0, 8.0]).unwrap();
        assert_eq!((f.slope, f.intercept), (3.0, -1.0));
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }
}
