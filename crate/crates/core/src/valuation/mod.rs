//! Skill values: mean-wage premia, regression prices, windowed trends, and
//! the least-squares core they share with the analysis module.

mod ols;
mod premium;
mod price;
mod trend;

pub use ols::{ols_fit, Design, RegressionFit};
pub use premium::{premium, premium_all, SkillPremium};
pub use price::{price, price_all, ControlDesign, PriceSpec, SkillPrice};
pub use trend::{parse_windows, validate_windows, windowed_premium, TrendSeries, DEFAULT_WINDOWS};

use crate::{Error, Result};

/// Sample Pearson correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::Dimension(format!("lengths {} and {}", x.len(), y.len())));
    }
    if x.len() < 2 {
        return Err(Error::UndefinedCorrelation("need at least two pairs".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("constant vector".into()));
    }
    Ok((sxy / (sxx.sqrt() * syy.sqrt())).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    #[test]
    fn perfect_correlations() {
        let x = [1.0, 2.0, 3.0, 4.5];
        let y: Vec<f64> = x.iter().map(|v| 2.0 * v + 1.0).collect();
        assert!((pearson(&x, &y).unwrap() - 1.0).abs() < 1e-15);
        let z: Vec<f64> = x.iter().map(|v| -v).collect();
        assert!((pearson(&x, &z).unwrap() + 1.0).abs() < 1e-15);
        assert!(matches!(pearson(&x, &[1.0; 4]), Err(Error::UndefinedCorrelation(_))));
        assert!(pearson(&[1.0], &[2.0]).is_err());
    }

    proptest! {
        #[test]
        fn matches_covariance_over_sigmas(pairs in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 3..50)) {
            let x: Vec<f64> = pairs.iter().map(|p| p.0).collect();
            let y: Vec<f64> = pairs.iter().map(|p| p.1).collect();
            let n = x.len() as f64;
            let mx = x.iter().sum::<f64>() / n;
            let my = y.iter().sum::<f64>() / n;
            let cov = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (n - 1.0);
            let sx = (x.iter().map(|a| (a - mx).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let sy = (y.iter().map(|b| (b - my).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
            let r = pearson(&x, &y).unwrap();
            prop_assert!((r - cov / (sx * sy)).abs() < 1e-12);
        }
    }
}
