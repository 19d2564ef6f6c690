use crate::error::{Error, Result};

/// Energies at or below this level count as converged and are left out of fits.
pub const DECAY_FLOOR: f64 = 1e-14;

/// Least-squares fit `log E = c - 2 sigma zeta'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub sigma: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Stations above the floor that entered the fit.
    pub points: usize,
}

/// Fits the decay rate of `energies` sampled at `stations`.
///
/// `sigma` is half the negated slope of `log E` since `E` is a squared norm. Fewer than four
/// stations above [`DECAY_FLOOR`] is a [`Error::DegenerateFit`] (the tail has already converged).
pub fn fit_decay_rate(stations: &[f64], energies: &[f64]) -> Result<DecayFit> {
    fit_decay_rate_above(stations, energies, DECAY_FLOOR)
}

/// [`fit_decay_rate`] with a custom floor.
pub fn fit_decay_rate_above(stations: &[f64], energies: &[f64], floor: f64) -> Result<DecayFit> {
    if !(floor >= 0.0) {
        return Err(Error::Analysis(format!("decay floor must be >= 0, got {floor}")));
    }
    if stations.len() != energies.len() {
        return Err(Error::Analysis(format!("{} stations but {} energies", stations.len(), energies.len())));
    }
    let pts: Vec<(f64, f64)> = stations.iter().zip(energies).filter(|(_, e)| **e > floor).map(|(s, e)| (*s, e.ln())).collect();
    if pts.len() < 4 {
        return Err(Error::DegenerateFit(format!("{} of {} stations above the floor {floor:e}", pts.len(), stations.len())));
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::DegenerateFit("stations coincide".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy > 0.0 { (sxy * sxy) / (sxx * syy) } else { 1.0 };
    Ok(DecayFit { sigma: -0.5 * slope, intercept, r_squared, points: pts.len() })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let z: Vec<f64> = (0..8).map(|i| 1.0 + 0.5 * i as f64).collect();
        let e: Vec<f64> = z.iter().map(|z| 3.0 * (-2.0 * z).exp()).collect();
        let f = fit_decay_rate(&z, &e).unwrap();
        assert!((f.sigma - 1.0).abs() < 1e-10);
        assert!((f.intercept - 3f64.ln()).abs() < 1e-10);
        assert!((f.r_squared - 1.0).abs() < 1e-12);
    }

    #[test]
    fn floor_and_degenerate_cases() {
        let z = [1.0, 2.0, 3.0, 4.0, 5.0];
        let e = [1e-3, 1e-6, 1e-9, 1e-15, 1e-16];
        assert!(matches!(fit_decay_rate(&z, &e), Err(Error::DegenerateFit(_))));
        assert!(matches!(fit_decay_rate(&z, &[1e-3; 4]), Err(Error::Analysis(_))));
        let f = fit_decay_rate(&z, &[1e-3, 1e-5, 1e-7, 1e-9, 1e-20]).unwrap();
        assert_eq!(f.points, 4);
    }
}
