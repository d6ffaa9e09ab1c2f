//! Constellation library and excess kurtosis.

use crate::error::CoreError;
use num_complex::Complex64;

#[derive(Clone, Debug, PartialEq)]
pub enum Constellation {
    Gaussian,
    Qpsk,
    Qam16,
    Qam64,
    Qam256,
    /// Arbitrary points with probabilities (normalized on use).
    Custom(Vec<(Complex64, f64)>),
}

impl Constellation {
    pub fn from_tag(tag: &str) -> Option<Self> {
        match tag.to_ascii_lowercase().as_str() {
            "gaussian" | "gauss" => Some(Self::Gaussian),
            "qpsk" | "4qam" | "4-qam" => Some(Self::Qpsk),
            "16qam" | "16-qam" => Some(Self::Qam16),
            "64qam" | "64-qam" => Some(Self::Qam64),
            "256qam" | "256-qam" => Some(Self::Qam256),
            _ => None,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Self::Gaussian => "gaussian",
            Self::Qpsk => "qpsk",
            Self::Qam16 => "16qam",
            Self::Qam64 => "64qam",
            Self::Qam256 => "256qam",
            Self::Custom(_) => "custom",
        }
    }

    /// Square-QAM side length, if this is a square QAM.
    fn qam_side(&self) -> Option<usize> {
        match self {
            Self::Qpsk => Some(2),
            Self::Qam16 => Some(4),
            Self::Qam64 => Some(8),
            Self::Qam256 => Some(16),
            _ => None,
        }
    }

    /// Equiprobable points scaled to unit mean energy. `None` for Gaussian.
    pub fn points(&self) -> Option<Vec<(Complex64, f64)>> {
        if let Some(m) = self.qam_side() {
            let levels: Vec<f64> = (0..m).map(|i| 2.0 * i as f64 - (m as f64 - 1.0)).collect();
            let p = 1.0 / (m * m) as f64;
            let pts: Vec<(Complex64, f64)> = levels
                .iter()
                .flat_map(|&a| levels.iter().map(move |&b| (Complex64::new(a, b), p)))
                .collect();
            return Some(normalize(pts));
        }
        match self {
            Self::Custom(p) => Some(normalize(p.clone())),
            _ => None,
        }
    }

    pub fn kurtosis(&self) -> Result<f64, CoreError> {
        match self.points() {
            None => Ok(0.0),
            Some(p) => excess_kurtosis(&p),
        }
    }

    /// Excess kurtosis from per-quadrature moments, valid for square QAM
    /// where I and Q are independent and identically distributed.
    pub fn kurtosis_factorized(&self) -> Option<f64> {
        let m = self.qam_side()?;
        let levels: Vec<f64> = (0..m).map(|i| 2.0 * i as f64 - (m as f64 - 1.0)).collect();
        let m2 = levels.iter().map(|a| a * a).sum::<f64>() / m as f64;
        let m4 = levels.iter().map(|a| a.powi(4)).sum::<f64>() / m as f64;
        // E|x|^4 = 2 m4 + 2 m2², E|x|² = 2 m2
        Some((2.0 * m4 + 2.0 * m2 * m2) / (4.0 * m2 * m2) - 2.0)
    }
}

fn normalize(mut pts: Vec<(Complex64, f64)>) -> Vec<(Complex64, f64)> {
    let ptot: f64 = pts.iter().map(|p| p.1).sum();
    let e: f64 = pts.iter().map(|p| p.0.norm_sqr() * p.1).sum::<f64>() / ptot;
    if ptot > 0.0 && e > 0.0 {
        let s = e.sqrt();
        for p in &mut pts {
            p.0 /= s;
            p.1 /= ptot;
        }
    }
    pts
}

/// Φ = E|x|⁴/(E|x|²)² − 2 over a weighted point set.
pub fn excess_kurtosis(points: &[(Complex64, f64)]) -> Result<f64, CoreError> {
    if points.is_empty() {
        return Err(CoreError::Constellation("no points".into()));
    }
    if points.iter().any(|p| p.1 < 0.0 || !p.1.is_finite()) {
        return Err(CoreError::Constellation("negative probability".into()));
    }
    let ptot: f64 = points.iter().map(|p| p.1).sum();
    if ptot <= 0.0 {
        return Err(CoreError::Constellation("probabilities sum to zero".into()));
    }
    let m2: f64 = points.iter().map(|p| p.0.norm_sqr() * p.1).sum::<f64>() / ptot;
    let m4: f64 = points.iter().map(|p| p.0.norm_sqr().powi(2) * p.1).sum::<f64>() / ptot;
    if m2 <= 0.0 {
        return Err(CoreError::Constellation("degenerate (zero energy)".into()));
    }
    Ok(m4 / (m2 * m2) - 2.0)
}
