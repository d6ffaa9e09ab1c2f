use qot_core::{dispersion_to_beta, FiberSpec};
use std::f64::consts::PI;

/// Field polarization convention for the NLI prefactors.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Polarization {
    /// Manakov dual-polarization: 16/27 (Gaussian) and 80/81 (correction)
    #[default]
    Dual,
    /// Scalar single-polarization field, as in the split-step validator
    Single,
}

impl Polarization {
    pub fn gaussian_prefactor(self) -> f64 {
        match self {
            Polarization::Dual => 16.0 / 27.0,
            Polarization::Single => 2.0,
        }
    }

    pub fn correction_prefactor(self) -> f64 {
        match self {
            Polarization::Dual => 80.0 / 81.0,
            Polarization::Single => 4.0,
        }
    }
}

/// Scalars shared by every NLI evaluation on one link.
///
/// Frequencies entering the phase terms are offsets from `f_ref_thz`, the
/// frequency at which β2 and β3 are defined.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NliParams {
    /// ps²/km
    pub beta2: f64,
    /// ps³/km
    pub beta3: f64,
    pub f_ref_thz: f64,
    /// 1/(W km)
    pub gamma: f64,
    pub span_length_km: f64,
    pub n_spans: usize,
    pub polarization: Polarization,
}

impl NliParams {
    pub fn from_fiber(fiber: &FiberSpec, n_spans: usize) -> Self {
        let (beta2, beta3) = dispersion_to_beta(fiber.dispersion_d, fiber.dispersion_slope, fiber.reference_wavelength_nm);
        Self {
            beta2,
            beta3,
            f_ref_thz: fiber.reference_frequency_thz(),
            gamma: fiber.gamma,
            span_length_km: fiber.span_length_km,
            n_spans,
            polarization: Polarization::Dual,
        }
    }

    pub fn with_polarization(mut self, p: Polarization) -> Self {
        self.polarization = p;
        self
    }

    /// ñ: 0 for a single span, n otherwise.
    pub fn n_tilde(&self) -> f64 {
        if self.n_spans == 1 {
            0.0
        } else {
            self.n_spans as f64
        }
    }

    fn rel(&self, f: f64) -> f64 {
        f - self.f_ref_thz
    }

    /// φ(f1, f2, f3) = −4π²(f1−f3)(f2−f3)[β2 + πβ3(f1+f2)]  (1/km)
    pub fn phi(&self, f1: f64, f2: f64, f3: f64) -> f64 {
        -4.0 * PI * PI * (f1 - f3) * (f2 - f3) * (self.beta2 + PI * self.beta3 * (self.rel(f1) + self.rel(f2)))
    }

    /// φ_{i,k} = −4π²(f_k−f_i)[β2 + πβ3(f_i+f_k)]: XPM phase per unit offset in the COI.
    pub fn phi_xpm(&self, fi: f64, fk: f64) -> f64 {
        -4.0 * PI * PI * (fk - fi) * (self.beta2 + PI * self.beta3 * (self.rel(fi) + self.rel(fk)))
    }

    /// φ̃_k = −4π²[β2 + πβ3(f_i+f_k)] L
    pub fn phi_tilde(&self, fi: f64, fk: f64) -> f64 {
        -4.0 * PI * PI * (self.beta2 + PI * self.beta3 * (self.rel(fi) + self.rel(fk))) * self.span_length_km
    }

    /// |φ_i| = 4π²|β2 + 2πβ3 f_i|: SPM phase per unit (u v).
    pub fn phi_spm(&self, fi: f64) -> f64 {
        4.0 * PI * PI * (self.beta2 + 2.0 * PI * self.beta3 * self.rel(fi)).abs()
    }
}
