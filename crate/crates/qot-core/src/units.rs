//! Unit conversions. Everything crossing an I/O boundary goes through here.

/// Speed of light in vacuum (m/s).
pub const C_M_PER_S: f64 = 299_792_458.0;

/// c expressed in nm·THz, so that f[THz] = C_NM_THZ / λ[nm].
pub const C_NM_THZ: f64 = C_M_PER_S * 1e-3;

pub fn nm_to_thz(nm: f64) -> f64 {
    C_NM_THZ / nm
}

pub fn thz_to_nm(thz: f64) -> f64 {
    C_NM_THZ / thz
}

/// Width in THz of a wavelength interval `dl_nm` centred on `nm`.
pub fn nm_width_to_thz(nm: f64, dl_nm: f64) -> f64 {
    nm_to_thz(nm - dl_nm / 2.0) - nm_to_thz(nm + dl_nm / 2.0)
}

pub fn dbm_to_mw(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0)
}

pub fn mw_to_dbm(mw: f64) -> f64 {
    10.0 * mw.log10()
}

pub fn db_to_lin(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn lin_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// dB/km (power) to 1/km (power attenuation, P ~ exp(-a z)).
pub fn db_per_km_to_neper(db: f64) -> f64 {
    db * std::f64::consts::LN_10 / 10.0
}

/// GHz to THz.
pub fn ghz(x: f64) -> f64 {
    x * 1e-3
}
