use crate::{SsfmConfig, SsfmError};
use num_complex::Complex64;
use qot_core::{ChannelPlan, Constellation};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::FftPlanner;

/// Frequency grid shared by the simulation and the transceivers. Bin spacing
/// is the symbol rate over the sequence length, so every channel covers
/// exactly `nsym` bins.
pub(crate) struct Grid {
    pub n: usize,
    pub nsym: usize,
    pub sps: usize,
    pub f_sim_thz: f64,
    /// Optical frequency of every FFT bin (THz)
    pub freq_thz: Vec<f64>,
    /// Nearest channel of every bin
    pub owner: Vec<usize>,
    pub centre_bin: Vec<isize>,
    pub power_mw: Vec<f64>,
}

impl Grid {
    pub fn new(plan: &ChannelPlan, cfg: &SsfmConfig) -> Result<Self, SsfmError> {
        let ch = plan.channels();
        if ch.is_empty() || ch.len() > 9 {
            return Err(SsfmError::Config("between 1 and 9 channels".into()));
        }
        let rs = ch[0].symbol_rate_gbd * 1e-3;
        if ch.iter().any(|c| (c.symbol_rate_gbd * 1e-3 - rs).abs() > 1e-9 * rs) {
            return Err(SsfmError::Config("all channels must share one symbol rate".into()));
        }
        let (nsym, sps) = (cfg.symbols_per_channel, cfg.samples_per_symbol);
        let n = nsym * sps;
        let df = rs / nsym as f64;
        let (f0, f1) = (ch[0].frequency_thz, ch[ch.len() - 1].frequency_thz);
        let f_sim = f0 + (0.5 * (f1 - f0) / df).round() * df;
        let mut centre_bin = Vec::with_capacity(ch.len());
        for (i, c) in ch.iter().enumerate() {
            let b = (c.frequency_thz - f_sim) / df;
            if (b - b.round()).abs() > 1e-3 {
                return Err(SsfmError::Config(format!(
                    "channel {i} is {:.4} bins off the simulation grid; spacing must be a multiple of {:.6} GHz",
                    b - b.round(),
                    df * 1e3
                )));
            }
            centre_bin.push(b.round() as isize);
        }
        if centre_bin.windows(2).any(|w| w[1] - w[0] < nsym as isize) {
            return Err(SsfmError::Config("channels overlap".into()));
        }
        let occupied = f1 - f0 + rs;
        if occupied * cfg.oversampling > rs * sps as f64 * (1.0 + 1e-12) {
            return Err(SsfmError::Aliasing {
                occupied_ghz: occupied * 1e3,
                oversampling: cfg.oversampling,
                sim_ghz: rs * sps as f64 * 1e3,
            });
        }
        let signed = |m: usize| if m < n / 2 { m as isize } else { m as isize - n as isize };
        let freq_thz: Vec<f64> = (0..n).map(|m| f_sim + signed(m) as f64 * df).collect();
        let owner = (0..n)
            .map(|m| {
                let k = signed(m);
                (0..ch.len()).min_by_key(|&c| (centre_bin[c] - k).unsigned_abs()).unwrap()
            })
            .collect();
        Ok(Self {
            n,
            nsym,
            sps,
            f_sim_thz: f_sim,
            freq_thz,
            owner,
            centre_bin,
            power_mw: ch.iter().map(|c| c.launch_power_mw).collect(),
        })
    }

    fn bin(&self, k: isize) -> usize {
        k.rem_euclid(self.n as isize) as usize
    }

    fn half(&self) -> std::ops::Range<isize> {
        -(self.nsym as isize / 2)..self.nsym as isize / 2
    }

    /// Multiplexed spectrum of sinc-shaped channels carrying `symbols`.
    pub fn transmit(&self, symbols: &[Vec<Complex64>], planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
        let fft = planner.plan_fft_forward(self.nsym);
        let mut spec = vec![Complex64::new(0.0, 0.0); self.n];
        for (c, x) in symbols.iter().enumerate() {
            let mut xs = x.clone();
            fft.process(&mut xs);
            let scale = self.power_mw[c].sqrt() * self.sps as f64;
            for k in self.half() {
                spec[self.bin(self.centre_bin[c] + k)] = xs[k.rem_euclid(self.nsym as isize) as usize] * scale;
            }
        }
        spec
    }

    /// Rectangular matched filter and symbol-rate sampling of channel `c`.
    pub fn receive(&self, spec: &[Complex64], c: usize, planner: &mut FftPlanner<f64>) -> Vec<Complex64> {
        let ifft = planner.plan_fft_inverse(self.nsym);
        let mut y = vec![Complex64::new(0.0, 0.0); self.nsym];
        let scale = 1.0 / (self.power_mw[c].sqrt() * self.sps as f64 * self.nsym as f64);
        for k in self.half() {
            y[k.rem_euclid(self.nsym as isize) as usize] = spec[self.bin(self.centre_bin[c] + k)] * scale;
        }
        ifft.process(&mut y);
        y
    }
}

/// Unit-mean-energy symbols drawn from the channel's constellation.
pub(crate) fn draw_symbols(c: &Constellation, n: usize, rng: &mut ChaCha8Rng) -> Vec<Complex64> {
    match c.points() {
        None => {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            (0..n)
                .map(|_| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    Complex64::new(re * s, im * s)
                })
                .collect()
        }
        Some(pts) => {
            let w = WeightedIndex::new(pts.iter().map(|p| p.1)).expect("constellation weights are positive");
            (0..n).map(|_| pts[w.sample(rng)].0).collect()
        }
    }
}
