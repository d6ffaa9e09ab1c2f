use crate::grid::{draw_symbols, Grid};
use crate::{ChannelSymbols, GainSource, SsfmConfig, SsfmError, SsfmOutput};
use num_complex::Complex64;
use qot_core::{ChannelPlan, Exec, FiberSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;
use std::f64::consts::PI;

/// Per-channel ρ(z) over one span.
struct Rho<'a> {
    gain: GainSource<'a>,
    alpha: Vec<f64>,
    component: Vec<usize>,
}

impl<'a> Rho<'a> {
    fn new(gain: GainSource<'a>, fiber: &FiberSpec, plan: &ChannelPlan) -> Result<Self, SsfmError> {
        let f = plan.frequencies();
        let mut component = Vec::new();
        if let GainSource::Profile(p) = gain {
            if (p.span_length() - fiber.span_length_km).abs() > 1e-9 * fiber.span_length_km {
                return Err(SsfmError::Config("profile span length differs from the fiber's".into()));
            }
            for (ch, &fc) in f.iter().enumerate() {
                let c = p
                    .signal_component(ch)
                    .filter(|&c| (p.components[c].frequency_thz - fc).abs() <= 1e-9 * fc)
                    .ok_or_else(|| SsfmError::Config(format!("profile has no signal at channel {ch}")))?;
                component.push(c);
            }
        }
        Ok(Self { gain, alpha: f.iter().map(|&x| fiber.alpha(x)).collect(), component })
    }

    fn at(&self, ch: usize, z: f64) -> f64 {
        match self.gain {
            GainSource::Lossless => 1.0,
            GainSource::FiberLoss => (-self.alpha[ch] * z).exp(),
            GainSource::Profile(p) => {
                let c = self.component[ch];
                p.interp_power(c, z) / p.power_mw[c][0]
            }
        }
    }

    /// Field amplitude factor per channel between z1 and z2.
    fn amplitude(&self, z1: f64, z2: f64) -> Vec<f64> {
        (0..self.alpha.len()).map(|c| (self.at(c, z2) / self.at(c, z1)).sqrt()).collect()
    }
}

/// Propagate over `n_spans` identical spans, each followed by ideal lumped
/// gain and gain flattening back to the launch powers, then compensate the
/// accumulated dispersion and detect every channel. `n_spans = 0` is
/// back-to-back.
pub fn simulate_link(
    cfg: &SsfmConfig,
    fiber: &FiberSpec,
    plan: &ChannelPlan,
    gain: GainSource,
    n_spans: usize,
) -> Result<SsfmOutput, SsfmError> {
    cfg.validate()?;
    let grid = Grid::new(plan, cfg)?;
    let rho = Rho::new(gain, fiber, plan)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let tx: Vec<Vec<Complex64>> = plan
        .channels()
        .iter()
        .map(|c| draw_symbols(&c.constellation, grid.nsym, &mut rng))
        .collect();

    let mut planner = FftPlanner::new();
    let mut spec = grid.transmit(&tx, &mut planner);
    let fwd = planner.plan_fft_forward(grid.n);
    let inv = planner.plan_fft_inverse(grid.n);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];

    // propagation constant relative to the simulation centre, constant and
    // group-delay terms removed (1/km)
    let (b2, b3) = fiber.betas();
    let w_ref = 2.0 * PI * fiber.reference_frequency_thz();
    let ws = 2.0 * PI * grid.f_sim_thz - w_ref;
    let beta = |w: f64| b2 / 2.0 * w * w + b3 / 6.0 * w * w * w;
    let b1s = b2 * ws + b3 / 2.0 * ws * ws;
    let beta_rel: Vec<f64> = grid
        .freq_thz
        .iter()
        .map(|&f| {
            let w = 2.0 * PI * f - w_ref;
            beta(w) - beta(ws) - b1s * (w - ws)
        })
        .collect();

    let gamma = fiber.gamma * 1e-3;
    let l = fiber.span_length_km;
    let inv_n = 1.0 / grid.n as f64;
    let linear = |spec: &mut [Complex64], dz: f64, amp: &[f64]| {
        for (m, s) in spec.iter_mut().enumerate() {
            *s *= Complex64::from_polar(amp[grid.owner[m]], -beta_rel[m] * dz);
        }
    };
    let mean_power = |spec: &[Complex64]| spec.iter().map(|s| s.norm_sqr()).sum::<f64>() * inv_n * inv_n;
    let launch_power_mw = mean_power(&spec);
    let mut span_end_power_mw = Vec::with_capacity(n_spans);
    let mut steps = 0;
    for _ in 0..n_spans {
        let mut field = spec.clone();
        inv.process_with_scratch(&mut field, &mut scratch);
        let mut peak = field.iter().fold(0.0f64, |m, a| m.max(a.norm_sqr())) * inv_n * inv_n;
        let mut z = 0.0;
        let mut span_steps = 0;
        while z < l {
            let mut h = (l - z).min(cfg.max_step_km);
            if gamma > 0.0 && peak > 0.0 {
                h = h.min(cfg.max_phase_rad / (gamma * peak));
            }
            if l - z - h < 1e-9 * l {
                h = l - z;
            }
            span_steps += 1;
            if span_steps > cfg.max_steps_per_span {
                return Err(SsfmError::StepBudget(cfg.max_steps_per_span));
            }
            let zm = z + 0.5 * h;
            linear(&mut spec, 0.5 * h, &rho.amplitude(z, zm));
            if gamma > 0.0 {
                inv.process_with_scratch(&mut spec, &mut scratch);
                peak = 0.0;
                for a in spec.iter_mut() {
                    *a *= inv_n;
                    let p = a.norm_sqr();
                    peak = peak.max(p);
                    *a *= Complex64::from_polar(1.0, -gamma * p * h);
                }
                fwd.process_with_scratch(&mut spec, &mut scratch);
            }
            let z2 = if h == l - z { l } else { z + h };
            linear(&mut spec, 0.5 * h, &rho.amplitude(zm, z2));
            z = z2;
        }
        steps += span_steps;
        span_end_power_mw.push(mean_power(&spec));
        // lumped amplifier and gain-flattening filter
        let restore: Vec<f64> = (0..plan.len()).map(|c| rho.at(c, l).sqrt().recip()).collect();
        for (m, s) in spec.iter_mut().enumerate() {
            *s *= restore[grid.owner[m]];
        }
    }
    // ideal dispersion compensation
    let total = l * n_spans as f64;
    for (m, s) in spec.iter_mut().enumerate() {
        *s *= Complex64::from_polar(1.0, beta_rel[m] * total);
    }
    let channels = tx
        .into_iter()
        .enumerate()
        .map(|(c, tx)| ChannelSymbols { channel: c, rx: grid.receive(&spec, c, &mut planner), tx })
        .collect();
    Ok(SsfmOutput { channels, seed: cfg.seed, steps, launch_power_mw, span_end_power_mw })
}

/// Independent simulations, run on the worker pool when `exec` allows.
pub fn simulate_many(
    jobs: &[(SsfmConfig, ChannelPlan)],
    fiber: &FiberSpec,
    gain: GainSource,
    n_spans: usize,
    exec: Exec,
) -> Vec<Result<SsfmOutput, SsfmError>> {
    exec.map(jobs, |(cfg, plan)| simulate_link(cfg, fiber, plan, gain, n_spans))
}
