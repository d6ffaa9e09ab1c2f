use crate::profile::PowerProfile;
use crate::system::RamanSystem;
use crate::RamanError;
use nalgebra::{DMatrix, DVector};
use ode_solvers::dop_shared::{OutputType, System};
use ode_solvers::Dopri5;
use qot_core::{ChannelPlan, FiberSpec, PumpSet};

/// ln of the smallest power (mW) accepted before reporting underflow.
const LN_FLOOR: f64 = -69.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BvpMethod {
    /// Shooting, falling back to relaxation if it fails
    Auto,
    Shooting,
    Relaxation,
}

#[derive(Clone, Debug)]
pub struct SolverOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Boundary residual target on ln P of the backward pumps
    pub bvp_tol: f64,
    pub max_iterations: usize,
    pub method: BvpMethod,
    /// z = 0 power guesses (mW) for the solved backward pumps, in solve order
    pub initial_guess_mw: Option<Vec<f64>>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-12,
            bvp_tol: 1e-8,
            max_iterations: 60,
            method: BvpMethod::Auto,
            initial_guess_mw: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub method: BvpMethod,
    pub iterations: usize,
    /// max |ln P_b(L) − ln P_b,inj| (shooting) or last sweep change (relaxation)
    pub residual: f64,
}

pub fn solve_profile(fiber: &FiberSpec, plan: &ChannelPlan, pumps: &PumpSet, z_samples: usize) -> Result<PowerProfile, RamanError> {
    solve_profile_with(fiber, plan, pumps, z_samples, &SolverOptions::default()).map(|r| r.0)
}

pub fn solve_profile_with(
    fiber: &FiberSpec,
    plan: &ChannelPlan,
    pumps: &PumpSet,
    z_samples: usize,
    opts: &SolverOptions,
) -> Result<(PowerProfile, SolveReport), RamanError> {
    if plan.is_empty() {
        return Err(RamanError::Input("empty channel plan".into()));
    }
    if z_samples < 64 {
        return Err(RamanError::Input("need at least 64 z samples".into()));
    }
    let sys = RamanSystem::new(fiber, plan, pumps);
    let l = fiber.span_length_km;
    let bwd = sys.backward_indices();
    if bwd.is_empty() {
        let y0: Vec<f64> = sys.launch_mw.iter().map(|p| p.ln()).collect();
        let (z, y) = integrate_full(&sys, &y0, l, Some(z_samples), opts)?;
        let report = SolveReport { method: BvpMethod::Shooting, iterations: 0, residual: 0.0 };
        return Ok((assemble(&sys, z, y)?, report));
    }
    let shoot = || shooting(&sys, l, z_samples, opts);
    let relax = || relaxation(&sys, l, z_samples, opts);
    let (z, y, report) = match opts.method {
        BvpMethod::Shooting => shoot()?,
        BvpMethod::Relaxation => relax()?,
        BvpMethod::Auto => match shoot() {
            Ok(r) => r,
            Err(_) => relax()?,
        },
    };
    Ok((assemble(&sys, z, y)?, report))
}

fn assemble(sys: &RamanSystem, z: Vec<f64>, y: Vec<Vec<f64>>) -> Result<PowerProfile, RamanError> {
    let n = sys.len();
    let mut power = vec![Vec::with_capacity(z.len()); n];
    for (k, row) in y.iter().enumerate() {
        for i in 0..n {
            if !row[i].is_finite() || row[i] < LN_FLOOR {
                return Err(RamanError::Underflow { component: i, z_km: z[k] });
            }
            power[i].push(row[i].exp());
        }
    }
    Ok(PowerProfile { z_km: z, components: sys.components.clone(), power_mw: power })
}

#[derive(Clone, Copy)]
struct Full<'a>(&'a RamanSystem);

impl System<f64, DVector<f64>> for Full<'_> {
    fn system(&self, _z: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        self.0.rhs(y.as_slice(), dy.as_mut_slice());
    }
}

/// Integrate every component from z = 0 to L. With `dense = Some(n)`, returns
/// n uniformly spaced samples; otherwise only the end point.
fn integrate_full(
    sys: &RamanSystem,
    y0: &[f64],
    l: f64,
    dense: Option<usize>,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), RamanError> {
    run(Full(sys), y0, l, dense, opts)
}

fn run<S: System<f64, DVector<f64>> + Clone>(
    s: S,
    y0: &[f64],
    l: f64,
    dense: Option<usize>,
    opts: &SolverOptions,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), RamanError> {
    // Each output interval is integrated on its own so that every sample is
    // a step end point rather than a dense-output interpolant.
    let n = dense.unwrap_or(2);
    let z: Vec<f64> = (0..n).map(|k| l * k as f64 / (n - 1) as f64).collect();
    let mut y = Vec::with_capacity(n);
    y.push(y0.to_vec());
    for w in z.windows(2) {
        let start = DVector::from_column_slice(y.last().unwrap());
        let mut stepper = Dopri5::new(s.clone(), w[0], w[1], w[1] - w[0], start, opts.rtol, opts.atol);
        stepper.set_output(OutputType::Sparse);
        stepper
            .integrate()
            .map_err(|e| RamanError::Integrator(e.to_string()))?;
        let end = stepper.y_out().last().unwrap();
        if end.iter().any(|x| !x.is_finite()) {
            return Err(RamanError::Integrator("non-finite state".into()));
        }
        y.push(end.as_slice().to_vec());
    }
    Ok((z, y))
}

type Solved = (Vec<f64>, Vec<Vec<f64>>, SolveReport);

fn shooting(sys: &RamanSystem, l: f64, z_samples: usize, opts: &SolverOptions) -> Result<Solved, RamanError> {
    let bwd = sys.backward_indices();
    let nb = bwd.len();
    let loss_guess: Vec<f64> = bwd.iter().map(|&i| sys.launch_mw[i].ln() - sys.alpha[i] * l).collect();
    let guess = match &opts.initial_guess_mw {
        Some(g) if g.len() == nb => g.iter().map(|p| p.max(1e-30).ln()).collect(),
        _ => loss_guess.clone(),
    };
    let (x, iterations, residual) = match newton(sys, l, guess, opts) {
        Ok(r) => r,
        Err(first) => {
            // continuation in pump power from a lightly pumped span
            let mut t_ok = 0.0f64;
            let mut x_ok = loss_guess.clone();
            let mut t = 0.05f64;
            let mut dt = 0.2;
            let mut total = 0;
            loop {
                let shift = if t_ok > 0.0 { (t / t_ok).ln() } else { t.ln() };
                let guess = x_ok.iter().map(|v| v + shift).collect();
                match newton(&scale_pumps(sys, t), l, guess, opts) {
                    Ok((xs, it, res)) => {
                        total += it;
                        if t >= 1.0 {
                            break (xs, total, res);
                        }
                        t_ok = t;
                        x_ok = xs;
                        dt *= 1.5;
                        t = (t_ok + dt).min(1.0);
                    }
                    Err(_) if t_ok > 0.0 && dt > 1e-3 => {
                        dt /= 3.0;
                        t = t_ok + dt;
                    }
                    Err(_) => return Err(first),
                }
            }
        }
    };
    let mut y0 = forward_launch(sys);
    for (k, &i) in bwd.iter().enumerate() {
        y0[i] = x[k];
    }
    let (z, y) = integrate_full(sys, &y0, l, Some(z_samples), opts)?;
    let report = SolveReport { method: BvpMethod::Shooting, iterations, residual };
    Ok((z, y, report))
}

fn forward_launch(sys: &RamanSystem) -> Vec<f64> {
    (0..sys.len())
        .map(|i| if sys.sign[i] > 0.0 { sys.launch_mw[i].ln() } else { 0.0 })
        .collect()
}

fn scale_pumps(sys: &RamanSystem, t: f64) -> RamanSystem {
    let mut s = sys.clone();
    for (c, p) in s.components.iter().zip(s.launch_mw.iter_mut()) {
        if matches!(c.kind, crate::ComponentKind::Pump { .. }) {
            *p *= t;
        }
    }
    s
}

/// Damped Newton on the z = 0 log powers of the backward components.
/// Returns the converged unknowns, the iteration count and the residual.
fn newton(sys: &RamanSystem, l: f64, mut x: Vec<f64>, opts: &SolverOptions) -> Result<(Vec<f64>, usize, f64), RamanError> {
    let bwd = sys.backward_indices();
    let nb = bwd.len();
    let target: Vec<f64> = bwd.iter().map(|&i| sys.launch_mw[i].ln()).collect();
    let base = forward_launch(sys);
    let residual = |x: &[f64]| -> Result<Vec<f64>, RamanError> {
        let mut y0 = base.clone();
        for (k, &i) in bwd.iter().enumerate() {
            y0[i] = x[k];
        }
        let (_, y) = integrate_full(sys, &y0, l, None, opts)?;
        Ok(bwd.iter().enumerate().map(|(k, &i)| y[1][i] - target[k]).collect())
    };
    let norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut r = residual(&x)?;
    let mut iterations = 0;
    while norm(&r) > opts.bvp_tol {
        if iterations >= opts.max_iterations {
            return Err(RamanError::BvpNonConvergence { iterations, residual: norm(&r) });
        }
        iterations += 1;
        let h = 1e-6;
        let mut jac = DMatrix::zeros(nb, nb);
        for j in 0..nb {
            let mut xp = x.clone();
            xp[j] += h;
            let rp = residual(&xp)?;
            for i in 0..nb {
                jac[(i, j)] = (rp[i] - r[i]) / h;
            }
        }
        let rhs = -DVector::from_column_slice(&r);
        let dx = jac
            .lu()
            .solve(&rhs)
            .ok_or(RamanError::BvpNonConvergence { iterations, residual: norm(&r) })?;
        // cap the step in log units, then backtrack
        let cap = dx.amax().max(1e-300);
        let mut lambda = if cap > 3.0 { 3.0 / cap } else { 1.0 };
        let mut accepted = false;
        for _ in 0..30 {
            let xn: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + lambda * d).collect();
            if let Ok(rn) = residual(&xn) {
                if norm(&rn) < norm(&r) {
                    x = xn;
                    r = rn;
                    accepted = true;
                    break;
                }
            }
            lambda *= 0.5;
        }
        if !accepted {
            return Err(RamanError::BvpNonConvergence { iterations, residual: norm(&r) });
        }
    }
    Ok((x, iterations, norm(&r)))
}

/// One direction of components integrated while the others are read from
/// the current iterate (cubic in ln P between grid points).
#[derive(Clone, Copy)]
struct Partial<'a> {
    sys: &'a RamanSystem,
    active: &'a [usize],
    grid: &'a [Vec<f64>],
    dz: f64,
    l: f64,
    /// integrate in s = L − z (backward components)
    reversed: bool,
}

impl System<f64, DVector<f64>> for Partial<'_> {
    fn system(&self, s: f64, y: &DVector<f64>, dy: &mut DVector<f64>) {
        let z = if self.reversed { self.l - s } else { s };
        let k = ((z / self.dz).floor() as usize).min(self.grid.len() - 2);
        // cubic Lagrange through four neighbouring samples, shifted at the ends
        let k0 = k.saturating_sub(1).min(self.grid.len() - 4);
        let u = (z / self.dz) - k0 as f64;
        let w = [
            -(u - 1.0) * (u - 2.0) * (u - 3.0) / 6.0,
            u * (u - 2.0) * (u - 3.0) / 2.0,
            -u * (u - 1.0) * (u - 3.0) / 2.0,
            u * (u - 1.0) * (u - 2.0) / 6.0,
        ];
        let mut all: Vec<f64> = (0..self.sys.len())
            .map(|i| (0..4).map(|m| w[m] * self.grid[k0 + m][i]).sum())
            .collect();
        self.sys.rhs_partial(self.active, y.as_slice(), &mut all, dy.as_mut_slice());
        if self.reversed {
            for v in dy.iter_mut() {
                *v = -*v;
            }
        }
    }
}

fn relaxation(sys: &RamanSystem, l: f64, z_samples: usize, opts: &SolverOptions) -> Result<Solved, RamanError> {
    let fwd = sys.forward_indices();
    let bwd = sys.backward_indices();
    // fine internal grid so that the interpolated partner fields stay accurate
    let refine = 4;
    let k = refine * (z_samples - 1) + 1;
    let dz = l / (k - 1) as f64;
    let mut grid: Vec<Vec<f64>> = (0..k)
        .map(|j| {
            let z = j as f64 * dz;
            (0..sys.len())
                .map(|i| {
                    let p0 = sys.launch_mw[i].ln();
                    if sys.sign[i] > 0.0 {
                        p0 - sys.alpha[i] * z
                    } else {
                        p0 - sys.alpha[i] * (l - z)
                    }
                })
                .collect()
        })
        .collect();
    // One sweep maps the backward log-power grid to an updated one; the fixed
    // point is accelerated with Anderson mixing over the last few sweeps.
    let sweep = |grid: &mut Vec<Vec<f64>>| -> Result<(), RamanError> {
        for (active, reversed) in [(&fwd, false), (&bwd, true)] {
            let y0: Vec<f64> = active.iter().map(|&i| sys.launch_mw[i].ln()).collect();
            let p = Partial { sys, active, grid, dz, l, reversed };
            let (_, y) = run(p, &y0, l, Some(k), opts)?;
            for (j, row) in y.iter().enumerate() {
                let zi = if reversed { k - 1 - j } else { j };
                for (a, &i) in active.iter().enumerate() {
                    grid[zi][i] = row[a];
                }
            }
        }
        Ok(())
    };
    let pack = |grid: &[Vec<f64>]| -> Vec<f64> { grid.iter().flat_map(|r| bwd.iter().map(|&i| r[i])).collect() };
    let unpack = |grid: &mut Vec<Vec<f64>>, x: &[f64]| {
        for (r, chunk) in grid.iter_mut().zip(x.chunks(bwd.len())) {
            for (&i, v) in bwd.iter().zip(chunk) {
                r[i] = *v;
            }
        }
    };
    const DEPTH: usize = 6;
    let mut hist_f: Vec<DVector<f64>> = Vec::new();
    let mut hist_g: Vec<DVector<f64>> = Vec::new();
    let mut x = DVector::from_vec(pack(&grid));
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while change > opts.bvp_tol {
        if iterations >= opts.max_iterations * 4 {
            return Err(RamanError::BvpNonConvergence { iterations, residual: change });
        }
        iterations += 1;
        unpack(&mut grid, x.as_slice());
        let saved = grid.clone();
        if sweep(&mut grid).is_err() {
            // an extrapolated iterate left the physical range: restart plainly
            grid = saved;
            hist_f.clear();
            hist_g.clear();
            let prev = x.clone();
            sweep(&mut grid)?;
            x = DVector::from_vec(pack(&grid));
            change = (&x - prev).amax();
            continue;
        }
        let g = DVector::from_vec(pack(&grid));
        let f = &g - &x;
        change = f.amax();
        hist_f.push(f.clone());
        hist_g.push(g.clone());
        if hist_f.len() > DEPTH + 1 {
            hist_f.remove(0);
            hist_g.remove(0);
        }
        let m = hist_f.len() - 1;
        if m == 0 {
            x = g;
            continue;
        }
        let df = DMatrix::from_fn(f.len(), m, |r, c| hist_f[c + 1][r] - hist_f[c][r]);
        let dg = DMatrix::from_fn(f.len(), m, |r, c| hist_g[c + 1][r] - hist_g[c][r]);
        match df.clone().svd(true, true).solve(&f, 1e-12) {
            Ok(gamma) => x = g - dg * gamma,
            Err(_) => x = g,
        }
    }
    // the last accepted sweep is the returned state
    unpack(&mut grid, x.as_slice());
    sweep(&mut grid)?;
    let z: Vec<f64> = (0..z_samples).map(|j| l * j as f64 / (z_samples - 1) as f64).collect();
    let y: Vec<Vec<f64>> = (0..z_samples).map(|j| grid[j * refine].clone()).collect();
    let report = SolveReport { method: BvpMethod::Relaxation, iterations, residual: change };
    Ok((z, y, report))
}
