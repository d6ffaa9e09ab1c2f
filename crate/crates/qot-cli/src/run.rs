//! Subcommands: each one computes a set of artifacts plus warnings.

use crate::config::{BackendTag, Format, Loaded, PolarizationTag, RecoveryTag, SsfmGain};
use crate::output::{Artifact, Cell, Meta};
use crate::suite::{compare_case, random_suite, SuiteCase};
use crate::CliError;
use qot_core::units::{mw_to_dbm, nm_to_thz, thz_to_nm};
use qot_core::Exec;
use qot_fit::{derive_terms, fit_profile_with, DerivedTerms, FitOptions, FittedCoeffs};
use qot_nli::{evaluate_closed, evaluate_integral, snr_assemble, FittedLink, IntegralOptions, NliParams, Polarization};
use qot_pump::{optimize_pumps, OptimizerOptions, PumpProblem, Recovery};
use qot_raman::PowerProfile;
use qot_ssfm::{simulate_link, GainSource, SsfmConfig};
use std::path::PathBuf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Solve the Raman power profile of one span
    Profile,
    /// Fit the per-channel profile model
    Fit,
    /// Per-channel NLI coefficients and SNR
    Nli,
    /// Search backward pump powers for net-zero gain over a band
    OptimizePumps,
    /// Closed form against the quadrature oracle
    Validate,
    /// Split-step simulation of a small comb
    Ssfm,
}

impl Command {
    pub fn tag(self) -> &'static str {
        match self {
            Command::Profile => "profile",
            Command::Fit => "fit",
            Command::Nli => "nli",
            Command::OptimizePumps => "optimize-pumps",
            Command::Validate => "validate",
            Command::Ssfm => "ssfm",
        }
    }
}

/// Command-line values that replace config entries.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub backend: Option<BackendTag>,
    pub spans: Option<usize>,
    pub seed: Option<u64>,
    pub format: Option<Format>,
}

impl Loaded {
    /// Apply overrides and re-validate; the hash follows the effective config.
    pub fn with_overrides(self, o: &Overrides) -> Result<Loaded, CliError> {
        let mut c = self.config;
        if let Some(d) = &o.output {
            c.output.dir = d.clone();
        }
        if let Some(b) = o.backend {
            c.nli.backend = b;
        }
        if let Some(n) = o.spans {
            c.link.spans = n;
        }
        if let Some(s) = o.seed {
            c.seed = s;
        }
        if let Some(f) = o.format {
            c.output.format = f;
        }
        c.load(&self.base_dir)
    }
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub warnings: Vec<String>,
    /// Backend tag written into every artifact header
    pub backend: String,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub files: Vec<PathBuf>,
    pub warnings: Vec<String>,
}

/// Compute and write the artifacts of `cmd`.
pub fn run(cmd: Command, loaded: &Loaded, exec: Exec) -> Result<Report, CliError> {
    let out = compute(cmd, loaded, exec)?;
    let meta = Meta { config_sha256: loaded.sha256.clone(), backend: out.backend };
    let cfg = &loaded.config.output;
    let dir = if cfg.dir.is_absolute() { cfg.dir.clone() } else { loaded.base_dir.join(&cfg.dir) };
    let files = out.artifacts.iter().map(|a| a.write(&dir, cfg.format, &meta)).collect::<Result<_, _>>()?;
    Ok(Report { files, warnings: out.warnings })
}

pub fn compute(cmd: Command, loaded: &Loaded, exec: Exec) -> Result<Outcome, CliError> {
    match cmd {
        Command::Profile => profile(loaded),
        Command::Fit => fit(loaded, exec),
        Command::Nli => nli(loaded, exec),
        Command::OptimizePumps => optimize(loaded, exec),
        Command::Validate => validate(loaded, exec),
        Command::Ssfm => ssfm(loaded, exec),
    }
}

fn nm(f_thz: f64) -> Cell {
    Cell::Num(thz_to_nm(f_thz))
}

fn solve(loaded: &Loaded) -> Result<PowerProfile, CliError> {
    let l = &loaded.link;
    Ok(qot_raman::solve_profile(&l.fiber, &l.plan, &l.pumps, loaded.config.fit.z_samples)?)
}

fn fitted(loaded: &Loaded, profile: &PowerProfile, exec: Exec) -> Result<(FittedCoeffs, Vec<String>), CliError> {
    let l = &loaded.link;
    let ceiling = loaded.config.fit.ceiling_db;
    let coeffs = fit_profile_with(profile, &l.plan, &l.pumps, &FitOptions { ceiling_db: ceiling, exec })?;
    let bad = coeffs.channels.iter().filter(|c| !c.within_ceiling).count();
    let mut warnings = Vec::new();
    if bad > 0 {
        warnings.push(format!(
            "fit: {bad} channel(s) above the {ceiling} dB RMS ceiling, worst {:.3} dB",
            coeffs.max_rms_db()
        ));
    }
    Ok((coeffs, warnings))
}

fn terms_of(loaded: &Loaded, exec: Exec) -> Result<(DerivedTerms, Vec<String>), CliError> {
    let (coeffs, warnings) = fitted(loaded, &solve(loaded)?, exec)?;
    let l = &loaded.link;
    Ok((derive_terms(&coeffs, &l.pumps, &l.fiber, &l.plan)?, warnings))
}

fn params(loaded: &Loaded) -> NliParams {
    let pol = match loaded.config.nli.polarization {
        PolarizationTag::Dual => Polarization::Dual,
        PolarizationTag::Single => Polarization::Single,
    };
    NliParams::from_fiber(&loaded.link.fiber, loaded.link.n_spans).with_polarization(pol)
}

fn profile(loaded: &Loaded) -> Result<Outcome, CliError> {
    let p = solve(loaded)?;
    let mut cols = vec!["z_km".to_string()];
    cols.extend(p.components.iter().map(|c| format!("{}_dbm", c.label())));
    let mut surface = Artifact { name: "profile".into(), columns: cols, rows: vec![] };
    for (k, z) in p.z_km.iter().enumerate() {
        let mut row = vec![Cell::Num(*z)];
        row.extend(p.power_mw.iter().map(|c| Cell::Num(mw_to_dbm(c[k]))));
        surface.push(row);
    }
    let mut gain = Artifact::new("net_gain", &["channel", "wavelength_nm", "net_gain_db"]);
    for ch in 0..loaded.link.plan.len() {
        let c = p.signal_component(ch).expect("every channel is solved");
        let w = &p.power_mw[c];
        gain.push(vec![ch.into(), nm(p.components[c].frequency_thz), (mw_to_dbm(w[w.len() - 1]) - mw_to_dbm(w[0])).into()]);
    }
    Ok(Outcome { artifacts: vec![surface, gain], warnings: vec![], backend: "none".into() })
}

fn fit(loaded: &Loaded, exec: Exec) -> Result<Outcome, CliError> {
    let (coeffs, warnings) = fitted(loaded, &solve(loaded)?, exec)?;
    let mut a = Artifact::new(
        "fit",
        &["channel", "wavelength_nm", "frequency_thz", "alpha_per_km", "alpha_f", "alpha_b", "c_f", "c_b", "rms_db", "within_ceiling"],
    );
    for c in &coeffs.channels {
        a.push(vec![
            c.channel.into(),
            nm(c.frequency_thz),
            c.frequency_thz.into(),
            c.alpha.into(),
            c.alpha_f.into(),
            c.alpha_b.into(),
            c.c_f.into(),
            c.c_b.into(),
            c.rms_db.into(),
            c.within_ceiling.into(),
        ]);
    }
    Ok(Outcome { artifacts: vec![a], warnings, backend: "none".into() })
}

fn flag_text(f: &qot_nli::Flags) -> String {
    let mut v = Vec::new();
    if f.zero_phase {
        v.push("zero_phase");
    }
    if f.low_dispersion {
        v.push("low_dispersion");
    }
    if f.negative_total {
        v.push("negative_total");
    }
    v.join("|")
}

fn nli(loaded: &Loaded, exec: Exec) -> Result<Outcome, CliError> {
    let (terms, mut warnings) = terms_of(loaded, exec)?;
    let l = &loaded.link;
    let p = params(loaded);
    let cfg = &loaded.config;
    let r = match cfg.nli.backend {
        BackendTag::Closed => evaluate_closed(&l.plan, &terms, &p, exec)?,
        BackendTag::Integral => {
            let opts = IntegralOptions { rel_tol: cfg.nli.rel_tol, ..Default::default() };
            evaluate_integral(&l.plan, &FittedLink { terms: &terms }, &p, &opts, exec)?
        }
    };
    let mut a = Artifact::new(
        "nli",
        &[
            "wavelength_nm",
            "eta_gn",
            "eta_corr",
            "snr_nli_db",
            "channel",
            "frequency_thz",
            "power_dbm",
            "eta_total",
            "snr_total_db",
            "flags",
        ],
    );
    for c in &r.channels {
        let pw = l.plan.channels()[c.channel].launch_power_mw;
        let total = match c.eta_total > 0.0 {
            true => snr_assemble(c.eta_total, pw, cfg.link.snr_ase_db, cfg.link.snr_trx_db)?.snr_total_db,
            false => f64::NAN,
        };
        a.push(vec![
            nm(c.frequency_thz),
            c.eta_gn.into(),
            c.eta_corr.into(),
            c.snr_nli_db.into(),
            c.channel.into(),
            c.frequency_thz.into(),
            mw_to_dbm(pw).into(),
            c.eta_total.into(),
            total.into(),
            flag_text(&c.flags).into(),
        ]);
    }
    let flagged = r.channels.iter().filter(|c| c.flags.any()).count();
    if flagged > 0 {
        warnings.push(format!("nli: {flagged} channel(s) flagged as model extrapolations"));
    }
    Ok(Outcome { artifacts: vec![a], warnings, backend: cfg.nli.backend.backend().tag().into() })
}

fn optimize(loaded: &Loaded, exec: Exec) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    let o = cfg.optimize.as_ref().ok_or_else(|| CliError::Config("optimize-pumps needs an [optimize] section".into()))?;
    let wavelengths = match o.wavelengths_nm.is_empty() {
        true => cfg.pumps.iter().map(|p| p.wavelength_nm).collect(),
        false => o.wavelengths_nm.clone(),
    };
    let mut problem = PumpProblem::new(wavelengths, o.max_power_mw, (nm_to_thz(o.band_nm[1]), nm_to_thz(o.band_nm[0])), o.tolerance_db);
    problem.recovery = match o.recovery {
        RecoveryTag::PerChannel => Recovery::PerChannel,
        RecoveryTag::BandAverage => Recovery::BandAverage,
    };
    let opts = OptimizerOptions {
        seed: cfg.seed,
        population: o.population,
        max_evaluations: o.max_evaluations,
        search_bin: o.search_bin,
        exec,
        ..Default::default()
    };
    let l = &loaded.link;
    let out = optimize_pumps(&problem, &l.fiber, &l.plan, &opts)?;

    let mut pumps = Artifact::new("pumps", &["pump", "wavelength_nm", "power_mw", "at_cap"]);
    for (i, (w, p)) in problem.wavelengths_nm.iter().zip(&out.powers_mw).enumerate() {
        pumps.push(vec![i.into(), (*w).into(), (*p).into(), (*p >= problem.max_power_mw[i]).into()]);
    }
    let mut rec = Artifact::new("recovery", &["channel", "wavelength_nm", "net_gain_db", "within_tolerance"]);
    let r = &out.recovery;
    for ((ch, f), e) in r.channels.iter().zip(&r.frequency_thz).zip(&r.error_db) {
        rec.push(vec![(*ch).into(), nm(*f), (*e).into(), (e.abs() <= o.tolerance_db).into()]);
    }
    let mut trace = Artifact::new("trace", &["evaluations", "phase", "objective", "cost_mw", "violation_db", "feasible"]);
    for t in &out.trace {
        trace.push(vec![
            t.evaluations.into(),
            t.phase.tag().into(),
            t.objective.into(),
            t.cost_mw.into(),
            t.violation_db.into(),
            t.feasible.into(),
        ]);
    }
    let mut warnings = Vec::new();
    if !out.feasible {
        warnings.push(format!(
            "optimize-pumps: no feasible allocation found, worst channel {:.3} dB vs {} dB tolerance",
            r.max_abs_db(),
            o.tolerance_db
        ));
    }
    Ok(Outcome { artifacts: vec![pumps, rec, trace], warnings, backend: "none".into() })
}

fn validate(loaded: &Loaded, exec: Exec) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    let l = &loaded.link;
    let tol = cfg.validate.tolerance_db;
    let z = cfg.fit.z_samples;
    let opts = IntegralOptions { rel_tol: cfg.nli.rel_tol, ..Default::default() };
    let own = SuiteCase { id: 0, fiber: l.fiber.clone(), plan: l.plan.clone(), pumps: l.pumps.clone(), n_spans: l.n_spans };
    let mut a = Artifact::new(
        "validate",
        &["channel", "wavelength_nm", "eta_gn_closed", "eta_gn_integral", "gn_gap_db", "eta_corr_closed", "eta_corr_integral", "corr_gap_db"],
    );
    let mut warnings = Vec::new();
    let rows = compare_case(&own, z, &opts, exec)?;
    for c in &rows {
        a.push(vec![
            c.channel.into(),
            nm(c.frequency_thz),
            c.gn_closed.into(),
            c.gn_integral.into(),
            c.gn_gap_db().into(),
            c.corr_closed.into(),
            c.corr_integral.into(),
            c.corr_gap_db().into(),
        ]);
    }
    let worst = |rows: &[crate::CaseComparison]| {
        rows.iter().fold((0.0f64, 0.0f64), |(g, c), r| (g.max(r.gn_gap_db().abs()), c.max(r.corr_gap_db().abs())))
    };
    let (g, c) = worst(&rows);
    if g.max(c) > tol {
        warnings.push(format!("validate: configured link differs by {:.3} dB (gn) / {:.3} dB (corr)", g, c));
    }
    let mut artifacts = vec![a];
    if cfg.validate.suite_cases > 0 {
        let mut s = Artifact::new(
            "suite",
            &["case", "channels", "spacing_ghz", "symbol_rate_gbd", "constellation", "pumps", "spans", "max_gn_gap_db", "max_corr_gap_db", "within_tolerance"],
        );
        let cases = random_suite(cfg.validate.suite_cases, cfg.seed);
        let results = exec.map(&cases, |case| compare_case(case, z, &opts, Exec::Sequential));
        let mut failing = 0;
        for (case, r) in cases.iter().zip(results) {
            let (g, c) = worst(&r?);
            let ch = case.plan.channels();
            let spacing = if ch.len() > 1 { (ch[1].frequency_thz - ch[0].frequency_thz) * 1e3 } else { 0.0 };
            let ok = g.max(c) <= tol;
            failing += usize::from(!ok);
            s.push(vec![
                case.id.into(),
                ch.len().into(),
                ((spacing * 2.0).round() / 2.0).into(),
                ch[0].symbol_rate_gbd.into(),
                ch[0].constellation.tag().into(),
                case.pumps.len().into(),
                case.n_spans.into(),
                g.into(),
                c.into(),
                ok.into(),
            ]);
        }
        if failing > 0 {
            warnings.push(format!("validate: {failing} suite case(s) outside {tol} dB"));
        }
        artifacts.push(s);
    }
    Ok(Outcome { artifacts, warnings, backend: "closed,integral".into() })
}

fn ssfm(loaded: &Loaded, exec: Exec) -> Result<Outcome, CliError> {
    let cfg = &loaded.config;
    let l = &loaded.link;
    let sim = SsfmConfig {
        symbols_per_channel: cfg.ssfm.symbols,
        samples_per_symbol: cfg.ssfm.samples_per_symbol,
        max_phase_rad: cfg.ssfm.max_phase_rad,
        seed: cfg.seed,
        ..Default::default()
    };
    let mut warnings = Vec::new();
    let (out, terms) = match cfg.ssfm.gain {
        SsfmGain::Profile => {
            let profile = solve(loaded)?;
            let (coeffs, w) = fitted(loaded, &profile, exec)?;
            warnings.extend(w);
            let terms = derive_terms(&coeffs, &l.pumps, &l.fiber, &l.plan)?;
            (simulate_link(&sim, &l.fiber, &l.plan, GainSource::Profile(&profile), l.n_spans)?, terms)
        }
        SsfmGain::Loss => (
            simulate_link(&sim, &l.fiber, &l.plan, GainSource::FiberLoss, l.n_spans)?,
            DerivedTerms::loss_only(&l.fiber, &l.plan),
        ),
    };
    // the simulated field is scalar
    let p = NliParams::from_fiber(&l.fiber, l.n_spans).with_polarization(Polarization::Single);
    let model = evaluate_closed(&l.plan, &terms, &p, exec)?;
    let mut a = Artifact::new("ssfm", &["channel", "wavelength_nm", "snr_ssfm_db", "snr_model_db", "gap_db"]);
    for ((c, snr), m) in out.channels.iter().zip(out.snr_nli_db()?).zip(&model.channels) {
        let gap = snr - m.snr_nli_db;
        if !(gap.abs() <= 1.0) {
            warnings.push(format!("ssfm: channel {} differs from the closed form by {gap:.2} dB", c.channel));
        }
        a.push(vec![c.channel.into(), nm(m.frequency_thz), snr.into(), m.snr_nli_db.into(), gap.into()]);
    }
    let mid = &out.channels[out.channels.len() / 2];
    let mut k = Artifact::new("constellation", &["channel", "index", "tx_re", "tx_im", "rx_re", "rx_im"]);
    for (i, (x, y)) in mid.tx.iter().zip(&mid.rx).enumerate() {
        k.push(vec![mid.channel.into(), i.into(), x.re.into(), x.im.into(), y.re.into(), y.im.into()]);
    }
    Ok(Outcome { artifacts: vec![a, k], warnings, backend: "closed".into() })
}

