use crate::problem::{recovery_on, PumpProblem, RecoveryReport};
use crate::PumpError;
use qot_core::{Channel, ChannelPlan, Exec, FiberSpec, PumpSet};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Binning moves net gains by a few mdB; the search aims inside the tolerance
/// so the full-plan check does not fail on that alone.
const SEARCH_MARGIN: f64 = 0.9;

#[derive(Clone, Debug)]
pub struct OptimizerOptions {
    pub seed: u64,
    pub population: usize,
    /// Total solver calls allowed, population and local phase together
    pub max_evaluations: usize,
    /// Objective = Σ P + weight · Σ constraint excess (mW per dB)
    pub penalty_mw_per_db: f64,
    pub differential_weight: f64,
    pub crossover: f64,
    /// Neighbouring channels merged into one (power-summed) channel during the
    /// search; the returned allocation is always re-checked on the full plan
    pub search_bin: usize,
    /// Local search stops once its step falls below this (mW)
    pub min_step_mw: f64,
    pub exec: Exec,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self {
            seed: 1,
            population: 16,
            max_evaluations: 800,
            penalty_mw_per_db: 2000.0,
            differential_weight: 0.6,
            crossover: 0.9,
            search_bin: 3,
            min_step_mw: 0.25,
            exec: Exec::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchPhase {
    Population,
    Local,
}

impl SearchPhase {
    pub fn tag(self) -> &'static str {
        match self {
            SearchPhase::Population => "population",
            SearchPhase::Local => "local",
        }
    }
}

/// Incumbent after one accepted step. `objective` never increases.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceEntry {
    pub evaluations: usize,
    pub phase: SearchPhase,
    pub objective: f64,
    pub cost_mw: f64,
    pub violation_db: f64,
    pub feasible: bool,
}

#[derive(Clone, Debug)]
pub struct PumpOutcome {
    pub powers_mw: Vec<f64>,
    pub pumps: PumpSet,
    pub cost_mw: f64,
    /// Recovery constraint met on the full plan
    pub feasible: bool,
    /// Net gain error per target channel on the full plan
    pub recovery: RecoveryReport,
    pub trace: Vec<TraceEntry>,
    pub evaluations: usize,
}

impl PumpOutcome {
    pub fn trace_csv(&self) -> String {
        let mut s = String::from("evaluations,phase,objective,cost_mw,violation_db,feasible\n");
        for t in &self.trace {
            s.push_str(&format!(
                "{},{},{:.9},{:.9},{:.9},{}\n",
                t.evaluations,
                t.phase.tag(),
                t.objective,
                t.cost_mw,
                t.violation_db,
                t.feasible
            ));
        }
        s
    }
}

#[derive(Clone, Debug)]
struct Candidate {
    x: Vec<f64>,
    cost: f64,
    violation: f64,
    feasible: bool,
    objective: f64,
}

struct Evaluator<'a> {
    problem: &'a PumpProblem,
    fiber: &'a FiberSpec,
    plan: ChannelPlan,
    targets: Vec<usize>,
    tolerance_db: f64,
    weight: f64,
    exec: Exec,
    count: usize,
}

impl Evaluator<'_> {
    fn one(&self, x: &[f64]) -> Candidate {
        let cost = x.iter().sum();
        match recovery_on(&self.problem.pump_set(x), self.fiber, &self.plan, &self.targets) {
            Ok(r) => {
                let (violation, feasible) = r.violation(self.tolerance_db, self.problem.recovery);
                Candidate { x: x.to_vec(), cost, violation, feasible, objective: cost + self.weight * violation }
            }
            // a profile the solver cannot reach is simply rejected
            Err(_) => Candidate {
                x: x.to_vec(),
                cost,
                violation: f64::INFINITY,
                feasible: false,
                objective: f64::INFINITY,
            },
        }
    }

    fn batch(&mut self, xs: Vec<Vec<f64>>) -> Vec<Candidate> {
        self.count += xs.len();
        self.exec.map(&xs, |x| self.one(x))
    }
}

/// Power-summed neighbours, represented by the middle channel of each bin.
fn binned(plan: &ChannelPlan, bin: usize) -> Result<ChannelPlan, PumpError> {
    if bin <= 1 {
        return Ok(plan.clone());
    }
    let ch: Vec<Channel> = plan
        .channels()
        .chunks(bin)
        .map(|c| {
            let mut rep = c[c.len() / 2].clone();
            rep.launch_power_mw = c.iter().map(|x| x.launch_power_mw).sum();
            rep
        })
        .collect();
    Ok(ChannelPlan::new(ch)?)
}

pub fn optimize_pumps(
    problem: &PumpProblem,
    fiber: &FiberSpec,
    plan: &ChannelPlan,
    opts: &OptimizerOptions,
) -> Result<PumpOutcome, PumpError> {
    problem.validate(plan)?;
    if opts.max_evaluations == 0 || opts.population < 4 {
        return Err(PumpError::Problem("need a budget > 0 and a population of at least 4".into()));
    }
    let lo = &problem.min_power_mw;
    let hi = &problem.max_power_mw;
    let n = problem.dim();

    if problem.target_channels(plan).is_empty() {
        // nothing to recover: the unconstrained minimum
        let x = lo.clone();
        let cost = x.iter().sum();
        let trace = vec![TraceEntry {
            evaluations: 0,
            phase: SearchPhase::Population,
            objective: cost,
            cost_mw: cost,
            violation_db: 0.0,
            feasible: true,
        }];
        return Ok(PumpOutcome {
            pumps: problem.pump_set(&x),
            powers_mw: x,
            cost_mw: cost,
            feasible: true,
            recovery: RecoveryReport { channels: vec![], frequency_thz: vec![], error_db: vec![] },
            trace,
            evaluations: 0,
        });
    }

    let search_plan = binned(plan, opts.search_bin)?;
    let targets = problem.target_channels(&search_plan);
    let mut ev = Evaluator {
        problem,
        fiber,
        plan: search_plan,
        targets,
        tolerance_db: problem.tolerance_db * if opts.search_bin > 1 { SEARCH_MARGIN } else { 1.0 },
        weight: opts.penalty_mw_per_db,
        exec: opts.exec,
        count: 0,
    };
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut trace = Vec::new();
    let mut best_feasible: Option<Candidate> = None;
    let note = |c: &Candidate, best: &mut Option<Candidate>| {
        if c.feasible && best.as_ref().map_or(true, |b| c.cost < b.cost) {
            *best = Some(c.clone());
        }
    };
    let record = |trace: &mut Vec<TraceEntry>, c: &Candidate, evals: usize, phase: SearchPhase| {
        trace.push(TraceEntry {
            evaluations: evals,
            phase,
            objective: c.objective,
            cost_mw: c.cost,
            violation_db: c.violation,
            feasible: c.feasible,
        });
    };
    let argmin = |pop: &[Candidate]| {
        (0..pop.len()).fold(0, |b, i| if pop[i].objective < pop[b].objective { i } else { b })
    };

    // differential evolution, rand/1/bin
    let np = opts.population.min(opts.max_evaluations);
    let init: Vec<Vec<f64>> = (0..np)
        .map(|_| (0..n).map(|d| lo[d] + rng.random::<f64>() * (hi[d] - lo[d])).collect())
        .collect();
    let mut pop = ev.batch(init);
    for c in &pop {
        note(c, &mut best_feasible);
    }
    let mut inc = argmin(&pop);
    record(&mut trace, &pop[inc], ev.count, SearchPhase::Population);
    let de_budget = opts.max_evaluations * 3 / 5;
    while ev.count + np <= de_budget {
        let trials: Vec<Vec<f64>> = (0..np)
            .map(|i| {
                let mut pick = || loop {
                    let r = rng.random_range(0..np);
                    if r != i {
                        break r;
                    }
                };
                let (a, b, c) = (pick(), pick(), pick());
                let forced = rng.random_range(0..n);
                (0..n)
                    .map(|d| {
                        if d == forced || rng.random::<f64>() < opts.crossover {
                            let v = pop[a].x[d] + opts.differential_weight * (pop[b].x[d] - pop[c].x[d]);
                            v.clamp(lo[d], hi[d])
                        } else {
                            pop[i].x[d]
                        }
                    })
                    .collect()
            })
            .collect();
        let trial = ev.batch(trials);
        for (i, t) in trial.into_iter().enumerate() {
            note(&t, &mut best_feasible);
            if t.objective <= pop[i].objective {
                pop[i] = t;
            }
        }
        inc = argmin(&pop);
        record(&mut trace, &pop[inc], ev.count, SearchPhase::Population);
    }

    // compass search around the incumbent
    let mut cur = pop.swap_remove(inc);
    let mut step: Vec<f64> = (0..n).map(|d| 0.05 * (hi[d] - lo[d])).collect();
    while ev.count < opts.max_evaluations && step.iter().any(|&s| s >= opts.min_step_mw) {
        let mut polls = Vec::new();
        for d in (0..n).filter(|&d| step[d] >= opts.min_step_mw) {
            for sign in [-1.0, 1.0] {
                let v = (cur.x[d] + sign * step[d]).clamp(lo[d], hi[d]);
                if v != cur.x[d] {
                    let mut x = cur.x.clone();
                    x[d] = v;
                    polls.push(x);
                }
            }
        }
        polls.truncate(opts.max_evaluations - ev.count);
        if polls.is_empty() {
            break;
        }
        let res = ev.batch(polls);
        for c in &res {
            note(c, &mut best_feasible);
        }
        let b = argmin(&res);
        if res[b].objective < cur.objective {
            cur = res[b].clone();
            record(&mut trace, &cur, ev.count, SearchPhase::Local);
        } else {
            for s in &mut step {
                *s *= 0.5;
            }
        }
    }

    let chosen = best_feasible.unwrap_or(cur);
    let pumps = problem.pump_set(&chosen.x);
    let recovery = recovery_on(&pumps, fiber, plan, &problem.target_channels(plan))?;
    let (_, feasible) = recovery.violation(problem.tolerance_db, problem.recovery);
    Ok(PumpOutcome {
        cost_mw: chosen.cost,
        powers_mw: chosen.x,
        pumps,
        feasible,
        recovery,
        trace,
        evaluations: ev.count,
    })
}
