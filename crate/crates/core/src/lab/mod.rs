//! Resource-bounded complexity lab.
//!
//! [`ApproxTable`] dovetails every program over the toy machine: stage `t`
//! runs all programs of length at most `t` for `t` steps (both clipped by the
//! configured caps), so the recorded minimal program lengths are upper bounds
//! on `C(x|y)` and `K(x)` that only ever decrease. [`brute_force_c`] is an
//! independent exhaustive oracle for the same capped quantity.

pub mod machine;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::bits::BitString;
use crate::dyadic::Dyadic;
pub use machine::{
    assemble, literal_program, run_program, Discipline, InvalidReason, MachineSpec, Op, RunOutcome,
    MACHINE_ID, MACHINE_VERSION, PLAIN_LITERAL_HEADER, PREFIX_LITERAL_OVERHEAD,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    #[error("stage {stage} needs {needed} runs, over the work budget of {budget}")]
    WorkBudget { stage: u64, needed: u64, budget: u64 },
    #[error("brute force needs more than {limit} runs")]
    RunLimit { limit: u64 },
    #[error(transparent)]
    ZeroBudget(#[from] machine::ZeroBudget),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabConfig {
    pub max_output: usize,
    /// Longest unconditional program enumerated.
    pub max_len: usize,
    pub step_cap: u64,
    /// Non-empty conditions for plain runs; the empty condition is implicit.
    pub cond_pool: Vec<BitString>,
    /// Longest program enumerated under a non-empty condition.
    pub cond_max_len: usize,
    /// Also enumerate prefix-free programs (unconditionally).
    pub prefix: bool,
    /// Maximum program runs in one stage.
    pub work_budget: u64,
}

impl Default for LabConfig {
    fn default() -> Self {
        Self {
            max_output: MachineSpec::DEFAULT_MAX_OUTPUT,
            max_len: 12,
            step_cap: 12,
            cond_pool: Vec::new(),
            cond_max_len: 4,
            prefix: true,
            work_budget: 50_000_000,
        }
    }
}

impl LabConfig {
    /// Stage after which nothing new can be found.
    pub fn final_stage(&self) -> u64 {
        (self.max_len as u64).max(self.step_cap).max(self.cond_max_len as u64).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProgramRecord {
    pub stage: u64,
    pub discipline: Discipline,
    pub program: BitString,
    pub condition: BitString,
    pub output: BitString,
    pub steps: u64,
}

impl ProgramRecord {
    /// One line of the discovery log.
    pub fn log_line(&self) -> String {
        format!(
            "stage {} {} prog={} cond={} out={} steps={}",
            self.stage, self.discipline, self.program, self.condition, self.output, self.steps
        )
    }
}

#[derive(Debug, Clone)]
struct Job {
    discipline: Discipline,
    cond: usize,
    program: BitString,
}

/// Upper approximations of plain and prefix complexity, improved stage by
/// stage.
#[derive(Debug, Clone)]
pub struct ApproxTable {
    config: LabConfig,
    conditions: Vec<BitString>,
    stage: u64,
    budget: u64,
    pending: Vec<Job>,
    plain_bounds: BTreeMap<(BitString, BitString), usize>,
    prefix_bounds: BTreeMap<BitString, usize>,
    discovered: Vec<ProgramRecord>,
    kraft_accum: Dyadic,
    prefix_halting: u64,
}

impl ApproxTable {
    pub fn new(config: LabConfig) -> Self {
        let mut conditions = vec![BitString::new()];
        let mut pool = config.cond_pool.clone();
        pool.sort();
        pool.dedup();
        conditions.extend(pool.into_iter().filter(|c| !c.is_empty()));
        Self {
            config,
            conditions,
            stage: 0,
            budget: 0,
            pending: Vec::new(),
            plain_bounds: BTreeMap::new(),
            prefix_bounds: BTreeMap::new(),
            discovered: Vec::new(),
            kraft_accum: Dyadic::zero(),
            prefix_halting: 0,
        }
    }

    pub fn config(&self) -> &LabConfig {
        &self.config
    }

    pub fn stage(&self) -> u64 {
        self.stage
    }

    /// True once further stages cannot change any bound.
    pub fn is_exhausted(&self) -> bool {
        self.stage >= self.config.final_stage() && self.pending.is_empty()
    }

    pub fn conditions(&self) -> &[BitString] {
        &self.conditions
    }

    fn length_cap(&self, discipline: Discipline, cond: usize) -> usize {
        match discipline {
            Discipline::PrefixFree => self.config.max_len,
            Discipline::Plain if cond == 0 => self.config.max_len,
            Discipline::Plain => self.config.cond_max_len,
        }
    }

    fn spec(&self, discipline: Discipline) -> MachineSpec {
        MachineSpec { discipline, max_output: self.config.max_output }
    }

    /// Runs stage `t + 1` and returns the records that strictly improved a
    /// bound, in canonical order. On a work-budget error the table is left
    /// unchanged.
    pub fn dovetail_stage(&mut self) -> Result<Vec<ProgramRecord>, LabError> {
        let t = self.stage + 1;
        let budget = t.min(self.config.step_cap.max(1));
        let mut jobs: Vec<Job> = if budget > self.budget { self.pending.clone() } else { Vec::new() };
        let mut disciplines = vec![Discipline::Plain];
        if self.config.prefix {
            disciplines.push(Discipline::PrefixFree);
        }
        let fresh_len = (t - 1) as usize;
        for &d in &disciplines {
            let conds = if d == Discipline::Plain { self.conditions.len() } else { 1 };
            for cond in 0..conds {
                // Stage 1 also covers the empty program.
                let lens = if t == 1 { 0..=1 } else { fresh_len + 1..=fresh_len + 1 };
                for len in lens.filter(|&l| l <= self.length_cap(d, cond)) {
                    jobs.extend(BitString::all_of_len(len).map(|program| Job { discipline: d, cond, program }));
                }
            }
        }
        if jobs.len() as u64 > self.config.work_budget {
            return Err(LabError::WorkBudget { stage: t, needed: jobs.len() as u64, budget: self.config.work_budget });
        }
        jobs.sort_by(|a, b| (a.discipline, a.cond, &a.program).cmp(&(b.discipline, b.cond, &b.program)));

        let outcomes = self.run_jobs(&jobs, budget);

        let mut pending = Vec::new();
        let mut improved = Vec::new();
        for (job, outcome) in jobs.into_iter().zip(outcomes) {
            match outcome {
                RunOutcome::Halted { output, steps, .. } => {
                    let len = job.program.len();
                    let better = match job.discipline {
                        Discipline::Plain => {
                            let key = (output.clone(), self.conditions[job.cond].clone());
                            improve(&mut self.plain_bounds, key, len)
                        }
                        Discipline::PrefixFree => {
                            self.kraft_accum += &Dyadic::pow2_neg(len as u32);
                            self.prefix_halting += 1;
                            improve(&mut self.prefix_bounds, output.clone(), len)
                        }
                    };
                    if better {
                        improved.push(ProgramRecord {
                            stage: t,
                            discipline: job.discipline,
                            program: job.program,
                            condition: self.conditions[job.cond].clone(),
                            output,
                            steps,
                        });
                    }
                }
                RunOutcome::OutOfBudget if budget < self.config.step_cap => pending.push(job),
                RunOutcome::OutOfBudget | RunOutcome::Invalid(_) => {}
            }
        }
        self.pending = pending;
        self.stage = t;
        self.budget = budget;
        self.discovered.extend(improved.iter().cloned());
        Ok(improved)
    }

    #[cfg(feature = "parallel")]
    fn run_jobs(&self, jobs: &[Job], budget: u64) -> Vec<RunOutcome> {
        use rayon::prelude::*;
        let specs = [self.spec(Discipline::Plain), self.spec(Discipline::PrefixFree)];
        jobs.par_iter()
            .with_min_len(256)
            .map(|j| run_job(&specs, &self.conditions, j, budget))
            .collect()
    }

    #[cfg(not(feature = "parallel"))]
    fn run_jobs(&self, jobs: &[Job], budget: u64) -> Vec<RunOutcome> {
        let specs = [self.spec(Discipline::Plain), self.spec(Discipline::PrefixFree)];
        jobs.iter().map(|j| run_job(&specs, &self.conditions, j, budget)).collect()
    }

    /// Runs stages until the table is exhausted or `max_stages` is reached.
    pub fn run_to(&mut self, max_stages: u64) -> Result<(), LabError> {
        while self.stage < max_stages && !self.is_exhausted() {
            self.dovetail_stage()?;
        }
        Ok(())
    }

    pub fn approx_plain(&self, x: &BitString, y: &BitString) -> Option<usize> {
        self.plain_bounds.get(&(x.clone(), y.clone())).copied()
    }

    pub fn approx_prefix(&self, x: &BitString) -> Option<usize> {
        self.prefix_bounds.get(x).copied()
    }

    pub fn plain_bounds(&self) -> &BTreeMap<(BitString, BitString), usize> {
        &self.plain_bounds
    }

    pub fn prefix_bounds(&self) -> &BTreeMap<BitString, usize> {
        &self.prefix_bounds
    }

    /// Sum of `2^-|p|` over every prefix-free program found halting so far.
    pub fn kraft_accum(&self) -> &Dyadic {
        &self.kraft_accum
    }

    pub fn prefix_halting(&self) -> u64 {
        self.prefix_halting
    }

    pub fn discovered(&self) -> &[ProgramRecord] {
        &self.discovered
    }

    pub fn export_log(&self) -> String {
        let mut s = String::new();
        for r in &self.discovered {
            let _ = writeln!(s, "{}", r.log_line());
        }
        s
    }
}

fn run_job(specs: &[MachineSpec; 2], conditions: &[BitString], job: &Job, budget: u64) -> RunOutcome {
    let spec = match job.discipline {
        Discipline::Plain => &specs[0],
        Discipline::PrefixFree => &specs[1],
    };
    run_program(spec, &job.program, &conditions[job.cond], budget).expect("stage budget is positive")
}

fn improve<K: Ord>(map: &mut BTreeMap<K, usize>, key: K, len: usize) -> bool {
    match map.get(&key) {
        Some(&b) if b <= len => false,
        _ => {
            map.insert(key, len);
            true
        }
    }
}

/// Parses one discovery-log line back into a record.
pub fn parse_log_line(line: &str) -> Option<ProgramRecord> {
    let mut it = line.split(' ');
    if it.next()? != "stage" {
        return None;
    }
    let stage = it.next()?.parse().ok()?;
    let discipline = Discipline::parse(it.next()?)?;
    let mut field = |name: &str| it.next()?.strip_prefix(name).map(str::to_string);
    let program = field("prog=")?.parse().ok()?;
    let condition = field("cond=")?.parse().ok()?;
    let output = field("out=")?.parse().ok()?;
    let steps = field("steps=")?.parse().ok()?;
    if it.next().is_some() {
        return None;
    }
    Some(ProgramRecord { stage, discipline, program, condition, output, steps })
}

/// Exhaustive minimum: the shortest program of length at most `max_len`
/// that prints `x` on condition `y` within `step_cap` steps.
pub fn brute_force_c(
    spec: &MachineSpec,
    x: &BitString,
    y: &BitString,
    max_len: usize,
    step_cap: u64,
    run_limit: u64,
) -> Result<Option<usize>, LabError> {
    let mut runs = 0u64;
    for len in 0..=max_len {
        for p in BitString::all_of_len(len) {
            runs += 1;
            if runs > run_limit {
                return Err(LabError::RunLimit { limit: run_limit });
            }
            if run_program(spec, &p, y, step_cap)?.output() == Some(x) {
                return Ok(Some(len));
            }
        }
    }
    Ok(None)
}
