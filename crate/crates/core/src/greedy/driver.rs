use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{adaptive_mode_count, GreedyConfig, GreedyTrace, IterationFlag, IterationRecord, Scheme, Termination};
use crate::benchmarks::{ParametricFom, TrainingSet};
use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, ReducedBasis};
use crate::reduction::{
    annotate, galerkin_project, grow_nonlinear_basis, output_row, pod_enrich, ErrorIndicator, RomOperators,
};
use crate::selector::{deim_indices, select, subsample_training_set, InterpolationSelection, SelectorKind};

/// Final bases, reduced model and trace of a greedy run.
#[derive(Clone, Debug)]
pub struct GreedyOutcome {
    pub basis: ReducedBasis,
    /// Interpolation basis of the nonlinear term (empty for linear models).
    pub nonlinear_basis: ReducedBasis,
    pub rom: RomOperators,
    pub trace: GreedyTrace,
}

struct Sweep {
    estimates: Vec<f64>,
    /// Approximate output snapshot matrix over the swept set.
    outputs: DenseMatrix,
}

enum StageEnd {
    Tolerance,
    Cap,
    Stagnated,
    Switch,
}

/// The active training set of a stage with its positions in the fine set.
struct Active<'a> {
    set: &'a TrainingSet,
    to_fine: Vec<usize>,
}

struct Engine<'a> {
    fom: &'a ParametricFom,
    cfg: &'a GreedyConfig,
    v: ReducedBasis,
    u: ReducedBasis,
    rom: Option<RomOperators>,
    indicator: Option<ErrorIndicator>,
    iter: usize,
    records: Vec<IterationRecord>,
    forced: bool,
    /// Next parameter (active-set position) and the estimate that chose it.
    next: (usize, Option<f64>),
    eps: f64,
    last_sweep: Option<Sweep>,
    start: Instant,
}

/// Position of the largest value; ties go to the lowest position.
fn ordered_best_two(values: &[f64]) -> (usize, Option<usize>) {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    (order[0], order.get(1).copied())
}

impl<'a> Engine<'a> {
    fn new(fom: &'a ParametricFom, cfg: &'a GreedyConfig, fine: &TrainingSet) -> Result<Self> {
        if fine.is_empty() {
            return Err(Error::Config("training set is empty".into()));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let first = rng.gen_range(0..fine.len());
        Ok(Self {
            fom,
            cfg,
            v: ReducedBasis::empty(fom.dim()),
            u: ReducedBasis::empty(fom.dim()),
            rom: None,
            indicator: None,
            iter: 1,
            records: Vec::new(),
            forced: false,
            next: (first, None),
            eps: 1.0 + cfg.tol,
            last_sweep: None,
            start: Instant::now(),
        })
    }

    fn stream_seed(&self) -> u64 {
        self.cfg.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(self.iter as u64)
    }

    /// Full-order solve at `mu`, basis enrichment and reduced model rebuild.
    fn enrich(&mut self, mu: &crate::benchmarks::ParameterSample, r_pod: usize) -> Result<usize> {
        let traj = self.fom.solve(mu)?;
        let seed = self.stream_seed();
        let e = pod_enrich(&self.v, &traj.states, r_pod, seed)?;
        self.v = e.basis;
        if self.v.is_empty() {
            return Err(Error::RankZero);
        }
        if let Some(f) = &traj.nonlinear {
            let budget = e.added + usize::from(self.u.is_empty());
            if budget > 0 {
                self.u = grow_nonlinear_basis(&self.u, f, budget, self.cfg.deim_floor, seed ^ 1)?.basis;
            }
        }
        let selection = match (&self.fom.nonlinearity, self.u.matrix()) {
            (Some(_), Some(um)) => Some(InterpolationSelection {
                indices: deim_indices(&um)?,
                basis: um,
                method: SelectorKind::Deim,
            }),
            (Some(_), None) => return Err(Error::EmptySelection),
            _ => None,
        };
        let rom = galerkin_project(self.fom, &self.v, selection.as_ref())?;
        self.indicator = Some(ErrorIndicator::new(self.fom, &rom, self.cfg.indicator)?);
        self.rom = Some(rom);
        Ok(e.added)
    }

    fn sweep(&self, set: &TrainingSet) -> Result<Sweep> {
        let rom = self.rom.as_ref().expect("sweep follows an enrichment");
        let ind = self.indicator.as_ref().expect("sweep follows an enrichment");
        let stride = self.cfg.stride;
        let results: Vec<(f64, Vec<f64>)> = set
            .samples()
            .par_iter()
            .enumerate()
            .map(|(i, mu)| {
                annotate(
                    i,
                    ind.evaluate(self.fom, rom, mu).map(|(est, traj)| (est.value, output_row(&traj.outputs, stride))),
                )
            })
            .collect::<Result<_>>()?;
        let rows: Vec<&[f64]> = results.iter().map(|(_, r)| r.as_slice()).collect();
        Ok(Sweep {
            estimates: results.iter().map(|(e, _)| *e).collect(),
            outputs: DenseMatrix::from_rows(&rows)?,
        })
    }

    /// Re-estimates over `active` with the current model and picks its
    /// largest estimate as the next parameter.
    fn restart_on(&mut self, active: &Active<'_>) -> Result<()> {
        let sweep = self.sweep(active.set)?;
        let (best, _) = ordered_best_two(&sweep.estimates);
        self.eps = sweep.estimates[best];
        self.next = (best, None);
        self.forced = false;
        self.last_sweep = Some(sweep);
        Ok(())
    }

    /// Greedy iterations on `active` until the largest estimate is below
    /// `stop`, the iteration cap is passed, or `switch` asks to leave.
    fn run_stage(
        &mut self,
        active: &Active<'_>,
        stage: u8,
        stop: f64,
        cap: usize,
        mut switch: impl FnMut(&mut Self) -> Result<bool>,
    ) -> Result<StageEnd> {
        loop {
            if self.eps <= stop && self.rom.is_some() {
                return Ok(StageEnd::Tolerance);
            }
            if self.iter > cap {
                return Ok(StageEnd::Cap);
            }
            let t0 = Instant::now();
            let (cur, delta) = self.next;
            let mu = active.set.get(cur).clone();
            let r_pod = if self.fom.steady { 1 } else { adaptive_mode_count(self.eps, self.cfg.tol) };
            let added = self.enrich(&mu, r_pod)?;
            let sweep = self.sweep(active.set)?;
            let (best, runner_up) = ordered_best_two(&sweep.estimates);
            let max = sweep.estimates[best];
            let mut flags = Vec::new();
            if added == 0 {
                flags.push(IterationFlag::Deflated);
            } else {
                self.forced = false;
            }
            let mut stagnated = false;
            let mut pick = best;
            if best == cur && added == 0 {
                match (self.forced, runner_up) {
                    (false, Some(second)) => {
                        self.forced = true;
                        pick = second;
                        flags.push(IterationFlag::ForcedRunnerUp);
                    }
                    _ => stagnated = true,
                }
            }
            self.records.push(IterationRecord {
                iteration: self.iter,
                stage,
                parameter_index: active.to_fine[cur],
                mu: mu.values.clone(),
                delta,
                r_pod: added,
                r: self.v.dim(),
                r_ei: self.u.dim(),
                max_estimate: max,
                orthogonality_error: self.v.orthogonality_error(),
                selection_len: None,
                flags,
                seconds: t0.elapsed().as_secs_f64(),
            });
            self.iter += 1;
            self.eps = max;
            self.next = (pick, Some(sweep.estimates[pick]));
            self.last_sweep = Some(sweep);
            if stagnated {
                return Ok(StageEnd::Stagnated);
            }
            if switch(self)? {
                return Ok(StageEnd::Switch);
            }
        }
    }

    fn select_on_outputs(&self) -> Result<InterpolationSelection> {
        let sweep = self.last_sweep.as_ref().expect("selection follows a sweep");
        select(self.cfg.selector, &sweep.outputs, &self.cfg.selector_config())
    }

    fn finish(
        self,
        scheme: Scheme,
        termination: Termination,
        subsampled: Option<(TrainingSet, Vec<usize>, InterpolationSelection)>,
        fallback: bool,
    ) -> GreedyOutcome {
        let (subsampled, selection, selector_output) = match subsampled {
            Some((set, indices, sel)) => (Some(set), Some(indices), Some(sel)),
            None => (None, None, None),
        };
        let converged = termination == Termination::Converged;
        GreedyOutcome {
            basis: self.v,
            nonlinear_basis: self.u,
            rom: self.rom.expect("at least one enrichment"),
            trace: GreedyTrace {
                scheme,
                seed: self.cfg.seed,
                records: self.records,
                subsampled,
                selection,
                selector_output,
                termination,
                converged,
                stage_switch_fallback: fallback,
                final_estimate: self.eps,
                offline_seconds: self.start.elapsed().as_secs_f64(),
            },
        }
    }
}

fn termination_of(end: &StageEnd) -> Termination {
    match end {
        StageEnd::Tolerance => Termination::Converged,
        StageEnd::Stagnated => Termination::Stagnated,
        StageEnd::Cap | StageEnd::Switch => Termination::IterationCap,
    }
}

fn fine_active(fine: &TrainingSet) -> Active<'_> {
    Active {
        set: fine,
        to_fine: (0..fine.len()).collect(),
    }
}

/// Standard greedy on a fixed training set.
pub fn pod_greedy_fixed(fom: &ParametricFom, train: &TrainingSet, cfg: &GreedyConfig) -> Result<GreedyOutcome> {
    cfg.validate(Scheme::Fixed)?;
    let mut eng = Engine::new(fom, cfg, train)?;
    let active = fine_active(train);
    let end = eng.run_stage(&active, 1, cfg.tol, cfg.max_iterations, |_| Ok(false))?;
    Ok(eng.finish(Scheme::Fixed, termination_of(&end), None, false))
}

fn stage_two(
    mut eng: Engine<'_>,
    scheme: Scheme,
    fine: &TrainingSet,
    selection: InterpolationSelection,
    fallback: bool,
) -> Result<GreedyOutcome> {
    let cfg = eng.cfg;
    let sub = subsample_training_set(fine, &selection)?;
    let to_fine: Vec<usize> = sub
        .samples()
        .iter()
        .map(|mu| fine.position(mu).expect("subset of the fine set"))
        .collect();
    let active = Active { set: &sub, to_fine };
    eng.restart_on(&active)?;
    let end = eng.run_stage(&active, 2, cfg.tol, cfg.max_iterations, |_| Ok(false))?;
    let indices = active.to_fine.clone();
    Ok(eng.finish(scheme, termination_of(&end), Some((sub, indices, selection)), fallback))
}

/// Coarse-tolerance switch: greedy on the fine set until `tol_coarse`, then
/// subsample from the approximate outputs and continue to `tol`.
pub fn scheme1(fom: &ParametricFom, fine: &TrainingSet, cfg: &GreedyConfig) -> Result<GreedyOutcome> {
    cfg.validate(Scheme::Scheme1)?;
    let mut eng = Engine::new(fom, cfg, fine)?;
    let active = fine_active(fine);
    let end = eng.run_stage(&active, 1, cfg.tol_coarse, cfg.max_iterations, |_| Ok(false))?;
    if !matches!(end, StageEnd::Tolerance) {
        return Ok(eng.finish(Scheme::Scheme1, termination_of(&end), None, false));
    }
    let selection = eng.select_on_outputs()?;
    if let Some(last) = eng.records.last_mut() {
        last.selection_len = Some(selection.len());
    }
    stage_two(eng, Scheme::Scheme1, fine, selection, false)
}

/// Selection-length switch: run the selector after every stage-1 iteration
/// and move on once two consecutive selections have equal length.
pub fn scheme2(fom: &ParametricFom, fine: &TrainingSet, cfg: &GreedyConfig) -> Result<GreedyOutcome> {
    cfg.validate(Scheme::Scheme2)?;
    let mut eng = Engine::new(fom, cfg, fine)?;
    let active = fine_active(fine);
    let mut last: Option<InterpolationSelection> = None;
    let half = (cfg.max_iterations / 2).max(1);
    let end = eng.run_stage(&active, 1, cfg.tol, half, |e| {
        let sel = e.select_on_outputs()?;
        if let Some(rec) = e.records.last_mut() {
            rec.selection_len = Some(sel.len());
        }
        let stagnant = super::stagnation_check(last.as_ref(), &sel);
        last = Some(sel);
        Ok(stagnant)
    })?;
    let fallback = match end {
        StageEnd::Switch | StageEnd::Tolerance => false,
        StageEnd::Cap => true,
        StageEnd::Stagnated => return Ok(eng.finish(Scheme::Scheme2, Termination::Stagnated, None, false)),
    };
    let selection = last.expect("at least one stage-1 iteration ran");
    stage_two(eng, Scheme::Scheme2, fine, selection, fallback)
}

pub fn run_scheme(scheme: Scheme, fom: &ParametricFom, fine: &TrainingSet, cfg: &GreedyConfig) -> Result<GreedyOutcome> {
    match scheme {
        Scheme::Fixed => pod_greedy_fixed(fom, fine, cfg),
        Scheme::Scheme1 => scheme1(fom, fine, cfg),
        Scheme::Scheme2 => scheme2(fom, fine, cfg),
    }
}
