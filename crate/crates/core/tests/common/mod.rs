#![allow(dead_code)]

use raindrop::{BoxDomain, Objective, Observer, Raindrop, Step, Sweep};

/// One raindrop's transition during one sweep.
#[derive(Debug, Clone)]
pub struct Event {
    pub iteration: usize,
    pub index: usize,
    pub before: Raindrop,
    pub after: Raindrop,
    pub step: Step,
}

/// Keeps every transition of a run.
#[derive(Debug, Default)]
pub struct Recorder {
    pub start: Vec<Raindrop>,
    pub events: Vec<Event>,
    pub velocity: Vec<f64>,
}

impl Observer for Recorder {
    fn on_start(&mut self, drops: &[Raindrop], _values: &[f64]) {
        self.start = drops.to_vec();
    }

    fn on_sweep(&mut self, sweep: &Sweep<'_>) {
        for (i, step) in sweep.steps.iter().enumerate() {
            self.events.push(Event {
                iteration: sweep.iteration,
                index: i,
                before: sweep.before[i].clone(),
                after: sweep.after[i].clone(),
                step: *step,
            });
        }
    }
}

/// Order-only view of a step: which direction won and whether the drop moved.
pub fn decision(step: &Step) -> (bool, Option<raindrop::Direction>) {
    match *step {
        Step::Moved { direction, .. } => (true, Some(direction)),
        Step::Halved { best, .. } => (false, best.map(|(d, _)| d)),
    }
}

/// Checks every per-step invariant of a recorded run, returning the first violation.
pub fn check_invariants(
    rec: &Recorder,
    f: &Objective,
    domain: &BoxDomain,
    v0: f64,
) -> Result<(), String> {
    for d in &rec.start {
        if !domain.contains(d.position()) {
            return Err(format!("initial position {:?} infeasible", d.position()));
        }
    }
    for e in &rec.events {
        let ctx = format!("iteration {} raindrop {}", e.iteration, e.index);
        if !domain.contains(e.after.position()) {
            return Err(format!(
                "{ctx}: position {:?} left the box",
                e.after.position()
            ));
        }
        let law = v0 / 2f64.powi(e.after.halvings() as i32);
        if e.after.speed() != law || e.after.speed() <= 0.0 {
            return Err(format!(
                "{ctx}: speed {} != v0/2^{} = {law}",
                e.after.speed(),
                e.after.halvings()
            ));
        }
        if e.after.speed() > e.before.speed() {
            return Err(format!("{ctx}: speed increased"));
        }
        let moved = e.after.position() != e.before.position();
        let halved = e.after.halvings() == e.before.halvings() + 1;
        match e.step {
            Step::Moved {
                from,
                to,
                direction,
            } => {
                if !moved || halved || e.after.halvings() != e.before.halvings() {
                    return Err(format!("{ctx}: move step must change position only"));
                }
                if to >= from {
                    return Err(format!("{ctx}: accepted non-improving move {from} -> {to}"));
                }
                let before = f.eval(e.before.position()).map_err(|x| x.to_string())?;
                let after = f.eval(e.after.position()).map_err(|x| x.to_string())?;
                if before != from || after != to || after >= before {
                    return Err(format!("{ctx}: recorded values disagree with f"));
                }
                for (k, (a, b)) in e
                    .before
                    .position()
                    .iter()
                    .zip(e.after.position())
                    .enumerate()
                {
                    if k != direction.axis && a != b {
                        return Err(format!("{ctx}: moved off-axis"));
                    }
                }
            }
            Step::Halved { .. } => {
                if moved || !halved {
                    return Err(format!(
                        "{ctx}: halving step must keep position and halve once"
                    ));
                }
            }
        }
    }
    Ok(())
}
