//! Trial generation and the truncated analysis set.

use crate::scenario::{OutcomeKind, OutcomeModel, Scenario};
use crate::stream::Stream;

pub(crate) fn logistic(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn arm(treated: bool) -> f64 {
    if treated {
        1.0
    } else {
        0.0
    }
}

/// Probability of the intermediate event for one participant.
pub fn intermediate_prob(s: &Scenario, treated: bool, u: f64) -> f64 {
    let r = arm(treated);
    logistic(s.intercept_s + s.alpha_r * r + s.alpha_u * u + s.alpha_ru * r * u)
}

/// Outcome-model parameter: the mean (grams) for continuous outcomes, the
/// event probability for binary ones.
pub fn outcome_param(s: &Scenario, treated: bool, u: f64) -> f64 {
    let r = arm(treated);
    let o = &s.outcome;
    let linear = o.intercept_y() + o.beta_r() * r + o.beta_u() * u + o.beta_ru() * r * u;
    match o {
        OutcomeModel::Continuous { .. } => linear,
        OutcomeModel::Binary { .. } => logistic(linear),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParticipantRecord {
    pub treated: bool,
    /// Confounder, in SD units.
    pub u: f64,
    /// Intermediate event.
    pub survived: bool,
    /// Outcome, present iff `survived`. Binary outcomes are 0.0 / 1.0.
    pub outcome: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialData {
    pub scenario_id: String,
    pub kind: OutcomeKind,
    /// Control arm first, then treatment; `n / 2` records each.
    pub records: Vec<ParticipantRecord>,
}

/// Generates one trial. Draw order per participant is u, then s, then y only
/// when s = 1; control participants are drawn before treated ones.
pub fn generate_trial(s: &Scenario, stream: &mut Stream) -> TrialData {
    TrialData {
        scenario_id: s.id(),
        kind: s.kind(),
        records: generate_records(s, stream),
    }
}

pub(crate) fn generate_records(s: &Scenario, stream: &mut Stream) -> Vec<ParticipantRecord> {
    let per_arm = (s.n / 2) as usize;
    let mut records = Vec::with_capacity(2 * per_arm);
    for treated in [false, true] {
        for _ in 0..per_arm {
            let u = stream.normal();
            let survived = stream.bernoulli(intermediate_prob(s, treated, u));
            let outcome = survived.then(|| {
                let param = outcome_param(s, treated, u);
                match s.outcome {
                    OutcomeModel::Continuous { sigma_y, .. } => param + sigma_y * stream.normal(),
                    OutcomeModel::Binary { .. } => arm(stream.bernoulli(param)),
                }
            });
            records.push(ParticipantRecord { treated, u, survived, outcome });
        }
    }
    records
}

/// Observed outcomes among survivors, by arm.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct AnalysisSet {
    pub treated: Vec<f64>,
    pub control: Vec<f64>,
}

impl AnalysisSet {
    pub fn n1(&self) -> usize {
        self.treated.len()
    }

    pub fn n0(&self) -> usize {
        self.control.len()
    }
}

/// Event counts among survivors: `a`/`b` treatment events/non-events,
/// `c`/`d` control events/non-events.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct TwoByTwoTable {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl TwoByTwoTable {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Self {
        Self { a, b, c, d }
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn n1(&self) -> u64 {
        self.a + self.b
    }

    pub fn n0(&self) -> u64 {
        self.c + self.d
    }

    pub fn events(&self) -> u64 {
        self.a + self.c
    }

    pub fn non_events(&self) -> u64 {
        self.b + self.d
    }

    pub fn all_cells_positive(&self) -> bool {
        self.a > 0 && self.b > 0 && self.c > 0 && self.d > 0
    }

    pub fn all_margins_positive(&self) -> bool {
        self.n1() > 0 && self.n0() > 0 && self.events() > 0 && self.non_events() > 0
    }

    /// Swaps the arms.
    pub fn swap_rows(&self) -> Self {
        Self::new(self.c, self.d, self.a, self.b)
    }

    /// Swaps events and non-events.
    pub fn swap_columns(&self) -> Self {
        Self::new(self.b, self.a, self.d, self.c)
    }
}

/// Survivor-only view of a trial.
#[derive(Debug, Clone, PartialEq)]
pub enum Analysable {
    Continuous(AnalysisSet),
    Binary(TwoByTwoTable),
}

pub fn analysis_set(t: &TrialData) -> Analysable {
    match t.kind {
        OutcomeKind::Continuous => Analysable::Continuous(continuous_set(&t.records)),
        OutcomeKind::Binary => Analysable::Binary(binary_table(&t.records)),
    }
}

pub(crate) fn continuous_set(records: &[ParticipantRecord]) -> AnalysisSet {
    let mut set = AnalysisSet::default();
    for rec in records {
        if let (true, Some(y)) = (rec.survived, rec.outcome) {
            if rec.treated {
                set.treated.push(y);
            } else {
                set.control.push(y);
            }
        }
    }
    set
}

pub(crate) fn binary_table(records: &[ParticipantRecord]) -> TwoByTwoTable {
    let mut t = TwoByTwoTable::default();
    for rec in records {
        let Some(y) = rec.outcome.filter(|_| rec.survived) else {
            continue;
        };
        let event = y == 1.0;
        match (rec.treated, event) {
            (true, true) => t.a += 1,
            (true, false) => t.b += 1,
            (false, true) => t.c += 1,
            (false, false) => t.d += 1,
        }
    }
    t
}
