use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use gradpre_core::coalgebra::n_step_behaviour;
use gradpre_core::logic::{distinguish, eval_on_mn1, Caps, LogicError};
use gradpre_core::sdist::{sdist_leq_flow, FormalSum};
use gradpre_core::theory::{
    derivable, parse_context, parse_goal, verify_trace, Budget, GradedSignature, Inequation, Relation, Rule, Step,
    Verdict,
};
use gradpre_core::{
    builtin_logic, eval_in_system, parse_formula, refines, LogicKind, LogicSpec, SemKind, Semantics, Space, System,
};
use serde::Serialize;

use crate::input::{labels_in, load_poset, load_state, load_theory, StateRef};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Positive,
    Negative,
}

impl Outcome {
    fn from_bool(b: bool) -> Outcome {
        if b {
            Outcome::Positive
        } else {
            Outcome::Negative
        }
    }

    pub fn code(self) -> u8 {
        match self {
            Outcome::Positive => 0,
            Outcome::Negative => 1,
        }
    }
}

pub struct Report {
    pub outcome: Outcome,
    pub text: String,
    pub json: serde_json::Value,
}

impl Report {
    fn new<T: Serialize>(outcome: Outcome, text: String, doc: &T) -> Result<Report> {
        Ok(Report { outcome, text, json: serde_json::to_value(doc)? })
    }
}

pub fn parse_sem(s: &str) -> Result<SemKind> {
    SemKind::from_str(s).map_err(|e| anyhow!(e))
}

fn parse_logic(s: Option<&str>, sem: SemKind) -> Result<LogicKind> {
    match s {
        Some(s) => LogicKind::from_str(s).map_err(|e| anyhow!(e)),
        None => Ok(LogicKind::for_semantics(sem)),
    }
}

/// Two states under one semantics, with matching label sets.
struct Pair {
    a: System,
    x: usize,
    b: System,
    y: usize,
}

fn load_pair(left: &StateRef, right: &StateRef, sem: SemKind, validate: bool) -> Result<Pair> {
    let (a, x) = load_state(left, sem, validate)?;
    let (b, y) = load_state(right, sem, validate)?;
    if a.labels != b.labels {
        bail!("label sets differ: {:?} vs {:?}", a.labels, b.labels);
    }
    Ok(Pair { a, x, b, y })
}

fn space_for(sem: SemKind, labels: &[String]) -> Result<Space> {
    Ok(Space::over_one(Semantics::new(sem, labels)?))
}

fn logic_for(kind: LogicKind, sem: SemKind, labels: &[String]) -> Result<LogicSpec> {
    let logic = builtin_logic(kind, labels)?;
    logic.check(sem)?;
    Ok(logic)
}

pub struct PairArgs {
    pub sem: String,
    pub left: StateRef,
    pub right: StateRef,
    pub depth: Option<usize>,
    pub validate: bool,
}

impl PairArgs {
    fn depth(&self, p: &Pair) -> usize {
        self.depth.unwrap_or(p.a.len() * p.b.len())
    }
}

#[derive(Serialize)]
struct CheckDoc {
    command: &'static str,
    semantics: String,
    left: String,
    right: String,
    depth: usize,
    refines: bool,
    holds: Vec<bool>,
    first_failure: Option<usize>,
}

pub fn check(args: &PairArgs) -> Result<Report> {
    let sem = parse_sem(&args.sem)?;
    let p = load_pair(&args.left, &args.right, sem, args.validate)?;
    let depth = args.depth(&p);
    let v = refines(sem, &p.a, p.x, &p.b, p.y, depth)?;
    let mut text = match v.first_failure {
        None => format!("refines: yes (n=0..{depth})\n"),
        Some(n) => format!("refines: no (fails at n={n})\n"),
    };
    let mut start = 0;
    for n in 1..=v.holds.len() {
        if n == v.holds.len() || v.holds[n] != v.holds[start] {
            let range = if n - 1 == start { format!("n={start}") } else { format!("n={start}..{}", n - 1) };
            writeln!(text, "  {range}: {}", if v.holds[start] { "yes" } else { "no" })?;
            start = n;
        }
    }
    let doc = CheckDoc {
        command: "check",
        semantics: sem.to_string(),
        left: args.left.to_string(),
        right: args.right.to_string(),
        depth,
        refines: v.holds_all(),
        holds: v.holds.clone(),
        first_failure: v.first_failure,
    };
    Report::new(Outcome::from_bool(v.holds_all()), text, &doc)
}

#[derive(Serialize)]
struct EvalDoc {
    command: &'static str,
    semantics: String,
    logic: String,
    state: String,
    formula: String,
    depth: usize,
    value: String,
}

pub struct EvalArgs<'a> {
    pub sem: &'a str,
    pub logic: Option<&'a str>,
    pub state: &'a StateRef,
    pub formula: &'a str,
    /// Evaluation depth; the least depth of the formula when absent.
    pub depth: Option<usize>,
    pub validate: bool,
}

pub fn eval(args: &EvalArgs) -> Result<Report> {
    let EvalArgs { sem, logic, state, formula, depth, validate } = *args;
    let sem = parse_sem(sem)?;
    let kind = parse_logic(logic, sem)?;
    let (sys, x) = load_state(state, sem, validate)?;
    let space = space_for(sem, &sys.labels)?;
    let logic = logic_for(kind, sem, &sys.labels)?;
    let phi = parse_formula(formula, &logic)?;
    let (value, depth) = match depth {
        Some(n) => (eval_on_mn1(&space, &logic, &phi, n_step_behaviour(&space, &sys, x, n)?)?, n),
        None => (eval_in_system(&space, &logic, &phi, &sys, x)?, phi.depth().unwrap_or(0)),
    };
    let doc = EvalDoc {
        command: "eval",
        semantics: sem.to_string(),
        logic: kind.to_string(),
        state: state.to_string(),
        formula: phi.to_string(),
        depth,
        value: value.to_string(),
    };
    Report::new(Outcome::Positive, format!("{value}\n"), &doc)
}

#[derive(Serialize)]
struct WitnessDoc {
    formula: String,
    depth: usize,
    left: String,
    right: String,
}

#[derive(Serialize)]
struct DistinguishDoc {
    command: &'static str,
    semantics: String,
    logic: String,
    left: String,
    right: String,
    depth: usize,
    refines: bool,
    witness: Option<WitnessDoc>,
}

pub fn distinguish_cmd(args: &PairArgs, logic: Option<&str>, caps: Caps) -> Result<Report> {
    let sem = parse_sem(&args.sem)?;
    let kind = parse_logic(logic, sem)?;
    let p = load_pair(&args.left, &args.right, sem, args.validate)?;
    let depth = args.depth(&p);
    let space = space_for(sem, &p.a.labels)?;
    let logic = logic_for(kind, sem, &p.a.labels)?;
    let w = match distinguish(&space, &logic, &p.a, p.x, &p.b, p.y, depth, caps) {
        Err(LogicError::NoWitnessWithinBounds) => {
            bail!("internal error: refinement fails but no distinguishing formula was found within the caps")
        }
        r => r?,
    };
    let text = match &w {
        None => "none (refines)\n".to_string(),
        Some(w) => format!("{}\n  left:  {}\n  right: {}\n", w.formula, w.left, w.right),
    };
    let doc = DistinguishDoc {
        command: "distinguish",
        semantics: sem.to_string(),
        logic: kind.to_string(),
        left: args.left.to_string(),
        right: args.right.to_string(),
        depth,
        refines: w.is_none(),
        witness: w.as_ref().map(|w| WitnessDoc {
            formula: w.formula.to_string(),
            depth: w.depth,
            left: w.left.to_string(),
            right: w.right.to_string(),
        }),
    };
    Report::new(Outcome::from_bool(w.is_none()), text, &doc)
}

pub struct DeriveArgs {
    pub theory: String,
    pub labels: Option<Vec<String>>,
    pub width: usize,
    pub ctx: String,
    pub goal: String,
    pub budget: Budget,
}

#[derive(Serialize)]
struct StepDoc {
    depth: usize,
    lhs: String,
    rhs: String,
    rule: String,
    premises: Vec<usize>,
}

#[derive(Serialize)]
struct DirectionDoc {
    goal: String,
    proved: bool,
    trace: Vec<StepDoc>,
    note: Option<String>,
}

#[derive(Serialize)]
struct DeriveDoc {
    command: &'static str,
    theory: String,
    context: String,
    goal: String,
    proved: bool,
    directions: Vec<DirectionDoc>,
}

fn rule_name(r: &Rule) -> String {
    match r {
        Rule::Var => "Var".into(),
        Rule::Ar => "Ar".into(),
        Rule::Trans => "Trans".into(),
        Rule::Mon => "Mon".into(),
        Rule::Ax1 { axiom, .. } => format!("Ax1 #{axiom}"),
        Rule::Ax2 { axiom, .. } => format!("Ax2 #{axiom}"),
    }
}

fn step_doc(sig: &GradedSignature, s: &Step) -> StepDoc {
    StepDoc {
        depth: s.depth,
        lhs: sig.show(&s.lhs),
        rhs: sig.show(&s.rhs),
        rule: rule_name(&s.rule),
        premises: s.premises.clone(),
    }
}

pub fn derive(args: &DeriveArgs) -> Result<Report> {
    let labels = args.labels.clone().unwrap_or_else(|| labels_in(&args.goal));
    let th = load_theory(&args.theory, &labels, args.width)?;
    let ctx = Arc::new(parse_context(&args.ctx)?);
    let (goal, rel) = parse_goal(&th.signature, ctx.clone(), &args.goal)?;
    let mut goals = vec![goal.clone()];
    if rel == Relation::Eq {
        goals.push(goal.flipped());
    }
    let show = |g: &Inequation| format!("{} <= {} : {}", th.signature.show(&g.lhs), th.signature.show(&g.rhs), g.depth);
    let mut directions = Vec::new();
    let mut text = String::new();
    for g in &goals {
        match derivable(&th, g, &args.budget)? {
            Verdict::Proved(steps) => {
                verify_trace(&th, &ctx, &steps, g)
                    .map_err(|e| anyhow!("internal error: trace does not replay: {e}"))?;
                let trace: Vec<StepDoc> = steps.iter().map(|s| step_doc(&th.signature, s)).collect();
                directions.push(DirectionDoc { goal: show(g), proved: true, trace, note: None });
            }
            Verdict::NotProvedWithinBudget(used) => {
                directions.push(DirectionDoc { goal: show(g), proved: false, trace: Vec::new(), note: used.note });
            }
        }
    }
    let proved = directions.iter().all(|d| d.proved);
    text.push_str(if proved { "proved\n" } else { "unknown (budget)\n" });
    for d in &directions {
        writeln!(text, "{}: {}", d.goal, if d.proved { "proved" } else { "unknown" })?;
        for (i, s) in d.trace.iter().enumerate() {
            let prem = if s.premises.is_empty() {
                String::new()
            } else {
                format!(" from {}", s.premises.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(", "))
            };
            writeln!(text, "  {i:>3}. {} <= {} : {}  ({}){prem}", s.lhs, s.rhs, s.depth, s.rule)?;
        }
        if let Some(note) = &d.note {
            writeln!(text, "  note: {note}")?;
        }
    }
    let doc = DeriveDoc {
        command: "derive",
        theory: th.name.clone(),
        context: args.ctx.clone(),
        goal: args.goal.clone(),
        proved,
        directions,
    };
    Report::new(Outcome::from_bool(proved), text, &doc)
}

pub enum PosetSource {
    File(PathBuf),
    Inline(String),
}

#[derive(Serialize)]
struct OrderDoc {
    command: &'static str,
    elements: Vec<String>,
    left: String,
    right: String,
    below: bool,
}

pub fn order(poset: &PosetSource, left: &str, right: &str) -> Result<Report> {
    let p = match poset {
        PosetSource::File(path) => load_poset(path)?,
        PosetSource::Inline(text) => Arc::new(parse_context(text).context("invalid poset")?),
    };
    let mu = FormalSum::parse(p.clone(), left).with_context(|| format!("cannot read `{left}`"))?.to_subdist();
    let nu = FormalSum::parse(p.clone(), right).with_context(|| format!("cannot read `{right}`"))?.to_subdist();
    let below = sdist_leq_flow(&p, &mu, &nu)?;
    let text = if below { "below\n" } else { "not below\n" };
    let doc = OrderDoc {
        command: "order",
        elements: p.elements().to_vec(),
        left: left.to_string(),
        right: right.to_string(),
        below,
    };
    Report::new(Outcome::from_bool(below), text.to_string(), &doc)
}
