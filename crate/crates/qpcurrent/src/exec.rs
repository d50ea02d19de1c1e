//! Executes the command plan of an elaborated session.

use std::collections::BTreeMap;
use std::time::Instant;

use qpcurrent_core::{
    current_commutator, current_commutator_unreduced, render_classical, CurrentCommutator, CurrentFunction, EntryError,
    Error, Obstruction, Poly, QPPair,
};

use crate::dsl::ast::{Command, Expr};
use crate::dsl::parser::parse;
use crate::dsl::printer::command_subject;
use crate::dsl::span::{line_col, Diagnostic};
use crate::report::{Entry, RunReport};
use crate::session::{elaborate, Options, Session};

/// Parses, elaborates and runs `source`. Diagnostics end up in the report.
pub fn run_source(name: &str, source: &str, options: &Options, timing: bool) -> RunReport {
    let start = Instant::now();
    let fail = |diags: Vec<Diagnostic>| RunReport {
        source: name.into(),
        entries: Vec::new(),
        diagnostics: diags.iter().map(|d| d.render(name, source)).collect(),
        ok: false,
        elapsed_us: None,
    };
    let ast = match parse(source) {
        Ok(a) => a,
        Err(d) => return fail(d),
    };
    let session = match elaborate(&ast, options.clone()) {
        Ok(s) => s,
        Err(d) => return fail(d),
    };
    let mut report = execute(&session, name, source, timing);
    if timing {
        report.elapsed_us = Some(start.elapsed().as_micros() as u64);
    }
    report
}

pub fn execute(session: &Session, name: &str, source: &str, timing: bool) -> RunReport {
    let mut entries = Vec::with_capacity(session.plan.len());
    for planned in &session.plan {
        let started = Instant::now();
        let line = line_col(source, planned.span.start).0;
        let mut entry = Entry::new(planned.command.keyword(), command_subject(&planned.command), line);
        if let Err(d) = run_command(session, &planned.command, &mut entry) {
            let (l, c) = line_col(source, d.span.start);
            entry.error = Some(format!("{l}:{c}: {d}"));
        }
        if timing {
            entry.elapsed_us = Some(started.elapsed().as_micros() as u64);
        }
        entries.push(entry);
    }
    let ok = entries.iter().all(|e| e.error.is_none());
    RunReport { source: name.into(), entries, diagnostics: Vec::new(), ok, elapsed_us: None }
}

type CmdResult = Result<(), Diagnostic>;

fn eval(session: &Session, e: &Expr) -> Result<Poly, Diagnostic> {
    session.evaluate(e, &BTreeMap::new())
}

fn wrap(span: crate::dsl::span::Span) -> impl Fn(Error) -> Diagnostic {
    move |e| Diagnostic::new(span, e.to_string())
}

fn finish(session: &Session, p: &Poly) -> Poly {
    if session.options.reduce {
        session.relations.reduce(p)
    } else {
        p.clone()
    }
}

fn obstruction(session: &Session, entry: &mut Entry, o: &Obstruction) {
    entry.field("raw", o.raw.render());
    let value = if session.options.reduce {
        entry.field("reduced", o.reduced.render());
        &o.reduced
    } else {
        &o.raw
    };
    entry.field("verdict", if value.is_zero() { "vanishes" } else { "nonzero" });
}

fn run_command(session: &Session, command: &Command, entry: &mut Entry) -> CmdResult {
    let max = session.options.max_twist_order;
    match command {
        Command::Show(e) => {
            let v = eval(session, e)?;
            entry.field("value", finish(session, &v).render());
        }
        Command::Bracket(a, b) => {
            let s = session.require_structure_ref(a.span.to(b.span))?;
            let v = s.bracket(&eval(session, a)?, &eval(session, b)?).map_err(wrap(a.span))?;
            entry.field("value", finish(session, &v).render());
        }
        Command::Derived(a, b) => {
            let span = a.span.to(b.span);
            let qp = session.require_qp(span)?;
            let v = qp.derived_bracket(&eval(session, a)?, &eval(session, b)?).map_err(wrap(span))?;
            entry.field("value", finish(session, &v).render());
            if let Some(pair) = session.pair() {
                let r = pair.restrict(&v).map_err(wrap(span))?;
                entry.field("restricted", finish(session, &r).render());
            }
        }
        Command::Twist(e, by) => {
            let s = session.require_structure_ref(e.span)?;
            let alpha = match by {
                Some(a) => eval(session, a)?,
                None => session.require_pair(e.span)?.alpha().clone(),
            };
            let t = qpcurrent_core::twist(s, &eval(session, e)?, &alpha, max).map_err(wrap(e.span))?;
            entry.field("value", finish(session, &t.value).render());
            entry.field("order", t.order.to_string());
            if let Some(w) = t.warning {
                entry.field("warning", w);
            }
        }
        Command::Master => {
            let qp = session.require_qp(Default::default())?;
            let o = qp.check_master().map_err(wrap(Default::default()))?;
            obstruction(session, entry, &o);
        }
        Command::Canonical => {
            let pair = session.require_pair(Default::default())?;
            let o = pair.check_canonical(max).map_err(wrap(Default::default()))?;
            obstruction(session, entry, &o);
        }
        Command::Preserves(by) => {
            let qp = session.require_qp(Default::default())?;
            let alpha = match by {
                Some(a) => eval(session, a)?,
                None => session.require_pair(Default::default())?.alpha().clone(),
            };
            let o = qp.twist_preserves_qp(&alpha, max).map_err(wrap(Default::default()))?;
            obstruction(session, entry, &o);
        }
        Command::Commutator(a, b) => {
            let span = a.span.to(b.span);
            let pair = session.require_pair(span)?;
            let j1 = CurrentFunction::on(pair, eval(session, a)?).map_err(wrap(a.span))?;
            let j2 = CurrentFunction::on(pair, eval(session, b)?).map_err(wrap(b.span))?;
            let c = commutator(pair, &j1, &j2, session.options.reduce).map_err(wrap(span))?;
            commutator_fields(entry, &c, "");
        }
        Command::Table(names) => {
            let span = names[0].span.to(names[names.len() - 1].span);
            let pair = session.require_pair(span)?;
            let mut labels = Vec::new();
            let mut currents = Vec::new();
            for n in names {
                let family = session
                    .currents
                    .get(&n.name)
                    .ok_or_else(|| Diagnostic::new(n.span, format!("unknown current `{}`", n.name)))?;
                for (key, p) in &family.members {
                    labels.push(current_label(&n.name, key));
                    currents.push(CurrentFunction::on(pair, p.clone()).map_err(wrap(n.span))?);
                }
            }
            let table = parallel_table(pair, &currents, session.options.reduce, session.options.jobs);
            let mut failures = Vec::new();
            let mut anomaly_free = true;
            for (k, result) in table.into_iter().enumerate() {
                let (row, col) = (k / currents.len(), k % currents.len());
                match result {
                    Ok(c) => {
                        anomaly_free &= c.anomaly_unrestricted.is_zero();
                        commutator_fields(entry, &c, &format!("({}, {})", labels[row], labels[col]));
                    }
                    Err(error) => failures.push(EntryError { row, col, error }),
                }
            }
            if !failures.is_empty() {
                return Err(Diagnostic::new(span, Error::Table(failures).to_string()));
            }
            entry.field("anomaly-free", if anomaly_free { "yes" } else { "no" });
        }
        Command::Render(e) => {
            let pair = session.require_pair(e.span)?;
            let j = CurrentFunction::on(pair, eval(session, e)?).map_err(wrap(e.span))?;
            entry.field("classical", render_classical(&j, pair));
        }
        Command::Small => {
            let pair = session.require_pair(Default::default())?;
            let s = pair.small_structure();
            let chart = s.chart();
            entry.field("degree", s.degree().to_string());
            for ((a, b), v) in s.table() {
                entry.field(format!("{{{}, {}}}", chart.coordinate(*a), chart.coordinate(*b)), v.render());
            }
        }
    }
    Ok(())
}

/// The restricted parts, followed by the unrestricted ones where restriction
/// lost something (fiber coordinates that the twisted pullback turns into
/// forms on the worldvolume).
fn commutator_fields(entry: &mut Entry, c: &CurrentCommutator, at: &str) {
    entry.field(format!("algebraic{at}"), c.algebraic.render());
    entry.field(format!("anomaly{at}"), c.anomaly.render());
    if c.algebraic_unrestricted != c.algebraic {
        entry.field(format!("full algebraic{at}"), c.algebraic_unrestricted.render());
    }
    if c.anomaly_unrestricted != c.anomaly {
        entry.field(format!("full anomaly{at}"), c.anomaly_unrestricted.render());
    }
}

pub fn current_label(name: &str, key: &[u32]) -> String {
    if key.is_empty() {
        name.to_string()
    } else {
        format!("{name}[{}]", key.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(","))
    }
}

fn commutator(pair: &QPPair, a: &CurrentFunction, b: &CurrentFunction, reduce: bool) -> Result<CurrentCommutator, Error> {
    if reduce {
        current_commutator(pair, a, b)
    } else {
        current_commutator_unreduced(pair, a, b)
    }
}

/// Row-major table of commutators. With `jobs > 1` entries are spread over
/// scoped threads by stride and merged back by position, so the output does
/// not depend on scheduling.
pub fn parallel_table(
    pair: &QPPair,
    currents: &[CurrentFunction],
    reduce: bool,
    jobs: usize,
) -> Vec<Result<CurrentCommutator, Error>> {
    let n = currents.len();
    let total = n * n;
    let compute = |k: usize| commutator(pair, &currents[k / n], &currents[k % n], reduce);
    let jobs = jobs.clamp(1, total.max(1));
    if jobs == 1 {
        return (0..total).map(compute).collect();
    }
    let mut slots: Vec<Option<Result<CurrentCommutator, Error>>> = (0..total).map(|_| None).collect();
    std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|w| {
                let compute = &compute;
                scope.spawn(move || (w..total).step_by(jobs).map(|k| (k, compute(k))).collect::<Vec<_>>())
            })
            .collect();
        for h in handles {
            for (k, r) in h.join().expect("table worker panicked") {
                slots[k] = Some(r);
            }
        }
    });
    slots.into_iter().map(|s| s.expect("every entry computed")).collect()
}
