use catafind_core::boardman::BoardmanError;
use catafind_core::determinants::DetError;
use catafind_core::report::{Payload, ReportDocument};
use catafind_core::scan::ScanError;
use catafind_core::solver::check_point;
use catafind_core::{
    bg_condition_count, boardman_symbol, find_catastrophes, minor_count, scan, Axis, DeterminantSet, SolveError,
    SolveOptions, Tolerances, VectorField,
};

use crate::args::{BoardmanArgs, CheckArgs, CountArgs, FindArgs, Format, ScanArgs, TolArgs};
use crate::input::{assignments, intervals, load, load_fixed, point};
use crate::CliError;

fn solve_err(e: SolveError) -> CliError {
    match e {
        SolveError::Eval(_) | SolveError::Det(DetError::Eval(_)) => CliError::numeric(e.to_string()),
        _ => CliError::usage(e.to_string()),
    }
}

fn boardman_err(e: BoardmanError) -> CliError {
    match e {
        BoardmanError::NonMonotone { .. } | BoardmanError::Eval(_) => CliError::numeric(e.to_string()),
        _ => CliError::usage(e.to_string()),
    }
}

fn tolerances(t: &TolArgs) -> Result<Tolerances, CliError> {
    if t.tol_b > 0.0 && t.tol_g > 0.0 {
        Ok(Tolerances { tol_b: t.tol_b, tol_g: t.tol_g })
    } else {
        Err(CliError::usage("tolerances must be positive"))
    }
}

fn unfolded(f: VectorField, unfold: &[String]) -> Result<VectorField, CliError> {
    f.reorder_params(unfold).map_err(|e| CliError::usage(e.to_string()))
}

pub fn find(a: &FindArgs, command: Vec<String>) -> Result<String, CliError> {
    let loaded = load_fixed(&a.field)?;
    let f = unfolded(loaded.field, &a.unfold)?;
    let opts = SolveOptions {
        seed_box: intervals(&a.seed_box, f.dim() + f.num_params())?,
        seeds: a.seeds,
        seed_offset: a.seed_offset,
        tolerances: tolerances(&a.tol)?,
        ..SolveOptions::default()
    };
    let reports = find_catastrophes(&f, a.codim, &opts).map_err(solve_err)?;
    let empty = reports.is_empty();
    let payload = Payload::Find {
        variables: f.var_names().to_vec(),
        parameters: f.param_names().to_vec(),
        reports,
    };
    let mut doc = ReportDocument::new(Some(loaded.sha256), command, payload);
    if empty {
        doc.warnings.push(format!("no seed out of {} converged inside the box", a.seeds));
    }
    Ok(doc.to_json())
}

pub fn check(a: &CheckArgs, command: Vec<String>) -> Result<String, CliError> {
    let loaded = load_fixed(&a.field)?;
    let f = unfolded(loaded.field, &a.unfold)?;
    let p = point(&f, &assignments(&a.at)?)?;
    let d = DeterminantSet::new(f.clone());
    let report = check_point(&d, a.codim, &p, &tolerances(&a.tol)?).map_err(solve_err)?;
    let payload = Payload::Check {
        variables: f.var_names().to_vec(),
        parameters: f.param_names().to_vec(),
        verdict: report.verdict(),
        report,
    };
    Ok(ReportDocument::new(Some(loaded.sha256), command, payload).to_json())
}

pub fn scan_grid(a: &ScanArgs, command: Vec<String>) -> Result<String, CliError> {
    let loaded = load(&a.field.source)?;
    let f = loaded.field;
    let fixed = assignments(&a.field.fix)?;
    if a.axes.len() != 2 {
        return Err(CliError::usage("--axes needs exactly two parameter names"));
    }
    let range = intervals(&a.range, 2)?;
    if range.is_empty() {
        return Err(CliError::usage("--range is required"));
    }
    let cells = match a.cells.as_slice() {
        [c] => [*c, *c],
        [c1, c2] => [*c1, *c2],
        _ => return Err(CliError::usage("--cells takes one or two counts")),
    };
    let axes = [
        Axis::new(a.axes[0].clone(), range[0].0, range[0].1, cells[0]),
        Axis::new(a.axes[1].clone(), range[1].0, range[1].1, cells[1]),
    ];
    let opts = SolveOptions {
        seeds: a.seeds,
        seed_offset: a.seed_offset,
        tolerances: Tolerances { tol_b: a.tol_b, ..Tolerances::default() },
        ..SolveOptions::default()
    };
    let x_box = intervals(&a.box_x, f.dim())?;
    let region = scan(&f, axes, &fixed, &x_box, &opts).map_err(|e| match e {
        ScanError::Solve(e) => solve_err(e),
        e => CliError::usage(e.to_string()),
    })?;
    Ok(match a.format {
        Format::Csv => region.to_csv(),
        Format::Json => ReportDocument::new(Some(loaded.sha256), command, Payload::Scan { region }).to_json(),
    })
}

pub fn count_minors(a: &CountArgs, command: Vec<String>) -> Result<String, CliError> {
    if a.dim == 0 || a.codim == 0 {
        return Err(CliError::usage("--dim and --codim must be at least 1"));
    }
    let seq = if a.corank_seq.is_empty() { vec![1; a.codim] } else { a.corank_seq.clone() };
    if seq.len() != a.codim {
        return Err(CliError::usage(format!("--corank-seq has {} entries, --codim is {}", seq.len(), a.codim)));
    }
    let minors = minor_count(a.dim, &seq).map_err(boardman_err)?;
    let payload = Payload::CountMinors { minors, bg_conditions: bg_condition_count(a.dim, a.codim) };
    Ok(ReportDocument::new(None, command, payload).to_json())
}

pub fn boardman(a: &BoardmanArgs, command: Vec<String>) -> Result<String, CliError> {
    let loaded = load_fixed(&a.field)?;
    let values = assignments(&a.at)?;
    let (params, vars): (Vec<_>, Vec<_>) = values.into_iter().partition(|(n, _)| loaded.field.param_index(n).is_some());
    let f = loaded.field.fix_params(&params).map_err(|e| CliError::usage(e.to_string()))?;
    let p = point(&f, &vars)?;
    let symbol = boardman_symbol(&f, &p.x, a.max_depth, a.tol_b, a.cap).map_err(boardman_err)?;
    let mut doc = ReportDocument::new(Some(loaded.sha256), command, Payload::Boardman { point: p.x, boardman: symbol });
    if let Payload::Boardman { boardman, .. } = &doc.payload {
        if !boardman.terminated {
            doc.warnings.push(format!("no zero corank within {} stages", a.max_depth));
        }
    }
    Ok(doc.to_json())
}
