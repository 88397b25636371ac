use std::fs;

use catafind_core::report::sha256_hex;
use catafind_core::{make_primary_form, make_reaction_diffusion, parse_expression, parse_vector_field, Point};
use catafind_core::{PrimaryFormSpec, VectorField};

use crate::args::{FieldArgs, Source};
use crate::CliError;

pub struct Loaded {
    pub field: VectorField,
    pub sha256: String,
}

fn parse_builtin(spec: &str) -> Result<VectorField, CliError> {
    if spec == "rd" {
        return Ok(make_reaction_diffusion());
    }
    let rest = spec
        .strip_prefix("primary:")
        .ok_or_else(|| CliError::usage(format!("unknown builtin `{spec}`; expected `rd` or `primary:n=..,r=..`")))?;
    let (mut n, mut r, mut lambda, mut tau) = (None, None, None, None);
    for item in rest.split(',') {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("expected key=value in builtin, got `{item}`")))?;
        let list = || v.split(':').map(number).collect::<Result<Vec<f64>, CliError>>();
        match k {
            "n" => n = Some(v.parse::<usize>().map_err(|_| CliError::usage(format!("bad n `{v}`")))?),
            "r" => r = Some(v.parse::<usize>().map_err(|_| CliError::usage(format!("bad r `{v}`")))?),
            "lambda" => lambda = Some(list()?),
            "tau" => tau = Some(list()?),
            _ => return Err(CliError::usage(format!("unknown builtin key `{k}`"))),
        }
    }
    let (n, r) = match (n, r) {
        (Some(n), Some(r)) => (n, r),
        _ => return Err(CliError::usage("primary builtin needs n and r")),
    };
    let unit = PrimaryFormSpec::unit(n, r);
    let spec = PrimaryFormSpec { n, r, lambda: lambda.unwrap_or(unit.lambda), tau: tau.unwrap_or(unit.tau) };
    make_primary_form(&spec).map_err(|e| CliError::usage(e.to_string()))
}

pub fn load(source: &Source) -> Result<Loaded, CliError> {
    if let Some(path) = &source.field {
        let text = fs::read_to_string(path).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        let field = parse_vector_field(&text).map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
        return Ok(Loaded { sha256: sha256_hex(text.as_bytes()), field });
    }
    let spec = source.builtin.as_deref().expect("clap enforces one source");
    let field = parse_builtin(spec)?;
    Ok(Loaded { sha256: sha256_hex(field.to_text().as_bytes()), field })
}

/// Load and apply `--fix`.
pub fn load_fixed(args: &FieldArgs) -> Result<Loaded, CliError> {
    let loaded = load(&args.source)?;
    let fixed = assignments(&args.fix)?;
    let field = loaded.field.fix_params(&fixed).map_err(|e| CliError::usage(e.to_string()))?;
    Ok(Loaded { field, ..loaded })
}

/// A real number, written as a constant expression (`-16/27` is accepted).
pub fn number(text: &str) -> Result<f64, CliError> {
    let e = parse_expression(text, &[], &[]).map_err(|e| CliError::usage(format!("bad number `{text}`: {e}")))?;
    let v = e
        .evaluate(&Point::new(vec![], vec![]))
        .map_err(|e| CliError::usage(format!("bad number `{text}`: {e}")))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(CliError::usage(format!("`{text}` is not finite")))
    }
}

pub fn assignments(items: &[String]) -> Result<Vec<(String, f64)>, CliError> {
    let mut out: Vec<(String, f64)> = Vec::new();
    for item in items {
        let (k, v) = item
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("expected name=value, got `{item}`")))?;
        let k = k.trim();
        if out.iter().any(|(n, _)| n == k) {
            return Err(CliError::usage(format!("`{k}` assigned twice")));
        }
        out.push((k.to_string(), number(v.trim())?));
    }
    Ok(out)
}

pub fn interval(text: &str) -> Result<(f64, f64), CliError> {
    let (lo, hi) = text
        .split_once(':')
        .ok_or_else(|| CliError::usage(format!("expected lo:hi, got `{text}`")))?;
    let (lo, hi) = (number(lo)?, number(hi)?);
    if lo < hi {
        Ok((lo, hi))
    } else {
        Err(CliError::usage(format!("empty interval `{text}`")))
    }
}

/// Parse intervals; a single interval is repeated `n` times.
pub fn intervals(items: &[String], n: usize) -> Result<Vec<(f64, f64)>, CliError> {
    let v = items.iter().map(|s| interval(s)).collect::<Result<Vec<_>, _>>()?;
    match v.len() {
        0 => Ok(Vec::new()),
        1 => Ok(vec![v[0]; n]),
        k if k == n => Ok(v),
        k => Err(CliError::usage(format!("{k} intervals given, {n} needed"))),
    }
}

/// Build a point of `f` from named values covering every variable and
/// parameter.
pub fn point(f: &VectorField, values: &[(String, f64)]) -> Result<Point, CliError> {
    let mut x = vec![None; f.dim()];
    let mut alpha = vec![None; f.num_params()];
    for (name, v) in values {
        if let Some(i) = f.var_index(name) {
            x[i] = Some(*v);
        } else if let Some(i) = f.param_index(name) {
            alpha[i] = Some(*v);
        } else {
            return Err(CliError::usage(format!("`{name}` is not a variable or free parameter")));
        }
    }
    let names = f.var_names().iter().chain(f.param_names());
    let missing: Vec<&String> = names.zip(x.iter().chain(&alpha)).filter(|(_, v)| v.is_none()).map(|(n, _)| n).collect();
    if !missing.is_empty() {
        let list: Vec<&str> = missing.iter().map(|s| s.as_str()).collect();
        return Err(CliError::usage(format!("--at is missing {}", list.join(", "))));
    }
    Ok(Point::new(x.into_iter().flatten().collect(), alpha.into_iter().flatten().collect()))
}
