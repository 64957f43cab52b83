//! JSON input: family and matrix files, built-in fixtures, scalar lists.

use std::fs;
use std::path::Path;

use serde_json::{Map, Value};
use versal::{
    family_cusp, family_swallow_tail, family_versal_form, matrix_perturbed_nilpotent, matrix_frank, AffineFamily, CMatrix,
    MatrixFamily, ParameterDomain, C64,
};

use crate::report;
use crate::CliError;

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

pub fn parse_json(text: &str, what: &str) -> Result<Value, CliError> {
    serde_json::from_str(text).map_err(|e| bad(format!("{what}: malformed JSON: {e}")))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
    parse_json(&text, &path.display().to_string())
}

/// A real number or an `[re, im]` pair.
pub fn scalar(v: &Value, at: &str) -> Result<C64, CliError> {
    let num = |x: &Value| x.as_f64().filter(|f| f.is_finite());
    match v {
        Value::Number(_) => num(v).map(|re| C64::new(re, 0.0)),
        Value::Array(pair) if pair.len() == 2 => match (num(&pair[0]), num(&pair[1])) {
            (Some(re), Some(im)) => Some(C64::new(re, im)),
            _ => None,
        },
        _ => None,
    }
    .ok_or_else(|| bad(format!("{at}: expected a finite number or [re, im] pair")))
}

pub fn scalar_list(v: &Value, at: &str) -> Result<Vec<C64>, CliError> {
    let items = v.as_array().ok_or_else(|| bad(format!("{at}: expected an array")))?;
    items.iter().enumerate().map(|(i, x)| scalar(x, &format!("{at}[{i}]"))).collect()
}

pub fn matrix(v: &Value, m: usize, at: &str) -> Result<CMatrix, CliError> {
    let rows = v.as_array().ok_or_else(|| bad(format!("{at}: expected an array of rows")))?;
    if rows.len() != m {
        return Err(bad(format!("{at}: expected {m} rows, found {}", rows.len())));
    }
    let mut out = CMatrix::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        let vals = scalar_list(row, &format!("{at}[{i}]"))?;
        if vals.len() != m {
            return Err(bad(format!("{at}[{i}]: expected {m} entries, found {}", vals.len())));
        }
        for (j, z) in vals.into_iter().enumerate() {
            out[(i, j)] = z;
        }
    }
    Ok(out)
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, at: &str) -> Result<&'a Value, CliError> {
    obj.get(key).ok_or_else(|| bad(format!("{at}: missing field \"{key}\"")))
}

fn usize_field(obj: &Map<String, Value>, key: &str, at: &str) -> Result<usize, CliError> {
    field(obj, key, at)?
        .as_u64()
        .filter(|&x| x > 0)
        .map(|x| x as usize)
        .ok_or_else(|| bad(format!("{at}: \"{key}\" must be a positive integer")))
}

pub fn family_from_json(v: &Value, at: &str) -> Result<AffineFamily, CliError> {
    let obj = v.as_object().ok_or_else(|| bad(format!("{at}: expected a JSON object")))?;
    let m = usize_field(obj, "m", at)?;
    let n = obj
        .get("n")
        .and_then(Value::as_u64)
        .ok_or_else(|| bad(format!("{at}: \"n\" must be a non-negative integer")))? as usize;
    let domain = match field(obj, "domain", at)?.as_str() {
        Some("real") => ParameterDomain::Real,
        Some("complex") => ParameterDomain::Complex,
        _ => return Err(bad(format!("{at}: \"domain\" must be \"real\" or \"complex\""))),
    };
    let a0 = matrix(field(obj, "A0", at)?, m, &format!("{at}: A0"))?;
    let derivs = field(obj, "derivs", at)?
        .as_array()
        .ok_or_else(|| bad(format!("{at}: \"derivs\" must be an array of matrices")))?;
    if derivs.len() != n {
        return Err(bad(format!("{at}: n = {n} but {} derivative matrices given", derivs.len())));
    }
    let derivs = derivs
        .iter()
        .enumerate()
        .map(|(j, d)| matrix(d, m, &format!("{at}: derivs[{j}]")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AffineFamily::new(a0, derivs, domain))
}

pub fn matrix_from_json(v: &Value, at: &str) -> Result<CMatrix, CliError> {
    let obj = v.as_object().ok_or_else(|| bad(format!("{at}: expected a JSON object")))?;
    let m = usize_field(obj, "m", at)?;
    matrix(field(obj, "entries", at)?, m, &format!("{at}: entries"))
}

pub fn family_to_json(f: &AffineFamily) -> Value {
    let domain = match f.domain() {
        ParameterDomain::Real => "real",
        ParameterDomain::Complex => "complex",
    };
    let mut obj = Map::new();
    obj.insert("m".into(), Value::from(f.dim()));
    obj.insert("n".into(), Value::from(f.num_params()));
    obj.insert("domain".into(), Value::from(domain));
    obj.insert("A0".into(), report::matrix(f.base()));
    obj.insert("derivs".into(), Value::Array(f.directions().iter().map(report::matrix).collect()));
    Value::Object(obj)
}

pub fn matrix_to_json(a: &CMatrix) -> Value {
    let mut obj = Map::new();
    obj.insert("m".into(), Value::from(a.nrows()));
    obj.insert("entries".into(), report::matrix(a));
    Value::Object(obj)
}

fn parse_f64(s: &str, what: &str) -> Result<f64, CliError> {
    s.trim().parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(format!("{what}: not a finite number: {s:?}")))
}

fn parse_usize(s: &str, what: &str) -> Result<usize, CliError> {
    s.trim().parse::<usize>().map_err(|_| bad(format!("{what}: not a non-negative integer: {s:?}")))
}

/// `cusp`, `swallow-tail`, `versal-form:<d>`.
pub fn builtin_family(name: &str) -> Result<AffineFamily, CliError> {
    let mut parts = name.split(':');
    match (parts.next(), parts.next(), parts.next()) {
        (Some("cusp"), None, _) => Ok(family_cusp()),
        (Some("swallow-tail"), None, _) => Ok(family_swallow_tail()),
        (Some("versal-form"), Some(d), None) => {
            let d = parse_usize(d, "versal-form size")?;
            if d == 0 {
                return Err(bad("versal-form size must be positive"));
            }
            Ok(family_versal_form(d))
        }
        _ => Err(bad(format!(
            "unknown built-in family {name:?}; expected cusp, swallow-tail or versal-form:<d>"
        ))),
    }
}

/// `frank[:<n>]`, `nilpotent[:<eps>:<delta>]`, `identity:<m>`.
pub fn builtin_matrix(name: &str) -> Result<CMatrix, CliError> {
    let parts: Vec<&str> = name.split(':').collect();
    match parts.as_slice() {
        ["frank"] => Ok(matrix_frank(12)),
        ["frank", n] => {
            let n = parse_usize(n, "frank size")?;
            if n == 0 {
                return Err(bad("frank size must be positive"));
            }
            Ok(matrix_frank(n))
        }
        ["nilpotent"] => Ok(matrix_perturbed_nilpotent(2.2e-15, 1.5e-9)),
        ["nilpotent", eps, delta] => Ok(matrix_perturbed_nilpotent(parse_f64(eps, "epsilon")?, parse_f64(delta, "delta")?)),
        ["identity", m] => {
            let m = parse_usize(m, "identity size")?;
            if m == 0 {
                return Err(bad("identity size must be positive"));
            }
            Ok(CMatrix::identity(m))
        }
        _ => Err(bad(format!(
            "unknown built-in matrix {name:?}; expected frank[:n], nilpotent[:eps:delta] or identity:<m>"
        ))),
    }
}

pub enum Source<'a> {
    File(&'a Path),
    Builtin(&'a str),
}

impl Source<'_> {
    pub fn describe(&self) -> Value {
        match self {
            Source::File(p) => Value::from(format!("file:{}", p.display())),
            Source::Builtin(n) => Value::from(format!("builtin:{n}")),
        }
    }
}

pub fn load_family(src: &Source) -> Result<AffineFamily, CliError> {
    match src {
        Source::File(p) => family_from_json(&read_json(p)?, &p.display().to_string()),
        Source::Builtin(n) => builtin_family(n),
    }
}

pub fn load_matrix(src: &Source) -> Result<CMatrix, CliError> {
    match src {
        Source::File(p) => matrix_from_json(&read_json(p)?, &p.display().to_string()),
        Source::Builtin(n) => builtin_matrix(n),
    }
}

/// A scalar given on the command line: `1.5`, `[1.5, -2]` or `1.5,-2`.
pub fn scalar_arg(s: &str, what: &str) -> Result<C64, CliError> {
    let t = s.trim();
    if t.starts_with('[') {
        return scalar(&parse_json(t, what)?, what);
    }
    match t.split_once(',') {
        Some((re, im)) => Ok(C64::new(parse_f64(re, what)?, parse_f64(im, what)?)),
        None => Ok(C64::new(parse_f64(t, what)?, 0.0)),
    }
}

/// A parameter vector: a JSON array (`[0.1, [0, 1]]`) or comma-separated reals.
pub fn vector_arg(s: &str, what: &str) -> Result<Vec<C64>, CliError> {
    let t = s.trim();
    if t.starts_with('[') {
        return scalar_list(&parse_json(t, what)?, what);
    }
    if t.is_empty() {
        return Ok(Vec::new());
    }
    t.split(',').map(|x| parse_f64(x, what).map(|re| C64::new(re, 0.0))).collect()
}

pub fn indices_arg(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',').map(|x| parse_usize(x, "cluster index")).collect()
}

/// `min,max,count` with `count >= 1`.
pub fn range_arg(s: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 3 {
        return Err(bad(format!("{what}: expected min,max,count")));
    }
    let lo = parse_f64(parts[0], what)?;
    let hi = parse_f64(parts[1], what)?;
    let count = parse_usize(parts[2], what)?;
    match count {
        0 => Err(bad(format!("{what}: count must be positive"))),
        1 => Ok(vec![lo]),
        _ => Ok((0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars_accept_numbers_and_pairs() {
        assert_eq!(scalar(&serde_json::json!(2.5), "x").unwrap(), C64::new(2.5, 0.0));
        assert_eq!(scalar(&serde_json::json!([1, -2]), "x").unwrap(), C64::new(1.0, -2.0));
        assert!(scalar(&serde_json::json!("1"), "x").is_err());
        assert!(scalar(&serde_json::json!([1, 2, 3]), "x").is_err());
    }

    #[test]
    fn command_line_values() {
        assert_eq!(scalar_arg("-2", "t").unwrap(), C64::new(-2.0, 0.0));
        assert_eq!(scalar_arg("1,-0.5", "t").unwrap(), C64::new(1.0, -0.5));
        assert_eq!(scalar_arg("[0, 1]", "t").unwrap(), C64::new(0.0, 1.0));
        assert_eq!(vector_arg("-0.03, 8.99", "p").unwrap(), vec![C64::new(-0.03, 0.0), C64::new(8.99, 0.0)]);
        assert_eq!(vector_arg("[1, [0, 2]]", "p").unwrap(), vec![C64::new(1.0, 0.0), C64::new(0.0, 2.0)]);
        assert!(vector_arg("1,nan", "p").is_err());
        assert_eq!(range_arg("0,1,3", "r").unwrap(), vec![0.0, 0.5, 1.0]);
        assert_eq!(range_arg("4,9,1", "r").unwrap(), vec![4.0]);
        assert!(range_arg("0,1,0", "r").is_err());
        assert!(range_arg("0,1", "r").is_err());
    }

    #[test]
    fn builtin_names() {
        assert_eq!(builtin_family("versal-form:3").unwrap().dim(), 3);
        assert!(builtin_family("versal-form:0").is_err());
        assert_eq!(builtin_matrix("frank").unwrap().nrows(), 12);
        assert_eq!(builtin_matrix("frank:5").unwrap().nrows(), 5);
        assert!(builtin_matrix("nilpotent:1e-8").is_err());
        assert!(builtin_matrix("wilkinson").is_err());
    }

    #[test]
    fn fixtures_round_trip_bit_identically() {
        for name in ["cusp", "swallow-tail", "versal-form:4"] {
            let f = builtin_family(name).unwrap();
            let text = report::to_json_string(&family_to_json(&f));
            let back = family_from_json(&parse_json(&text, name).unwrap(), name).unwrap();
            assert_eq!(back.base(), f.base(), "{name}");
            assert_eq!(back.directions(), f.directions(), "{name}");
            assert_eq!(back.domain(), f.domain());
        }
        for name in ["frank:12", "nilpotent", "nilpotent:1e-8:1.5e-9"] {
            let a = builtin_matrix(name).unwrap();
            let text = report::to_json_string(&matrix_to_json(&a));
            assert_eq!(matrix_from_json(&parse_json(&text, name).unwrap(), name).unwrap(), a, "{name}");
        }
    }
}
