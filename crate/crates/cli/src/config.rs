//! Config ingestion: schema validation first, then conversion into library
//! types. Every error carries the JSON pointer of the offending value.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use polyball::rewrite::parse_word;
use polyball::{
    validate_lambda, CMat, Error, LambdaEntry, MultiWord, PhaseMatrix, Piece, RowTuple, StarPolynomial, Tolerances,
    TruncatedModel, Turns,
};
use serde::Deserialize;
use serde_json::Value;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error at {}: {message}", if pointer.is_empty() { "(root)" } else { pointer })]
    Config { pointer: String, message: String },
    #[error("{0}")]
    Io(String),
}

pub type CliResult<T> = std::result::Result<T, CliError>;

pub fn at(pointer: impl Into<String>, message: impl Into<String>) -> CliError {
    CliError::Config { pointer: pointer.into(), message: message.into() }
}

/// Library errors raised while interpreting the value at `pointer`.
pub fn lib_error(pointer: &str, e: Error) -> CliError {
    match e {
        Error::Lambda { index, .. } => at(format!("/lambda/{index}"), e.to_string()),
        other => at(pointer, other.to_string()),
    }
}

pub fn schema(command: &str) -> &'static str {
    match command {
        "check" => include_str!("../schemas/check.json"),
        "rewrite" => include_str!("../schemas/rewrite.json"),
        "vn" => include_str!("../schemas/vn.json"),
        "berezin" => include_str!("../schemas/berezin.json"),
        "dilate" => include_str!("../schemas/dilate.json"),
        "wold" => include_str!("../schemas/wold.json"),
        "beurling" => include_str!("../schemas/beurling.json"),
        "suite" => include_str!("../schemas/suite.json"),
        other => unreachable!("no schema for {other}"),
    }
}

pub fn read(path: &Path) -> CliResult<Value> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| at("", format!("invalid JSON: {e}")))
}

/// Validates against the command's schema; reports the first violation by
/// document position.
pub fn validate(command: &str, config: &Value) -> CliResult<()> {
    let schema: Value = serde_json::from_str(schema(command)).expect("shipped schema is valid JSON");
    let validator = jsonschema::validator_for(&schema).expect("shipped schema compiles");
    let mut errors: Vec<(String, String)> =
        validator.iter_errors(config).map(|e| (e.instance_path().to_string(), e.to_string())).collect();
    errors.sort();
    match errors.into_iter().next() {
        Some((pointer, message)) => Err(at(pointer, format!("schema violation: {message}"))),
        None => Ok(()),
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Num {
    Real(f64),
    Pair([f64; 2]),
}

impl From<Num> for Complex64 {
    fn from(n: Num) -> Self {
        match n {
            Num::Real(x) => Complex64::new(x, 0.0),
            Num::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

fn typed<T: for<'de> Deserialize<'de>>(v: &Value, pointer: &str) -> CliResult<T> {
    T::deserialize(v).map_err(|e| at(pointer, e.to_string()))
}

fn field<'a>(config: &'a Value, key: &str) -> Option<&'a Value> {
    config.get(key)
}

pub fn usize_field(config: &Value, key: &str) -> CliResult<Option<usize>> {
    field(config, key).map(|v| typed(v, &format!("/{key}"))).transpose()
}

pub fn u64_field(config: &Value, key: &str) -> CliResult<Option<u64>> {
    field(config, key).map(|v| typed(v, &format!("/{key}"))).transpose()
}

pub fn reals(config: &Value, key: &str) -> CliResult<Option<Vec<f64>>> {
    field(config, key).map(|v| typed(v, &format!("/{key}"))).transpose()
}

pub fn complex(v: &Value, pointer: &str) -> CliResult<Complex64> {
    Ok(typed::<Num>(v, pointer)?.into())
}

pub fn lambda(config: &Value) -> CliResult<PhaseMatrix> {
    let n: Vec<usize> = typed(field(config, "n").ok_or_else(|| at("", "missing n"))?, "/n")?;
    let mut entries = Vec::new();
    if let Some(list) = field(config, "lambda").and_then(Value::as_array) {
        #[derive(Deserialize)]
        struct Raw {
            i: usize,
            j: usize,
            s: usize,
            t: usize,
            turns: String,
        }
        for (idx, v) in list.iter().enumerate() {
            let r: Raw = typed(v, &format!("/lambda/{idx}"))?;
            let turns = Turns::from_str(&r.turns).map_err(|e| lib_error(&format!("/lambda/{idx}/turns"), e))?;
            entries.push(LambdaEntry { i: r.i, j: r.j, s: r.s, t: r.t, turns });
        }
    }
    validate_lambda(&n, &entries).map_err(|e| lib_error("/n", e))
}

pub fn tolerances(config: &Value) -> CliResult<Tolerances> {
    #[derive(Deserialize, Default)]
    struct Raw {
        residual: Option<f64>,
        eigen: Option<f64>,
        rank: Option<f64>,
    }
    let raw: Raw = field(config, "tolerances").map(|v| typed(v, "/tolerances")).transpose()?.unwrap_or_default();
    let d = Tolerances::default();
    Ok(Tolerances {
        residual: raw.residual.unwrap_or(d.residual),
        eigen: raw.eigen.unwrap_or(d.eigen),
        rank: raw.rank.unwrap_or(d.rank),
    })
}

pub fn matrix(v: &Value, pointer: &str) -> CliResult<CMat> {
    let rows: Vec<Vec<Num>> = typed(v, pointer)?;
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(r) = rows.iter().position(|r| r.len() != cols) {
        return Err(at(format!("{pointer}/{r}"), format!("row has {} entries, expected {cols}", rows[r].len())));
    }
    let n = rows.len();
    let entries: Vec<Complex64> = rows.into_iter().flatten().map(Complex64::from).collect();
    Ok(CMat::from_row_slice(n, cols, &entries))
}

pub fn square_matrix(v: &Value, pointer: &str) -> CliResult<CMat> {
    let m = matrix(v, pointer)?;
    if m.nrows() != m.ncols() {
        return Err(at(pointer, format!("matrix is {}x{}, expected square", m.nrows(), m.ncols())));
    }
    Ok(m)
}

pub fn tuple(config: &Value, lam: &PhaseMatrix) -> CliResult<RowTuple> {
    let blocks = field(config, "tuple").and_then(Value::as_array).ok_or_else(|| at("/tuple", "missing tuple"))?;
    if blocks.len() != lam.k() {
        return Err(at("/tuple", format!("{} blocks given, n has {}", blocks.len(), lam.k())));
    }
    let mut ops = Vec::new();
    let mut dim = None;
    for (i, block) in blocks.iter().enumerate() {
        let mats = block.as_array().map(Vec::as_slice).unwrap_or(&[]);
        if mats.len() != lam.n()[i] {
            return Err(at(format!("/tuple/{i}"), format!("{} operators given, n_{} = {}", mats.len(), i + 1, lam.n()[i])));
        }
        let mut row = Vec::new();
        for (s, m) in mats.iter().enumerate() {
            let ptr = format!("/tuple/{i}/{s}");
            let m = square_matrix(m, &ptr)?;
            match dim {
                None => dim = Some(m.nrows()),
                Some(d) if d != m.nrows() => return Err(at(ptr, format!("dimension {} differs from {d}", m.nrows()))),
                _ => {}
            }
            row.push(m);
        }
        ops.push(row);
    }
    RowTuple::new(lam, ops).map_err(|e| lib_error("/tuple", e))
}

pub fn polynomial(v: &Value, pointer: &str, lam: &PhaseMatrix) -> CliResult<StarPolynomial> {
    let terms = v.as_array().map(Vec::as_slice).unwrap_or(&[]);
    let mut out = StarPolynomial::zero(lam.n());
    for (idx, term) in terms.iter().enumerate() {
        let ptr = format!("{pointer}/{idx}");
        let word = term.get("word").and_then(Value::as_str).ok_or_else(|| at(&ptr, "missing word"))?;
        let letters = parse_word(word, lam.n()).map_err(|e| lib_error(&format!("{ptr}/word"), e))?;
        let coeff = term.get("coeff").map(|c| complex(c, &format!("{ptr}/coeff"))).transpose()?;
        out = out.add(&polyball::reduce_word(lam, &letters).scale(coeff.unwrap_or(Complex64::new(1.0, 0.0))));
    }
    Ok(out)
}

pub fn pieces(v: &Value, pointer: &str) -> CliResult<Vec<Piece>> {
    let list = v.as_array().map(Vec::as_slice).unwrap_or(&[]);
    let mut out = Vec::new();
    for (idx, p) in list.iter().enumerate() {
        let ptr = format!("{pointer}/{idx}");
        let subset: Vec<usize> = typed(&p["A"], &format!("{ptr}/A"))?;
        let wandering: Option<usize> = p.get("wandering_dim").map(|w| typed(w, &format!("{ptr}/wandering_dim"))).transpose()?;
        let mut unitaries = BTreeMap::new();
        if let Some(map) = p.get("unitaries").and_then(Value::as_object) {
            for (key, m) in map {
                let j: usize = key.parse().map_err(|_| at(format!("{ptr}/unitaries"), format!("bad block key {key:?}")))?;
                unitaries.insert(j, square_matrix(m, &format!("{ptr}/unitaries/{key}"))?);
            }
        }
        let piece = if unitaries.is_empty() {
            Piece::pure(subset, wandering.unwrap_or(1))
        } else {
            let piece = Piece::with_unitaries(subset, unitaries);
            if let Some(w) = wandering.filter(|&w| w != piece.wandering_dim) {
                return Err(at(
                    format!("{ptr}/wandering_dim"),
                    format!("wandering_dim {w} but the unitaries are {0}x{0}", piece.wandering_dim),
                ));
            }
            piece
        };
        out.push(piece);
    }
    Ok(out)
}

/// Columns of an ambient matrix from a list of coordinate vectors.
pub fn vectors(v: &Value, pointer: &str, rows: usize) -> CliResult<CMat> {
    let list: Vec<Vec<Num>> = typed(v, pointer)?;
    let mut m = CMat::zeros(rows, list.len());
    for (j, vec) in list.into_iter().enumerate() {
        if vec.len() != rows {
            return Err(at(format!("{pointer}/{j}"), format!("vector has {} coordinates, expected {rows}", vec.len())));
        }
        for (r, x) in vec.into_iter().enumerate() {
            m[(r, j)] = x.into();
        }
    }
    Ok(m)
}

pub fn multiword(text: &str, pointer: &str, lam: &PhaseMatrix) -> CliResult<MultiWord> {
    let w = MultiWord::from_str(text).map_err(|e| lib_error(pointer, e))?;
    MultiWord::from_letters_checked(w.parts().iter().map(|p| p.letters.clone()).collect(), lam.n())
        .map_err(|e| lib_error(pointer, e))
}

pub fn model(lam: &PhaseMatrix, degree: usize) -> CliResult<TruncatedModel> {
    TruncatedModel::new(lam, degree).map_err(|e| lib_error("/degree", e))
}
