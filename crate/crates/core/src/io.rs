//! JSON formats for matrices, tuples and representations.
//!
//! A matrix is `{"dim": n, "entries": [[...], ...]}` with row-major real
//! entries; an optional `"imag"` array of the same shape carries imaginary
//! parts when the crate is built with complex scalars. A representation is
//! `{"name", "dim", "generators": [matrix...], "relations": [["g0","G0"]...]}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::group::{GroupRep, Word};
use crate::matrix::{InvertibleMatrix, Mat, PosDefMatrix, Scalar};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MatrixJson {
    pub dim: usize,
    pub entries: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<f64>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TupleJson {
    pub points: Vec<MatrixJson>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GroupRepJson {
    pub name: String,
    pub dim: usize,
    pub generators: Vec<MatrixJson>,
    #[serde(default)]
    pub relations: Vec<Vec<String>>,
}

fn parse_err(what: &str, msg: impl Into<String>) -> Error {
    Error::Parse {
        what: what.to_string(),
        msg: msg.into(),
    }
}

#[cfg(not(feature = "complex"))]
fn re_im(z: Scalar) -> (f64, f64) {
    (z, 0.0)
}

#[cfg(feature = "complex")]
fn re_im(z: Scalar) -> (f64, f64) {
    (z.re, z.im)
}

#[cfg(not(feature = "complex"))]
fn make_scalar(re: f64, im: f64, field: &str) -> Result<Scalar> {
    if im != 0.0 {
        return Err(parse_err(
            field,
            "nonzero imaginary part, but complex scalars are not enabled",
        ));
    }
    Ok(re)
}

#[cfg(feature = "complex")]
fn make_scalar(re: f64, im: f64, _field: &str) -> Result<Scalar> {
    Ok(Scalar::new(re, im))
}

fn check_grid(what: &str, name: &str, rows: &[Vec<f64>], dim: usize) -> Result<()> {
    if rows.len() != dim {
        return Err(parse_err(
            what,
            format!(
                "field `{name}` has {} rows, expected dim = {dim}",
                rows.len()
            ),
        ));
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != dim {
            return Err(parse_err(
                what,
                format!(
                    "field `{name}[{i}]` has {} entries, expected {dim}",
                    row.len()
                ),
            ));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(parse_err(
                what,
                format!("field `{name}[{i}][{j}]` is not finite"),
            ));
        }
    }
    Ok(())
}

impl MatrixJson {
    /// Validates shape and finiteness; `what` names the source in errors.
    pub fn to_mat(&self, what: &str) -> Result<Mat> {
        if self.dim == 0 {
            return Err(parse_err(what, "field `dim` must be positive"));
        }
        check_grid(what, "entries", &self.entries, self.dim)?;
        if let Some(im) = &self.imag {
            check_grid(what, "imag", im, self.dim)?;
        }
        let n = self.dim;
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let im = self.imag.as_ref().map_or(0.0, |g| g[i][j]);
                m[(i, j)] = make_scalar(self.entries[i][j], im, what)?;
            }
        }
        Ok(m)
    }

    pub fn from_mat(m: &Mat) -> Self {
        let n = m.nrows();
        let mut entries = vec![vec![0.0; n]; n];
        let mut imag = vec![vec![0.0; n]; n];
        let mut any_imag = false;
        for i in 0..n {
            for j in 0..n {
                let (re, im) = re_im(m[(i, j)]);
                entries[i][j] = re;
                imag[i][j] = im;
                any_imag |= im != 0.0;
            }
        }
        MatrixJson {
            dim: n,
            entries,
            imag: any_imag.then_some(imag),
        }
    }

    pub fn to_posdef(&self, what: &str) -> Result<PosDefMatrix> {
        PosDefMatrix::new(self.to_mat(what)?)
    }

    pub fn to_invertible(&self, what: &str) -> Result<InvertibleMatrix> {
        InvertibleMatrix::new(self.to_mat(what)?)
    }
}

impl From<&PosDefMatrix> for MatrixJson {
    fn from(p: &PosDefMatrix) -> Self {
        MatrixJson::from_mat(p.entries())
    }
}

impl From<&InvertibleMatrix> for MatrixJson {
    fn from(p: &InvertibleMatrix) -> Self {
        MatrixJson::from_mat(p.entries())
    }
}

impl GroupRepJson {
    pub fn to_rep(&self, what: &str) -> Result<GroupRep> {
        let mut gens = Vec::with_capacity(self.generators.len());
        for (k, g) in self.generators.iter().enumerate() {
            let field = format!("{what}: generators[{k}]");
            if g.dim != self.dim {
                return Err(parse_err(
                    &field,
                    format!(
                        "dim {} differs from the representation dim {}",
                        g.dim, self.dim
                    ),
                ));
            }
            gens.push(g.to_invertible(&field)?);
        }
        let relations = self
            .relations
            .iter()
            .enumerate()
            .map(|(k, r)| {
                Word::from_tokens(r)
                    .map_err(|e| parse_err(&format!("{what}: relations[{k}]"), e.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        for (k, r) in relations.iter().enumerate() {
            if let Some(l) = r.0.iter().find(|l| l.generator >= gens.len()) {
                return Err(parse_err(
                    &format!("{what}: relations[{k}]"),
                    format!("letter {l} refers to a missing generator"),
                ));
            }
        }
        GroupRep::new(self.name.clone(), gens, relations)
    }

    pub fn from_rep(rep: &GroupRep) -> Self {
        GroupRepJson {
            name: rep.name.clone(),
            dim: rep.dim(),
            generators: rep.generators().iter().map(MatrixJson::from).collect(),
            relations: rep.relations().iter().map(Word::tokens).collect(),
        }
    }
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| parse_err(&path.display().to_string(), e.to_string()))
}

pub fn parse_matrix(text: &str, what: &str) -> Result<Mat> {
    let m: MatrixJson = serde_json::from_str(text).map_err(|e| parse_err(what, e.to_string()))?;
    m.to_mat(what)
}

pub fn read_matrix(path: impl AsRef<Path>) -> Result<Mat> {
    let path = path.as_ref();
    read_json::<MatrixJson>(path)?.to_mat(&path.display().to_string())
}

pub fn read_posdef(path: impl AsRef<Path>) -> Result<PosDefMatrix> {
    PosDefMatrix::new(read_matrix(path)?)
}

pub fn read_invertible(path: impl AsRef<Path>) -> Result<InvertibleMatrix> {
    InvertibleMatrix::new(read_matrix(path)?)
}

/// Reads `{"points": [matrix...]}`.
pub fn read_tuple(path: impl AsRef<Path>) -> Result<Vec<PosDefMatrix>> {
    let path = path.as_ref();
    let t: TupleJson = read_json(path)?;
    t.points
        .iter()
        .enumerate()
        .map(|(k, m)| m.to_posdef(&format!("{}: points[{k}]", path.display())))
        .collect()
}

pub fn read_rep(path: impl AsRef<Path>) -> Result<GroupRep> {
    let path = path.as_ref();
    read_json::<GroupRepJson>(path)?.to_rep(&path.display().to_string())
}
