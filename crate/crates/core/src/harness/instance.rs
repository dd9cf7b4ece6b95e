//! JSON instance files.
//!
//! Complex scalars are `[re, im]`, an algebra element is a list of square
//! 2-D arrays (one per block), a module vector a list of elements and an
//! operator a 2-D array of elements indexed `[input][output]`.

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgElement, AlgebraSpec};
use crate::error::{Error, Result};
use crate::frames::FrameSeq;
use crate::hilbmod::{ModuleOperator, ModuleVector};
use crate::linalg::CMat;
use crate::perturb::Abg;
use num_complex::Complex64;

pub type RawComplex = [f64; 2];
pub type RawElement = Vec<Vec<Vec<RawComplex>>>;
pub type RawVector = Vec<RawElement>;
pub type RawOperator = Vec<Vec<RawElement>>;

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBounds {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<RawElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<RawElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<RawElement>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<RawElement>,
}

impl RawBounds {
    fn is_empty(&self) -> bool {
        self == &RawBounds::default()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawAbg {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub algebra: Vec<usize>,
    pub rank: usize,
    pub frame: Vec<RawVector>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub k: Option<RawOperator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<RawOperator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<RawOperator>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<RawOperator>,
    #[serde(default, skip_serializing_if = "RawBounds::is_empty")]
    pub bounds: RawBounds,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbation: Option<RawAbg>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perturbed: Option<Vec<RawVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub functionals: Option<Vec<RawVector>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub right: Option<Box<InstanceFile>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

#[derive(Clone, Debug, Default)]
pub struct Bounds {
    pub a: Option<AlgElement>,
    pub b: Option<AlgElement>,
    pub c: Option<AlgElement>,
    pub d: Option<AlgElement>,
}

/// A parsed, well-formed instance.
#[derive(Clone, Debug)]
pub struct Instance {
    pub frame: FrameSeq,
    pub k: Option<ModuleOperator>,
    pub l: Option<ModuleOperator>,
    pub p: Option<ModuleOperator>,
    /// Co-isometry for the invariance audit.
    pub t: Option<ModuleOperator>,
    pub bounds: Bounds,
    pub abg: Option<Abg>,
    pub perturbed: Option<FrameSeq>,
    pub functionals: Option<Vec<ModuleVector>>,
    /// Second factor for tensor products.
    pub right: Option<Box<Instance>>,
    pub tol: Option<f64>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
}

impl Instance {
    pub fn new(frame: FrameSeq) -> Self {
        Instance {
            frame,
            k: None,
            l: None,
            p: None,
            t: None,
            bounds: Bounds::default(),
            abg: None,
            perturbed: None,
            functionals: None,
            right: None,
            tol: None,
            samples: None,
            seed: None,
        }
    }

    pub fn spec(&self) -> &AlgebraSpec {
        self.frame.spec()
    }

    pub fn rank(&self) -> usize {
        self.frame.rank()
    }

    pub fn from_file(file: &InstanceFile) -> Result<Self> {
        from_file_at(file, "")
    }

    pub fn to_file(&self) -> InstanceFile {
        InstanceFile {
            algebra: self.spec().block_dims().to_vec(),
            rank: self.rank(),
            frame: self.frame.members().iter().map(raw_vector).collect(),
            k: self.k.as_ref().map(raw_operator),
            l: self.l.as_ref().map(raw_operator),
            p: self.p.as_ref().map(raw_operator),
            t: self.t.as_ref().map(raw_operator),
            bounds: RawBounds {
                a: self.bounds.a.as_ref().map(raw_element),
                b: self.bounds.b.as_ref().map(raw_element),
                c: self.bounds.c.as_ref().map(raw_element),
                d: self.bounds.d.as_ref().map(raw_element),
            },
            perturbation: self.abg.map(|x| RawAbg {
                alpha: x.alpha,
                beta: x.beta,
                gamma: x.gamma,
            }),
            perturbed: self
                .perturbed
                .as_ref()
                .map(|h| h.members().iter().map(raw_vector).collect()),
            functionals: self
                .functionals
                .as_ref()
                .map(|g| g.iter().map(raw_vector).collect()),
            right: self.right.as_ref().map(|r| Box::new(r.to_file())),
            tol: self.tol,
            samples: self.samples,
            seed: self.seed,
        }
    }

    pub fn to_json(&self) -> String {
        write_instance(&self.to_file())
    }
}

pub fn parse_instance(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {}, column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    Instance::from_file(&file)
}

pub fn write_instance(file: &InstanceFile) -> String {
    serde_json::to_string_pretty(file).expect("instance files serialize")
}

/// `write(parse(x))`: the canonical form of a valid instance text.
pub fn normalize(text: &str) -> Result<String> {
    Ok(parse_instance(text)?.to_json())
}

fn parse_err(location: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Parse {
        location: location.into(),
        message: message.into(),
    }
}

fn join(prefix: &str, field: &str) -> String {
    if prefix.is_empty() {
        field.to_string()
    } else {
        format!("{prefix}.{field}")
    }
}

fn from_file_at(file: &InstanceFile, prefix: &str) -> Result<Instance> {
    let spec = AlgebraSpec::new(file.algebra.clone())
        .map_err(|e| parse_err(join(prefix, "algebra"), e.to_string()))?;
    let n = file.rank;
    let frame_at = join(prefix, "frame");
    let members = vectors(&spec, n, &file.frame, &frame_at)?;
    let frame =
        FrameSeq::new(&spec, n, members).map_err(|e| parse_err(&frame_at, e.to_string()))?;
    let mut inst = Instance::new(frame);
    let op = |raw: &Option<RawOperator>, name: &str| -> Result<Option<ModuleOperator>> {
        raw.as_ref()
            .map(|r| operator(&spec, n, r, &join(prefix, name)))
            .transpose()
    };
    inst.k = op(&file.k, "k")?;
    inst.l = op(&file.l, "l")?;
    inst.p = op(&file.p, "p")?;
    inst.t = op(&file.t, "t")?;
    let el = |raw: &Option<RawElement>, name: &str| -> Result<Option<AlgElement>> {
        raw.as_ref()
            .map(|r| element(&spec, r, &join(prefix, &format!("bounds.{name}"))))
            .transpose()
    };
    inst.bounds = Bounds {
        a: el(&file.bounds.a, "a")?,
        b: el(&file.bounds.b, "b")?,
        c: el(&file.bounds.c, "c")?,
        d: el(&file.bounds.d, "d")?,
    };
    inst.abg = file
        .perturbation
        .map(|x| Abg::new(x.alpha, x.beta, x.gamma));
    if let Some(raw) = &file.perturbed {
        let at = join(prefix, "perturbed");
        let hs = vectors(&spec, n, raw, &at)?;
        inst.perturbed =
            Some(FrameSeq::new(&spec, n, hs).map_err(|e| parse_err(&at, e.to_string()))?);
    }
    if let Some(raw) = &file.functionals {
        inst.functionals = Some(vectors(&spec, n, raw, &join(prefix, "functionals"))?);
    }
    if let Some(r) = &file.right {
        inst.right = Some(Box::new(from_file_at(r, &join(prefix, "right"))?));
    }
    if let Some(tol) = file.tol {
        if !(tol >= 0.0 && tol.is_finite()) {
            return Err(parse_err(
                join(prefix, "tol"),
                "must be a finite nonnegative number",
            ));
        }
    }
    inst.tol = file.tol;
    inst.samples = file.samples;
    inst.seed = file.seed;
    Ok(inst)
}

fn element(spec: &AlgebraSpec, raw: &RawElement, at: &str) -> Result<AlgElement> {
    let dims = spec.block_dims();
    if raw.len() != dims.len() {
        return Err(parse_err(
            at,
            format!("expected {} blocks, found {}", dims.len(), raw.len()),
        ));
    }
    let mut blocks = Vec::with_capacity(dims.len());
    for (b, (rows, &d)) in raw.iter().zip(dims).enumerate() {
        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
            return Err(parse_err(
                format!("{at}[{b}]"),
                format!("block must be {d}x{d}"),
            ));
        }
        if rows.iter().flatten().flatten().any(|x| !x.is_finite()) {
            return Err(parse_err(format!("{at}[{b}]"), "non-finite entry"));
        }
        blocks.push(CMat::from_fn(d, d, |r, c| {
            Complex64::new(rows[r][c][0], rows[r][c][1])
        }));
    }
    AlgElement::from_blocks(spec, blocks).map_err(|e| parse_err(at, e.to_string()))
}

fn vector(spec: &AlgebraSpec, n: usize, raw: &RawVector, at: &str) -> Result<ModuleVector> {
    if raw.len() != n {
        return Err(parse_err(
            at,
            format!("expected {n} entries, found {}", raw.len()),
        ));
    }
    let entries = raw
        .iter()
        .enumerate()
        .map(|(i, e)| element(spec, e, &format!("{at}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    ModuleVector::new(spec, entries).map_err(|e| parse_err(at, e.to_string()))
}

fn vectors(spec: &AlgebraSpec, n: usize, raw: &[RawVector], at: &str) -> Result<Vec<ModuleVector>> {
    raw.iter()
        .enumerate()
        .map(|(j, v)| vector(spec, n, v, &format!("{at}[{j}]")))
        .collect()
}

fn operator(spec: &AlgebraSpec, n: usize, raw: &RawOperator, at: &str) -> Result<ModuleOperator> {
    if raw.is_empty() {
        return Err(parse_err(at, "operator needs at least one input slot"));
    }
    let out = raw[0].len();
    if out != n {
        return Err(parse_err(
            at,
            format!("operator must map into rank {n}, found {out} outputs"),
        ));
    }
    let mut entries = Vec::with_capacity(raw.len());
    for (j, row) in raw.iter().enumerate() {
        if row.len() != out {
            return Err(parse_err(
                format!("{at}[{j}]"),
                format!("expected {out} outputs, found {}", row.len()),
            ));
        }
        let parsed = row
            .iter()
            .enumerate()
            .map(|(i, e)| element(spec, e, &format!("{at}[{j}][{i}]")))
            .collect::<Result<Vec<_>>>()?;
        entries.push(parsed);
    }
    ModuleOperator::new(spec, entries, out).map_err(|e| parse_err(at, e.to_string()))
}

pub fn raw_element(a: &AlgElement) -> RawElement {
    a.blocks()
        .iter()
        .map(|m| {
            (0..m.nrows())
                .map(|r| {
                    (0..m.ncols())
                        .map(|c| [m[(r, c)].re, m[(r, c)].im])
                        .collect()
                })
                .collect()
        })
        .collect()
}

pub fn raw_vector(f: &ModuleVector) -> RawVector {
    f.entries().iter().map(raw_element).collect()
}

pub fn raw_operator(t: &ModuleOperator) -> RawOperator {
    (0..t.in_rank())
        .map(|j| {
            (0..t.out_rank())
                .map(|i| raw_element(t.entry(j, i)))
                .collect()
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"{
        "algebra": [1, 1],
        "rank": 1,
        "frame": [[[[[[1.0, 0.0]]], [[[0.0, 0.0]]]]], [[[[[0.0, 0.0]]], [[[2.0, 0.5]]]]]],
        "bounds": {"a": [[[[0.5, 0.0]]], [[[0.5, 0.0]]]]},
        "seed": 7
    }"#;

    #[test]
    fn parses_and_normalizes() {
        let inst = parse_instance(SMALL).unwrap();
        assert_eq!(inst.frame.len(), 2);
        assert_eq!(inst.seed, Some(7));
        assert!(inst.bounds.a.is_some() && inst.bounds.b.is_none());
        let canon = normalize(SMALL).unwrap();
        assert_eq!(normalize(&canon).unwrap(), canon);
    }

    #[test]
    fn diagnostics_name_the_field() {
        let bad = SMALL.replace("[[[2.0, 0.5]]]", "[[[2.0, 0.5], [1.0, 0.0]]]");
        match parse_instance(&bad) {
            Err(Error::Parse { location, .. }) => assert_eq!(location, "frame[1][0][1]"),
            other => panic!("{other:?}"),
        }
        match parse_instance("{\"algebra\": [1], \"rank\": 1,\n \"frame\": [], \"bogus\": 1}") {
            Err(Error::Parse { location, .. }) => {
                assert!(location.starts_with("line 2"), "{location}")
            }
            other => panic!("{other:?}"),
        }
        let wrong_rank = SMALL.replace("\"rank\": 1", "\"rank\": 2");
        assert!(matches!(
            parse_instance(&wrong_rank),
            Err(Error::Parse { .. })
        ));
    }
}
