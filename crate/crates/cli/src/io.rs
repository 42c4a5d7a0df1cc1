//! JSON system files.
//!
//! Matrices are nested row arrays whose entries are `[re, im]` pairs. Bare
//! numbers are read as real entries. Files are always written in pair form.

use std::fmt;
use std::path::Path;

use hinf_core::linalg::{self, ComplexMatrix};
use hinf_core::pencil::MatrixPencil;
use hinf_core::realization::{self, Center, CenteredRealization, DescriptorRealization, Partition, PartitionedPlant};
use num_complex::Complex64;
use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeTuple, Serializer};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry(pub Complex64);

impl Serialize for Entry {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut t = s.serialize_tuple(2)?;
        t.serialize_element(&self.0.re)?;
        t.serialize_element(&self.0.im)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for Entry {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Entry;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a [re, im] pair")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Entry, E> {
                Ok(Entry(Complex64::new(v, 0.0)))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Entry, E> {
                Ok(Entry(Complex64::new(v as f64, 0.0)))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Entry, E> {
                Ok(Entry(Complex64::new(v as f64, 0.0)))
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> Result<Entry, A::Error> {
                let re: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(0, &self))?;
                let im: f64 = seq.next_element()?.ok_or_else(|| de::Error::invalid_length(1, &self))?;
                if seq.next_element::<f64>()?.is_some() {
                    return Err(de::Error::invalid_length(3, &self));
                }
                Ok(Entry(Complex64::new(re, im)))
            }
        }
        d.deserialize_any(V)
    }
}

type Rows = Vec<Vec<Entry>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Centered,
    Descriptor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionSpec {
    pub m1: usize,
    pub m2: usize,
    pub p1: usize,
    pub p2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemFile {
    pub kind: Kind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z0: Option<Entry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Entry>,
    #[serde(rename = "E")]
    pub e: Rows,
    #[serde(rename = "A")]
    pub a: Rows,
    #[serde(rename = "B")]
    pub b: Rows,
    #[serde(rename = "C")]
    pub c: Rows,
    #[serde(rename = "D")]
    pub d: Rows,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<PartitionSpec>,
}

fn input_error(msg: impl Into<String>) -> CliError {
    CliError::Input(msg.into())
}

fn to_matrix(rows: &Rows, name: &str, nrows: usize, ncols: usize) -> Result<ComplexMatrix, CliError> {
    if ncols == 0 && rows.is_empty() {
        return Ok(linalg::zeros(nrows, 0));
    }
    if rows.len() != nrows {
        return Err(input_error(format!("{name} has {} rows, expected {nrows}", rows.len())));
    }
    let mut m = linalg::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        if row.len() != ncols {
            return Err(input_error(format!("{name} row {i} has {} entries, expected {ncols}", row.len())));
        }
        for (j, v) in row.iter().enumerate() {
            if !(v.0.re.is_finite() && v.0.im.is_finite()) {
                return Err(input_error(format!("{name}[{i}][{j}] is not finite")));
            }
            m[(i, j)] = v.0;
        }
    }
    Ok(m)
}

fn to_rows(m: &ComplexMatrix) -> Rows {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| Entry(m[(i, j)])).collect()).collect()
}

/// Width of a block with possibly zero rows, taken from the first row.
fn width(rows: &Rows) -> Option<usize> {
    rows.first().map(|r| r.len())
}

/// A loaded file, before any conversion.
#[derive(Debug, Clone)]
pub enum System {
    Centered(CenteredRealization),
    Descriptor(DescriptorRealization),
}

impl SystemFile {
    pub fn read(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| input_error(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| input_error(format!("malformed system file: {e}")))
    }

    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        std::fs::write(path, self.to_json()).map_err(|e| input_error(format!("{}: {e}", path.display())))
    }

    /// Pretty JSON with one matrix row per line.
    pub fn to_json(&self) -> String {
        let serde_json::Value::Object(fields) = serde_json::to_value(self).expect("plain data") else {
            unreachable!("a system file serializes to an object")
        };
        let mut s = String::from("{\n");
        for (i, (key, value)) in fields.iter().enumerate() {
            s.push_str(&format!("  {}: ", serde_json::Value::String(key.clone())));
            match value {
                serde_json::Value::Array(rows) if !rows.is_empty() && rows.iter().all(|r| r.is_array()) => {
                    let rows: Vec<String> = rows.iter().map(|r| format!("    {r}")).collect();
                    s.push_str(&format!("[\n{}\n  ]", rows.join(",\n")));
                }
                other => s.push_str(&other.to_string()),
            }
            s.push_str(if i + 1 < fields.len() { ",\n" } else { "\n" });
        }
        s.push_str("}\n");
        s
    }

    fn dims(&self) -> Result<(usize, usize, usize), CliError> {
        let n = self.a.len();
        let p = self.d.len();
        let m = width(&self.d)
            .or_else(|| width(&self.b))
            .ok_or_else(|| input_error("cannot infer the input count: D and B are empty"))?;
        Ok((n, m, p))
    }

    fn center(&self) -> Result<Center, CliError> {
        let bad = |e: hinf_core::Error| input_error(e.to_string());
        match (self.z0, self.alpha) {
            (_, Some(alpha)) => {
                let c = Center::new(alpha.0).map_err(bad)?;
                if let Some(z0) = self.z0 {
                    if (c.z0() - z0.0).norm() > 1e-12 {
                        return Err(input_error("z0 is not alpha squared"));
                    }
                }
                Ok(c)
            }
            (Some(z0), None) => Center::from_z0(z0.0).map_err(bad),
            (None, None) => Err(input_error("centered file needs z0 or alpha")),
        }
    }

    pub fn system(&self) -> Result<System, CliError> {
        let (n, m, p) = self.dims()?;
        let a = to_matrix(&self.a, "A", n, n)?;
        let e = to_matrix(&self.e, "E", n, n)?;
        let b = to_matrix(&self.b, "B", n, m)?;
        let c = to_matrix(&self.c, "C", p, n)?;
        let d = to_matrix(&self.d, "D", p, m)?;
        let pencil = MatrixPencil::new(a, e).map_err(|e| input_error(e.to_string()))?;
        if !pencil.is_regular_with_seed(crate::seed()) {
            return Err(hinf_core::Error::SingularPencil.into());
        }
        match self.kind {
            Kind::Centered => {
                let center = self.center()?;
                Ok(System::Centered(CenteredRealization::new(pencil, b, c, d, center)?))
            }
            Kind::Descriptor => {
                if self.z0.is_some() || self.alpha.is_some() {
                    return Err(input_error("descriptor files carry no center"));
                }
                Ok(System::Descriptor(DescriptorRealization::new(pencil, b, c, d)?))
            }
        }
    }

    /// Centered form; descriptor files are converted at `z0`.
    pub fn centered(&self, z0: Complex64) -> Result<CenteredRealization, CliError> {
        match self.system()? {
            System::Centered(s) => Ok(s),
            System::Descriptor(d) => Ok(realization::from_descriptor(&d, z0)?),
        }
    }

    pub fn partitioned(&self, z0: Complex64) -> Result<PartitionedPlant, CliError> {
        let part = self.partition.ok_or_else(|| input_error("system file has no partition"))?;
        let sys = self.centered(z0)?;
        let PartitionSpec { m1, m2, p1, p2 } = part;
        if m1 + m2 != sys.inputs() || p1 + p2 != sys.outputs() {
            return Err(input_error("partition widths do not add up to the system size"));
        }
        PartitionedPlant::new(sys, Partition { m1, m2, p1, p2 }).map_err(|e| input_error(e.to_string()))
    }

    pub fn from_centered(sys: &CenteredRealization, partition: Option<Partition>) -> Self {
        let center = sys.center();
        SystemFile {
            kind: Kind::Centered,
            z0: Some(Entry(center.z0())),
            alpha: Some(Entry(center.alpha())),
            e: to_rows(sys.e()),
            a: to_rows(sys.a()),
            b: to_rows(sys.b()),
            c: to_rows(sys.c()),
            d: to_rows(sys.d()),
            partition: partition.map(|p| PartitionSpec { m1: p.m1, m2: p.m2, p1: p.p1, p2: p.p2 }),
        }
    }

    pub fn from_plant(plant: &PartitionedPlant) -> Self {
        Self::from_centered(&plant.sys, Some(plant.part))
    }

    pub fn from_descriptor(sys: &DescriptorRealization) -> Self {
        SystemFile {
            kind: Kind::Descriptor,
            z0: None,
            alpha: None,
            e: to_rows(sys.pencil.e()),
            a: to_rows(sys.pencil.a()),
            b: to_rows(&sys.b),
            c: to_rows(&sys.c),
            d: to_rows(&sys.d),
            partition: None,
        }
    }
}

/// `re,im` or a bare real number.
pub fn parse_complex(s: &str) -> Result<Complex64, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    let num = |t: &str| t.parse::<f64>().map_err(|_| format!("'{t}' is not a number"));
    match parts.as_slice() {
        [re] => Ok(Complex64::new(num(re)?, 0.0)),
        [re, im] => Ok(Complex64::new(num(re)?, num(im)?)),
        _ => Err(format!("expected re,im, got '{s}'")),
    }
}
