//! JSON helpers for numeric payloads: floats go out as 17-significant-digit
//! decimals, complex numbers as `[re, im]` pairs.

use num_complex::Complex64;
use serde::ser::{SerializeMap, SerializeSeq};
use serde::{Serialize, Serializer};
use serde_json::value::RawValue;

use crate::state::{DensityMatrix, StateVector};

pub(crate) fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `f64` serialised with 17 significant digits.
#[derive(Debug, Clone, Copy)]
pub struct Num17(pub f64);

impl Serialize for Num17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return s.serialize_none();
        }
        let raw = RawValue::from_string(fmt17(self.0)).map_err(serde::ser::Error::custom)?;
        raw.serialize(s)
    }
}

/// Complex number as `[re, im]`.
#[derive(Debug, Clone, Copy)]
pub struct Amp(pub Complex64);

impl Serialize for Amp {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(2))?;
        seq.serialize_element(&Num17(self.0.re))?;
        seq.serialize_element(&Num17(self.0.im))?;
        seq.end()
    }
}

pub(crate) fn serialize_density<S: Serializer>(rho: &DensityMatrix, s: S) -> Result<S::Ok, S::Error> {
    let d = rho.dim();
    let rows: Vec<Vec<Amp>> = (0..d).map(|r| (0..d).map(|c| Amp(rho.matrix()[(r, c)])).collect()).collect();
    rows.serialize(s)
}

pub(crate) fn serialize_opt_density<S: Serializer>(rho: &Option<DensityMatrix>, s: S) -> Result<S::Ok, S::Error> {
    match rho {
        Some(r) => serialize_density(r, s),
        None => s.serialize_none(),
    }
}

#[derive(Serialize)]
struct AmpEntry {
    bits: String,
    amp: Amp,
}

/// Non-negligible amplitudes as `[{"bits": "010", "amp": [re, im]}, ...]`.
pub(crate) fn serialize_state<S: Serializer>(state: &StateVector, s: S) -> Result<S::Ok, S::Error> {
    let entries: Vec<AmpEntry> = state
        .support()
        .into_iter()
        .map(|(bits, a)| AmpEntry { bits, amp: Amp(a) })
        .collect();
    entries.serialize(s)
}

/// String pairs serialised as a JSON object in insertion order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct OrderedMap(pub Vec<(String, String)>);

impl Serialize for OrderedMap {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.0.len()))?;
        for (k, v) in &self.0 {
            m.serialize_entry(k, v)?;
        }
        m.end()
    }
}
