//! JSON helpers: every float in our JSON files is written with 17 significant
//! digits (`d.dddddddddddddddde±x`), which round-trips any `f64` exactly.

use serde::ser::{Error as _, Serialize, Serializer};
use serde_json::value::RawValue;

pub fn sig17(x: f64) -> String {
    format!("{x:.16e}")
}

pub(crate) struct Float17(pub f64);

impl Serialize for Float17 {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if !self.0.is_finite() {
            return Err(S::Error::custom(format!("non-finite float {}", self.0)));
        }
        let raw = RawValue::from_string(sig17(self.0)).map_err(S::Error::custom)?;
        raw.serialize(s)
    }
}

pub(crate) fn floats<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
    s.collect_seq(v.iter().map(|&x| Float17(x)))
}

pub(crate) fn float_rows<S: Serializer>(rows: &[Vec<f64>], s: S) -> Result<S::Ok, S::Error> {
    struct Row<'a>(&'a [f64]);
    impl Serialize for Row<'_> {
        fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
            floats(self.0, s)
        }
    }
    s.collect_seq(rows.iter().map(|r| Row(r)))
}
