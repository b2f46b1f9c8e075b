//! Serde helpers for extended reals: infinities and NaN travel as strings.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum Ext {
    Num(f64),
    Text(String),
}

fn to_ext(v: f64) -> Ext {
    if v.is_finite() {
        Ext::Num(v)
    } else if v.is_nan() {
        Ext::Text("nan".into())
    } else if v > 0.0 {
        Ext::Text("inf".into())
    } else {
        Ext::Text("-inf".into())
    }
}

fn from_ext<E: serde::de::Error>(e: Ext) -> Result<f64, E> {
    match e {
        Ext::Num(v) => Ok(v),
        Ext::Text(s) => match s.as_str() {
            "inf" | "+inf" | "Infinity" => Ok(f64::INFINITY),
            "-inf" | "-Infinity" => Ok(f64::NEG_INFINITY),
            "nan" | "NaN" => Ok(f64::NAN),
            other => other.parse().map_err(E::custom),
        },
    }
}

pub mod ext_f64 {
    use super::*;

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        to_ext(*v).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        from_ext(Ext::deserialize(d)?)
    }
}

pub mod ext_vec {
    use super::*;

    pub fn serialize<S: Serializer>(v: &[f64], s: S) -> Result<S::Ok, S::Error> {
        v.iter().map(|x| to_ext(*x)).collect::<Vec<_>>().serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<Ext>::deserialize(d)?.into_iter().map(from_ext).collect()
    }
}

#[cfg(test)]
mod tests {
    use serde::{Deserialize, Serialize};

    #[derive(Serialize, Deserialize, PartialEq, Debug)]
    struct Row {
        #[serde(with = "super::ext_f64")]
        v: f64,
        #[serde(with = "super::ext_vec")]
        w: Vec<f64>,
    }

    #[test]
    fn infinities_roundtrip() {
        let r = Row {
            v: f64::INFINITY,
            w: vec![1.5, f64::NEG_INFINITY],
        };
        let s = serde_json::to_string(&r).unwrap();
        assert_eq!(s, r#"{"v":"inf","w":[1.5,"-inf"]}"#);
        assert_eq!(serde_json::from_str::<Row>(&s).unwrap(), r);
    }
}
