//! JSON encodings for infinite values: `"inf"` in place of a number.

/// `Option<usize>` where `None` is infinity.
pub mod hops {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Finite(usize),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &Option<usize>, s: S) -> Result<S::Ok, S::Error> {
        match v {
            Some(n) => s.serialize_u64(*n as u64),
            None => s.serialize_str("inf"),
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<usize>, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Finite(n) => Ok(Some(n)),
            Repr::Text(t) if t == "inf" => Ok(None),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected integer or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// `f64` where `+inf` is written as `"inf"`.
pub mod inf_f64 {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Finite(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if *v == f64::INFINITY {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Finite(v) => Ok(v),
            Repr::Text(t) if t == "inf" => Ok(f64::INFINITY),
            Repr::Text(t) => Err(serde::de::Error::custom(format!(
                "expected number or \"inf\", got {t:?}"
            ))),
        }
    }
}

/// Chain successors where `None` is `"OUTER"`.
pub mod chain {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Hole(usize),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &[Option<usize>], s: S) -> Result<S::Ok, S::Error> {
        let out: Vec<Repr> = v
            .iter()
            .map(|x| x.map_or(Repr::Text("OUTER".into()), Repr::Hole))
            .collect();
        out.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<Option<usize>>, D::Error> {
        Vec::<Repr>::deserialize(d)?
            .into_iter()
            .map(|r| match r {
                Repr::Hole(j) => Ok(Some(j)),
                Repr::Text(t) if t == "OUTER" => Ok(None),
                Repr::Text(t) => Err(serde::de::Error::custom(format!(
                    "expected hole index or \"OUTER\", got {t:?}"
                ))),
            })
            .collect()
    }
}
