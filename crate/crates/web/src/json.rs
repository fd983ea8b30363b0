//! The DICOM JSON model: attributes keyed by 8-digit hexadecimal tags with
//! `vr` and `Value` members. Bulk data (OB, OD, OF, OW, UN) is left out.

use std::str::FromStr;

use dicom_annot::dataset::{DataElement, DataSet, DecimalString, Tag, Value, VR};
use serde_json::{json, Map, Number, Value as Json};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum JsonError {
    #[error("expected {expected} at {at}")]
    Shape { expected: &'static str, at: String },
    #[error("unknown VR {vr:?} at {at}")]
    UnknownVr { vr: String, at: String },
    #[error("invalid value at {at}: {detail}")]
    Value { at: String, detail: String },
}

fn tag_key(tag: Tag) -> String {
    format!("{:08X}", tag.to_u32())
}

fn number(text: &str) -> Json {
    Number::from_str(text)
        .map(Json::Number)
        .unwrap_or_else(|_| Json::String(text.to_string()))
}

fn element_json(e: &DataElement) -> Option<Json> {
    let values: Vec<Json> = match &e.value {
        Value::Bytes(_) => return None,
        Value::Text(v) | Value::Uid(v) => v.iter().map(|s| Json::String(s.clone())).collect(),
        Value::PersonName(v) => v.iter().map(|s| json!({ "Alphabetic": s })).collect(),
        Value::Decimal(v) => v.iter().map(|d| number(d.as_str())).collect(),
        Value::Int(v) => v.iter().map(|&i| json!(i)).collect(),
        Value::Float(v) => v
            .iter()
            .map(|&f| Number::from_f64(f).map_or(Json::Null, Json::Number))
            .collect(),
        Value::Tags(v) => v.iter().map(|&t| Json::String(tag_key(t))).collect(),
        Value::Sequence(items) => items.iter().map(to_json).collect(),
    };
    let mut obj = Map::new();
    obj.insert("vr".into(), Json::String(e.vr.as_str().into()));
    if !values.is_empty() {
        obj.insert("Value".into(), Json::Array(values));
    }
    Some(Json::Object(obj))
}

pub fn to_json(ds: &DataSet) -> Json {
    Json::Object(
        ds.iter()
            .filter_map(|e| Some((tag_key(e.tag), element_json(e)?)))
            .collect(),
    )
}

fn vr_from(s: &str) -> Option<VR> {
    let b = s.as_bytes();
    (b.len() == 2)
        .then(|| VR::from_bytes([b[0], b[1]]))
        .flatten()
}

fn text_of(v: &Json, at: &str) -> Result<String, JsonError> {
    match v {
        Json::String(s) => Ok(s.clone()),
        Json::Number(n) => Ok(n.to_string()),
        Json::Null => Ok(String::new()),
        _ => Err(JsonError::Shape {
            expected: "string",
            at: at.into(),
        }),
    }
}

fn parse_element(tag: Tag, obj: &Json, at: &str) -> Result<DataElement, JsonError> {
    let vr_text = obj
        .get("vr")
        .and_then(Json::as_str)
        .ok_or_else(|| JsonError::Shape {
            expected: "object with vr",
            at: at.into(),
        })?;
    let vr = vr_from(vr_text).ok_or_else(|| JsonError::UnknownVr {
        vr: vr_text.into(),
        at: at.into(),
    })?;
    let empty = Vec::new();
    let values = match obj.get("Value") {
        None => &empty,
        Some(Json::Array(v)) => v,
        Some(_) => {
            return Err(JsonError::Shape {
                expected: "Value array",
                at: at.into(),
            })
        }
    };
    let bad = |detail: String| JsonError::Value {
        at: at.into(),
        detail,
    };
    let value = match Value::empty(vr) {
        Value::Bytes(_) => Value::Bytes(Vec::new()),
        Value::Text(_) => Value::Text(
            values
                .iter()
                .map(|v| text_of(v, at))
                .collect::<Result<_, _>>()?,
        ),
        Value::Uid(_) => Value::Uid(
            values
                .iter()
                .map(|v| text_of(v, at))
                .collect::<Result<_, _>>()?,
        ),
        Value::PersonName(_) => Value::PersonName(
            values
                .iter()
                .map(|v| match v {
                    Json::Object(o) => Ok(o
                        .get("Alphabetic")
                        .and_then(Json::as_str)
                        .unwrap_or("")
                        .to_string()),
                    other => text_of(other, at),
                })
                .collect::<Result<_, _>>()?,
        ),
        Value::Decimal(_) => Value::Decimal(
            values
                .iter()
                .map(|v| {
                    DecimalString::new(text_of(v, at)?.as_str()).map_err(|e| bad(e.to_string()))
                })
                .collect::<Result<_, _>>()?,
        ),
        Value::Int(_) => Value::Int(
            values
                .iter()
                .map(|v| match v {
                    Json::Number(n) => n
                        .as_i64()
                        .ok_or_else(|| bad(format!("{n} is not an integer"))),
                    Json::String(s) => s
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("{s:?} is not an integer"))),
                    _ => Err(bad("expected integer".into())),
                })
                .collect::<Result<_, _>>()?,
        ),
        Value::Float(_) => Value::Float(
            values
                .iter()
                .map(|v| match v {
                    Json::Number(n) => n
                        .as_f64()
                        .ok_or_else(|| bad(format!("{n} is not a number"))),
                    Json::String(s) => s
                        .trim()
                        .parse()
                        .map_err(|_| bad(format!("{s:?} is not a number"))),
                    _ => Err(bad("expected number".into())),
                })
                .collect::<Result<_, _>>()?,
        ),
        Value::Tags(_) => Value::Tags(
            values
                .iter()
                .map(|v| {
                    let s = text_of(v, at)?;
                    Tag::parse_hex(&s).ok_or_else(|| bad(format!("{s:?} is not a tag")))
                })
                .collect::<Result<_, _>>()?,
        ),
        Value::Sequence(_) => {
            Value::Sequence(values.iter().map(from_json).collect::<Result<_, _>>()?)
        }
    };
    Ok(DataElement::new(tag, vr, value))
}

pub fn from_json(v: &Json) -> Result<DataSet, JsonError> {
    let obj = v.as_object().ok_or_else(|| JsonError::Shape {
        expected: "object",
        at: "dataset".into(),
    })?;
    let mut ds = DataSet::new();
    for (key, element) in obj {
        let tag = Tag::parse_hex(key).ok_or_else(|| JsonError::Shape {
            expected: "8-digit hex tag",
            at: key.clone(),
        })?;
        ds.put(parse_element(tag, element, key)?);
    }
    Ok(ds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use dicom_annot::dataset::tags;

    #[test]
    fn standard_shapes() {
        let mut d = DataSet::new();
        d.set_text(tags::MODALITY, VR::CS, "SEG");
        d.set_text(tags::PATIENT_NAME, VR::PN, "Doe^Jane");
        d.set_decimals(
            tags::PIXEL_SPACING,
            vec![DecimalString::new("0.50").unwrap()],
        );
        d.set_int(tags::ROWS, VR::US, 512);
        d.set_bytes(tags::PIXEL_DATA, VR::OB, vec![1, 2]);
        d.set_empty(tags::ACCESSION_NUMBER, VR::SH);
        let j = to_json(&d);
        assert_eq!(j["00080060"], json!({"vr": "CS", "Value": ["SEG"]}));
        assert_eq!(j["00100010"]["Value"][0]["Alphabetic"], "Doe^Jane");
        assert_eq!(j["00280030"]["Value"][0].to_string(), "0.50");
        assert_eq!(j["00280010"]["Value"][0], 512);
        assert_eq!(j["00080050"], json!({"vr": "SH"}));
        assert!(j.get("7FE00010").is_none());
        let mut back = from_json(&j).unwrap();
        d.remove(tags::PIXEL_DATA);
        back.remove(tags::PIXEL_DATA);
        assert_eq!(back, d);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(from_json(&json!([])).is_err());
        assert!(matches!(
            from_json(&json!({"zz": {"vr": "CS"}})),
            Err(JsonError::Shape { .. })
        ));
        assert!(matches!(
            from_json(&json!({"00080060": {"vr": "QQ"}})),
            Err(JsonError::UnknownVr { .. })
        ));
        assert!(matches!(
            from_json(&json!({"00280010": {"vr": "US", "Value": ["x"]}})),
            Err(JsonError::Value { .. })
        ));
    }
}
