//! Canonical JSON encoding: object keys sorted by byte order, no
//! insignificant whitespace.
//!
//! Key order is enforced here rather than relying on `serde_json::Map`
//! being a `BTreeMap`, which stops being true as soon as any crate in the
//! build enables serde_json's `preserve_order` feature.

use serde::Serialize;
use serde_json::Value;

/// Encodes `value` canonically.
pub fn to_vec<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    // Serializing plain data structs to a Value cannot fail; map keys in the
    // IR are always strings.
    let value = serde_json::to_value(value).expect("IR types serialize to JSON");
    let mut out = Vec::with_capacity(256);
    write_value(&value, &mut out);
    out
}

pub fn to_string<T: Serialize + ?Sized>(value: &T) -> String {
    String::from_utf8(to_vec(value)).expect("JSON output is UTF-8")
}

/// Length in bytes of the canonical encoding.
pub fn encoded_len<T: Serialize + ?Sized>(value: &T) -> usize {
    to_vec(value).len()
}

pub fn write_value(value: &Value, out: &mut Vec<u8>) {
    match value {
        Value::Object(map) => {
            let mut entries: Vec<(&String, &Value)> = map.iter().collect();
            entries.sort_unstable_by(|a, b| a.0.as_bytes().cmp(b.0.as_bytes()));
            out.push(b'{');
            for (i, (key, val)) in entries.into_iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                serde_json::to_writer(&mut *out, key.as_str()).expect("writing to a Vec cannot fail");
                out.push(b':');
                write_value(val, out);
            }
            out.push(b'}');
        }
        Value::Array(items) => {
            out.push(b'[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(b',');
                }
                write_value(item, out);
            }
            out.push(b']');
        }
        scalar => write_scalar(scalar, out),
    }
}

fn write_scalar(value: &Value, out: &mut Vec<u8>) {
    serde_json::to_writer(&mut *out, value).expect("writing to a Vec cannot fail");
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn keys_are_sorted_at_every_level() {
        let v = json!({"b": 1, "a": {"z": [ {"y": 1, "x": 2} ], "c": null}});
        assert_eq!(to_string(&v), r#"{"a":{"c":null,"z":[{"x":2,"y":1}]},"b":1}"#);
    }

    #[test]
    fn strings_are_escaped() {
        let v = json!({"k\"": "line\nbreak"});
        assert_eq!(to_string(&v), r#"{"k\"":"line\nbreak"}"#);
    }
}
