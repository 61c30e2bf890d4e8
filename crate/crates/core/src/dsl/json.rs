use serde::Serialize;
use serde_json::Value;

use crate::SCHEMA;

/// The value with a `schema` field added at the top level. Objects get the
/// field directly; anything else is wrapped as `{"schema", "value"}`.
pub fn to_json_value<T: Serialize + ?Sized>(x: &T) -> Value {
    let v = serde_json::to_value(x).expect("report types serialize without failure");
    match v {
        Value::Object(mut map) => {
            map.insert("schema".into(), Value::String(SCHEMA.into()));
            Value::Object(map)
        }
        other => serde_json::json!({ "schema": SCHEMA, "value": other }),
    }
}

/// Pretty-printed, key-sorted JSON ending in a newline.
pub fn to_json<T: Serialize + ?Sized>(x: &T) -> String {
    let mut s = serde_json::to_string_pretty(&to_json_value(x)).expect("values serialize");
    s.push('\n');
    s
}
