//! Parameter values that read the same from a command-line flag and from a
//! JSON config: `"2,2,4"` or `[2,2,4]`, `"0,1;0"` or `[[0,1],[0]]`.

use std::fmt;
use std::str::FromStr;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::Value;

/// Splits on `sep` outside square brackets.
pub fn split_top(text: &str, sep: char) -> Vec<&str> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        match ch {
            '[' => depth += 1,
            ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push(&text[start..i]);
                start = i + ch.len_utf8();
            }
            _ => {}
        }
    }
    out.push(&text[start..]);
    out
}

fn parse_ints(text: &str) -> Result<Vec<i64>, String> {
    let t = text.trim();
    if t.is_empty() {
        return Ok(Vec::new());
    }
    t.split(',').map(|s| s.trim().parse::<i64>().map_err(|e| format!("{s:?}: {e}"))).collect()
}

/// A list of integers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntList(pub Vec<i64>);

impl FromStr for IntList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_ints(s).map(IntList)
    }
}

impl Serialize for IntList {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.parse().map_err(D::Error::custom),
            Value::Number(n) => n.as_i64().map(|x| IntList(vec![x])).ok_or_else(|| D::Error::custom("not an integer")),
            v => serde_json::from_value(v).map(IntList).map_err(D::Error::custom),
        }
    }
}

/// A list of integer lists, `;`-separated on the command line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntSets(pub Vec<Vec<i64>>);

impl FromStr for IntSets {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        s.split(';').map(parse_ints).collect::<Result<_, _>>().map(IntSets)
    }
}

impl Serialize for IntSets {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for IntSets {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.parse().map_err(D::Error::custom),
            v => serde_json::from_value(v).map(IntSets).map_err(D::Error::custom),
        }
    }
}

/// Ring elements as text: `3`, `-1` or `[3,1]`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Elems(pub Vec<String>);

fn element_text(v: &Value) -> Result<String, String> {
    match v {
        Value::Number(n) => Ok(n.to_string()),
        Value::String(s) => Ok(s.trim().to_string()),
        Value::Array(cs) => {
            let parts: Vec<String> = cs
                .iter()
                .map(|c| c.as_i64().map(|x| x.to_string()).ok_or_else(|| format!("bad coefficient {c}")))
                .collect::<Result<_, _>>()?;
            Ok(format!("[{}]", parts.join(",")))
        }
        other => Err(format!("bad ring element {other}")),
    }
}

fn element_value(text: &str) -> Value {
    match text.parse::<i64>() {
        Ok(n) => Value::from(n),
        Err(_) => match text.strip_prefix('[').and_then(|t| t.strip_suffix(']')).map(parse_ints) {
            Some(Ok(cs)) => Value::from(cs),
            _ => Value::from(text),
        },
    }
}

impl FromStr for Elems {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().is_empty() {
            return Ok(Elems(Vec::new()));
        }
        Ok(Elems(split_top(s, ',').into_iter().map(|x| x.trim().to_string()).collect()))
    }
}

impl Serialize for Elems {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.iter().map(|x| element_value(x)).collect::<Vec<_>>().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Elems {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.parse().map_err(D::Error::custom),
            Value::Array(xs) => {
                xs.iter().map(element_text).collect::<Result<_, _>>().map(Elems).map_err(D::Error::custom)
            }
            v => element_text(&v).map(|x| Elems(vec![x])).map_err(D::Error::custom),
        }
    }
}

/// Sets of ring elements, `;`-separated on the command line.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ElemSets(pub Vec<Elems>);

impl FromStr for ElemSets {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        split_top(s, ';').into_iter().map(str::parse).collect::<Result<_, _>>().map(ElemSets)
    }
}

impl Serialize for ElemSets {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ElemSets {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.parse().map_err(D::Error::custom),
            v => serde_json::from_value(v).map(ElemSets).map_err(D::Error::custom),
        }
    }
}

/// Strings, `;`-separated on the command line (polynomials).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TextList(pub Vec<String>);

impl FromStr for TextList {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        if s.trim().is_empty() {
            return Ok(TextList(Vec::new()));
        }
        Ok(TextList(split_top(s, ';').into_iter().map(|x| x.trim().to_string()).collect()))
    }
}

impl Serialize for TextList {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for TextList {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s.parse().map_err(D::Error::custom),
            v => serde_json::from_value(v).map(TextList).map_err(D::Error::custom),
        }
    }
}

impl fmt::Display for IntList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(i64::to_string).collect();
        write!(f, "{}", parts.join(","))
    }
}
