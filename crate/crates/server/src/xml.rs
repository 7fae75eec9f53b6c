//! XML method-call envelopes: values, calls, responses and faults.

use std::fmt::Write as _;

use quick_xml::escape::{escape, resolve_predefined_entity};
use quick_xml::events::Event;
use quick_xml::Reader;

use crate::error::CodecError;

#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Double(f64),
    Str(String),
    Array(Vec<Value>),
    /// Members in wire order.
    Struct(Vec<(String, Value)>),
}

impl Value {
    pub fn str(s: impl Into<String>) -> Self {
        Value::Str(s.into())
    }

    pub fn strings<I, S>(items: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Value::Array(items.into_iter().map(|s| Value::Str(s.into())).collect())
    }

    pub fn record<I, K>(members: I) -> Self
    where
        I: IntoIterator<Item = (K, Value)>,
        K: Into<String>,
    {
        Value::Struct(members.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            Value::Int(n) => Some(*n),
            _ => None,
        }
    }

    /// Doubles, and ints widened to doubles.
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Value::Double(x) => Some(*x),
            Value::Int(n) => Some(*n as f64),
            _ => None,
        }
    }

    pub fn as_array(&self) -> Option<&[Value]> {
        match self {
            Value::Array(a) => Some(a),
            _ => None,
        }
    }

    pub fn member(&self, name: &str) -> Option<&Value> {
        match self {
            Value::Struct(m) => m.iter().find(|(k, _)| k == name).map(|(_, v)| v),
            _ => None,
        }
    }

    fn write(&self, out: &mut String) {
        out.push_str("<value>");
        match self {
            Value::Int(n) => {
                let _ = write!(out, "<int>{n}</int>");
            }
            Value::Bool(b) => {
                let _ = write!(out, "<boolean>{}</boolean>", u8::from(*b));
            }
            Value::Double(x) => {
                let _ = write!(out, "<double>{x}</double>");
            }
            Value::Str(s) => {
                let _ = write!(out, "<string>{}</string>", escape(s.as_str()));
            }
            Value::Array(items) => {
                out.push_str("<array><data>");
                for v in items {
                    v.write(out);
                }
                out.push_str("</data></array>");
            }
            Value::Struct(members) => {
                out.push_str("<struct>");
                for (k, v) in members {
                    let _ = write!(out, "<member><name>{}</name>", escape(k.as_str()));
                    v.write(out);
                    out.push_str("</member>");
                }
                out.push_str("</struct>");
            }
        }
        out.push_str("</value>");
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodCall {
    pub method: String,
    pub params: Vec<Value>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fault {
    pub code: i64,
    pub message: String,
}

pub const FAULT_UNKNOWN_METHOD: i64 = 1;
pub const FAULT_BAD_PARAMS: i64 = 2;
pub const FAULT_BUILDING: i64 = 3;
pub const FAULT_SERVER: i64 = 4;

impl Fault {
    pub fn new(code: i64, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }

    pub fn unknown_method(name: &str) -> Self {
        Self::new(FAULT_UNKNOWN_METHOD, format!("unknown method `{name}`"))
    }

    pub fn bad_params(message: impl Into<String>) -> Self {
        Self::new(FAULT_BAD_PARAMS, message)
    }

    pub fn building() -> Self {
        Self::new(FAULT_BUILDING, "network is still being built")
    }

    pub fn server(message: impl Into<String>) -> Self {
        Self::new(FAULT_SERVER, message)
    }
}

impl std::fmt::Display for Fault {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "fault {}: {}", self.code, self.message)
    }
}

pub type Response = Result<Value, Fault>;

const DECL: &str = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>";

pub fn encode_call(call: &MethodCall) -> String {
    let mut out = format!("{DECL}<methodCall><methodName>{}</methodName><params>", escape(call.method.as_str()));
    for p in &call.params {
        out.push_str("<param>");
        p.write(&mut out);
        out.push_str("</param>");
    }
    out.push_str("</params></methodCall>");
    out
}

pub fn encode_response(response: &Response) -> String {
    let mut out = format!("{DECL}<methodResponse>");
    match response {
        Ok(v) => {
            out.push_str("<params><param>");
            v.write(&mut out);
            out.push_str("</param></params>");
        }
        Err(fault) => {
            out.push_str("<fault>");
            Value::record([("faultCode", Value::Int(fault.code)), ("faultString", Value::str(fault.message.clone()))])
                .write(&mut out);
            out.push_str("</fault>");
        }
    }
    out.push_str("</methodResponse>");
    out
}

pub fn decode_call(xml: &str) -> Result<MethodCall, CodecError> {
    let mut p = Parser::new(xml)?;
    p.open("methodCall")?;
    p.open("methodName")?;
    let method = p.text()?;
    p.close("methodName")?;
    let mut params = Vec::new();
    if p.peek_open("params") {
        p.open("params")?;
        while p.peek_open("param") {
            p.open("param")?;
            params.push(p.value()?);
            p.close("param")?;
        }
        p.close("params")?;
    }
    p.close("methodCall")?;
    p.end()?;
    Ok(MethodCall { method: method.trim().to_string(), params })
}

pub fn decode_response(xml: &str) -> Result<Response, CodecError> {
    let mut p = Parser::new(xml)?;
    p.open("methodResponse")?;
    let response = if p.peek_open("fault") {
        p.open("fault")?;
        let v = p.value()?;
        p.close("fault")?;
        let code = v.member("faultCode").and_then(Value::as_i64);
        let message = v.member("faultString").and_then(Value::as_str);
        match (code, message) {
            (Some(code), Some(message)) => Err(Fault::new(code, message)),
            _ => return Err(CodecError::Shape("fault without faultCode/faultString".into())),
        }
    } else {
        p.open("params")?;
        p.open("param")?;
        let v = p.value()?;
        p.close("param")?;
        p.close("params")?;
        Ok(v)
    };
    p.close("methodResponse")?;
    p.end()?;
    Ok(response)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Open(String),
    Close(String),
    Text(String),
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
}

impl Parser {
    fn new(xml: &str) -> Result<Self, CodecError> {
        let mut reader = Reader::from_str(xml);
        let mut toks: Vec<Tok> = Vec::new();
        let push_text = |toks: &mut Vec<Tok>, s: &str| match toks.last_mut() {
            Some(Tok::Text(t)) => t.push_str(s),
            _ => toks.push(Tok::Text(s.to_string())),
        };
        loop {
            match reader.read_event()? {
                Event::Start(e) => toks.push(Tok::Open(tag_name(e.name().as_ref()))),
                Event::End(e) => toks.push(Tok::Close(tag_name(e.name().as_ref()))),
                Event::Empty(e) => {
                    let n = tag_name(e.name().as_ref());
                    toks.push(Tok::Open(n.clone()));
                    toks.push(Tok::Close(n));
                }
                Event::Text(t) => push_text(&mut toks, &t.into_inner()),
                Event::CData(t) => push_text(&mut toks, &t.into_inner()),
                Event::GeneralRef(r) => {
                    let resolved = match r.resolve_char_ref()? {
                        Some(c) => c.to_string(),
                        None => {
                            let entity = r.into_inner();
                            resolve_predefined_entity(&entity)
                                .ok_or_else(|| CodecError::Shape(format!("unknown entity `&{entity};`")))?
                                .to_string()
                        }
                    };
                    push_text(&mut toks, &resolved);
                }
                Event::Eof => break,
                Event::Decl(_) | Event::Comment(_) | Event::PI(_) | Event::DocType(_) => {}
            }
        }
        Ok(Self { toks, pos: 0 })
    }

    /// Skips whitespace-only text between elements.
    fn skip_blank(&mut self) {
        while let Some(Tok::Text(t)) = self.toks.get(self.pos) {
            if !t.trim().is_empty() {
                break;
            }
            self.pos += 1;
        }
    }

    fn peek_open(&mut self, tag: &str) -> bool {
        self.skip_blank();
        matches!(self.toks.get(self.pos), Some(Tok::Open(n)) if n == tag)
    }

    fn open(&mut self, tag: &str) -> Result<(), CodecError> {
        if self.peek_open(tag) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.unexpected(&format!("<{tag}>")))
        }
    }

    fn close(&mut self, tag: &str) -> Result<(), CodecError> {
        self.skip_blank();
        match self.toks.get(self.pos) {
            Some(Tok::Close(n)) if n == tag => {
                self.pos += 1;
                Ok(())
            }
            _ => Err(self.unexpected(&format!("</{tag}>"))),
        }
    }

    fn peek_close(&mut self, tag: &str) -> bool {
        self.skip_blank();
        matches!(self.toks.get(self.pos), Some(Tok::Close(n)) if n == tag)
    }

    /// Raw text up to the next tag, empty if there is none.
    fn text(&mut self) -> Result<String, CodecError> {
        match self.toks.get(self.pos) {
            Some(Tok::Text(t)) => {
                let t = t.clone();
                self.pos += 1;
                Ok(t)
            }
            _ => Ok(String::new()),
        }
    }

    fn end(&mut self) -> Result<(), CodecError> {
        self.skip_blank();
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            Err(self.unexpected("end of document"))
        }
    }

    fn unexpected(&self, wanted: &str) -> CodecError {
        let found = match self.toks.get(self.pos) {
            Some(Tok::Open(n)) => format!("<{n}>"),
            Some(Tok::Close(n)) => format!("</{n}>"),
            Some(Tok::Text(t)) => format!("text `{}`", t.trim()),
            None => "end of document".into(),
        };
        CodecError::Shape(format!("expected {wanted}, found {found}"))
    }

    fn value(&mut self) -> Result<Value, CodecError> {
        self.open("value")?;
        // untyped content is a string, whitespace included
        if let Some(Tok::Text(_)) = self.toks.get(self.pos) {
            let save = self.pos;
            let raw = self.text()?;
            if self.peek_close("value") {
                self.pos += 1;
                return Ok(Value::Str(raw));
            }
            self.pos = save;
        }
        if self.peek_close("value") {
            self.pos += 1;
            return Ok(Value::Str(String::new()));
        }
        let tag = match self.toks.get(self.pos) {
            Some(Tok::Open(n)) => n.clone(),
            _ => return Err(self.unexpected("a value type")),
        };
        self.pos += 1;
        let v = match tag.as_str() {
            "int" | "i4" | "i8" => {
                let t = self.text()?;
                Value::Int(t.trim().parse().map_err(|_| CodecError::Shape(format!("bad int `{t}`")))?)
            }
            "boolean" => match self.text()?.trim() {
                "1" => Value::Bool(true),
                "0" => Value::Bool(false),
                other => return Err(CodecError::Shape(format!("bad boolean `{other}`"))),
            },
            "double" => {
                let t = self.text()?;
                Value::Double(t.trim().parse().map_err(|_| CodecError::Shape(format!("bad double `{t}`")))?)
            }
            "string" => Value::Str(self.text()?),
            "array" => {
                self.open("data")?;
                let mut items = Vec::new();
                while self.peek_open("value") {
                    items.push(self.value()?);
                }
                self.close("data")?;
                Value::Array(items)
            }
            "struct" => {
                let mut members = Vec::new();
                while self.peek_open("member") {
                    self.pos += 1;
                    self.open("name")?;
                    let n = self.text()?;
                    self.close("name")?;
                    members.push((n, self.value()?));
                    self.close("member")?;
                }
                Value::Struct(members)
            }
            other => return Err(CodecError::Shape(format!("unsupported value type <{other}>"))),
        };
        self.close(&tag)?;
        self.close("value")?;
        Ok(v)
    }
}

fn tag_name(raw: &str) -> String {
    raw.to_string()
}
