//! Blocking client for the management and instance endpoints.

use std::thread;
use std::time::{Duration, Instant};

use commonsense_core::profile::ProfileQuery;

use crate::error::ClientError;
use crate::manager::InstanceState;
use crate::xml::{self, MethodCall, Value, FAULT_BUILDING};

pub struct RpcClient {
    url: String,
    agent: ureq::Agent,
}

impl RpcClient {
    /// `url` is the full endpoint, e.g. `http://127.0.0.1:8000/RPC2`.
    pub fn new(url: impl Into<String>) -> Self {
        Self { url: url.into(), agent: ureq::Agent::new_with_defaults() }
    }

    /// Client for an instance port on the management server's host.
    pub fn for_port(&self, port: u16) -> Self {
        let host = self.url.split("://").nth(1).and_then(|rest| rest.split(['/', ':']).next()).unwrap_or("127.0.0.1");
        Self::new(format!("http://{host}:{port}/RPC2"))
    }

    pub fn call(&self, method: &str, params: Vec<Value>) -> Result<Value, ClientError> {
        let body = xml::encode_call(&MethodCall { method: method.to_string(), params });
        let mut resp = self
            .agent
            .post(&self.url)
            .header("Content-Type", "text/xml")
            .send(body)
            .map_err(|e| ClientError::Transport(e.to_string()))?;
        let text = resp.body_mut().read_to_string().map_err(|e| ClientError::Transport(e.to_string()))?;
        xml::decode_response(&text)?.map_err(ClientError::Fault)
    }

    pub fn get_api(&self, q: &ProfileQuery) -> Result<(u16, InstanceState), ClientError> {
        let params = q.to_lists().into_iter().map(Value::strings).collect();
        let v = self.call("getApi", params)?;
        let port = v
            .member("port")
            .and_then(Value::as_i64)
            .and_then(|p| u16::try_from(p).ok())
            .ok_or_else(|| ClientError::Shape("getApi reply lacks a port".into()))?;
        let state = match v.member("state").and_then(Value::as_str) {
            Some("ready") => InstanceState::Ready,
            Some("building") => InstanceState::Building,
            other => return Err(ClientError::Shape(format!("unknown state {other:?}"))),
        };
        Ok((port, state))
    }

    /// Polls `getApi` until the instance is ready.
    pub fn wait_ready(&self, q: &ProfileQuery, timeout: Duration) -> Result<u16, ClientError> {
        let deadline = Instant::now() + timeout;
        loop {
            let (port, state) = self.get_api(q)?;
            if state == InstanceState::Ready {
                return Ok(port);
            }
            if Instant::now() >= deadline {
                return Err(ClientError::Fault(xml::Fault::new(FAULT_BUILDING, "timed out waiting for build")));
            }
            thread::sleep(Duration::from_millis(20));
        }
    }

    pub fn evict_idle(&self, max_idle: Duration) -> Result<usize, ClientError> {
        let v = self.call("evictIdle", vec![Value::Double(max_idle.as_secs_f64())])?;
        v.as_i64()
            .and_then(|n| usize::try_from(n).ok())
            .ok_or_else(|| ClientError::Shape("evictIdle reply is not a count".into()))
    }
}
