//! Instance registry: one listener per canonical profile query, built at
//! most once, evicted when idle.

use std::collections::HashMap;
use std::net::{IpAddr, Ipv4Addr, SocketAddr, TcpListener as StdListener};
use std::str::FromStr;
use std::sync::{Arc, Mutex, OnceLock};
use std::time::{Duration, Instant};

use axum::extract::State;
use axum::http::header;
use axum::response::IntoResponse;
use axum::routing::post;
use axum::Router;
use commonsense_core::filter::NetworkHandle;
use commonsense_core::profile::ProfileQuery;
use log::{info, warn};
use serde::{Deserialize, Serialize};
use tokio::runtime::Handle;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

use crate::error::ServerError;
use crate::methods::{self, Services, METHODS};
use crate::xml::{self, Fault, Response};

pub const PORT_RANGE_ENV: &str = "COMMONSENSE_PORT_RANGE";

/// Inclusive range of ports handed to instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PortRange {
    pub start: u16,
    pub end: u16,
}

impl Default for PortRange {
    fn default() -> Self {
        Self { start: 20000, end: 20999 }
    }
}

impl FromStr for PortRange {
    type Err = ServerError;

    /// `START-END`, both inclusive.
    fn from_str(s: &str) -> Result<Self, ServerError> {
        let bad = || ServerError::BadPortRange(s.to_string());
        let (a, b) = s.trim().split_once('-').ok_or_else(bad)?;
        let start: u16 = a.trim().parse().map_err(|_| bad())?;
        let end: u16 = b.trim().parse().map_err(|_| bad())?;
        if start == 0 || start > end {
            return Err(bad());
        }
        Ok(Self { start, end })
    }
}

impl PortRange {
    /// The range in the environment variable, or the default.
    pub fn from_env() -> Result<Self, ServerError> {
        match std::env::var(PORT_RANGE_ENV) {
            Ok(v) => v.parse(),
            Err(_) => Ok(Self::default()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InstanceState {
    Building,
    Ready,
}

impl InstanceState {
    pub fn as_str(self) -> &'static str {
        match self {
            InstanceState::Building => "building",
            InstanceState::Ready => "ready",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Acquired {
    pub port: u16,
    pub state: InstanceState,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceInfo {
    pub key: String,
    pub port: u16,
    pub state: InstanceState,
}

/// What the instance listener sees: the network once built, and the clock.
struct Slot {
    net: OnceLock<Result<NetworkHandle, String>>,
    last_used: Mutex<Instant>,
}

impl Slot {
    fn touch(&self) {
        *self.last_used.lock().expect("clock") = Instant::now();
    }

    fn idle(&self) -> Duration {
        self.last_used.lock().expect("clock").elapsed()
    }

    fn state(&self) -> Result<InstanceState, String> {
        match self.net.get() {
            None => Ok(InstanceState::Building),
            Some(Ok(_)) => Ok(InstanceState::Ready),
            Some(Err(e)) => Err(e.clone()),
        }
    }
}

struct Instance {
    query: ProfileQuery,
    port: u16,
    slot: Arc<Slot>,
    shutdown: oneshot::Sender<()>,
    task: JoinHandle<()>,
}

pub struct Manager {
    services: Services,
    ports: PortRange,
    host: IpAddr,
    runtime: Handle,
    registry: Mutex<HashMap<String, Instance>>,
}

impl Manager {
    /// Must be called inside a tokio runtime; instances run on it.
    pub fn new(services: Services, ports: PortRange, host: IpAddr) -> Self {
        Self { services, ports, host, runtime: Handle::current(), registry: Mutex::new(HashMap::new()) }
    }

    pub fn localhost(services: Services, ports: PortRange) -> Self {
        Self::new(services, ports, IpAddr::V4(Ipv4Addr::LOCALHOST))
    }

    pub fn services(&self) -> &Services {
        &self.services
    }

    pub fn ports(&self) -> PortRange {
        self.ports
    }

    /// Port of the instance serving `q`, starting one if needed. A new
    /// instance listens at once and answers fault 3 until its network is
    /// ready. A failed build is reported once and then forgotten.
    pub fn acquire(&self, q: &ProfileQuery) -> Result<Acquired, ServerError> {
        let key = q.canonical_key();
        let mut registry = self.registry.lock().expect("registry");
        if let Some(inst) = registry.get(&key) {
            inst.slot.touch();
            match inst.slot.state() {
                Ok(state) => return Ok(Acquired { port: inst.port, state }),
                Err(msg) => {
                    let inst = registry.remove(&key).expect("present");
                    let _ = inst.shutdown.send(());
                    return Err(ServerError::Build(msg));
                }
            }
        }
        let (listener, port) = self.bind_free(&registry)?;
        let slot = Arc::new(Slot { net: OnceLock::new(), last_used: Mutex::new(Instant::now()) });
        if self.services.repository.is_cached(q) {
            let handle = self.services.repository.materialize(q).map_err(ServerError::from)?;
            let _ = slot.net.set(Ok(handle));
        } else {
            let (repo, q2, slot2) = (Arc::clone(&self.services.repository), q.clone(), Arc::clone(&slot));
            self.runtime.spawn_blocking(move || {
                let result = repo.materialize(&q2).map_err(|e| e.to_string());
                if let Err(e) = &result {
                    warn!("build for {} failed: {e}", q2.canonical_key());
                }
                let _ = slot2.net.set(result);
            });
        }
        let (shutdown, rx) = oneshot::channel();
        let app = instance_router(InstanceCtx { slot: Arc::clone(&slot), services: self.services.clone() });
        let task = self.runtime.spawn(async move {
            let listener = match tokio::net::TcpListener::from_std(listener) {
                Ok(l) => l,
                Err(e) => return warn!("instance listener on port {port}: {e}"),
            };
            let served = axum::serve(listener, app).with_graceful_shutdown(async move {
                let _ = rx.await;
            });
            if let Err(e) = served.await {
                warn!("instance on port {port} stopped: {e}");
            }
        });
        info!("instance for {key} on port {port}");
        let state = slot.state().unwrap_or(InstanceState::Building);
        registry.insert(key, Instance { query: q.clone(), port, slot, shutdown, task });
        Ok(Acquired { port, state })
    }

    fn bind_free(&self, registry: &HashMap<String, Instance>) -> Result<(StdListener, u16), ServerError> {
        for port in self.ports.start..=self.ports.end {
            if registry.values().any(|i| i.port == port) {
                continue;
            }
            if let Ok(listener) = StdListener::bind(SocketAddr::new(self.host, port)) {
                listener.set_nonblocking(true)?;
                return Ok((listener, port));
            }
        }
        Err(ServerError::PoolExhausted { start: self.ports.start, end: self.ports.end })
    }

    pub fn instances(&self) -> Vec<InstanceInfo> {
        let registry = self.registry.lock().expect("registry");
        let mut out: Vec<InstanceInfo> = registry
            .iter()
            .map(|(key, inst)| InstanceInfo {
                key: key.clone(),
                port: inst.port,
                state: inst.slot.state().unwrap_or(InstanceState::Building),
            })
            .collect();
        out.sort_by_key(|i| i.port);
        out
    }

    /// Stops instances idle for longer than `max_idle` and frees their
    /// ports. Instances still building are kept. Persisted networks stay on
    /// disk, so a later acquire reloads without rebuilding.
    pub async fn evict_idle(&self, max_idle: Duration) -> usize {
        let evicted: Vec<Instance> = {
            let mut registry = self.registry.lock().expect("registry");
            let keys: Vec<String> = registry
                .iter()
                .filter(|(_, i)| i.slot.net.get().is_some() && i.slot.idle() > max_idle)
                .map(|(k, _)| k.clone())
                .collect();
            keys.iter().filter_map(|k| registry.remove(k)).collect()
        };
        let count = evicted.len();
        for inst in evicted {
            self.services.repository.forget(&inst.query);
            stop(inst).await;
        }
        count
    }

    pub async fn shutdown(&self) {
        let all: Vec<Instance> = self.registry.lock().expect("registry").drain().map(|(_, i)| i).collect();
        for inst in all {
            stop(inst).await;
        }
    }
}

async fn stop(inst: Instance) {
    let port = inst.port;
    let _ = inst.shutdown.send(());
    let mut task = inst.task;
    if tokio::time::timeout(Duration::from_secs(5), &mut task).await.is_err() {
        task.abort();
        let _ = task.await;
    }
    info!("instance on port {port} stopped");
}

#[derive(Clone)]
struct InstanceCtx {
    slot: Arc<Slot>,
    services: Services,
}

fn instance_router(ctx: InstanceCtx) -> Router {
    Router::new().route("/", post(instance_call)).route("/RPC2", post(instance_call)).with_state(ctx)
}

pub(crate) fn xml_reply(response: &Response) -> impl IntoResponse {
    ([(header::CONTENT_TYPE, "text/xml; charset=utf-8")], xml::encode_response(response))
}

async fn instance_call(State(ctx): State<InstanceCtx>, body: String) -> impl IntoResponse {
    xml_reply(&instance_response(&ctx, &body).await)
}

async fn instance_response(ctx: &InstanceCtx, body: &str) -> Response {
    let call = xml::decode_call(body).map_err(|e| Fault::bad_params(e.to_string()))?;
    if !METHODS.contains(&call.method.as_str()) {
        return Err(Fault::unknown_method(&call.method));
    }
    let handle = match ctx.slot.net.get() {
        None => return Err(Fault::building()),
        Some(Err(e)) => return Err(Fault::server(format!("network build failed: {e}"))),
        Some(Ok(h)) => h.clone(),
    };
    ctx.slot.touch();
    let services = ctx.services.clone();
    tokio::task::spawn_blocking(move || methods::call(&services, &handle, &call.method, &call.params))
        .await
        .unwrap_or_else(|e| Err(Fault::server(format!("method panicked: {e}"))))
}
