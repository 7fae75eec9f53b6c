//! Network access layer: a management endpoint that hands out one port per
//! profile-scoped network, per-port inference endpoints speaking XML method
//! calls over HTTP POST, and the quiz's JSON API.
//!
//! Management methods, posted to `/` or `/RPC2` on the management address:
//!
//! - `getApi(genders, age_groups, educations, cities, states)`: five string
//!   arrays; replies `{port, state}` with state `building` or `ready`.
//! - `evictIdle(seconds)`: stops instances idle that long; replies the count.
//! - `listInstances()`: `[{query, port, state}]`.
//!
//! Instance ports serve `get_context`, `display_node`, `get_analogy`,
//! `expand_query` and `decompose_phrases`. Fault codes: 1 unknown method,
//! 2 bad parameters, 3 network still building, 4 anything else.

pub mod client;
pub mod error;
pub mod game_api;
pub mod manager;
pub mod methods;
pub mod xml;

use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use axum::extract::State;
use axum::response::IntoResponse;
use axum::routing::post;
use axum::Router;
use commonsense_core::game::GameService;
use commonsense_core::profile::ProfileQuery;
use tokio::sync::oneshot;
use tokio::task::JoinHandle;

pub use crate::error::{ClientError, CodecError, ServerError};
pub use crate::manager::{Acquired, InstanceState, Manager, PortRange};
pub use crate::methods::Services;
use crate::xml::{Fault, Response, Value};

#[derive(Debug, Clone)]
pub struct ServerConfig {
    /// Management address; port 0 picks a free one.
    pub addr: SocketAddr,
    pub ports: PortRange,
}

pub struct RunningServer {
    addr: SocketAddr,
    manager: Arc<Manager>,
    shutdown: oneshot::Sender<()>,
    task: JoinHandle<()>,
}

impl RunningServer {
    pub fn addr(&self) -> SocketAddr {
        self.addr
    }

    pub fn url(&self) -> String {
        format!("http://{}/RPC2", self.addr)
    }

    pub fn manager(&self) -> &Arc<Manager> {
        &self.manager
    }

    /// Stops the management endpoint and every instance.
    pub async fn stop(self) {
        let _ = self.shutdown.send(());
        let _ = self.task.await;
        self.manager.shutdown().await;
    }
}

/// Binds the management endpoint and, when `game` is given, mounts the quiz
/// routes on the same listener.
pub async fn start(
    config: ServerConfig,
    services: Services,
    game: Option<Arc<GameService>>,
) -> Result<RunningServer, ServerError> {
    let listener = tokio::net::TcpListener::bind(config.addr).await?;
    let addr = listener.local_addr()?;
    let manager = Arc::new(Manager::new(services, config.ports, addr.ip()));
    let mut app = Router::new()
        .route("/", post(management_call))
        .route("/RPC2", post(management_call))
        .with_state(Arc::clone(&manager));
    if let Some(game) = game {
        app = app.merge(game_api::router(game));
    }
    let (shutdown, rx) = oneshot::channel();
    let task = tokio::spawn(async move {
        let served = axum::serve(listener, app).with_graceful_shutdown(async move {
            let _ = rx.await;
        });
        if let Err(e) = served.await {
            log::error!("management server stopped: {e}");
        }
    });
    log::info!("management endpoint on {addr}");
    Ok(RunningServer { addr, manager, shutdown, task })
}

async fn management_call(State(manager): State<Arc<Manager>>, body: String) -> impl IntoResponse {
    manager::xml_reply(&management_response(manager, &body).await)
}

async fn management_response(manager: Arc<Manager>, body: &str) -> Response {
    let call = xml::decode_call(body).map_err(|e| Fault::bad_params(e.to_string()))?;
    match call.method.as_str() {
        "getApi" => {
            let lists = methods::profile_lists(&call.params)?;
            let q = ProfileQuery::parse(&lists, &manager.services().repository.schema().vocab)
                .map_err(|e| Fault::bad_params(e.to_string()))?;
            let m = Arc::clone(&manager);
            let acquired = tokio::task::spawn_blocking(move || m.acquire(&q))
                .await
                .map_err(|e| Fault::server(e.to_string()))??;
            Ok(Value::record([
                ("port", Value::Int(acquired.port.into())),
                ("state", Value::str(acquired.state.as_str())),
            ]))
        }
        "evictIdle" => {
            let secs = match call.params.as_slice() {
                [v] => v.as_f64().filter(|s| s.is_finite() && *s >= 0.0),
                _ => None,
            }
            .ok_or_else(|| Fault::bad_params("evictIdle takes one non-negative number of seconds"))?;
            let n = manager.evict_idle(Duration::from_secs_f64(secs)).await;
            Ok(Value::Int(n as i64))
        }
        "listInstances" => Ok(Value::Array(
            manager
                .instances()
                .into_iter()
                .map(|i| {
                    Value::record([
                        ("query", Value::str(i.key)),
                        ("port", Value::Int(i.port.into())),
                        ("state", Value::str(i.state.as_str())),
                    ])
                })
                .collect(),
        )),
        other => Err(Fault::unknown_method(other)),
    }
}
