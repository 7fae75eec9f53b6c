//! Server fixture and a stand-alone XML method-call client that shares no
//! code with the server's codec.
#![allow(dead_code)]

pub mod contract;

use std::net::{SocketAddr, TcpListener};
use std::sync::Arc;
use std::time::{Duration, Instant};

use commonsense_core::filter::NetworkRepository;
use commonsense_core::game::{GameConfig, GameService};
use commonsense_core::inference::Renderer;
use commonsense_core::normalization::LexiconMorphology;
use commonsense_core::pipeline::Pipeline;
use commonsense_core::relation::TypeRegistry;
use commonsense_core::relaxation::{HeuristicFlags, RelationSet};
use commonsense_core::resources::Lang;
use commonsense_core::store::{parse_templates, StatementStore};
use commonsense_server::{start, PortRange, RunningServer, ServerConfig, Services};
use serde_json::{json, Map, Value as J};
use tokio::runtime::Runtime;

pub const CORPUS: &str = "\
A computer is used for study$$M$$18_29$$mestrado$$Clementina$$SP$$1
A computer is used for games$$F$$18_29$$mestrado$$Clementina$$SP$$2
You usually find a computer in a office$$M$$30_45$$2_completo$$Campinas$$SP$$3
You usually find a desk in a office$$F$$30_45$$2_completo$$Campinas$$SP$$4
A desk is used for study$$M$$18_29$$mestrado$$Clementina$$SP$$5
Computer is a(n) machine$$F$$18_29$$2_completo$$São Carlos$$MG$$6
Rose is a(n) flower$$F$$13_17$$2_incompleto$$São Carlos$$MG$$7
Flower is typically beautiful$$M$$13_17$$2_incompleto$$Campinas$$SP$$8
You usually find a flower in a garden$$F$$46_65$$mestrado$$Campinas$$SP$$9
You usually find a rose in a garden$$M$$46_65$$mestrado$$Clementina$$SP$$10
A book is used for study$$F$$18_29$$mestrado$$Clementina$$SP$$11
You hardly ever find a dog in a office$$M$$30_45$$2_completo$$Campinas$$SP$$12
Aids is a(n) sexually transmitted disease$$M$$18_29$$mestrado$$Clementina$$SP$$13
A condom is used for aids$$F$$18_29$$mestrado$$Clementina$$SP$$14
Flu is a(n) disease$$M$$30_45$$2_completo$$Campinas$$SP$$15
";

pub struct Fixture {
    pub rt: Runtime,
    pub server: Option<RunningServer>,
    pub repo: Arc<NetworkRepository>,
    pub services: Services,
    pub game: Arc<GameService>,
    pub _dir: tempfile::TempDir,
}

impl Fixture {
    pub fn url(&self) -> String {
        self.server.as_ref().unwrap().url()
    }

    pub fn base(&self) -> String {
        format!("http://{}", self.server.as_ref().unwrap().addr())
    }
}

impl Drop for Fixture {
    fn drop(&mut self) {
        if let Some(s) = self.server.take() {
            self.rt.block_on(s.stop());
        }
    }
}

/// A port nobody listens on right now.
pub fn free_port() -> u16 {
    TcpListener::bind("127.0.0.1:0").unwrap().local_addr().unwrap().port()
}

pub fn fixture(ports: PortRange) -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let p = Pipeline::bundled(Lang::En, HeuristicFlags::default()).unwrap();
    let (normalized, _) = p.normalize_text(&p.extract_text(CORPUS).unwrap()).unwrap();
    let (relaxed, _) = p.relax_text(&normalized).unwrap();
    let set = RelationSet::parse_lines(&relaxed, &p.schema).unwrap();
    let repo = Arc::new(NetworkRepository::new(dir.path(), set, p.flags, p.schema.clone()).unwrap());
    let morphology = Arc::new(LexiconMorphology::bundled(Lang::En));
    let renderer = Renderer::bundled(Lang::En, TypeRegistry::with_defaults());
    let services = Services {
        repository: Arc::clone(&repo),
        morphology: morphology.clone(),
        renderer: Arc::new(renderer.clone()),
    };
    let store = StatementStore::new(parse_templates(Lang::En.templates()).unwrap(), vec!["chair".into()], 1);
    let game =
        Arc::new(GameService::new(Arc::new(store), Arc::clone(&repo), morphology, renderer, GameConfig::default()));
    let rt = Runtime::new().unwrap();
    let config = ServerConfig { addr: SocketAddr::from(([127, 0, 0, 1], 0)), ports };
    let server = rt.block_on(start(config, services.clone(), Some(Arc::clone(&game)))).unwrap();
    Fixture { rt, server: Some(server), repo, services, game, _dir: dir }
}

// ---- independent client ----

fn esc(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn enc(v: &J, out: &mut String) {
    out.push_str("<value>");
    match v {
        J::Bool(b) => out.push_str(&format!("<boolean>{}</boolean>", if *b { 1 } else { 0 })),
        J::Number(n) if n.is_i64() => out.push_str(&format!("<i4>{}</i4>", n.as_i64().unwrap())),
        J::Number(n) => out.push_str(&format!("<double>{}</double>", n.as_f64().unwrap())),
        J::String(s) => out.push_str(&format!("<string>{}</string>", esc(s))),
        J::Array(items) => {
            out.push_str("<array><data>");
            for i in items {
                enc(i, out);
            }
            out.push_str("</data></array>");
        }
        J::Object(m) => {
            out.push_str("<struct>");
            for (k, v) in m {
                out.push_str(&format!("<member><name>{}</name>", esc(k)));
                enc(v, out);
                out.push_str("</member>");
            }
            out.push_str("</struct>");
        }
        J::Null => out.push_str("<nil/>"),
    }
    out.push_str("</value>");
}

pub fn encode_call(method: &str, params: &[J]) -> String {
    let mut out =
        format!("<?xml version=\"1.0\"?>\n<methodCall>\n  <methodName>{}</methodName>\n  <params>\n", esc(method));
    for p in params {
        out.push_str("    <param>");
        enc(p, &mut out);
        out.push_str("</param>\n");
    }
    out.push_str("  </params>\n</methodCall>\n");
    out
}

fn elements<'a, 'i>(n: roxmltree::Node<'a, 'i>) -> impl Iterator<Item = roxmltree::Node<'a, 'i>> {
    n.children().filter(|c| c.is_element())
}

fn dec(value: roxmltree::Node) -> J {
    assert_eq!(value.tag_name().name(), "value");
    let Some(inner) = elements(value).next() else {
        return J::String(value.text().unwrap_or("").to_string());
    };
    let text = || inner.text().unwrap_or("").to_string();
    match inner.tag_name().name() {
        "int" | "i4" | "i8" => json!(text().trim().parse::<i64>().unwrap()),
        "double" => json!(text().trim().parse::<f64>().unwrap()),
        "boolean" => J::Bool(text().trim() == "1"),
        "string" => J::String(text()),
        "array" => {
            let data = elements(inner).next().unwrap();
            J::Array(elements(data).map(dec).collect())
        }
        "struct" => {
            let mut m = Map::new();
            for member in elements(inner) {
                let name = elements(member).find(|c| c.has_tag_name("name")).unwrap();
                let v = elements(member).find(|c| c.has_tag_name("value")).unwrap();
                m.insert(name.text().unwrap_or("").to_string(), dec(v));
            }
            J::Object(m)
        }
        other => panic!("unexpected value type {other}"),
    }
}

/// `Ok(value)` or `Err((code, message))`.
pub fn decode_response(xml: &str) -> Result<J, (i64, String)> {
    let doc = roxmltree::Document::parse(xml).unwrap();
    let root = doc.root_element();
    assert_eq!(root.tag_name().name(), "methodResponse");
    let first = elements(root).next().unwrap();
    match first.tag_name().name() {
        "params" => {
            let param = elements(first).next().unwrap();
            Ok(dec(elements(param).next().unwrap()))
        }
        "fault" => {
            let v = dec(elements(first).next().unwrap());
            Err((v["faultCode"].as_i64().unwrap(), v["faultString"].as_str().unwrap().to_string()))
        }
        other => panic!("unexpected response element {other}"),
    }
}

pub fn post_raw(url: &str, body: String) -> Result<String, ureq::Error> {
    let mut resp = ureq::post(url).header("Content-Type", "text/xml").send(body)?;
    assert!(resp.headers().get("content-type").unwrap().to_str().unwrap().starts_with("text/xml"));
    resp.body_mut().read_to_string()
}

pub fn rpc(url: &str, method: &str, params: &[J]) -> Result<J, (i64, String)> {
    decode_response(&post_raw(url, encode_call(method, params)).unwrap())
}

pub fn port_url(port: u16) -> String {
    format!("http://127.0.0.1:{port}/RPC2")
}

pub fn lists(q: [&[&str]; 5]) -> Vec<J> {
    q.iter().map(|l| json!(l)).collect()
}

/// Polls getApi until ready.
pub fn acquire_ready(url: &str, q: &[J]) -> u16 {
    let deadline = Instant::now() + Duration::from_secs(20);
    loop {
        let r = rpc(url, "getApi", q).unwrap();
        if r["state"] == "ready" {
            return r["port"].as_i64().unwrap() as u16;
        }
        assert!(Instant::now() < deadline, "instance never became ready");
        std::thread::sleep(Duration::from_millis(10));
    }
}
