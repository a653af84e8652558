#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::sync::Arc;

use c2u_agents::{Backend, EventLog, RunContext};
use c2u_core::extract::{detect_languages, extract_project, ExtractorRegistry};
use c2u_core::normalize::normalize;
use c2u_core::view::generate_view;
use c2u_core::{DiagramType, ProjectIr};

pub fn shop_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/tests/fixtures/shop")
}

pub fn shop_ir() -> ProjectIr {
    let root = shop_root();
    let langs = detect_languages(&root).unwrap();
    let (raw, _) = extract_project(&root, &langs, &ExtractorRegistry::default()).unwrap();
    normalize(raw)
}

/// Run context over the shop fixture with every view written.
pub fn shop_context(run_dir: &Path, backend: Arc<dyn Backend>, deterministic: bool) -> RunContext {
    let ir = shop_ir();
    let ctx = RunContext::new("shop", shop_root(), run_dir, ir, backend).with_events(EventLog::new(deterministic));
    for dt in DiagramType::ALL {
        generate_view(&ctx.ir, dt).unwrap().write_to_dir(&ctx.views_dir()).unwrap();
    }
    ctx
}

pub const VALID_CLASS: &str = "@startuml\nclass OrderService\nclass Order\nOrderService --> Order : creates\n@enduml\n";
