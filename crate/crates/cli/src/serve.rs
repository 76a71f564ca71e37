use std::io::Write;
use std::net::SocketAddr;
use std::sync::Arc;
use std::time::Duration;

use pano_agents::{BackendSuite, Delayed, MockGenerator};
use pano_core::ProjectionParams;
use pano_service::{AppState, ServiceConfig, SessionStore};
use tokio::net::TcpListener;
use tracing::info;

use crate::args::{Backend, ServeArgs};
use crate::error::{CliError, Result};

fn backends(args: &ServeArgs) -> Result<BackendSuite> {
    match args.backend {
        Backend::Mock if args.mock_latency_ms > 0 => Ok(BackendSuite::mock().with_generator(Arc::new(Delayed {
            inner: MockGenerator,
            delay: Duration::from_millis(args.mock_latency_ms),
        }))),
        Backend::Mock => Ok(BackendSuite::mock()),
        Backend::Remote => BackendSuite::remote_from_env().map_err(|e| CliError::Usage(e.to_string())),
    }
}

async fn shutdown_signal() {
    let ctrl_c = async {
        let _ = tokio::signal::ctrl_c().await;
    };
    #[cfg(unix)]
    let term = async {
        match tokio::signal::unix::signal(tokio::signal::unix::SignalKind::terminate()) {
            Ok(mut s) => {
                s.recv().await;
            }
            Err(_) => std::future::pending::<()>().await,
        }
    };
    #[cfg(not(unix))]
    let term = std::future::pending::<()>();
    tokio::select! {
        _ = ctrl_c => {},
        _ = term => {},
    }
    info!("shutting down");
}

/// Prints `listening on ADDR` once the socket is bound, then serves until
/// interrupted.
pub fn serve(args: &ServeArgs, out: &mut dyn Write) -> Result<()> {
    let params = ProjectionParams::with_width(args.width);
    params.validate().map_err(CliError::usage)?;
    if args.max_jobs == 0 {
        return Err(CliError::Usage("--max-jobs must be at least 1".into()));
    }
    if let Some(dir) = &args.ui_dir {
        if !dir.is_dir() {
            return Err(CliError::unreadable(dir, "viewer bundle directory not found"));
        }
    }
    // Blocking HTTP clients must be built outside the async runtime.
    let backends = backends(args)?;
    let store = SessionStore::open(&args.root).map_err(|e| CliError::Internal(e.to_string()))?;
    let config = ServiceConfig {
        max_concurrent_jobs: args.max_jobs,
        default_seed: args.seed,
        default_params: params,
        ui_dir: args.ui_dir.clone(),
    };
    let state = AppState::open(store, backends, config).map_err(|e| CliError::Internal(e.to_string()))?;

    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()
        .map_err(|e| CliError::Internal(format!("starting runtime: {e}")))?;
    runtime.block_on(async {
        let addr = SocketAddr::new(args.bind, args.port);
        let listener = TcpListener::bind(addr)
            .await
            .map_err(|e| CliError::Internal(format!("binding {addr}: {e}")))?;
        let local = listener
            .local_addr()
            .map_err(|e| CliError::Internal(e.to_string()))?;
        writeln!(out, "listening on {local}")
            .and_then(|_| out.flush())
            .map_err(|e| CliError::Internal(format!("writing output: {e}")))?;
        info!(%local, root = %args.root.display(), "serving");
        pano_service::serve(listener, state, shutdown_signal())
            .await
            .map_err(|e| CliError::Internal(e.to_string()))
    })
}
