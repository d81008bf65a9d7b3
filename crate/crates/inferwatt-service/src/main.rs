//! `inferwatt-serve`: binds the HTTP facade to an address.

use std::net::SocketAddr;
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::Parser;

use inferwatt_core::dataset::{HardwareDb, RciDb};
use inferwatt_service::{router, ServiceState};

#[derive(Debug, Parser)]
#[command(name = "inferwatt-serve", version, about = "Serve inference cost estimates over HTTP")]
struct Args {
    /// Directory holding the three trained model files.
    #[arg(long, default_value = "models", env = "INFERWATT_MODELS_DIR")]
    models_dir: PathBuf,
    /// Hardware database JSON; built-in table when omitted.
    #[arg(long)]
    hardware_db: Option<PathBuf>,
    /// Carbon-intensity database JSON; built-in table when omitted.
    #[arg(long)]
    rci_db: Option<PathBuf>,
    /// Address to bind.
    #[arg(long, default_value = "127.0.0.1:8080", env = "INFERWATT_BIND")]
    bind: SocketAddr,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let hardware_db = match &args.hardware_db {
        Some(path) => match HardwareDb::load(path) {
            Ok(db) => db,
            Err(err) => {
                eprintln!("error: {err}");
                return ExitCode::from(2);
            }
        },
        None => HardwareDb::builtin(),
    };
    let rci_db = match &args.rci_db {
        Some(path) => match RciDb::load(path) {
            Ok(db) => db,
            Err(err) => {
                eprintln!("error: {err}");
                return ExitCode::from(2);
            }
        },
        None => RciDb::builtin(),
    };

    let state = ServiceState::load(&args.models_dir, hardware_db, rci_db);
    if !state.is_ready() {
        eprintln!(
            "warning: starting degraded, models not loaded from {}",
            args.models_dir.display()
        );
    }

    let runtime = match tokio::runtime::Runtime::new() {
        Ok(rt) => rt,
        Err(err) => {
            eprintln!("error: cannot start async runtime: {err}");
            return ExitCode::FAILURE;
        }
    };
    let served = runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(args.bind).await?;
        eprintln!("listening on {}", listener.local_addr()?);
        axum::serve(listener, router(Arc::new(state)))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
    });
    match served {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}
