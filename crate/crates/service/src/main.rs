use std::net::SocketAddr;
use std::num::NonZeroUsize;
use std::time::Duration;

use clap::Parser;
use feo_service::{app, Config};
use tracing_subscriber::EnvFilter;

#[derive(Debug, Parser)]
#[command(name = "feo-service", version, about = "HTTP service for fair-opportunity scenarios")]
struct Args {
    /// Address to listen on.
    #[arg(long, env = "FEO_BIND", default_value = "127.0.0.1:8080")]
    bind: SocketAddr,
    /// Sessions kept in memory before the least recently used is dropped.
    #[arg(long, env = "FEO_SESSION_CAPACITY", default_value = "64")]
    capacity: NonZeroUsize,
    /// Seconds a solve or sample may run before the request fails with 504.
    #[arg(long, env = "FEO_SOLVE_TIMEOUT_SECS", default_value_t = 30)]
    solve_timeout_secs: u64,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    let args = Args::parse();
    let config = Config { capacity: args.capacity, solve_timeout: Duration::from_secs(args.solve_timeout_secs) };
    let listener = tokio::net::TcpListener::bind(args.bind).await?;
    tracing::info!(addr = %listener.local_addr()?, "listening");
    axum::serve(listener, app(config))
        .with_graceful_shutdown(async {
            let _ = tokio::signal::ctrl_c().await;
        })
        .await
}
