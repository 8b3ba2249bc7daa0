use clap::Parser;

/// Mission planner HTTP service.
#[derive(Parser)]
#[command(name = "sarplan-server", version)]
struct Args {
    /// Address to listen on.
    #[arg(long, env = "SARPLAN_BIND", default_value = "127.0.0.1:8080")]
    bind: String,
}

#[tokio::main]
async fn main() -> std::io::Result<()> {
    let args = Args::parse();
    let listener = tokio::net::TcpListener::bind(&args.bind).await?;
    eprintln!("sarplan-server listening on {}", listener.local_addr()?);
    tokio::select! {
        r = sarplan_service::serve(listener) => r,
        _ = tokio::signal::ctrl_c() => Ok(()),
    }
}
