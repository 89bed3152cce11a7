use clap::Parser;
use ddp_cli::{config::SEED_ENV, run, Cli};

fn main() {
    let cli = Cli::parse();
    let env_seed = std::env::var(SEED_ENV).ok();
    let mut stdout = std::io::stdout().lock();
    if let Err(e) = run(&cli, env_seed.as_deref(), &mut stdout) {
        eprintln!("ddp: {e}");
        std::process::exit(e.exit_code());
    }
}
