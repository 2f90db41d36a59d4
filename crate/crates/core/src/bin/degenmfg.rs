use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let args = degenmfg::cli::Args::parse();
    std::process::exit(degenmfg::cli::run(&args));
}
