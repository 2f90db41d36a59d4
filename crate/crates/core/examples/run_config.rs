//! Drives the command-line layer in-process:
//! `cargo run --example run_config -- configs/holder.toml stability-holder`.
use clap::ValueEnum;
use degenmfg::cli::{run, Args, Command};

fn main() {
    let mut argv = std::env::args().skip(1);
    let config = argv.next().unwrap_or_else(|| "configs/solve_zero.toml".into());
    let command = argv.next().unwrap_or_else(|| "solve".into());
    let command = Command::from_str(&command, true).unwrap_or_else(|e| {
        eprintln!("{e}");
        std::process::exit(2)
    });
    let out = std::env::temp_dir().join("degenmfg-example");
    let code = run(&Args {
        command,
        config: config.into(),
        out: out.clone(),
        threads: None,
    });
    println!("exit code {code}; artifacts in {}", out.display());
    if let Ok(text) = std::fs::read_to_string(out.join("result.json")) {
        println!("{}", text.lines().take(30).collect::<Vec<_>>().join("\n"));
    }
    std::process::exit(code);
}
