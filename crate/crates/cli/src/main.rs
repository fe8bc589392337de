use clap::Parser;
use zeroset_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    if let Some(t) = cli.global.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t.max(1)).build_global() {
            eprintln!("warning: could not size the thread pool: {e}");
        }
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    match zeroset_cli::execute(&cli, &args) {
        Ok(o) => {
            if cli.global.json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(&o.report.body).expect("report serializes")
                );
            } else {
                for line in &o.report.summary {
                    println!("{line}");
                }
            }
            if let Some(u) = &o.report.unresolved {
                eprintln!("unresolved: {u}");
            }
            std::process::exit(o.exit_code);
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
