use clap::Parser;
use testopt_cli::{run, Cli, ClosedForms};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = run(cli, &ClosedForms::default(), &mut out) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
