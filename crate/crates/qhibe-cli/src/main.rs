use clap::Parser;

fn main() {
    let cli = qhibe_cli::Cli::parse();
    if let Err(err) = qhibe_cli::run(cli) {
        let code = qhibe_cli::exit_code_for(&err);
        if code == qhibe_cli::EXIT_ACCESS_DENIED {
            eprintln!("access denied (⊥)");
        } else {
            eprintln!("error: {err:#}");
        }
        std::process::exit(code);
    }
}
