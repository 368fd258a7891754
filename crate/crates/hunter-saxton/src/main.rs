use clap::error::ErrorKind;
use clap::Parser;
use hunter_saxton::cli::{dispatch, exit_code, Cli};

fn main() {
    // exit code 2 is reserved for validation failures, so argument parse
    // errors map to 1 rather than clap's default 2
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Err(e) = dispatch(&cli) {
        eprintln!("error: {e}");
        std::process::exit(exit_code(&e));
    }
}
