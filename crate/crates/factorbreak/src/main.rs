use clap::Parser;

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match factorbreak::cli::Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version through this path with exit 0.
            if e.use_stderr() {
                eprint!("{e}");
                std::process::exit(4);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    if let Err(e) = factorbreak::cli::execute(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
