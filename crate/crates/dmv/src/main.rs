use clap::Parser;

fn main() {
    let cli = dmv::cli::Cli::parse();
    if let Err(e) = dmv::cli::run(cli) {
        // Output piped into `head` and friends.
        if matches!(&e, dmv::CliError::Io { source, .. } if source.kind() == std::io::ErrorKind::BrokenPipe) {
            return;
        }
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
