use clap::Parser;

use fqgeom_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // outputs are thread-count independent; this only sets parallelism
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match execute(&cli) {
        Ok((envelope, pass)) => {
            if let Err(e) = envelope.emit(cli.out.as_deref()) {
                eprintln!("error: cannot write report: {e}");
                std::process::exit(2);
            }
            std::process::exit(if pass { 0 } else { 1 });
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(2);
        }
    }
}
