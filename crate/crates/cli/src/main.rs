use clap::Parser;
use qmc_cli::{run, Cli, Streams};

fn main() {
    // clap exits with 2 on usage errors by itself.
    let cli = Cli::parse();
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr());
    let code = match run(cli, &mut Streams { out: &mut out, err: &mut err }) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qmc: {e}");
            e.exit_code()
        }
    };
    drop(out);
    std::process::exit(code);
}
