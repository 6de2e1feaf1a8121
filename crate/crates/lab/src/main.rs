use clap::Parser;
use qplab::cli::{run, Args, EXIT_ERROR};

fn main() {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            std::process::exit(code);
        }
    };
    std::process::exit(run(&args));
}
