use std::io::{stderr, stdout};

fn main() {
    let code = otlab_cli::run_cli(std::env::args_os(), &mut stdout().lock(), &mut stderr());
    std::process::exit(code);
}
