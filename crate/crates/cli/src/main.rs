fn main() {
    let code = lmeas_cli::execute(std::env::args_os(), lmeas::harness::run, &mut std::io::stdout(), &mut std::io::stderr());
    std::process::exit(code);
}
