fn main() {
    let stdout = std::io::stdout();
    let mut lock = stdout.lock();
    if let Err(e) = dfjss_cli::run(std::env::args_os(), &mut lock) {
        eprintln!("dfjss: {e}");
        std::process::exit(e.exit_code());
    }
}
