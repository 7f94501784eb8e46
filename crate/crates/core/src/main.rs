fn main() {
    let code = ymh_core::cli::run(std::env::args_os(), &mut std::io::stderr());
    std::process::exit(code);
}
