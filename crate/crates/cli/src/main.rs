fn main() {
    let code = geoalm_cli::run(std::env::args().skip(1));
    std::process::exit(code);
}
