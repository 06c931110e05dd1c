fn main() {
    std::process::exit(geoaff::cli::run(std::env::args_os()));
}
