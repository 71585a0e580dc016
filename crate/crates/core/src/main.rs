fn main() {
    std::process::exit(electron_force_noise::cli::run(std::env::args_os()));
}
