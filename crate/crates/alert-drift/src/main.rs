fn main() {
    std::process::exit(alert_drift::cli::run());
}
