use std::process::exit;

fn main() {
    exit(hecke::cli::run());
}
