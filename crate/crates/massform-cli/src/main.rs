fn main() {
    eprintln!("massform: not yet wired up");
    std::process::exit(2);
}
