use clap::Parser;

fn main() {
    let cli = nkspin::cli::Cli::parse();
    std::process::exit(nkspin::cli::main_with(cli));
}
