use clap::Parser;

fn main() {
    let cli = bonnetlab_cli::Cli::parse();
    std::process::exit(bonnetlab_cli::main_with(cli));
}
