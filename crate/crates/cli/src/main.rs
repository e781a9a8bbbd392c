use clap::Parser;

fn main() {
    let cli = arx_evolve_cli::Cli::parse();
    std::process::exit(arx_evolve_cli::execute(
        cli,
        std::env::var_os("ARX_EVOLVE_OUT"),
    ));
}
