use clap::Parser;

fn main() -> std::process::ExitCode {
    oscidiff::cli::execute(oscidiff::cli::Cli::parse())
}
