fn main() -> std::process::ExitCode {
    gibbs_anneal::cli::run(std::env::args_os())
}
