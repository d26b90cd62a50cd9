fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter("OPA_LOG")).init();
    std::process::exit(opa_core::cli::main_with_args(std::env::args_os()));
}
