fn main() {
    env_logger::Builder::new()
        .filter_level(log::LevelFilter::Warn)
        .format_timestamp(None)
        .init();
    std::process::exit(slh_netspec::run_command(std::env::args_os()));
}
