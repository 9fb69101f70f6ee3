fn main() {
    std::process::exit(pantomorph_cli::cli_main(std::env::args_os()));
}
