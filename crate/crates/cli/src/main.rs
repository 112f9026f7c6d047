use clap::Parser;

fn main() {
    let cli = dce_cli::Cli::parse();
    match dce_cli::run(&cli) {
        Ok(report) => println!("{}", report.render()),
        Err(err) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}
