use std::process::ExitCode;

fn main() -> ExitCode {
    if let Ok(threads) = std::env::var("HEATKERN_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("config error: HEATKERN_THREADS must be a positive integer");
                return ExitCode::from(2);
            }
        }
    }
    let args: Vec<String> = std::env::args().skip(1).collect();
    let config = match heatkern::cli::parse_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(2);
        }
    };
    match heatkern::cli::run(&config) {
        Ok(output) => {
            println!(
                "{}: pass={} summary={}",
                config.experiment.name(),
                output.pass,
                output.summary_path.display()
            );
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
