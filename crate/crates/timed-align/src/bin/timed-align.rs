use std::io::Write;

fn main() {
    let outcome = timed_align::cli::run_command(std::env::args_os());
    // Verdicts (codes 0 and 1) are results and go to stdout; everything
    // else is an error report.
    if outcome.code <= timed_align::cli::EXIT_INVALID {
        print!("{}", outcome.report);
        let _ = std::io::stdout().flush();
    } else {
        eprint!("{}", outcome.report);
        let _ = std::io::stderr().flush();
    }
    std::process::exit(outcome.code);
}
