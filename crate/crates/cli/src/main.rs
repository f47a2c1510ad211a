use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let outcome = eqtax_cli::run(std::env::args_os());
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    if outcome.exit_code != 0 {
        let _ = write!(stderr, "{}", outcome.summary);
        if !outcome.summary.ends_with('\n') {
            let _ = writeln!(stderr);
        }
    } else if let Some(csv) = &outcome.csv {
        let _ = write!(stdout, "{csv}");
        let _ = write!(stderr, "{}", outcome.summary);
    } else {
        let _ = write!(stdout, "{}", outcome.summary);
        for f in &outcome.emitted_files {
            let _ = writeln!(stdout, "wrote {}", f.display());
        }
    }
    ExitCode::from(outcome.exit_code as u8)
}
