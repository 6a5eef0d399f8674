use std::io::{IsTerminal, Read};

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let out = darboux_cli::run(&args, || {
        let stdin = std::io::stdin();
        if stdin.is_terminal() {
            return None;
        }
        let mut s = String::new();
        stdin.lock().read_to_string(&mut s).ok().map(|_| s)
    });
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    std::process::exit(out.code);
}
