//! Driving the command-line front end in-process: the same documents the
//! `heisenspec` binary prints, without spawning it.

use heisenspec::cli::dispatch;

fn main() {
    let invocations: [&[&str]; 4] = [
        &["nu", "--n", "1", "--mu", "0"],
        &["weyl-table", "--coeff", "gamma", "--n", "2"],
        &["nu", "--n", "1", "--mu", "1"],
        &[
            "predict", "--d", "3", "--m", "2", "--nu0", "0.05", "--k", "100",
        ],
    ];
    for args in invocations {
        let (code, doc) = dispatch(std::iter::once("heisenspec").chain(args.iter().copied()));
        println!("$ heisenspec {}  (exit {code})", args.join(" "));
        print!("{}", String::from_utf8_lossy(&doc));
    }
}
