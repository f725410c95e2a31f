fn main() {
    let run = discspec::execute(std::env::args_os());
    print!("{}", run.stdout);
    eprint!("{}", run.stderr);
    std::process::exit(run.code);
}
