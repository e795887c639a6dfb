//! Command-line front end (placeholder while modules land).

pub fn run() -> i32 {
    eprintln!("not yet wired");
    2
}
