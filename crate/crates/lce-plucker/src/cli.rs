//! Command-line entry points (placeholder while the library grows).

pub fn run() -> i32 {
    0
}
