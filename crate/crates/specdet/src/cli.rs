//! (under construction)

/// Placeholder until the CLI lands.
pub fn run(_args: &[String]) -> i32 {
    2
}
