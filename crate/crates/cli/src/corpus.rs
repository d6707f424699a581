//! Problem files shipped with the tool.

macro_rules! bundled {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../corpus/", $name, ".problem")))),*]
    };
}

/// `(name, contents)` of every bundled problem.
pub const FILES: &[(&str, &str)] = bundled!(
    "sl2",
    "sl2-corrupted",
    "fast-diffusion-v",
    "fast-diffusion-w",
    "heat",
    "heat-time",
    "heat-quadratic",
    "burgers",
    "drift",
);

pub fn get(name: &str) -> Option<&'static str> {
    FILES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, text)| *text)
}

/// The problems making up a named demo.
pub fn demo(name: &str) -> Option<Vec<(&'static str, &'static str)>> {
    let names: &[&str] = match name {
        "sl2" => &["sl2"],
        "fast-diffusion-w" => &["fast-diffusion-v", "fast-diffusion-w"],
        "heat" => &["heat", "heat-time"],
        _ => return None,
    };
    Some(
        names
            .iter()
            .map(|n| (*n, get(n).expect("bundled")))
            .collect(),
    )
}
