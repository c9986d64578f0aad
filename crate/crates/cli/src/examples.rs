//! The shipped example theory files, embedded in the binary.

pub const EXAMPLES: &[(&str, &str)] = &[
    ("mechanics.thy", include_str!("../theories/mechanics.thy")),
    ("particle.thy", include_str!("../theories/particle.thy")),
    ("maxwell.thy", include_str!("../theories/maxwell.thy")),
    ("chern_simons.thy", include_str!("../theories/chern_simons.thy")),
    ("polyakov.thy", include_str!("../theories/polyakov.thy")),
];

pub fn find(name: &str) -> Option<&'static str> {
    let stem = name.trim_end_matches(".thy");
    EXAMPLES
        .iter()
        .find(|(f, _)| f.trim_end_matches(".thy") == stem)
        .map(|(_, s)| *s)
}
