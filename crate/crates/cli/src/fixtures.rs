//! Scenarios shipped with the binary.

const FIXTURES: &[(&str, &str)] = &[
    ("example34", include_str!("../fixtures/example34.toml")),
    (
        "unitary-counterexample",
        include_str!("../fixtures/unitary-counterexample.toml"),
    ),
    ("aperiodic-probe", include_str!("../fixtures/aperiodic-probe.toml")),
];

pub fn fixture(name: &str) -> Option<&'static str> {
    FIXTURES.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

pub fn names() -> impl Iterator<Item = &'static str> {
    FIXTURES.iter().map(|(n, _)| *n)
}
