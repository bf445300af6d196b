//! Scenarios shipped with the binary, addressed as `builtin:<name>`.

pub const BUILTINS: [(&str, &str); 5] = [
    ("cylinder-gv", include_str!("../scenarios/cylinder-gv.qc")),
    ("arctan-trivialization", include_str!("../scenarios/arctan-trivialization.qc")),
    ("circle-cech", include_str!("../scenarios/circle-cech.qc")),
    ("torus-bott", include_str!("../scenarios/torus-bott.qc")),
    ("torus-gv", include_str!("../scenarios/torus-gv.qc")),
];

pub fn lookup(name: &str) -> Option<&'static str> {
    BUILTINS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}
