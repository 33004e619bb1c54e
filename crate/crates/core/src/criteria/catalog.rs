/// Criterion ids and the condition each one checks.
const CATALOG: &[(&str, &str)] = &[
    (
        "orthogonality-horizon",
        "U^n(L_k) is orthogonal to L_k for every n from some N_k on",
    ),
    (
        "hypercyclicity",
        "T is hypercyclic on the compacts if ||W^{n_k} P_m|| -> 0 and ||W^{-n_k} P_m|| -> 0 along a strictly increasing schedule",
    ),
    (
        "zero-transitivity",
        "T is 0-transitive if ||W^{n_j} P_K|| -> 0 and ||W^{-m_j} P_K|| -> 0 along independent schedules",
    ),
    (
        "necessary-m",
        "hypercyclicity, or density of periodic points under the orthogonality hypothesis, forces m(W) < 1 < ||W||",
    ),
    (
        "periodic-necessary",
        "if P_K is a limit of periodic points of S then m(W^{-n_k}) -> 0 along some schedule; the proof bounds m(W^{-1})^{n_k} instead",
    ),
    (
        "chaos-series",
        "T and S are chaotic if sum_l ||W^{l n_k} P_m|| -> 0 and sum_l ||W^{-l n_k} P_m|| -> 0 with convergent series",
    ),
    (
        "cosine-series",
        "the cosine family is chaotic under the same two-sided series condition",
    ),
    (
        "cosine-split",
        "the cosine family is transitive if ||W^{+-n_k} P_m|| -> 0 and L_m = E_k + R_k with ||W^{2n_k} P_E|| -> 0, ||W^{-2n_k} P_R|| -> 0",
    ),
    (
        "adjoint-split",
        "the adjoint cosine family is transitive on the dual if ||P_m W^{+-n_k}|| -> 0 and L_m = E_k + R_k with ||P_E W^{2n_k}|| -> 0, ||P_R W^{-2n_k}|| -> 0",
    ),
    (
        "adjoint-transitivity",
        "T* and S* are transitive on the dual if ||G_k W^{n_k}|| -> 0 and ||D_k W^{-n_k}|| -> 0 with G_k, D_k -> P_m strongly",
    ),
];

pub fn catalog() -> &'static [(&'static str, &'static str)] {
    CATALOG
}

pub fn statement_for(id: &str) -> Option<&'static str> {
    CATALOG.iter().find(|(i, _)| *i == id).map(|(_, s)| *s)
}
