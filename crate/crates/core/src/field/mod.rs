//! Desk-scale function fields carrying logarithmic functions: `F_q(t)` with
//! place-supported weights and `F_q(x, y)` with monomial valuations.

mod cpair;
mod element;
mod log;
mod poly;
mod reconstruct;
mod valuation;

pub use cpair::{
    af_corank, af_family, af_on_family, find_af_in_span, find_bad_subspace, is_c_pair_field, recheck_c_pair_failure, span_candidates,
    BadSubspace, CPairOutcome, CandidateOnV, Corank, FamilyVerdict, SpanOptions, SpanSearch,
};
pub use element::{pool, Element, FieldModel};
pub use log::{eval_log, inertia_check, restrict_to_subspace, subspace_points, InertiaOutcome, LogFunction, LogKind};
pub use poly::{irreducibles, BiPoly, Poly};
pub use reconstruct::{
    reconstruct_valuation, ultrametric_witness, ReconstructOptions, ReconstructionOutcome, ReconstructionResult, UltrametricWitness,
    MODEL_CAVEAT,
};
pub use valuation::{MonomialOrder, Place, ScaleValue, Valuation};

/// `a / b` is a nonzero constant.
pub fn proportional(a: &Element, b: &Element) -> bool {
    if a.is_zero() || b.is_zero() {
        return false;
    }
    let model = a.model();
    (1..model.q()).any(|c| a.scale(c) == *b)
}
