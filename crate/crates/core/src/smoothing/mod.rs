//! Dense SDP kernel and the smoothed one-shot quantities.

pub mod quantities;
pub mod sdp;

pub use quantities::{
    fidelity_sdp, i_max_cq_sdp, i_max_sdp, min_max_radius, qaep_check, qaep_xi, smooth_d_max, smooth_i_max_cq,
    smooth_i_max_general, ImaxWitness, MinMaxRadius, QaepRecord, SmoothImax, SmoothingMode,
};
pub use sdp::{
    solve_sdp, Affine, BlockTerm, LmiBuilder, LmiSolution, MatExpr, SdpDiagnostics, SdpProblem, SdpSettings,
    SdpSolution, SdpStatus,
};
