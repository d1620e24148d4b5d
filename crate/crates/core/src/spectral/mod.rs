//! Operator matrices on a strip and the decisions built from them.
//!
//! On the strip `τ`, the map `T = K·(B_m - I)` sends `z^{j+τ} z̄^j` to
//! `Σ_k a_{j,k}(m) z^{k+τ} z̄^k`. Fixed points of `B_m` are the kernel of
//! `T`, and the column `j = 0` is always zero.

mod binomial;
mod fixed;
mod matrix;
mod rank;
mod scan;

pub use binomial::{binomial_obstruction, Obstruction, ObstructionCase, ObstructionValue};
pub use fixed::{fixed_point_check, FixedPointReport, StripResidual, Verdict};
pub use matrix::{b2_matrix, t_coefficient, B2Matrix, DefectProfile, OperatorMatrix};
pub use rank::{rank_profile, rank_profile_converged, RankProfile};
pub use scan::{
    pivoted_rows, scan_exceptional, scan_grid, CandidateRoot, FlaggedPoint, M2Check,
    RejectedBracket, ScanReport, RANK_TOL, ROOT_WIDTH,
};
