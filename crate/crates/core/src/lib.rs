//! Numerical laboratory for the horocycle flow on the Bolza quotient of
//! PSL(2,R).
//!
//! The crate is organized around four layers:
//!
//! * [`psl2`] — canonical PSL(2,R) arithmetic, the Mobius action on the
//!   upper half-plane, and a certified two-sided bracket for the
//!   left-invariant metric;
//! * [`fuchsian`] — the Bolza genus-2 group, displacement-pruned Cayley-ball
//!   enumeration, the quotient metric, and lower bounds for the trace gap
//!   and separation constants;
//! * [`flows`] — the horocycle flow on the group and the quotient, and time
//!   changes generated by bounded positive speed fields with their forward
//!   (`beta`) and inverse (`alpha`) reparametrizations;
//! * [`expansiveness`] — the reparametrized-orbit counterexample certificate
//!   (orbits that stay uniformly close under `s(t) = a^2 t` yet provably
//!   differ) and divergence scans.
//!
//! Everything is a pure function of immutable values; all types are safe to
//! share across threads.

pub mod error;
pub mod expansiveness;
pub mod flows;
pub mod fuchsian;
pub mod psl2;

pub use error::{Error, Result};
pub use expansiveness::{
    build_counterexample, conj_by_horocycles, divergence_scan, separation_estimate,
    verify_counterexample, CounterexampleReport, DivergenceScan, SeparationReport, Verdict,
    VerificationRecord,
};
pub use flows::{flow_on_g, horocycle_flow, project, SpeedField, TimeChange};
pub use fuchsian::{
    enumerate_ball, estimate_eps_star, estimate_sigma0, quotient_dist, same_orbit_witness,
    BallParams, ConstantEstimates, FuchsianBall, FuchsianGroup, QuotientPoint,
};
pub use psl2::{
    displacement, dist_bracket, dist_h2, dist_lower, dist_upper, DistanceBracket, GroupElement,
    LieVector, PointH2,
};
