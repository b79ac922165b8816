//! Fixed-step simulation of differential interactive games.
//!
//! The observable state `φ` and the intention field `ξ` are integrated jointly
//! with the continuous part of the hidden `ε` generator by classical RK4.
//! Pure controls are sampled once per step and held; the interactive control
//! of each player is `u = coupling(u°, ε)` and coalition `i` acts through
//! `v_i = Σ_{j∈I_i} u_j`.

mod augment;
mod engine;
mod hidden;
mod model;
mod policy;
mod trajectory;

pub use augment::{augment_history_feedback, DelayFeedback};
pub use engine::{assemble_coalitions, initial_state, observe, simulate, step, Simulator, SystemState};
pub use model::{
    kaleidoscope, CouplingForm, CouplingSpec, GameDefinition, HiddenBehaviorSpec, LorenzForcing, PhiModel,
    XiBlock, XiFeedback, AFFINE_SPREAD_FLOOR,
};
pub use policy::{PlayerPolicy, Policy, POLICY_IDS};
pub use trajectory::{EpsTruth, Hidden, Sample, Trajectory};
