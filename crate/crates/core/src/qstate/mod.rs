//! Dense states, effects and channels on tensor-factored Hilbert spaces.

pub mod channel;
pub mod layout;
pub mod linalg;
pub mod random;
pub mod rng;
pub mod serial;
pub mod state;

pub use channel::{apply_channel, KrausChannel};
pub use layout::Layout;
pub use linalg::{CMatrix, CVector, C64};
pub use rng::SeededRng;
pub use serial::{MatrixJson, VectorJson};
pub use state::{
    epr_pair, extreme_eigpair, povm_probability_bound_check, trace_distance, trace_distance_pure, zero_state,
    DensityOperator, EffectOperator, Extreme, PureState,
};
