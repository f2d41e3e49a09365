//! Benchmark environments.
//!
//! [`mdp`] holds the threshold-policy MDPs (EV charging, inventory management,
//! make-to-stock production). [`rmab`] holds the restless-bandit arms and the
//! joint N-arm environment.

pub mod mdp;
pub mod rmab;

pub use mdp::{MdpEnvKind, ScalarVectorState, ThresholdEnv};
pub use rmab::{Arm, ArmKind, RmabEnv, RmabEnvKind};
