//! Constructors for the gadget, reduction and random instances.
//!
//! The four-state gadget (values A, B, C, D) is the building block of every
//! hand-made instance: from A or B, action 0 keeps the agent in {A, B}, while
//! actions 1 and 2 gamble on reaching the rewarding absorbing state C versus
//! the penalized absorbing state D. Knowing the current value (a sensor) or
//! being allowed to gamble at all (an actuator) is what the selection
//! problems pay for.

mod examples;
mod random;
mod setcover;

pub use examples::{
    example1_mdp, example1_pomdp, example2_mdp, example3_instance, example4_instance,
    gadget_kernel, gadget_reward_table, GapParams, Var3Reward, GADGET_B0,
};
pub use random::{random_fmdp_as_instance, random_fmdp_ss_instance, RandomAsParams, RandomSsParams, RANDOM_SS_GAMMA};
pub use setcover::{
    r_approx, setcover_brute_force, setcover_to_fmdp_as, setcover_to_fmdp_ss, ReductionInstance,
    SetCoverInstance, SETCOVER_SUBSET_CAP,
};
