//! Small feed-forward networks with manual backpropagation and a Beta policy head.

pub mod beta;
pub mod init;
pub mod mlp;
pub mod policy;
pub mod special;

pub use beta::{
    actor_head, beta_entropy, beta_kl, beta_log_prob, beta_log_prob_grad_raw, beta_sample,
    fisher_raw_product, BetaParams,
};
pub use init::orthogonal_init;
pub use mlp::{ForwardCache, Mlp, MlpShape, HIDDEN_WIDTH};
pub use policy::{Actor, Critic};
