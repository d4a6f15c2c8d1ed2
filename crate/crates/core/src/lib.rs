//! Saddle-point solutions of finite-horizon zero-sum linear-quadratic games
//! in which the minimizer's control is cheap (weighted by `ε²`) and the state
//! splits into slow and fast parts.
//!
//! The crate provides
//! - the exact solution through the full game Riccati terminal-value problem
//!   ([`exact`]),
//! - the zero-order asymptotic solution built from outer terms and closed-form
//!   boundary-layer corrections ([`asymptotics`]),
//! - the value of the approximate feedback pair and its guaranteed results,
//!   with ε-sweeps and fitted error constants ([`evaluation`]),
//! - closed-loop simulation and cost quadrature ([`simulator`]).

pub mod asymptotics;
pub mod error;
pub mod evaluation;
pub mod exact;
pub mod game_model;
pub mod linalg;
pub mod matfn;
pub mod ode;
pub mod parallel;
pub mod simulator;

pub use asymptotics::{approximate_feedback, solve_asymptotic, AsymptoticSolution};
pub use error::{Error, Result};
pub use evaluation::{convergence_sweep, evaluate, Evaluation, SweepReport, ValueReport};
pub use exact::{exact_feedback, solve_exact, ExactSolution};
pub use game_model::{pursuit_evasion, BlockPartition, Dimensions, GameSpec};
pub use matfn::{MatrixFunction, ScalarFunction};
pub use ode::{IntegratorConfig, MatrixTrajectory, Method};
pub use parallel::Execution;
pub use simulator::{simulate, FeedbackLaw, LawKind, TrajectoryRecord};
