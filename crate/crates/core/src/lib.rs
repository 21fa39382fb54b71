//! Coverage-directed test generation for human-robot interaction software.
//!
//! The robot's control code and its environment are modelled as BDI agents
//! ([`agent`], [`scenario`]). Belief subsets chosen by hand, at random, or by
//! Q-learning ([`explorer`]) steer the model; its traces become abstract tests
//! that are concretized ([`testgen`]) and run against a discrete-event
//! simulation of the robot ([`sim`]) watched by assertion monitors
//! ([`monitors`]). [`campaign`] ties the stages together.

pub mod agent;
pub mod explorer;
pub mod scenario;
pub mod testgen;
pub mod sim;
pub mod monitors;
pub mod campaign;
