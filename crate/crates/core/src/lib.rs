pub mod catalog;
pub mod curvature;
pub mod expr;
pub mod exterior;
pub mod lie;
pub mod monge;
pub mod ode2;
pub mod ode3;
pub mod report;
pub mod verify;
