//! Deterministic SEEIIR transmission model.
//!
//! Exposed and infectious periods are each split into two stages, giving
//! Erlang(2) waiting times. Transmission is frequency dependent and the
//! contact rate is scaled by `kappa` on school-holiday days.

mod calendar;
mod integrate;
mod model;
mod params;

pub use calendar::HolidayCalendar;
pub use integrate::{integrate, weekly_incidence, Trajectory, DEFAULT_STEP};
pub(crate) use integrate::steps_per_day;
pub use model::{beta_star, force_of_infection, initial_state, ode_rhs, reproduction_numbers};
pub use params::{CompartmentState, EpiParams};
