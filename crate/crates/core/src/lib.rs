pub mod chaos;
pub mod harness;
pub mod monte_carlo;
pub mod propagator;
pub mod statistics;
