pub mod error;
pub mod experiments;
pub mod gamma;
pub mod magnus;
pub mod model;
pub mod operator;
pub mod presets;
pub mod propagate;
pub mod pulse;
pub mod quadrature;
pub mod units;
pub mod verify;
