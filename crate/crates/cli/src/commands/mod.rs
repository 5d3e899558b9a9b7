pub mod generate;
pub mod list;
pub mod propagate;
pub mod sweep;
pub mod verify;
