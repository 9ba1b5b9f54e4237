pub mod config;
pub mod figures;
pub mod report;
pub mod run;
pub mod sweep;
pub mod verify;
