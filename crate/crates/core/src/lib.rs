pub mod coeff;
pub mod rational;
pub mod error;
pub mod laurent;
pub mod precision;
pub mod series;
pub mod local2d;
pub mod extend;
pub mod symbols;
pub mod direct_image;
pub mod expr;
pub mod format;
pub mod adeles;
pub mod report;
pub mod sample;
pub mod verify;
