pub mod bialgebra;
pub mod classify;
pub mod coeffpoly;
pub mod density;
pub mod expr;
pub mod jetgroup;
pub mod poissonlie;
pub mod quantum;
pub mod report;
pub mod series;
pub mod suite;
