pub mod approx;
pub mod construct;
pub mod json;
pub mod multfunc;
pub mod search;
pub mod ntkernel;
pub mod tuples;
pub mod verify;
