pub mod bounds;
pub mod cli;
pub mod exact;
pub mod reflection;
pub mod special;
pub mod verify;
