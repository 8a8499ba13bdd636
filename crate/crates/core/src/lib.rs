pub mod model;
pub mod ocel;
pub mod parsers;
pub mod running_example;
pub mod stats;
pub mod streaming;
pub mod validation;
