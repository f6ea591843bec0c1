pub mod engine;
pub mod fabric;
pub mod metrics;
pub mod model;
pub mod topology;
pub mod endhost;
pub mod scenario;
