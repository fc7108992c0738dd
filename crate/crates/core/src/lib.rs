pub mod corpus;
pub mod error;
pub mod label;
pub mod personas;
pub mod prompting;
pub mod parsing;
pub mod metrics;
pub mod agreement;
pub mod stats;
pub mod linguistics;
pub mod provider;
pub mod report;
