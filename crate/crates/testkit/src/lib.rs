//! Test fixtures: random event streams and a synthetic tournament corpus.

pub mod corpus;
pub mod stream;
