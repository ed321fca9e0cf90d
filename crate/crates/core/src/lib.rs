pub mod bench;
pub mod cli;
pub mod extraction;
pub mod mappings;
pub mod query;
pub mod rdf;
pub mod service;
pub mod source;
pub mod wikitext;
