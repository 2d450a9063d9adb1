//! Structuring clinical-trial free text into (entity, attribute, relation)
//! triples.
//!
//! A record goes through sentence segmentation, dictionary entity
//! recognition against a knowledge base, a token grammar for attribute
//! expressions, and a linker that mixes KB compatibility with syntactic
//! proximity:
//!
//! ```
//! use critex::kb::bundled_kb;
//! use critex::output::{to_json, StructuredRecord};
//! use critex::pipeline::{annotate, PipelineConfig};
//!
//! let kb = bundled_kb();
//! let record = annotate("rec01", "Body Mass Index ≤ 40 kg/m^2", &kb, &PipelineConfig::default(), None)?;
//! let json = to_json(&StructuredRecord::from_annotated(&record), false);
//! assert_eq!(
//!     json,
//!     r#"{"result":{"id":"rec01","text":"Body Mass Index ≤ 40 kg/m^2","relation":[{"entity":"Body Mass Index","attribute":"≤ 40 kg/m^2"}]}}"#
//! );
//! # Ok::<(), critex::Error>(())
//! ```

pub mod attributes;
pub mod brat;
pub mod cli;
pub mod corpus;
pub mod entities;
pub mod eval;
pub mod kb;
pub mod linker;
pub mod output;
pub mod pipeline;
pub mod segmentation;
pub mod syntax;
pub mod units;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Kb(#[from] kb::KbError),
    #[error(transparent)]
    Parse(#[from] syntax::ParseError),
    #[error(transparent)]
    Link(#[from] linker::LinkError),
    #[error(transparent)]
    Brat(#[from] brat::BratError),
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{context}: {source}")]
    Io {
        context: String,
        source: std::io::Error,
    },
    #[error("record {record}: {source}")]
    InRecord {
        record: String,
        #[source]
        source: Box<Error>,
    },
}

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/segmentation.md")]
    mod segmentation {}
    #[doc = include_str!("../../../book/src/knowledge-base.md")]
    mod knowledge_base {}
    #[doc = include_str!("../../../book/src/attributes.md")]
    mod attributes {}
    #[doc = include_str!("../../../book/src/linking.md")]
    mod linking {}
    #[doc = include_str!("../../../book/src/evaluation.md")]
    mod evaluation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
