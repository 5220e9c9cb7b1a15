pub mod btype;
pub mod cli;
pub mod corpus;
pub mod eval;
pub mod fst;
pub mod hmm;
pub mod lexicon;
pub mod symbols;
pub mod tagger;
