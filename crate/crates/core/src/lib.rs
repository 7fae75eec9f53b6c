//! Profile-scoped common-sense networks: statement extraction,
//! normalization, relaxation, filtering by author profile, inference over the
//! resulting networks, and the collection game that feeds them.
//!
//! The guide in `book/` walks through each concept with runnable examples.

pub mod corpus;
pub mod error;
pub mod extraction;
pub mod filter;
pub mod game;
pub mod inference;
pub mod network;
pub mod normalization;
pub mod pipeline;
pub mod profile;
pub mod relation;
pub mod relaxation;
pub mod resources;
pub mod store;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/extraction.md")]
    mod extraction {}
    #[doc = include_str!("../../../book/src/normalization.md")]
    mod normalization {}
    #[doc = include_str!("../../../book/src/relaxation.md")]
    mod relaxation {}
    #[doc = include_str!("../../../book/src/profiles.md")]
    mod profiles {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/game.md")]
    mod game {}
    #[doc = include_str!("../../../book/src/serving.md")]
    mod serving {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
