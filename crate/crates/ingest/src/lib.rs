//! Medical text to knowledge-base fragments through a completion endpoint.
//!
//! A [`TranslationJob`] is prompted with a [`PromptTemplate`], the reply is
//! parsed and checked, failures are fed back as repair prompts, and the
//! accepted program is merged into `kb/<disease>.lp` by [`KbStore`].

pub mod client;
pub mod extract;
pub mod merge;
pub mod prompt;
pub mod store;
pub mod translate;

pub use client::{FixtureClient, HttpClient, HttpConfig, TranslatorClient, TransportError};
pub use extract::extract_code_blocks;
pub use merge::{merge, Merged};
pub use prompt::{build_prompt, PromptError, PromptTemplate, Style};
pub use store::{KbStore, Saved, StoreError};
pub use translate::{
    translate, translate_all, validate, Attempt, TranslateError, TranslationJob,
    DEFAULT_MAX_ATTEMPTS,
};
