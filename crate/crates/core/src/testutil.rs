pub use crate::fixtures::{doc_from_text, m};
