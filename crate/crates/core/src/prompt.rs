//! Editable prompt text.
//!
//! Every fixed sentence that goes into an LLM prompt lives in a text asset
//! under `assets/`. The built-in copies are compiled in; the `eaqa` crate can
//! replace any of them from a directory of files with the same names.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

macro_rules! assets {
    ($($field:ident => $file:literal),* $(,)?) => {
        /// The full set of prompt text assets.
        #[derive(Debug, Clone, PartialEq, Eq)]
        pub struct PromptAssets {
            $(pub $field: String,)*
        }

        /// File names of every asset, in declaration order.
        pub const ASSET_FILES: &[&str] = &[$($file),*];

        impl Default for PromptAssets {
            fn default() -> Self {
                PromptAssets {
                    $($field: clean(include_str!(concat!("../assets/", $file))),)*
                }
            }
        }

        impl PromptAssets {
            /// Built-in assets with any file `lookup` returns swapped in.
            pub fn with_overrides(mut lookup: impl FnMut(&str) -> Option<String>) -> Self {
                let mut assets = PromptAssets::default();
                $(
                    if let Some(text) = lookup($file) {
                        assets.$field = clean(&text);
                    }
                )*
                assets
            }
        }
    };
}

assets! {
    role_qg_task => "role_qg_task.txt",
    role_qg_roles_header => "role_qg_roles_header.txt",
    role_qg_instruction => "role_qg_instruction.txt",
    role_qg_examples_header => "role_qg_examples_header.txt",
    ctx_qg_task => "ctx_qg_task.txt",
    ctx_qg_document_header => "ctx_qg_document_header.txt",
    ctx_qg_instruction => "ctx_qg_instruction.txt",
    extract_test_header => "extract_test_header.txt",
    extract_training_header => "extract_training_header.txt",
    extract_instruction => "extract_instruction.txt",
    extract_questions_header => "extract_questions_header.txt",
    extract_answers_header => "extract_answers_header.txt",
}

/// Drops `#` comment lines and surrounding blank lines.
fn clean(raw: &str) -> String {
    let kept: Vec<&str> = raw.lines().filter(|l| !l.starts_with('#')).collect();
    kept.join("\n").trim().to_string()
}

/// Replaces `{name}` placeholders. Unknown placeholders are left untouched.
pub fn render(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = &after[..close];
                match vars.iter().find(|(k, _)| *k == name) {
                    Some((_, value)) => out.push_str(value),
                    None => {
                        out.push('{');
                        out.push_str(name);
                        out.push('}');
                    }
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}
