//! Bundled figure recipes.

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

pub const RECIPES: &[(&str, &str)] = &[
    ("fig2a", include_str!("../recipes/fig2a.toml")),
    ("fig2b", include_str!("../recipes/fig2b.toml")),
    ("fig3ab", include_str!("../recipes/fig3ab.toml")),
    ("fig3cd", include_str!("../recipes/fig3cd.toml")),
    ("fig3ef", include_str!("../recipes/fig3ef.toml")),
    ("fig4", include_str!("../recipes/fig4.toml")),
];

pub fn names() -> Vec<&'static str> {
    RECIPES.iter().map(|(n, _)| *n).collect()
}

pub fn recipe_text(name: &str) -> CliResult<&'static str> {
    RECIPES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| CliError::Config(format!("unknown recipe `{name}`; available: {}", names().join(", "))))
}

pub fn recipe(name: &str) -> CliResult<ExperimentConfig> {
    ExperimentConfig::from_toml(recipe_text(name)?)
        .map_err(|e| CliError::Config(format!("recipe {name}: {e}")))
}
