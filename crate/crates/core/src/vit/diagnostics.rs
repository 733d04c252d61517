//! High-norm token diagnostics.
//!
//! Tokens whose final-block output norm exceeds `median + k·IQR` of the
//! patch-token norms are flagged as outliers. Class and register tokens are
//! reported separately and never enter the patch outlier rate.

use ndarray::Array2;

use super::config::TokenLayout;

pub const DEFAULT_IQR_FACTOR: f64 = 3.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TokenKind {
    Class,
    Register,
    Patch,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TokenNorm {
    pub index: usize,
    pub kind: TokenKind,
    pub norm: f64,
    pub outlier: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TokenNormReport {
    pub tokens: Vec<TokenNorm>,
    pub patch_median: f64,
    pub patch_iqr: f64,
    pub threshold: f64,
    /// Flagged patch tokens divided by the number of patch tokens.
    pub patch_outlier_rate: f64,
}

impl TokenNormReport {
    pub fn of_kind(&self, kind: TokenKind) -> impl Iterator<Item = &TokenNorm> {
        self.tokens.iter().filter(move |t| t.kind == kind)
    }

    pub fn outliers(&self) -> impl Iterator<Item = &TokenNorm> {
        self.tokens.iter().filter(|t| t.outlier)
    }
}

/// Linear-interpolation quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

pub fn token_norm_report(final_tokens: &Array2<f64>, layout: &TokenLayout, iqr_factor: f64) -> TokenNormReport {
    let norms: Vec<f64> = final_tokens.outer_iter().map(|row| row.dot(&row).sqrt()).collect();
    let mut patch: Vec<f64> = norms[layout.patch_range()].to_vec();
    patch.sort_by(f64::total_cmp);
    let median = quantile(&patch, 0.5);
    let iqr = quantile(&patch, 0.75) - quantile(&patch, 0.25);
    let threshold = median + iqr_factor * iqr;

    let tokens: Vec<TokenNorm> = norms
        .iter()
        .enumerate()
        .map(|(index, &norm)| {
            let kind = if index == layout.class_index() {
                TokenKind::Class
            } else if layout.register_range().contains(&index) {
                TokenKind::Register
            } else {
                TokenKind::Patch
            };
            TokenNorm {
                index,
                kind,
                norm,
                outlier: norm > threshold,
            }
        })
        .collect();
    let flagged = tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Patch && t.outlier)
        .count();
    TokenNormReport {
        patch_outlier_rate: if layout.n_patch == 0 {
            0.0
        } else {
            flagged as f64 / layout.n_patch as f64
        },
        tokens,
        patch_median: median,
        patch_iqr: iqr,
        threshold,
    }
}
