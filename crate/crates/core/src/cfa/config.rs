//! Model hyperparameters for the frame-attention network.

use serde::{Deserialize, Serialize};

/// Shape parameters of one attention block and the surrounding network.
///
/// The geometric value channels are per head; `n_geo_channels` geometric
/// node features ride along with them. The scalar query/key/value width per
/// head is `scalar_head_dim`, kept deliberately small for CPU throughput.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CfaConfig {
    pub n_heads: usize,
    pub node_dim: usize,
    pub edge_dim: usize,
    pub n_query_points: usize,
    pub n_point_values: usize,
    pub n_blocks: usize,
    pub scalar_head_dim: usize,
    pub transformer_heads: usize,
    pub transformer_ffn_dim: usize,
    pub edge_hidden_dim: usize,
    pub backbone_hidden_dim: usize,
    /// Absolute and relative sequence-position encodings. Disabling them
    /// makes the network permutation-equivariant.
    pub use_positional_encoding: bool,
}

impl Default for CfaConfig {
    fn default() -> Self {
        CfaConfig {
            n_heads: 8,
            node_dim: 240,
            edge_dim: 120,
            n_query_points: 8,
            n_point_values: 8,
            n_blocks: 6,
            scalar_head_dim: 16,
            transformer_heads: 4,
            transformer_ffn_dim: 480,
            edge_hidden_dim: 16,
            backbone_hidden_dim: 64,
            use_positional_encoding: true,
        }
    }
}

impl CfaConfig {
    /// Distance-term weight `sqrt(2 / (9 n_query_points))`.
    pub fn w_c(&self) -> f64 {
        (2.0 / (9.0 * self.n_query_points as f64)).sqrt()
    }

    /// Overall logit weight `sqrt(1/3)`.
    pub fn w_l(&self) -> f64 {
        (1.0f64 / 3.0).sqrt()
    }

    /// Geometric node feature channels; rides the value-channel width.
    pub fn n_geo_channels(&self) -> usize {
        self.n_point_values
    }

    /// Total multivector value channels across heads.
    pub fn value_channels(&self) -> usize {
        self.n_heads * self.n_point_values
    }

    /// Width of the scalar concatenation fed to the final node linear.
    pub fn concat_dim(&self) -> usize {
        let h = self.n_heads;
        let hp = self.value_channels();
        h * self.edge_dim      // attention-weighted pair features
            + h * self.scalar_head_dim // scalar attention output
            + hp * 16          // message coefficients
            + hp               // message norms
            + hp               // message infinity norms
            + h * 16           // relative-frame coefficients
    }

    /// Input width of the backbone-update MLP.
    pub fn backbone_in_dim(&self) -> usize {
        self.node_dim + self.n_geo_channels() * 16 + self.n_heads * 16
    }

    pub fn validate(&self) -> Result<(), String> {
        let positive = [
            ("n_heads", self.n_heads),
            ("node_dim", self.node_dim),
            ("edge_dim", self.edge_dim),
            ("n_query_points", self.n_query_points),
            ("n_point_values", self.n_point_values),
            ("n_blocks", self.n_blocks),
            ("scalar_head_dim", self.scalar_head_dim),
            ("transformer_heads", self.transformer_heads),
            ("transformer_ffn_dim", self.transformer_ffn_dim),
            ("edge_hidden_dim", self.edge_hidden_dim),
            ("backbone_hidden_dim", self.backbone_hidden_dim),
        ];
        for (name, value) in positive {
            if value == 0 {
                return Err(format!("{name} must be positive"));
            }
        }
        if self.node_dim % self.transformer_heads != 0 {
            return Err("node_dim must divide across transformer heads".into());
        }
        Ok(())
    }
}
