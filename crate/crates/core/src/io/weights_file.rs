//! Weights on disk: a fixed little-endian binary layout of named tensors
//! with shapes, plus an equivalent JSON debug form. The header carries a
//! format version and a hash of the model configuration so weights cannot
//! silently load against mismatched shapes.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::cfa::{CfaConfig, NetworkWeights};
use crate::layers::{EquiLinear, GeometricBilinear, ManyBodyProduct};
use crate::nn::{LayerNorm, Linear, Mlp, TransformerLayer};
use crate::tensor::Tensor;

use super::IoError;

const MAGIC: &[u8; 4] = b"PGFW";
const FORMAT_VERSION: u32 = 1;

/// FNV-1a over the canonical JSON of the model config.
pub fn config_hash(cfg: &CfaConfig) -> u64 {
    let text = serde_json::to_string(cfg).expect("config serializes");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

type Visitor<'a> = dyn FnMut(String, &mut Tensor) -> Result<(), IoError> + 'a;

fn visit_linear(prefix: &str, l: &mut Linear, f: &mut Visitor) -> Result<(), IoError> {
    f(format!("{prefix}.w"), &mut l.w)?;
    if let Some(b) = &mut l.b {
        f(format!("{prefix}.b"), b)?;
    }
    Ok(())
}

fn visit_mlp(prefix: &str, m: &mut Mlp, f: &mut Visitor) -> Result<(), IoError> {
    for (i, layer) in m.layers.iter_mut().enumerate() {
        visit_linear(&format!("{prefix}.{i}"), layer, f)?;
    }
    Ok(())
}

fn visit_equi(prefix: &str, e: &mut EquiLinear, f: &mut Visitor) -> Result<(), IoError> {
    f(format!("{prefix}.w"), &mut e.w)?;
    f(format!("{prefix}.v"), &mut e.v)
}

fn visit_layer_norm(prefix: &str, l: &mut LayerNorm, f: &mut Visitor) -> Result<(), IoError> {
    f(format!("{prefix}.gamma"), &mut l.gamma)?;
    f(format!("{prefix}.beta"), &mut l.beta)
}

fn visit_bilinear(prefix: &str, b: &mut GeometricBilinear, f: &mut Visitor) -> Result<(), IoError> {
    visit_equi(&format!("{prefix}.g_left"), &mut b.g_left, f)?;
    visit_equi(&format!("{prefix}.g_right"), &mut b.g_right, f)?;
    visit_equi(&format!("{prefix}.j_left"), &mut b.j_left, f)?;
    visit_equi(&format!("{prefix}.j_right"), &mut b.j_right, f)?;
    visit_equi(&format!("{prefix}.out"), &mut b.out, f)
}

fn visit_many_body(prefix: &str, m: &mut ManyBodyProduct, f: &mut Visitor) -> Result<(), IoError> {
    visit_equi(&format!("{prefix}.lin_x"), &mut m.lin_x, f)?;
    visit_equi(&format!("{prefix}.lin_y"), &mut m.lin_y, f)?;
    f(format!("{prefix}.w"), &mut m.w)?;
    f(format!("{prefix}.w_join"), &mut m.w_join)
}

fn visit_transformer(
    prefix: &str,
    t: &mut TransformerLayer,
    f: &mut Visitor,
) -> Result<(), IoError> {
    visit_linear(&format!("{prefix}.wq"), &mut t.wq, f)?;
    visit_linear(&format!("{prefix}.wk"), &mut t.wk, f)?;
    visit_linear(&format!("{prefix}.wv"), &mut t.wv, f)?;
    visit_linear(&format!("{prefix}.wo"), &mut t.wo, f)?;
    visit_layer_norm(&format!("{prefix}.ln_attn"), &mut t.ln_attn, f)?;
    visit_mlp(&format!("{prefix}.ffn"), &mut t.ffn, f)?;
    visit_layer_norm(&format!("{prefix}.ln_ffn"), &mut t.ln_ffn, f)
}

/// Walk every tensor of the network in a fixed order.
pub fn for_each_tensor_mut(w: &mut NetworkWeights, f: &mut Visitor) -> Result<(), IoError> {
    visit_linear("embed.node", &mut w.node_embed, f)?;
    visit_linear("embed.edge", &mut w.edge_embed, f)?;
    for (i, block) in w.blocks.iter_mut().enumerate() {
        let p = format!("blocks.{i}");
        let cfa = &mut block.cfa;
        visit_linear(&format!("{p}.cfa.q"), &mut cfa.q, f)?;
        visit_linear(&format!("{p}.cfa.k"), &mut cfa.k, f)?;
        visit_linear(&format!("{p}.cfa.v"), &mut cfa.v, f)?;
        visit_linear(&format!("{p}.cfa.q_points"), &mut cfa.q_points, f)?;
        visit_linear(&format!("{p}.cfa.k_points"), &mut cfa.k_points, f)?;
        visit_linear(&format!("{p}.cfa.value_mv"), &mut cfa.value_mv, f)?;
        visit_equi(&format!("{p}.cfa.value_equi"), &mut cfa.value_equi, f)?;
        visit_linear(&format!("{p}.cfa.pair_bias"), &mut cfa.pair_bias, f)?;
        for (h, vt) in cfa.vtilde.iter_mut().enumerate() {
            visit_equi(&format!("{p}.cfa.vtilde.{h}"), vt, f)?;
        }
        for (h, b) in cfa.bilinear.iter_mut().enumerate() {
            visit_bilinear(&format!("{p}.cfa.bilinear.{h}"), b, f)?;
        }
        visit_many_body(&format!("{p}.cfa.many_body"), &mut cfa.many_body, f)?;
        f(format!("{p}.cfa.gamma_raw"), &mut cfa.gamma_raw)?;
        visit_linear(&format!("{p}.cfa.out"), &mut cfa.out, f)?;
        visit_equi(&format!("{p}.cfa.geo_out"), &mut cfa.geo_out, f)?;

        visit_mlp(&format!("{p}.post_mlp"), &mut block.post_mlp, f)?;
        visit_transformer(&format!("{p}.transformer"), &mut block.transformer, f)?;
        visit_mlp(&format!("{p}.node_mlp"), &mut block.node_mlp, f)?;
        visit_linear(&format!("{p}.edge_mlp_in"), &mut block.edge_mlp_in, f)?;
        visit_linear(&format!("{p}.edge_mlp_out"), &mut block.edge_mlp_out, f)?;
        visit_mlp(&format!("{p}.bb_mlp"), &mut block.bb_mlp, f)?;
    }
    Ok(())
}

/// Owned `(name, tensor)` pairs in traversal order.
pub fn named_tensors(w: &NetworkWeights) -> Vec<(String, Tensor)> {
    let mut clone = w.clone();
    let mut out = Vec::new();
    for_each_tensor_mut(&mut clone, &mut |name, t| {
        out.push((name, std::mem::replace(t, Tensor::zeros(&[0]))));
        Ok(())
    })
    .expect("collection cannot fail");
    out
}

fn write_u32(out: &mut impl Write, v: u32) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}

fn write_u64(out: &mut impl Write, v: u64) -> std::io::Result<()> {
    out.write_all(&v.to_le_bytes())
}

/// Serialize to the binary layout.
pub fn write_weights(w: &NetworkWeights, out: &mut impl Write) -> Result<(), IoError> {
    let tensors = named_tensors(w);
    out.write_all(MAGIC)?;
    write_u32(out, FORMAT_VERSION)?;
    write_u64(out, config_hash(&w.config))?;
    write_u32(out, tensors.len() as u32)?;
    for (name, t) in &tensors {
        write_u32(out, name.len() as u32)?;
        out.write_all(name.as_bytes())?;
        write_u32(out, t.dims().len() as u32)?;
        for &d in t.dims() {
            write_u64(out, d as u64)?;
        }
        for v in t.data() {
            out.write_all(&v.to_le_bytes())?;
        }
    }
    Ok(())
}

fn read_u32(input: &mut impl Read) -> std::io::Result<u32> {
    let mut buf = [0u8; 4];
    input.read_exact(&mut buf)?;
    Ok(u32::from_le_bytes(buf))
}

fn read_u64(input: &mut impl Read) -> std::io::Result<u64> {
    let mut buf = [0u8; 8];
    input.read_exact(&mut buf)?;
    Ok(u64::from_le_bytes(buf))
}

/// Deserialize against a model config; shapes and the tensor inventory must
/// match exactly.
pub fn read_weights(cfg: &CfaConfig, input: &mut impl Read) -> Result<NetworkWeights, IoError> {
    let mut magic = [0u8; 4];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(IoError::BadWeightsFile {
            reason: "bad magic".into(),
        });
    }
    let version = read_u32(input)?;
    if version != FORMAT_VERSION {
        return Err(IoError::BadWeightsFile {
            reason: format!("unsupported format version {version}"),
        });
    }
    let hash = read_u64(input)?;
    if hash != config_hash(cfg) {
        return Err(IoError::ConfigMismatch);
    }
    let count = read_u32(input)? as usize;
    let mut map: BTreeMap<String, Tensor> = BTreeMap::new();
    for _ in 0..count {
        let name_len = read_u32(input)? as usize;
        let mut name_buf = vec![0u8; name_len];
        input.read_exact(&mut name_buf)?;
        let name = String::from_utf8(name_buf).map_err(|_| IoError::BadWeightsFile {
            reason: "tensor name is not utf-8".into(),
        })?;
        let rank = read_u32(input)? as usize;
        let mut dims = Vec::with_capacity(rank);
        for _ in 0..rank {
            dims.push(read_u64(input)? as usize);
        }
        let len: usize = dims.iter().product();
        let mut data = vec![0.0f64; len];
        let mut buf = [0u8; 8];
        for v in &mut data {
            input.read_exact(&mut buf)?;
            *v = f64::from_le_bytes(buf);
        }
        if map.insert(name.clone(), Tensor::from_data(&dims, data)).is_some() {
            return Err(IoError::BadWeightsFile {
                reason: format!("duplicate tensor `{name}`"),
            });
        }
    }

    let mut weights = NetworkWeights::init(cfg, 0);
    for_each_tensor_mut(&mut weights, &mut |name, slot| {
        let tensor = map.remove(&name).ok_or_else(|| IoError::BadWeightsFile {
            reason: format!("missing tensor `{name}`"),
        })?;
        if tensor.dims() != slot.dims() {
            return Err(IoError::BadWeightsFile {
                reason: format!(
                    "tensor `{name}` has shape {:?}, expected {:?}",
                    tensor.dims(),
                    slot.dims()
                ),
            });
        }
        *slot = tensor;
        Ok(())
    })?;
    if let Some(name) = map.keys().next() {
        return Err(IoError::BadWeightsFile {
            reason: format!("unexpected tensor `{name}`"),
        });
    }
    Ok(weights)
}

pub fn save_weights(w: &NetworkWeights, path: &Path) -> Result<(), IoError> {
    let file = std::fs::File::create(path)?;
    let mut out = std::io::BufWriter::new(file);
    write_weights(w, &mut out)?;
    Ok(())
}

pub fn load_weights(cfg: &CfaConfig, path: &Path) -> Result<NetworkWeights, IoError> {
    let file = std::fs::File::open(path)?;
    let mut input = std::io::BufReader::new(file);
    read_weights(cfg, &mut input)
}

/// JSON debug mirror of the binary layout.
#[derive(Serialize, Deserialize)]
pub struct WeightsJson {
    pub format_version: u32,
    pub config_hash: u64,
    pub tensors: BTreeMap<String, Tensor>,
}

pub fn weights_to_json(w: &NetworkWeights) -> WeightsJson {
    WeightsJson {
        format_version: FORMAT_VERSION,
        config_hash: config_hash(&w.config),
        tensors: named_tensors(w).into_iter().collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_config() -> CfaConfig {
        CfaConfig {
            n_heads: 2,
            node_dim: 16,
            edge_dim: 8,
            n_query_points: 2,
            n_point_values: 2,
            n_blocks: 2,
            scalar_head_dim: 4,
            transformer_heads: 2,
            transformer_ffn_dim: 16,
            edge_hidden_dim: 4,
            backbone_hidden_dim: 8,
            use_positional_encoding: true,
        }
    }

    #[test]
    fn binary_round_trip_is_bit_exact() {
        let cfg = tiny_config();
        let w = NetworkWeights::init(&cfg, 777);
        let mut buf = Vec::new();
        write_weights(&w, &mut buf).unwrap();
        let back = read_weights(&cfg, &mut buf.as_slice()).unwrap();
        assert_eq!(w, back);

        // byte-identical re-serialization
        let mut buf2 = Vec::new();
        write_weights(&back, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn mismatched_config_is_rejected() {
        let cfg = tiny_config();
        let w = NetworkWeights::init(&cfg, 7);
        let mut buf = Vec::new();
        write_weights(&w, &mut buf).unwrap();
        let other = CfaConfig {
            n_heads: 4,
            ..tiny_config()
        };
        assert!(matches!(
            read_weights(&other, &mut buf.as_slice()),
            Err(IoError::ConfigMismatch)
        ));
    }

    #[test]
    fn truncated_file_is_rejected() {
        let cfg = tiny_config();
        let w = NetworkWeights::init(&cfg, 7);
        let mut buf = Vec::new();
        write_weights(&w, &mut buf).unwrap();
        buf.truncate(buf.len() / 2);
        assert!(read_weights(&cfg, &mut buf.as_slice()).is_err());
    }

    #[test]
    fn every_tensor_has_a_unique_name() {
        let cfg = tiny_config();
        let w = NetworkWeights::init(&cfg, 7);
        let tensors = named_tensors(&w);
        let names: std::collections::BTreeSet<_> = tensors.iter().map(|(n, _)| n).collect();
        assert_eq!(names.len(), tensors.len());
        let total: usize = tensors.iter().map(|(_, t)| t.len()).sum();
        assert_eq!(total, w.parameter_counts().total());
    }

    #[test]
    fn json_form_matches_binary_inventory() {
        let cfg = tiny_config();
        let w = NetworkWeights::init(&cfg, 7);
        let json = weights_to_json(&w);
        assert_eq!(json.tensors.len(), named_tensors(&w).len());
        assert_eq!(json.config_hash, config_hash(&cfg));
    }
}
