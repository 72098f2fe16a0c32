//! The frame-attention block: invariant scores from local-frame point
//! features, multivector value messages moved between frames, aggregated
//! relative frame transforms, and grade-resolved higher-order products.

use nalgebra::Vector3;

use crate::layers::{GeometricBilinear, ManyBodyProduct};
use crate::motor::{Frame, Motor};
use crate::nn::{softmax_in_place, softplus};
use crate::pga::Multivector;

use super::{CfaBlockWeights, CfaConfig, CfaError};

/// Per-node inputs to one attention block.
pub struct CfaInputs<'a> {
    /// Scalar node features, `[n, node_dim]` row-major.
    pub s: &'a [f64],
    /// Pair features, `[n, n, edge_dim]` row-major.
    pub z: &'a [f64],
    /// Geometric node features, `[n, n_geo_channels]`.
    pub geo: &'a [Multivector],
    /// Residue frames as motors and as matrices (same transforms).
    pub motors: &'a [Motor],
    pub frames: &'a [Frame],
}

/// Outputs of one attention block.
pub struct CfaOutputs {
    /// Scalar feature update, `[n, node_dim]`.
    pub s_update: Vec<f64>,
    /// Geometric feature update, `[n, n_geo_channels]`.
    pub geo_update: Vec<Multivector>,
    /// Attention-aggregated relative frames, `[n, n_heads]`. Convex
    /// combinations of unit motors, generally not unit themselves.
    pub t_rel: Vec<Multivector>,
}

pub(crate) fn ensure_finite(stage: &'static str, values: &[f64]) -> Result<(), CfaError> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(CfaError::NonFinite { stage })
    }
}

pub(crate) fn ensure_finite_mvs(
    stage: &'static str,
    values: &[Multivector],
) -> Result<(), CfaError> {
    if values.iter().all(Multivector::is_finite) {
        Ok(())
    } else {
        Err(CfaError::NonFinite { stage })
    }
}

/// Row-stochastic attention, `[n_heads, n, n]`.
///
/// Logit: `w_l (q.k / sqrt(c) + b_ij - gamma w_c / 2 sum_p |T_i q_p - T_j k_p|^2)`.
pub fn attention_scores(
    cfg: &CfaConfig,
    w: &CfaBlockWeights,
    s: &[f64],
    z: &[f64],
    frames: &[Frame],
) -> Result<Vec<f64>, CfaError> {
    let n = frames.len();
    let (h, c, p) = (cfg.n_heads, cfg.scalar_head_dim, cfg.n_query_points);
    if s.len() != n * cfg.node_dim || z.len() != n * n * cfg.edge_dim {
        return Err(CfaError::ShapeMismatch { what: "attention inputs" });
    }

    let q = w.q.forward_batch(s, n);
    let k = w.k.forward_batch(s, n);
    let qp = w.q_points.forward_batch(s, n);
    let kp = w.k_points.forward_batch(s, n);

    // move local query/key points into the global frame once per node,
    // stored flat as [node][head][3 * n_points] for contiguous dot products
    let stride = 3 * p;
    let mut tq = vec![0.0f64; n * h * stride];
    let mut tk = vec![0.0f64; n * h * stride];
    // summed squared norms per (node, head); the pair distance term then
    // reduces to |q|^2 + |k|^2 - 2 q.k over the flattened points
    let mut q_norm2 = vec![0.0f64; n * h];
    let mut k_norm2 = vec![0.0f64; n * h];
    for i in 0..n {
        for head in 0..h {
            for pt in 0..p {
                let base = (i * h * p + head * p + pt) * 3;
                let lq = Vector3::new(qp[base], qp[base + 1], qp[base + 2]);
                let lk = Vector3::new(kp[base], kp[base + 1], kp[base + 2]);
                let gq = frames[i].act_point(&lq);
                let gk = frames[i].act_point(&lk);
                let out_base = (i * h + head) * stride + pt * 3;
                tq[out_base..out_base + 3].copy_from_slice(&[gq.x, gq.y, gq.z]);
                tk[out_base..out_base + 3].copy_from_slice(&[gk.x, gk.y, gk.z]);
                q_norm2[i * h + head] += gq.norm_squared();
                k_norm2[i * h + head] += gk.norm_squared();
            }
        }
    }

    let inv_sqrt_c = 1.0 / (c as f64).sqrt();
    let w_l = cfg.w_l();
    let w_c = cfg.w_c();

    // pair bias for all (i, j) at once: [n*n, h]
    let bias = w.pair_bias.forward_batch(z, n * n);

    let mut attn = vec![0.0; h * n * n];
    let mut row = vec![0.0; n];
    for head in 0..h {
        let gamma = softplus(w.gamma_raw.data()[head]);
        let dist_weight = gamma * w_c * 0.5;
        for i in 0..n {
            let qi = &q[(i * h + head) * c..(i * h + head + 1) * c];
            let tqi = &tq[(i * h + head) * stride..(i * h + head + 1) * stride];
            let qn = q_norm2[i * h + head];
            for (j, slot) in row.iter_mut().enumerate() {
                let kj = &k[(j * h + head) * c..(j * h + head + 1) * c];
                let qk = crate::nn::dot(qi, kj);
                let tkj = &tk[(j * h + head) * stride..(j * h + head + 1) * stride];
                let dist2 = qn + k_norm2[j * h + head] - 2.0 * crate::nn::dot(tqi, tkj);
                *slot = w_l * (qk * inv_sqrt_c + bias[(i * n + j) * h + head] - dist_weight * dist2);
            }
            softmax_in_place(&mut row);
            attn[(head * n + i) * n..(head * n + i + 1) * n].copy_from_slice(&row);
        }
    }
    ensure_finite("attention_scores", &attn)?;
    Ok(attn)
}

/// Flip the overall sign so the first significant coefficient is positive.
/// Motors lifted from rotation matrices carry an arbitrary double-cover
/// sign; relative motors are canonicalized so that the lift choice cannot
/// leak into features.
fn canonicalize_sign(mv: &mut Multivector) {
    for i in 0..16 {
        let c = mv[i];
        if c.abs() > 1e-12 {
            if c < 0.0 {
                *mv = -*mv;
            }
            return;
        }
    }
}

/// Attention-weighted relative frames `sum_j a_ij T_i^-1 T_j`, `[n, n_heads]`,
/// each pair product sign-canonicalized.
pub fn aggregate_relative_frames(
    cfg: &CfaConfig,
    attn: &[f64],
    motors: &[Motor],
) -> Result<Vec<Multivector>, CfaError> {
    let n = motors.len();
    let h = cfg.n_heads;
    if attn.len() != h * n * n {
        return Err(CfaError::ShapeMismatch { what: "attention matrix" });
    }
    let inverses: Vec<Multivector> = motors.iter().map(|m| *m.inverse().as_multivector()).collect();
    let mut t_rel = vec![Multivector::ZERO; n * h];
    for i in 0..n {
        for j in 0..n {
            let mut rel = inverses[i].geometric_product(motors[j].as_multivector());
            canonicalize_sign(&mut rel);
            for head in 0..h {
                let a = attn[(head * n + i) * n + j];
                t_rel[i * h + head] += rel.scale(a);
            }
        }
    }
    ensure_finite_mvs("aggregate_relative_frames", &t_rel)?;
    Ok(t_rel)
}

/// Message passing over multivector values: values are moved to the global
/// frame, aggregated per head with attention weights, pulled back into the
/// receiving frame, then combined with the local values by the per-head
/// bilinear mixers and the many-body product. Each bilinear is applied once
/// per node; by bilinearity in its first argument this equals aggregating
/// per-pair messages with the same head's weights.
pub fn geometric_message_pass(
    cfg: &CfaConfig,
    bilinear: &[GeometricBilinear],
    many_body: &ManyBodyProduct,
    attn: &[f64],
    motors: &[Motor],
    vtilde: &[Multivector],
    values: &[Multivector],
) -> Result<Vec<Multivector>, CfaError> {
    let n = motors.len();
    let (h, p) = (cfg.n_heads, cfg.n_point_values);
    let hp = h * p;
    if vtilde.len() != n * hp
        || values.len() != n * hp
        || attn.len() != h * n * n
        || bilinear.len() != h
    {
        return Err(CfaError::ShapeMismatch { what: "message-pass inputs" });
    }

    // global-frame values, per source node; one sandwich matrix per motor
    // covers all channels
    let mut moved = vec![Multivector::ZERO; n * hp];
    for j in 0..n {
        let m = motors[j].sandwich_matrix();
        for ch in 0..hp {
            moved[j * hp + ch] = m.apply(&vtilde[j * hp + ch]);
        }
    }

    let mut aggregated = vec![Multivector::ZERO; n * hp];
    for i in 0..n {
        let agg = &mut aggregated[i * hp..(i + 1) * hp];
        for j in 0..n {
            let src = &moved[j * hp..(j + 1) * hp];
            for head in 0..h {
                let a = attn[(head * n + i) * n + j];
                for pt in 0..p {
                    let ch = head * p + pt;
                    agg[ch] += src[ch].scale(a);
                }
            }
        }
        let back = motors[i].inverse().sandwich_matrix();
        for mv in agg.iter_mut() {
            *mv = back.apply(mv);
        }
    }

    // per-head bilinear mix, batched over nodes
    let mut mixed = vec![Multivector::ZERO; n * hp];
    let mut agg_head = vec![Multivector::ZERO; n * p];
    let mut val_head = vec![Multivector::ZERO; n * p];
    for head in 0..h {
        for i in 0..n {
            agg_head[i * p..(i + 1) * p]
                .copy_from_slice(&aggregated[i * hp + head * p..i * hp + (head + 1) * p]);
            val_head[i * p..(i + 1) * p]
                .copy_from_slice(&values[i * hp + head * p..i * hp + (head + 1) * p]);
        }
        let out_head = bilinear[head].forward_batch(&agg_head, &val_head, n)?;
        for i in 0..n {
            mixed[i * hp + head * p..i * hp + (head + 1) * p]
                .copy_from_slice(&out_head[i * p..(i + 1) * p]);
        }
    }

    let out = many_body.forward_batch(&mixed, n)?;
    ensure_finite_mvs("geometric_message_pass", &out)?;
    Ok(out)
}

/// One full attention block.
pub fn cfa_forward(
    w: &CfaBlockWeights,
    cfg: &CfaConfig,
    inputs: &CfaInputs,
) -> Result<CfaOutputs, CfaError> {
    let n = inputs.motors.len();
    if n == 0 {
        return Err(CfaError::TooFewResidues { n: 0, min: 1 });
    }
    let (h, c, p) = (cfg.n_heads, cfg.scalar_head_dim, cfg.n_point_values);
    let hp = h * p;
    let n_geo = cfg.n_geo_channels();
    if inputs.s.len() != n * cfg.node_dim
        || inputs.z.len() != n * n * cfg.edge_dim
        || inputs.geo.len() != n * n_geo
        || inputs.frames.len() != n
    {
        return Err(CfaError::ShapeMismatch { what: "cfa inputs" });
    }

    let attn = attention_scores(cfg, w, inputs.s, inputs.z, inputs.frames)?;

    // multivector values from scalar features, concatenated with the
    // geometric node features and mixed across channels
    let raw_values = w.value_mv.forward_batch(inputs.s, n);
    let mut value_inputs = vec![Multivector::ZERO; n * (cfg.n_point_values + n_geo)];
    for i in 0..n {
        let row = &mut value_inputs
            [i * (cfg.n_point_values + n_geo)..(i + 1) * (cfg.n_point_values + n_geo)];
        for pv in 0..cfg.n_point_values {
            let base = (i * cfg.n_point_values + pv) * 16;
            let mut coeffs = [0.0; 16];
            coeffs.copy_from_slice(&raw_values[base..base + 16]);
            row[pv] = Multivector::new(coeffs);
        }
        row[cfg.n_point_values..].copy_from_slice(&inputs.geo[i * n_geo..(i + 1) * n_geo]);
    }
    let values = w.value_equi.forward_batch(&value_inputs, n)?;
    ensure_finite_mvs("value_projection", &values)?;

    // one pass over all pairs: scalar attention output, attention-weighted
    // pair features, and relative-frame aggregation share the loop so each
    // z row and motor product is touched once
    let v = w.v.forward_batch(inputs.s, n);
    let mut o_scalar = vec![0.0; n * h * c];
    let mut o_pair = vec![0.0; n * h * cfg.edge_dim];
    let mut t_rel = vec![Multivector::ZERO; n * h];
    let inverses: Vec<Multivector> = inputs
        .motors
        .iter()
        .map(|m| *m.inverse().as_multivector())
        .collect();
    let edge_dim = cfg.edge_dim;
    let mut head_weights = vec![0.0f64; h];
    for i in 0..n {
        for j in 0..n {
            for (head, hw) in head_weights.iter_mut().enumerate() {
                *hw = attn[(head * n + i) * n + j];
            }
            let mut rel = inverses[i].geometric_product(inputs.motors[j].as_multivector());
            canonicalize_sign(&mut rel);
            let zj = &inputs.z[(i * n + j) * edge_dim..(i * n + j + 1) * edge_dim];
            for (head, &a) in head_weights.iter().enumerate() {
                t_rel[i * h + head] += rel.scale(a);
                let vj = &v[(j * h + head) * c..(j * h + head + 1) * c];
                let so = &mut o_scalar[(i * h + head) * c..(i * h + head + 1) * c];
                for (slot, value) in so.iter_mut().zip(vj) {
                    *slot += a * value;
                }
                let po = &mut o_pair[(i * h + head) * edge_dim..(i * h + head + 1) * edge_dim];
                for (slot, value) in po.iter_mut().zip(zj) {
                    *slot += a * value;
                }
            }
        }
    }
    ensure_finite("scalar_attention", &o_scalar)?;
    ensure_finite_mvs("aggregate_relative_frames", &t_rel)?;

    // fold the relative-frame feature into the values, per head batched
    // over nodes
    let mut vtilde = vec![Multivector::ZERO; n * hp];
    let mut head_inputs = vec![Multivector::ZERO; n * (p + 1)];
    for head in 0..h {
        for i in 0..n {
            let row = &mut head_inputs[i * (p + 1)..(i + 1) * (p + 1)];
            row[..p].copy_from_slice(&values[i * hp + head * p..i * hp + (head + 1) * p]);
            row[p] = t_rel[i * h + head];
        }
        let mixed = w.vtilde[head].forward_batch(&head_inputs, n)?;
        for i in 0..n {
            vtilde[i * hp + head * p..i * hp + (head + 1) * p]
                .copy_from_slice(&mixed[i * p..(i + 1) * p]);
        }
    }
    ensure_finite_mvs("vtilde", &vtilde)?;

    let messages = geometric_message_pass(
        cfg,
        &w.bilinear,
        &w.many_body,
        &attn,
        inputs.motors,
        &vtilde,
        &values,
    )?;

    // final scalar linear over everything invariant
    let concat_dim = cfg.concat_dim();
    let mut s_update = vec![0.0; n * cfg.node_dim];
    let mut concat = vec![0.0; concat_dim];
    for i in 0..n {
        concat.clear();
        concat.extend_from_slice(&o_pair[i * h * cfg.edge_dim..(i + 1) * h * cfg.edge_dim]);
        concat.extend_from_slice(&o_scalar[i * h * c..(i + 1) * h * c]);
        for ch in 0..hp {
            concat.extend_from_slice(messages[i * hp + ch].coeffs());
        }
        for ch in 0..hp {
            concat.push(messages[i * hp + ch].norm());
        }
        for ch in 0..hp {
            concat.push(messages[i * hp + ch].infinity_norm());
        }
        for head in 0..h {
            concat.extend_from_slice(t_rel[i * h + head].coeffs());
        }
        debug_assert_eq!(concat.len(), concat_dim);
        w.out
            .forward_into(&concat, &mut s_update[i * cfg.node_dim..(i + 1) * cfg.node_dim]);
    }
    ensure_finite("scalar_output", &s_update)?;

    // geometric feature update
    let geo_update = w.geo_out.forward_batch(&messages, n)?;
    ensure_finite_mvs("geo_output", &geo_update)?;

    Ok(CfaOutputs {
        s_update,
        geo_update,
        t_rel,
    })
}

/// Frame update: an MLP on the invariant node state predicts a rotor and a
/// translator which post-compose onto the current frame, `T R S`.
pub fn backbone_update(
    bb_mlp: &crate::nn::Mlp,
    s_i: &[f64],
    geo_i: &[Multivector],
    t_rel_i: &[Multivector],
    motor: &Motor,
) -> Result<Motor, CfaError> {
    let mut input = Vec::with_capacity(s_i.len() + (geo_i.len() + t_rel_i.len()) * 16);
    input.extend_from_slice(s_i);
    for mv in geo_i {
        input.extend_from_slice(mv.coeffs());
    }
    for mv in t_rel_i {
        input.extend_from_slice(mv.coeffs());
    }
    let out = bb_mlp.forward(&input);
    ensure_finite("backbone_update", &out)?;
    if out.len() != 6 {
        return Err(CfaError::ShapeMismatch { what: "backbone-update output" });
    }
    let rotor = Motor::embed_rotor(out[0], out[1], out[2]);
    let translator = Motor::embed_translator(&Vector3::new(out[3], out[4], out[5]));
    Ok(motor.compose(&rotor).compose(&translator))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha20Rng;

    fn tiny_config() -> CfaConfig {
        CfaConfig {
            n_heads: 2,
            node_dim: 12,
            edge_dim: 6,
            n_query_points: 2,
            n_point_values: 2,
            n_blocks: 1,
            scalar_head_dim: 4,
            transformer_heads: 2,
            transformer_ffn_dim: 16,
            edge_hidden_dim: 4,
            backbone_hidden_dim: 8,
            use_positional_encoding: true,
        }
    }

    fn random_inputs(
        cfg: &CfaConfig,
        n: usize,
        rng: &mut impl Rng,
    ) -> (Vec<f64>, Vec<f64>, Vec<Multivector>, Vec<Motor>, Vec<Frame>) {
        let s: Vec<f64> = (0..n * cfg.node_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let z: Vec<f64> = (0..n * n * cfg.edge_dim)
            .map(|_| rng.gen_range(-1.0..1.0))
            .collect();
        let geo: Vec<Multivector> = (0..n * cfg.n_geo_channels())
            .map(|_| {
                let mut mv = Multivector::ZERO;
                for i in 0..16 {
                    mv[i] = rng.gen_range(-0.5..0.5);
                }
                mv
            })
            .collect();
        let frames: Vec<Frame> = (0..n)
            .map(|_| Frame {
                rotation: crate::motor::so3::exp(&Vector3::new(
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                )),
                translation: Vector3::new(
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                    rng.gen_range(-3.0..3.0),
                ),
            })
            .collect();
        let motors: Vec<Motor> = frames.iter().map(|f| Motor::from_frame(f).unwrap()).collect();
        (s, z, geo, motors, frames)
    }

    #[test]
    fn single_node_attention_is_one() {
        let cfg = tiny_config();
        let mut rng = ChaCha20Rng::seed_from_u64(31);
        let w = CfaBlockWeights::new(&cfg, &mut rng);
        let (s, z, _, _, frames) = random_inputs(&cfg, 1, &mut rng);
        let attn = attention_scores(&cfg, &w, &s, &z, &frames).unwrap();
        for head in 0..cfg.n_heads {
            assert!((attn[head] - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn attention_rows_sum_to_one() {
        let cfg = tiny_config();
        let mut rng = ChaCha20Rng::seed_from_u64(32);
        let w = CfaBlockWeights::new(&cfg, &mut rng);
        let n = 5;
        let (s, z, _, _, frames) = random_inputs(&cfg, n, &mut rng);
        let attn = attention_scores(&cfg, &w, &s, &z, &frames).unwrap();
        for head in 0..cfg.n_heads {
            for i in 0..n {
                let sum: f64 = attn[(head * n + i) * n..(head * n + i + 1) * n].iter().sum();
                assert!((sum - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn relative_frames_of_identical_motors_are_identity() {
        let cfg = tiny_config();
        let mut rng = ChaCha20Rng::seed_from_u64(33);
        let n = 4;
        let frame = Frame {
            rotation: crate::motor::so3::exp(&Vector3::new(0.3, 0.1, -0.5)),
            translation: Vector3::new(1.0, 2.0, 3.0),
        };
        let motors = vec![Motor::from_frame(&frame).unwrap(); n];
        // arbitrary row-stochastic attention
        let mut attn = vec![0.0; cfg.n_heads * n * n];
        for head in 0..cfg.n_heads {
            for i in 0..n {
                let mut row: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
                let sum: f64 = row.iter().sum();
                for v in &mut row {
                    *v /= sum;
                }
                attn[(head * n + i) * n..(head * n + i + 1) * n].copy_from_slice(&row);
            }
        }
        let t_rel = aggregate_relative_frames(&cfg, &attn, &motors).unwrap();
        for mv in t_rel {
            assert!(crate::pga::max_abs_diff(&mv, &Multivector::scalar(1.0)) < 1e-12);
        }
    }

    #[test]
    fn zero_values_give_zero_messages() {
        let cfg = tiny_config();
        let mut rng = ChaCha20Rng::seed_from_u64(34);
        let w = CfaBlockWeights::new(&cfg, &mut rng);
        let n = 1;
        let (_, _, _, motors, _) = random_inputs(&cfg, n, &mut rng);
        let hp = cfg.value_channels();
        let attn = vec![1.0; cfg.n_heads];
        let zeros = vec![Multivector::ZERO; n * hp];
        let out = geometric_message_pass(
            &cfg,
            &w.bilinear,
            &w.many_body,
            &attn,
            &motors,
            &zeros,
            &zeros,
        )
        .unwrap();
        for mv in out {
            assert!(mv.norm() < 1e-12 && mv.infinity_norm() < 1e-12);
        }
    }

    #[test]
    fn backbone_update_with_zero_mlp_returns_input_frame() {
        let cfg = tiny_config();
        let mut rng = ChaCha20Rng::seed_from_u64(35);
        // zero all weights and biases so the predicted update is the identity
        let mut mlp = crate::nn::Mlp::new(&[cfg.backbone_in_dim(), 4, 6], &mut rng);
        for layer in &mut mlp.layers {
            layer.w.data_mut().fill(0.0);
            if let Some(b) = &mut layer.b {
                b.data_mut().fill(0.0);
            }
        }
        let (_, _, geo, motors, _) = random_inputs(&cfg, 1, &mut rng);
        let s_i = vec![0.3; cfg.node_dim];
        let t_rel = vec![Multivector::scalar(1.0); cfg.n_heads];
        let updated = backbone_update(&mlp, &s_i, &geo[..cfg.n_geo_channels()], &t_rel, &motors[0])
            .unwrap();
        assert!(
            crate::pga::max_abs_diff(updated.as_multivector(), motors[0].as_multivector()) < 1e-12
        );
    }

    #[test]
    fn block_output_shapes() {
        let cfg = tiny_config();
        let mut rng = ChaCha20Rng::seed_from_u64(36);
        let w = CfaBlockWeights::new(&cfg, &mut rng);
        let n = 3;
        let (s, z, geo, motors, frames) = random_inputs(&cfg, n, &mut rng);
        let out = cfa_forward(
            &w,
            &cfg,
            &CfaInputs {
                s: &s,
                z: &z,
                geo: &geo,
                motors: &motors,
                frames: &frames,
            },
        )
        .unwrap();
        assert_eq!(out.s_update.len(), n * cfg.node_dim);
        assert_eq!(out.geo_update.len(), n * cfg.n_geo_channels());
        assert_eq!(out.t_rel.len(), n * cfg.n_heads);
    }
}
