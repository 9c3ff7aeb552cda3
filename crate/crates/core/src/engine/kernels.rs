//! Forward and adjoint kernels for every differentiable primitive.
//!
//! Shapes: feature maps are `[channels, length]`, conv weights are
//! `[c_out, c_in, k]`, per-channel neuron parameters are `[channels]`.
//! Inner products and per-channel reductions accumulate in `f64`.
//! Each output element is written by exactly one thread, so results do not
//! depend on the rayon schedule.

use rayon::prelude::*;

use super::tensor::{Scalar, Tensor};
use crate::snn::surrogate::{arctan_sigma, arctan_surrogate_grad, SurrogateConfig};

/// Work sizes below this run serially; conv on tiny test shapes would
/// otherwise pay more in scheduling than in arithmetic.
const PAR_THRESHOLD: usize = 1 << 15;

/// Output length of a 1-D convolution.
pub fn conv1d_out_len(len: usize, kernel: usize, stride: usize, pad: usize) -> usize {
    (len + 2 * pad - kernel) / stride + 1
}

/// Cross-correlation with zero padding: `y[co, lo] = b[co] +
/// sum_{ci,kk} w[co,ci,kk] * x[ci, lo*stride - pad + kk]`.
pub fn conv1d_forward<T: Scalar>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    b: &Tensor<T>,
    stride: usize,
    pad: usize,
) -> Tensor<T> {
    let (c_in, len) = (x.dim(0), x.dim(1));
    let (c_out, k) = (w.dim(0), w.dim(2));
    assert_eq!(w.dim(1), c_in, "conv1d: weight c_in mismatch");
    assert_eq!(b.shape(), &[c_out], "conv1d: bias shape mismatch");
    assert!(k % 2 == 1, "conv1d: kernel must be odd");
    assert!(len + 2 * pad >= k, "conv1d: input shorter than kernel");
    let l_out = conv1d_out_len(len, k, stride, pad);

    let xd = x.data();
    let wd = w.data();
    let bd = b.data();
    let mut out = Tensor::zeros(&[c_out, l_out]);

    let row = |co: usize, yrow: &mut [T]| {
        for (lo, slot) in yrow.iter_mut().enumerate() {
            let start = (lo * stride) as isize - pad as isize;
            let mut acc = bd[co].to_f64();
            for ci in 0..c_in {
                let xrow = &xd[ci * len..(ci + 1) * len];
                let wrow = &wd[(co * c_in + ci) * k..(co * c_in + ci + 1) * k];
                let k_lo = (-start).max(0) as usize;
                let k_hi = k.min((len as isize - start).max(0) as usize);
                for kk in k_lo..k_hi {
                    acc += xrow[(start + kk as isize) as usize].to_f64() * wrow[kk].to_f64();
                }
            }
            *slot = T::from_f64(acc);
        }
    };

    if c_out * l_out * c_in * k >= PAR_THRESHOLD {
        out.data_mut()
            .par_chunks_mut(l_out)
            .enumerate()
            .for_each(|(co, yrow)| row(co, yrow));
    } else {
        for (co, yrow) in out.data_mut().chunks_mut(l_out).enumerate() {
            row(co, yrow);
        }
    }
    out
}

/// Adjoints of [`conv1d_forward`]: `(dx, dw, db)`.
pub fn conv1d_backward<T: Scalar>(
    x: &Tensor<T>,
    w: &Tensor<T>,
    upstream: &Tensor<T>,
    stride: usize,
    pad: usize,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let (c_in, len) = (x.dim(0), x.dim(1));
    let (c_out, k) = (w.dim(0), w.dim(2));
    let l_out = conv1d_out_len(len, k, stride, pad);
    assert_eq!(upstream.shape(), &[c_out, l_out], "conv1d backward shape");

    let xd = x.data();
    let wd = w.data();
    let ud = upstream.data();

    // db[co] = sum_lo upstream[co, lo]
    let mut db = Tensor::zeros(&[c_out]);
    for co in 0..c_out {
        let mut acc = 0.0f64;
        for lo in 0..l_out {
            acc += ud[co * l_out + lo].to_f64();
        }
        db.data_mut()[co] = T::from_f64(acc);
    }

    // dw[co,ci,kk] = sum_lo upstream[co,lo] * x[ci, lo*stride - pad + kk]
    let mut dw = Tensor::zeros(&[c_out, c_in, k]);
    let dw_row = |co: usize, out_row: &mut [T]| {
        let urow = &ud[co * l_out..(co + 1) * l_out];
        for ci in 0..c_in {
            let xrow = &xd[ci * len..(ci + 1) * len];
            for kk in 0..k {
                let mut acc = 0.0f64;
                for (lo, &u) in urow.iter().enumerate() {
                    let pos = (lo * stride + kk) as isize - pad as isize;
                    if pos >= 0 && (pos as usize) < len {
                        acc += u.to_f64() * xrow[pos as usize].to_f64();
                    }
                }
                out_row[ci * k + kk] = T::from_f64(acc);
            }
        }
    };
    if c_out * c_in * k * l_out >= PAR_THRESHOLD {
        dw.data_mut()
            .par_chunks_mut(c_in * k)
            .enumerate()
            .for_each(|(co, row)| dw_row(co, row));
    } else {
        for (co, row) in dw.data_mut().chunks_mut(c_in * k).enumerate() {
            dw_row(co, row);
        }
    }

    // dx[ci, li] = sum_{co,kk} upstream[co, (li + pad - kk)/stride] * w[co,ci,kk]
    let mut dx = Tensor::zeros(&[c_in, len]);
    let dx_row = |ci: usize, out_row: &mut [T]| {
        let mut acc = vec![0.0f64; len];
        for co in 0..c_out {
            let urow = &ud[co * l_out..(co + 1) * l_out];
            let wrow = &wd[(co * c_in + ci) * k..(co * c_in + ci + 1) * k];
            for (lo, &u) in urow.iter().enumerate() {
                let start = (lo * stride) as isize - pad as isize;
                let uf = u.to_f64();
                let k_lo = (-start).max(0) as usize;
                let k_hi = k.min((len as isize - start).max(0) as usize);
                for kk in k_lo..k_hi {
                    acc[(start + kk as isize) as usize] += uf * wrow[kk].to_f64();
                }
            }
        }
        for (slot, &a) in out_row.iter_mut().zip(&acc) {
            *slot = T::from_f64(a);
        }
    };
    if c_in * len * c_out * k >= PAR_THRESHOLD {
        dx.data_mut()
            .par_chunks_mut(len)
            .enumerate()
            .for_each(|(ci, row)| dx_row(ci, row));
    } else {
        for (ci, row) in dx.data_mut().chunks_mut(len).enumerate() {
            dx_row(ci, row);
        }
    }

    (dx, dw, db)
}

/// Duplicate every position: `[a, b, c] -> [a, a, b, b, c, c]` per channel.
pub fn nearest_upsample2<T: Scalar>(x: &Tensor<T>) -> Tensor<T> {
    let (c, len) = (x.dim(0), x.dim(1));
    let mut out = Tensor::zeros(&[c, 2 * len]);
    let xd = x.data();
    let od = out.data_mut();
    for ch in 0..c {
        for l in 0..len {
            let v = xd[ch * len + l];
            od[ch * 2 * len + 2 * l] = v;
            od[ch * 2 * len + 2 * l + 1] = v;
        }
    }
    out
}

/// Adjoint of duplication: sums each duplicated pair.
pub fn nearest_upsample2_backward<T: Scalar>(upstream: &Tensor<T>) -> Tensor<T> {
    let (c, len2) = (upstream.dim(0), upstream.dim(1));
    assert!(len2 % 2 == 0, "upsample2 backward expects even length");
    let len = len2 / 2;
    let mut out = Tensor::zeros(&[c, len]);
    let ud = upstream.data();
    let od = out.data_mut();
    for ch in 0..c {
        for l in 0..len {
            let g0 = ud[ch * len2 + 2 * l].to_f64();
            let g1 = ud[ch * len2 + 2 * l + 1].to_f64();
            od[ch * len + l] = T::from_f64(g0 + g1);
        }
    }
    out
}

/// Keep the first `out_len` positions of every channel.
pub fn trailing_crop<T: Scalar>(x: &Tensor<T>, out_len: usize) -> Tensor<T> {
    let (c, len) = (x.dim(0), x.dim(1));
    assert!(out_len <= len, "crop length {out_len} exceeds input {len}");
    let mut out = Tensor::zeros(&[c, out_len]);
    let xd = x.data();
    let od = out.data_mut();
    for ch in 0..c {
        od[ch * out_len..(ch + 1) * out_len]
            .copy_from_slice(&xd[ch * len..ch * len + out_len]);
    }
    out
}

/// Adjoint of cropping: zero-pad the dropped trailing positions.
pub fn trailing_crop_backward<T: Scalar>(upstream: &Tensor<T>, orig_len: usize) -> Tensor<T> {
    let (c, out_len) = (upstream.dim(0), upstream.dim(1));
    let mut out = Tensor::zeros(&[c, orig_len]);
    let ud = upstream.data();
    let od = out.data_mut();
    for ch in 0..c {
        od[ch * orig_len..ch * orig_len + out_len]
            .copy_from_slice(&ud[ch * out_len..(ch + 1) * out_len]);
    }
    out
}

/// Stack `a` over `b` along the channel axis; lengths must match.
pub fn channel_concat<T: Scalar>(a: &Tensor<T>, b: &Tensor<T>) -> Tensor<T> {
    let (ca, la) = (a.dim(0), a.dim(1));
    let (cb, lb) = (b.dim(0), b.dim(1));
    assert_eq!(la, lb, "concat length mismatch: {la} vs {lb}");
    let mut data = Vec::with_capacity((ca + cb) * la);
    data.extend_from_slice(a.data());
    data.extend_from_slice(b.data());
    Tensor::from_vec(&[ca + cb, la], data)
}

/// Adjoint of concat: split the upstream at the channel boundary.
pub fn channel_concat_backward<T: Scalar>(
    upstream: &Tensor<T>,
    c_a: usize,
) -> (Tensor<T>, Tensor<T>) {
    let (c, len) = (upstream.dim(0), upstream.dim(1));
    assert!(c_a <= c);
    let ud = upstream.data();
    let da = Tensor::from_vec(&[c_a, len], ud[..c_a * len].to_vec());
    let db = Tensor::from_vec(&[c - c_a, len], ud[c_a * len..].to_vec());
    (da, db)
}

/// Spike nonlinearity applied to a membrane tensor against per-channel
/// thresholds. `smooth = false` is the Heaviside with `theta(0) = 1`;
/// `smooth = true` substitutes the ArcTan sigmoid (relaxation mode).
pub fn spike_forward<T: Scalar>(
    u: &Tensor<T>,
    u_th: &Tensor<T>,
    smooth: bool,
    cfg: &SurrogateConfig,
) -> Tensor<T> {
    let (c, len) = (u.dim(0), u.dim(1));
    assert_eq!(u_th.shape(), &[c], "spike threshold shape");
    let ud = u.data();
    let td = u_th.data();
    let mut out = Tensor::zeros(&[c, len]);
    let od = out.data_mut();
    for ch in 0..c {
        let th = td[ch];
        for l in 0..len {
            let x = ud[ch * len + l] - th;
            od[ch * len + l] = if smooth {
                arctan_sigma(x, cfg)
            } else if x >= T::zero() {
                T::one()
            } else {
                T::zero()
            };
        }
    }
    out
}

/// Surrogate adjoints of the spike op: `(du, du_th)`. Reads the saved
/// membrane values only, never the emitted spikes.
pub fn spike_backward<T: Scalar>(
    u: &Tensor<T>,
    u_th: &Tensor<T>,
    upstream: &Tensor<T>,
    cfg: &SurrogateConfig,
) -> (Tensor<T>, Tensor<T>) {
    let (c, len) = (u.dim(0), u.dim(1));
    let ud = u.data();
    let td = u_th.data();
    let gd = upstream.data();
    let mut du = Tensor::zeros(&[c, len]);
    let mut dth = Tensor::zeros(&[c]);
    for ch in 0..c {
        let th = td[ch];
        let mut th_acc = 0.0f64;
        for l in 0..len {
            let g = arctan_surrogate_grad(ud[ch * len + l] - th, cfg);
            let contrib = gd[ch * len + l] * g;
            du.data_mut()[ch * len + l] = contrib;
            th_acc -= contrib.to_f64();
        }
        dth.data_mut()[ch] = T::from_f64(th_acc);
    }
    (du, dth)
}

/// `out[c, l] = decay[c] * state[c, l] + x[c, l]` — the synaptic-current
/// update and the non-spiking readout integrator.
pub fn decay_add<T: Scalar>(decay: &Tensor<T>, state: &Tensor<T>, x: &Tensor<T>) -> Tensor<T> {
    let (c, len) = (state.dim(0), state.dim(1));
    assert_eq!(decay.shape(), &[c], "decay shape");
    assert_eq!(x.shape(), state.shape(), "decay_add input shape");
    let dd = decay.data();
    let sd = state.data();
    let xd = x.data();
    let mut out = Tensor::zeros(&[c, len]);
    let od = out.data_mut();
    for ch in 0..c {
        let d = dd[ch];
        for l in 0..len {
            od[ch * len + l] = d * sd[ch * len + l] + xd[ch * len + l];
        }
    }
    out
}

/// Adjoints of [`decay_add`]: `(d_decay, d_state, d_x)`.
pub fn decay_add_backward<T: Scalar>(
    decay: &Tensor<T>,
    state: &Tensor<T>,
    upstream: &Tensor<T>,
) -> (Tensor<T>, Tensor<T>, Tensor<T>) {
    let (c, len) = (state.dim(0), state.dim(1));
    let dd = decay.data();
    let sd = state.data();
    let ud = upstream.data();
    let mut d_decay = Tensor::zeros(&[c]);
    let mut d_state = Tensor::zeros(&[c, len]);
    for ch in 0..c {
        let d = dd[ch];
        let mut acc = 0.0f64;
        for l in 0..len {
            let g = ud[ch * len + l];
            acc += g.to_f64() * sd[ch * len + l].to_f64();
            d_state.data_mut()[ch * len + l] = g * d;
        }
        d_decay.data_mut()[ch] = T::from_f64(acc);
    }
    (d_decay, d_state, upstream.clone())
}

/// Soft-reset membrane update:
/// `u_new[c, l] = beta[c] * u[c, l] + i[c, l] - u_th[c] * s[c, l]`.
/// The reset product is skipped where `s = 0`, so an infinite threshold
/// (used to disable spiking) never produces `inf * 0`.
pub fn membrane_update<T: Scalar>(
    beta: &Tensor<T>,
    u: &Tensor<T>,
    i: &Tensor<T>,
    u_th: &Tensor<T>,
    s: &Tensor<T>,
) -> Tensor<T> {
    let (c, len) = (u.dim(0), u.dim(1));
    assert_eq!(beta.shape(), &[c], "beta shape");
    assert_eq!(u_th.shape(), &[c], "u_th shape");
    assert_eq!(i.shape(), u.shape(), "current shape");
    assert_eq!(s.shape(), u.shape(), "spike shape");
    let bd = beta.data();
    let ud = u.data();
    let id = i.data();
    let td = u_th.data();
    let sd = s.data();
    let mut out = Tensor::zeros(&[c, len]);
    let od = out.data_mut();
    for ch in 0..c {
        let b = bd[ch];
        let th = td[ch];
        for l in 0..len {
            let idx = ch * len + l;
            let spike = sd[idx];
            let reset = if spike == T::zero() { T::zero() } else { th * spike };
            od[idx] = b * ud[idx] + id[idx] - reset;
        }
    }
    out
}

/// Adjoints of [`membrane_update`]: `(d_beta, d_u, d_i, d_u_th, d_s)`.
/// The reset-term adjoints (`d_u_th`, `d_s`) are `None` when
/// `detach_reset` is set.
#[allow(clippy::type_complexity)]
pub fn membrane_update_backward<T: Scalar>(
    beta: &Tensor<T>,
    u: &Tensor<T>,
    u_th: &Tensor<T>,
    s: &Tensor<T>,
    upstream: &Tensor<T>,
    detach_reset: bool,
) -> (Tensor<T>, Tensor<T>, Tensor<T>, Option<Tensor<T>>, Option<Tensor<T>>) {
    let (c, len) = (u.dim(0), u.dim(1));
    let bd = beta.data();
    let udv = u.data();
    let td = u_th.data();
    let sd = s.data();
    let gd = upstream.data();

    let mut d_beta = Tensor::zeros(&[c]);
    let mut d_u = Tensor::zeros(&[c, len]);
    let mut d_th = if detach_reset { None } else { Some(Tensor::zeros(&[c])) };
    let mut d_s = if detach_reset { None } else { Some(Tensor::zeros(&[c, len])) };

    for ch in 0..c {
        let b = bd[ch];
        let th = td[ch];
        let mut beta_acc = 0.0f64;
        let mut th_acc = 0.0f64;
        for l in 0..len {
            let idx = ch * len + l;
            let g = gd[idx];
            beta_acc += g.to_f64() * udv[idx].to_f64();
            d_u.data_mut()[idx] = g * b;
            if !detach_reset {
                th_acc -= g.to_f64() * sd[idx].to_f64();
                d_s.as_mut().unwrap().data_mut()[idx] = -(g * th);
            }
        }
        d_beta.data_mut()[ch] = T::from_f64(beta_acc);
        if let Some(dth) = d_th.as_mut() {
            dth.data_mut()[ch] = T::from_f64(th_acc);
        }
    }
    (d_beta, d_u, upstream.clone(), d_th, d_s)
}

/// `out = x * scale + shift` with constant scalars (LPS denormalization).
pub fn affine_scalar<T: Scalar>(x: &Tensor<T>, scale: f64, shift: f64) -> Tensor<T> {
    let s = T::from_f64(scale);
    let b = T::from_f64(shift);
    x.map(|v| v * s + b)
}

/// Stack row tensors `[1, k]` (or `[k]`) into an `[m, k]` matrix.
pub fn stack_rows<T: Scalar>(rows: &[&Tensor<T>]) -> Tensor<T> {
    assert!(!rows.is_empty(), "stack_rows needs at least one row");
    let k = rows[0].numel();
    let mut data = Vec::with_capacity(rows.len() * k);
    for r in rows {
        assert_eq!(r.numel(), k, "stack_rows: ragged rows");
        data.extend_from_slice(r.data());
    }
    Tensor::from_vec(&[rows.len(), k], data)
}
