//! Directed-edge message passing network: forward pass, hand-written
//! reverse pass, and batching.
//!
//! With `x` atom features, `e` bond features and SiLU activation σ:
//!
//! ```text
//! a0[v→w] = [x_v, e_vw] · W_in + b_in          h0 = σ(a0)
//! m_t[v→w] = Σ_{u→v, u≠w} h_{t-1}[u→v]
//! h_t = σ(a0 + m_t · W_msg)                     t = 1..depth
//! atom_v = σ([x_v, Σ_{u→v} h_depth[u→v]] · W_atom + b_atom)
//! g = Σ_v atom_v
//! out = dropout(σ(g · W_hid + b_hid)) · W_out + b_out
//! ```
//!
//! Dropout acts only on the input of the linear output layer, so averaging
//! stochastic passes converges to the inference pass.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::features::GraphFeatures;

pub const W_IN: usize = 0;
pub const B_IN: usize = 1;
pub const W_MSG: usize = 2;
pub const W_ATOM: usize = 3;
pub const B_ATOM: usize = 4;
pub const W_HID: usize = 5;
pub const B_HID: usize = 6;
pub const W_OUT: usize = 7;
pub const B_OUT: usize = 8;

/// Row-major matrix of named weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Tensor {
    pub fn zeros(name: &str, rows: usize, cols: usize) -> Tensor {
        Tensor { name: name.to_string(), rows, cols, data: vec![0.0; rows * cols] }
    }
}

/// Shapes of every tensor for the given dimensions, in index order.
pub fn layout(node_dim: usize, edge_dim: usize, hidden: usize) -> Vec<(&'static str, usize, usize)> {
    vec![
        ("w_in", node_dim + edge_dim, hidden),
        ("b_in", 1, hidden),
        ("w_msg", hidden, hidden),
        ("w_atom", node_dim + hidden, hidden),
        ("b_atom", 1, hidden),
        ("w_hid", hidden, hidden),
        ("b_hid", 1, hidden),
        ("w_out", hidden, 1),
        ("b_out", 1, 1),
    ]
}

/// Glorot-uniform weights, zero biases.
pub fn init_params<R: Rng + ?Sized>(node_dim: usize, edge_dim: usize, hidden: usize, rng: &mut R) -> Vec<Tensor> {
    layout(node_dim, edge_dim, hidden)
        .into_iter()
        .map(|(name, rows, cols)| {
            let mut t = Tensor::zeros(name, rows, cols);
            if name.starts_with('w') {
                let limit = (6.0 / (rows + cols) as f64).sqrt();
                for x in &mut t.data {
                    *x = rng.random_range(-limit..limit);
                }
            }
            t
        })
        .collect()
}

/// `c = op(a) · op(b) + beta · c` for row-major operands, where
/// `op` optionally transposes. `op(a)` is `m × k`, `op(b)` is `k × n`.
#[allow(clippy::too_many_arguments)]
fn gemm(m: usize, k: usize, n: usize, a: &[f64], ta: bool, b: &[f64], tb: bool, beta: f64, c: &mut [f64]) {
    if m == 0 || n == 0 {
        return;
    }
    debug_assert_eq!(a.len(), m * k);
    debug_assert_eq!(b.len(), k * n);
    debug_assert_eq!(c.len(), m * n);
    let (rsa, csa) = if ta { (1, m as isize) } else { (k as isize, 1) };
    let (rsb, csb) = if tb { (1, k as isize) } else { (n as isize, 1) };
    // SAFETY: the slices hold exactly the m×k, k×n and m×n elements the
    // strides describe (checked above in debug builds, and by construction
    // at every call site).
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            n as isize,
            1,
        );
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn silu(x: f64) -> f64 {
    x * sigmoid(x)
}

fn silu_grad(x: f64) -> f64 {
    let s = sigmoid(x);
    s * (1.0 + x * (1.0 - s))
}

fn add_bias(z: &mut [f64], bias: &[f64]) {
    for row in z.chunks_mut(bias.len()) {
        for (x, b) in row.iter_mut().zip(bias) {
            *x += b;
        }
    }
}

fn column_sums(z: &[f64], cols: usize, out: &mut [f64]) {
    for row in z.chunks(cols) {
        for (o, x) in out.iter_mut().zip(row) {
            *o += x;
        }
    }
}

/// Several featurized molecules concatenated into one disjoint graph.
#[derive(Debug, Clone)]
pub struct Batch {
    pub n_graphs: usize,
    pub node_dim: usize,
    pub edge_dim: usize,
    /// `n_nodes × node_dim`.
    pub x: Vec<f64>,
    /// `n_edges × (node_dim + edge_dim)`: source atom features, then bond features.
    pub edge_in: Vec<f64>,
    pub src: Vec<usize>,
    pub dst: Vec<usize>,
    pub graph_of_node: Vec<usize>,
}

impl Batch {
    pub fn new(graphs: &[&GraphFeatures], node_dim: usize, edge_dim: usize) -> Batch {
        let mut b = Batch {
            n_graphs: graphs.len(),
            node_dim,
            edge_dim,
            x: Vec::new(),
            edge_in: Vec::new(),
            src: Vec::new(),
            dst: Vec::new(),
            graph_of_node: Vec::new(),
        };
        for (gi, g) in graphs.iter().enumerate() {
            let offset = b.graph_of_node.len();
            b.x.extend_from_slice(&g.nodes);
            b.graph_of_node.extend(std::iter::repeat_n(gi, g.n_nodes));
            for e in 0..g.n_edges() {
                let s = g.src[e];
                b.edge_in.extend_from_slice(&g.nodes[s * node_dim..(s + 1) * node_dim]);
                b.edge_in.extend_from_slice(&g.edges[e * edge_dim..(e + 1) * edge_dim]);
                b.src.push(offset + s);
                b.dst.push(offset + g.dst[e]);
            }
        }
        b
    }

    pub fn n_nodes(&self) -> usize {
        self.graph_of_node.len()
    }

    pub fn n_edges(&self) -> usize {
        self.src.len()
    }
}

/// Dropout masks, or none at inference.
pub enum Dropout<'r, R: Rng + ?Sized> {
    Off,
    On { rate: f64, rng: &'r mut R },
}

fn mask<R: Rng + ?Sized>(len: usize, dropout: &mut Dropout<'_, R>) -> Option<Vec<f64>> {
    match dropout {
        Dropout::On { rate, rng } if *rate > 0.0 => {
            let keep = 1.0 / (1.0 - *rate);
            Some((0..len).map(|_| if rng.random::<f64>() < *rate { 0.0 } else { keep }).collect())
        }
        _ => None,
    }
}

fn apply_mask(z: &mut [f64], mask: &Option<Vec<f64>>) {
    if let Some(m) = mask {
        for (x, k) in z.iter_mut().zip(m) {
            *x *= k;
        }
    }
}

/// Intermediate values kept for the reverse pass.
pub struct Trace {
    hidden: usize,
    depth: usize,
    a0: Vec<f64>,
    /// Pre-activations for t = 1..=depth.
    a: Vec<Vec<f64>>,
    /// Messages for t = 1..=depth.
    m: Vec<Vec<f64>>,
    atom_in: Vec<f64>,
    atom_pre: Vec<f64>,
    pooled: Vec<f64>,
    hid_pre: Vec<f64>,
    hid_mask: Option<Vec<f64>>,
    /// Dropped-out hidden activations fed to the output layer.
    hid: Vec<f64>,
    pub out: Vec<f64>,
}

/// Message aggregation: `msg[e] = Σ_{e' into src(e)} h[e'] − h[reverse(e)]`.
fn messages(batch: &Batch, h: &[f64], hidden: usize, node_sums: &mut [f64], msg: &mut [f64]) {
    node_sums.fill(0.0);
    for (e, &d) in batch.dst.iter().enumerate() {
        let (row, sum) = (&h[e * hidden..(e + 1) * hidden], &mut node_sums[d * hidden..(d + 1) * hidden]);
        for (s, x) in sum.iter_mut().zip(row) {
            *s += x;
        }
    }
    for (e, &s) in batch.src.iter().enumerate() {
        let rev = &h[(e ^ 1) * hidden..((e ^ 1) + 1) * hidden];
        let sum = &node_sums[s * hidden..(s + 1) * hidden];
        for ((o, a), r) in msg[e * hidden..(e + 1) * hidden].iter_mut().zip(sum).zip(rev) {
            *o = a - r;
        }
    }
}

pub fn forward<R: Rng + ?Sized>(params: &[Tensor], depth: usize, batch: &Batch, mut dropout: Dropout<'_, R>) -> Trace {
    let hidden = params[B_IN].cols;
    let (ne, nn, nb) = (batch.n_edges(), batch.n_nodes(), batch.n_graphs);
    let din = batch.node_dim + batch.edge_dim;

    let mut a0 = vec![0.0; ne * hidden];
    gemm(ne, din, hidden, &batch.edge_in, false, &params[W_IN].data, false, 0.0, &mut a0);
    add_bias(&mut a0, &params[B_IN].data);
    let mut h: Vec<f64> = a0.iter().map(|&x| silu(x)).collect();
    let mut a = Vec::with_capacity(depth);
    let mut m = Vec::with_capacity(depth);
    let mut node_sums = vec![0.0; nn * hidden];
    for _ in 0..depth {
        let mut msg = vec![0.0; ne * hidden];
        messages(batch, &h, hidden, &mut node_sums, &mut msg);
        let mut pre = a0.clone();
        gemm(ne, hidden, hidden, &msg, false, &params[W_MSG].data, false, 1.0, &mut pre);
        h = pre.iter().map(|&x| silu(x)).collect();
        a.push(pre);
        m.push(msg);
    }

    let nd = batch.node_dim;
    let width = nd + hidden;
    let mut atom_in = vec![0.0; nn * width];
    for v in 0..nn {
        atom_in[v * width..v * width + nd].copy_from_slice(&batch.x[v * nd..(v + 1) * nd]);
    }
    let last = &h;
    for (e, &d) in batch.dst.iter().enumerate() {
        let row = &mut atom_in[d * width + nd..(d + 1) * width];
        for (s, x) in row.iter_mut().zip(&last[e * hidden..(e + 1) * hidden]) {
            *s += x;
        }
    }
    let mut atom_pre = vec![0.0; nn * hidden];
    gemm(nn, width, hidden, &atom_in, false, &params[W_ATOM].data, false, 0.0, &mut atom_pre);
    add_bias(&mut atom_pre, &params[B_ATOM].data);
    let atom: Vec<f64> = atom_pre.iter().map(|&x| silu(x)).collect();

    let mut pooled = vec![0.0; nb * hidden];
    for (v, &g) in batch.graph_of_node.iter().enumerate() {
        for (p, x) in pooled[g * hidden..(g + 1) * hidden].iter_mut().zip(&atom[v * hidden..(v + 1) * hidden]) {
            *p += x;
        }
    }
    let mut hid_pre = vec![0.0; nb * hidden];
    gemm(nb, hidden, hidden, &pooled, false, &params[W_HID].data, false, 0.0, &mut hid_pre);
    add_bias(&mut hid_pre, &params[B_HID].data);
    let mut hid: Vec<f64> = hid_pre.iter().map(|&x| silu(x)).collect();
    let hid_mask = mask(hid.len(), &mut dropout);
    apply_mask(&mut hid, &hid_mask);
    let mut out = vec![params[B_OUT].data[0]; nb];
    gemm(nb, hidden, 1, &hid, false, &params[W_OUT].data, false, 1.0, &mut out);

    Trace { hidden, depth, a0, a, m, atom_in, atom_pre, pooled, hid_pre, hid_mask, hid, out }
}

/// Gradients of `Σ_g d_out[g] · out[g]` for every tensor, same layout as
/// `params`.
pub fn backward(params: &[Tensor], batch: &Batch, trace: &Trace, d_out: &[f64]) -> Vec<Tensor> {
    let hidden = trace.hidden;
    let (ne, nn, nb) = (batch.n_edges(), batch.n_nodes(), batch.n_graphs);
    let nd = batch.node_dim;
    let width = nd + hidden;
    let mut grads: Vec<Tensor> = params.iter().map(|p| Tensor::zeros(&p.name, p.rows, p.cols)).collect();

    grads[B_OUT].data[0] = d_out.iter().sum();
    gemm(hidden, nb, 1, &trace.hid, true, d_out, false, 0.0, &mut grads[W_OUT].data);
    let mut d_hid = vec![0.0; nb * hidden];
    gemm(nb, 1, hidden, d_out, false, &params[W_OUT].data, true, 0.0, &mut d_hid);
    apply_mask(&mut d_hid, &trace.hid_mask);
    for (d, &x) in d_hid.iter_mut().zip(&trace.hid_pre) {
        *d *= silu_grad(x);
    }
    column_sums(&d_hid, hidden, &mut grads[B_HID].data);
    gemm(hidden, nb, hidden, &trace.pooled, true, &d_hid, false, 0.0, &mut grads[W_HID].data);
    let mut d_pooled = vec![0.0; nb * hidden];
    gemm(nb, hidden, hidden, &d_hid, false, &params[W_HID].data, true, 0.0, &mut d_pooled);

    let mut d_atom = vec![0.0; nn * hidden];
    for (v, &g) in batch.graph_of_node.iter().enumerate() {
        d_atom[v * hidden..(v + 1) * hidden].copy_from_slice(&d_pooled[g * hidden..(g + 1) * hidden]);
    }
    for (d, &x) in d_atom.iter_mut().zip(&trace.atom_pre) {
        *d *= silu_grad(x);
    }
    column_sums(&d_atom, hidden, &mut grads[B_ATOM].data);
    gemm(width, nn, hidden, &trace.atom_in, true, &d_atom, false, 0.0, &mut grads[W_ATOM].data);
    let mut d_atom_in = vec![0.0; nn * width];
    gemm(nn, hidden, width, &d_atom, false, &params[W_ATOM].data, true, 0.0, &mut d_atom_in);

    // Gradient flowing into the final edge states from the atom readout.
    let mut d_h = vec![0.0; ne * hidden];
    for (e, &d) in batch.dst.iter().enumerate() {
        d_h[e * hidden..(e + 1) * hidden].copy_from_slice(&d_atom_in[d * width + nd..(d + 1) * width]);
    }
    let mut d_a0 = vec![0.0; ne * hidden];
    let mut d_msg = vec![0.0; ne * hidden];
    let mut d_sums = vec![0.0; nn * hidden];
    for t in (1..=trace.depth).rev() {
        let pre = &trace.a[t - 1];
        for (d, &x) in d_h.iter_mut().zip(pre) {
            *d *= silu_grad(x);
        }
        for (acc, d) in d_a0.iter_mut().zip(&d_h) {
            *acc += d;
        }
        gemm(hidden, ne, hidden, &trace.m[t - 1], true, &d_h, false, 1.0, &mut grads[W_MSG].data);
        gemm(ne, hidden, hidden, &d_h, false, &params[W_MSG].data, true, 0.0, &mut d_msg);
        // Reverse of `messages`: scatter to node sums, subtract from reverse edges.
        d_sums.fill(0.0);
        for (e, &s) in batch.src.iter().enumerate() {
            for (acc, d) in d_sums[s * hidden..(s + 1) * hidden].iter_mut().zip(&d_msg[e * hidden..(e + 1) * hidden]) {
                *acc += d;
            }
        }
        for (e, &d) in batch.dst.iter().enumerate() {
            let rev = e ^ 1;
            for c in 0..hidden {
                d_h[e * hidden + c] = d_sums[d * hidden + c] - d_msg[rev * hidden + c];
            }
        }
    }
    for ((acc, d), &x) in d_a0.iter_mut().zip(&d_h).zip(&trace.a0) {
        *acc += d * silu_grad(x);
    }
    column_sums(&d_a0, hidden, &mut grads[B_IN].data);
    let din = nd + batch.edge_dim;
    gemm(din, ne, hidden, &batch.edge_in, true, &d_a0, false, 0.0, &mut grads[W_IN].data);
    grads
}
