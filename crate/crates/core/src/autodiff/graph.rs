//! Append-only computation graph with reverse-mode differentiation.

use crate::error::{Error, Result};

use super::conv::{conv3d_backward, conv3d_forward, ConvGeom};
use super::tensor::{dims5, numel, Tensor};
use super::Scalar;

/// Handle to a node inside a [`Graph`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Bcast {
    Full,
    Scalar,
    /// `b` has shape `[C]` and is broadcast over axis 1 of `a`.
    Channel,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum BinaryKind {
    Add,
    Sub,
    Mul,
}

#[derive(Debug)]
enum Op<T> {
    Leaf,
    Conv3d { x: NodeId, w: NodeId, b: Option<NodeId>, geom: ConvGeom },
    LeakyRelu { x: NodeId, slope: T },
    Sigmoid { x: NodeId },
    Binary { a: NodeId, b: NodeId, kind: BinaryKind, bcast: Bcast },
    Affine { x: NodeId, scale: T },
    Mean { x: NodeId },
    MeanSpatial { x: NodeId },
    L1 { x: NodeId, y: NodeId },
    InstanceNorm { x: NodeId, inv_std: Vec<T> },
    PixelShuffle { x: NodeId, r: usize },
    Concat { parts: Vec<(NodeId, usize)> },
    Reshape { x: NodeId },
    Log { x: NodeId, floor: T },
}

impl<T> Op<T> {
    fn inputs(&self) -> Vec<NodeId> {
        match self {
            Op::Leaf => vec![],
            Op::Conv3d { x, w, b, .. } => {
                let mut v = vec![*x, *w];
                v.extend(b);
                v
            }
            Op::Binary { a, b, .. } => vec![*a, *b],
            Op::L1 { x, y } => vec![*x, *y],
            Op::Concat { parts } => parts.iter().map(|p| p.0).collect(),
            Op::LeakyRelu { x, .. }
            | Op::Sigmoid { x }
            | Op::Affine { x, .. }
            | Op::Mean { x }
            | Op::MeanSpatial { x }
            | Op::InstanceNorm { x, .. }
            | Op::PixelShuffle { x, .. }
            | Op::Reshape { x }
            | Op::Log { x, .. } => vec![*x],
        }
    }
}

#[derive(Debug)]
struct Node<T> {
    shape: Vec<usize>,
    value: Vec<T>,
    op: Op<T>,
    requires_grad: bool,
    /// Accumulated gradient; kept only for leaves that require it.
    grad: Option<Vec<T>>,
}

/// Reverse-mode tape. Nodes are appended in evaluation order, so insertion
/// order is a topological order and the graph is acyclic by construction.
#[derive(Debug, Default)]
pub struct Graph<T> {
    nodes: Vec<Node<T>>,
}

impl<T: Scalar> Graph<T> {
    pub fn new() -> Self {
        Graph { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn node(&self, id: NodeId) -> &Node<T> {
        &self.nodes[id.0]
    }

    fn push(&mut self, shape: Vec<usize>, value: Vec<T>, op: Op<T>) -> NodeId {
        debug_assert_eq!(numel(&shape), value.len());
        let requires_grad = op.inputs().iter().any(|i| self.node(*i).requires_grad);
        self.nodes.push(Node { shape, value, op, requires_grad, grad: None });
        NodeId(self.nodes.len() - 1)
    }

    /// Adds a leaf holding a copy of `t`. Gradients flow to it only if
    /// `t.requires_grad()`.
    pub fn leaf(&mut self, t: &Tensor<T>) -> NodeId {
        self.nodes.push(Node {
            shape: t.shape().to_vec(),
            value: t.data().to_vec(),
            op: Op::Leaf,
            requires_grad: t.requires_grad(),
            grad: None,
        });
        NodeId(self.nodes.len() - 1)
    }

    /// Adds a constant leaf, moving the tensor's storage into the graph.
    pub fn constant(&mut self, t: Tensor<T>) -> NodeId {
        let shape = t.shape().to_vec();
        self.nodes.push(Node {
            shape,
            value: t.into_data(),
            op: Op::Leaf,
            requires_grad: false,
            grad: None,
        });
        NodeId(self.nodes.len() - 1)
    }

    pub fn shape(&self, id: NodeId) -> &[usize] {
        &self.node(id).shape
    }

    pub fn value(&self, id: NodeId) -> &[T] {
        &self.node(id).value
    }

    /// Scalar value of a one-element node.
    pub fn item(&self, id: NodeId) -> T {
        self.node(id).value[0]
    }

    pub fn grad(&self, id: NodeId) -> Option<&[T]> {
        self.node(id).grad.as_deref()
    }

    pub fn tensor(&self, id: NodeId) -> Tensor<T> {
        let n = self.node(id);
        Tensor::new(&n.shape, n.value.clone()).expect("node shapes are valid")
    }

    pub fn zero_grads(&mut self) {
        self.nodes.iter_mut().for_each(|n| n.grad = None);
    }

    // ---- operators --------------------------------------------------------

    pub fn conv3d(
        &mut self,
        x: NodeId,
        weight: NodeId,
        bias: Option<NodeId>,
        stride: usize,
        padding: usize,
    ) -> Result<NodeId> {
        let geom = ConvGeom::new(self.shape(x), self.shape(weight), stride, padding)?;
        if let Some(b) = bias {
            if self.shape(b) != [geom.cout] {
                return Err(Error::shape(format!(
                    "conv3d bias must have shape [{}], got {:?}",
                    geom.cout,
                    self.shape(b)
                )));
            }
        }
        let shape = geom.out_shape().to_vec();
        let mut out = vec![T::zero(); numel(&shape)];
        conv3d_forward(
            &geom,
            self.value(x),
            self.value(weight),
            bias.map(|b| self.value(b)),
            &mut out,
        );
        Ok(self.push(shape, out, Op::Conv3d { x, w: weight, b: bias, geom }))
    }

    pub fn leaky_relu(&mut self, x: NodeId, slope: f64) -> NodeId {
        let slope = T::from_f64(slope);
        let out = self
            .value(x)
            .iter()
            .map(|&v| if v > T::zero() { v } else { v * slope })
            .collect();
        self.push(self.shape(x).to_vec(), out, Op::LeakyRelu { x, slope })
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let out = self.value(x).iter().map(|&v| sigmoid(v)).collect();
        self.push(self.shape(x).to_vec(), out, Op::Sigmoid { x })
    }

    fn bcast(&self, a: NodeId, b: NodeId) -> Result<Bcast> {
        let (sa, sb) = (self.shape(a), self.shape(b));
        if sa == sb {
            Ok(Bcast::Full)
        } else if numel(sb) == 1 {
            Ok(Bcast::Scalar)
        } else if sb.len() == 1 && sa.len() >= 2 && sa[1] == sb[0] {
            Ok(Bcast::Channel)
        } else {
            Err(Error::shape(format!("cannot broadcast {sb:?} onto {sa:?}")))
        }
    }

    fn binary(&mut self, a: NodeId, b: NodeId, kind: BinaryKind) -> Result<NodeId> {
        let bcast = self.bcast(a, b)?;
        let shape = self.shape(a).to_vec();
        let inner = inner_len(&shape);
        let channels = shape.get(1).copied().unwrap_or(1);
        let (va, vb) = (self.value(a), self.value(b));
        let out = va
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let y = vb[bcast_index(bcast, i, inner, channels)];
                match kind {
                    BinaryKind::Add => x + y,
                    BinaryKind::Sub => x - y,
                    BinaryKind::Mul => x * y,
                }
            })
            .collect();
        Ok(self.push(shape, out, Op::Binary { a, b, kind, bcast }))
    }

    /// Elementwise `a + b`; `b` may be a scalar or a per-channel vector.
    pub fn add(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(a, b, BinaryKind::Add)
    }

    pub fn sub(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(a, b, BinaryKind::Sub)
    }

    pub fn mul(&mut self, a: NodeId, b: NodeId) -> Result<NodeId> {
        self.binary(a, b, BinaryKind::Mul)
    }

    /// `scale · x + shift` with constant coefficients.
    pub fn affine(&mut self, x: NodeId, scale: f64, shift: f64) -> NodeId {
        let (s, c) = (T::from_f64(scale), T::from_f64(shift));
        let out = self.value(x).iter().map(|&v| v * s + c).collect();
        self.push(self.shape(x).to_vec(), out, Op::Affine { x, scale: s })
    }

    pub fn scale(&mut self, x: NodeId, s: f64) -> NodeId {
        self.affine(x, s, 0.0)
    }

    /// Mean over every element; the result is a rank-0 scalar.
    pub fn mean(&mut self, x: NodeId) -> NodeId {
        let v = self.value(x);
        let m = sum(v) / T::from_f64(v.len() as f64);
        self.push(Vec::new(), vec![m], Op::Mean { x })
    }

    /// Per-(n, c) mean over the spatial axes of a 5-D tensor.
    pub fn mean_spatial(&mut self, x: NodeId) -> Result<NodeId> {
        let [n, c, ..] = dims5(self.shape(x))?;
        let plane = inner_len(self.shape(x));
        let scale = T::from_f64(plane as f64);
        let out = self.value(x).chunks_exact(plane).map(|ch| sum(ch) / scale).collect();
        Ok(self.push(vec![n, c, 1, 1, 1], out, Op::MeanSpatial { x }))
    }

    /// Mean absolute difference over all elements.
    pub fn l1(&mut self, x: NodeId, y: NodeId) -> Result<NodeId> {
        if self.shape(x) != self.shape(y) {
            return Err(Error::shape(format!(
                "l1 operands differ: {:?} vs {:?}",
                self.shape(x),
                self.shape(y)
            )));
        }
        let (vx, vy) = (self.value(x), self.value(y));
        let total = vx.iter().zip(vy).fold(T::zero(), |acc, (&a, &b)| acc + (a - b).abs());
        let m = total / T::from_f64(vx.len() as f64);
        Ok(self.push(Vec::new(), vec![m], Op::L1 { x, y }))
    }

    /// Per-(n, c) normalization to zero mean and unit variance, without
    /// learned affine parameters.
    pub fn instance_norm(&mut self, x: NodeId, eps: f64) -> Result<NodeId> {
        let [n, c, d, h, w] = dims5(self.shape(x))?;
        let plane = d * h * w;
        if plane < 2 {
            return Err(Error::shape("instance_norm needs at least 2 spatial elements"));
        }
        let eps = T::from_f64(eps);
        let count = T::from_f64(plane as f64);
        let mut out = vec![T::zero(); n * c * plane];
        let mut inv_std = Vec::with_capacity(n * c);
        for (src, dst) in self.value(x).chunks_exact(plane).zip(out.chunks_exact_mut(plane)) {
            let mean = sum(src) / count;
            let var = src.iter().fold(T::zero(), |acc, &v| acc + (v - mean) * (v - mean)) / count;
            let is = T::one() / (var + eps).sqrt();
            for (o, &v) in dst.iter_mut().zip(src) {
                *o = (v - mean) * is;
            }
            inv_std.push(is);
        }
        Ok(self.push(self.shape(x).to_vec(), out, Op::InstanceNorm { x, inv_std }))
    }

    /// Sub-pixel rearrangement `[N, C·r³, D, H, W] → [N, C, D·r, H·r, W·r]`
    /// with `out[n, c, d·r+i, h·r+j, w·r+k] = in[n, c·r³ + i·r² + j·r + k, d, h, w]`.
    pub fn pixel_shuffle3d(&mut self, x: NodeId, r: usize) -> Result<NodeId> {
        let [n, cr, d, h, w] = dims5(self.shape(x))?;
        let r3 = r * r * r;
        if r == 0 || cr % r3 != 0 {
            return Err(Error::shape(format!("{cr} channels not divisible by {r}³")));
        }
        let c = cr / r3;
        let shape = vec![n, c, d * r, h * r, w * r];
        let mut out = vec![T::zero(); numel(&shape)];
        let src = self.value(x);
        for_each_shuffle(n, c, d, h, w, r, |s, o| out[o] = src[s]);
        Ok(self.push(shape, out, Op::PixelShuffle { x, r }))
    }

    /// Concatenation along the channel axis of 5-D tensors.
    pub fn concat_channels(&mut self, xs: &[NodeId]) -> Result<NodeId> {
        let first = *xs.first().ok_or_else(|| Error::shape("concat of zero tensors"))?;
        let [n, _, d, h, w] = dims5(self.shape(first))?;
        let mut parts = Vec::with_capacity(xs.len());
        for &id in xs {
            let [pn, pc, pd, ph, pw] = dims5(self.shape(id))?;
            if (pn, pd, ph, pw) != (n, d, h, w) {
                return Err(Error::shape(format!(
                    "concat operands differ: {:?} vs {:?}",
                    self.shape(first),
                    self.shape(id)
                )));
            }
            parts.push((id, pc));
        }
        let total: usize = parts.iter().map(|p| p.1).sum();
        let plane = d * h * w;
        let mut out = Vec::with_capacity(n * total * plane);
        for ni in 0..n {
            for &(id, pc) in &parts {
                out.extend_from_slice(&self.value(id)[ni * pc * plane..(ni + 1) * pc * plane]);
            }
        }
        Ok(self.push(vec![n, total, d, h, w], out, Op::Concat { parts }))
    }

    pub fn reshape(&mut self, x: NodeId, shape: &[usize]) -> Result<NodeId> {
        if numel(shape) != numel(self.shape(x)) {
            return Err(Error::shape(format!(
                "cannot reshape {:?} to {shape:?}",
                self.shape(x)
            )));
        }
        let value = self.value(x).to_vec();
        Ok(self.push(shape.to_vec(), value, Op::Reshape { x }))
    }

    /// `ln(max(x, floor))`; the gradient is zero where the clamp is active.
    pub fn log_clamped(&mut self, x: NodeId, floor: f64) -> NodeId {
        let floor = T::from_f64(floor);
        let out = self.value(x).iter().map(|&v| v.max(floor).ln()).collect();
        self.push(self.shape(x).to_vec(), out, Op::Log { x, floor })
    }

    // ---- backward ---------------------------------------------------------

    /// Accumulates `d loss / d leaf` into every reachable leaf that requires
    /// a gradient.
    pub fn backward(&mut self, loss: NodeId) -> Result<()> {
        self.backward_impl(loss, None)
    }

    /// Like [`backward`](Self::backward) but only propagates along paths that
    /// end in one of `targets`; other leaves are left untouched.
    pub fn backward_wrt(&mut self, loss: NodeId, targets: &[NodeId]) -> Result<()> {
        let mut relevant = vec![false; self.nodes.len()];
        for t in targets {
            relevant[t.0] = self.node(*t).requires_grad;
        }
        for i in 0..self.nodes.len() {
            if !relevant[i] && self.nodes[i].op.inputs().iter().any(|j| relevant[j.0]) {
                relevant[i] = true;
            }
        }
        self.backward_impl(loss, Some(relevant))
    }

    fn backward_impl(&mut self, loss: NodeId, relevant: Option<Vec<bool>>) -> Result<()> {
        if numel(self.shape(loss)) != 1 {
            return Err(Error::shape(format!(
                "backward needs a scalar loss, got shape {:?}",
                self.shape(loss)
            )));
        }
        let needs = |g: &Self, id: NodeId| -> bool {
            g.node(id).requires_grad && relevant.as_ref().is_none_or(|r| r[id.0])
        };
        if !needs(self, loss) {
            return Ok(());
        }
        let mut grads: Vec<Option<Vec<T>>> = (0..=loss.0).map(|_| None).collect();
        grads[loss.0] = Some(vec![T::one()]);
        for i in (0..=loss.0).rev() {
            let Some(gout) = grads[i].take() else { continue };
            let node = &self.nodes[i];
            if matches!(node.op, Op::Leaf) {
                let slot = &mut self.nodes[i].grad;
                match slot {
                    Some(acc) => acc.iter_mut().zip(&gout).for_each(|(a, &b)| *a = *a + b),
                    None => *slot = Some(gout),
                }
                continue;
            }
            let inputs = node.op.inputs();
            let want: Vec<bool> = inputs.iter().map(|&j| needs(self, j)).collect();
            if !want.iter().any(|&w| w) {
                continue;
            }
            let mut local: Vec<Option<Vec<T>>> = inputs
                .iter()
                .zip(&want)
                .map(|(&j, &w)| w.then(|| vec![T::zero(); self.node(j).value.len()]))
                .collect();
            self.op_backward(i, &gout, &mut local);
            for (j, g) in inputs.into_iter().zip(local) {
                let Some(g) = g else { continue };
                match &mut grads[j.0] {
                    Some(acc) => acc.iter_mut().zip(&g).for_each(|(a, &b)| *a = *a + b),
                    slot => *slot = Some(g),
                }
            }
        }
        Ok(())
    }

    /// Writes input gradients of node `i` into `local` (one slot per input,
    /// in [`Op::inputs`] order; `None` slots are skipped).
    fn op_backward(&self, i: usize, gout: &[T], local: &mut [Option<Vec<T>>]) {
        let node = &self.nodes[i];
        match &node.op {
            Op::Leaf => {}
            Op::Conv3d { x, w, b, geom } => {
                let (gx, rest) = local.split_at_mut(1);
                let (gw, gb) = rest.split_at_mut(1);
                conv3d_backward(
                    geom,
                    self.value(*x),
                    self.value(*w),
                    gout,
                    gx[0].as_deref_mut(),
                    gw[0].as_deref_mut(),
                    if b.is_some() { gb[0].as_deref_mut() } else { None },
                );
            }
            Op::LeakyRelu { x, slope } => {
                if let Some(g) = &mut local[0] {
                    for ((gi, &go), &v) in g.iter_mut().zip(gout).zip(self.value(*x)) {
                        *gi = if v > T::zero() { go } else { go * *slope };
                    }
                }
            }
            Op::Sigmoid { .. } => {
                if let Some(g) = &mut local[0] {
                    for ((gi, &go), &y) in g.iter_mut().zip(gout).zip(&node.value) {
                        *gi = go * y * (T::one() - y);
                    }
                }
            }
            Op::Binary { a, b, kind, bcast } => {
                let inner = inner_len(&node.shape);
                let channels = node.shape.get(1).copied().unwrap_or(1);
                let (va, vb) = (self.value(*a), self.value(*b));
                let (ga, gb) = local.split_at_mut(1);
                if let Some(ga) = &mut ga[0] {
                    for (idx, (gi, &go)) in ga.iter_mut().zip(gout).enumerate() {
                        *gi = match kind {
                            BinaryKind::Add | BinaryKind::Sub => go,
                            BinaryKind::Mul => go * vb[bcast_index(*bcast, idx, inner, channels)],
                        };
                    }
                }
                if let Some(gb) = &mut gb[0] {
                    for (idx, &go) in gout.iter().enumerate() {
                        let bi = bcast_index(*bcast, idx, inner, channels);
                        let d = match kind {
                            BinaryKind::Add => go,
                            BinaryKind::Sub => -go,
                            BinaryKind::Mul => go * va[idx],
                        };
                        gb[bi] = gb[bi] + d;
                    }
                }
            }
            Op::Affine { scale, .. } => {
                if let Some(g) = &mut local[0] {
                    g.iter_mut().zip(gout).for_each(|(gi, &go)| *gi = go * *scale);
                }
            }
            Op::Mean { x } => {
                if let Some(g) = &mut local[0] {
                    let v = gout[0] / T::from_f64(self.value(*x).len() as f64);
                    g.fill(v);
                }
            }
            Op::MeanSpatial { x } => {
                if let Some(g) = &mut local[0] {
                    let plane = inner_len(self.shape(*x));
                    let scale = T::from_f64(plane as f64);
                    for (chunk, &go) in g.chunks_exact_mut(plane).zip(gout) {
                        chunk.fill(go / scale);
                    }
                }
            }
            Op::L1 { x, y } => {
                let (vx, vy) = (self.value(*x), self.value(*y));
                let s = gout[0] / T::from_f64(vx.len() as f64);
                let sign = |a: T, b: T| {
                    if a > b {
                        s
                    } else if a < b {
                        -s
                    } else {
                        T::zero()
                    }
                };
                let (gx, gy) = local.split_at_mut(1);
                if let Some(gx) = &mut gx[0] {
                    for (k, gi) in gx.iter_mut().enumerate() {
                        *gi = sign(vx[k], vy[k]);
                    }
                }
                if let Some(gy) = &mut gy[0] {
                    for (k, gi) in gy.iter_mut().enumerate() {
                        *gi = -sign(vx[k], vy[k]);
                    }
                }
            }
            Op::InstanceNorm { inv_std, .. } => {
                if let Some(g) = &mut local[0] {
                    let plane = inner_len(&node.shape);
                    let count = T::from_f64(plane as f64);
                    for (inst, &is) in inv_std.iter().enumerate() {
                        let range = inst * plane..(inst + 1) * plane;
                        let (y, go) = (&node.value[range.clone()], &gout[range.clone()]);
                        let mean_g = sum(go) / count;
                        let mean_gy = go.iter().zip(y).fold(T::zero(), |a, (&g, &y)| a + g * y) / count;
                        for ((gi, &gv), &yv) in g[range].iter_mut().zip(go).zip(y) {
                            *gi = is * (gv - mean_g - yv * mean_gy);
                        }
                    }
                }
            }
            Op::PixelShuffle { x, r } => {
                if let Some(g) = &mut local[0] {
                    let [n, cr, d, h, w] = dims5(self.shape(*x)).expect("validated");
                    let c = cr / (r * r * r);
                    for_each_shuffle(n, c, d, h, w, *r, |s, o| g[s] = gout[o]);
                }
            }
            Op::Concat { parts } => {
                let [n, total, d, h, w] = dims5(&node.shape).expect("validated");
                let plane = d * h * w;
                let mut offset = 0;
                for (slot, &(_, pc)) in local.iter_mut().zip(parts) {
                    if let Some(g) = slot {
                        for ni in 0..n {
                            let src = (ni * total + offset) * plane;
                            g[ni * pc * plane..(ni + 1) * pc * plane]
                                .copy_from_slice(&gout[src..src + pc * plane]);
                        }
                    }
                    offset += pc;
                }
            }
            Op::Reshape { .. } => {
                if let Some(g) = &mut local[0] {
                    g.copy_from_slice(gout);
                }
            }
            Op::Log { x, floor } => {
                if let Some(g) = &mut local[0] {
                    for ((gi, &go), &v) in g.iter_mut().zip(gout).zip(self.value(*x)) {
                        *gi = if v > *floor { go / v } else { T::zero() };
                    }
                }
            }
        }
    }
}

pub(crate) fn sigmoid<T: Scalar>(v: T) -> T {
    if v >= T::zero() {
        T::one() / (T::one() + (-v).exp())
    } else {
        let e = v.exp();
        e / (T::one() + e)
    }
}

fn sum<T: Scalar>(v: &[T]) -> T {
    v.iter().fold(T::zero(), |a, &b| a + b)
}

/// Product of axes after the channel axis (1 for rank < 3).
fn inner_len(shape: &[usize]) -> usize {
    shape.iter().skip(2).product()
}

fn bcast_index(b: Bcast, i: usize, inner: usize, channels: usize) -> usize {
    match b {
        Bcast::Full => i,
        Bcast::Scalar => 0,
        Bcast::Channel => (i / inner) % channels,
    }
}

/// Calls `f(src_index, dst_index)` for every element of a 3-D pixel shuffle
/// with `c` output channels.
fn for_each_shuffle(
    n: usize,
    c: usize,
    d: usize,
    h: usize,
    w: usize,
    r: usize,
    mut f: impl FnMut(usize, usize),
) {
    let (od, oh, ow) = (d * r, h * r, w * r);
    let r3 = r * r * r;
    for ni in 0..n {
        for ci in 0..c {
            for i in 0..r {
                for j in 0..r {
                    for k in 0..r {
                        let ch = ci * r3 + i * r * r + j * r + k;
                        for z in 0..d {
                            for y in 0..h {
                                let src_row = (((ni * c * r3 + ch) * d + z) * h + y) * w;
                                let dst_row = (((ni * c + ci) * od + z * r + i) * oh + y * r + j) * ow;
                                for x in 0..w {
                                    f(src_row + x, dst_row + x * r + k);
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
