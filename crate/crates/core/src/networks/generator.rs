use crate::autodiff::{Graph, NodeId, Scalar, Tensor};
use crate::error::{Error, Result};
use crate::volume_io::upsample_trilinear_raw;

use super::params::{kaiming_init, Bound, ParameterSet, Player};
use super::spec::{NetworkKind, NetworkSpec, LEAKY_SLOPE, RESIDUAL_SCALE};

const DENSE_CONVS: usize = 5;
const DENSE_BLOCKS: usize = 3;

/// RRDB super-resolution generator:
/// head conv → RRDBs → trunk conv + global residual → conv to `8·base`
/// channels → 3-D pixel shuffle (×2) → LeakyReLU → tail conv.
#[derive(Clone, Debug)]
pub struct Generator {
    spec: NetworkSpec,
}

fn conv_shape(cout: usize, cin: usize, k: usize) -> Vec<usize> {
    vec![cout, cin, k, k, k]
}

pub(crate) fn conv<T: Scalar>(
    g: &mut Graph<T>,
    p: &Bound,
    name: &str,
    x: NodeId,
    stride: usize,
    padding: usize,
    bias: bool,
) -> Result<NodeId> {
    let w = p.get(&format!("{name}.weight"))?;
    let b = if bias { Some(p.get(&format!("{name}.bias"))?) } else { None };
    g.conv3d(x, w, b, stride, padding)
}

impl Generator {
    pub fn new(spec: NetworkSpec) -> Result<Self> {
        if spec.kind != NetworkKind::Generator {
            return Err(Error::Config("not a generator spec".into()));
        }
        spec.validate()?;
        Ok(Generator { spec })
    }

    pub fn spec(&self) -> &NetworkSpec {
        &self.spec
    }

    pub fn param_shapes(&self) -> Vec<(String, Vec<usize>)> {
        let (c, gc) = (self.spec.base_channels, self.spec.growth_channels);
        let r3 = self.spec.scale.pow(3);
        let mut out = Vec::new();
        let mut push = |name: String, cout: usize, cin: usize| {
            out.push((format!("{name}.weight"), conv_shape(cout, cin, 3)));
            out.push((format!("{name}.bias"), vec![cout]));
        };
        push("head".into(), c, 1);
        for r in 0..self.spec.num_rrdb {
            for b in 0..DENSE_BLOCKS {
                for k in 0..DENSE_CONVS {
                    let cout = if k + 1 == DENSE_CONVS { c } else { gc };
                    push(format!("rrdb{r}.db{b}.conv{k}"), cout, c + k * gc);
                }
            }
        }
        push("trunk".into(), c, c);
        push("upconv".into(), c * r3, c);
        push("tail".into(), 1, c);
        out
    }

    pub fn init_params<T: Scalar>(&self, seed: u64) -> Result<ParameterSet<T>> {
        let mut p = ParameterSet::zeros(Player::Generator, &self.param_shapes())?;
        kaiming_init(&mut p, seed, LEAKY_SLOPE);
        if self.spec.input_skip {
            // Start as plain trilinear interpolation; the residual grows from zero.
            p.get_mut("tail.weight").expect("tail exists").data_mut().fill(T::zero());
        }
        Ok(p)
    }

    fn dense_block<T: Scalar>(&self, g: &mut Graph<T>, p: &Bound, name: &str, x: NodeId) -> Result<NodeId> {
        let mut feats = vec![x];
        for k in 0..DENSE_CONVS {
            let input = if feats.len() == 1 { x } else { g.concat_channels(&feats)? };
            let y = conv(g, p, &format!("{name}.conv{k}"), input, 1, 1, true)?;
            if k + 1 == DENSE_CONVS {
                let scaled = g.scale(y, RESIDUAL_SCALE);
                return g.add(x, scaled);
            }
            feats.push(g.leaky_relu(y, LEAKY_SLOPE));
        }
        unreachable!("dense block has {DENSE_CONVS} convolutions")
    }

    fn rrdb<T: Scalar>(&self, g: &mut Graph<T>, p: &Bound, r: usize, x: NodeId) -> Result<NodeId> {
        let mut t = x;
        for b in 0..DENSE_BLOCKS {
            t = self.dense_block(g, p, &format!("rrdb{r}.db{b}"), t)?;
        }
        let scaled = g.scale(t, RESIDUAL_SCALE);
        g.add(x, scaled)
    }

    /// `[N, 1, d, h, w] → [N, 1, 2d, 2h, 2w]`. The interpolation skip is
    /// computed from the input values and enters the graph as a constant.
    pub fn forward<T: Scalar>(&self, g: &mut Graph<T>, p: &Bound, x: NodeId) -> Result<NodeId> {
        let [n, c, d, h, w]: [usize; 5] = g
            .shape(x)
            .try_into()
            .map_err(|_| Error::shape(format!("generator input must be 5-D, got {:?}", g.shape(x))))?;
        if c != 1 {
            return Err(Error::shape(format!("generator expects 1 channel, got {c}")));
        }
        if d < 4 || h < 4 || w < 4 {
            return Err(Error::shape(format!("generator input {:?} smaller than 4³", g.shape(x))));
        }
        let head = conv(g, p, "head", x, 1, 1, true)?;
        let mut t = head;
        for r in 0..self.spec.num_rrdb {
            t = self.rrdb(g, p, r, t)?;
        }
        let trunk = conv(g, p, "trunk", t, 1, 1, true)?;
        let fea = g.add(head, trunk)?;
        let up = conv(g, p, "upconv", fea, 1, 1, true)?;
        let up = g.pixel_shuffle3d(up, self.spec.scale)?;
        let up = g.leaky_relu(up, LEAKY_SLOPE);
        let out = conv(g, p, "tail", up, 1, 1, true)?;
        if !self.spec.input_skip {
            return Ok(out);
        }
        let plane = d * h * w;
        let src: Vec<f32> = g.value(x).iter().map(|v| v.as_f64() as f32).collect();
        let mut skip = Vec::with_capacity(n * plane * 8);
        for sample in src.chunks_exact(plane) {
            let up = upsample_trilinear_raw(sample, [w, h, d]);
            skip.extend(up.into_iter().map(|v| T::from_f64(v as f64)));
        }
        let skip = g.constant(Tensor::new(&[n, 1, 2 * d, 2 * h, 2 * w], skip)?);
        g.add(out, skip)
    }
}
