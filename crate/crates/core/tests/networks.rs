mod common;

use common::{random_tensor, rng};
use tempfile::TempDir;
use trisr_core::autodiff::grad_check_with_kinks;
use trisr_core::networks::checkpoint::{self, TensorMap};
use trisr_core::networks::{
    build_critic, build_feature_extractor, build_generator, export_params, import_params, Bound, NetworkSpec,
    ParameterSet, Player,
};
use trisr_core::volume_io::upsample_trilinear;
use trisr_core::{Graph, NodeId, Tensor, Volume};

#[test]
fn output_shapes() {
    let input = |shape: &[usize]| Tensor::<f32>::new(shape, (0..shape.iter().product::<usize>()).map(|i| (i % 17) as f32 / 17.0).collect()).unwrap();

    let (gen, theta) = build_generator::<f32>(NetworkSpec::default_generator(), 1).unwrap();
    let mut g = Graph::new();
    let p = theta.bind(&mut g);
    let x = g.constant(input(&[2, 1, 6, 8, 4]));
    let y = gen.forward(&mut g, &p, x).unwrap();
    assert_eq!(g.shape(y), &[2, 1, 12, 16, 8]);

    let (critic, psi) = build_critic::<f32>(NetworkSpec::default_critic(), 2).unwrap();
    let p = psi.bind(&mut g);
    let x = g.constant(input(&[3, 1, 16, 16, 8]));
    let c = critic.forward(&mut g, &p, x).unwrap();
    assert_eq!(g.shape(c), &[3]);

    let (fe, phi) = build_feature_extractor::<f32>(NetworkSpec::default_feature_extractor(), 3).unwrap();
    let p = phi.bind(&mut g);
    let x = g.constant(input(&[1, 1, 16, 24, 16]));
    let f = fe.forward(&mut g, &p, x).unwrap();
    assert_eq!(g.shape(f), &[1, fe.output_channels(), 2, 3, 2]);
}

#[test]
fn undersized_inputs_are_shape_errors() {
    let (critic, psi) = build_critic::<f32>(NetworkSpec::default_critic(), 2).unwrap();
    let (fe, phi) = build_feature_extractor::<f32>(NetworkSpec::default_feature_extractor(), 3).unwrap();
    let mut g = Graph::new();
    let (pc, pf) = (psi.bind(&mut g), phi.bind(&mut g));
    let x = g.constant(Tensor::zeros(&[1, 1, 4, 4, 4]).unwrap());
    assert!(matches!(critic.forward(&mut g, &pc, x), Err(trisr_core::Error::Shape(_))));
    assert!(matches!(fe.forward(&mut g, &pf, x), Err(trisr_core::Error::Shape(_))));
}

#[test]
fn fresh_generator_is_trilinear_interpolation() {
    let (gen, theta) = build_generator::<f32>(NetworkSpec::generator(4, 4, 1), 9).unwrap();
    let v = Volume::from_fn([6, 5, 4], [1.0; 3], |w, h, d| ((w * 7 + h * 3 + d * 5) % 11) as f32 / 11.0).unwrap();
    let mut g = Graph::new();
    let p = theta.bind(&mut g);
    let x = g.constant(Tensor::new(&[1, 1, 4, 5, 6], v.data().to_vec()).unwrap());
    let y = gen.forward(&mut g, &p, x).unwrap();
    let up = upsample_trilinear(&v).unwrap();
    for (a, b) in g.value(y).iter().zip(up.data()) {
        assert!((a - b).abs() < 1e-6);
    }
}

#[test]
fn init_is_seeded() {
    let spec = NetworkSpec::generator(4, 4, 1);
    let a = build_generator::<f32>(spec.clone(), 1).unwrap().1;
    let b = build_generator::<f32>(spec.clone(), 1).unwrap().1;
    let c = build_generator::<f32>(spec, 2).unwrap().1;
    assert_eq!(a, b);
    assert_ne!(a, c);
}

fn check_network<F>(params: &ParameterSet<f64>, input: Tensor<f64>, input_grad: bool, forward: F)
where
    F: Fn(&mut Graph<f64>, &Bound, NodeId) -> trisr_core::Result<NodeId>,
{
    let names: Vec<String> = params.iter().map(|(n, _)| n.to_string()).collect();
    let mut r = rng(41);
    let mut inputs: Vec<Tensor<f64>> = params
        .iter()
        .map(|(_, t)| {
            // Zero-initialized tensors would hide dead paths.
            let shape = t.shape().to_vec();
            random_tensor(&mut r, &shape, 0.5).with_grad()
        })
        .collect();
    inputs.push(if input_grad { input.with_grad() } else { input });
    let np = names.len();
    let probe = random_tensor(&mut r, &[4096], 1.0);
    let rep = grad_check_with_kinks(
        |g, ids| {
            let bound: Bound = names.iter().cloned().zip(ids[..np].iter().copied()).collect();
            let y = forward(g, &bound, ids[np])?;
            let n: usize = g.shape(y).iter().product();
            let w = g.constant(Tensor::new(g.shape(y), probe.data()[..n].to_vec())?);
            let prod = g.mul(y, w)?;
            Ok(g.mean(prod))
        },
        &inputs,
        1e-6,
        1e-4,
        1e-3,
    )
    .unwrap();
    assert!(rep.passed, "{rep:?}");
    assert!(rep.skipped_kinks * 20 <= rep.checked, "{rep:?}");
}

#[test]
fn gradcheck_generator() {
    let (gen, theta) = build_generator::<f64>(NetworkSpec::generator(2, 2, 1), 1).unwrap();
    let x = random_tensor(&mut rng(42), &[1, 1, 4, 4, 4], 1.0);
    // The interpolation skip enters as a constant, so only θ is checked.
    check_network(&theta, x, false, |g, p, x| gen.forward(g, p, x));
}

#[test]
fn gradcheck_critic() {
    let (critic, psi) = build_critic::<f64>(NetworkSpec::critic(vec![(2, 2), (3, 1)]), 1).unwrap();
    let x = random_tensor(&mut rng(43), &[2, 1, 4, 4, 4], 1.0);
    check_network(&psi, x, true, |g, p, x| critic.forward(g, p, x));
}

#[test]
fn checkpoint_round_trip() {
    let dir = TempDir::new().unwrap();
    let (critic, psi) = build_critic::<f32>(NetworkSpec::critic(vec![(4, 2), (8, 2)]), 5).unwrap();
    let mut map = TensorMap::new();
    export_params(&psi, "psi", &mut map);
    let path = dir.path().join("c.tsrc");
    checkpoint::save(&path, &map).unwrap();
    let back = checkpoint::load(&path).unwrap();
    assert_eq!(back, map);
    let restored = import_params(&back, "psi", Player::Critic, &critic.param_shapes()).unwrap();
    assert_eq!(restored, psi);

    let wrong = NetworkSpec::critic(vec![(4, 2), (16, 2)]);
    let other = trisr_core::networks::Critic::new(wrong).unwrap();
    assert!(matches!(
        import_params(&back, "psi", Player::Critic, &other.param_shapes()),
        Err(trisr_core::Error::Checkpoint(_))
    ));
}

#[test]
fn truncated_checkpoint_is_rejected() {
    let (_, theta) = build_generator::<f32>(NetworkSpec::generator(2, 2, 1), 1).unwrap();
    let mut map = TensorMap::new();
    export_params(&theta, "theta", &mut map);
    let bytes = checkpoint::encode(&map).unwrap();
    assert!(checkpoint::decode(&bytes[..bytes.len() - 3]).is_err());
}
