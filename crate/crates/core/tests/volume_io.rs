use proptest::prelude::*;
use tempfile::TempDir;
use trisr_core::volume_io::{
    self, axis_origins, downsample_half, extract_patches, nifti, rvol, stitch_patches, PatchGrid, Volume, VolumeFormat,
};

fn volume_strategy(max_edge: usize) -> impl Strategy<Value = Volume> {
    (1..=max_edge, 1..=max_edge, 1..=max_edge).prop_flat_map(|(w, h, d)| {
        prop::collection::vec(-10.0f32..10.0, w * h * d)
            .prop_map(move |data| Volume::new([w, h, d], [1.0, 1.5, 2.0], data).unwrap())
    })
}

fn even_volume_strategy() -> impl Strategy<Value = (Volume, Volume)> {
    (1..=4usize, 1..=4usize, 1..=4usize).prop_flat_map(|(w, h, d)| {
        let dims = [2 * w, 2 * h, 2 * d];
        let n = 8 * w * h * d;
        (prop::collection::vec(-5.0f32..5.0, n), prop::collection::vec(-5.0f32..5.0, n)).prop_map(move |(a, b)| {
            (Volume::new(dims, [1.0; 3], a).unwrap(), Volume::new(dims, [1.0; 3], b).unwrap())
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn stitch_inverts_extract(v in volume_strategy(9), window in 1usize..6, stride_frac in 1usize..6) {
        let stride = stride_frac.min(window);
        let (grid, patches) = extract_patches(&v, window, stride).unwrap();
        let back = stitch_patches(&grid, &patches, 1).unwrap();
        prop_assert_eq!(back.dims(), v.dims());
        for (a, b) in back.data().iter().zip(v.data()) {
            prop_assert!((a - b).abs() <= 1e-6 * b.abs().max(1.0));
        }
    }

    #[test]
    fn every_voxel_is_covered(w in 1usize..20, h in 1usize..20, d in 1usize..20, window in 1usize..8, stride in 1usize..8) {
        let stride = stride.min(window);
        let grid = PatchGrid::new([w, h, d], window, stride).unwrap();
        let mut hits = vec![0u32; w * h * d];
        for o in &grid.origins {
            prop_assert!(o.iter().all(|c| c % stride == 0));
            for z in o[2]..(o[2] + window).min(d) {
                for y in o[1]..(o[1] + window).min(h) {
                    for x in o[0]..(o[0] + window).min(w) {
                        hits[(z * h + y) * w + x] += 1;
                    }
                }
            }
        }
        prop_assert!(hits.iter().all(|&c| c >= 1));
        let mut sorted = grid.origins.clone();
        sorted.sort();
        prop_assert_eq!(sorted, grid.origins.clone());
        for len in [w, h, d] {
            let last = *axis_origins(len, window, stride).last().unwrap();
            prop_assert!(last + window >= len);
            prop_assert!(last == 0 || last - stride + window < len);
        }
    }

    #[test]
    fn downsample_is_linear((a, b) in even_volume_strategy(), s in -3.0f32..3.0, t in -3.0f32..3.0) {
        let mix = Volume::new(a.dims(), [1.0; 3], a.data().iter().zip(b.data()).map(|(x, y)| s * x + t * y).collect()).unwrap();
        let lhs = downsample_half(&mix).unwrap();
        let (da, db) = (downsample_half(&a).unwrap(), downsample_half(&b).unwrap());
        for ((l, x), y) in lhs.data().iter().zip(da.data()).zip(db.data()) {
            prop_assert!((l - (s * x + t * y)).abs() < 1e-4, "{l} vs {}", s * x + t * y);
        }
        prop_assert_eq!(lhs.spacing(), [2.0; 3]);
    }

    #[test]
    fn rvol_round_trip_is_bitwise(v in volume_strategy(6)) {
        let bytes = rvol::encode(&v);
        prop_assert_eq!(&bytes, &rvol::encode(&v));
        let back = rvol::decode(&bytes).unwrap();
        prop_assert_eq!(&back, &v);
        prop_assert_eq!(rvol::encode(&back), bytes);
    }

    #[test]
    fn nifti_round_trip_preserves_values(v in volume_strategy(6)) {
        let bytes = nifti::encode(&v).unwrap();
        prop_assert_eq!(&bytes[344..348], b"n+1\0");
        prop_assert_eq!(nifti::decode(&bytes).unwrap(), v);
    }
}

#[test]
fn rvol_fixture_indexing() {
    let mut bytes = b"RVOL".to_vec();
    for v in [1u32, 4, 4, 4, 1] {
        bytes.extend_from_slice(&v.to_le_bytes());
    }
    for s in [1.0f32, 1.0, 1.0] {
        bytes.extend_from_slice(&s.to_le_bytes());
    }
    for i in 0..64 {
        bytes.extend_from_slice(&(i as f32).to_le_bytes());
    }
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("fixture.rvol");
    std::fs::write(&path, &bytes).unwrap();
    let v = volume_io::read_volume(&path, VolumeFormat::Rvol).unwrap();
    assert_eq!(v.dims(), [4, 4, 4]);
    assert_eq!(v.data()[(4 + 2) * 4 + 3], v.get(3, 2, 1));
    assert_eq!(v.get(3, 2, 1), 27.0);
    let out = dir.path().join("copy.rvol");
    volume_io::write_volume(&v, &out, VolumeFormat::Rvol).unwrap();
    assert_eq!(std::fs::read(out).unwrap(), bytes);
}

#[test]
fn bad_magic_is_a_format_error() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("x.rvol");
    std::fs::write(&path, b"XXXX and some more bytes for the header.....").unwrap();
    assert!(matches!(volume_io::load(&path), Err(trisr_core::Error::Format(_))));
}

#[test]
fn large_volume_patch_counts() {
    let grid = PatchGrid::new([208, 300, 320], 64, 16).unwrap();
    assert_eq!(grid.axis_counts(), [10, 16, 17]);
    assert_eq!(grid.len(), 2720);
    let fine = PatchGrid::new([70, 64, 64], 64, 16).unwrap();
    let patches: Vec<Volume> = (0..fine.len()).map(|_| Volume::zeros([128; 3], [0.5; 3]).unwrap()).collect();
    assert_eq!(stitch_patches(&fine, &patches, 2).unwrap().dims(), [140, 128, 128]);
}
