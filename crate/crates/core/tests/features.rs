use memclass::features::{
    color_feature, leaf_features, segment_image, tree_similarity, ColorClass, ColorParams, FeatureVector, LeafParams,
};
use memclass::learners::{train_tree, TreeParams};
use memclass::rng;
use memclass::synth::{
    corrupt, generate_synthetic_leaf, render_color_image, sample_patch_center, CorruptionKind, CorruptionSpec,
};
use memclass::Image;
use proptest::prelude::*;
use rand::Rng;

const ALPHAS: [([u8; 3], ColorClass); 3] = [
    ([255, 0, 0], ColorClass::Red),
    ([0, 255, 0], ColorClass::Green),
    ([0, 0, 255], ColorClass::Blue),
];

fn patch_image(seed: u64, alpha: [u8; 3]) -> (Image, (usize, usize)) {
    let mut r = rng::stream(seed, &[]);
    let (x, y) = sample_patch_center(500, 50, &mut r);
    let corner = ((x - 25.0).round() as usize, (y - 25.0).round() as usize);
    (render_color_image(alpha, x, y, 500, 50), corner)
}

fn noisy(img: &Image, severity: u8, seed: u64) -> Image {
    corrupt(img, &CorruptionSpec { kind: CorruptionKind::GaussianNoise, severity, seed }).unwrap()
}

#[test]
fn clean_patches_give_their_color() {
    for (i, (alpha, class)) in ALPHAS.iter().enumerate() {
        let (img, _) = patch_image(i as u64, *alpha);
        assert_eq!(color_feature(&img, &ColorParams::default()).unwrap(), Some(*class));
    }
}

#[test]
fn red_patch_color_survives_gaussian_noise() {
    let params = ColorParams::default();
    for severity in 1..=3u8 {
        let hits = (0..1000u64)
            .filter(|&seed| {
                let (img, _) = patch_image(seed, [255, 0, 0]);
                color_feature(&noisy(&img, severity, seed), &params).unwrap() == Some(ColorClass::Red)
            })
            .count();
        assert!(hits >= 950, "severity {severity}: {hits}/1000");
    }
}

#[test]
fn noisy_patch_stays_among_largest_segments() {
    let top = ColorParams::default().top_segments;
    let hits = (0..1000u64)
        .filter(|&seed| {
            let (img, (r0, c0)) = patch_image(seed, [255, 0, 0]);
            let mut segs = segment_image(&noisy(&img, 1, seed), 64).unwrap();
            segs.sort_by(|a, b| b.size().cmp(&a.size()));
            let inside = |&(r, c): &(usize, usize)| (r0..r0 + 50).contains(&r) && (c0..c0 + 50).contains(&c);
            segs.iter()
                .take(top)
                .any(|s| s.size() >= 50 * 50 / 2 && s.pixel_coords.iter().all(inside))
        })
        .count();
    assert!(hits >= 950, "{hits}/1000");
}

#[test]
fn segments_partition_noisy_images() {
    for seed in 0..20u64 {
        let (img, _) = patch_image(seed, [0, 0, 255]);
        let img = noisy(&img, 3, seed);
        let segs = segment_image(&img, 64).unwrap();
        let mut seen = vec![false; img.len()];
        for s in &segs {
            assert!(s.size() > 0);
            for &(r, c) in &s.pixel_coords {
                assert!(r < img.height() && c < img.width());
                assert!(!std::mem::replace(&mut seen[r * img.width() + c], true), "pixel ({r}, {c}) twice");
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}

#[test]
fn leaf_brown_fraction_survives_gaussian_noise() {
    let params = LeafParams::default();
    let side = 128;
    let axes = (0.4 * side as f64, 0.28 * side as f64);
    for severity in 1..=3u8 {
        let mut r = rng::stream(7, &[severity as u64]);
        let mut ok = 0;
        for seed in 0..500u64 {
            let fb = (r.gen_range(0..=10) as f64) * 0.05;
            let fd = (r.gen_range(0..=10) as f64) * 0.05;
            let leaf = generate_synthetic_leaf(side, axes, fb, fd, seed).unwrap();
            let clean = leaf_features(&leaf.image, &params).unwrap();
            let dirty = leaf_features(&noisy(&leaf.image, severity, seed), &params).unwrap();
            if (dirty.brown - clean.brown).abs() <= 0.1 {
                ok += 1;
            }
        }
        assert!(ok >= 450, "severity {severity}: {ok}/500");
    }
}

fn fv(v: Vec<f64>) -> FeatureVector<f64> {
    FeatureVector::new(vec!["a".into(), "b".into(), "c".into()], v).unwrap()
}

proptest! {
    #[test]
    fn tree_similarity_is_an_equivalence(
        train in prop::collection::vec((prop::array::uniform3(-1.0f64..1.0), 0usize..3), 4..30),
        probes in prop::collection::vec(prop::array::uniform3(-1.0f64..1.0), 3),
        depth in 1usize..4,
    ) {
        let xs: Vec<_> = train.iter().map(|(v, _)| fv(v.to_vec())).collect();
        let ys: Vec<_> = train.iter().map(|(_, y)| *y).collect();
        let tree = train_tree(&xs, &ys, 3, &TreeParams { max_depth: depth }).unwrap();
        let p: Vec<_> = probes.iter().map(|v| fv(v.to_vec())).collect();
        let s = |i: usize, j: usize| tree_similarity(&p[i], &p[j], &tree).unwrap();
        for i in 0..3 {
            prop_assert_eq!(s(i, i), 1.0);
            for j in 0..3 {
                prop_assert_eq!(s(i, j), s(j, i));
                for k in 0..3 {
                    if s(i, j) == 1.0 && s(j, k) == 1.0 {
                        prop_assert_eq!(s(i, k), 1.0);
                    }
                }
            }
        }
    }

    #[test]
    fn color_ignores_extra_dark_border(pad in 1usize..20, seed in 0u64..1000) {
        let mut r = rng::stream(seed, &[]);
        let (x, y) = sample_patch_center(60, 8, &mut r);
        let img = render_color_image([0, 255, 0], x, y, 60, 8);
        let side = 60 + 2 * pad;
        let mut big = Image::filled(side, side, [5, 5, 5]);
        for rr in 0..60 {
            for cc in 0..60 {
                big.set(rr + pad, cc + pad, img.get(rr, cc));
            }
        }
        let p = ColorParams::default();
        prop_assert_eq!(color_feature(&big, &p).unwrap(), color_feature(&img, &p).unwrap());
    }
}
