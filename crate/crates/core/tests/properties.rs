use pano_core::{
    concat, edge_blend, gaussian_blur, normalize_yaw, recenter, seam_continuity, to_equirect,
    yaw_to_shift, Clip, EquirectFrame, Frame, ProjectionParams,
};
use proptest::prelude::*;

fn frame_strategy(max_w: u32, max_h: u32) -> impl Strategy<Value = Frame> {
    (2..=max_w, 2..=max_h).prop_flat_map(|(w, h)| {
        prop::collection::vec(any::<u8>(), (w * h * 3) as usize)
            .prop_map(move |data| Frame::new(w, h, data).unwrap())
    })
}

fn equirect_strategy(max_h: u32) -> impl Strategy<Value = EquirectFrame> {
    (2..=max_h).prop_flat_map(|h| {
        prop::collection::vec(any::<u8>(), (2 * h * h * 3) as usize)
            .prop_map(move |data| EquirectFrame::new(Frame::new(2 * h, h, data).unwrap()).unwrap())
    })
}

/// Direct (non-separable) 2D convolution in f64 with the same boundary
/// rules: rows wrap, columns reflect half-sample symmetrically.
fn blur_oracle(frame: &Frame, sigma: f64) -> Vec<f64> {
    let (w, h) = (frame.width() as i64, frame.height() as i64);
    let r = (3.0 * sigma).ceil().max(1.0) as i64;
    let g = |k: i64| (-((k * k) as f64) / (2.0 * sigma * sigma)).exp();
    let norm: f64 = (-r..=r).map(g).sum();
    let reflect = |i: i64| {
        let m = i.rem_euclid(2 * h);
        if m < h {
            m
        } else {
            2 * h - 1 - m
        }
    };
    let mut out = Vec::with_capacity((w * h * 3) as usize);
    for y in 0..h {
        for x in 0..w {
            for c in 0..3 {
                let mut acc = 0.0;
                for dy in -r..=r {
                    for dx in -r..=r {
                        let sx = (x + dx).rem_euclid(w) as u32;
                        let sy = reflect(y + dy) as u32;
                        acc += g(dx) * g(dy) * f64::from(frame.pixel(sx, sy)[c]);
                    }
                }
                out.push(acc / (norm * norm));
            }
        }
    }
    out
}

#[test]
fn impulse_row_spreads_into_kernel_weights() {
    // Two identical rows so the vertical pass is a no-op.
    let mut f = Frame::filled(16, 2, [0; 3]).unwrap();
    f.set_pixel(8, 0, [255; 3]);
    f.set_pixel(8, 1, [255; 3]);
    let out = gaussian_blur(&f, 1.0).unwrap();
    let oracle = blur_oracle(&f, 1.0);
    for x in 0..16u32 {
        let expected = oracle[(x * 3) as usize];
        let got = f64::from(out.pixel(x, 0)[0]);
        assert!((got - expected).abs() <= 1.0, "x={x}: {got} vs {expected}");
    }
    // 255 * exp(-k^2/2) / sum_{|j|<=3} exp(-j^2/2) for k = 0, 1, 2.
    assert_eq!(out.pixel(8, 0)[0], 102);
    assert_eq!(out.pixel(7, 0)[0], 62);
    assert_eq!(out.pixel(9, 0)[0], 62);
    assert_eq!(out.pixel(6, 0)[0], 14);
    assert_eq!(out.pixel(10, 0)[0], 14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blur_matches_direct_convolution(f in frame_strategy(16, 16), si in 0usize..3) {
        let sigma = [0.5, 1.0, 2.0][si];
        let out = gaussian_blur(&f, sigma).unwrap();
        let oracle = blur_oracle(&f, sigma);
        for (&got, &want) in out.as_bytes().iter().zip(&oracle) {
            prop_assert!((f64::from(got) - want).abs() <= 1.0);
        }
    }

    #[test]
    fn blur_preserves_mean(f in frame_strategy(24, 24), sigma in 0.0f64..6.0) {
        let out = gaussian_blur(&f, sigma).unwrap();
        prop_assert!((out.mean_intensity() - f.mean_intensity()).abs() <= 1.0);
    }

    #[test]
    fn recenter_identity_and_composition(f in equirect_strategy(12), a in -720i32..720, b in -720i32..720) {
        prop_assert_eq!(&recenter(&f, normalize_yaw(0.0).unwrap()), &f);
        // Yaws that are whole multiples of one column shift integrally.
        let w = f.width() as i32;
        let step = 360.0 / f64::from(w);
        let ya = normalize_yaw(f64::from(a % w) * step).unwrap();
        let yb = normalize_yaw(f64::from(b % w) * step).unwrap();
        let twice = recenter(&recenter(&f, ya), yb);
        let once = recenter(&f, ya + yb);
        prop_assert_eq!(twice, once);
    }

    #[test]
    fn recenter_preserves_row_multisets(f in equirect_strategy(12), deg in -1000.0f64..1000.0) {
        let out = recenter(&f, normalize_yaw(deg).unwrap());
        prop_assert_eq!(out.dimensions(), f.dimensions());
        for y in 0..f.height() {
            let mut a: Vec<[u8; 3]> = (0..f.width()).map(|x| f.pixel(x, y)).collect();
            let mut b: Vec<[u8; 3]> = (0..f.width()).map(|x| out.pixel(x, y)).collect();
            a.sort_unstable();
            b.sort_unstable();
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn recenter_column_mapping(f in equirect_strategy(8), deg in -180.0f64..180.0) {
        let yaw = normalize_yaw(deg).unwrap();
        let w = i64::from(f.width());
        let s = yaw_to_shift(yaw, f.width());
        let out = recenter(&f, yaw);
        for y in 0..f.height() {
            for c in 0..w {
                let src = (c + s).rem_euclid(w) as u32;
                prop_assert_eq!(out.pixel(c as u32, y), f.pixel(src, y));
            }
        }
    }

    #[test]
    fn yaw_shift_is_odd_and_bounded(deg in -180.0f64..180.0, w in 2u32..5000) {
        let pos = normalize_yaw(deg).unwrap();
        let neg = normalize_yaw(-deg).unwrap();
        let exact = deg / 360.0 * f64::from(w);
        let s = yaw_to_shift(pos, w);
        prop_assert!(s.unsigned_abs() as f64 <= f64::from(w) / 2.0);
        if (exact.abs().fract() - 0.5).abs() > 1e-9 && deg != -180.0 {
            prop_assert_eq!(yaw_to_shift(neg, w), -s);
        }
    }

    #[test]
    fn normalize_is_periodic(deg in -1.0e4f64..1.0e4, k in -50i32..50) {
        let a = normalize_yaw(deg).unwrap().degrees();
        let b = normalize_yaw(deg + 360.0 * f64::from(k)).unwrap().degrees();
        prop_assert!((-180.0..180.0).contains(&a));
        let diff = (a - b).abs();
        prop_assert!(diff < 1e-9 || (diff - 360.0).abs() < 1e-9);
        // Whole degrees are exact.
        let whole = deg.trunc();
        prop_assert_eq!(
            normalize_yaw(whole).unwrap(),
            normalize_yaw(whole + 360.0 * f64::from(k)).unwrap()
        );
    }

    #[test]
    fn edge_blend_improves_visible_seams(f in equirect_strategy(24)) {
        prop_assume!(f.width() >= 20);
        let before = seam_continuity(&f);
        prop_assume!(before > 0.05);
        let after = seam_continuity(&edge_blend(&f, 0.05).unwrap());
        prop_assert!(after < before);
        prop_assert_eq!(&edge_blend(&f, 0.0).unwrap(), &f);
    }

    #[test]
    fn concat_of_split_is_identity(n in 1usize..30, cuts in prop::collection::vec(0usize..30, 0..4)) {
        let frames: Vec<Frame> = (0..n)
            .map(|i| Frame::filled(4, 2, [i as u8, 7, 9]).unwrap())
            .collect();
        let clip = Clip::new(frames, 24).unwrap();
        let mut bounds: Vec<usize> = cuts.into_iter().map(|c| c % n).filter(|&c| c > 0).collect();
        bounds.sort_unstable();
        bounds.dedup();
        bounds.insert(0, 0);
        bounds.push(n);
        let parts: Vec<Clip> = bounds.windows(2).map(|b| clip.slice(b[0]..b[1]).unwrap()).collect();
        prop_assert_eq!(concat(&parts).unwrap(), clip);
    }

    #[test]
    fn projection_is_two_to_one_and_deterministic(f in frame_strategy(48, 48), half in 2u32..40) {
        let params = ProjectionParams::with_width(half * 2);
        let a = to_equirect(&f, &params).unwrap();
        prop_assert_eq!(a.width(), 2 * a.height());
        prop_assert_eq!(a.width(), half * 2);
        let b = to_equirect(&f, &params).unwrap();
        prop_assert_eq!(a, b);
    }
}
