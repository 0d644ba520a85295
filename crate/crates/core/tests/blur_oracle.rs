use membench::blur::{make_gaussian_kernel, synth_image, BlurRunner, BlurVariant, Image, Pattern};
use proptest::prelude::*;

/// Direct 2D convolution in f64 with its own Gaussian weights.
fn reference(img: &Image, f: usize, sigma: f64) -> Vec<f64> {
    let m = f / 2;
    let raw: Vec<f64> = (0..f)
        .map(|i| {
            let x = i as f64 - m as f64;
            (-x * x / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let sum: f64 = raw.iter().sum();
    let g: Vec<f64> = raw.iter().map(|v| v / sum).collect();

    let (w, h, c) = (img.width(), img.height(), img.channels());
    let mut out: Vec<f64> = img.data().iter().map(|&v| v as f64).collect();
    if w < f || h < f {
        return out;
    }
    for i in m..h - m {
        for j in m..w - m {
            for ch in 0..c {
                let mut acc = 0.0;
                for ky in 0..f {
                    for kx in 0..f {
                        acc += g[ky] * g[kx] * img.at(i + ky - m, j + kx - m, ch) as f64;
                    }
                }
                out[(i * w + j) * c + ch] = acc;
            }
        }
    }
    out
}

fn run(v: BlurVariant, img: &Image, f: usize, sigma: f64, threads: usize) -> Image {
    let mut r = BlurRunner::new(make_gaussian_kernel(f, sigma).unwrap());
    r.run(v, img, threads).unwrap();
    r.output_image(img)
}

fn max_diff(a: &[f32], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(&x, &y)| (x as f64 - y).abs()).fold(0.0, f64::max)
}

#[test]
fn all_variants_match_reference() {
    let img = synth_image(61, 47, 3, Pattern::Random(5));
    for (f, sigma) in [(3, 0.8), (5, 1.1), (9, 2.0), (19, 3.5)] {
        let want = reference(&img, f, sigma);
        for v in BlurVariant::ALL {
            let out = run(v, &img, f, sigma, 3);
            let d = max_diff(out.data(), &want);
            assert!(d <= 1e-5, "{v} f={f}: {d:e}");
        }
    }
}

#[test]
fn grayscale_matches_reference() {
    let img = synth_image(40, 33, 1, Pattern::Gradient);
    let want = reference(&img, 7, 1.4);
    for v in BlurVariant::ALL {
        let out = run(v, &img, 7, 1.4, 2);
        assert!(max_diff(out.data(), &want) <= 1e-5, "{v}");
    }
}

#[test]
fn filter_equal_to_image_side() {
    let img = synth_image(9, 9, 3, Pattern::Random(1));
    let want = reference(&img, 9, 2.0);
    for v in BlurVariant::ALL {
        assert!(max_diff(run(v, &img, 9, 2.0, 4).data(), &want) <= 1e-5, "{v}");
    }
}

fn variant() -> impl Strategy<Value = BlurVariant> {
    prop::sample::select(BlurVariant::ALL.to_vec())
}

prop_compose! {
    fn case()(f in prop::sample::select(vec![3usize, 5, 7, 9]))
        (f in Just(f), w in f..40, h in f..40, c in prop::sample::select(vec![1usize, 3]),
         sigma in 0.5f64..4.0, seed in any::<u64>()) -> (usize, usize, usize, usize, f64, u64) {
        (f, w, h, c, sigma, seed)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn constant_interior_is_preserved(v in variant(), (f, w, h, c, sigma, _) in case(), value in 0.0f32..1.0) {
        let img = synth_image(w, h, c, Pattern::Constant(value));
        let out = run(v, &img, f, sigma, 2);
        for (a, b) in out.data().iter().zip(img.data()) {
            prop_assert!((a - b).abs() <= 1e-5);
        }
    }

    #[test]
    fn linear(v in variant(), (f, w, h, c, sigma, seed) in case(), a in -2.0f32..2.0, b in -2.0f32..2.0) {
        let x = synth_image(w, h, c, Pattern::Random(seed));
        let y = synth_image(w, h, c, Pattern::Random(seed ^ 0x9e37));
        let mix: Vec<f32> = x.data().iter().zip(y.data()).map(|(p, q)| a * p + b * q).collect();
        let z = Image::new(w, h, c, mix).unwrap();
        let (bx, by, bz) = (run(v, &x, f, sigma, 3), run(v, &y, f, sigma, 3), run(v, &z, f, sigma, 3));
        for k in 0..bz.data().len() {
            let want = a * bx.data()[k] + b * by.data()[k];
            prop_assert!((bz.data()[k] - want).abs() <= 1e-4);
        }
    }

    #[test]
    fn output_stays_in_input_range(v in variant(), (f, w, h, c, sigma, seed) in case()) {
        let img = synth_image(w, h, c, Pattern::Random(seed));
        let (lo, hi) = img.min_max();
        let (olo, ohi) = run(v, &img, f, sigma, 2).min_max();
        prop_assert!(olo >= lo - 1e-6 && ohi <= hi + 1e-6);
    }

    #[test]
    fn variants_agree(threads in 1usize..9, (f, w, h, c, sigma, seed) in case()) {
        let img = synth_image(w, h, c, Pattern::Random(seed));
        let base = run(BlurVariant::Naive, &img, f, sigma, 1);
        for v in BlurVariant::ALL {
            let out = run(v, &img, f, sigma, threads);
            prop_assert!(out.max_abs_diff_interior(&base, f / 2).unwrap() <= 1e-4, "{}", v);
        }
    }

    #[test]
    fn borders_keep_input(v in variant(), (f, w, h, c, sigma, seed) in case()) {
        let img = synth_image(w, h, c, Pattern::Random(seed));
        let out = run(v, &img, f, sigma, 2);
        let m = f / 2;
        for i in 0..h {
            for j in 0..w {
                if i < m || i >= h - m || j < m || j >= w - m {
                    for ch in 0..c {
                        prop_assert_eq!(out.at(i, j, ch).to_bits(), img.at(i, j, ch).to_bits());
                    }
                }
            }
        }
    }

    #[test]
    fn parallel_is_thread_count_invariant(threads in 1usize..17, (f, w, h, c, sigma, seed) in case()) {
        let img = synth_image(w, h, c, Pattern::Random(seed));
        let one = run(BlurVariant::Parallel, &img, f, sigma, 1);
        let many = run(BlurVariant::Parallel, &img, f, sigma, threads);
        prop_assert_eq!(one.data(), many.data());
    }
}
