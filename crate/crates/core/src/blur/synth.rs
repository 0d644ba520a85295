use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Image;

/// Deterministic synthetic image contents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Pattern {
    Constant(f32),
    /// 1.0 at `(h / 2, w / 2)` on every channel, 0 elsewhere.
    Impulse,
    /// Diagonal ramp in `[0, 1]`.
    Gradient,
    /// Uniform `[0, 1)` values from ChaCha8 seeded with the given seed.
    Random(u64),
}

impl Pattern {
    /// Parses `constant[:v]`, `impulse`, `gradient` or `random[:seed]`.
    pub fn parse(s: &str, default_seed: u64) -> Option<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (s, None),
        };
        match name {
            "constant" => Some(Pattern::Constant(arg.map_or(Some(0.5), |a| a.parse().ok())?)),
            "impulse" => Some(Pattern::Impulse),
            "gradient" => Some(Pattern::Gradient),
            "random" => Some(Pattern::Random(arg.map_or(Some(default_seed), |a| a.parse().ok())?)),
            _ => None,
        }
    }
}

/// Builds a `w x h x c` image. Panics if `w` or `h` is zero or `c` is not 1 or 3.
pub fn synth_image(w: usize, h: usize, c: usize, pattern: Pattern) -> Image {
    let len = w * h * c;
    let data = match pattern {
        Pattern::Constant(v) => vec![v; len],
        Pattern::Impulse => {
            let mut d = vec![0.0; len];
            let base = ((h / 2) * w + w / 2) * c;
            d[base..base + c].fill(1.0);
            d
        }
        Pattern::Gradient => {
            let span = (w + h).saturating_sub(2).max(1) as f32;
            let mut d = Vec::with_capacity(len);
            for i in 0..h {
                for j in 0..w {
                    let v = (i + j) as f32 / span;
                    d.extend(std::iter::repeat_n(v, c));
                }
            }
            d
        }
        Pattern::Random(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..len).map(|_| rng.gen::<f32>()).collect()
        }
    };
    Image::new(w, h, c, data).expect("synthetic image dimensions must be valid")
}
