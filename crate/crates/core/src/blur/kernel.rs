use super::BlurError;

/// Normalized, symmetric 1D Gaussian weights of odd length.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian1DKernel {
    sigma: f64,
    weights: Vec<f32>,
}

/// `f x f` row-major outer product of a 1D kernel with itself.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian2DKernel {
    f: usize,
    weights: Vec<f32>,
}

/// Sigma used when none is given: `0.3 * ((f - 1) * 0.5 - 1) + 0.8`, the
/// convention of common vision libraries for a given aperture.
pub fn default_sigma(f: usize) -> f64 {
    0.3 * ((f as f64 - 1.0) * 0.5 - 1.0) + 0.8
}

pub fn make_gaussian_kernel(f: usize, sigma: f64) -> Result<Gaussian1DKernel, BlurError> {
    if f == 0 || f.is_multiple_of(2) {
        return Err(BlurError::Parameter(format!("filter size must be odd and positive, got {f}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(BlurError::Parameter(format!("sigma must be positive, got {sigma}")));
    }
    let middle = (f - 1) / 2;
    let raw: Vec<f64> = (0..=middle)
        .map(|i| {
            let x = i as f64 - middle as f64;
            (-(x * x) / (2.0 * sigma * sigma)).exp()
        })
        .collect();
    let total: f64 = raw.iter().sum::<f64>() * 2.0 - raw[middle];
    let mut weights = vec![0.0f32; f];
    for (i, r) in raw.iter().enumerate() {
        let w = (r / total) as f32;
        weights[i] = w;
        weights[f - 1 - i] = w;
    }
    Ok(Gaussian1DKernel { sigma, weights })
}

impl Gaussian1DKernel {
    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn middle(&self) -> usize {
        (self.weights.len() - 1) / 2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    pub fn outer(&self) -> Gaussian2DKernel {
        Gaussian2DKernel::from_1d(self)
    }
}

impl Gaussian2DKernel {
    pub fn from_1d(k: &Gaussian1DKernel) -> Self {
        let f = k.size();
        let w = k.weights();
        let mut weights = Vec::with_capacity(f * f);
        for a in w {
            for b in w {
                weights.push(a * b);
            }
        }
        Gaussian2DKernel { f, weights }
    }

    pub fn size(&self) -> usize {
        self.f
    }

    pub fn middle(&self) -> usize {
        (self.f - 1) / 2
    }

    pub fn weights(&self) -> &[f32] {
        &self.weights
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f32 {
        self.weights[row * self.f + col]
    }
}
