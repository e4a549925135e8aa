use crate::error::{Error, Result};

/// A single 8-bit sample plane, row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct PlaneU8 {
    width: usize,
    height: usize,
    samples: Vec<u8>,
}

impl PlaneU8 {
    pub fn new(width: usize, height: usize, samples: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Shape(format!("empty plane {width}x{height}")));
        }
        if samples.len() != width * height {
            return Err(Error::Shape(format!(
                "{} samples for a {width}x{height} plane",
                samples.len()
            )));
        }
        Ok(Self {
            width,
            height,
            samples,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Self::new(width, height, vec![value; width * height])
    }

    pub fn from_fn<F: FnMut(usize, usize) -> u8>(width: usize, height: usize, mut f: F) -> Result<Self> {
        let mut samples = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                samples.push(f(x, y));
            }
        }
        Self::new(width, height, samples)
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn samples(&self) -> &[u8] {
        &self.samples
    }

    #[inline]
    pub fn samples_mut(&mut self) -> &mut [u8] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<u8> {
        self.samples
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.samples[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, v: u8) {
        self.samples[y * self.width + x] = v;
    }

    /// Sample at a possibly out-of-bounds position, replicating the nearest edge.
    #[inline]
    pub fn get_clamped(&self, x: isize, y: isize) -> u8 {
        let x = x.clamp(0, self.width as isize - 1) as usize;
        let y = y.clamp(0, self.height as isize - 1) as usize;
        self.samples[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u8] {
        &self.samples[y * self.width..(y + 1) * self.width]
    }

    /// Rotates the plane by 90° clockwise.
    pub fn rotate90(&self) -> PlaneU8 {
        let (w, h) = (self.width, self.height);
        let mut out = vec![0u8; w * h];
        // new plane is h wide and w tall
        for y in 0..h {
            for x in 0..w {
                let (nx, ny) = (h - 1 - y, x);
                out[ny * h + nx] = self.get(x, y);
            }
        }
        PlaneU8 {
            width: h,
            height: w,
            samples: out,
        }
    }

    pub fn same_shape(&self, other: &PlaneU8) -> bool {
        self.width == other.width && self.height == other.height
    }
}

impl std::fmt::Debug for PlaneU8 {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PlaneU8({}x{})", self.width, self.height)
    }
}
