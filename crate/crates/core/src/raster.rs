//! Multi-channel float images with PNG I/O and bilinear lookup.

use std::path::Path;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Image {
    pub width: usize,
    pub height: usize,
    pub channels: usize,
    /// Row-major, channels interleaved.
    pub data: Vec<f64>,
}

impl Image {
    pub fn new(width: usize, height: usize, channels: usize) -> Self {
        Image {
            width,
            height,
            channels,
            data: vec![0.0; width * height * channels],
        }
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut data = Vec::with_capacity(width * height * channels);
        for r in 0..height {
            for c in 0..width {
                for ch in 0..channels {
                    data.push(f(r, c, ch));
                }
            }
        }
        Image {
            width,
            height,
            channels,
            data,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.data.len() != self.width * self.height * self.channels {
            return Err(Error::Shape(format!(
                "image data has {} values, expected {}x{}x{}",
                self.data.len(),
                self.width,
                self.height,
                self.channels
            )));
        }
        if self.width == 0 || self.height == 0 || self.channels == 0 {
            return Err(Error::Shape("image has a zero dimension".into()));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Shape("image has non-finite values".into()));
        }
        Ok(())
    }

    #[inline]
    pub fn idx(&self, row: usize, col: usize) -> usize {
        (row * self.width + col) * self.channels
    }

    pub fn pixel(&self, row: usize, col: usize) -> &[f64] {
        let i = self.idx(row, col);
        &self.data[i..i + self.channels]
    }

    pub fn pixel_mut(&mut self, row: usize, col: usize) -> &mut [f64] {
        let i = self.idx(row, col);
        let c = self.channels;
        &mut self.data[i..i + c]
    }

    pub fn get(&self, row: usize, col: usize, ch: usize) -> f64 {
        self.data[self.idx(row, col) + ch]
    }

    /// Bilinear lookup at continuous pixel coordinates, where integer
    /// coordinates are pixel centers. Columns wrap when `wrap_x` is set and
    /// clamp otherwise; rows always clamp.
    pub fn bilinear(&self, x: f64, y: f64, wrap_x: bool, out: &mut [f64]) {
        let w = self.width as isize;
        let h = self.height as isize;
        let y = y.clamp(0.0, (h - 1) as f64);
        let x = if wrap_x {
            x.rem_euclid(w as f64)
        } else {
            x.clamp(0.0, (w - 1) as f64)
        };
        let x0 = x.floor() as isize;
        let y0 = y.floor() as isize;
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        let col = |c: isize| -> usize {
            if wrap_x {
                c.rem_euclid(w) as usize
            } else {
                c.clamp(0, w - 1) as usize
            }
        };
        let row = |r: isize| -> usize { r.clamp(0, h - 1) as usize };
        let (c0, c1) = (col(x0), col(x0 + 1));
        let (r0, r1) = (row(y0), row(y0 + 1));
        for (ch, o) in out.iter_mut().enumerate().take(self.channels) {
            let top = self.get(r0, c0, ch) * (1.0 - fx) + self.get(r0, c1, ch) * fx;
            let bot = self.get(r1, c0, ch) * (1.0 - fx) + self.get(r1, c1, ch) * fx;
            *o = top * (1.0 - fy) + bot * fy;
        }
    }

    /// Loads an 8-bit image as RGB scaled to `[0, 1]`.
    pub fn read_png(path: &Path) -> Result<Image> {
        let img = image::open(path)?.to_rgb8();
        let (w, h) = img.dimensions();
        Ok(Image {
            width: w as usize,
            height: h as usize,
            channels: 3,
            data: img.as_raw().iter().map(|&v| f64::from(v) / 255.0).collect(),
        })
    }

    /// Writes 8-bit RGB (grayscale is replicated, extra channels dropped).
    pub fn write_png(&self, path: &Path) -> Result<()> {
        let mut buf = Vec::with_capacity(self.width * self.height * 3);
        for px in self.data.chunks_exact(self.channels) {
            for ch in 0..3 {
                let v = px[ch.min(self.channels - 1)];
                buf.push((v.clamp(0.0, 1.0) * 255.0).round() as u8);
            }
        }
        let img = image::RgbImage::from_raw(self.width as u32, self.height as u32, buf)
            .ok_or_else(|| Error::Shape("image buffer size mismatch".into()))?;
        img.save_with_format(path, image::ImageFormat::Png)?;
        Ok(())
    }

    /// Peak signal-to-noise ratio in dB for signals in `[0, 1]`.
    pub fn psnr(&self, other: &Image) -> f64 {
        assert_eq!(self.data.len(), other.data.len());
        let mse = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            / self.data.len() as f64;
        if mse == 0.0 {
            f64::INFINITY
        } else {
            -10.0 * mse.log10()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bilinear_hits_centers_and_wraps() {
        let img = Image::from_fn(4, 2, 1, |r, c, _| (r * 4 + c) as f64);
        let mut out = [0.0];
        img.bilinear(2.0, 1.0, true, &mut out);
        assert_eq!(out[0], 6.0);
        img.bilinear(3.5, 0.0, true, &mut out);
        assert_eq!(out[0], 1.5);
        img.bilinear(3.5, 0.0, false, &mut out);
        assert_eq!(out[0], 3.0);
        img.bilinear(1.0, -3.0, true, &mut out);
        assert_eq!(out[0], 1.0);
    }

    #[test]
    fn png_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("x.png");
        let img = Image::from_fn(5, 3, 3, |r, c, ch| ((r * 5 + c) * 3 + ch) as f64 / 255.0);
        img.write_png(&path).unwrap();
        let back = Image::read_png(&path).unwrap();
        assert!(img.data.iter().zip(&back.data).all(|(a, b)| (a - b).abs() < 1e-9));
    }
}
