//! Stain color jitter for histopathology slides.
//!
//! RGB pixels are projected into optical-density space, decomposed into
//! hematoxylin/eosin/DAB stain concentrations with the Ruifrok-Johnston
//! stain matrix, jittered with one random linear map per image (a scale
//! and a shift per concentration channel), and reprojected. Jittering
//! concentrations rather than raw channels emulates a different staining
//! procedure while leaving tissue structure alone.

use std::io::{BufWriter, Read, Write};
use std::path::Path;

use crate::numerics::Rng;
use crate::{Error, Result};

/// Stain optical-density matrix (rows: hematoxylin, eosin, DAB; columns:
/// R, G, B), the standard Ruifrok & Johnston color-deconvolution
/// constants.
pub const HED_OD_MATRIX: [[f64; 3]; 3] = [
    [0.65, 0.70, 0.29],
    [0.07, 0.99, 0.11],
    [0.27, 0.57, 0.78],
];

/// 8-bit RGB raster, row-major interleaved channels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RgbImage {
    width: usize,
    height: usize,
    pixels: Vec<u8>,
}

impl RgbImage {
    pub fn new(width: usize, height: usize, pixels: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::validation("image dimensions must be positive"));
        }
        if pixels.len() != width * height * 3 {
            return Err(Error::validation(format!(
                "expected {} bytes for {width}x{height} RGB, got {}",
                width * height * 3,
                pixels.len()
            )));
        }
        Ok(RgbImage {
            width,
            height,
            pixels,
        })
    }

    pub fn filled(width: usize, height: usize, rgb: [u8; 3]) -> Result<Self> {
        let mut pixels = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            pixels.extend_from_slice(&rgb);
        }
        RgbImage::new(width, height, pixels)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn pixels(&self) -> &[u8] {
        &self.pixels
    }

    pub fn pixel(&self, x: usize, y: usize) -> [u8; 3] {
        let i = (y * self.width + x) * 3;
        [self.pixels[i], self.pixels[i + 1], self.pixels[i + 2]]
    }

    /// Serializes as binary PPM (P6, maxval 255).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    /// Parses binary PPM (P6, maxval 255). Comments after the magic are
    /// not supported; this reads exactly what [`RgbImage::to_ppm`] writes.
    pub fn from_ppm(bytes: &[u8]) -> Result<Self> {
        let mut fields = Vec::new();
        let mut pos = 0;
        // magic + width + height + maxval, whitespace separated
        while fields.len() < 4 && pos < bytes.len() {
            while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
                pos += 1;
            }
            if start == pos {
                break;
            }
            fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| {
                Error::validation("PPM header is not ASCII")
            })?);
        }
        if fields.len() != 4 || fields[0] != "P6" {
            return Err(Error::validation("expected binary PPM magic P6"));
        }
        let width: usize = fields[1]
            .parse()
            .map_err(|_| Error::validation("bad PPM width"))?;
        let height: usize = fields[2]
            .parse()
            .map_err(|_| Error::validation("bad PPM height"))?;
        if fields[3] != "255" {
            return Err(Error::validation("only maxval 255 PPM is supported"));
        }
        // Exactly one whitespace byte separates the header from the raster.
        pos += 1;
        let expected = width * height * 3;
        if bytes.len() < pos + expected {
            return Err(Error::validation(format!(
                "PPM raster truncated: expected {expected} bytes"
            )));
        }
        RgbImage::new(width, height, bytes[pos..pos + expected].to_vec())
    }

    pub fn write_ppm_file(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        let mut w = BufWriter::new(file);
        w.write_all(&self.to_ppm())?;
        Ok(())
    }

    pub fn read_ppm_file(path: &Path) -> Result<Self> {
        let mut bytes = Vec::new();
        std::fs::File::open(path)?.read_to_end(&mut bytes)?;
        RgbImage::from_ppm(&bytes)
    }
}

fn invert3(m: &[[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let cof = |r1: usize, c1: usize, r2: usize, c2: usize| {
        m[r1][c1] * m[r2][c2] - m[r1][c2] * m[r2][c1]
    };
    [
        [
            cof(1, 1, 2, 2) / det,
            -cof(0, 1, 2, 2) / det,
            cof(0, 1, 1, 2) / det,
        ],
        [
            -cof(1, 0, 2, 2) / det,
            cof(0, 0, 2, 2) / det,
            -cof(0, 0, 1, 2) / det,
        ],
        [
            cof(1, 0, 2, 1) / det,
            -cof(0, 0, 2, 1) / det,
            cof(0, 0, 1, 1) / det,
        ],
    ]
}

/// Jitters the stain concentrations of an image.
///
/// Per image (not per pixel) and per concentration channel c, draws a
/// scale in `U(1 - sigma, 1 + sigma)` and a shift in `U(-sigma, sigma)`
/// and applies `C_c <- C_c * scale + shift` in stain space; the six draws
/// happen in channel order, scale before shift. At `sigma = 0` the round
/// trip through optical density reproduces the input up to +-1 per
/// channel from requantization.
pub fn stain_color_jitter(img: &RgbImage, sigma: f64, rng: &mut Rng) -> Result<RgbImage> {
    if !(0.0..=1.0).contains(&sigma) {
        return Err(Error::validation(format!(
            "jitter strength must lie in [0, 1], got {sigma}"
        )));
    }
    let m = HED_OD_MATRIX;
    let m_inv = invert3(&m);

    let mut scales = [0.0f64; 3];
    let mut shifts = [0.0f64; 3];
    for c in 0..3 {
        scales[c] = rng.uniform_in(1.0 - sigma, 1.0 + sigma);
        shifts[c] = rng.uniform_in(-sigma, sigma);
    }

    let mut out = Vec::with_capacity(img.pixels.len());
    for px in img.pixels.chunks_exact(3) {
        // RGB -> optical density
        let od = [
            -((f64::from(px[0]) + 1.0) / 256.0).log10(),
            -((f64::from(px[1]) + 1.0) / 256.0).log10(),
            -((f64::from(px[2]) + 1.0) / 256.0).log10(),
        ];
        // OD -> stain concentrations (row vector times M^{-1})
        let mut conc = [0.0f64; 3];
        for c in 0..3 {
            conc[c] = od[0] * m_inv[0][c] + od[1] * m_inv[1][c] + od[2] * m_inv[2][c];
            conc[c] = conc[c] * scales[c] + shifts[c];
        }
        // Back to OD, then to 8-bit RGB.
        for ch in 0..3 {
            let od_new = conc[0] * m[0][ch] + conc[1] * m[1][ch] + conc[2] * m[2][ch];
            let v = 256.0 * 10f64.powf(-od_new) - 1.0;
            out.push(v.round().clamp(0.0, 255.0) as u8);
        }
    }
    RgbImage::new(img.width, img.height, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn test_image(w: usize, h: usize, seed: u64) -> RgbImage {
        let mut rng = Rng::new(seed);
        let pixels: Vec<u8> = (0..w * h * 3)
            .map(|_| (rng.next_u64() & 0xff) as u8)
            .collect();
        RgbImage::new(w, h, pixels).unwrap()
    }

    #[test]
    fn sigma_zero_round_trips_within_one_level() {
        let img = test_image(64, 64, 3);
        let mut rng = Rng::new(0);
        let out = stain_color_jitter(&img, 0.0, &mut rng).unwrap();
        for (a, b) in img.pixels().iter().zip(out.pixels()) {
            assert!((i16::from(*a) - i16::from(*b)).abs() <= 1, "{a} vs {b}");
        }
    }

    #[test]
    fn extreme_inputs_stay_in_range() {
        // u8 output is in range by type; make sure saturating pixels do
        // not wrap through the clamp.
        for fill in [[0u8, 0, 0], [255u8, 255, 255], [255u8, 0, 128]] {
            let img = RgbImage::filled(8, 8, fill).unwrap();
            let mut rng = Rng::new(1);
            let out = stain_color_jitter(&img, 1.0, &mut rng).unwrap();
            assert_eq!(out.pixels().len(), img.pixels().len());
        }
    }

    // The jitter draws are per image, so a spatially uniform input stays
    // spatially uniform.
    #[test]
    fn uniform_image_stays_uniform() {
        let img = RgbImage::filled(16, 16, [128, 128, 128]).unwrap();
        let mut rng = Rng::new(77);
        let out = stain_color_jitter(&img, 0.1, &mut rng).unwrap();
        let first = out.pixel(0, 0);
        for y in 0..16 {
            for x in 0..16 {
                assert_eq!(out.pixel(x, y), first);
            }
        }
    }

    #[test]
    fn deterministic_under_fixed_stream() {
        let img = test_image(16, 16, 5);
        let a = stain_color_jitter(&img, 0.08, &mut Rng::new(123)).unwrap();
        let b = stain_color_jitter(&img, 0.08, &mut Rng::new(123)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_sigma() {
        let img = test_image(4, 4, 0);
        assert!(stain_color_jitter(&img, -0.1, &mut Rng::new(0)).is_err());
        assert!(stain_color_jitter(&img, 1.5, &mut Rng::new(0)).is_err());
    }

    #[test]
    fn ppm_round_trip_is_bit_exact() {
        let img = test_image(13, 7, 9);
        let bytes = img.to_ppm();
        let back = RgbImage::from_ppm(&bytes).unwrap();
        assert_eq!(back, img);
    }

    #[test]
    fn ppm_parser_rejects_garbage() {
        assert!(RgbImage::from_ppm(b"P5\n2 2\n255\n....").is_err());
        assert!(RgbImage::from_ppm(b"P6\n2 2\n255\nxy").is_err());
        assert!(RgbImage::from_ppm(b"P6\n2 2\n65535\n").is_err());
    }

    #[test]
    fn stain_matrix_is_invertible() {
        let inv = invert3(&HED_OD_MATRIX);
        for i in 0..3 {
            for j in 0..3 {
                let mut s = 0.0;
                for k in 0..3 {
                    s += HED_OD_MATRIX[i][k] * inv[k][j];
                }
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((s - expected).abs() < 1e-12);
            }
        }
    }
}
