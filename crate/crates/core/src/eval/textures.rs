//! Synthetic periodic and directional test textures.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::image::Plane;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Texture {
    /// Two-level stripes; `angle` in degrees from the x axis to the stripe
    /// normal, `duty` the fraction of each period at the bright level.
    Stripes { period: f64, angle: f64, duty: f64 },
    /// Bright lines of `thickness` pixels every `period` pixels, both axes.
    Grid { period: usize, thickness: usize },
    /// Sinusoid along the normal at `angle` degrees.
    Grating { period: f64, angle: f64 },
    /// Squares of side `cell`.
    Checker { cell: usize },
}

const DARK: f64 = 56.0;
const BRIGHT: f64 = 196.0;

impl Texture {
    fn value(&self, r: usize, c: usize) -> f64 {
        let (x, y) = (c as f64, r as f64);
        match *self {
            Texture::Stripes { period, angle, duty } => {
                let (s, co) = angle.to_radians().sin_cos();
                let phase = ((x * co + y * s) / period).rem_euclid(1.0);
                if phase < duty {
                    BRIGHT
                } else {
                    DARK
                }
            }
            Texture::Grid { period, thickness } => {
                if r % period < thickness || c % period < thickness {
                    BRIGHT
                } else {
                    DARK
                }
            }
            Texture::Grating { period, angle } => {
                let (s, co) = angle.to_radians().sin_cos();
                let t = 2.0 * std::f64::consts::PI * (x * co + y * s) / period;
                0.5 * (DARK + BRIGHT) + 0.5 * (BRIGHT - DARK) * t.sin()
            }
            Texture::Checker { cell } => {
                if (r / cell + c / cell).is_multiple_of(2) {
                    BRIGHT
                } else {
                    DARK
                }
            }
        }
    }

    /// Renders the pattern plus uniform noise in
    /// `[-noise, noise]`, rounded and clamped to 8 bits.
    pub fn render(&self, width: usize, height: usize, noise: f64, seed: u64) -> Plane {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Plane::from_fn(width, height, |r, c| {
            let jitter = if noise > 0.0 {
                rng.random_range(-noise..=noise)
            } else {
                0.0
            };
            (self.value(r, c) + jitter).round().clamp(0.0, 255.0) as u8
        })
    }
}

/// Names and parameters of the 10-image evaluation suite.
pub fn suite() -> Vec<(&'static str, Texture)> {
    vec![
        (
            "stripes_v12",
            Texture::Stripes {
                period: 12.0,
                angle: 0.0,
                duty: 0.5,
            },
        ),
        (
            "stripes_h20",
            Texture::Stripes {
                period: 20.0,
                angle: 90.0,
                duty: 0.5,
            },
        ),
        (
            "stripes_v7_thin",
            Texture::Stripes {
                period: 7.0,
                angle: 0.0,
                duty: 0.3,
            },
        ),
        (
            "stripes_d45",
            Texture::Stripes {
                period: 16.0,
                angle: 45.0,
                duty: 0.5,
            },
        ),
        (
            "grid_16_3",
            Texture::Grid {
                period: 16,
                thickness: 3,
            },
        ),
        (
            "grid_22_5",
            Texture::Grid {
                period: 22,
                thickness: 5,
            },
        ),
        (
            "grating_v18",
            Texture::Grating {
                period: 18.0,
                angle: 0.0,
            },
        ),
        (
            "grating_h10",
            Texture::Grating {
                period: 10.0,
                angle: 90.0,
            },
        ),
        (
            "grating_d30",
            Texture::Grating {
                period: 25.0,
                angle: 30.0,
            },
        ),
        ("checker_20", Texture::Checker { cell: 20 }),
    ]
}

/// Renders the suite at `size × size` with light noise, seeded per image.
pub fn render_suite(size: usize, seed: u64) -> Vec<(String, Plane)> {
    suite()
        .into_iter()
        .enumerate()
        .map(|(i, (name, t))| (name.to_string(), t.render(size, size, 2.0, seed.wrapping_add(i as u64))))
        .collect()
}

/// Independent uniform 8-bit noise.
pub fn noise_image(width: usize, height: usize, seed: u64) -> Plane {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Plane::from_fn(width, height, |_, _| rng.random())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_is_deterministic_and_sized() {
        let a = render_suite(64, 3);
        assert_eq!(a.len(), 10);
        assert_eq!(a, render_suite(64, 3));
        for (_, p) in &a {
            assert_eq!((p.width(), p.height()), (64, 64));
        }
    }

    #[test]
    fn stripes_are_periodic() {
        let p = Texture::Stripes {
            period: 12.0,
            angle: 0.0,
            duty: 0.5,
        }
        .render(48, 4, 0.0, 0);
        for c in 0..36 {
            assert_eq!(p.get(0, c), p.get(0, c + 12));
            assert_eq!(p.get(0, c), p.get(3, c));
        }
        assert_ne!(p.get(0, 0), p.get(0, 6));
    }
}
