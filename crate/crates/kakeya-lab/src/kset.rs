//! Unions of sheared parallelograms built from sticky maps.
//!
//! Each domain leaf `u` of a sticky map contributes the open region between
//! the lines `y = left(Q_u) + slope * x` and `y = right(Q_u) + slope * x`,
//! where the slope is the left endpoint of the image interval. The union of
//! all `2^h` regions is the set the strip measures probe.

use num_rational::BigRational;
use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dirtree::DirTree;
use crate::dyadic::Dyadic;
use crate::interval::DyadicInterval;
use crate::sticky::{StickyError, StickyMap};
use crate::sweep;

/// One sheared parallelogram: a vertical dyadic base interval translated
/// along a line of the given slope. The region is open; boundary lines are
/// excluded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parallelogram {
    pub base: DyadicInterval,
    pub slope: Dyadic,
}

impl Parallelogram {
    /// Open-region membership: strictly between the two boundary lines.
    pub fn contains(&self, x: &Dyadic, y: &Dyadic) -> bool {
        let shift = &self.slope * x;
        let t = y - &shift;
        self.base.contains_open(&t)
    }

    /// The open vertical extent `(lo, hi)` at abscissa `x`.
    pub fn y_bounds(&self, x: &Dyadic) -> (Dyadic, Dyadic) {
        let shift = &self.slope * x;
        (&self.base.left() + &shift, &self.base.right() + &shift)
    }
}

/// Monte-Carlo measure summary.
#[derive(Debug, Clone, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub hits: u64,
    pub samples: u64,
}

/// The union of parallelograms produced by one sticky map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KSet {
    pub parallelograms: Vec<Parallelogram>,
    pub height: u32,
}

impl KSet {
    /// Builds the union for a sticky map: one parallelogram per domain leaf,
    /// based at the leaf's interval, sheared by the left endpoint of the
    /// image interval.
    pub fn from_sticky(target: &DirTree, sigma: &StickyMap) -> Result<KSet, StickyError> {
        let h = sigma.height();
        let mut parallelograms = Vec::with_capacity(1 << h);
        for leaf in crate::bitstring::BitString::level(h) {
            let image = sigma.image(target, leaf)?;
            parallelograms.push(Parallelogram {
                base: leaf.interval(),
                slope: image.interval().left(),
            });
        }
        Ok(KSet {
            parallelograms,
            height: h,
        })
    }

    /// Open-union membership; points on any boundary line count only if they
    /// sit strictly inside some other parallelogram.
    pub fn contains(&self, x: &Dyadic, y: &Dyadic) -> bool {
        self.parallelograms.iter().any(|p| p.contains(x, y))
    }

    /// Exact area of the union inside the vertical strip `x0 <= x <= x1`.
    pub fn strip_measure_exact(&self, x0: &Dyadic, x1: &Dyadic) -> BigRational {
        sweep::union_strip_area(&self.parallelograms, x0, x1)
    }

    /// The vertical bounding range of the union over the strip, `None` for
    /// an empty set.
    pub fn y_range(&self, x0: &Dyadic, x1: &Dyadic) -> Option<(Dyadic, Dyadic)> {
        let mut lo: Option<Dyadic> = None;
        let mut hi: Option<Dyadic> = None;
        for p in &self.parallelograms {
            for x in [x0, x1] {
                let (a, b) = p.y_bounds(x);
                lo = Some(match lo {
                    Some(cur) => cur.min(a),
                    None => a,
                });
                hi = Some(match hi {
                    Some(cur) => cur.max(b),
                    None => b,
                });
            }
        }
        Some((lo?, hi?))
    }

    /// Monte-Carlo estimate of the strip area: uniform dyadic samples over
    /// the bounding box, two generator draws per sample (x then y).
    pub fn strip_measure_mc(&self, x0: &Dyadic, x1: &Dyadic, samples: u64, seed: u64) -> McEstimate {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (ylo, yhi) = match self.y_range(x0, x1) {
            Some(r) => r,
            None => {
                return McEstimate {
                    estimate: 0.0,
                    stderr: 0.0,
                    hits: 0,
                    samples,
                }
            }
        };
        let dx = x1 - x0;
        let dy = &yhi - &ylo;
        let mut hits = 0u64;
        for _ in 0..samples {
            let ux = Dyadic::new(i64::try_from(rng.next_u64() >> 11).expect("53 bits"), 53);
            let uy = Dyadic::new(i64::try_from(rng.next_u64() >> 11).expect("53 bits"), 53);
            let x = x0 + &(&dx * &ux);
            let y = &ylo + &(&dy * &uy);
            if self.contains(&x, &y) {
                hits += 1;
            }
        }
        let box_area = dx.to_f64() * dy.to_f64();
        let p = hits as f64 / samples as f64;
        McEstimate {
            estimate: p * box_area,
            stderr: box_area * (p * (1.0 - p) / samples as f64).sqrt(),
            hits,
            samples,
        }
    }

    /// Renders the union restricted to the strip as a standalone SVG
    /// document, one polygon per parallelogram, deterministic output.
    pub fn render_svg(&self, x0: &Dyadic, x1: &Dyadic, note: Option<&str>) -> String {
        let (ylo, yhi) = self
            .y_range(x0, x1)
            .unwrap_or((Dyadic::zero(), Dyadic::one()));
        let fx0 = x0.to_f64();
        let fx1 = x1.to_f64();
        let fy0 = ylo.to_f64();
        let fy1 = yhi.to_f64();
        let width = 640.0;
        let span_x = (fx1 - fx0).max(1e-9);
        let span_y = (fy1 - fy0).max(1e-9);
        let height = (width * span_y / span_x).clamp(80.0, 1600.0);
        let sx = width / span_x;
        let sy = height / span_y;
        let px = |x: f64| (x - fx0) * sx;
        let py = |y: f64| height - (y - fy0) * sy;
        let palette = [
            "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1",
            "#ff9da7",
        ];
        let mut out = String::new();
        out.push_str(&format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
             width=\"{width:.0}\" height=\"{height:.0}\" \
             viewBox=\"0 0 {width:.0} {height:.0}\">\n"
        ));
        if let Some(note) = note {
            out.push_str(&format!("  <desc>{}</desc>\n", xml_escape(note)));
        }
        out.push_str(&format!(
            "  <rect x=\"0\" y=\"0\" width=\"{width:.0}\" height=\"{height:.0}\" fill=\"#ffffff\"/>\n"
        ));
        for (i, p) in self.parallelograms.iter().enumerate() {
            let (a0, b0) = p.y_bounds(x0);
            let (a1, b1) = p.y_bounds(x1);
            let pts = [
                (px(fx0), py(a0.to_f64())),
                (px(fx0), py(b0.to_f64())),
                (px(fx1), py(b1.to_f64())),
                (px(fx1), py(a1.to_f64())),
            ];
            let list = pts
                .iter()
                .map(|(x, y)| format!("{x:.3},{y:.3}"))
                .collect::<Vec<_>>()
                .join(" ");
            let color = palette[i % palette.len()];
            out.push_str(&format!(
                "  <polygon points=\"{list}\" fill=\"{color}\" fill-opacity=\"0.35\" \
                 stroke=\"{color}\" stroke-width=\"0.8\"/>\n"
            ));
        }
        out.push_str("</svg>\n");
        out
    }
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
