//! Raster pictures of covers in ℝ × ℚ_p and DOT output of system graphs.
//!
//! A box `I × B(c, p^-r)` is drawn as the rectangle spanned by `I`
//! horizontally and by the Cantor image of `B` vertically: the interval
//! starting at `cantor_embed(c)` of height `(p−1)/(b−1) · b^-r`, which
//! is `p^-r` for `b = p`.

use std::fmt::Write as _;

use crate::attractor::{default_seeds, iterate_cover, BoxCover};
use crate::error::{Error, Result};
use crate::gifs::{fixture, GifsGraph};
use crate::mixed_space::ProductBox;

pub type Rgb = [u8; 3];
/// Half-open pixel ranges `(columns, rows)`.
pub type PixelRect = ((usize, usize), (usize, usize));

pub const DARK_GRAY: Rgb = [96, 96, 96];
pub const LIGHT_GRAY: Rgb = [192, 192, 192];
pub const BLACK: Rgb = [0, 0, 0];
pub const WHITE: Rgb = [255, 255, 255];

#[derive(Clone, Debug, PartialEq)]
pub struct ImageSpec {
    pub width: usize,
    pub height: usize,
    pub x0: f64,
    pub x1: f64,
    /// Base of the Cantor embedding of the p-adic axis.
    pub base: u64,
    pub background: Rgb,
}

impl ImageSpec {
    pub fn new(width: usize, height: usize, x0: f64, x1: f64, base: u64) -> Result<Self> {
        let spec = ImageSpec { width, height, x0, x1, base, background: WHITE };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::InvalidArgument("image must have positive width and height".into()));
        }
        if !(self.x1 > self.x0) || !self.x0.is_finite() || !self.x1.is_finite() {
            return Err(Error::InvalidArgument(format!("bad real range [{}, {}]", self.x0, self.x1)));
        }
        Ok(())
    }
}

fn span(lo: f64, hi: f64, n: usize) -> (usize, usize) {
    let n_f = n as f64;
    let a = (lo * n_f).floor().clamp(0.0, n_f) as usize;
    let b = (hi * n_f).ceil().clamp(0.0, n_f) as usize;
    if b > a {
        (a, b)
    } else if a < n {
        (a, a + 1)
    } else {
        (n - 1, n)
    }
}

/// Pixel rectangle of a box; `None` if the
/// box lies left or right of the canvas.
pub fn box_pixels(b: &ProductBox, spec: &ImageSpec) -> Result<Option<PixelRect>> {
    let ([iv], [], [ball]) = (b.reals.as_slice(), b.complexes.as_slice(), b.balls.as_slice()) else {
        return Err(Error::Unsupported("only boxes in ℝ × ℚ_p can be rendered".into()));
    };
    let w = spec.x1 - spec.x0;
    let (lo, hi) = ((iv.lo - spec.x0) / w, (iv.hi - spec.x0) / w);
    if hi < 0.0 || lo > 1.0 {
        return Ok(None);
    }
    let p = ball.prime() as f64;
    let base = spec.base as f64;
    let y = ball.center.representative(ball.radius_exp).cantor_embed(spec.base)?;
    let h = (p - 1.0) / (base - 1.0) * base.powi(-(ball.radius_exp as i32));
    Ok(Some((span(lo, hi, spec.width), span(y, y + h, spec.height))))
}

/// Binary PPM of the layers, painted in order over the background.
pub fn render_cover(layers: &[(&[ProductBox], Rgb)], spec: &ImageSpec) -> Result<Vec<u8>> {
    spec.check()?;
    let mut pixels = vec![spec.background; spec.width * spec.height];
    for (boxes, color) in layers {
        for b in *boxes {
            if let Some(((c0, c1), (r0, r1))) = box_pixels(b, spec)? {
                for r in r0..r1 {
                    // row 0 is the top of the image
                    let row = spec.height - 1 - r;
                    pixels[row * spec.width + c0..row * spec.width + c1].fill(*color);
                }
            }
        }
    }
    let mut out = format!("P6\n{} {}\n255\n", spec.width, spec.height).into_bytes();
    out.extend(pixels.iter().flatten());
    Ok(out)
}

/// Width, height and RGB pixels of a PPM written by [`render_cover`].
pub fn decode_ppm(bytes: &[u8]) -> Result<(usize, usize, Vec<Rgb>)> {
    let bad = || Error::Malformed("not a binary PPM".into());
    let mut fields = Vec::new();
    let mut pos = 0;
    while fields.len() < 4 {
        while pos < bytes.len() && bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        let start = pos;
        while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(bad());
        }
        fields.push(std::str::from_utf8(&bytes[start..pos]).map_err(|_| bad())?);
    }
    let num = |s: &str| s.parse::<usize>().map_err(|_| bad());
    if fields[0] != "P6" || num(fields[3])? != 255 {
        return Err(bad());
    }
    let (w, h) = (num(fields[1])?, num(fields[2])?);
    let data = &bytes[pos + 1..];
    if data.len() != 3 * w * h {
        return Err(bad());
    }
    Ok((w, h, data.chunks(3).map(|c| [c[0], c[1], c[2]]).collect()))
}

/// Smallest real range holding every box, widened by 2% on each side.
pub fn fit_range<'a>(boxes: impl IntoIterator<Item = &'a ProductBox>) -> Option<(f64, f64)> {
    let (lo, hi) = boxes
        .into_iter()
        .flat_map(|b| b.reals.first())
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), iv| (lo.min(iv.lo), hi.max(iv.hi)));
    (hi > lo).then(|| {
        let pad = 0.02 * (hi - lo);
        (lo - pad, hi + pad)
    })
}

/// Covers of the two tiles and of the boundary pieces at one depth.
pub struct FigureCovers {
    pub tiles: BoxCover,
    pub boundary: BoxCover,
}

pub fn figure_covers(depth: usize) -> Result<FigureCovers> {
    let main = fixture("main")?;
    let bd = fixture("boundary")?;
    Ok(FigureCovers {
        tiles: iterate_cover(&main, &default_seeds(&main), depth)?,
        boundary: iterate_cover(&bd, &default_seeds(&bd), depth)?,
    })
}

/// The tiles in dark and light gray with their boundary in black.
pub fn render_figure(covers: &FigureCovers, width: usize, height: usize) -> Result<Vec<u8>> {
    let (x0, x1) = fit_range(covers.tiles.all()).ok_or_else(|| Error::InvalidArgument("empty cover".into()))?;
    let spec = ImageSpec::new(width, height, x0, x1, 2)?;
    let boundary: Vec<ProductBox> = covers.boundary.all().cloned().collect();
    let layers: Vec<(&[ProductBox], Rgb)> =
        vec![(&covers.tiles.boxes[0], DARK_GRAY), (&covers.tiles.boxes[1], LIGHT_GRAY), (&boundary, BLACK)];
    render_cover(&layers, &spec)
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

/// Graphviz digraph: vertices in order, then edges by index.
pub fn emit_dot(g: &GifsGraph) -> String {
    let mut out = String::from("digraph G {\n");
    for v in g.vertices() {
        let _ = writeln!(out, "  {};", quote(v));
    }
    for e in g.edges() {
        let _ = writeln!(
            out,
            "  {} -> {} [label={}];",
            quote(&g.vertices()[e.from]),
            quote(&g.vertices()[e.to]),
            quote(&e.name)
        );
    }
    out.push_str("}\n");
    out
}
