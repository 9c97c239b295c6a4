//! Minimal raster renderer for the report artifacts: bar charts, curves,
//! heatmaps, and colored scatter plots, written as PNG files. Labels use a
//! built-in 5×7 bitmap font (lowercase letters, digits, and a few symbols);
//! the companion CSV reports remain the precise record.

use std::path::Path;

use anyhow::{Context, Result};

pub type Color = [u8; 3];

pub const BLACK: Color = [20, 20, 20];
pub const GRAY: Color = [170, 170, 170];
pub const BLUE: Color = [46, 98, 166];
pub const ORANGE: Color = [221, 132, 82];

pub struct Canvas {
    width: usize,
    height: usize,
    pixels: Vec<Color>,
}

impl Canvas {
    pub fn new(width: usize, height: usize) -> Canvas {
        Canvas {
            width,
            height,
            pixels: vec![[255, 255, 255]; width * height],
        }
    }

    pub fn set(&mut self, x: i64, y: i64, color: Color) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.pixels[y as usize * self.width + x as usize] = color;
        }
    }

    pub fn line(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, color: Color) {
        let (mut x, mut y) = (x0, y0);
        let dx = (x1 - x0).abs();
        let dy = -(y1 - y0).abs();
        let sx = if x0 < x1 { 1 } else { -1 };
        let sy = if y0 < y1 { 1 } else { -1 };
        let mut err = dx + dy;
        loop {
            self.set(x, y, color);
            if x == x1 && y == y1 {
                break;
            }
            let e2 = 2 * err;
            if e2 >= dy {
                err += dy;
                x += sx;
            }
            if e2 <= dx {
                err += dx;
                y += sy;
            }
        }
    }

    pub fn fill_rect(&mut self, x0: i64, y0: i64, x1: i64, y1: i64, color: Color) {
        for y in y0.min(y1)..=y0.max(y1) {
            for x in x0.min(x1)..=x0.max(x1) {
                self.set(x, y, color);
            }
        }
    }

    pub fn text(&mut self, x: i64, y: i64, s: &str, color: Color) {
        let mut cx = x;
        for ch in s.chars() {
            let glyph = glyph_for(ch.to_ascii_lowercase());
            for (row, bits) in glyph.iter().enumerate() {
                for col in 0..5 {
                    if bits & (0b10000 >> col) != 0 {
                        self.set(cx + col as i64, y + row as i64, color);
                    }
                }
            }
            cx += 6;
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut img = image::RgbImage::new(self.width as u32, self.height as u32);
        for (i, px) in self.pixels.iter().enumerate() {
            let x = (i % self.width) as u32;
            let y = (i / self.width) as u32;
            img.put_pixel(x, y, image::Rgb(*px));
        }
        img.save(path)
            .with_context(|| format!("writing {}", path.display()))
    }
}

/// 5×7 glyphs, one `u8` per row, low 5 bits used.
fn glyph_for(ch: char) -> [u8; 7] {
    match ch {
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        'a' => [0x00, 0x00, 0x0E, 0x01, 0x0F, 0x11, 0x0F],
        'b' => [0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x1E],
        'c' => [0x00, 0x00, 0x0E, 0x10, 0x10, 0x11, 0x0E],
        'd' => [0x01, 0x01, 0x0D, 0x13, 0x11, 0x11, 0x0F],
        'e' => [0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E],
        'f' => [0x06, 0x09, 0x08, 0x1C, 0x08, 0x08, 0x08],
        'g' => [0x00, 0x0F, 0x11, 0x11, 0x0F, 0x01, 0x0E],
        'h' => [0x10, 0x10, 0x16, 0x19, 0x11, 0x11, 0x11],
        'i' => [0x04, 0x00, 0x0C, 0x04, 0x04, 0x04, 0x0E],
        'j' => [0x02, 0x00, 0x06, 0x02, 0x02, 0x12, 0x0C],
        'k' => [0x10, 0x10, 0x12, 0x14, 0x18, 0x14, 0x12],
        'l' => [0x0C, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'm' => [0x00, 0x00, 0x1A, 0x15, 0x15, 0x15, 0x15],
        'n' => [0x00, 0x00, 0x16, 0x19, 0x11, 0x11, 0x11],
        'o' => [0x00, 0x00, 0x0E, 0x11, 0x11, 0x11, 0x0E],
        'p' => [0x00, 0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10],
        'q' => [0x00, 0x0F, 0x11, 0x11, 0x0F, 0x01, 0x01],
        'r' => [0x00, 0x00, 0x16, 0x19, 0x10, 0x10, 0x10],
        's' => [0x00, 0x00, 0x0F, 0x10, 0x0E, 0x01, 0x1E],
        't' => [0x08, 0x08, 0x1C, 0x08, 0x08, 0x09, 0x06],
        'u' => [0x00, 0x00, 0x11, 0x11, 0x11, 0x13, 0x0D],
        'v' => [0x00, 0x00, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'w' => [0x00, 0x00, 0x11, 0x11, 0x15, 0x15, 0x0A],
        'x' => [0x00, 0x00, 0x11, 0x0A, 0x04, 0x0A, 0x11],
        'y' => [0x00, 0x11, 0x11, 0x0F, 0x01, 0x11, 0x0E],
        'z' => [0x00, 0x00, 0x1F, 0x02, 0x04, 0x08, 0x1F],
        '_' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x1F],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        '+' => [0x00, 0x04, 0x04, 0x1F, 0x04, 0x04, 0x00],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        ',' => [0x00, 0x00, 0x00, 0x00, 0x0C, 0x04, 0x08],
        ':' => [0x00, 0x0C, 0x0C, 0x00, 0x0C, 0x0C, 0x00],
        '/' => [0x01, 0x01, 0x02, 0x04, 0x08, 0x10, 0x10],
        '(' => [0x02, 0x04, 0x08, 0x08, 0x08, 0x04, 0x02],
        ')' => [0x08, 0x04, 0x02, 0x02, 0x02, 0x04, 0x08],
        ' ' => [0; 7],
        _ => [0x1F, 0x11, 0x11, 0x11, 0x11, 0x11, 0x1F],
    }
}

fn format_tick(v: f64) -> String {
    if v == 0.0 {
        "0".to_string()
    } else if v.abs() >= 1000.0 || v.abs() < 0.01 {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Horizontal grouped bars: one or two values per named entry.
pub fn bar_chart(
    title: &str,
    entries: &[(String, Vec<(f64, Color)>)],
    path: &Path,
) -> Result<()> {
    let label_w = 140i64;
    let plot_w = 420i64;
    let bar_h = 10i64;
    let groups = entries.len().max(1) as i64;
    let per_group = entries.first().map_or(1, |e| e.1.len()).max(1) as i64;
    let group_h = bar_h * per_group + 8;
    let height = (30 + groups * group_h + 30) as usize;
    let width = (label_w + plot_w + 40) as usize;
    let mut canvas = Canvas::new(width, height);

    canvas.text(10, 8, title, BLACK);
    let lo = entries
        .iter()
        .flat_map(|e| e.1.iter().map(|(v, _)| *v))
        .fold(0.0f64, f64::min);
    let hi = entries
        .iter()
        .flat_map(|e| e.1.iter().map(|(v, _)| *v))
        .fold(0.0f64, f64::max);
    let span = (hi - lo).max(1e-12);
    let x_of = |v: f64| label_w + ((v - lo) / span * plot_w as f64) as i64;

    let zero_x = x_of(0.0);
    canvas.line(zero_x, 25, zero_x, height as i64 - 25, GRAY);

    for (g, (name, values)) in entries.iter().enumerate() {
        let top = 30 + g as i64 * group_h;
        canvas.text(6, top + group_h / 2 - 4, name, BLACK);
        for (i, (v, color)) in values.iter().enumerate() {
            let y0 = top + i as i64 * bar_h;
            canvas.fill_rect(zero_x.min(x_of(*v)), y0, zero_x.max(x_of(*v)), y0 + bar_h - 2, *color);
        }
    }
    canvas.text(label_w, height as i64 - 15, &format_tick(lo), BLACK);
    canvas.text(
        label_w + plot_w - 40,
        height as i64 - 15,
        &format_tick(hi),
        BLACK,
    );
    canvas.save(path)
}

/// A single x/y curve with markers.
pub fn curve(title: &str, points: &[(f64, f64)], path: &Path) -> Result<()> {
    let (width, height) = (520usize, 340usize);
    let (mx0, mx1, my0, my1) = (60i64, 490i64, 40i64, 300i64);
    let mut canvas = Canvas::new(width, height);
    canvas.text(10, 8, title, BLACK);
    if points.is_empty() {
        return canvas.save(path);
    }
    let x_lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y_lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y_hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let xs = (x_hi - x_lo).max(1e-12);
    let ys = (y_hi - y_lo).max(1e-12);
    let px = |x: f64| mx0 + ((x - x_lo) / xs * (mx1 - mx0) as f64) as i64;
    let py = |y: f64| my1 - ((y - y_lo) / ys * (my1 - my0) as f64) as i64;

    canvas.line(mx0, my1, mx1, my1, BLACK);
    canvas.line(mx0, my0, mx0, my1, BLACK);
    canvas.text(mx0, my1 + 8, &format_tick(x_lo), BLACK);
    canvas.text(mx1 - 40, my1 + 8, &format_tick(x_hi), BLACK);
    canvas.text(4, my1 - 6, &format_tick(y_lo), BLACK);
    canvas.text(4, my0 - 3, &format_tick(y_hi), BLACK);

    for pair in points.windows(2) {
        canvas.line(px(pair[0].0), py(pair[0].1), px(pair[1].0), py(pair[1].1), BLUE);
    }
    for (x, y) in points {
        canvas.fill_rect(px(*x) - 2, py(*y) - 2, px(*x) + 2, py(*y) + 2, ORANGE);
    }
    canvas.save(path)
}

/// Symmetric matrix heatmap with a blue–white–red scale over [−1, 1].
pub fn heatmap(title: &str, labels: &[String], matrix: &[Vec<f64>], path: &Path) -> Result<()> {
    let n = matrix.len().max(1);
    let cell = 18i64;
    let label_w = 110i64;
    let width = (label_w + cell * n as i64 + 30) as usize;
    let height = (40 + cell * n as i64 + 20) as usize;
    let mut canvas = Canvas::new(width, height);
    canvas.text(10, 8, title, BLACK);
    for (i, row) in matrix.iter().enumerate() {
        canvas.text(4, 40 + i as i64 * cell + 5, &labels[i], BLACK);
        for (j, &v) in row.iter().enumerate() {
            let t = v.clamp(-1.0, 1.0);
            let color: Color = if t >= 0.0 {
                let w = (255.0 * (1.0 - t)) as u8;
                [255, w, w]
            } else {
                let w = (255.0 * (1.0 + t)) as u8;
                [w, w, 255]
            };
            let x0 = label_w + j as i64 * cell;
            let y0 = 40 + i as i64 * cell;
            canvas.fill_rect(x0, y0, x0 + cell - 2, y0 + cell - 2, color);
        }
    }
    canvas.save(path)
}

/// Scatter of (x, y) points colored by a third value.
pub fn scatter(title: &str, points: &[(f64, f64, f64)], path: &Path) -> Result<()> {
    let (width, height) = (520usize, 460usize);
    let (mx0, mx1, my0, my1) = (50i64, 490i64, 40i64, 430i64);
    let mut canvas = Canvas::new(width, height);
    canvas.text(10, 8, title, BLACK);
    if points.is_empty() {
        return canvas.save(path);
    }
    let x_lo = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let x_hi = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    let y_lo = points.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let y_hi = points.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let c_lo = points.iter().map(|p| p.2).fold(f64::INFINITY, f64::min);
    let c_hi = points.iter().map(|p| p.2).fold(f64::NEG_INFINITY, f64::max);
    let xs = (x_hi - x_lo).max(1e-12);
    let ys = (y_hi - y_lo).max(1e-12);
    let cs = (c_hi - c_lo).max(1e-12);

    canvas.line(mx0, my1, mx1, my1, BLACK);
    canvas.line(mx0, my0, mx0, my1, BLACK);
    for (x, y, c) in points {
        let t = ((c - c_lo) / cs).clamp(0.0, 1.0);
        // Dark blue → teal → yellow ramp.
        let color: Color = [
            (40.0 + 215.0 * t) as u8,
            (40.0 + 180.0 * t) as u8,
            (120.0 * (1.0 - t) + 40.0) as u8,
        ];
        let px = mx0 + ((x - x_lo) / xs * (mx1 - mx0) as f64) as i64;
        let py = my1 - ((y - y_lo) / ys * (my1 - my0) as f64) as i64;
        canvas.fill_rect(px - 1, py - 1, px + 1, py + 1, color);
    }
    canvas.text(mx0, my1 + 8, &format_tick(x_lo), BLACK);
    canvas.text(mx1 - 40, my1 + 8, &format_tick(x_hi), BLACK);
    canvas.save(path)
}
