//! Mask rasters, CSV dumps and atomic file writes.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use parobs_core::grid::{DensityField, Grid, GridKind};

/// Side of the Cartesian raster used for polar and radial grids.
pub const RASTER: usize = 512;

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> std::io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = std::path::PathBuf::from(tmp);
    {
        let mut f = std::fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::rename(&tmp, path)
}

fn pixel(v: f64) -> u8 {
    if v >= 0.5 {
        255
    } else {
        0
    }
}

/// Pixel rows of the mask: one pixel per cell on tensor grids, a
/// nearest-cell raster of the unit disk otherwise.
pub fn raster(mask: &DensityField, grid: &Grid) -> (usize, usize, Vec<u8>) {
    let v = &mask.values;
    match grid.kind {
        GridKind::Tensor { n, .. } => (n, v.len() / n, v.iter().map(|&x| pixel(x)).collect()),
        GridKind::Polar { n_r, n_theta } => disk_raster(|r, theta| {
            let ir = ((r * n_r as f64) as usize).min(n_r - 1);
            let it = ((theta / (2.0 * PI) * n_theta as f64) as usize).min(n_theta - 1);
            v[ir * n_theta + it]
        }),
        GridKind::Radial { n_r } => disk_raster(|r, _| v[((r * n_r as f64) as usize).min(n_r - 1)]),
    }
}

fn disk_raster(lookup: impl Fn(f64, f64) -> f64) -> (usize, usize, Vec<u8>) {
    let h = 2.0 / RASTER as f64;
    let mut out = Vec::with_capacity(RASTER * RASTER);
    for py in 0..RASTER {
        let y = 1.0 - (py as f64 + 0.5) * h;
        for px in 0..RASTER {
            let x = -1.0 + (px as f64 + 0.5) * h;
            let r = x.hypot(y);
            out.push(if r >= 1.0 {
                0
            } else {
                pixel(lookup(r, y.atan2(x).rem_euclid(2.0 * PI)))
            });
        }
    }
    (RASTER, RASTER, out)
}

/// Plain PGM ("P2") text for the mask.
pub fn pgm(mask: &DensityField, grid: &Grid) -> String {
    let (w, h, pixels) = raster(mask, grid);
    pgm_from_pixels(w, h, &pixels)
}

pub fn pgm_from_pixels(width: usize, height: usize, pixels: &[u8]) -> String {
    let mut s = format!("P2\n{width} {height}\n255\n");
    for row in pixels.chunks(width) {
        let line: Vec<String> = row.iter().map(|p| p.to_string()).collect();
        s.push_str(&line.join(" "));
        s.push('\n');
    }
    s
}

pub fn emit_pgm(mask: &DensityField, grid: &Grid, path: &Path) -> std::io::Result<()> {
    write_atomic(path, pgm(mask, grid).as_bytes())
}

/// Cell centers followed by the 0/1 mask value.
pub fn mask_csv(mask: &DensityField, grid: &Grid) -> String {
    let (header, coords) = match grid.kind {
        GridKind::Tensor { dim: 1, .. } | GridKind::Radial { .. } => {
            (if matches!(grid.kind, GridKind::Radial { .. }) { "r" } else { "x" }, 1)
        }
        GridKind::Tensor { dim: 2, .. } => ("x,y", 2),
        GridKind::Tensor { .. } => ("x,y,z", 3),
        GridKind::Polar { .. } => ("r,theta", 2),
    };
    let mut s = format!("{header},inside\n");
    for (c, &v) in grid.centers.iter().zip(&mask.values) {
        for x in &c[..coords] {
            let _ = write!(s, "{x},");
        }
        let _ = writeln!(s, "{}", u8::from(v >= 0.5));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use parobs_core::grid::{polar, tensor_grid};
    use parobs_core::spectral_basis::DomainKind;

    #[test]
    fn two_by_two_pgm() {
        let g = tensor_grid(2, 2);
        let m = DensityField::new(vec![1.0, 0.0, 0.0, 1.0]);
        assert_eq!(pgm(&m, &g), "P2\n2 2\n255\n255 0\n0 255\n");
    }

    #[test]
    fn polar_raster_is_dark_outside_the_disk() {
        let g = polar(DomainKind::Disk, 8, 8);
        let m = DensityField::new(vec![1.0; 64]);
        let (w, h, px) = raster(&m, &g);
        assert_eq!((w, h), (RASTER, RASTER));
        for py in 0..h {
            for qx in 0..w {
                let x = -1.0 + (qx as f64 + 0.5) * 2.0 / w as f64;
                let y = 1.0 - (py as f64 + 0.5) * 2.0 / h as f64;
                let expected = if x.hypot(y) >= 1.0 { 0 } else { 255 };
                assert_eq!(px[py * w + qx], expected);
            }
        }
    }

    #[test]
    fn polar_raster_places_the_first_sector() {
        let g = polar(DomainKind::Disk, 4, 4);
        let mut v = vec![0.0; 16];
        for ir in 0..4 {
            v[ir * 4] = 1.0;
        }
        let (w, _, px) = raster(&DensityField::new(v), &g);
        // theta in (0, pi/2) is the upper right quadrant
        assert_eq!(px[100 * w + 400], 255);
        assert_eq!(px[100 * w + 100], 0);
        assert_eq!(px[400 * w + 400], 0);
    }

    #[test]
    fn csv_lists_every_cell() {
        let g = tensor_grid(1, 4);
        let s = mask_csv(&DensityField::new(vec![0.0, 1.0, 1.0, 0.0]), &g);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], "x,inside");
        assert!(lines[2].ends_with(",1"));
    }

    #[test]
    fn atomic_write_replaces_content() {
        let dir = std::env::temp_dir().join(format!("parobs-out-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let p = dir.join("a.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read(&p).unwrap(), b"two");
        assert!(!dir.join("a.txt.tmp").exists());
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
