use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use super::Dataset;
use crate::encoders::{Method, CHANNELS};
use crate::error::{Error, Result};
use crate::kpi::SliceType;

pub const UPSCALE: usize = 8;

/// Writes a PNG grid of the first `rows * cols` patches, stably grouped by
/// slice type, into directory `out_dir`. The file name carries the method,
/// grid and per-class tile counts, e.g. `wallpaper_3x3_embb2_urllc1_miot6.png`.
pub fn render_montage(dataset: &Dataset, method: Method, rows: usize, cols: usize, out_dir: &Path) -> Result<PathBuf> {
    let cells = rows * cols;
    if cells == 0 {
        return Err(Error::Usage("montage grid must be at least 1x1".into()));
    }
    if cells > dataset.len() {
        return Err(Error::Usage(format!(
            "grid {rows}x{cols} needs {cells} samples, dataset has {}",
            dataset.len()
        )));
    }
    if !dataset.methods().contains(&method) {
        return Err(Error::Usage(format!("method `{method}` is not in this dataset")));
    }

    let mut tiles: Vec<_> = dataset.samples[..cells].iter().collect();
    tiles.sort_by_key(|s| s.slice.code());

    let n = dataset.config.image_side;
    let tile = n * UPSCALE;
    let (width, height) = (cols * tile, rows * tile);
    let mut pixels = vec![0u8; width * height * CHANNELS];
    for (k, s) in tiles.iter().enumerate() {
        let bytes = s.images[&method].to_bytes();
        let (ox, oy) = ((k % cols) * tile, (k / cols) * tile);
        for y in 0..tile {
            for x in 0..tile {
                let src = ((y / UPSCALE) * n + x / UPSCALE) * CHANNELS;
                let dst = ((oy + y) * width + ox + x) * CHANNELS;
                pixels[dst..dst + CHANNELS].copy_from_slice(&bytes[src..src + CHANNELS]);
            }
        }
    }

    let counts = SliceType::ALL.map(|t| tiles.iter().filter(|s| s.slice == t).count());
    let name = format!(
        "{method}_{rows}x{cols}_{}.png",
        SliceType::ALL
            .iter()
            .zip(counts)
            .map(|(t, k)| format!("{}{k}", t.name().to_lowercase()))
            .collect::<Vec<_>>()
            .join("_")
    );
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let path = out_dir.join(name);
    let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
    let mut enc = png::Encoder::new(BufWriter::new(file), width as u32, height as u32);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let png_err = |e: png::EncodingError| match e {
        png::EncodingError::IoError(io) => Error::io(&path, io),
        other => Error::Data(format!("png encoding failed: {other}")),
    };
    let mut w = enc.write_header().map_err(png_err)?;
    w.write_image_data(&pixels).map_err(png_err)?;
    w.finish().map_err(png_err)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Config;
    use crate::dataset::generate_dataset;

    fn dataset() -> Dataset {
        let cfg = Config {
            methods: vec![Method::Wallpaper],
            ..Config::default()
        };
        generate_dataset(&cfg, 20, None).unwrap()
    }

    fn decode(path: &Path) -> (u32, u32, Vec<u8>) {
        let dec = png::Decoder::new(std::io::BufReader::new(File::open(path).unwrap()));
        let mut r = dec.read_info().unwrap();
        let mut buf = vec![0; r.output_buffer_size().unwrap()];
        let info = r.next_frame(&mut buf).unwrap();
        buf.truncate(info.buffer_size());
        (info.width, info.height, buf)
    }

    #[test]
    fn three_by_three_is_384_square_and_grouped() {
        let d = dataset();
        let dir = tempfile::tempdir().unwrap();
        let path = render_montage(&d, Method::Wallpaper, 3, 3, dir.path()).unwrap();
        let (w, h, _) = decode(&path);
        assert_eq!((w, h), (384, 384));
        let mut codes: Vec<u8> = d.samples[..9].iter().map(|s| s.slice.code()).collect();
        codes.sort();
        let expect = format!(
            "wallpaper_3x3_embb{}_urllc{}_miot{}.png",
            codes.iter().filter(|&&c| c == 0).count(),
            codes.iter().filter(|&&c| c == 1).count(),
            codes.iter().filter(|&&c| c == 2).count()
        );
        assert_eq!(path.file_name().unwrap().to_str().unwrap(), expect);
    }

    #[test]
    fn single_tile_is_upscaled_patch() {
        let d = dataset();
        let dir = tempfile::tempdir().unwrap();
        let path = render_montage(&d, Method::Wallpaper, 1, 1, dir.path()).unwrap();
        let (w, _, px) = decode(&path);
        assert_eq!(w, 128);
        let patch = &d.samples[0].images[&Method::Wallpaper];
        for (x, y) in [(0, 0), (127, 127), (37, 90)] {
            for c in 0..3 {
                assert_eq!(px[(y * 128 + x) * 3 + c], crate::encoders::quantize(patch.get(x / 8, y / 8, c)));
            }
        }
    }

    #[test]
    fn deterministic_bytes() {
        let d = dataset();
        let dir = tempfile::tempdir().unwrap();
        let a = std::fs::read(render_montage(&d, Method::Wallpaper, 2, 3, &dir.path().join("a")).unwrap()).unwrap();
        let b = std::fs::read(render_montage(&dataset(), Method::Wallpaper, 2, 3, &dir.path().join("b")).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oversized_grid_is_usage_error() {
        let dir = tempfile::tempdir().unwrap();
        let err = render_montage(&dataset(), Method::Wallpaper, 5, 5, dir.path()).unwrap_err();
        assert_eq!(err.kind(), "usage");
    }
}
