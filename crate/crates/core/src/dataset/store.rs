//! On-disk layout:
//!
//! ```text
//! <root>/manifest.json
//! <root>/config.toml
//! <root>/<method>/kpis.csv
//! <root>/<method>/images.npy
//! <root>/<method>/labels.npy
//! <root>/<method>/images_f32.npy   (optional)
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::io::BufWriter;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::csv::{read_rows, write_rows, KpiRow};
use super::{npy, Dataset, Sample};
use crate::config::Config;
use crate::encoders::{fractal_dimension, ImagePatch, Method, CHANNELS};
use crate::error::{Error, Result};
use crate::kpi::{normalize, ClassMix, SliceType};

pub const FORMAT_VERSION: u32 = 1;
pub const MANIFEST: &str = "manifest.json";
pub const CONFIG: &str = "config.toml";
const KPIS: &str = "kpis.csv";
const IMAGES: &str = "images.npy";
const IMAGES_F32: &str = "images_f32.npy";
const LABELS: &str = "labels.npy";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub format_version: u32,
    pub master_seed: u64,
    pub sample_count: usize,
    pub class_mix: ClassMix,
    pub class_counts: BTreeMap<SliceType, usize>,
    pub methods: Vec<Method>,
    pub image_side: usize,
    pub float_images: bool,
    /// SHA-256 per file, keyed by path relative to the dataset root.
    pub checksums: BTreeMap<String, String>,
    pub config_digest: String,
    pub generator: String,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct WriteOptions {
    /// Allow writing into a non-empty directory.
    pub force: bool,
    /// Also export unquantized `<f4` images.
    pub float_images: bool,
}

fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn put(root: &Path, rel: &str, bytes: &[u8], sums: &mut BTreeMap<String, String>) -> Result<()> {
    let path = root.join(rel);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    sums.insert(rel.to_string(), sha256_hex(bytes));
    Ok(())
}

/// Exports every enabled method plus the manifest. Refuses to touch a
/// non-empty directory unless `opts.force` is set.
pub fn write_dataset(dataset: &Dataset, root: &Path, opts: WriteOptions) -> Result<DatasetManifest> {
    if dataset.is_empty() {
        return Err(Error::Usage("cannot export an empty dataset".into()));
    }
    if let Ok(mut entries) = fs::read_dir(root) {
        if entries.next().is_some() && !opts.force {
            return Err(Error::Usage(format!(
                "{} already exists and is not empty; pass --force to overwrite",
                root.display()
            )));
        }
    }
    fs::create_dir_all(root).map_err(|e| Error::io(root, e))?;

    let n = dataset.config.image_side;
    let count = dataset.len();
    let mut sums = BTreeMap::new();

    let mut csv = Vec::new();
    write_rows(
        &mut csv,
        dataset.samples.iter().map(|s| KpiRow {
            id: s.id,
            slice: s.slice,
            kpis: s.kpis,
        }),
    )?;
    let labels: Vec<u8> = dataset.samples.iter().map(|s| s.slice.code()).collect();
    let mut labels_npy = Vec::new();
    npy::write_u8(&mut labels_npy, &[count], &labels).expect("writing to memory cannot fail");

    for &method in dataset.methods() {
        let dir = root.join(method.name());
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let rel = |f: &str| format!("{}/{f}", method.name());

        let mut images = Vec::with_capacity(count * n * n * CHANNELS);
        for s in &dataset.samples {
            images.extend(patch(s, method)?.to_bytes());
        }
        let mut buf = BufWriter::new(Vec::new());
        npy::write_u8(&mut buf, &[count, n, n, CHANNELS], &images).expect("writing to memory cannot fail");
        put(root, &rel(IMAGES), &buf.into_inner().expect("in-memory flush"), &mut sums)?;

        if opts.float_images {
            let mut floats = Vec::with_capacity(images.len());
            for s in &dataset.samples {
                floats.extend_from_slice(patch(s, method)?.as_slice());
            }
            let mut buf = Vec::new();
            npy::write_f32(&mut buf, &[count, n, n, CHANNELS], &floats).expect("writing to memory cannot fail");
            put(root, &rel(IMAGES_F32), &buf, &mut sums)?;
        }

        put(root, &rel(KPIS), &csv, &mut sums)?;
        put(root, &rel(LABELS), &labels_npy, &mut sums)?;
    }

    let config_text = dataset.config.to_toml();
    let path = root.join(CONFIG);
    fs::write(&path, &config_text).map_err(|e| Error::io(&path, e))?;

    let counts = dataset.class_counts();
    let manifest = DatasetManifest {
        format_version: FORMAT_VERSION,
        master_seed: dataset.config.seed,
        sample_count: count,
        class_mix: dataset.config.class_mix,
        class_counts: SliceType::ALL.into_iter().map(|s| (s, counts[s.index()])).collect(),
        methods: dataset.methods().to_vec(),
        image_side: n,
        float_images: opts.float_images,
        checksums: sums,
        config_digest: dataset.config.digest(),
        generator: format!("slicegen {}", env!("CARGO_PKG_VERSION")),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest is always serializable") + "\n";
    let path = root.join(MANIFEST);
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn patch(s: &Sample, method: Method) -> Result<&ImagePatch> {
    s.images
        .get(&method)
        .ok_or_else(|| Error::Usage(format!("method `{method}` is not enabled for this dataset")))
}

fn read_checked(root: &Path, rel: &str, manifest: &DatasetManifest) -> Result<Vec<u8>> {
    let path = root.join(rel);
    let bytes = fs::read(&path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::integrity(rel, "file is missing"),
        _ => Error::io(&path, e),
    })?;
    let expected = manifest
        .checksums
        .get(rel)
        .ok_or_else(|| Error::integrity(rel, "no checksum recorded in manifest"))?;
    if &sha256_hex(&bytes) != expected {
        return Err(Error::integrity(rel, "checksum mismatch"));
    }
    Ok(bytes)
}

/// Loads and verifies a dataset directory. Images come back quantized to
/// 8 bits; normalized vectors are recomputed from the stored KPIs.
pub fn load_dataset(root: &Path) -> Result<Dataset> {
    let manifest_path = root.join(MANIFEST);
    let text = fs::read_to_string(&manifest_path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::integrity(MANIFEST, "file is missing"),
        _ => Error::io(&manifest_path, e),
    })?;
    let manifest: DatasetManifest =
        serde_json::from_str(&text).map_err(|e| Error::integrity(MANIFEST, e.to_string()))?;
    if manifest.format_version != FORMAT_VERSION {
        return Err(Error::integrity(
            MANIFEST,
            format!("unsupported format_version {}", manifest.format_version),
        ));
    }

    let config_path = root.join(CONFIG);
    let config_text = fs::read_to_string(&config_path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => Error::integrity(CONFIG, "file is missing"),
        _ => Error::io(&config_path, e),
    })?;
    let config = Config::from_toml(&config_text).map_err(|e| Error::integrity(CONFIG, e.to_string()))?;
    if config.digest() != manifest.config_digest {
        return Err(Error::integrity(CONFIG, "config digest does not match manifest"));
    }
    let consistent = config.seed == manifest.master_seed
        && config.methods == manifest.methods
        && config.image_side == manifest.image_side
        && config.class_mix == manifest.class_mix;
    if !consistent {
        return Err(Error::integrity(MANIFEST, "manifest disagrees with config.toml"));
    }

    let count = manifest.sample_count;
    let n = manifest.image_side;
    let mut rows: Option<Vec<KpiRow>> = None;
    let mut labels: Option<Vec<u8>> = None;
    let mut images = BTreeMap::new();

    for &method in &manifest.methods {
        let rel = |f: &str| format!("{}/{f}", method.name());

        let file = rel(KPIS);
        let r = read_rows(read_checked(root, &file, &manifest)?.as_slice(), &file)?;
        if r.len() != count {
            return Err(Error::integrity(file, format!("{} rows, manifest says {count}", r.len())));
        }
        if r.iter().enumerate().any(|(i, row)| row.id != i as u64) {
            return Err(Error::integrity(file, "ids are not 0..count in order"));
        }
        match &rows {
            Some(prev) if prev != &r => return Err(Error::integrity(file, "differs from other methods")),
            Some(_) => {}
            None => rows = Some(r),
        }

        let file = rel(LABELS);
        let arr = npy::read(read_checked(root, &file, &manifest)?.as_slice(), &file)?;
        if arr.dtype != npy::Dtype::U8 || arr.shape != [count] {
            return Err(Error::integrity(file, format!("expected u8 shape ({count},), got {:?}", arr.shape)));
        }
        match &labels {
            Some(prev) if prev != &arr.data => return Err(Error::integrity(file, "differs from other methods")),
            Some(_) => {}
            None => labels = Some(arr.data),
        }

        let file = rel(IMAGES);
        let arr = npy::read(read_checked(root, &file, &manifest)?.as_slice(), &file)?;
        if arr.dtype != npy::Dtype::U8 || arr.shape != [count, n, n, CHANNELS] {
            return Err(Error::integrity(
                file,
                format!("expected u8 shape ({count}, {n}, {n}, {CHANNELS}), got {:?}", arr.shape),
            ));
        }
        images.insert(method, arr.data);

        if manifest.float_images {
            let file = rel(IMAGES_F32);
            let arr = npy::read(read_checked(root, &file, &manifest)?.as_slice(), &file)?;
            if arr.dtype != npy::Dtype::F32 || arr.shape != [count, n, n, CHANNELS] {
                return Err(Error::integrity(file, format!("unexpected shape {:?}", arr.shape)));
            }
        }
    }

    let rows = rows.ok_or_else(|| Error::integrity(MANIFEST, "no methods listed"))?;
    let labels = labels.expect("set together with rows");
    let bounds = config.bounds();
    let patch_len = n * n * CHANNELS;
    let mut samples = Vec::with_capacity(count);
    for (i, row) in rows.into_iter().enumerate() {
        if labels[i] != row.slice.code() {
            return Err(Error::integrity(LABELS, format!("label of sample {i} disagrees with {KPIS}")));
        }
        let normalized = normalize(&row.kpis, &bounds);
        let images = images
            .iter()
            .map(|(&m, data)| Ok((m, ImagePatch::from_bytes(n, &data[i * patch_len..(i + 1) * patch_len])?)))
            .collect::<Result<_>>()?;
        samples.push(Sample {
            id: row.id,
            slice: row.slice,
            kpis: row.kpis,
            normalized,
            images,
            fractal_dimension: fractal_dimension(&normalized),
        });
    }

    let dataset = Dataset { config, samples };
    let counts = dataset.class_counts();
    for s in SliceType::ALL {
        if manifest.class_counts.get(&s) != Some(&counts[s.index()]) {
            return Err(Error::integrity(MANIFEST, format!("class count for {s} does not match data")));
        }
    }
    Ok(dataset)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::generate_dataset;

    fn dataset() -> Dataset {
        let cfg = Config {
            methods: vec![Method::Wallpaper, Method::Physical],
            ..Config::default()
        };
        generate_dataset(&cfg, 40, None).unwrap()
    }

    #[test]
    fn round_trip_preserves_labels_images_and_kpis() {
        let d = dataset();
        let dir = tempfile::tempdir().unwrap();
        let m = write_dataset(&d, dir.path(), WriteOptions::default()).unwrap();
        assert_eq!(m.checksums.len(), 6);
        let back = load_dataset(dir.path()).unwrap();
        assert_eq!(back.config.digest(), d.config.digest());
        assert_eq!(back.len(), d.len());
        for (a, b) in d.samples.iter().zip(&back.samples) {
            assert_eq!((a.id, a.slice), (b.id, b.slice));
            for m in d.methods() {
                assert_eq!(a.images[m].to_bytes(), b.images[m].to_bytes());
            }
            for (x, y) in a.kpis.values().iter().zip(b.kpis.values()) {
                match (x, y) {
                    (Some(x), Some(y)) => assert!((x - y).abs() <= 1e-5 * x.abs()),
                    (None, None) => {}
                    _ => panic!("missingness changed"),
                }
            }
        }
    }

    #[test]
    fn refuses_non_empty_directory_without_force() {
        let d = dataset();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&d, dir.path(), WriteOptions::default()).unwrap();
        let err = write_dataset(&d, dir.path(), WriteOptions::default()).unwrap_err();
        assert_eq!(err.kind(), "usage");
        write_dataset(&d, dir.path(), WriteOptions { force: true, ..Default::default() }).unwrap();
    }

    #[test]
    fn manifest_count_edit_is_caught() {
        let d = dataset();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&d, dir.path(), WriteOptions::default()).unwrap();
        let path = dir.path().join(MANIFEST);
        let mut m: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
        m["sample_count"] = serde_json::json!(41);
        fs::write(&path, m.to_string()).unwrap();
        assert_eq!(load_dataset(dir.path()).unwrap_err().kind(), "integrity");
    }

    #[test]
    fn missing_labels_file_is_named() {
        let d = dataset();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&d, dir.path(), WriteOptions::default()).unwrap();
        fs::remove_file(dir.path().join("physical/labels.npy")).unwrap();
        match load_dataset(dir.path()).unwrap_err() {
            Error::Integrity { file, .. } => assert!(file.contains("labels"), "{file}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn payload_byte_flip_is_caught() {
        let d = dataset();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&d, dir.path(), WriteOptions::default()).unwrap();
        let path = dir.path().join("wallpaper/images.npy");
        let mut bytes = fs::read(&path).unwrap();
        let last = bytes.len() - 1;
        bytes[last] ^= 1;
        fs::write(&path, bytes).unwrap();
        match load_dataset(dir.path()).unwrap_err() {
            Error::Integrity { file, .. } => assert_eq!(file, "wallpaper/images.npy"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_edit_breaks_digest() {
        let d = dataset();
        let dir = tempfile::tempdir().unwrap();
        write_dataset(&d, dir.path(), WriteOptions::default()).unwrap();
        let path = dir.path().join(CONFIG);
        let text = fs::read_to_string(&path).unwrap().replace("alpha = 0.15", "alpha = 0.2");
        fs::write(&path, text).unwrap();
        match load_dataset(dir.path()).unwrap_err() {
            Error::Integrity { file, .. } => assert_eq!(file, CONFIG),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn float_export_is_optional_and_checked() {
        let d = dataset();
        let dir = tempfile::tempdir().unwrap();
        let m = write_dataset(&d, dir.path(), WriteOptions { float_images: true, ..Default::default() }).unwrap();
        assert!(m.checksums.contains_key("wallpaper/images_f32.npy"));
        let arr = npy::read(fs::File::open(dir.path().join("wallpaper/images_f32.npy")).unwrap(), "f").unwrap();
        let floats = arr.as_f32().unwrap();
        assert_eq!(&floats[..16 * 16 * 3], d.samples[0].images[&Method::Wallpaper].as_slice());
        load_dataset(dir.path()).unwrap();
    }
}
