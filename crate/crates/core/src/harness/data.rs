use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::core::{Image, LabeledDataset};
use crate::error::{Error, Result};
use crate::synth::{ColorDatasetSpec, LeafDatasetSpec, Split};

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestItem {
    pub path: String,
    pub label: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub classes: Vec<String>,
    pub items: Vec<ManifestItem>,
}

impl Manifest {
    pub fn validate(&self) -> Result<()> {
        match self.items.iter().find(|it| it.label >= self.classes.len()) {
            Some(it) => Err(Error::Input(format!(
                "manifest item {} has label {} but only {} classes",
                it.path,
                it.label,
                self.classes.len()
            ))),
            None => Ok(()),
        }
    }
}

pub fn load_manifest(path: &Path) -> Result<Manifest> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let m: Manifest = serde_json::from_str(&text).map_err(|e| Error::Format {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    m.validate()?;
    Ok(m)
}

pub fn save_manifest(path: &Path, manifest: &Manifest) -> Result<()> {
    let json = serde_json::to_string_pretty(manifest)?;
    std::fs::write(path, json + "\n").map_err(|e| Error::io(path, e))
}

/// Random-access labelled images, produced on demand.
pub trait ImageSource: Sync {
    fn len(&self) -> usize;
    fn label(&self, index: usize) -> usize;
    fn image(&self, index: usize) -> Result<Image>;
    fn classes(&self) -> &[String];

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn labels(&self) -> Vec<usize> {
        (0..self.len()).map(|i| self.label(i)).collect()
    }
}

impl ImageSource for LabeledDataset {
    fn len(&self) -> usize {
        LabeledDataset::len(self)
    }

    fn label(&self, index: usize) -> usize {
        LabeledDataset::label(self, index)
    }

    fn image(&self, index: usize) -> Result<Image> {
        Ok(LabeledDataset::image(self, index).clone())
    }

    fn classes(&self) -> &[String] {
        LabeledDataset::classes(self)
    }
}

pub struct ColorSource {
    pub spec: ColorDatasetSpec,
    pub split: Split,
}

impl ImageSource for ColorSource {
    fn len(&self) -> usize {
        self.spec.len(self.split)
    }

    fn label(&self, index: usize) -> usize {
        self.spec.label(self.split, index)
    }

    fn image(&self, index: usize) -> Result<Image> {
        Ok(self.spec.item(self.split, index).0)
    }

    fn classes(&self) -> &[String] {
        &self.spec.classes
    }
}

/// Leaf labels depend on the rendered lesions, so they are computed once up
/// front.
pub struct LeafSource {
    spec: LeafDatasetSpec,
    split: Split,
    labels: Vec<usize>,
}

impl LeafSource {
    pub fn new(spec: LeafDatasetSpec, split: Split) -> Result<Self> {
        spec.validate()?;
        let labels = (0..spec.len(split))
            .into_par_iter()
            .map(|i| Ok(spec.item(split, i)?.1))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { spec, split, labels })
    }
}

impl ImageSource for LeafSource {
    fn len(&self) -> usize {
        self.labels.len()
    }

    fn label(&self, index: usize) -> usize {
        self.labels[index]
    }

    fn image(&self, index: usize) -> Result<Image> {
        Ok(self.spec.item(self.split, index)?.0)
    }

    fn classes(&self) -> &[String] {
        &self.spec.classes
    }
}

/// A directory of PPM files listed in `manifest.json`.
pub struct ManifestSource {
    dir: PathBuf,
    manifest: Manifest,
}

impl ManifestSource {
    pub fn open(dir: &Path) -> Result<Self> {
        let manifest = load_manifest(&dir.join(MANIFEST_FILE))?;
        Ok(Self {
            dir: dir.to_path_buf(),
            manifest,
        })
    }

    pub fn manifest(&self) -> &Manifest {
        &self.manifest
    }

    pub fn path(&self, index: usize) -> PathBuf {
        self.dir.join(&self.manifest.items[index].path)
    }
}

impl ImageSource for ManifestSource {
    fn len(&self) -> usize {
        self.manifest.items.len()
    }

    fn label(&self, index: usize) -> usize {
        self.manifest.items[index].label
    }

    fn image(&self, index: usize) -> Result<Image> {
        Image::read_ppm(&self.path(index))
    }

    fn classes(&self) -> &[String] {
        &self.manifest.classes
    }
}

pub fn item_file_name(index: usize) -> String {
    format!("img_{index:06}.ppm")
}

/// Writes every image of `source` (optionally transformed) as PPM plus a
/// manifest into `dir`.
pub fn write_dataset<F>(dir: &Path, source: &dyn ImageSource, transform: F) -> Result<Manifest>
where
    F: Fn(usize, Image) -> Result<Image> + Sync,
{
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let items = (0..source.len())
        .into_par_iter()
        .map(|i| {
            let img = transform(i, source.image(i)?)?;
            let name = item_file_name(i);
            img.write_ppm(&dir.join(&name))?;
            Ok(ManifestItem {
                path: name,
                label: source.label(i),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let manifest = Manifest {
        classes: source.classes().to_vec(),
        items,
    };
    save_manifest(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}
