use super::image::Image;
use crate::error::{Error, Result};

/// Ordered (image, label) pairs plus the class vocabulary.
#[derive(Clone, Debug, PartialEq)]
pub struct LabeledDataset {
    items: Vec<(Image, usize)>,
    classes: Vec<String>,
}

impl LabeledDataset {
    pub fn new(items: Vec<(Image, usize)>, classes: Vec<String>) -> Result<Self> {
        if let Some((_, bad)) = items.iter().find(|(_, l)| *l >= classes.len()) {
            return Err(Error::Input(format!(
                "label {bad} out of range for {} classes",
                classes.len()
            )));
        }
        Ok(Self { items, classes })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn items(&self) -> &[(Image, usize)] {
        &self.items
    }

    pub fn image(&self, i: usize) -> &Image {
        &self.items[i].0
    }

    pub fn label(&self, i: usize) -> usize {
        self.items[i].1
    }

    pub fn labels(&self) -> Vec<usize> {
        self.items.iter().map(|(_, l)| *l).collect()
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    /// Label index reserved for "unknown" predictions: one past the last class.
    pub fn unknown_label(&self) -> usize {
        self.classes.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_range_checked() {
        let img = Image::filled(1, 1, [0; 3]);
        assert!(LabeledDataset::new(vec![(img.clone(), 1)], vec!["a".into()]).is_err());
        let ds = LabeledDataset::new(vec![(img, 0)], vec!["a".into()]).unwrap();
        assert_eq!(ds.len(), 1);
        assert_eq!(ds.unknown_label(), 1);
    }
}
