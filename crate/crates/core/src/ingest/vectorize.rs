use std::path::Path;
use std::str::FromStr;

use image::imageops::{self, FilterType};
use image::{DynamicImage, Rgb32FImage};
use rayon::prelude::*;
use serde::Serialize;

use super::{LabeledCollection, SourceRef};
use crate::knn::DataMatrix;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelPolicy {
    /// Unweighted mean of R, G and B.
    #[default]
    GrayscaleAverage,
    FirstChannel,
    /// R, G, B interleaved per pixel.
    KeepAllFlattened,
}

impl ChannelPolicy {
    pub fn channels(&self) -> usize {
        match self {
            ChannelPolicy::KeepAllFlattened => 3,
            _ => 1,
        }
    }
}

impl FromStr for ChannelPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grayscale_average" | "gray" => Ok(ChannelPolicy::GrayscaleAverage),
            "first_channel" | "first" => Ok(ChannelPolicy::FirstChannel),
            "keep_all_flattened" | "rgb" => Ok(ChannelPolicy::KeepAllFlattened),
            other => Err(Error::Usage(format!("unknown channel policy {other:?}"))),
        }
    }
}

/// Output pixel values always lie in `[0, 255]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PreprocessSpec {
    pub height: u32,
    pub width: u32,
    pub channels: ChannelPolicy,
}

impl Default for PreprocessSpec {
    fn default() -> Self {
        PreprocessSpec {
            height: 224,
            width: 224,
            channels: ChannelPolicy::GrayscaleAverage,
        }
    }
}

impl PreprocessSpec {
    pub fn row_len(&self) -> usize {
        self.height as usize * self.width as usize * self.channels.channels()
    }

    fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::Usage(format!(
                "target resolution must be at least 1x1, got {}x{}",
                self.height, self.width
            )));
        }
        Ok(())
    }
}

/// Decodes, resizes (bilinear) and flattens every image of the collection,
/// one row per item in collection order.
pub fn vectorize(coll: &LabeledCollection, spec: &PreprocessSpec) -> Result<DataMatrix<f64>> {
    spec.validate()?;
    let rows: Vec<Vec<f64>> = coll
        .items
        .par_iter()
        .map(|item| match &item.source {
            SourceRef::Path(p) => load_image(p, spec),
            SourceRef::Row(r) => Err(Error::InconsistentDims(format!(
                "item row:{r} refers to a matrix row; use vectorize_rows with the matrix"
            ))),
        })
        .collect::<Result<_>>()?;
    let mut values = Vec::with_capacity(rows.len() * spec.row_len());
    for r in rows {
        values.extend(r);
    }
    DataMatrix::new(coll.len(), spec.row_len(), values)
}

/// Selects the rows of `matrix` named by a `row,label` collection.
pub fn vectorize_rows(
    coll: &LabeledCollection,
    matrix: &DataMatrix<f64>,
) -> Result<DataMatrix<f64>> {
    let idx = coll
        .items
        .iter()
        .map(|item| match item.source {
            SourceRef::Row(r) => Ok(r),
            SourceRef::Path(ref p) => Err(Error::InconsistentDims(format!(
                "item {} is an image path, not a matrix row",
                p.display()
            ))),
        })
        .collect::<Result<Vec<_>>>()?;
    matrix.select_rows(&idx)
}

/// One preprocessed image as a flat `[0, 255]` vector.
pub fn load_image(path: &Path, spec: &PreprocessSpec) -> Result<Vec<f64>> {
    let unreadable = |reason: String| Error::UnreadableImage {
        path: path.to_path_buf(),
        reason,
    };
    let img = image::ImageReader::open(path)
        .map_err(|e| unreadable(e.to_string()))?
        .with_guessed_format()
        .map_err(|e| unreadable(e.to_string()))?
        .decode()
        .map_err(|e| unreadable(e.to_string()))?;
    Ok(flatten(&img, spec))
}

fn flatten(img: &DynamicImage, spec: &PreprocessSpec) -> Vec<f64> {
    let same_size = img.height() == spec.height && img.width() == spec.width;
    let eight_bit = matches!(
        img,
        DynamicImage::ImageLuma8(_)
            | DynamicImage::ImageLumaA8(_)
            | DynamicImage::ImageRgb8(_)
            | DynamicImage::ImageRgba8(_)
    );

    let rgb: Vec<[f64; 3]> = if same_size && eight_bit {
        // Exact integer intensities when no resampling is needed.
        img.to_rgb8().pixels().map(|p| p.0.map(f64::from)).collect()
    } else {
        let mut f: Rgb32FImage = img.to_rgb32f();
        if !same_size {
            f = imageops::resize(&f, spec.width, spec.height, FilterType::Triangle);
        }
        f.pixels()
            .map(|p| p.0.map(|v| (f64::from(v) * 255.0).clamp(0.0, 255.0)))
            .collect()
    };

    match spec.channels {
        ChannelPolicy::GrayscaleAverage => rgb.iter().map(|p| (p[0] + p[1] + p[2]) / 3.0).collect(),
        ChannelPolicy::FirstChannel => rgb.iter().map(|p| p[0]).collect(),
        ChannelPolicy::KeepAllFlattened => rgb.iter().flat_map(|p| p.iter().copied()).collect(),
    }
}
