#pragma once

#include "finray/image.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace finray {

struct DatasetItem {
    std::string id;
    std::string label;
};

struct DatasetSplit {
    std::vector<DatasetItem> train;
    std::vector<DatasetItem> val;
};

/// Stratified split: each class keeps round(fraction * n) items for training.
/// Both halves preserve the input order. Throws EmptyClass when `items` is
/// empty or a class would get no training item.
DatasetSplit split_dataset(const std::vector<DatasetItem>& items, double train_fraction, std::uint64_t seed);

struct LabeledImage {
    RasterImage image;
    std::string label;
};

/// Gray-level gradient magnitude averaged over downsample x downsample blocks.
std::vector<double> gradient_features(const RasterImage& image, int downsample);

struct CentroidModel {
    int downsample = 4;
    int width = 0;
    int height = 0;
    std::vector<std::string> labels;             ///< sorted
    std::vector<std::vector<double>> centroids;  ///< parallel to labels

    /// Nearest centroid; the first label wins ties.
    std::string predict(const RasterImage& image) const;

    std::string to_json() const;
    static CentroidModel from_json(const std::string& text);
    void save(const std::string& path) const;
    static CentroidModel load(const std::string& path);
};

/// Throws EmptyTrainingSet, DimensionMismatch.
CentroidModel classify_fit(const std::vector<LabeledImage>& train, int downsample = 4);
std::string classify_predict(const CentroidModel& model, const RasterImage& image);
/// Fraction of `items` whose predicted label matches.
double accuracy(const CentroidModel& model, const std::vector<LabeledImage>& items);

struct LabeledSplit {
    std::vector<LabeledImage> train;
    std::vector<LabeledImage> val;
};

/// split_dataset applied to images, using their positions as ids.
LabeledSplit split_images(const std::vector<LabeledImage>& images, double train_fraction, std::uint64_t seed);

/// Permutation null: labels are shuffled across the whole set, then split,
/// fitted and scored against the shuffled validation labels.
double permuted_label_accuracy(const std::vector<LabeledImage>& images, double train_fraction, int downsample,
                               std::uint64_t seed);

// -----------------------------------------------------------------------------
// Texture corpus
// -----------------------------------------------------------------------------

struct TextureClass {
    std::string label;
    double frequency;  ///< cycles per mm
};

/// Four relief frequencies, well apart.
std::vector<TextureClass> default_texture_classes();

struct CorpusSettings {
    int per_class = 500;
    int width = 64;
    int height = 48;
    double mm_per_pixel = 0.1;
    std::vector<TextureClass> classes = default_texture_classes();
};

/// Difference images (magnitude rendered as RGB) of textured presses with
/// random placement, orientation, phase and depth. Items are ordered class by
/// class.
std::vector<LabeledImage> texture_corpus(const CorpusSettings& settings, std::uint64_t seed);

}  // namespace finray
