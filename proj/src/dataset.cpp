#include "finray/dataset.hpp"

#include "finray/errors.hpp"
#include "finray/imaging.hpp"
#include "finray/report.hpp"
#include "finray/rng.hpp"
#include "finray/synthetic.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>

namespace finray {

DatasetSplit split_dataset(const std::vector<DatasetItem>& items, double train_fraction, std::uint64_t seed) {
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw InvalidArgument("train_fraction must be in (0, 1)");
    if (items.empty()) throw EmptyClass("dataset has no items");

    std::map<std::string, std::vector<std::size_t>> by_class;
    for (std::size_t i = 0; i < items.size(); ++i) by_class[items[i].label].push_back(i);

    Rng rng(seed);
    std::vector<char> in_train(items.size(), 0);
    for (auto& [label, idx] : by_class) {
        const auto n_train = static_cast<std::size_t>(std::lround(train_fraction * static_cast<double>(idx.size())));
        if (n_train == 0)
            throw EmptyClass("class '" + label + "' has " + std::to_string(idx.size()) +
                             " item(s), none left for training");
        rng.shuffle(idx.begin(), idx.end());
        for (std::size_t k = 0; k < n_train; ++k) in_train[idx[k]] = 1;
    }

    DatasetSplit out;
    for (std::size_t i = 0; i < items.size(); ++i) (in_train[i] ? out.train : out.val).push_back(items[i]);
    return out;
}

std::vector<double> gradient_features(const RasterImage& image, int downsample) {
    if (downsample < 1) throw InvalidArgument("downsample must be >= 1");
    const int w = image.width, h = image.height;
    std::vector<double> gray(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    auto g = [&](int x, int y) -> double& { return gray[static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x)]; };
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            g(x, y) = (image.at(x, y, 0) + image.at(x, y, 1) + image.at(x, y, 2)) / (3.0 * 255.0);

    const int bw = (w + downsample - 1) / downsample, bh = (h + downsample - 1) / downsample;
    std::vector<double> feat(static_cast<std::size_t>(bw) * static_cast<std::size_t>(bh), 0.0);
    std::vector<int> count(feat.size(), 0);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) {
            // Central differences inside, one-sided at the border.
            const int x0 = std::max(x - 1, 0), x1 = std::min(x + 1, w - 1);
            const int y0 = std::max(y - 1, 0), y1 = std::min(y + 1, h - 1);
            const double gx = x1 > x0 ? (g(x1, y) - g(x0, y)) / (x1 - x0) : 0.0;
            const double gy = y1 > y0 ? (g(x, y1) - g(x, y0)) / (y1 - y0) : 0.0;
            const std::size_t b = static_cast<std::size_t>(y / downsample) * static_cast<std::size_t>(bw) +
                                  static_cast<std::size_t>(x / downsample);
            feat[b] += std::hypot(gx, gy);
            ++count[b];
        }
    for (std::size_t i = 0; i < feat.size(); ++i) feat[i] /= count[i];
    return feat;
}

namespace {

double sq_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return s;
}

}  // namespace

std::string CentroidModel::predict(const RasterImage& image) const {
    if (labels.empty()) throw EmptyTrainingSet("model has no classes");
    if (image.width != width || image.height != height)
        throw DimensionMismatch("model expects " + std::to_string(width) + "x" + std::to_string(height) +
                                " images, got " + std::to_string(image.width) + "x" + std::to_string(image.height));
    const auto f = gradient_features(image, downsample);
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < labels.size(); ++k) {
        const double d = sq_distance(f, centroids[k]);
        if (d < best_d) best_d = d, best = k;
    }
    return labels[best];
}

std::string CentroidModel::to_json() const {
    nlohmann::json j;
    j["type"] = "nearest_centroid";
    j["feature"] = "gradient_magnitude";
    j["downsample"] = downsample;
    j["width"] = width;
    j["height"] = height;
    j["labels"] = labels;
    j["centroids"] = centroids;
    return j.dump(1) + "\n";
}

CentroidModel CentroidModel::from_json(const std::string& text) {
    CentroidModel m;
    try {
        const auto j = nlohmann::json::parse(text);
        m.downsample = j.at("downsample").get<int>();
        m.width = j.at("width").get<int>();
        m.height = j.at("height").get<int>();
        m.labels = j.at("labels").get<std::vector<std::string>>();
        m.centroids = j.at("centroids").get<std::vector<std::vector<double>>>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("bad model file: ") + e.what());
    }
    if (m.labels.size() != m.centroids.size()) throw ParseError("model labels and centroids differ in count");
    if (m.downsample < 1 || m.width < 1 || m.height < 1) throw ParseError("model dimensions must be positive");
    const std::size_t n = gradient_features(RasterImage(m.width, m.height), m.downsample).size();
    for (const auto& c : m.centroids)
        if (c.size() != n) throw ParseError("model centroid length does not match its image size");
    return m;
}

void CentroidModel::save(const std::string& path) const { write_text_file(path, to_json()); }

CentroidModel CentroidModel::load(const std::string& path) {
    try {
        return from_json(read_text_file(path));
    } catch (Error& e) {
        e.add_context(path);
        throw;
    }
}

CentroidModel classify_fit(const std::vector<LabeledImage>& train, int downsample) {
    if (train.empty()) throw EmptyTrainingSet("no training images");
    CentroidModel m;
    m.downsample = downsample;
    m.width = train.front().image.width;
    m.height = train.front().image.height;

    std::map<std::string, std::pair<std::vector<double>, int>> sums;
    for (const auto& item : train) {
        if (item.image.width != m.width || item.image.height != m.height)
            throw DimensionMismatch("training images differ in size");
        const auto f = gradient_features(item.image, downsample);
        auto& [sum, n] = sums[item.label];
        if (sum.empty()) sum.assign(f.size(), 0.0);
        for (std::size_t i = 0; i < f.size(); ++i) sum[i] += f[i];
        ++n;
    }
    for (auto& [label, acc] : sums) {
        for (auto& v : acc.first) v /= acc.second;
        m.labels.push_back(label);
        m.centroids.push_back(std::move(acc.first));
    }
    return m;
}

std::string classify_predict(const CentroidModel& model, const RasterImage& image) { return model.predict(image); }

double accuracy(const CentroidModel& model, const std::vector<LabeledImage>& items) {
    if (items.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::size_t ok = 0;
    for (const auto& it : items) ok += model.predict(it.image) == it.label ? 1 : 0;
    return static_cast<double>(ok) / static_cast<double>(items.size());
}

LabeledSplit split_images(const std::vector<LabeledImage>& images, double train_fraction, std::uint64_t seed) {
    std::vector<DatasetItem> items;
    items.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) items.push_back({std::to_string(i), images[i].label});
    const DatasetSplit split = split_dataset(items, train_fraction, seed);
    LabeledSplit out;
    for (const auto& it : split.train) out.train.push_back(images[std::stoul(it.id)]);
    for (const auto& it : split.val) out.val.push_back(images[std::stoul(it.id)]);
    return out;
}

double permuted_label_accuracy(const std::vector<LabeledImage>& images, double train_fraction, int downsample,
                               std::uint64_t seed) {
    std::vector<std::string> labels;
    labels.reserve(images.size());
    for (const auto& im : images) labels.push_back(im.label);
    Rng rng(seed);
    rng.shuffle(labels.begin(), labels.end());
    std::vector<LabeledImage> shuffled = images;
    for (std::size_t i = 0; i < shuffled.size(); ++i) shuffled[i].label = labels[i];
    const LabeledSplit split = split_images(shuffled, train_fraction, rng.next());
    return accuracy(classify_fit(split.train, downsample), split.val);
}

std::vector<TextureClass> default_texture_classes() {
    return {{"tex_a", 0.2}, {"tex_b", 0.4}, {"tex_c", 0.7}, {"tex_d", 1.1}};
}

std::vector<LabeledImage> texture_corpus(const CorpusSettings& s, std::uint64_t seed) {
    if (s.per_class < 1) throw InvalidArgument("per_class must be >= 1");
    if (s.classes.empty()) throw InvalidArgument("corpus needs at least one class");
    Rng rng(seed);
    const double w_mm = (s.width - 1) * s.mm_per_pixel, h_mm = (s.height - 1) * s.mm_per_pixel;
    std::vector<LabeledImage> out;
    out.reserve(static_cast<std::size_t>(s.per_class) * s.classes.size());
    for (const auto& cls : s.classes)
        for (int i = 0; i < s.per_class; ++i) {
            SyntheticScene sc;
            sc.shape = SyntheticScene::Shape::textured;
            sc.frequency = cls.frequency;
            sc.amplitude = 0.5;
            // Relief covers the whole frame; the offset moves the pattern.
            sc.radius = std::hypot(w_mm, h_mm);
            sc.center = {rng.uniform(0.0, 1.0) * w_mm, rng.uniform(0.0, 1.0) * h_mm};
            sc.orientation_deg = rng.uniform(0.0, 180.0);
            sc.phase = rng.uniform(0.0, 2.0 * std::numbers::pi);
            sc.depth = rng.uniform(0.24, 0.30);
            sc.seed = rng.next();
            const auto r = render_synthetic(sc, s.width, s.height, s.mm_per_pixel);
            out.push_back({difference(r.pressed, r.reference).magnitude_image(), cls.label});
        }
    return out;
}

}  // namespace finray
