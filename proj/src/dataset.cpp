#include "solar/dataset.hpp"

#include "solar/errors.hpp"
#include "solar/fileutil.hpp"
#include "solar/image_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <unordered_set>

namespace solar {

void LabeledImages::validate() const {
    if (labels.size() != images.size() || ids.size() != images.size()) {
        throw ValidationError("labeled images: image, label and id counts differ");
    }
    std::unordered_set<std::string> seen(ids.begin(), ids.end());
    if (seen.size() != ids.size()) throw ValidationError("labeled images: duplicate ids");
}

namespace {

struct Grating {
    double frequency;  // cycles per pixel at zoom 1
    double angle;
    double phase;
    double amplitude;
    double colour[3];
};

struct Texture {
    std::vector<Grating> gratings;
    double base[3];
};

enum class Difficulty { Train, Easy, Hard, Junk, Query };

Texture make_texture(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Texture t;
    for (double& b : t.base) b = 0.35 + 0.3 * u(rng);
    const int count = 2 + static_cast<int>(rng() % 2);
    for (int g = 0; g < count; ++g) {
        Grating gr;
        gr.frequency = 0.04 + 0.18 * u(rng);
        gr.angle = M_PI * u(rng);
        gr.phase = 2.0 * M_PI * u(rng);
        gr.amplitude = 0.15 + 0.2 * u(rng);
        for (double& c : gr.colour) c = 0.3 + 0.7 * u(rng);
        t.gratings.push_back(gr);
    }
    return t;
}

struct Jitter {
    double zoom_lo, zoom_hi;
    double rotation;  // max absolute radians
    double gain;      // max relative brightness change
    double noise;
    double occlusion;  // occluded area fraction
    double clutter;    // area fraction showing another class's texture
};

Jitter jitter_for(Difficulty d) {
    switch (d) {
        case Difficulty::Easy:
        case Difficulty::Query: return {0.9, 1.1, 0.05, 0.1, 0.02, 0.0, 0.4};
        case Difficulty::Hard: return {0.7, 1.4, 0.35, 0.35, 0.06, 0.25, 0.55};
        case Difficulty::Junk: return {0.9, 1.1, 0.05, 0.1, 0.02, 0.5, 0.0};
        case Difficulty::Train: break;
    }
    return {0.75, 1.3, 0.3, 0.3, 0.05, 0.15, 0.45};
}

double texture_value(const Texture& t, double x, double y, int ch) {
    double v = t.base[ch];
    for (const Grating& g : t.gratings) {
        const double proj = x * std::cos(g.angle) + y * std::sin(g.angle);
        v += g.amplitude * g.colour[ch] * std::cos(2.0 * M_PI * g.frequency * proj + g.phase);
    }
    return v;
}

struct Rect {
    int x0 = 0, y0 = 0, x1 = 0, y1 = 0;
    bool contains(int c, int r) const { return c >= x0 && c < x1 && r >= y0 && r < y1; }
};

Rect random_square(double fraction, int size, std::mt19937_64& rng) {
    if (fraction <= 0.0) return {};
    const int w = static_cast<int>(std::lround(size * std::sqrt(fraction)));
    Rect r;
    r.x0 = static_cast<int>(rng() % static_cast<unsigned>(size - w + 1));
    r.y0 = static_cast<int>(rng() % static_cast<unsigned>(size - w + 1));
    r.x1 = r.x0 + w;
    r.y1 = r.y0 + w;
    return r;
}

// `distractor` fills the clutter area; for queries it is a strip of width
// `margin` along one side so the query box excludes it.
Image render(const Texture& t, const Texture& distractor, Difficulty d, int size, int margin, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Jitter j = jitter_for(d);
    const double zoom = j.zoom_lo + (j.zoom_hi - j.zoom_lo) * u(rng);
    const double rot = j.rotation * (2.0 * u(rng) - 1.0);
    const double gain = 1.0 + j.gain * (2.0 * u(rng) - 1.0);
    const double shift = 0.1 * j.gain * (2.0 * u(rng) - 1.0);
    const double dx = 1000.0 * u(rng);  // random crop of an unbounded texture
    const double dy = 1000.0 * u(rng);
    std::normal_distribution<double> noise(0.0, j.noise);

    // occluder: a grey rectangle covering the requested area fraction
    Rect occ;
    if (d == Difficulty::Junk) {
        // exactly half the image, left/right/top/bottom
        const int side = static_cast<int>(rng() % 4);
        occ.x1 = occ.y1 = size;
        if (side == 0) occ.x1 = size / 2;
        if (side == 1) occ.x0 = size - size / 2;
        if (side == 2) occ.y1 = size / 2;
        if (side == 3) occ.y0 = size - size / 2;
    } else {
        occ = random_square(j.occlusion, size, rng);
    }
    const double occluder = 0.2 + 0.6 * u(rng);

    Rect clutter;
    if (d == Difficulty::Query) {
        const int side = static_cast<int>(rng() % 4);
        clutter.x1 = clutter.y1 = size;
        if (side == 0) clutter.x1 = margin;
        if (side == 1) clutter.x0 = size - margin;
        if (side == 2) clutter.y1 = margin;
        if (side == 3) clutter.y0 = size - margin;
    } else {
        clutter = random_square(j.clutter, size, rng);
    }
    const double cdx = 1000.0 * u(rng);
    const double cdy = 1000.0 * u(rng);

    Image img(size, size, 3);
    const double cr = std::cos(rot), sr = std::sin(rot);
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            const bool hidden = occ.contains(c, r);
            const bool other = !hidden && clutter.contains(c, r);
            const double x = (cr * c - sr * r) / zoom + (other ? cdx : dx);
            const double y = (sr * c + cr * r) / zoom + (other ? cdy : dy);
            for (int ch = 0; ch < 3; ++ch) {
                double v = texture_value(other ? distractor : t, x, y, ch);
                v = hidden ? occluder : gain * v + shift;
                img.at(r, c, ch) = std::clamp(v + noise(rng), 0.0, 1.0);
            }
        }
    }
    return img;
}

std::string make_id(char prefix, int cls, int index) {
    char buf[32];
    if (index < 0) {
        std::snprintf(buf, sizeof(buf), "%c%02d", prefix, cls);
    } else {
        std::snprintf(buf, sizeof(buf), "%c%02d_%03d", prefix, cls, index);
    }
    return buf;
}

}  // namespace

SyntheticBenchmark generate_synthetic_benchmark(int n_classes, int per_class, int image_size, std::uint64_t seed) {
    if (n_classes < 2) throw ValidationError("synthetic benchmark needs at least 2 classes");
    if (per_class < 3) throw ValidationError("synthetic benchmark needs at least 3 images per class");
    if (image_size < 32) throw ValidationError("synthetic images must be at least 32 pixels");
    std::mt19937_64 rng(seed);
    std::vector<Texture> textures;
    for (int c = 0; c < n_classes; ++c) textures.push_back(make_texture(rng));

    const int n_eval = std::max(2, per_class / 2);
    const int n_train = per_class - n_eval;
    // query boxes trim an eighth per side but never below a 32 px crop
    const double margin = std::min(image_size / 8.0, (image_size - 32) / 2.0);
    const int strip = static_cast<int>(margin);
    auto distractor = [&](int c) -> const Texture& {
        return textures[(c + 1 + rng() % (n_classes - 1)) % n_classes];
    };

    SyntheticBenchmark bench;
    for (int c = 0; c < n_classes; ++c) {
        for (int i = 0; i < n_train; ++i) {
            bench.train.images.push_back(render(textures[c], distractor(c), Difficulty::Train, image_size, strip, rng));
            bench.train.labels.push_back(c);
            bench.train.ids.push_back(make_id('t', c, i));
        }
    }
    for (int c = 0; c < n_classes; ++c) {
        QueryGroundTruth q;
        q.id = make_id('q', c, -1);
        q.bbox = {margin, margin, image_size - margin, image_size - margin};
        bench.eval.queries.push_back(render(textures[c], distractor(c), Difficulty::Query, image_size, strip, rng));
        bench.eval.query_ids.push_back(q.id);
        for (int i = 0; i < n_eval - 1; ++i) {
            const Difficulty d = i % 3 == 0 ? Difficulty::Easy : i % 3 == 1 ? Difficulty::Hard : Difficulty::Junk;
            const std::string id = make_id('d', c, i);
            bench.eval.database.push_back(render(textures[c], distractor(c), d, image_size, strip, rng));
            bench.eval.database_ids.push_back(id);
            bench.database_labels.push_back(c);
            (d == Difficulty::Easy ? q.easy : d == Difficulty::Hard ? q.hard : q.junk).push_back(id);
        }
        bench.eval.gt.queries.push_back(std::move(q));
    }
    bench.eval.gt.validate(&bench.eval.database_ids);
    return bench;
}

namespace {

void write_labels(const std::filesystem::path& path, const std::vector<std::string>& ids, const std::vector<int>& labels) {
    std::string text;
    for (std::size_t i = 0; i < ids.size(); ++i) text += ids[i] + " " + std::to_string(labels[i]) + "\n";
    write_file_atomic(path, text);
}

std::map<std::string, int> read_labels(const std::filesystem::path& path) {
    std::istringstream in(read_file(path));
    std::map<std::string, int> labels;
    std::string id;
    int label;
    while (in >> id >> label) labels[id] = label;
    if (!in.eof()) throw IoError(path.string() + ": malformed label line");
    return labels;
}

}  // namespace

void write_benchmark(const std::filesystem::path& dir, const SyntheticBenchmark& bench) {
    for (const char* sub : {"train", "queries", "database"}) std::filesystem::create_directories(dir / sub);
    for (std::size_t i = 0; i < bench.train.size(); ++i) {
        write_image(dir / "train" / (bench.train.ids[i] + ".ppm"), bench.train.images[i]);
    }
    for (std::size_t i = 0; i < bench.eval.queries.size(); ++i) {
        write_image(dir / "queries" / (bench.eval.query_ids[i] + ".ppm"), bench.eval.queries[i]);
    }
    for (std::size_t i = 0; i < bench.eval.database.size(); ++i) {
        write_image(dir / "database" / (bench.eval.database_ids[i] + ".ppm"), bench.eval.database[i]);
    }
    write_labels(dir / "train_labels.txt", bench.train.ids, bench.train.labels);
    write_labels(dir / "database_labels.txt", bench.eval.database_ids, bench.database_labels);
    write_ground_truth(dir / "gt.json", bench.eval.gt);
}

std::vector<std::pair<std::string, std::filesystem::path>> list_images(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw IoError("not a directory: " + dir.string());
    std::vector<std::pair<std::string, std::filesystem::path>> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && is_image_file(entry.path())) {
            out.emplace_back(entry.path().stem().string(), entry.path());
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

LabeledImages read_training_set(const std::filesystem::path& dir) {
    const auto labels = read_labels(dir / "train_labels.txt");
    LabeledImages out;
    for (const auto& [id, path] : list_images(dir / "train")) {
        auto it = labels.find(id);
        if (it == labels.end()) throw IoError("no label for training image '" + id + "'");
        out.images.push_back(read_image(path));
        out.labels.push_back(it->second);
        out.ids.push_back(id);
    }
    out.validate();
    return out;
}

RetrievalBenchmark read_retrieval_benchmark(const std::filesystem::path& dir) {
    RetrievalBenchmark b;
    for (const auto& [id, path] : list_images(dir / "queries")) {
        b.query_ids.push_back(id);
        b.queries.push_back(read_image(path));
    }
    for (const auto& [id, path] : list_images(dir / "database")) {
        b.database_ids.push_back(id);
        b.database.push_back(read_image(path));
    }
    b.gt = read_ground_truth(dir / "gt.json");
    b.gt.validate(&b.database_ids);
    return b;
}

}  // namespace solar
