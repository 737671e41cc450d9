#include "doctest.h"
#include "solar/checkpoint.hpp"
#include "solar/dataset.hpp"
#include "solar/errors.hpp"
#include "solar/fileutil.hpp"
#include "solar/train.hpp"

#include <cmath>
#include <filesystem>
#include <unistd.h>

using namespace solar;

namespace {

// 5 classes x 3 training images at 32 px; small enough for many runs.
const LabeledImages& tiny_data() {
    static const LabeledImages data = generate_synthetic_benchmark(5, 6, 32, 21).train;
    return data;
}

TrainConfig tiny_config() {
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 4;
    cfg.lr = 1e-3;
    cfg.lr_p = 1e-2;
    cfg.mining.anchors_per_epoch = 8;
    cfg.mining.negatives_per_anchor = 2;
    cfg.mining.pool_size = 64;
    cfg.val_fraction = 0.2;
    cfg.seed = 4;
    return cfg;
}

DescriptorModel tiny_model(std::set<int> soa = {4, 5}) {
    return DescriptorModel::create(BackboneSpec::toy_fcn(std::move(soa), {8, 8, 8}), 17);
}

std::string bytes_of(const DescriptorModel& m) { return encode_container(model_to_container(m)); }

std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("solar_train_" + std::to_string(::getpid())) / name;
    std::filesystem::remove_all(dir);
    return dir;
}

}  // namespace

TEST_CASE("config keys roundtrip through text") {
    TrainConfig cfg;
    CHECK(cfg.lr == 1e-6);
    CHECK(cfg.lr_p == 1e-4);
    CHECK(cfg.batch_size == 8);
    CHECK(cfg.epochs == 50);
    CHECK(cfg.mining.anchors_per_epoch == 64);
    CHECK(cfg.mining.pool_size == 512);
    cfg.set("lambda", "0");
    cfg.set("freeze_backbone", "false");
    cfg.set("pool_size", "100");
    TrainConfig back;
    for (const auto& [k, v] : parse_key_values(cfg.to_text(), "text")) CHECK(back.set(k, v));
    CHECK(back.to_text() == cfg.to_text());
    CHECK_FALSE(back.set("nonsense", "1"));
    CHECK_THROWS_AS(back.set("lr", "fast"), ValidationError);
    CHECK_THROWS_AS(back.set("epochs", "2.5"), ValidationError);
    back.lr = 1.0;
    CHECK_THROWS_AS(back.validate(), ValidationError);
    CHECK_THROWS_AS(parse_key_values("novalue\n", "cfg"), ValidationError);
    CHECK(parse_key_values(" a = 1 # note\n\n#x=2\n", "cfg") == std::map<std::string, std::string>{{"a", "1"}});
}

TEST_CASE("class split holds out whole classes") {
    const std::vector<int> labels = {0, 0, 1, 1, 2, 2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8, 8, 9, 9};
    const DataSplit s = split_classes(labels, 0.1, 3);
    CHECK(s.validation.size() == 2);
    CHECK(labels[s.validation[0]] == labels[s.validation[1]]);
    CHECK(s.train.size() == 18);
    for (std::size_t i : s.train) CHECK(labels[i] != labels[s.validation[0]]);
    CHECK(split_classes(labels, 0.1, 3).validation == s.validation);
    CHECK(split_classes(labels, 0.0, 3).validation.empty());
    CHECK_THROWS_AS(split_classes(std::vector<int>{0, 0, 1, 1}, 0.5, 0), ValidationError);
}

TEST_CASE("zero epochs returns the input model") {
    TrainConfig cfg = tiny_config();
    cfg.epochs = 0;
    const auto model = tiny_model();
    const TrainResult r = train(model, tiny_data(), cfg);
    CHECK(bytes_of(r.model) == bytes_of(model));
    CHECK(r.report.epochs.empty());
}

TEST_CASE("training is deterministic and honours the frozen backbone") {
    const auto model = tiny_model();
    const TrainConfig cfg = tiny_config();
    const TrainResult a = train(model, tiny_data(), cfg);
    const TrainResult b = train(model, tiny_data(), cfg);
    CHECK(a.report.same_result(b.report));
    CHECK(bytes_of(a.model) == bytes_of(b.model));
    CHECK(a.report.epochs.size() == 3);
    for (std::size_t i = 0; i < model.conv.size(); ++i) {
        CHECK(a.model.conv[i].weight == model.conv[i].weight);
        CHECK(a.model.conv[i].bias == model.conv[i].bias);
    }
    CHECK(a.model.soa.at(5).output != model.soa.at(5).output);
    for (const EpochStats& e : a.report.epochs) {
        CHECK(std::isfinite(e.total));
        CHECK(e.p >= 1.0);
        CHECK(e.val_loss.has_value());
    }
    // the returned model is the epoch with the lowest validation loss
    double best = 1e300;
    int best_epoch = 0;
    for (const EpochStats& e : a.report.epochs) {
        if (*e.val_loss < best) {
            best = *e.val_loss;
            best_epoch = e.epoch;
        }
    }
    CHECK(a.report.best_epoch == best_epoch);
}

TEST_CASE("unfrozen training moves the backbone") {
    TrainConfig cfg = tiny_config();
    cfg.freeze_backbone = false;
    cfg.epochs = 1;
    cfg.val_fraction = 0.0;
    const auto model = tiny_model({});
    const TrainResult r = train(model, tiny_data(), cfg);
    CHECK(r.model.conv[0].weight != model.conv[0].weight);
    CHECK(r.report.best_epoch == 1);
}

TEST_CASE("a killed run resumes to the same result") {
    const auto model = tiny_model();
    const TrainConfig cfg = tiny_config();
    const auto straight_dir = scratch_dir("straight");
    const TrainResult straight = train(model, tiny_data(), cfg, {straight_dir, {}});

    const auto dir = scratch_dir("killed");
    TrainOptions kill{dir, [](const EpochStats& s) { return s.epoch < 1; }};
    const TrainResult partial = train(model, tiny_data(), cfg, kill);
    CHECK(partial.report.epochs.size() == 1);
    const TrainResult resumed = train(model, tiny_data(), cfg, {dir, {}});
    CHECK(resumed.report.same_result(straight.report));
    CHECK(bytes_of(resumed.model) == bytes_of(straight.model));
    CHECK(std::filesystem::exists(dir / "best.ckpt"));

    TrainConfig other = cfg;
    other.loss.margin = 0.5;
    CHECK_THROWS_AS(train(model, tiny_data(), other, {dir, {}}), ValidationError);
}

TEST_CASE("degenerate objective leaves parameters untouched") {
    // every image identical: all distances vanish and with m = 0 the hinge sits at its kink
    LabeledImages data;
    for (int c = 0; c < 5; ++c) {
        for (int i = 0; i < 3; ++i) {
            Image img(32, 32, 3);
            for (double& x : img.pixels()) x = 0.5;
            data.images.push_back(img);
            data.labels.push_back(c);
            data.ids.push_back("i" + std::to_string(c) + "_" + std::to_string(i));
        }
    }
    TrainConfig cfg = tiny_config();
    cfg.loss = {0.0, 0.0};
    cfg.freeze_backbone = false;
    const auto model = tiny_model();
    const TrainResult r = train(model, data, cfg);
    for (const EpochStats& e : r.report.epochs) CHECK(e.total == 0.0);
    CHECK(bytes_of(r.model) == bytes_of(model));
}

TEST_CASE("adversarial learning rate is rejected before parameters go non-finite") {
    TrainConfig cfg = tiny_config();
    cfg.lr = 1e300;
    cfg.lr_p = 1e300;
    DescriptorModel model = tiny_model();
    const std::string before = bytes_of(model);
    AdamState opt = AdamState::zeros_like(model);
    const DataSplit split = split_classes(tiny_data().labels, 0.2, 1);
    CHECK_THROWS_WITH_AS(run_epoch(model, opt, tiny_data(), split.train, cfg, 1), doctest::Contains("non-finite"),
                         ValidationError);
    CHECK(bytes_of(model) == before);
    CHECK(opt.step == 0);
}

TEST_CASE("p never drops below 1") {
    TrainConfig cfg = tiny_config();
    cfg.lr_p = 5.0;
    cfg.val_fraction = 0.0;
    DescriptorModel model = tiny_model({});
    model.gem.set(1.0);
    AdamState opt = AdamState::zeros_like(model);
    std::vector<std::size_t> items(tiny_data().size());
    for (std::size_t i = 0; i < items.size(); ++i) items[i] = i;
    for (int e = 1; e <= 3; ++e) {
        run_epoch(model, opt, tiny_data(), items, cfg, e);
        CHECK(model.gem.value() >= 1.0);
    }
}

TEST_CASE("frozen zero-psi SOA with lambda 0 trains exactly like plain GeM") {
    TrainConfig cfg = tiny_config();
    cfg.loss.lambda = 0.0;
    cfg.train_soa = false;
    cfg.train_whitening = false;
    cfg.freeze_backbone = false;
    const TrainResult with_soa = train(tiny_model({4, 5}), tiny_data(), cfg);
    const TrainResult plain = train(tiny_model({}), tiny_data(), cfg);
    REQUIRE(with_soa.report.epochs.size() == plain.report.epochs.size());
    for (std::size_t i = 0; i < plain.report.epochs.size(); ++i) {
        const EpochStats& a = with_soa.report.epochs[i];
        const EpochStats& b = plain.report.epochs[i];
        CHECK(a.total == b.total);
        CHECK(a.fos == b.fos);
        CHECK(a.total == a.fos);
        CHECK(a.p == b.p);
        CHECK(a.val_loss == b.val_loss);
    }
    for (std::size_t i = 0; i < plain.model.conv.size(); ++i) CHECK(with_soa.model.conv[i].weight == plain.model.conv[i].weight);
    CHECK(with_soa.model.whitening.weight == plain.model.whitening.weight);
    CHECK(with_soa.model.soa.at(4).output.isZero(0.0));
}

TEST_CASE("report lines roundtrip") {
    EpochStats s;
    s.epoch = 2;
    s.total = 0.1 + 0.2;
    s.p = 3.0000001;
    s.val_loss = 1.0 / 3.0;
    s.wall_seconds = 1.5;
    const EpochStats back = EpochStats::from_json(s.to_json());
    CHECK(back.same_result(s));
    CHECK(back.wall_seconds == 1.5);
    s.val_loss.reset();
    CHECK(EpochStats::from_json(s.to_json()).same_result(s));
    CHECK_THROWS_AS(EpochStats::from_json("{}"), IoError);
}

TEST_CASE("shipped desk config lowers the loss on the 8-class synthetic set") {
    TrainConfig cfg;
    const std::string path = std::string(SOLAR_SOURCE_DIR) + "/configs/desk_synthetic.conf";
    for (const auto& [k, v] : parse_key_values(read_file(path), path)) REQUIRE(cfg.set(k, v));
    cfg.epochs = 5;
    cfg.seed = 0;
    const SyntheticBenchmark bench = generate_synthetic_benchmark(8, 20, 64, 7);
    const auto model = DescriptorModel::create(BackboneSpec::toy_fcn(), 0);
    const TrainResult res = train(model, bench.train, cfg);
    REQUIRE(res.report.epochs.size() == 5);
    CHECK(res.report.epochs[4].total < res.report.epochs[0].total);
}
