#pragma once

#include "solar/dataset.hpp"
#include "solar/mining.hpp"
#include "solar/network.hpp"

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace solar {

struct TrainConfig {
    int epochs = 50;
    int batch_size = 8;
    double lr = 1e-6;
    double lr_p = 1e-4;
    double decay = 0.01;  // lr(e) = lr * exp(-decay * e), e counted from 0
    LossConfig loss;
    MiningConfig mining = MiningConfig::desk_scale();
    bool freeze_backbone = true;
    bool train_soa = true;
    bool train_whitening = true;
    bool train_p = true;
    double val_fraction = 0.1;  // share of classes held out for model selection
    std::uint64_t seed = 0;

    void validate() const;

    /// Flat key=value form; the same keys are accepted by set().
    std::string to_text() const;
    /// Applies one setting. Returns false for an unknown key; throws on a
    /// malformed value.
    bool set(const std::string& key, const std::string& value);
};

/// Parses "key=value" lines ('#' starts a comment) into an ordered map.
std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& source);

struct EpochStats {
    int epoch = 0;  // 1-based
    double total = 0.0;
    double fos = 0.0;
    double sos = 0.0;
    double p = 0.0;
    double grad_norm = 0.0;  // mean over batches, trainable groups only
    double grad_p = 0.0;     // mean |dL/dp| over batches
    std::optional<double> val_loss;
    int batches = 0;
    int triplets = 0;
    double wall_seconds = 0.0;
    std::vector<std::string> warnings;  // not serialized

    std::string to_json() const;
    static EpochStats from_json(const std::string& line);
    /// Equality ignoring wall time.
    bool same_result(const EpochStats& other) const;
};

struct TrainReport {
    std::vector<EpochStats> epochs;
    int best_epoch = 0;  // 0 when no epoch ran or no validation split
    std::vector<std::string> warnings;

    std::string to_jsonl() const;
    bool same_result(const TrainReport& other) const;
};

/// Adam moments laid out like parameter_views(model).
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::int64_t step = 0;

    static AdamState zeros_like(const DescriptorModel& model);
};

/// Item indices used for optimisation and for validation; whole classes are
/// held out.
struct DataSplit {
    std::vector<std::size_t> train;
    std::vector<std::size_t> validation;
};

DataSplit split_classes(std::span<const int> labels, double val_fraction, std::uint64_t seed);

/// One epoch: descriptor refresh, anchor sampling and hard-negative mining,
/// then one optimizer step per batch of anchors. `epoch` is 1-based.
/// Throws ValidationError on a non-finite loss or update; parameters are
/// left as they were before the failing step.
EpochStats run_epoch(DescriptorModel& model, AdamState& opt, const LabeledImages& data,
                     std::span<const std::size_t> items, const TrainConfig& cfg, int epoch);

/// Held-out triplet loss: every validation item is an anchor with the next
/// item of its class as positive; negatives are mined over all items.
double validation_loss(const DescriptorModel& model, const LabeledImages& data,
                       std::span<const std::size_t> validation, const TrainConfig& cfg);

struct TrainOptions {
    /// Checkpoints go here every epoch; an existing state is resumed.
    std::filesystem::path checkpoint_dir;
    /// Called after each epoch's checkpoint; returning false stops training.
    std::function<bool(const EpochStats&)> on_epoch;
};

struct TrainResult {
    DescriptorModel model;  // lowest validation loss, or the last epoch without a split
    TrainReport report;
};

TrainResult train(DescriptorModel model, const LabeledImages& data, const TrainConfig& cfg,
                  const TrainOptions& options = {});

}  // namespace solar
