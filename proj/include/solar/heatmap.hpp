#pragma once

#include "solar/network.hpp"

#include <filesystem>
#include <string>

namespace solar {

struct HeatmapRequest {
    std::string image_id;
    int x = 0;  // pixel column in input coordinates
    int y = 0;  // pixel row
    int insertion = 0;  // SOA label
};

struct Heatmap {
    Matrix raw;         // h x w attention row for the requested location
    Matrix normalized;  // raw min-max scaled to [0, 1]; a flat map becomes all ones
    Image upscaled;     // normalized, nearest-neighbour upscaled to the input size, grey
};

/// Attention of one input location at one SOA block. The location maps to
/// feature cell (y / stride, x / stride) by the cumulative stride at the
/// insertion, clamped to the map.
Heatmap attention_heatmap(const DescriptorModel& model, const Image& image, const HeatmapRequest& req);

/// Writes the upscaled heatmap as a binary graymap.
void export_attention_heatmap(const DescriptorModel& model, const Image& image, const HeatmapRequest& req,
                              const std::filesystem::path& path);

}  // namespace solar
