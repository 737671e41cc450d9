#pragma once

#include "solar/tensor.hpp"

#include <filesystem>
#include <functional>
#include <string>

namespace solar {

using ImageDecoder = std::function<Image(const std::filesystem::path&)>;

/// Reads binary PGM (P5) or PPM (P6), 8- or 16-bit. Other extensions go
/// through a registered decoder.
Image read_image(const std::filesystem::path& path);

/// P5 for grey images, P6 for colour; 8-bit.
void write_image(const std::filesystem::path& path, const Image& image);

/// Registers a decoder for a lower-case file extension such as ".png".
void register_image_decoder(const std::string& extension, ImageDecoder decoder);

bool is_image_file(const std::filesystem::path& path);

}  // namespace solar
