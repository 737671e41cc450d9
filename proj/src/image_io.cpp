#include "solar/image_io.hpp"

#include "solar/errors.hpp"
#include "solar/fileutil.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>

namespace solar {

namespace {

std::mutex& registry_mutex() {
    static std::mutex m;
    return m;
}

std::map<std::string, ImageDecoder>& registry() {
    static std::map<std::string, ImageDecoder> decoders;
    return decoders;
}

std::string lower_extension(const std::filesystem::path& path) {
    std::string ext = path.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

// Next header token, skipping whitespace and '#' comments.
std::string next_token(std::istream& in, const std::filesystem::path& path) {
    std::string token;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!token.empty()) return token;
            continue;
        }
        token.push_back(static_cast<char>(ch));
    }
    if (token.empty()) throw IoError(path.string() + ": truncated PNM header");
    return token;
}

int header_int(std::istream& in, const std::filesystem::path& path) {
    const std::string token = next_token(in, path);
    try {
        std::size_t used = 0;
        const int value = std::stoi(token, &used);
        if (used != token.size() || value < 1) throw std::invalid_argument(token);
        return value;
    } catch (const std::exception&) {
        throw IoError(path.string() + ": bad PNM header field '" + token + "'");
    }
}

Image read_pnm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open image " + path.string());
    const std::string magic = next_token(in, path);
    int channels;
    if (magic == "P5") {
        channels = 1;
    } else if (magic == "P6") {
        channels = 3;
    } else {
        throw IoError(path.string() + ": unsupported PNM type '" + magic + "' (need P5 or P6)");
    }
    const int width = header_int(in, path);
    const int height = header_int(in, path);
    const int maxval = header_int(in, path);
    if (maxval > 65535) throw IoError(path.string() + ": maxval above 65535");
    // exactly one whitespace byte already consumed by next_token
    const int bytes = maxval < 256 ? 1 : 2;
    const std::size_t count = static_cast<std::size_t>(width) * height * channels;
    std::vector<unsigned char> raw(count * bytes);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(in.gcount()) != raw.size()) {
        throw IoError(path.string() + ": pixel data truncated");
    }
    Image image(height, width, channels);
    for (std::size_t i = 0; i < count; ++i) {
        const unsigned v = bytes == 1 ? raw[i] : (static_cast<unsigned>(raw[2 * i]) << 8) | raw[2 * i + 1];
        image.pixels()[i] = static_cast<double>(v) / maxval;
    }
    return image;
}

}  // namespace

Image read_image(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return read_pnm(path);
    ImageDecoder decoder;
    {
        std::lock_guard lock(registry_mutex());
        auto it = registry().find(ext);
        if (it != registry().end()) decoder = it->second;
    }
    if (!decoder) throw IoError("no decoder registered for '" + ext + "' (" + path.string() + ")");
    return decoder(path);
}

void write_image(const std::filesystem::path& path, const Image& image) {
    std::ostringstream out;
    out << (image.channels() == 1 ? "P5" : "P6") << "\n" << image.width() << " " << image.height() << "\n255\n";
    std::string data = out.str();
    for (double v : image.pixels()) {
        data.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0))));
    }
    write_file_atomic(path, data);
}

void register_image_decoder(const std::string& extension, ImageDecoder decoder) {
    std::lock_guard lock(registry_mutex());
    registry()[extension] = std::move(decoder);
}

bool is_image_file(const std::filesystem::path& path) {
    const std::string ext = lower_extension(path);
    if (ext == ".pgm" || ext == ".ppm" || ext == ".pnm") return true;
    std::lock_guard lock(registry_mutex());
    return registry().count(ext) > 0;
}

}  // namespace solar
