#include "solar/checkpoint.hpp"

#include "solar/errors.hpp"
#include "solar/fileutil.hpp"

#include <cstdio>
#include <sstream>

namespace solar {

namespace {

constexpr std::string_view kMagic = "SOLRCKPT";
constexpr std::uint32_t kVersion = 1;

std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

const NamedTensor* Container::find(const std::string& name) const {
    for (const NamedTensor& t : tensors) {
        if (t.name == name) return &t;
    }
    return nullptr;
}

std::string encode_container(const Container& c) {
    std::string out(kMagic);
    put_u32(out, kVersion);
    put_u32(out, static_cast<std::uint32_t>(c.header.size()));
    out += c.header;
    put_u32(out, static_cast<std::uint32_t>(c.tensors.size()));
    for (const NamedTensor& t : c.tensors) {
        std::size_t expected = 1;
        for (int d : t.shape) expected *= static_cast<std::size_t>(d);
        if (expected != t.values.size()) throw ValidationError("tensor '" + t.name + "' shape does not match its data");
        put_u16(out, static_cast<std::uint16_t>(t.name.size()));
        out += t.name;
        out.push_back(static_cast<char>(t.shape.size()));
        for (int d : t.shape) put_u32(out, static_cast<std::uint32_t>(d));
        for (float v : t.values) put_f32(out, v);
    }
    return out;
}

Container decode_container(std::string_view bytes, const std::string& source) {
    ByteReader in(bytes, source);
    if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
        in.fail("bad magic (expected \"SOLRCKPT\")", 0);
    }
    in.bytes(kMagic.size());
    const std::size_t version_at = in.offset();
    if (const auto v = in.u32(); v != kVersion) in.fail("unsupported checkpoint version " + std::to_string(v), version_at);
    Container c;
    c.header = std::string(in.bytes(in.u32()));
    const std::uint32_t count = in.u32();
    for (std::uint32_t i = 0; i < count; ++i) {
        NamedTensor t;
        t.name = std::string(in.bytes(in.u16()));
        const std::uint8_t rank = in.u8();
        std::size_t n = 1;
        for (std::uint8_t r = 0; r < rank; ++r) {
            t.shape.push_back(static_cast<int>(in.u32()));
            n *= static_cast<std::size_t>(t.shape.back());
        }
        if (n > bytes.size()) in.fail("tensor '" + t.name + "' larger than the file", in.offset());
        t.values.resize(n);
        for (float& v : t.values) v = in.f32();
        c.tensors.push_back(std::move(t));
    }
    if (!in.at_end()) in.fail("trailing bytes after the last tensor", in.offset());
    return c;
}

std::map<std::string, std::string> parse_header(const std::string& header) {
    std::map<std::string, std::string> out;
    std::istringstream in(header);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError("checkpoint header line without '=': " + line);
        out[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return out;
}

Container model_to_container(const DescriptorModel& model) {
    Container c;
    c.header = model.spec.to_text();
    for (const auto& [label, s] : model.soa) c.header += "soa_alpha." + std::to_string(label) + "=" + format_double(s.alpha) + "\n";
    DescriptorModel copy = model;
    for (const ParamView& v : parameter_views(copy)) {
        NamedTensor t{v.name, v.shape, {}};
        t.values.reserve(v.values.size());
        for (double x : v.values) t.values.push_back(static_cast<float>(x));
        c.tensors.push_back(std::move(t));
    }
    return c;
}

DescriptorModel model_from_container(const Container& c) {
    const BackboneSpec spec = BackboneSpec::from_text(c.header);
    DescriptorModel model = DescriptorModel::create(spec, 0);
    const auto header = parse_header(c.header);
    for (auto& [label, s] : model.soa) {
        auto it = header.find("soa_alpha." + std::to_string(label));
        if (it != header.end()) s.alpha = std::stod(it->second);
    }
    for (ParamView& v : parameter_views(model)) {
        const NamedTensor* t = c.find(v.name);
        if (!t) throw ValidationError("checkpoint is missing tensor '" + v.name + "'");
        if (t->shape != v.shape) throw ValidationError("checkpoint tensor '" + v.name + "' has the wrong shape");
        for (std::size_t i = 0; i < v.values.size(); ++i) v.values[i] = t->values[i];
    }
    model.gem.set(model.gem.value());
    model.validate();
    return model;
}

void write_container(const std::filesystem::path& path, const Container& c) { write_file_atomic(path, encode_container(c)); }

Container read_container(const std::filesystem::path& path) { return decode_container(read_file(path), path.string()); }

void save_model(const std::filesystem::path& path, const DescriptorModel& model) {
    write_container(path, model_to_container(model));
}

DescriptorModel load_model(const std::filesystem::path& path) { return model_from_container(read_container(path)); }

}  // namespace solar
