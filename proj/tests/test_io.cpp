#include "doctest.h"
#include "solar/checkpoint.hpp"
#include "solar/errors.hpp"
#include "solar/fileutil.hpp"
#include "solar/ground_truth.hpp"
#include "solar/image_io.hpp"
#include "solar/store.hpp"
#include "support/oracles.hpp"

#include <filesystem>
#include <random>
#include <unistd.h>

using namespace solar;

namespace {

std::filesystem::path scratch(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("solar_io_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string golden_store() {
    const unsigned char bytes[] = {0x53, 0x4F, 0x4C, 0x52, 0x01, 0x00, 0x00, 0x00, 0x04, 0x00, 0x00, 0x00, 0x01,
                                   0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x01, 0x00, 0x61, 0x00, 0x00, 0x80,
                                   0x3F, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00};
    return std::string(reinterpret_cast<const char*>(bytes), sizeof(bytes));
}

}  // namespace

TEST_CASE("store golden bytes") {
    Vector v(4);
    v << 1, 0, 0, 0;
    const std::string bytes = encode_store({{"a", v}});
    CHECK(bytes.size() == 39);
    CHECK(bytes == golden_store());
    const auto back = decode_store(golden_store());
    REQUIRE(back.size() == 1);
    CHECK(back[0].name == "a");
    CHECK(back[0].values == v);
}

TEST_CASE("store roundtrip of 1000 random unit vectors through a file") {
    std::mt19937_64 rng(11);
    std::vector<StoreEntry> entries;
    for (int i = 0; i < 1000; ++i) {
        Vector v = oracle::random_unit(rng, 32);
        // float32 values are what the file holds
        for (Eigen::Index j = 0; j < v.size(); ++j) v[j] = static_cast<float>(v[j]);
        entries.push_back({"img_" + std::to_string(i), v});
    }
    const auto path = scratch("round.solr");
    write_store(path, entries);
    const auto back = read_store(path);
    REQUIRE(back.size() == entries.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back[i].name == entries[i].name);
        CHECK(back[i].values == entries[i].values);
    }
    CHECK(encode_store(back) == read_file(path));
}

TEST_CASE("store rejects corruption with byte offsets") {
    std::string bad = golden_store();
    bad[1] = 'X';
    CHECK_THROWS_WITH_AS(decode_store(bad), doctest::Contains("offset 0"), IoError);

    bad = golden_store();
    bad[4] = 2;
    CHECK_THROWS_WITH_AS(decode_store(bad), doctest::Contains("offset 4"), IoError);

    CHECK_THROWS_AS(decode_store(golden_store().substr(0, 30)), IoError);
    CHECK_THROWS_AS(decode_store(golden_store() + "x"), IoError);

    Vector v(2);
    v << 3, 4;
    CHECK_THROWS_AS(encode_store({{"a", v}}), ValidationError);
    Vector u(2);
    u << 1, 0;
    CHECK_THROWS_AS(encode_store({{"a", u}, {"a", u}}), ValidationError);
}

TEST_CASE("atomic write leaves no temp file and fails while locked") {
    const auto path = scratch("atomic.bin");
    write_file_atomic(path, "hello");
    CHECK(read_file(path) == "hello");
    CHECK_FALSE(std::filesystem::exists(path.string() + ".tmp"));
    CHECK_THROWS_AS(read_file(scratch("missing.bin")), IoError);
}

TEST_CASE("image roundtrip for grey and colour") {
    Image grey(5, 7, 1);
    Image rgb(4, 3, 3);
    for (std::size_t i = 0; i < grey.pixels().size(); ++i) grey.pixels()[i] = static_cast<double>(i % 256) / 255.0;
    for (std::size_t i = 0; i < rgb.pixels().size(); ++i) rgb.pixels()[i] = static_cast<double>((i * 37) % 256) / 255.0;
    write_image(scratch("g.pgm"), grey);
    write_image(scratch("c.ppm"), rgb);
    const Image g2 = read_image(scratch("g.pgm"));
    const Image c2 = read_image(scratch("c.ppm"));
    CHECK(g2.pixels() == grey.pixels());
    CHECK(c2.pixels() == rgb.pixels());
    CHECK(c2.channels() == 3);
    write_file_atomic(scratch("bad.pgm"), "P5\n4 4\n255\nabc");
    CHECK_THROWS_AS(read_image(scratch("bad.pgm")), IoError);
}

TEST_CASE("decoder hook handles other extensions") {
    register_image_decoder(".fake", [](const std::filesystem::path&) { return Image(32, 32, 1); });
    CHECK(is_image_file("x.fake"));
    CHECK(read_image("whatever.fake").height() == 32);
    CHECK_THROWS_AS(read_image(scratch("x.unknown")), IoError);
}

TEST_CASE("checkpoint roundtrip is byte exact and rebuilds the model") {
    auto model = DescriptorModel::create(BackboneSpec::toy_fcn({4, 5}), 5);
    model.gem.set(2.5);
    const auto path = scratch("model.ckpt");
    save_model(path, model);
    const DescriptorModel back = load_model(path);
    CHECK(back.spec == model.spec);
    CHECK(encode_container(model_to_container(back)) == read_file(path));
    CHECK(back.gem.value() == 2.5);
    for (std::size_t i = 0; i < model.conv.size(); ++i) CHECK(back.conv[i].weight == model.conv[i].weight);
    CHECK(back.soa.at(4).query == model.soa.at(4).query);
    CHECK(back.soa.at(5).alpha == model.soa.at(5).alpha);

    std::string bytes = read_file(path);
    bytes[0] = 'X';
    CHECK_THROWS_WITH_AS(decode_container(bytes), doctest::Contains("offset 0"), IoError);
    CHECK_THROWS_AS(decode_container(read_file(path).substr(0, 100)), IoError);

    auto l2 = DescriptorModel::create(BackboneSpec::l2net({3, 6}), 1);
    save_model(scratch("l2.ckpt"), l2);
    CHECK(load_model(scratch("l2.ckpt")).spec == l2.spec);
}

TEST_CASE("checkpoint rejects tensors that do not match the spec") {
    auto model = DescriptorModel::create(BackboneSpec::toy_fcn(), 1);
    Container c = model_to_container(model);
    c.tensors[0].shape[0] += 1;
    c.tensors[0].values.resize(c.tensors[0].values.size() + 27);
    CHECK_THROWS_AS(model_from_container(c), ValidationError);
}

namespace {

RetrievalGroundTruth toy_gt() {
    RetrievalGroundTruth gt;
    gt.queries.push_back({"q1", {1, 2, 30, 40}, {"e1", "e2"}, {"h1"}, {"j1"}});
    return gt;
}

}  // namespace

TEST_CASE("ground truth json roundtrip and validation") {
    const auto gt = toy_gt();
    const auto back = parse_ground_truth(ground_truth_to_json(gt));
    REQUIRE(back.queries.size() == 1);
    CHECK(back.queries[0].easy == gt.queries[0].easy);
    CHECK(back.queries[0].bbox.y1 == 40);
    CHECK(back.find("q1") != nullptr);
    CHECK(back.find("zz") == nullptr);

    auto overlap = gt;
    overlap.queries[0].hard.push_back("e1");
    CHECK_THROWS_AS(overlap.validate(), ValidationError);
    std::vector<std::string> db = {"e1", "e2", "h1"};
    CHECK_THROWS_AS(gt.validate(&db), ValidationError);
    CHECK_THROWS_AS(parse_ground_truth("{\"queries\": 3}"), IoError);
    CHECK_THROWS_AS(parse_ground_truth("not json"), IoError);
}

TEST_CASE("protocol split follows the revisited convention") {
    const auto q = toy_gt().queries[0];
    using S = std::set<std::string>;
    const auto easy = protocol_split(q, Protocol::Easy);
    CHECK(easy.positives == S{"e1", "e2"});
    CHECK(easy.junk == S{"h1", "j1"});
    const auto medium = protocol_split(q, Protocol::Medium);
    CHECK(medium.positives == S{"e1", "e2", "h1"});
    CHECK(medium.junk == S{"j1"});
    const auto hard = protocol_split(q, Protocol::Hard);
    CHECK(hard.positives == S{"h1"});
    CHECK(hard.junk == S{"e1", "e2", "j1"});
    for (Protocol p : kAllProtocols) {
        const auto s = protocol_split(q, p);
        S all = s.positives;
        for (const auto& j : s.junk) CHECK(all.insert(j).second);
        CHECK(all == S{"e1", "e2", "h1", "j1"});
    }
    CHECK(parse_protocol("hard") == Protocol::Hard);
    CHECK_THROWS_AS(parse_protocol("extreme"), ValidationError);
}
