#include "solar/checkpoint.hpp"
#include "solar/cli.hpp"
#include "solar/errors.hpp"
#include "solar/losses.hpp"
#include "solar/metrics.hpp"
#include "solar/pipeline.hpp"
#include "solar/soa.hpp"
#include "solar/store.hpp"

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace solar;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

FeatureMap to_feature_map(const Array& a) {
    if (a.ndim() != 3) throw ValidationError("feature maps must be (height, width, channels) arrays");
    const auto h = static_cast<int>(a.shape(0)), w = static_cast<int>(a.shape(1)), d = static_cast<int>(a.shape(2));
    Matrix m(static_cast<Eigen::Index>(h) * w, d);
    std::copy(a.data(), a.data() + a.size(), m.data());
    return FeatureMap(h, w, std::move(m));
}

Array from_feature_map(const FeatureMap& f) {
    Array out({f.height(), f.width(), f.channels()});
    std::copy(f.data().data(), f.data().data() + f.data().size(), out.mutable_data());
    return out;
}

Image to_image(const Array& a) {
    if (a.ndim() == 2) {
        Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), 1);
        std::copy(a.data(), a.data() + a.size(), img.pixels().begin());
        return img;
    }
    if (a.ndim() != 3) throw ValidationError("images must be (height, width) or (height, width, channels) arrays");
    Image img(static_cast<int>(a.shape(0)), static_cast<int>(a.shape(1)), static_cast<int>(a.shape(2)));
    std::copy(a.data(), a.data() + a.size(), img.pixels().begin());
    return img;
}

std::vector<Triplet> triplets_from(const Matrix& a, const Matrix& p, const Matrix& n) {
    if (a.rows() != p.rows() || a.rows() != n.rows() || a.cols() != p.cols() || a.cols() != n.cols()) {
        throw ValidationError("anchor, positive and negative arrays must share one shape");
    }
    std::vector<Triplet> ts;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        Triplet t;
        t.anchor = a.row(i).transpose();
        t.positive = p.row(i).transpose();
        t.negative = n.row(i).transpose();
        ts.push_back(std::move(t));
    }
    return ts;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Core operators of the solar toolkit";
    py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
    py::register_exception<IoError>(m, "IoError", PyExc_OSError);

    m.def(
        "gem_pool", [](const Array& f, double p) { return gem_pool(to_feature_map(f), GemParam(p)); }, py::arg("features"),
        py::arg("p") = kDefaultGemP, "Per-channel generalized mean of an (h, w, d) array.");
    m.def("attention_map", &attention_map, py::arg("q"), py::arg("k"), py::arg("alpha"),
          "Row-softmax of alpha * q^T k for (d_qk, N) query and key arrays.");
    m.def(
        "soa_forward",
        [](const Array& f, const Matrix& query, const Matrix& key, const Matrix& value, const Matrix& output,
           double alpha) {
            SoaParams params{query, key, value, output, alpha};
            SoaOutput out = soa_forward(to_feature_map(f), params);
            return py::make_tuple(from_feature_map(out.features), out.attention);
        },
        py::arg("features"), py::arg("query"), py::arg("key"), py::arg("value"), py::arg("output"), py::arg("alpha"),
        "Second-order attention block; returns (features, attention).");
    m.def(
        "fos_loss",
        [](const Matrix& a, const Matrix& p, const Matrix& n, double margin) {
            return fos_loss(triplets_from(a, p, n), margin);
        },
        py::arg("anchors"), py::arg("positives"), py::arg("negatives"), py::arg("margin") = kDefaultMargin);
    m.def(
        "sos_loss", [](const Matrix& a, const Matrix& p, const Matrix& n) { return sos_loss(triplets_from(a, p, n)); },
        py::arg("anchors"), py::arg("positives"), py::arg("negatives"));
    m.def(
        "total_loss",
        [](const Matrix& a, const Matrix& p, const Matrix& n, double margin, double lambda) {
            return total_loss(triplets_from(a, p, n), LossConfig{margin, lambda});
        },
        py::arg("anchors"), py::arg("positives"), py::arg("negatives"), py::arg("margin") = kDefaultMargin,
        py::arg("lam") = kDefaultLambda);
    m.def(
        "average_precision",
        [](const std::vector<std::string>& ranking, const std::set<std::string>& positives,
           const std::set<std::string>& junk) { return average_precision(ranking, positives, junk); },
        py::arg("ranking"), py::arg("positives"), py::arg("junk") = std::set<std::string>{},
        "AP after junk removal, or None without positives.");
    m.def(
        "fpr_at_95",
        [](std::vector<double> pos, std::vector<double> neg) { return fpr_at_95({std::move(pos), std::move(neg)}); },
        py::arg("positive"), py::arg("negative"));

    m.def(
        "read_store",
        [](const std::filesystem::path& path) {
            std::vector<std::pair<std::string, Vector>> out;
            for (auto& e : read_store(path)) out.emplace_back(std::move(e.name), std::move(e.values));
            return out;
        },
        py::arg("path"), "List of (name, vector) pairs.");
    m.def(
        "write_store",
        [](const std::filesystem::path& path, const std::vector<std::pair<std::string, Vector>>& entries) {
            std::vector<StoreEntry> es;
            for (const auto& [name, v] : entries) es.push_back({name, v});
            write_store(path, es);
        },
        py::arg("path"), py::arg("entries"));

    py::class_<DescriptorModel>(m, "Model")
        .def_static(
            "create",
            [](const std::string& backbone, const std::set<int>& soa, std::uint64_t seed) {
                const BackboneKind kind = parse_backbone_kind(backbone);
                return DescriptorModel::create(kind == BackboneKind::L2Net ? BackboneSpec::l2net(soa)
                                                                           : BackboneSpec::toy_fcn(soa),
                                               seed);
            },
            py::arg("backbone") = "toy_fcn", py::arg("soa") = std::set<int>{}, py::arg("seed") = 0)
        .def_static("load", &load_model, py::arg("path"))
        .def("save", [](const DescriptorModel& m, const std::filesystem::path& p) { save_model(p, m); }, py::arg("path"))
        .def_property(
            "p", [](const DescriptorModel& m) { return m.gem.value(); },
            [](DescriptorModel& m, double p) { m.gem.set(p); })
        .def_property_readonly("soa_insertions", [](const DescriptorModel& m) { return m.spec.soa_insertions; })
        .def_property_readonly("dim", [](const DescriptorModel& m) { return m.spec.descriptor_dim(); })
        .def(
            "descriptor",
            [](const DescriptorModel& m, const Array& image, std::optional<std::vector<double>> scales) {
                const Image img = to_image(image);
                if (m.spec.kind == BackboneKind::L2Net) return Vector(l2net_forward(img, m));
                const std::vector<double> s = scales ? *scales : std::vector<double>{1.0};
                return Vector(multi_scale_descriptor(img, m, s));
            },
            py::arg("image"), py::arg("scales") = py::none(), "Unit-norm descriptor of an image array in [0, 1].");

    m.def(
        "run_cli",
        [](const std::vector<std::string>& args) {
            std::ostringstream out, err;
            const int code = run_cli(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"), "Runs the command-line tool; returns (exit_code, stdout, stderr).");
    m.attr("DEFAULT_SCALES") = default_scales();
}
