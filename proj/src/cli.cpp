#include "solar/cli.hpp"

#include "solar/checkpoint.hpp"
#include "solar/dataset.hpp"
#include "solar/errors.hpp"
#include "solar/evaluate.hpp"
#include "solar/fileutil.hpp"
#include "solar/heatmap.hpp"
#include "solar/image_io.hpp"
#include "solar/pipeline.hpp"
#include "solar/selfcheck.hpp"
#include "solar/store.hpp"
#include "solar/train.hpp"

#include <CLI11.hpp>

#include <ostream>
#include <sstream>

namespace solar {

namespace {

std::vector<double> parse_list(const std::string& text, const char* what) {
    std::vector<double> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size()) throw ValidationError(std::string("bad value in ") + what + ": '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ValidationError(std::string(what) + " is empty");
    return out;
}

std::set<int> parse_labels(const std::string& text) {
    std::set<int> out;
    if (text.empty() || text == "none") return out;
    for (double v : parse_list(text, "SOA insertion list")) {
        if (v != std::floor(v)) throw ValidationError("SOA insertions must be integers");
        out.insert(static_cast<int>(v));
    }
    return out;
}

std::vector<double> scales_or_default(const std::string& text) {
    return text.empty() ? default_scales() : parse_list(text, "--scales");
}

struct TrainJob {
    TrainConfig cfg;
    std::string data;
    std::string out;
    std::string init;
    std::set<int> soa;
    std::uint64_t model_seed = 0;

    void set(const std::string& key, const std::string& value) {
        if (cfg.set(key, value)) return;
        if (key == "data") data = value;
        else if (key == "out") out = value;
        else if (key == "init") init = value;
        else if (key == "soa") soa = parse_labels(value);
        else if (key == "model_seed") model_seed = std::stoull(value);
        else throw ValidationError("unknown setting '" + key + "'");
    }
};

int cmd_train(const std::string& config, const std::vector<std::string>& overrides, TrainJob job, std::ostream& out) {
    if (!config.empty()) {
        for (const auto& [k, v] : parse_key_values(read_file(config), config)) job.set(k, v);
    }
    for (const std::string& kv : overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
        job.set(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (job.data.empty() || job.out.empty()) throw ValidationError("train needs a data directory and an output directory");
    job.cfg.validate();
    const LabeledImages data = read_training_set(job.data);
    DescriptorModel model = job.init.empty() ? DescriptorModel::create(BackboneSpec::toy_fcn(job.soa), job.model_seed)
                                             : load_model(job.init);
    for (int label : job.soa) {
        if (!model.soa.count(label)) model.insert_soa(label, job.model_seed * 1000003ULL + label);
    }
    TrainOptions options;
    options.checkpoint_dir = job.out;
    options.on_epoch = [&](const EpochStats& s) {
        out << "epoch " << s.epoch << " total " << s.total << " fos " << s.fos << " sos " << s.sos << " p " << s.p;
        if (s.val_loss) out << " val " << *s.val_loss;
        out << "\n";
        return true;
    };
    const TrainResult r = train(model, data, job.cfg, options);
    save_model(std::filesystem::path(job.out) / "model.ckpt", r.model);
    for (const std::string& w : r.report.warnings) out << "warning: " << w << "\n";
    out << "best epoch " << r.report.best_epoch << ", model written to "
        << (std::filesystem::path(job.out) / "model.ckpt").string() << "\n";
    return 0;
}

int cmd_extract(const std::string& model_path, const std::string& images, const std::string& store,
                const std::string& scales_text, const std::string& bbox_gt, std::ostream& out) {
    const DescriptorModel model = load_model(model_path);
    const std::vector<double> scales = scales_or_default(scales_text);
    RetrievalGroundTruth gt;
    if (!bbox_gt.empty()) gt = read_ground_truth(bbox_gt);
    std::vector<Image> imgs;
    std::vector<std::string> ids;
    for (const auto& [id, path] : list_images(images)) {
        Image img = read_image(path);
        if (const QueryGroundTruth* q = gt.find(id)) img = crop(img, q->bbox);
        imgs.push_back(std::move(img));
        ids.push_back(id);
    }
    if (imgs.empty()) throw ValidationError("no images found in " + images);
    const Matrix desc = extract_descriptors(imgs, model, scales);
    std::vector<StoreEntry> entries;
    for (std::size_t i = 0; i < ids.size(); ++i) entries.push_back({ids[i], desc.row(static_cast<Eigen::Index>(i)).transpose()});
    write_store(store, entries);
    out << "wrote " << entries.size() << " descriptors of dimension " << desc.cols() << " to " << store << "\n";
    return 0;
}

int cmd_evaluate(const std::string& db_path, const std::string& query_path, const std::string& gt_path,
                 const std::string& protocol, const std::string& report, std::ostream& out) {
    const auto db = read_store(db_path);
    const RetrievalGroundTruth gt = read_ground_truth(gt_path);
    const auto queries = query_path.empty() ? db : read_store(query_path);
    std::vector<std::string> db_ids;
    for (const auto& e : db) db_ids.push_back(e.name);
    gt.validate(&db_ids);

    std::vector<RankedResult> results;
    for (const QueryGroundTruth& q : gt.queries) {
        const StoreEntry* qe = nullptr;
        for (const auto& e : queries) {
            if (e.name == q.id) qe = &e;
        }
        if (!qe) throw ValidationError("query '" + q.id + "' is not in the query store");
        // without a separate query store the query itself is left out of the ranking
        std::vector<std::string> ids;
        std::vector<const StoreEntry*> rows;
        for (const auto& e : db) {
            if (query_path.empty() && e.name == q.id) continue;
            ids.push_back(e.name);
            rows.push_back(&e);
        }
        if (rows.empty()) throw ValidationError("database is empty");
        if (rows.front()->values.size() != qe->values.size()) throw ValidationError("query and database dimensions differ");
        Matrix m(static_cast<Eigen::Index>(rows.size()), qe->values.size());
        for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i]->values.transpose();
        results.push_back(rank_database(q.id, qe->values, m, ids));
    }
    std::vector<Protocol> protocols;
    if (protocol == "all") {
        protocols.assign(std::begin(kAllProtocols), std::end(kAllProtocols));
    } else {
        protocols.push_back(parse_protocol(protocol));
    }
    const EvaluationReport rep = evaluate_rankings(results, gt, protocols);
    out << rep.to_table();
    for (const ProtocolScores& s : rep.protocols) {
        for (const std::string& id : s.skipped) {
            out << "warning: query " << id << " has no positives under " << to_string(s.protocol) << ", skipped\n";
        }
    }
    if (!report.empty()) write_file_atomic(report, rep.to_jsonl());
    return 0;
}

int cmd_ablate(const std::string& model_path, const std::string& bench_dir, const std::string& values,
               const std::string& scales_text, const std::string& csv, std::ostream& out) {
    const DescriptorModel model = load_model(model_path);
    const RetrievalBenchmark bench = read_retrieval_benchmark(bench_dir);
    const std::vector<double> ps = parse_list(values, "--values");
    const std::vector<double> scales = scales_or_default(scales_text);
    const PSweep sweep = p_sweep(model, bench, ps, scales);
    if (csv.empty()) {
        out << sweep.to_csv();
    } else {
        write_file_atomic(csv, sweep.to_csv());
        out << "wrote " << sweep.rows.size() << " rows to " << csv << "\n";
    }
    return 0;
}

int cmd_attn(const std::string& model_path, const std::string& image_path, int x, int y, int insertion,
             const std::string& dest, std::ostream& out) {
    const DescriptorModel model = load_model(model_path);
    const Image image = read_image(image_path);
    HeatmapRequest req{std::filesystem::path(image_path).stem().string(), x, y, insertion};
    export_attention_heatmap(model, image, req, dest);
    out << "wrote attention of " << req.image_id << " at (" << x << ", " << y << ") to " << dest << "\n";
    return 0;
}

int cmd_synth(const std::string& dir, int classes, int per_class, int size, std::uint64_t seed, std::ostream& out) {
    const SyntheticBenchmark bench = generate_synthetic_benchmark(classes, per_class, size, seed);
    write_benchmark(dir, bench);
    out << "wrote " << bench.train.size() << " training images, " << bench.eval.queries.size() << " queries and "
        << bench.eval.database.size() << " database images to " << dir << "\n";
    return 0;
}

int cmd_verify(std::uint64_t seed, std::ostream& out) {
    int failed = 0;
    for (const CheckResult& r : run_self_check(seed)) {
        out << (r.passed ? "PASS " : "FAIL ") << r.name << " (" << r.detail << ")\n";
        failed += r.passed ? 0 : 1;
    }
    out << (failed ? std::to_string(failed) + " check(s) failed\n" : "all checks passed\n");
    return failed ? 1 : 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Second-order retrieval descriptors: training, extraction and evaluation", "solar"};
    app.require_subcommand(1);
    std::uint64_t seed = 0;

    auto* train = app.add_subcommand("train", "Train a toy retrieval model");
    std::string config;
    std::vector<std::string> overrides;
    TrainJob job;
    std::string soa_text;
    train->add_option("--config", config, "key=value configuration file");
    train->add_option("--set", overrides, "Override one setting, key=value (repeatable)");
    train->add_option("--data", job.data, "Directory with train/ and train_labels.txt");
    train->add_option("--out", job.out, "Output directory for checkpoints and the report");
    train->add_option("--soa", soa_text, "SOA insertions, e.g. 4,5");
    train->add_option("--init", job.init, "Start from this checkpoint");
    train->add_option("--seed", seed, "Seed for initialisation, mining and the validation split");

    auto* extract = app.add_subcommand("extract", "Images to a descriptor store");
    std::string model_path, images, store, scales, bbox_gt;
    extract->add_option("--model", model_path, "Checkpoint")->required();
    extract->add_option("--images", images, "Image directory")->required();
    extract->add_option("--out", store, "Descriptor store to write")->required();
    extract->add_option("--scales", scales, "Comma-separated scales (default 1,sqrt2,1/sqrt2)");
    extract->add_option("--bbox-crop", bbox_gt, "Ground truth whose query boxes crop matching images");
    extract->add_option("--seed", seed, "Unused; extraction is deterministic");

    auto* evaluate = app.add_subcommand("evaluate", "Retrieval metrics from descriptor stores");
    std::string db_path, query_path, gt_path, protocol = "all", report;
    evaluate->add_option("--db", db_path, "Database store")->required();
    evaluate->add_option("--queries", query_path, "Query store (default: look queries up in the database)");
    evaluate->add_option("--gt", gt_path, "Ground truth JSON")->required();
    evaluate->add_option("--protocol", protocol, "easy, medium, hard or all");
    evaluate->add_option("--report", report, "Write per-protocol JSON lines here");
    evaluate->add_option("--seed", seed, "Unused; evaluation is deterministic");

    auto* ablate = app.add_subcommand("ablate-p", "mAP as a function of the GeM exponent");
    std::string bench_dir, values = "1,2,3,5,10,20,50,100", csv;
    ablate->add_option("--model", model_path, "Checkpoint")->required();
    ablate->add_option("--bench", bench_dir, "Benchmark directory (queries/, database/, gt.json)")->required();
    ablate->add_option("--values", values, "Comma-separated p values in [1, 100]");
    ablate->add_option("--scales", scales, "Comma-separated scales");
    ablate->add_option("--out", csv, "CSV file (default: standard output)");
    ablate->add_option("--seed", seed, "Unused; the sweep is deterministic");

    auto* attn = app.add_subcommand("attn-export", "Attention map of one location as a graymap");
    std::string image_path, dest;
    int x = 0, y = 0, insertion = 0;
    attn->add_option("--model", model_path, "Checkpoint")->required();
    attn->add_option("--image", image_path, "Input image")->required();
    attn->add_option("--x", x, "Pixel column")->required();
    attn->add_option("--y", y, "Pixel row")->required();
    attn->add_option("--insertion", insertion, "SOA insertion label")->required();
    attn->add_option("--out", dest, "Output .pgm")->required();
    attn->add_option("--seed", seed, "Unused; export is deterministic");

    auto* synth = app.add_subcommand("synth", "Generate the synthetic benchmark");
    std::string synth_dir;
    int classes = 8, per_class = 20, size = 64;
    synth->add_option("--out", synth_dir, "Output directory")->required();
    synth->add_option("--classes", classes, "Number of classes");
    synth->add_option("--per-class", per_class, "Images per class");
    synth->add_option("--size", size, "Image side in pixels");
    synth->add_option("--seed", seed, "Generator seed");

    auto* verify = app.add_subcommand("verify", "Run the built-in invariant checks");
    verify->add_option("--seed", seed, "Seed for the random inputs");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n";
        const CLI::App* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
        err << sub->help();
        return 1;
    }

    try {
        if (*train) {
            if (!soa_text.empty()) job.soa = parse_labels(soa_text);
            if (train->count("--seed")) {
                job.cfg.seed = seed;
                job.model_seed = seed;
            }
            return cmd_train(config, overrides, job, out);
        }
        if (*extract) return cmd_extract(model_path, images, store, scales, bbox_gt, out);
        if (*evaluate) return cmd_evaluate(db_path, query_path, gt_path, protocol, report, out);
        if (*ablate) return cmd_ablate(model_path, bench_dir, values, scales, csv, out);
        if (*attn) return cmd_attn(model_path, image_path, x, y, insertion, dest, out);
        if (*synth) return cmd_synth(synth_dir, classes, per_class, size, seed, out);
        if (*verify) return cmd_verify(seed, out);
    } catch (const IoError& e) {
        err << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "I/O error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}

}  // namespace solar
