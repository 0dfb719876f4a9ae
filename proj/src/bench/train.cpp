// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "bench/train.hpp"

#include "ad/adam.hpp"
#include "bench/corpus.hpp"
#include "bench/evaluate.hpp"
#include "core/binary_io.hpp"
#include "core/error.hpp"
#include "nets/network.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace msfa::bench {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

const char* to_string(Selection s)
{
    return s == Selection::Final ? "final" : "best-validation";
}

json report_json(const MetricReport& r)
{
    return json::parse(report_to_json(r));
}

template <typename V>
V get_field(const json& j, const char* key, const std::string& context)
{
    try {
        return j.at(key).get<V>();
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidArgument, context + ": bad value for \"" + key + "\": " + e.what());
    }
}

struct TrainItem
{
    std::string scene;
    nets::NetInputs<float> inputs;
    ad::Tensor<float> target; ///< border already cropped
};

struct ValItem
{
    nets::NetInputs<float> inputs;
    SpectralCube truth;
};

MetricReport validate_net(const nets::Network<float>& net, const std::vector<ValItem>& items, std::size_t crop)
{
    std::vector<MetricReport> reports;
    for (const auto& v : items) {
        const auto out = net.forward(nullptr, v.inputs);
        reports.push_back(evaluate(v.truth, nets::tensor_to_cube(out, v.truth.wavelengths()), crop));
    }
    return mean_report(reports);
}

} // namespace

void TrainConfig::validate() const
{
    require(epochs > 0 && batch_size > 0 && decay_every > 0, ErrorKind::InvalidArgument,
            "epochs, batch_size and decay_every must be positive");
    require(learning_rate > 0.0 && std::isfinite(learning_rate), ErrorKind::InvalidArgument,
            "learning_rate must be positive");
    require(decay_factor > 0.0 && decay_factor <= 1.0, ErrorKind::InvalidArgument, "decay_factor must be in (0, 1]");
}

TrainConfig config_from_json(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(ErrorKind::InvalidArgument, std::string("train config: ") + e.what());
    }
    require(j.is_object(), ErrorKind::InvalidArgument, "train config must be a JSON object");
    static const std::set<std::string> known = {"architecture", "epochs", "batch_size", "learning_rate",
                                                "decay_factor", "decay_every", "seed", "crop_margin",
                                                "dataset", "output_dir", "selection"};
    for (const auto& [key, value] : j.items())
        require(known.count(key) != 0, ErrorKind::InvalidArgument, "train config: unknown key \"" + key + "\"");

    const std::string ctx = "train config";
    TrainConfig c;
    if (j.contains("architecture")) c.architecture = get_field<std::string>(j, "architecture", ctx);
    if (j.contains("epochs")) c.epochs = get_field<std::size_t>(j, "epochs", ctx);
    if (j.contains("batch_size")) c.batch_size = get_field<std::size_t>(j, "batch_size", ctx);
    if (j.contains("learning_rate")) c.learning_rate = get_field<double>(j, "learning_rate", ctx);
    if (j.contains("decay_factor")) c.decay_factor = get_field<double>(j, "decay_factor", ctx);
    if (j.contains("decay_every")) c.decay_every = get_field<std::size_t>(j, "decay_every", ctx);
    if (j.contains("seed")) c.seed = get_field<std::uint64_t>(j, "seed", ctx);
    if (j.contains("crop_margin")) c.crop_margin = get_field<std::size_t>(j, "crop_margin", ctx);
    if (j.contains("dataset")) c.dataset = get_field<std::string>(j, "dataset", ctx);
    if (j.contains("output_dir")) c.output_dir = get_field<std::string>(j, "output_dir", ctx);
    if (j.contains("selection")) {
        const auto s = get_field<std::string>(j, "selection", ctx);
        require(s == "best-validation" || s == "final", ErrorKind::InvalidArgument,
                "train config: selection must be \"best-validation\" or \"final\"");
        c.selection = s == "final" ? Selection::Final : Selection::BestValidation;
    }
    c.validate();
    return c;
}

std::string config_to_json(const TrainConfig& c)
{
    json j;
    j["architecture"] = c.architecture;
    j["epochs"] = c.epochs;
    j["batch_size"] = c.batch_size;
    j["learning_rate"] = c.learning_rate;
    j["decay_factor"] = c.decay_factor;
    j["decay_every"] = c.decay_every;
    j["seed"] = c.seed;
    j["crop_margin"] = c.crop_margin;
    j["dataset"] = c.dataset;
    j["output_dir"] = c.output_dir;
    j["selection"] = to_string(c.selection);
    return j.dump(2) + "\n";
}

TrainConfig load_config(const std::string& path)
{
    const auto bytes = io::read_file(path);
    return config_from_json(std::string(bytes.begin(), bytes.end()));
}

double lr_at_epoch(const TrainConfig& c, std::size_t epoch)
{
    return c.learning_rate * std::pow(c.decay_factor, double(epoch / c.decay_every));
}

std::vector<std::size_t> batch_sizes(std::size_t n, std::size_t batch)
{
    require(batch > 0, ErrorKind::InvalidArgument, "batch size must be positive");
    std::vector<std::size_t> sizes;
    for (std::size_t done = 0; done < n; done += batch)
        sizes.push_back(std::min(batch, n - done));
    return sizes;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch)
{
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i)
        order[i] = i;
    std::mt19937_64 rng(seed + epoch);
    for (std::size_t i = n; i > 1; --i)
        std::swap(order[i - 1], order[rng() % i]);
    return order;
}

std::string epoch_to_json(const EpochRecord& r)
{
    json j;
    j["epoch"] = r.epoch;
    j["learning_rate"] = r.learning_rate;
    j["train_loss"] = r.train_loss;
    j["validation"] = report_json(r.validation);
    return j.dump();
}

EpochRecord epoch_from_json(const std::string& line)
{
    try {
        const auto j = json::parse(line);
        EpochRecord r;
        r.epoch = j.at("epoch").get<std::size_t>();
        r.learning_rate = j.at("learning_rate").get<double>();
        r.train_loss = j.at("train_loss").get<double>();
        r.validation = report_from_json(j.at("validation").dump());
        return r;
    } catch (const json::exception& e) {
        fail(ErrorKind::UnsupportedFormat, std::string("run record: ") + e.what());
    }
}

std::vector<EpochRecord> load_run_records(const std::string& path)
{
    const auto bytes = io::read_file(path);
    std::istringstream in(std::string(bytes.begin(), bytes.end()));
    std::vector<EpochRecord> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty())
            out.push_back(epoch_from_json(line));
    for (std::size_t i = 0; i < out.size(); ++i)
        require(out[i].epoch == i, ErrorKind::UnsupportedFormat,
                path + ": epochs are not consecutive from 0 (line " + std::to_string(i + 1) + ")");
    return out;
}

std::string run_summary_to_json(const RunRecord& run)
{
    json j;
    j["architecture"] = run.architecture;
    j["parameters"] = run.parameters;
    j["epochs"] = run.epochs.size();
    j["selected_epoch"] = run.selected_epoch;
    j["checkpoint"] = run.checkpoint;
    j["initial_validation"] = report_json(run.initial_validation);
    if (!run.epochs.empty())
        j["final_validation"] = report_json(run.epochs.back().validation);
    json test = json::object();
    for (const auto& [method, report] : run.test)
        test[method] = report_json(report);
    j["test"] = std::move(test);
    return j.dump(2) + "\n";
}

RunRecord train(const TrainConfig& config, const EpochCallback& on_epoch)
{
    config.validate();
    require(!config.dataset.empty(), ErrorKind::InvalidArgument, "train config needs a dataset directory");
    require(!config.output_dir.empty(), ErrorKind::InvalidArgument, "train config needs an output_dir");

    const Dataset dataset = Dataset::open(config.dataset);
    require(!dataset.split().train.empty() && !dataset.split().validation.empty(), ErrorKind::InvalidArgument,
            "dataset needs non-empty train and validation splits");

    nets::Network<float> net = nets::build_network<float>(config.architecture, {config.seed, true});

    std::vector<TrainItem> train_items;
    for (const auto& id : dataset.split().train) {
        const SpectralCube truth = dataset.load_truth(id);
        const MosaicImage raw = dataset.load_mosaic(id);
        require(truth.height() == raw.height() && truth.width() == raw.width(), ErrorKind::ShapeMismatch,
                "scene " + id + ": mosaic and ground truth differ in size");
        train_items.push_back({id, nets::prepare_inputs(net, raw),
                               ad::crop_border<float>(nullptr, nets::cube_tensor<float>(truth), config.crop_margin)});
    }
    std::vector<ValItem> val_items;
    for (const auto& id : dataset.split().validation)
        val_items.push_back({nets::prepare_inputs(net, dataset.load_mosaic(id)), dataset.load_truth(id)});

    std::error_code ec;
    fs::create_directories(config.output_dir, ec);
    require(!ec, ErrorKind::Io, "cannot create " + config.output_dir + ": " + ec.message());
    const fs::path out_dir(config.output_dir);
    const std::string best_path = (out_dir / "best.mswt").string();
    const std::string final_path = (out_dir / "final.mswt").string();
    const std::string records_path = (out_dir / "run.jsonl").string();

    {
        json hp;
        hp["config"] = json::parse(config_to_json(config));
        hp["network"] = json::parse(net.hyperparameters_json());
        io::write_file((out_dir / "hyperparameters.json").string(), hp.dump(2) + "\n");
    }
    std::ofstream records(records_path, std::ios::binary | std::ios::trunc);
    require(bool(records), ErrorKind::Io, "cannot write " + records_path);

    RunRecord run;
    run.architecture = config.architecture;
    run.parameters = nets::count_params(net);
    run.initial_validation = validate_net(net, val_items, config.crop_margin);

    ad::Adam<float> adam(net.params(), {config.learning_rate});
    double best_psnr = -std::numeric_limits<double>::infinity();
    std::vector<ad::CheckpointEntry> best_weights;

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        rec.learning_rate = lr_at_epoch(config, epoch);
        adam.set_learning_rate(rec.learning_rate);

        const auto order = epoch_order(train_items.size(), config.seed, epoch);
        double loss_sum = 0.0;
        std::size_t next = 0;
        for (std::size_t n : batch_sizes(train_items.size(), config.batch_size)) {
            adam.zero_grad();
            for (std::size_t j = 0; j < n; ++j, ++next) {
                const TrainItem& item = train_items[order[next]];
                ad::Tape<float> tape;
                const auto out = net.forward(&tape, item.inputs);
                const auto loss = ad::mse_loss(&tape, ad::crop_border(&tape, out, config.crop_margin), item.target);
                const double value = loss.item();
                require(std::isfinite(value), ErrorKind::Numeric,
                        "training diverged: loss is " + std::to_string(value) + " at epoch " +
                            std::to_string(epoch) + " on scene " + item.scene);
                loss_sum += value;
                tape.backward(loss);
            }
            const float scale = 1.0f / float(n);
            for (ad::Tensor<float> p : net.params())
                for (float& g : p.grad())
                    g *= scale;
            adam.step();
        }
        rec.train_loss = loss_sum / double(train_items.size());
        rec.validation = validate_net(net, val_items, config.crop_margin);

        if (rec.validation.psnr_db > best_psnr) {
            best_psnr = rec.validation.psnr_db;
            best_weights = nets::export_weights(net);
            ad::save_checkpoint(best_path, best_weights);
            run.selected_epoch = epoch;
        }
        records << epoch_to_json(rec) << '\n';
        records.flush();
        require(bool(records), ErrorKind::Io, "cannot write " + records_path);
        run.epochs.push_back(rec);
        if (on_epoch)
            on_epoch(rec);
    }
    nets::save_weights(net, final_path);

    if (config.selection == Selection::Final || best_weights.empty()) {
        run.selected_epoch = config.epochs - 1;
        run.checkpoint = final_path;
    } else {
        run.checkpoint = best_path;
    }

    if (!dataset.split().test.empty()) {
        EvalOptions eval;
        eval.crop_margin = config.crop_margin;
        eval.weights[config.architecture] = run.checkpoint;
        for (const std::string& method : {"net:" + config.architecture, std::string("id"), std::string("bilinear")})
            run.test[method] = evaluate_method(method, dataset, eval).mean;
    }
    io::write_file((out_dir / "summary.json").string(), run_summary_to_json(run));
    return run;
}

} // namespace msfa::bench
