// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

// Command-line front end. Talks to the library only through the C API.

#include "msfa/msfa.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

namespace {

using json = nlohmann::ordered_json;

enum Exit { kOk = 0, kUsage = 1, kData = 2, kNumeric = 3 };

struct Failure
{
    int code;
    std::string message;
};

int exit_code(msfa_status s)
{
    switch (s) {
    case MSFA_OK: return kOk;
    case MSFA_ERR_INVALID_ARGUMENT:
    case MSFA_ERR_NULL_POINTER: return kUsage;
    case MSFA_ERR_NUMERIC: return kNumeric;
    default: return kData;
    }
}

void check(msfa_status s)
{
    if (s != MSFA_OK)
        throw Failure{exit_code(s), std::string(msfa_status_name(s)) + ": " + msfa_last_error()};
}

void usage_error(const std::string& message)
{
    throw Failure{kUsage, message};
}

template <typename T, void (*Free)(T*)>
struct Deleter
{
    void operator()(T* p) const { Free(p); }
};
using Cube = std::unique_ptr<msfa_cube, Deleter<msfa_cube, msfa_cube_free>>;
using Pattern = std::unique_ptr<msfa_pattern, Deleter<msfa_pattern, msfa_pattern_free>>;
using Mosaic = std::unique_ptr<msfa_mosaic, Deleter<msfa_mosaic, msfa_mosaic_free>>;
using Profile = std::unique_ptr<msfa_profile, Deleter<msfa_profile, msfa_profile_free>>;
using Network = std::unique_ptr<msfa_network, Deleter<msfa_network, msfa_network_free>>;

std::string take(char* s)
{
    std::string out = s ? s : "";
    msfa_string_free(s);
    return out;
}

std::string read_text(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Failure{kData, "cannot read " + path};
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text)
{
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out)
        throw Failure{kData, "cannot write " + path};
}

void make_dirs(const std::string& dir)
{
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
        throw Failure{kData, "cannot create " + dir + ": " + ec.message()};
}

Pattern load_pattern_or_default(const std::string& path)
{
    msfa_pattern* p = nullptr;
    check(path.empty() ? msfa_pattern_default(&p) : msfa_pattern_load(path.c_str(), &p));
    return Pattern(p);
}

Profile load_profile_or_default(const std::string& dir)
{
    msfa_profile* p = nullptr;
    check(dir.empty() ? msfa_profile_default(&p) : msfa_profile_load(dir.c_str(), &p));
    return Profile(p);
}

std::string fmt_db(double v)
{
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", v);
    return buf;
}

/// "arch=path" pairs, or one bare path for the single net method in `methods`.
std::map<std::string, std::string> weights_map(const std::vector<std::string>& specs,
                                               const std::vector<std::string>& methods)
{
    std::vector<std::string> nets;
    for (const auto& m : methods)
        if (m.rfind("net:", 0) == 0)
            nets.push_back(m.substr(4));
    std::map<std::string, std::string> out;
    for (const auto& s : specs) {
        const auto eq = s.find('=');
        if (eq != std::string::npos) {
            out[s.substr(0, eq)] = s.substr(eq + 1);
        } else {
            if (nets.size() != 1)
                usage_error("--weights " + s + ": use <architecture>=<path> when the method list has " +
                            std::to_string(nets.size()) + " network methods");
            out[nets.front()] = s;
        }
    }
    return out;
}

std::vector<std::string> split_list(const std::vector<std::string>& items)
{
    std::vector<std::string> out;
    for (const auto& item : items) {
        std::stringstream ss(item);
        std::string part;
        while (std::getline(ss, part, ','))
            if (!part.empty())
                out.push_back(part);
    }
    return out;
}

// ---- commands -------------------------------------------------------------------

struct SimulateArgs
{
    std::string in, profile, pattern, mode = "simple", out;
};

void run_simulate(const SimulateArgs& a)
{
    msfa_cube* raw = nullptr;
    check(msfa_cube_load(a.in.c_str(), &raw));
    Cube source(raw);

    Pattern pattern;
    msfa_cube* sim = nullptr;
    if (a.mode == "real") {
        Profile profile = load_profile_or_default(a.profile);
        msfa_pattern* p = nullptr;
        check(msfa_profile_pattern(profile.get(), &p));
        pattern.reset(p);
        check(msfa_simulate_real(source.get(), profile.get(), &sim));
    } else {
        if (!a.pattern.empty()) {
            pattern = load_pattern_or_default(a.pattern);
        } else if (!a.profile.empty()) {
            Profile profile = load_profile_or_default(a.profile);
            msfa_pattern* p = nullptr;
            check(msfa_profile_pattern(profile.get(), &p));
            pattern.reset(p);
        } else {
            pattern = load_pattern_or_default("");
        }
        check(msfa_simulate_simple(source.get(), pattern.get(), &sim));
    }
    Cube cube(sim);
    msfa_mosaic* m = nullptr;
    check(msfa_mosaic_from_cube(cube.get(), pattern.get(), &m));
    Mosaic frame(m);

    make_dirs(a.out);
    const std::filesystem::path dir(a.out);
    check(msfa_cube_save(cube.get(), (dir / "cube.hsc").c_str()));
    check(msfa_mosaic_save(frame.get(), (dir / "mosaic.msm").c_str()));
    char* pj = nullptr;
    check(msfa_pattern_to_json(pattern.get(), &pj));
    write_text((dir / "pattern.json").string(), take(pj) + "\n");
    std::printf("wrote %s/{cube.hsc, mosaic.msm, pattern.json}\n", a.out.c_str());
}

void run_mosaic(const std::string& in, const std::string& pattern_path, const std::string& out)
{
    msfa_cube* c = nullptr;
    check(msfa_cube_load(in.c_str(), &c));
    Cube cube(c);
    Pattern pattern = load_pattern_or_default(pattern_path);
    msfa_mosaic* m = nullptr;
    check(msfa_mosaic_from_cube(cube.get(), pattern.get(), &m));
    Mosaic frame(m);
    check(msfa_mosaic_save(frame.get(), out.c_str()));
}

void run_demosaic(const std::string& method, const std::string& in, const std::string& out,
                  const std::string& weights)
{
    msfa_mosaic* m = nullptr;
    check(msfa_mosaic_load(in.c_str(), &m));
    Mosaic frame(m);
    msfa_cube* c = nullptr;
    check(msfa_demosaic(frame.get(), method.c_str(), weights.empty() ? nullptr : weights.c_str(), &c));
    Cube cube(c);
    check(msfa_cube_save(cube.get(), out.c_str()));
}

void print_epoch(const char* record, void* user)
{
    if (*static_cast<bool*>(user))
        return;
    const auto j = json::parse(record);
    std::fprintf(stderr, "epoch %3zu  lr %.3g  loss %.6e  val PSNR %s dB  SSIM %.4f\n",
                 j.at("epoch").get<std::size_t>(), j.at("learning_rate").get<double>(),
                 j.at("train_loss").get<double>(),
                 j.at("validation").at("psnr_db").is_string()
                     ? j.at("validation").at("psnr_db").get<std::string>().c_str()
                     : fmt_db(j.at("validation").at("psnr_db").get<double>()).c_str(),
                 j.at("validation").at("ssim").get<double>());
}

void run_train(const std::string& config_path, bool quiet)
{
    const std::string config = read_text(config_path);
    char* summary = nullptr;
    check(msfa_train(config.c_str(), print_epoch, &quiet, &summary));
    std::fputs(take(summary).c_str(), stdout);
}

struct EvalArgs
{
    std::string method, data, report, split = "test";
    std::vector<std::string> weights;
    std::size_t crop = 4;
};

void run_eval(const EvalArgs& a)
{
    json options;
    options["split"] = a.split;
    options["crop_margin"] = a.crop;
    options["weights"] = weights_map(a.weights, {a.method});
    char* result = nullptr;
    check(msfa_evaluate_dataset(a.data.c_str(), a.method.c_str(), options.dump().c_str(), &result));
    const std::string text = take(result);
    if (!a.report.empty()) {
        const auto parent = std::filesystem::path(a.report).parent_path();
        if (!parent.empty())
            make_dirs(parent.string());
        write_text(a.report, text);
    }
    const auto j = json::parse(text);
    const auto& mean = j.at("mean");
    std::printf("%s on %s (%zu scenes): SSIM %.4f  PSNR %s dB  SAM %.4f rad\n", a.method.c_str(),
                a.split.c_str(), j.at("scenes").size(), mean.at("ssim").get<double>(),
                mean.at("psnr_db").is_string() ? mean.at("psnr_db").get<std::string>().c_str()
                                               : fmt_db(mean.at("psnr_db").get<double>()).c_str(),
                mean.at("sam_rad").get<double>());
}

struct BenchArgs
{
    std::string data, out, split = "test", scene;
    std::vector<std::string> methods, weights;
};

void run_bench(const BenchArgs& a)
{
    const auto methods = split_list(a.methods);
    if (methods.empty())
        usage_error("--methods lists no methods");
    json request;
    request["methods"] = methods;
    request["weights"] = weights_map(a.weights, methods);
    request["split"] = a.split;
    if (!a.scene.empty())
        request["scene"] = a.scene;
    const std::string out = a.out.empty() ? (std::filesystem::path(a.data) / "bench").string() : a.out;
    char* csv = nullptr;
    check(msfa_bench(a.data.c_str(), request.dump().c_str(), out.c_str(), &csv));
    take(csv);
    std::fputs(read_text((std::filesystem::path(out) / "metrics.txt").string()).c_str(), stdout);
}

void run_profile(const std::string& out, const std::string& check_dir)
{
    Profile profile = load_profile_or_default(check_dir);
    if (!out.empty()) {
        check(msfa_profile_save(profile.get(), out.c_str()));
        std::printf("wrote camera profile to %s\n", out.c_str());
    }
    msfa_pattern* p = nullptr;
    check(msfa_profile_pattern(profile.get(), &p));
    Pattern pattern(p);
    const std::size_t k = msfa_pattern_tile(pattern.get());
    for (std::size_t b = 0; b < k * k; ++b) {
        double r = 0.0;
        check(msfa_profile_band_response(profile.get(), b, &r));
        std::printf("band %2zu  response %.6g\n", b, r);
    }
}

struct CorpusArgs
{
    std::string source = "synthetic", out, profile;
    std::uint64_t seed = 0;
    std::size_t count = 100, size = 100, height = 0, width = 0, patch = 100, stride = 0;
    std::vector<std::string> inputs;
    std::vector<double> range;
};

void run_make_corpus(const CorpusArgs& a)
{
    json o;
    o["source"] = a.source;
    o["seed"] = a.seed;
    if (a.source == "synthetic") {
        o["count"] = a.count;
        o["height"] = a.height ? a.height : a.size;
        o["width"] = a.width ? a.width : a.size;
    } else {
        o["inputs"] = a.inputs;
        o["patch"] = a.patch;
        o["stride"] = a.stride ? a.stride : a.patch;
        if (!a.profile.empty())
            o["profile"] = a.profile;
        if (!a.range.empty()) {
            if (a.range.size() != 2)
                usage_error("--range takes two values: min max");
            o["range"] = a.range;
        }
    }
    check(msfa_make_corpus(o.dump().c_str(), a.out.c_str()));
    const auto manifest = json::parse(read_text((std::filesystem::path(a.out) / "manifest.json").string()));
    std::printf("%s corpus: %zu scenes (train %zu, validation %zu, test %zu) in %s\n", a.source.c_str(),
                manifest.at("scenes").size(), manifest.at("split").at("train").size(),
                manifest.at("split").at("validation").size(), manifest.at("split").at("test").size(),
                a.out.c_str());
}

void run_nets(bool as_json)
{
    char* names = nullptr;
    check(msfa_architectures(&names));
    json out = json::object();
    for (const auto& name : json::parse(take(names))) {
        msfa_network* n = nullptr;
        check(msfa_network_create(name.get<std::string>().c_str(), 0, &n));
        Network net(n);
        std::size_t count = 0;
        check(msfa_network_param_count(net.get(), &count));
        out[name.get<std::string>()] = count;
    }
    if (as_json) {
        std::printf("%s\n", out.dump(2).c_str());
        return;
    }
    for (const auto& [name, count] : out.items())
        std::printf("%-12s %9zu parameters\n", name.c_str(), count.get<std::size_t>());
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Multispectral filter array simulation, demosaicing and benchmarking"};
    app.set_version_flag("--version", std::string(msfa_version()));
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* simulate = app.add_subcommand("simulate", "Resample or camera-simulate a cube and mosaic it");
    simulate->add_option("--in", sim.in, "Source cube (HSC1 or ENVI .hdr)")->required();
    simulate->add_option("--profile", sim.profile, "Camera profile directory (default: built-in profile)");
    simulate->add_option("--pattern", sim.pattern, "Pattern JSON for simple mode");
    simulate->add_option("--mode", sim.mode, "simple or real")->check(CLI::IsMember({"simple", "real"}));
    simulate->add_option("--out", sim.out, "Output directory")->required();

    std::string mosaic_in, mosaic_pattern, mosaic_out;
    auto* mosaic = app.add_subcommand("mosaic", "Sample a 16-band cube through a filter pattern");
    mosaic->add_option("--in", mosaic_in, "Cube file")->required();
    mosaic->add_option("--pattern", mosaic_pattern, "Pattern JSON (default: 4x4, 450-630 nm)");
    mosaic->add_option("--out", mosaic_out, "Raw mosaic file (MSM1)")->required();

    std::string dm_method, dm_in, dm_out, dm_weights;
    auto* demosaic = app.add_subcommand("demosaic", "Reconstruct a cube from a raw mosaic");
    demosaic->add_option("--method", dm_method, "bilinear, id or net:<architecture>")->required();
    demosaic->add_option("--in", dm_in, "Raw mosaic file (MSM1)")->required();
    demosaic->add_option("--out", dm_out, "Output cube (HSC1)")->required();
    demosaic->add_option("--weights", dm_weights, "Checkpoint for net methods");

    std::string config;
    bool quiet = false;
    auto* train = app.add_subcommand("train", "Train a network from a JSON config");
    train->add_option("--config", config, "Train config JSON")->required();
    train->add_flag("--quiet", quiet, "No per-epoch progress on stderr");

    EvalArgs ev;
    auto* eval = app.add_subcommand("eval", "Evaluate one method on a corpus split");
    eval->add_option("--method", ev.method, "bilinear, id, truth or net:<architecture>")->required();
    eval->add_option("--data", ev.data, "Corpus directory")->required();
    eval->add_option("--report", ev.report, "Write the JSON report here");
    eval->add_option("--split", ev.split, "train, validation or test")
        ->check(CLI::IsMember({"train", "validation", "val", "test"}));
    eval->add_option("--weights", ev.weights, "Checkpoint for the net method");
    eval->add_option("--crop", ev.crop, "Border excluded from the metrics");

    BenchArgs bn;
    auto* bench = app.add_subcommand("bench", "Evaluate methods and write tables, renders and error maps");
    bench->add_option("--data", bn.data, "Corpus directory")->required();
    bench->add_option("--methods", bn.methods, "Comma-separated method list")->required();
    bench->add_option("--out", bn.out, "Output directory (default: <data>/bench)");
    bench->add_option("--weights", bn.weights, "<architecture>=<checkpoint> for net methods");
    bench->add_option("--split", bn.split, "Split to evaluate")
        ->check(CLI::IsMember({"train", "validation", "val", "test"}));
    bench->add_option("--scene", bn.scene, "Scene to render (default: first of the split)");

    std::string profile_out, profile_check;
    auto* profile = app.add_subcommand("profile", "Write the built-in camera profile or inspect one");
    profile->add_option("--out", profile_out, "Write the built-in profile to this directory");
    profile->add_option("--check", profile_check, "Load and validate this profile directory");

    CorpusArgs cp;
    auto* corpus = app.add_subcommand("make-corpus", "Build a paired cube/mosaic dataset with splits");
    corpus->add_option("--source", cp.source, "synthetic, simple or real")
        ->check(CLI::IsMember({"synthetic", "simple", "real"}));
    corpus->add_option("--out", cp.out, "Output directory")->required();
    corpus->add_option("--seed", cp.seed, "Generator and split seed");
    corpus->add_option("--count", cp.count, "Synthetic scene count");
    corpus->add_option("--size", cp.size, "Synthetic scene height and width");
    corpus->add_option("--height", cp.height, "Synthetic scene height");
    corpus->add_option("--width", cp.width, "Synthetic scene width");
    corpus->add_option("--in", cp.inputs, "Source cubes (simple/real)");
    corpus->add_option("--patch", cp.patch, "Patch size (simple/real)");
    corpus->add_option("--stride", cp.stride, "Patch stride (default: patch size)");
    corpus->add_option("--profile", cp.profile, "Camera profile directory (real)");
    corpus->add_option("--range", cp.range, "Raw value range mapped to [0, 1]")->expected(2);

    bool nets_json = false;
    auto* nets = app.add_subcommand("nets", "List architectures and parameter counts");
    nets->add_flag("--json", nets_json, "JSON output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*simulate)
            run_simulate(sim);
        else if (*mosaic)
            run_mosaic(mosaic_in, mosaic_pattern, mosaic_out);
        else if (*demosaic)
            run_demosaic(dm_method, dm_in, dm_out, dm_weights);
        else if (*train)
            run_train(config, quiet);
        else if (*eval)
            run_eval(ev);
        else if (*bench)
            run_bench(bn);
        else if (*profile)
            run_profile(profile_out, profile_check);
        else if (*corpus)
            run_make_corpus(cp);
        else if (*nets)
            run_nets(nets_json);
    } catch (const Failure& f) {
        std::fprintf(stderr, "msfa: %s\n", f.message.c_str());
        return f.code;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "msfa: %s\n", e.what());
        return kData;
    }
    return kOk;
}
