// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "msfa/msfa.h"

#include "bench/corpus.hpp"
#include "bench/evaluate.hpp"
#include "bench/report.hpp"
#include "bench/train.hpp"
#include "camera/profile.hpp"
#include "camera/simulate.hpp"
#include "core/error.hpp"
#include "demosaic/classic.hpp"
#include "hsi/cube_io.hpp"
#include "metrics/metrics.hpp"
#include "nets/network.hpp"

#include <json.hpp>

#include <cstdlib>
#include <cstring>
#include <new>
#include <string>

struct msfa_cube { msfa::SpectralCube value; };
struct msfa_pattern { msfa::MsfaPattern value; };
struct msfa_mosaic { msfa::MosaicImage value; };
struct msfa_profile { msfa::CameraProfile value; };
struct msfa_network { msfa::nets::Network<float> value; };

namespace {

using msfa::ErrorKind;
using json = nlohmann::json;

thread_local std::string last_error;

struct NullPointer {
    const char* what;
};

struct BufferSize {
    std::string what;
};

msfa_status status_of(ErrorKind kind)
{
    switch (kind) {
    case ErrorKind::InvalidArgument: return MSFA_ERR_INVALID_ARGUMENT;
    case ErrorKind::ShapeMismatch: return MSFA_ERR_SHAPE_MISMATCH;
    case ErrorKind::InvalidGeometry: return MSFA_ERR_INVALID_GEOMETRY;
    case ErrorKind::Io: return MSFA_ERR_IO;
    case ErrorKind::BadMagic: return MSFA_ERR_BAD_MAGIC;
    case ErrorKind::Truncated: return MSFA_ERR_TRUNCATED;
    case ErrorKind::DimensionOverflow: return MSFA_ERR_DIMENSION_OVERFLOW;
    case ErrorKind::UnsupportedFormat: return MSFA_ERR_UNSUPPORTED_FORMAT;
    case ErrorKind::Domain: return MSFA_ERR_DOMAIN;
    case ErrorKind::Profile: return MSFA_ERR_PROFILE;
    case ErrorKind::Numeric: return MSFA_ERR_NUMERIC;
    case ErrorKind::State: return MSFA_ERR_STATE;
    }
    return MSFA_ERR_INTERNAL;
}

template <typename F>
msfa_status guarded(F&& body) noexcept
{
    try {
        last_error.clear();
        body();
        return MSFA_OK;
    } catch (const msfa::Error& e) {
        last_error = e.what();
        return status_of(e.kind());
    } catch (const NullPointer& e) {
        last_error = std::string("null pointer: ") + e.what;
        return MSFA_ERR_NULL_POINTER;
    } catch (const BufferSize& e) {
        last_error = e.what;
        return MSFA_ERR_BUFFER_SIZE;
    } catch (const json::exception& e) {
        last_error = std::string("malformed JSON request: ") + e.what();
        return MSFA_ERR_INVALID_ARGUMENT;
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return MSFA_ERR_INTERNAL;
    } catch (const std::exception& e) {
        last_error = e.what();
        return MSFA_ERR_INTERNAL;
    } catch (...) {
        last_error = "unknown failure";
        return MSFA_ERR_INTERNAL;
    }
}

template <typename P>
void need(P* p, const char* what)
{
    if (p == nullptr)
        throw NullPointer{what};
}

void need_count(std::size_t given, std::size_t expected, const char* what)
{
    if (given != expected)
        throw BufferSize{std::string(what) + ": buffer holds " + std::to_string(given) + " values, " +
                         std::to_string(expected) + " needed"};
}

char* dup_string(const std::string& s)
{
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr)
        throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

json parse_request(const char* text)
{
    if (text == nullptr || *text == '\0')
        return json::object();
    json j = json::parse(text);
    msfa::require(j.is_object(), ErrorKind::InvalidArgument, "request must be a JSON object");
    return j;
}

msfa::bench::EvalOptions eval_options(const json& j)
{
    msfa::bench::EvalOptions o;
    if (j.contains("split"))
        o.split = msfa::split_from_string(j.at("split").get<std::string>());
    if (j.contains("crop_margin"))
        o.crop_margin = j.at("crop_margin").get<std::size_t>();
    if (j.contains("weights"))
        o.weights = j.at("weights").get<std::map<std::string, std::string>>();
    return o;
}

} // namespace

extern "C" {

const char* msfa_version(void)
{
    return "0.1.0";
}

const char* msfa_status_name(msfa_status status)
{
    switch (status) {
    case MSFA_OK: return "ok";
    case MSFA_ERR_INVALID_ARGUMENT: return "invalid argument";
    case MSFA_ERR_SHAPE_MISMATCH: return "shape mismatch";
    case MSFA_ERR_INVALID_GEOMETRY: return "invalid geometry";
    case MSFA_ERR_IO: return "i/o error";
    case MSFA_ERR_BAD_MAGIC: return "bad magic";
    case MSFA_ERR_TRUNCATED: return "truncated input";
    case MSFA_ERR_DIMENSION_OVERFLOW: return "dimension overflow";
    case MSFA_ERR_UNSUPPORTED_FORMAT: return "unsupported format";
    case MSFA_ERR_DOMAIN: return "domain error";
    case MSFA_ERR_PROFILE: return "camera profile error";
    case MSFA_ERR_NUMERIC: return "numeric failure";
    case MSFA_ERR_STATE: return "invalid state";
    case MSFA_ERR_NULL_POINTER: return "null pointer";
    case MSFA_ERR_BUFFER_SIZE: return "buffer size mismatch";
    case MSFA_ERR_INTERNAL: return "internal error";
    }
    return "unknown status";
}

const char* msfa_last_error(void)
{
    return last_error.c_str();
}

void msfa_string_free(char* s)
{
    std::free(s);
}

// ---- cubes -------------------------------------------------------------------

msfa_status msfa_cube_create(size_t bands, size_t height, size_t width, const double* wavelengths_nm,
                             const float* data, msfa_cube** out)
{
    return guarded([&] {
        need(wavelengths_nm, "wavelengths_nm");
        need(data, "data");
        need(out, "out");
        msfa::require(bands > 0 && height > 0 && width > 0, ErrorKind::InvalidGeometry,
                      "cube extents must be positive");
        std::vector<double> wl(wavelengths_nm, wavelengths_nm + bands);
        std::vector<float> values(data, data + bands * height * width);
        *out = new msfa_cube{msfa::SpectralCube(bands, height, width, std::move(wl), std::move(values))};
    });
}

msfa_status msfa_cube_load(const char* path, msfa_cube** out)
{
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new msfa_cube{msfa::load_cube(path)};
    });
}

msfa_status msfa_cube_save(const msfa_cube* cube, const char* path)
{
    return guarded([&] {
        need(cube, "cube");
        need(path, "path");
        msfa::save_cube(cube->value, path);
    });
}

msfa_status msfa_cube_shape(const msfa_cube* cube, size_t* bands, size_t* height, size_t* width)
{
    return guarded([&] {
        need(cube, "cube");
        if (bands) *bands = cube->value.bands();
        if (height) *height = cube->value.height();
        if (width) *width = cube->value.width();
    });
}

msfa_status msfa_cube_read(const msfa_cube* cube, float* data, size_t count)
{
    return guarded([&] {
        need(cube, "cube");
        need(data, "data");
        need_count(count, cube->value.data().size(), "msfa_cube_read");
        std::copy(cube->value.data().begin(), cube->value.data().end(), data);
    });
}

msfa_status msfa_cube_wavelengths(const msfa_cube* cube, double* wavelengths_nm, size_t count)
{
    return guarded([&] {
        need(cube, "cube");
        need(wavelengths_nm, "wavelengths_nm");
        const auto& wl = cube->value.wavelengths();
        need_count(count, wl.size(), "msfa_cube_wavelengths");
        std::copy(wl.begin(), wl.end(), wavelengths_nm);
    });
}

void msfa_cube_free(msfa_cube* cube)
{
    delete cube;
}

// ---- patterns ----------------------------------------------------------------

msfa_status msfa_pattern_default(msfa_pattern** out)
{
    return guarded([&] {
        need(out, "out");
        *out = new msfa_pattern{msfa::MsfaPattern::row_major(4, msfa::simple_band_grid())};
    });
}

msfa_status msfa_pattern_from_json(const char* text, msfa_pattern** out)
{
    return guarded([&] {
        need(text, "json");
        need(out, "out");
        *out = new msfa_pattern{msfa::pattern_from_json(text)};
    });
}

msfa_status msfa_pattern_load(const char* path, msfa_pattern** out)
{
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new msfa_pattern{msfa::load_pattern(path)};
    });
}

msfa_status msfa_pattern_to_json(const msfa_pattern* pattern, char** text)
{
    return guarded([&] {
        need(pattern, "pattern");
        need(text, "json");
        *text = dup_string(msfa::pattern_to_json(pattern->value));
    });
}

size_t msfa_pattern_tile(const msfa_pattern* pattern)
{
    return pattern ? pattern->value.tile() : 0;
}

void msfa_pattern_free(msfa_pattern* pattern)
{
    delete pattern;
}

// ---- profiles ----------------------------------------------------------------

msfa_status msfa_profile_default(msfa_profile** out)
{
    return guarded([&] {
        need(out, "out");
        *out = new msfa_profile{msfa::default_profile()};
    });
}

msfa_status msfa_profile_load(const char* dir, msfa_profile** out)
{
    return guarded([&] {
        need(dir, "dir");
        need(out, "out");
        *out = new msfa_profile{msfa::load_profile(dir)};
    });
}

msfa_status msfa_profile_save(const msfa_profile* profile, const char* dir)
{
    return guarded([&] {
        need(profile, "profile");
        need(dir, "dir");
        msfa::save_profile(profile->value, dir);
    });
}

msfa_status msfa_profile_pattern(const msfa_profile* profile, msfa_pattern** out)
{
    return guarded([&] {
        need(profile, "profile");
        need(out, "out");
        *out = new msfa_pattern{profile->value.pattern};
    });
}

msfa_status msfa_profile_band_response(const msfa_profile* profile, size_t band, double* out)
{
    return guarded([&] {
        need(profile, "profile");
        need(out, "out");
        msfa::require(band < profile->value.filters.size(), ErrorKind::InvalidArgument,
                      "band " + std::to_string(band) + " out of range");
        *out = msfa::band_response(profile->value, band);
    });
}

void msfa_profile_free(msfa_profile* profile)
{
    delete profile;
}

// ---- mosaics -----------------------------------------------------------------

msfa_status msfa_mosaic_from_cube(const msfa_cube* cube, const msfa_pattern* pattern, msfa_mosaic** out)
{
    return guarded([&] {
        need(cube, "cube");
        need(pattern, "pattern");
        need(out, "out");
        *out = new msfa_mosaic{msfa::mosaic(cube->value, pattern->value)};
    });
}

msfa_status msfa_mosaic_load(const char* path, msfa_mosaic** out)
{
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = new msfa_mosaic{msfa::load_mosaic(path)};
    });
}

msfa_status msfa_mosaic_save(const msfa_mosaic* mosaic, const char* path)
{
    return guarded([&] {
        need(mosaic, "mosaic");
        need(path, "path");
        msfa::save_mosaic(mosaic->value, path);
    });
}

msfa_status msfa_mosaic_shape(const msfa_mosaic* mosaic, size_t* height, size_t* width, size_t* tile)
{
    return guarded([&] {
        need(mosaic, "mosaic");
        if (height) *height = mosaic->value.height();
        if (width) *width = mosaic->value.width();
        if (tile) *tile = mosaic->value.pattern().tile();
    });
}

msfa_status msfa_mosaic_read(const msfa_mosaic* mosaic, float* data, size_t count)
{
    return guarded([&] {
        need(mosaic, "mosaic");
        need(data, "data");
        need_count(count, mosaic->value.data().size(), "msfa_mosaic_read");
        std::copy(mosaic->value.data().begin(), mosaic->value.data().end(), data);
    });
}

void msfa_mosaic_free(msfa_mosaic* mosaic)
{
    delete mosaic;
}

// ---- simulation --------------------------------------------------------------

msfa_status msfa_simulate_simple(const msfa_cube* cube, const msfa_pattern* pattern, msfa_cube** out)
{
    return guarded([&] {
        need(cube, "cube");
        need(out, "out");
        const auto targets = pattern ? pattern->value.wavelengths() : msfa::simple_band_grid();
        *out = new msfa_cube{msfa::simulate_simple(cube->value, targets)};
    });
}

msfa_status msfa_simulate_real(const msfa_cube* cube, const msfa_profile* profile, msfa_cube** out)
{
    return guarded([&] {
        need(cube, "cube");
        need(profile, "profile");
        need(out, "out");
        *out = new msfa_cube{msfa::simulate_real(cube->value, profile->value)};
    });
}

// ---- networks ----------------------------------------------------------------

msfa_status msfa_architectures(char** text)
{
    return guarded([&] {
        need(text, "json");
        *text = dup_string(json(msfa::nets::architecture_names()).dump());
    });
}

msfa_status msfa_network_create(const char* architecture, uint64_t seed, msfa_network** out)
{
    return guarded([&] {
        need(architecture, "architecture");
        need(out, "out");
        *out = new msfa_network{msfa::nets::build_network<float>(architecture, {seed, true})};
    });
}

msfa_status msfa_network_param_count(const msfa_network* net, size_t* out)
{
    return guarded([&] {
        need(net, "net");
        need(out, "out");
        *out = msfa::nets::count_params(net->value);
    });
}

msfa_status msfa_network_describe(const msfa_network* net, char** text)
{
    return guarded([&] {
        need(net, "net");
        need(text, "json");
        *text = dup_string(net->value.hyperparameters_json());
    });
}

msfa_status msfa_network_load_weights(msfa_network* net, const char* path)
{
    return guarded([&] {
        need(net, "net");
        need(path, "path");
        msfa::nets::load_weights(net->value, path);
    });
}

msfa_status msfa_network_save_weights(const msfa_network* net, const char* path)
{
    return guarded([&] {
        need(net, "net");
        need(path, "path");
        msfa::nets::save_weights(net->value, path);
    });
}

void msfa_network_free(msfa_network* net)
{
    delete net;
}

// ---- demosaicing ---------------------------------------------------------------

msfa_status msfa_demosaic(const msfa_mosaic* mosaic, const char* method, const char* weights_path, msfa_cube** out)
{
    return guarded([&] {
        need(mosaic, "mosaic");
        need(method, "method");
        need(out, "out");
        const std::string m = method;
        msfa::require(m != "truth", ErrorKind::InvalidArgument, "method 'truth' needs a dataset");
        std::map<std::string, std::string> weights;
        if (m.rfind("net:", 0) == 0 && weights_path != nullptr)
            weights[m.substr(4)] = weights_path;
        *out = new msfa_cube{msfa::bench::make_demosaicer(m, weights)(mosaic->value, nullptr)};
    });
}

msfa_status msfa_network_demosaic(const msfa_network* net, const msfa_mosaic* mosaic, msfa_cube** out)
{
    return guarded([&] {
        need(net, "net");
        need(mosaic, "mosaic");
        need(out, "out");
        *out = new msfa_cube{msfa::nets::forward_demosaic(net->value, mosaic->value)};
    });
}

// ---- metrics -------------------------------------------------------------------

msfa_status msfa_evaluate(const msfa_cube* reference, const msfa_cube* test, size_t crop_margin,
                          msfa_metric_report* out)
{
    return guarded([&] {
        need(reference, "reference");
        need(test, "test");
        need(out, "out");
        const auto r = msfa::evaluate(reference->value, test->value, crop_margin);
        *out = {r.ssim, r.psnr_db, r.sam_rad, r.mse, r.sam_excluded};
    });
}

// ---- pipelines -----------------------------------------------------------------

msfa_status msfa_make_corpus(const char* options_json, const char* out_dir)
{
    return guarded([&] {
        need(out_dir, "out_dir");
        const json j = parse_request(options_json);
        msfa::bench::CorpusOptions o;
        for (const auto& [key, value] : j.items()) {
            if (key == "source") o.source = msfa::bench::corpus_source_from_string(value.get<std::string>());
            else if (key == "seed") o.seed = value.get<std::uint64_t>();
            else if (key == "count") o.count = value.get<std::size_t>();
            else if (key == "height") o.height = value.get<std::size_t>();
            else if (key == "width") o.width = value.get<std::size_t>();
            else if (key == "inputs") o.inputs = value.get<std::vector<std::string>>();
            else if (key == "patch") o.patch = value.get<std::size_t>();
            else if (key == "stride") o.stride = value.get<std::size_t>();
            else if (key == "profile") o.profile_dir = value.get<std::string>();
            else if (key == "range") {
                const auto r = value.get<std::vector<double>>();
                msfa::require(r.size() == 2, ErrorKind::InvalidArgument, "range must be [min, max]");
                o.range = msfa::ValueRange{r[0], r[1]};
            } else
                msfa::fail(ErrorKind::InvalidArgument, "corpus options: unknown key \"" + key + "\"");
        }
        msfa::bench::make_corpus(o, out_dir);
    });
}

msfa_status msfa_train(const char* config_json, msfa_epoch_callback on_epoch, void* user, char** summary_json)
{
    return guarded([&] {
        need(config_json, "config_json");
        const auto config = msfa::bench::config_from_json(config_json);
        msfa::bench::EpochCallback cb;
        if (on_epoch)
            cb = [&](const msfa::bench::EpochRecord& r) { on_epoch(msfa::bench::epoch_to_json(r).c_str(), user); };
        const auto run = msfa::bench::train(config, cb);
        if (summary_json)
            *summary_json = dup_string(msfa::bench::run_summary_to_json(run));
    });
}

msfa_status msfa_evaluate_dataset(const char* data_dir, const char* method, const char* options_json,
                                  char** result_json)
{
    return guarded([&] {
        need(data_dir, "data_dir");
        need(method, "method");
        need(result_json, "result_json");
        const json j = parse_request(options_json);
        for (const auto& [key, value] : j.items())
            msfa::require(key == "split" || key == "crop_margin" || key == "weights", ErrorKind::InvalidArgument,
                          "evaluation options: unknown key \"" + key + "\"");
        const auto options = eval_options(j);
        const auto dataset = msfa::bench::Dataset::open(data_dir);
        const auto e = msfa::bench::evaluate_method(method, dataset, options);
        *result_json = dup_string(msfa::bench::evaluation_to_json(e, options));
    });
}

msfa_status msfa_bench(const char* data_dir, const char* request_json, const char* out_dir, char** csv)
{
    return guarded([&] {
        need(data_dir, "data_dir");
        need(out_dir, "out_dir");
        const json j = parse_request(request_json);
        for (const auto& [key, value] : j.items())
            msfa::require(key == "methods" || key == "weights" || key == "split" || key == "crop_margin" ||
                              key == "scene" || key == "rois",
                          ErrorKind::InvalidArgument, "bench request: unknown key \"" + key + "\"");
        msfa::require(j.contains("methods"), ErrorKind::InvalidArgument, "bench request needs \"methods\"");
        const auto methods = j.at("methods").get<std::vector<std::string>>();
        msfa::require(!methods.empty(), ErrorKind::InvalidArgument, "bench request lists no methods");
        const auto options = eval_options(j);
        msfa::bench::ReportOptions report;
        if (j.contains("scene"))
            report.scene = j.at("scene").get<std::string>();
        if (j.contains("rois"))
            for (const auto& r : j.at("rois").get<std::vector<std::vector<std::size_t>>>()) {
                msfa::require(r.size() == 4, ErrorKind::InvalidArgument, "ROI must be [y, x, height, width]");
                report.rois.push_back({r[0], r[1], r[2], r[3]});
            }

        const auto dataset = msfa::bench::Dataset::open(data_dir);
        std::vector<msfa::bench::MethodEvaluation> evals;
        for (const auto& m : methods)
            evals.push_back(msfa::bench::evaluate_method(m, dataset, options));
        const auto rows = msfa::bench::write_report(evals, dataset, options, out_dir, report);
        if (csv)
            *csv = dup_string(msfa::bench::rows_to_csv(rows));
    });
}

} // extern "C"
