// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "bench/corpus.hpp"

#include "camera/profile.hpp"
#include "camera/simulate.hpp"
#include "camera/synthetic.hpp"
#include "core/binary_io.hpp"
#include "core/error.hpp"
#include "hsi/cube_io.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <set>

namespace msfa::bench {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kManifestVersion = 1;

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::string stem_of(const std::string& path)
{
    std::string stem = fs::path(path).stem().string();
    for (char& c : stem)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_'))
            c = '_';
    return stem.empty() ? std::string("cube") : stem;
}

SpectralCube normalized(const SpectralCube& cube, const std::optional<ValueRange>& range, const std::string& path)
{
    if (range)
        return normalize_cube(cube, *range);
    const float peak = *std::max_element(cube.data().begin(), cube.data().end());
    require(peak > 0.0f, ErrorKind::InvalidArgument, path + ": cube has no positive values to normalize by");
    return normalize_cube(cube, {0.0, double(peak)});
}

struct Scene
{
    std::string id;
    SpectralCube truth;
};

std::vector<Scene> synthetic_scenes(const CorpusOptions& o)
{
    require(o.count >= 3, ErrorKind::InvalidArgument, "synthetic corpus needs at least 3 scenes");
    std::vector<Scene> scenes;
    scenes.reserve(o.count);
    for (std::size_t i = 0; i < o.count; ++i) {
        SyntheticSceneOptions so;
        so.height = o.height;
        so.width = o.width;
        so.seed = splitmix64(o.seed * 0x100000001b3ULL + i);
        char id[32];
        std::snprintf(id, sizeof id, "scene_%04zu", i);
        scenes.push_back({id, synthetic_scene(so)});
    }
    return scenes;
}

std::vector<Scene> patch_scenes(const CorpusOptions& o, const MsfaPattern& pattern,
                                const CameraProfile* profile)
{
    require(!o.inputs.empty(), ErrorKind::InvalidArgument, "corpus source needs at least one input cube");
    std::vector<Scene> scenes;
    for (std::size_t i = 0; i < o.inputs.size(); ++i) {
        const std::string& path = o.inputs[i];
        const SpectralCube cube = normalized(load_cube(path), o.range, path);
        const SpectralCube sim =
            profile ? simulate_real(cube, *profile) : simulate_simple(cube, pattern.wavelengths());
        char prefix[16];
        std::snprintf(prefix, sizeof prefix, "i%02zu_", i);
        for (auto& p : extract_patches(sim, o.patch, o.patch, o.stride, pattern.tile())) {
            char pos[32];
            std::snprintf(pos, sizeof pos, "_y%04zu_x%04zu", p.y, p.x);
            scenes.push_back({prefix + stem_of(path) + pos, std::move(p.cube)});
        }
    }
    return scenes;
}

std::vector<std::string> string_list(const json& j, const char* key, const std::string& context)
{
    require(j.contains(key) && j.at(key).is_array(), ErrorKind::UnsupportedFormat,
            context + ": manifest lacks \"" + key + "\"");
    return j.at(key).get<std::vector<std::string>>();
}

} // namespace

const char* to_string(CorpusSource source) noexcept
{
    switch (source) {
    case CorpusSource::Simple: return "simple";
    case CorpusSource::Real: return "real";
    case CorpusSource::Synthetic: return "synthetic";
    }
    return "?";
}

CorpusSource corpus_source_from_string(const std::string& name)
{
    if (name == "simple")
        return CorpusSource::Simple;
    if (name == "real")
        return CorpusSource::Real;
    if (name == "synthetic")
        return CorpusSource::Synthetic;
    fail(ErrorKind::InvalidArgument, "unknown corpus source '" + name + "' (simple, real, synthetic)");
}

Dataset make_corpus(const CorpusOptions& o, const std::string& out_dir)
{
    require(o.patch >= 1 && o.stride >= 1, ErrorKind::InvalidArgument, "patch size and stride must be positive");

    std::vector<Scene> scenes;
    MsfaPattern pattern = MsfaPattern::row_major(4, simple_band_grid());
    switch (o.source) {
    case CorpusSource::Synthetic:
        scenes = synthetic_scenes(o);
        break;
    case CorpusSource::Simple:
        scenes = patch_scenes(o, pattern, nullptr);
        break;
    case CorpusSource::Real: {
        const CameraProfile profile = o.profile_dir.empty() ? default_profile() : load_profile(o.profile_dir);
        profile.validate();
        pattern = profile.pattern;
        scenes = patch_scenes(o, pattern, &profile);
        break;
    }
    }

    std::vector<std::string> ids;
    std::set<std::string> unique;
    for (const Scene& s : scenes) {
        require(unique.insert(s.id).second, ErrorKind::InvalidArgument, "duplicate scene id " + s.id);
        ids.push_back(s.id);
    }
    require(ids.size() >= 3, ErrorKind::InvalidGeometry,
            "corpus yields " + std::to_string(ids.size()) + " scenes; at least 3 are needed for a split");
    const DatasetSplit split = split_dataset(ids, o.seed);

    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "truth", ec);
    fs::create_directories(fs::path(out_dir) / "mosaic", ec);
    require(!ec, ErrorKind::Io, "cannot create corpus directory " + out_dir + ": " + ec.message());

    for (const Scene& s : scenes) {
        save_cube(s.truth, (fs::path(out_dir) / "truth" / (s.id + ".hsc")).string());
        save_mosaic(mosaic(s.truth, pattern), (fs::path(out_dir) / "mosaic" / (s.id + ".msm")).string());
    }

    json manifest;
    manifest["format"] = "msfa-corpus";
    manifest["version"] = kManifestVersion;
    manifest["source"] = to_string(o.source);
    manifest["seed"] = o.seed;
    manifest["pattern"] = json::parse(pattern_to_json(pattern));
    manifest["scenes"] = json(ids);
    manifest["split"] = {{"train", json(split.train)},
                         {"validation", json(split.validation)},
                         {"test", json(split.test)}};
    if (o.source == CorpusSource::Synthetic) {
        manifest["height"] = o.height;
        manifest["width"] = o.width;
    } else {
        std::vector<std::string> names;
        for (const auto& p : o.inputs)
            names.push_back(fs::path(p).filename().string());
        manifest["inputs"] = names;
        manifest["patch"] = o.patch;
        manifest["stride"] = o.stride;
    }
    io::write_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
    return Dataset::open(out_dir);
}

Dataset Dataset::open(const std::string& dir)
{
    const std::string path = (fs::path(dir) / "manifest.json").string();
    const auto bytes = io::read_file(path);
    json m;
    try {
        m = json::parse(bytes.begin(), bytes.end());
    } catch (const json::exception& e) {
        fail(ErrorKind::UnsupportedFormat, path + ": " + e.what());
    }
    require(m.value("format", "") == "msfa-corpus", ErrorKind::UnsupportedFormat, path + ": not a corpus manifest");
    require(m.value("version", 0) == kManifestVersion, ErrorKind::UnsupportedFormat,
            path + ": unsupported manifest version");
    require(m.contains("split") && m.contains("pattern"), ErrorKind::UnsupportedFormat,
            path + ": manifest lacks split or pattern");

    Dataset d;
    d.root_ = dir;
    d.source_ = m.value("source", "");
    d.pattern_ = pattern_from_json(m.at("pattern").dump());
    d.scenes_ = string_list(m, "scenes", path);
    d.split_.train = string_list(m.at("split"), "train", path);
    d.split_.validation = string_list(m.at("split"), "validation", path);
    d.split_.test = string_list(m.at("split"), "test", path);

    const std::set<std::string> known(d.scenes_.begin(), d.scenes_.end());
    for (Split s : {Split::Train, Split::Validation, Split::Test})
        for (const auto& id : d.split_.of(s))
            require(known.count(id) != 0, ErrorKind::UnsupportedFormat,
                    path + ": split names unknown scene " + id);
    return d;
}

std::string Dataset::truth_path(const std::string& scene) const
{
    return (fs::path(root_) / "truth" / (scene + ".hsc")).string();
}

std::string Dataset::mosaic_path(const std::string& scene) const
{
    return (fs::path(root_) / "mosaic" / (scene + ".msm")).string();
}

SpectralCube Dataset::load_truth(const std::string& scene) const
{
    return load_cube(truth_path(scene), CubeFormat::Hsc1);
}

MosaicImage Dataset::load_mosaic(const std::string& scene) const
{
    return msfa::load_mosaic(mosaic_path(scene));
}

} // namespace msfa::bench
