// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#include "nets/network.hpp"

#include "core/error.hpp"
#include "demosaic/classic.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

namespace msfa::nets {

using ad::Shape;

const char* to_string(NetInput input) noexcept
{
    switch (input) {
    case NetInput::Mosaic: return "mosaic";
    case NetInput::IdCube: return "id_cube";
    case NetInput::BilinearCube: return "bilinear_cube";
    case NetInput::LowresCube: return "lowres_cube";
    }
    return "?";
}

namespace {

constexpr std::size_t kBands = 16;
constexpr std::size_t kTile = 4;

template <typename T>
struct Conv
{
    Tensor<T> w, b;
    Extent3 stride{1, 1, 1};
    Extent3 pad{1, 1, 1};
    bool relu = true;

    Tensor<T> operator()(Tape<T>* t, const Tensor<T>& x) const
    {
        Tensor<T> y = ad::conv3d(t, x, w, b, pad, stride);
        return relu ? ad::relu(t, y) : y;
    }
};

template <typename T>
struct ConvT
{
    Tensor<T> w, b;
    Extent3 stride{1, 1, 1};
    bool relu = true;

    Tensor<T> operator()(Tape<T>* t, const Tensor<T>& x) const
    {
        Tensor<T> y = ad::conv_transpose3d(t, x, w, b, stride);
        return relu ? ad::relu(t, y) : y;
    }
};

/// Conv-blocks on the main path (the last one linear), a 1x1x1 projection on
/// the skip path, ReLU after the sum.
template <typename T>
struct ResBlock
{
    std::vector<Conv<T>> main;
    Conv<T> skip;

    Tensor<T> operator()(Tape<T>* t, const Tensor<T>& x) const
    {
        Tensor<T> h = x;
        for (const auto& c : main)
            h = c(t, h);
        return ad::relu(t, ad::add(t, h, skip(t, x)));
    }
};

template <typename T>
Tensor<T> run(Tape<T>* t, const std::vector<ResBlock<T>>& blocks, Tensor<T> x)
{
    for (const auto& b : blocks)
        x = b(t, x);
    return x;
}

template <typename T>
Tensor<T> run(Tape<T>* t, const std::vector<Conv<T>>& convs, Tensor<T> x)
{
    for (const auto& c : convs)
        x = c(t, x);
    return x;
}

/// Normal deviates from raw engine bits (Box-Muller), so initial weights do
/// not depend on the standard library's distribution implementations.
class Normal
{
public:
    explicit Normal(std::uint64_t seed) : rng_(seed) {}
    double operator()()
    {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = (double(rng_() >> 11) + 1.0) * 0x1.0p-53;
        const double u2 = double(rng_() >> 11) * 0x1.0p-53;
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
        has_spare_ = true;
        return r * std::cos(2.0 * std::numbers::pi * u2);
    }

private:
    std::mt19937_64 rng_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

} // namespace

template <typename T>
class Builder
{
public:
    Builder(Network<T>& net, const NetOptions& o) : net_(net), normal_(o.seed), zero_final_(o.zero_init_final) {}

    Conv<T> conv(const std::string& name, std::size_t cin, std::size_t cout, bool relu = true,
                 Extent3 k = {3, 3, 3}, Extent3 stride = {1, 1, 1}, Extent3 pad = {1, 1, 1}, bool zero = false)
    {
        Conv<T> c;
        c.w = weight(name + ".weight", {cout, cin, k.d, k.h, k.w}, cin * k.d * k.h * k.w, zero);
        c.b = bias(name + ".bias", cout);
        c.stride = stride;
        c.pad = pad;
        c.relu = relu;
        net_.layers_.push_back({name, "conv3d", cin, cout, k, stride, pad, relu});
        return c;
    }

    /// Linear output layer; zero-initialized when `residual` and enabled.
    Conv<T> final_conv(const std::string& name, std::size_t cin, bool residual)
    {
        return conv(name, cin, 1, false, {3, 3, 3}, {1, 1, 1}, {1, 1, 1}, residual && zero_final_);
    }

    ConvT<T> convT(const std::string& name, std::size_t cin, std::size_t cout, Extent3 k, Extent3 stride, bool relu)
    {
        ConvT<T> c;
        const std::size_t fan = cin * (k.d * k.h * k.w) / (stride.d * stride.h * stride.w);
        c.w = weight(name + ".weight", {cin, cout, k.d, k.h, k.w}, std::max<std::size_t>(fan, 1), false);
        c.b = bias(name + ".bias", cout);
        c.stride = stride;
        c.relu = relu;
        net_.layers_.push_back({name, "conv_transpose3d", cin, cout, k, stride, {0, 0, 0}, relu});
        return c;
    }

    ResBlock<T> res_block(const std::string& name, std::size_t cin, std::size_t cout, std::size_t n_main)
    {
        ResBlock<T> r;
        for (std::size_t i = 0; i < n_main; ++i)
            r.main.push_back(conv(name + ".conv" + std::to_string(i + 1), i == 0 ? cin : cout, cout, i + 1 < n_main));
        r.skip = conv(name + ".skip", cin, cout, false, {1, 1, 1}, {1, 1, 1}, {0, 0, 0});
        return r;
    }

    /// Mosaic [1,1,1,H,W] -> [1,1,16,H/4,W/4]: one stride-4 4x4 filter per
    /// output band, then the filter axis becomes the spectral axis.
    Conv<T> m2c(const std::string& name)
    {
        return conv(name, 1, kBands, false, {1, kTile, kTile}, {1, kTile, kTile}, {0, 0, 0});
    }

    void set_name(const std::string& name) { net_.name_ = name; }
    void set_inputs(std::vector<NetInput> inputs) { net_.inputs_ = std::move(inputs); }
    void set_forward(typename Network<T>::ForwardFn fn) { net_.forward_ = std::move(fn); }

    void pool(const std::string& name, std::size_t channels, Extent3 window)
    {
        net_.layers_.push_back({name, "maxpool3d", channels, channels, window, window, {0, 0, 0}, false});
    }

private:
    Tensor<T> weight(const std::string& name, Shape shape, std::size_t fan_in, bool zero)
    {
        Tensor<T> t(std::move(shape), true);
        if (!zero) {
            const double std = std::sqrt(2.0 / double(fan_in));
            for (T& v : t.data())
                v = T(std * normal_());
        }
        add(name, t);
        return t;
    }

    Tensor<T> bias(const std::string& name, std::size_t n)
    {
        Tensor<T> t({n}, true);
        add(name, t);
        return t;
    }

    void add(const std::string& name, const Tensor<T>& t)
    {
        net_.param_names_.push_back(name);
        net_.params_.push_back(t);
    }

    Network<T>& net_;
    Normal normal_;
    bool zero_final_;
};

namespace {

template <typename T>
Tensor<T> lowres_from_mosaic(Tape<T>* t, const Conv<T>& m2c, const Tensor<T>& mosaic)
{
    const Tensor<T> y = m2c(t, mosaic); // [1, 16, 1, H/4, W/4]
    return ad::reshape(t, y, {1, 1, kBands, y.extent(3), y.extent(4)});
}

template <typename T>
void build_resnet(Builder<T>& b, bool small, NetInput input)
{
    std::vector<ResBlock<T>> blocks;
    std::size_t width;
    if (small) {
        blocks.push_back(b.res_block("block1", 1, 16, 4));
        blocks.push_back(b.res_block("block2", 16, 32, 4));
        width = 32;
    } else {
        const std::size_t filters[5] = {8, 16, 32, 64, 64};
        std::size_t cin = 1;
        for (std::size_t i = 0; i < 5; ++i) {
            blocks.push_back(b.res_block("block" + std::to_string(i + 1), cin, filters[i], i < 2 ? 2 : 3));
            cin = filters[i];
        }
        width = 64;
    }
    const Conv<T> final = b.final_conv("final", width, true);
    b.set_inputs({input});
    b.set_forward([blocks, final, input](Tape<T>* t, const NetInputs<T>& in) {
        const Tensor<T>& x = input == NetInput::IdCube ? in.id_cube : in.bilinear_cube;
        return ad::add(t, x, final(t, run(t, blocks, x)));
    });
}

template <typename T>
void build_unet(Builder<T>& b, bool inject_id)
{
    std::vector<Conv<T>> enc{b.conv("enc1", 1, 16), b.conv("enc2", 16, 16)};
    b.pool("pool", 16, {1, kTile, kTile});
    std::vector<Conv<T>> low{b.conv("low1", 16, 32), b.conv("low2", 32, 32)};
    const std::size_t up_ch = inject_id ? 8 : 16;
    const ConvT<T> up = b.convT("up", 32, up_ch, {kBands, kTile, kTile}, {1, kTile, kTile}, true);
    const std::size_t fuse_in = inject_id ? up_ch + 1 : up_ch;
    std::vector<Conv<T>> dec{b.conv("dec1", fuse_in, 16), b.conv("dec2", 16, 16)};
    const Conv<T> final = b.final_conv("final", 16, false);
    b.set_inputs(inject_id ? std::vector<NetInput>{NetInput::Mosaic, NetInput::IdCube}
                            : std::vector<NetInput>{NetInput::Mosaic});
    b.set_forward([=](Tape<T>* t, const NetInputs<T>& in) {
        Tensor<T> x = run(t, enc, in.mosaic);
        x = ad::maxpool3d(t, x, Extent3{1, kTile, kTile});
        x = up(t, run(t, low, x)); // [1, up_ch, 16, H, W]
        if (inject_id)
            x = ad::concat_channels(t, x, in.id_cube);
        return final(t, run(t, dec, x));
    });
}

template <typename T>
void build_parallel_s(Builder<T>& b)
{
    // Branch a: mosaic -> low-resolution cube -> features -> x4 upsampling.
    const Conv<T> a_m2c = b.m2c("a.m2c");
    std::vector<Conv<T>> a_convs{b.conv("a.conv1", 1, 32), b.conv("a.conv2", 32, 64), b.conv("a.conv3", 64, 64)};
    const ConvT<T> a_up = b.convT("a.up", 64, 32, {1, kTile, kTile}, {1, kTile, kTile}, true);
    // Branch b: the small residual trunk on the ID cube.
    std::vector<ResBlock<T>> b_blocks{b.res_block("b.block1", 1, 16, 4), b.res_block("b.block2", 16, 32, 4)};
    const Conv<T> fuse = b.conv("fuse", 32, 16);
    const Conv<T> final = b.final_conv("final", 16, true);
    b.set_inputs({NetInput::Mosaic, NetInput::IdCube});
    b.set_forward([=](Tape<T>* t, const NetInputs<T>& in) {
        const Tensor<T> fa = a_up(t, run(t, a_convs, lowres_from_mosaic(t, a_m2c, in.mosaic)));
        const Tensor<T> fb = run(t, b_blocks, in.id_cube);
        return ad::add(t, in.id_cube, final(t, fuse(t, ad::add(t, fa, fb))));
    });
}

template <typename T>
void build_parallel_l(Builder<T>& b)
{
    // Branch a: M2C features on the low-resolution cube.
    std::vector<Conv<T>> a_convs{b.conv("a.conv1", 1, 64), b.conv("a.conv2", 64, 64), b.conv("a.conv3", 64, 64),
                                 b.conv("a.conv4", 64, 32)};
    // Branch b: learned mosaic-to-cube rearrangement, then the small residual trunk.
    const Conv<T> b_m2c = b.m2c("b.m2c");
    std::vector<ResBlock<T>> b_blocks{b.res_block("b.block1", 1, 16, 4), b.res_block("b.block2", 16, 32, 4)};
    const ConvT<T> up1 = b.convT("up1", 32, 32, {1, 2, 2}, {1, 2, 2}, true);
    const ConvT<T> up2 = b.convT("up2", 32, 16, {1, 2, 2}, {1, 2, 2}, true);
    const Conv<T> final = b.final_conv("final", 16, false);
    b.set_inputs({NetInput::LowresCube, NetInput::Mosaic});
    b.set_forward([=](Tape<T>* t, const NetInputs<T>& in) {
        const Tensor<T> fa = run(t, a_convs, in.lowres_cube);
        const Tensor<T> fb = run(t, b_blocks, lowres_from_mosaic(t, b_m2c, in.mosaic));
        return final(t, up2(t, up1(t, ad::add(t, fa, fb))));
    });
}

void check_tensor(const char* what, const Shape& expect_prefix, const Shape& got)
{
    require(got.size() == 5 && got[0] == expect_prefix[0] && got[1] == expect_prefix[1] && got[2] == expect_prefix[2],
            ErrorKind::ShapeMismatch,
            std::string(what) + " must be [" + std::to_string(expect_prefix[0]) + ", " +
                std::to_string(expect_prefix[1]) + ", " + std::to_string(expect_prefix[2]) + ", H, W], got " +
                ad::to_string(got));
}

} // namespace

template <typename T>
bool Network<T>::needs(NetInput input) const
{
    return std::find(inputs_.begin(), inputs_.end(), input) != inputs_.end();
}

template <typename T>
Tensor<T> Network<T>::param(const std::string& name) const
{
    for (std::size_t i = 0; i < param_names_.size(); ++i)
        if (param_names_[i] == name)
            return params_[i];
    fail(ErrorKind::InvalidArgument, name_ + ": no parameter named '" + name + "'");
}

template <typename T>
Tensor<T> Network<T>::forward(Tape<T>* tape, const NetInputs<T>& in) const
{
    require(static_cast<bool>(forward_), ErrorKind::State, "network has not been built");
    // Full-resolution extent, taken from whichever full-size input is present.
    std::size_t H = 0, W = 0;
    const auto full = [&](const char* what, const Tensor<T>& t, std::size_t depth) {
        require(t.defined(), ErrorKind::InvalidArgument, name_ + ": missing input " + what);
        check_tensor(what, {1, 1, depth}, t.shape());
        if (H == 0) {
            H = t.extent(3);
            W = t.extent(4);
        }
        require(t.extent(3) == H && t.extent(4) == W, ErrorKind::ShapeMismatch,
                name_ + ": input " + what + " is " + ad::to_string(t.shape()) + ", expected spatial size " +
                    std::to_string(H) + "x" + std::to_string(W));
    };
    if (needs(NetInput::Mosaic))
        full("mosaic", in.mosaic, 1);
    if (needs(NetInput::IdCube))
        full("id_cube", in.id_cube, kBands);
    if (needs(NetInput::BilinearCube))
        full("bilinear_cube", in.bilinear_cube, kBands);
    if (needs(NetInput::LowresCube)) {
        require(in.lowres_cube.defined(), ErrorKind::InvalidArgument, name_ + ": missing input lowres_cube");
        check_tensor("lowres_cube", {1, 1, kBands}, in.lowres_cube.shape());
        if (H == 0) {
            H = in.lowres_cube.extent(3) * kTile;
            W = in.lowres_cube.extent(4) * kTile;
        }
        require(in.lowres_cube.extent(3) * kTile == H && in.lowres_cube.extent(4) * kTile == W,
                ErrorKind::ShapeMismatch,
                name_ + ": low-resolution cube " + ad::to_string(in.lowres_cube.shape()) +
                    " does not match the full-resolution size " + std::to_string(H) + "x" + std::to_string(W));
    }
    require(H % kTile == 0 && W % kTile == 0, ErrorKind::InvalidGeometry,
            name_ + ": spatial size " + std::to_string(H) + "x" + std::to_string(W) + " is not a multiple of " +
                std::to_string(kTile));
    return forward_(tape, in);
}

template <typename T>
std::string Network<T>::hyperparameters_json() const
{
    nlohmann::ordered_json j;
    j["name"] = name_;
    std::vector<std::string> ins;
    for (NetInput i : inputs_)
        ins.push_back(to_string(i));
    j["inputs"] = ins;
    j["bands"] = kBands;
    j["tile"] = kTile;
    nlohmann::ordered_json layers = nlohmann::ordered_json::array();
    const auto ext = [](Extent3 e) { return std::vector<std::size_t>{e.d, e.h, e.w}; };
    for (const auto& l : layers_) {
        nlohmann::ordered_json o;
        o["name"] = l.name;
        o["type"] = l.type;
        o["in_channels"] = l.in_channels;
        o["out_channels"] = l.out_channels;
        o["kernel"] = ext(l.kernel);
        o["stride"] = ext(l.stride);
        o["padding"] = ext(l.padding);
        o["relu"] = l.relu;
        layers.push_back(o);
    }
    j["layers"] = layers;
    j["param_count"] = count_params(*this);
    return j.dump(2) + "\n";
}

const std::vector<std::string>& architecture_names()
{
    static const std::vector<std::string> names{"id-resnet-l", "id-resnet-s", "id-unet",   "parallel-s",
                                                "parallel-l",  "unet-ref",    "resnet-ref"};
    return names;
}

template <typename T>
Network<T> build_network(const std::string& name, const NetOptions& options)
{
    Network<T> net;
    Builder<T> b(net, options);
    b.set_name(name);
    if (name == "id-resnet-s")
        build_resnet(b, true, NetInput::IdCube);
    else if (name == "id-resnet-l")
        build_resnet(b, false, NetInput::IdCube);
    else if (name == "resnet-ref")
        build_resnet(b, false, NetInput::BilinearCube);
    else if (name == "id-unet")
        build_unet(b, true);
    else if (name == "unet-ref")
        build_unet(b, false);
    else if (name == "parallel-s")
        build_parallel_s(b);
    else if (name == "parallel-l")
        build_parallel_l(b);
    else
        fail(ErrorKind::InvalidArgument, "unknown architecture '" + name + "'");
    return net;
}

template <typename T>
std::size_t count_params(const Network<T>& net)
{
    std::size_t n = 0;
    for (const auto& p : net.params())
        n += p.size();
    return n;
}

template <typename T>
std::vector<ad::CheckpointEntry> export_weights(const Network<T>& net)
{
    std::vector<ad::CheckpointEntry> out;
    for (std::size_t i = 0; i < net.params().size(); ++i) {
        const auto& p = net.params()[i];
        out.push_back({net.param_names()[i], p.shape(), std::vector<float>(p.data().begin(), p.data().end())});
    }
    return out;
}

template <typename T>
void import_weights(const Network<T>& net, const std::vector<ad::CheckpointEntry>& entries)
{
    require(entries.size() == net.params().size(), ErrorKind::ShapeMismatch,
            net.name() + ": checkpoint has " + std::to_string(entries.size()) + " tensors, network has " +
                std::to_string(net.params().size()));
    for (std::size_t i = 0; i < entries.size(); ++i) {
        require(entries[i].name == net.param_names()[i], ErrorKind::ShapeMismatch,
                net.name() + ": checkpoint tensor " + std::to_string(i) + " is '" + entries[i].name +
                    "', expected '" + net.param_names()[i] + "'");
        require(entries[i].shape == net.params()[i].shape(), ErrorKind::ShapeMismatch,
                net.name() + ": tensor '" + entries[i].name + "' has shape " + ad::to_string(entries[i].shape) +
                    ", expected " + ad::to_string(net.params()[i].shape()));
    }
    for (std::size_t i = 0; i < entries.size(); ++i) {
        Tensor<T> p = net.params()[i];
        std::transform(entries[i].values.begin(), entries[i].values.end(), p.data().begin(),
                       [](float v) { return T(v); });
    }
}

template <typename T>
void save_weights(const Network<T>& net, const std::string& path)
{
    ad::save_checkpoint(path, export_weights(net));
}

template <typename T>
void load_weights(const Network<T>& net, const std::string& path)
{
    import_weights(net, ad::load_checkpoint(path));
}

template <typename T>
Tensor<T> cube_tensor(const SpectralCube& cube)
{
    return Tensor<T>({1, 1, cube.bands(), cube.height(), cube.width()},
                     std::vector<T>(cube.data().begin(), cube.data().end()));
}

template <typename T>
Tensor<T> mosaic_tensor(const MosaicImage& m)
{
    return Tensor<T>({1, 1, 1, m.height(), m.width()}, std::vector<T>(m.data().begin(), m.data().end()));
}

template <typename T>
SpectralCube tensor_to_cube(const Tensor<T>& t, const std::vector<double>& wavelengths)
{
    require(t.rank() == 5 && t.extent(0) == 1 && t.extent(1) == 1, ErrorKind::ShapeMismatch,
            "expected a [1, 1, B, H, W] tensor, got " + ad::to_string(t.shape()));
    std::vector<float> v(t.size());
    std::transform(t.data().begin(), t.data().end(), v.begin(),
                   [](T x) { return static_cast<float>(std::clamp(double(x), 0.0, 1.0)); });
    return SpectralCube(t.extent(2), t.extent(3), t.extent(4), wavelengths, std::move(v));
}

template <typename T>
NetInputs<T> prepare_inputs(const Network<T>& net, const MosaicImage& m)
{
    require(m.pattern().tile() == kTile, ErrorKind::InvalidGeometry,
            net.name() + " expects a " + std::to_string(kTile) + "x" + std::to_string(kTile) + " pattern");
    NetInputs<T> in;
    if (net.needs(NetInput::Mosaic))
        in.mosaic = mosaic_tensor<T>(m);
    if (net.needs(NetInput::IdCube) || net.needs(NetInput::BilinearCube)) {
        const SparseCube s = scatter(m);
        if (net.needs(NetInput::IdCube))
            in.id_cube = cube_tensor<T>(id_demosaic(s));
        if (net.needs(NetInput::BilinearCube))
            in.bilinear_cube = cube_tensor<T>(wb_demosaic(s));
    }
    if (net.needs(NetInput::LowresCube))
        in.lowres_cube = cube_tensor<T>(lowres_cube(m));
    return in;
}

template <typename T>
SpectralCube forward_demosaic(const Network<T>& net, const MosaicImage& m)
{
    return tensor_to_cube(net.forward(nullptr, prepare_inputs(net, m)), m.pattern().wavelengths());
}

#define MSFA_NETS_INSTANTIATE(T)                                                                                       \
    template class Network<T>;                                                                                         \
    template Network<T> build_network<T>(const std::string&, const NetOptions&);                                       \
    template std::size_t count_params<T>(const Network<T>&);                                                           \
    template std::vector<ad::CheckpointEntry> export_weights<T>(const Network<T>&);                                    \
    template void import_weights<T>(const Network<T>&, const std::vector<ad::CheckpointEntry>&);                       \
    template void save_weights<T>(const Network<T>&, const std::string&);                                              \
    template void load_weights<T>(const Network<T>&, const std::string&);                                              \
    template Tensor<T> cube_tensor<T>(const SpectralCube&);                                                            \
    template Tensor<T> mosaic_tensor<T>(const MosaicImage&);                                                           \
    template SpectralCube tensor_to_cube<T>(const Tensor<T>&, const std::vector<double>&);                             \
    template NetInputs<T> prepare_inputs<T>(const Network<T>&, const MosaicImage&);                                    \
    template SpectralCube forward_demosaic<T>(const Network<T>&, const MosaicImage&);

MSFA_NETS_INSTANTIATE(float)
MSFA_NETS_INSTANTIATE(double)

} // namespace msfa::nets
