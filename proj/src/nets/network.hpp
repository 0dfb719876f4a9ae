// SPDX-License-Identifier: Apache-2.0
// Copyright Contributors to the msfa Project.

#pragma once

#include "ad/checkpoint.hpp"
#include "ad/tensor.hpp"
#include "hsi/cube.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace msfa::nets {

using ad::Extent3;
using ad::Tape;
using ad::Tensor;

/// Network inputs. Tensors are rank 5, [1, 1, D, H, W] with D = 1 for the
/// mosaic and D = 16 for cubes; the low-resolution cube is H/4 x W/4.
enum class NetInput { Mosaic, IdCube, BilinearCube, LowresCube };

const char* to_string(NetInput input) noexcept;

template <typename T>
struct NetInputs
{
    Tensor<T> mosaic;
    Tensor<T> id_cube;
    Tensor<T> bilinear_cube;
    Tensor<T> lowres_cube;
};

struct LayerInfo
{
    std::string name;
    std::string type; ///< conv3d, conv_transpose3d or maxpool3d
    std::size_t in_channels = 0;
    std::size_t out_channels = 0;
    Extent3 kernel;
    Extent3 stride;
    Extent3 padding{0, 0, 0};
    bool relu = false;
};

struct NetOptions
{
    std::uint64_t seed = 0;
    /// Start the last layer of residual networks at zero so they begin as
    /// the identity on their input cube.
    bool zero_init_final = true;
};

template <typename T>
class Network
{
public:
    using ForwardFn = std::function<Tensor<T>(Tape<T>*, const NetInputs<T>&)>;

    const std::string& name() const noexcept { return name_; }
    const std::vector<NetInput>& inputs() const noexcept { return inputs_; }
    bool needs(NetInput input) const;
    const std::vector<LayerInfo>& layers() const noexcept { return layers_; }

    const std::vector<std::string>& param_names() const noexcept { return param_names_; }
    const std::vector<Tensor<T>>& params() const noexcept { return params_; }
    Tensor<T> param(const std::string& name) const;

    /// Output [1, 1, 16, H, W]. Validates the inputs this network uses.
    Tensor<T> forward(Tape<T>* tape, const NetInputs<T>& in) const;

    /// Architecture description: name, inputs, layer list, parameter count.
    std::string hyperparameters_json() const;

private:
    template <typename U>
    friend class Builder;

    std::string name_;
    std::vector<NetInput> inputs_;
    std::vector<LayerInfo> layers_;
    std::vector<std::string> param_names_;
    std::vector<Tensor<T>> params_;
    ForwardFn forward_;
};

/// id-resnet-l, id-resnet-s, id-unet, parallel-s, parallel-l, unet-ref, resnet-ref.
const std::vector<std::string>& architecture_names();

template <typename T>
Network<T> build_network(const std::string& name, const NetOptions& options = {});

template <typename T> Network<T> build_resnet_ref(const NetOptions& o = {}) { return build_network<T>("resnet-ref", o); }
template <typename T> Network<T> build_id_resnet_l(const NetOptions& o = {}) { return build_network<T>("id-resnet-l", o); }
template <typename T> Network<T> build_id_resnet_s(const NetOptions& o = {}) { return build_network<T>("id-resnet-s", o); }
template <typename T> Network<T> build_id_unet(const NetOptions& o = {}) { return build_network<T>("id-unet", o); }
template <typename T> Network<T> build_unet_ref(const NetOptions& o = {}) { return build_network<T>("unet-ref", o); }
template <typename T> Network<T> build_parallel_s(const NetOptions& o = {}) { return build_network<T>("parallel-s", o); }
template <typename T> Network<T> build_parallel_l(const NetOptions& o = {}) { return build_network<T>("parallel-l", o); }

template <typename T>
std::size_t count_params(const Network<T>& net);

// ---- weights ---------------------------------------------------------------

template <typename T>
std::vector<ad::CheckpointEntry> export_weights(const Network<T>& net);

/// Copies values into the network. Names and shapes must match exactly.
template <typename T>
void import_weights(const Network<T>& net, const std::vector<ad::CheckpointEntry>& entries);

template <typename T>
void save_weights(const Network<T>& net, const std::string& path);
template <typename T>
void load_weights(const Network<T>& net, const std::string& path);

// ---- cube <-> tensor ---------------------------------------------------------

template <typename T>
Tensor<T> cube_tensor(const SpectralCube& cube);
template <typename T>
Tensor<T> mosaic_tensor(const MosaicImage& mosaic);
/// [1, 1, B, H, W] to a cube, clamping values to [0, 1].
template <typename T>
SpectralCube tensor_to_cube(const Tensor<T>& t, const std::vector<double>& wavelengths_nm);

/// Builds every input the network declares from the raw frame using the
/// classical transforms (scatter + id_demosaic / wb_demosaic, lowres_cube).
template <typename T>
NetInputs<T> prepare_inputs(const Network<T>& net, const MosaicImage& mosaic);

/// prepare_inputs, forward without recording, clamp to [0, 1].
template <typename T>
SpectralCube forward_demosaic(const Network<T>& net, const MosaicImage& mosaic);

} // namespace msfa::nets
