#pragma once

#include <map>
#include <string>
#include <vector>

#include "scatnet/dtcwt.hpp"
#include "scatnet/filters.hpp"
#include "scatnet/image.hpp"

namespace scatnet {

enum class OutputAlignment {
    kAreaAverage,  // average the larger stream's grid down to the smaller one
};

// Pipeline parameters. Defaults build the standard two-resolution, two-layer
// 102-channel representation.
struct ScatterConfig {
    int levels = 2;                            // wavelet scales J (>= 2)
    std::map<int, double> log_k = {{1, 1.1}};  // scale -> log offset; absent scale = identity
    std::vector<double> resolution_factors = {1.5, 2.0};
    OutputAlignment alignment = OutputAlignment::kAreaAverage;
    double pixel_scale = 1.0;  // multiplies input values before extraction

    // Throws ParameterError on violated invariants (levels < 2, k <= 0,
    // factor < 1 or non-finite, empty factor list).
    void validate() const;
};

// key=value text, '#' comments. Keys: levels, k<j> (e.g. k1), resolution_factors
// (comma-separated), alignment, pixel_scale. Unknown keys are parse errors.
ScatterConfig parse_scatter_config(const std::string& text, const std::string& source_name);
ScatterConfig load_scatter_config(const std::string& path);

// Canonical one-line-per-key form; equal configs serialize identically.
std::string canonical_config_text(const ScatterConfig& cfg);
// FNV-1a over canonical_config_text, printed as 16 hex digits elsewhere.
std::uint64_t config_hash(const ScatterConfig& cfg);

// Channel identity: layer m, first/second filtering stage (scale, orientation),
// source color for m=0, and which resolution stream it came from.
struct ScatterPath {
    int m = 0;
    int color = -1;      // 0..2 for m=0 channels, else -1
    int j1 = -1, r1 = -1;
    int j2 = -1, r2 = -1;
    double resolution_factor = 1.0;

    bool operator==(const ScatterPath&) const = default;
    std::string to_string() const;
    static ScatterPath parse(const std::string& text);
};

struct SubbandEnvelope {
    ScatterPath path;
    ImagePlane plane;
};

// Stacked scattering output: data is channel-major, each channel row-major.
struct FeatureTensor {
    int channels = 0;
    int height = 0;
    int width = 0;
    std::vector<double> data;
    std::vector<ScatterPath> manifest;

    double& at(int c, int i, int j) {
        return data[(static_cast<std::size_t>(c) * height + i) * width + j];
    }
    double at(int c, int i, int j) const {
        return data[(static_cast<std::size_t>(c) * height + i) * width + j];
    }
};

// Bilinear resize by `factor`, target sides snapped to the nearest multiple
// of 2^levels. factor == 1 with already-divisible input is an exact identity.
ImageRgb resample_image(const ImageRgb& image, double factor, int levels);

// Unit-DC Gaussian smoothing (sigma = 2^(J-1) input pixels, 4-sigma support)
// followed by decimation by 2^J at phase 0.
ImagePlane smooth_decimate(const ImagePlane& plane, const ScatterConfig& cfg);

// Per-color smooth+decimate of the raw image: the 3 layer-0 channels.
std::vector<SubbandEnvelope> layer0(const ImageRgb& image, const ScatterConfig& cfg);

// Complex modulus of every oriented band per color, fused across color by
// root-sum-of-squares: 6 orientations x J scales envelopes, full band rate.
std::vector<SubbandEnvelope> layer1_envelopes(const ImageRgb& image, const ScatterConfig& cfg,
                                              const WaveletFilterSet& filters);

// log(U + k_j) where scale j has a configured k; identity otherwise.
SubbandEnvelope parametric_log(const SubbandEnvelope& envelope, const ScatterConfig& cfg);

// Second layer: each post-log scale-1 envelope re-filtered one octave down
// (6 orientations) and modulus-taken; 36 envelopes.
std::vector<SubbandEnvelope> layer2_envelopes(const std::vector<SubbandEnvelope>& u1_scale1,
                                              const ScatterConfig& cfg,
                                              const WaveletFilterSet& filters);

// [layer0 | smoothed post-log layer1 | smoothed layer2] = 51 channels at
// H/2^J x W/2^J. resolution_tag is stamped into every manifest entry.
FeatureTensor scatter_one_resolution(const ImageRgb& image, const ScatterConfig& cfg,
                                     const WaveletFilterSet& filters,
                                     double resolution_tag = 1.0);

// Full representation: one 51-channel block per resolution factor, aligned
// onto the smallest stream grid, concatenated in config order.
FeatureTensor extract_features(const ImageRgb& image, const ScatterConfig& cfg,
                               const WaveletFilterSet& filters);

// Exact box/area downsize (fractional cell overlap); used for alignment.
ImagePlane area_average_resize(const ImagePlane& plane, int out_rows, int out_cols);

} // namespace scatnet
