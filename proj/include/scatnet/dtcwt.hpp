#pragma once

#include <array>
#include <vector>

#include "scatnet/filters.hpp"
#include "scatnet/image.hpp"

namespace scatnet {

// Orientation index -> nominal band centre in degrees, measured from the
// horizontal axis. Index order is fixed; every consumer relies on it.
inline constexpr std::array<int, 6> kOrientationDegrees = {15, 45, 75, 105, 135, 165};

// One oriented complex band. Planes are quarter the sample count of the
// level's input grid (half along each axis).
struct ComplexSubband {
    int level = 0;        // 1-based decomposition level
    int orientation = 0;  // 0..5, see kOrientationDegrees
    ImagePlane real_part;
    ImagePlane imag_part;
};

struct DtcwtPyramid {
    int levels = 0;
    // subbands[l][o]: level l+1, orientation o. Each inner array is ordered
    // by ascending orientation index.
    std::vector<std::array<ComplexSubband, 6>> subbands;
    // Coarse residual on the decimated grid: input_rows/2^levels per side.
    ImagePlane lowpass;
    // Full interleaved four-tree lowpass state (2x the decimated grid per
    // side). inverse() needs this; lowpass is a phase-0 subsampling of it.
    ImagePlane lowpass_state;
};

// Forward transform. Input sides must be divisible by 2^levels, levels >= 1.
DtcwtPyramid dtcwt_forward(const ImagePlane& x, int levels, const WaveletFilterSet& f);

// Exact inverse of dtcwt_forward (uses lowpass_state, not lowpass).
ImagePlane dtcwt_inverse(const DtcwtPyramid& p, const WaveletFilterSet& f);

ImagePlane complex_magnitude(const ComplexSubband& band);

// Reference path: computes one subband by direct evaluation of the level's
// equivalent kernels (no cascade). Only intended for cross-checking the fast
// transform; refuses inputs larger than 64x64.
ComplexSubband oracle_direct_subband(const ImagePlane& x, int level, int orientation,
                                     const WaveletFilterSet& f);

} // namespace scatnet
