#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "scatnet/image.hpp"
#include "scatnet/scatternet.hpp"

namespace scatnet {

struct LabeledImage {
    ImageRgb image;       // values in [0,1]
    int label = 0;        // class id, 0..9 for CIFAR-10
    int source_index = 0; // record position in the originating file
};

// Standard CIFAR-10 binary batch: 3073-byte records, 1 label byte followed by
// 3072 channel-planar pixel bytes (R plane, G plane, B plane; 32x32 row-major).
// Pixels map to [0,1] by division by 255; record order is preserved.
std::vector<LabeledImage> load_cifar10_batch(const std::string& path);

// Seeded balanced draw: total/num_classes images per class (classes = distinct
// labels present), chosen by per-class shuffles of one seeded generator.
// Output is ordered by ascending class, then draw order.
std::vector<LabeledImage> sample_balanced_subset(const std::vector<LabeledImage>& data,
                                                 int total, std::uint64_t seed);

// Binary 8-bit P6 portable pixmaps. Values scale to/from [0,1].
ImageRgb load_ppm(const std::string& path);
void write_ppm(const ImageRgb& image, const std::string& path);

// One feature container: homogeneous tensors + labels + provenance.
struct FeatureSet {
    std::vector<FeatureTensor> tensors;
    std::vector<int> labels;        // one per tensor
    std::uint64_t seed = 0;         // subset draw seed recorded at write time
    std::string config_hash;        // 16 hex digits
};

// Serialized layout (little-endian):
//   8-byte magic "SCATFT01"
//   u32 version(=1), count, channels, height, width
//   u8 scalar width (4 or 8)
//   payload: count*channels*height*width scalars
//   trailing text manifest (seed, config hash, channel paths, labels)
// Writing is bit-deterministic: same inputs give identical files.
void write_features(const FeatureSet& fs, const std::string& path, int scalar_width);
FeatureSet read_features(const std::string& path);

} // namespace scatnet
