#include "scatnet/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <vector>

#include "scatnet/errors.hpp"

namespace scatnet {
namespace {

constexpr int kSide = 32;

double urand(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double jitter(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * urand(rng);
}

using Pattern = std::vector<double>;  // kSide*kSide, roughly [-1,1]

void grating(Pattern& p, double theta, double freq, double phase) {
    const double cx = std::cos(theta), sx = std::sin(theta);
    const double w = 2.0 * std::numbers::pi * freq;
    for (int r = 0; r < kSide; ++r)
        for (int c = 0; c < kSide; ++c)
            p[static_cast<std::size_t>(r) * kSide + c] = std::cos(w * (c * cx + r * sx) + phase);
}

Pattern make_pattern(int class_id, std::mt19937_64& rng) {
    Pattern p(static_cast<std::size_t>(kSide) * kSide, 0.0);
    const double deg = std::numbers::pi / 180.0;
    switch (class_id) {
        case 0:
        case 1:
        case 2:
        case 3: {
            const double theta = (45.0 * class_id + jitter(rng, -8.0, 8.0)) * deg;
            grating(p, theta, jitter(rng, 0.20, 0.30), jitter(rng, 0.0, 2 * std::numbers::pi));
            break;
        }
        case 4: {  // plaid: both axes at once
            Pattern q(p.size());
            grating(p, 0.0, jitter(rng, 0.20, 0.28), jitter(rng, 0.0, 2 * std::numbers::pi));
            grating(q, 90.0 * deg, jitter(rng, 0.20, 0.28),
                    jitter(rng, 0.0, 2 * std::numbers::pi));
            for (std::size_t s = 0; s < p.size(); ++s) p[s] = 0.5 * (p[s] + q[s]);
            break;
        }
        case 5: {  // soft blobs, random placement and sign
            for (int blob = 0; blob < 6; ++blob) {
                const double cr = jitter(rng, 0.0, kSide);
                const double cc = jitter(rng, 0.0, kSide);
                const double sg = jitter(rng, 2.0, 3.5);
                const double amp = urand(rng) < 0.5 ? -1.0 : 1.0;
                for (int r = 0; r < kSide; ++r)
                    for (int c = 0; c < kSide; ++c) {
                        const double d2 = (r - cr) * (r - cr) + (c - cc) * (c - cc);
                        p[static_cast<std::size_t>(r) * kSide + c] +=
                            amp * std::exp(-d2 / (2 * sg * sg));
                    }
            }
            double peak = 1e-9;
            for (double v : p) peak = std::max(peak, std::abs(v));
            for (double& v : p) v /= peak;
            break;
        }
        case 6: {  // fine noise, slight smoothing to kill the highest octave
            Pattern w(p.size());
            for (double& v : w) v = 2.0 * urand(rng) - 1.0;
            for (int r = 0; r < kSide; ++r)
                for (int c = 0; c < kSide; ++c) {
                    double acc = 0.0, norm = 0.0;
                    for (int dr = -1; dr <= 1; ++dr)
                        for (int dc = -1; dc <= 1; ++dc) {
                            const int rr = (r + dr + kSide) % kSide;
                            const int cc = (c + dc + kSide) % kSide;
                            const double g = (dr == 0 && dc == 0) ? 2.0 : 1.0;
                            acc += g * w[static_cast<std::size_t>(rr) * kSide + cc];
                            norm += g;
                        }
                    p[static_cast<std::size_t>(r) * kSide + c] = 2.5 * acc / norm;
                }
            break;
        }
        case 7: {  // rings around a random center
            const double cr = jitter(rng, 4.0, kSide - 4.0);
            const double cc = jitter(rng, 4.0, kSide - 4.0);
            const double w = 2.0 * std::numbers::pi * jitter(rng, 0.18, 0.26);
            const double phase = jitter(rng, 0.0, 2 * std::numbers::pi);
            for (int r = 0; r < kSide; ++r)
                for (int c = 0; c < kSide; ++c) {
                    const double d = std::hypot(r - cr, c - cc);
                    p[static_cast<std::size_t>(r) * kSide + c] = std::cos(w * d + phase);
                }
            break;
        }
        case 8: {  // both diagonals
            Pattern q(p.size());
            grating(p, 45.0 * deg + jitter(rng, -5.0, 5.0) * deg, jitter(rng, 0.20, 0.28),
                    jitter(rng, 0.0, 2 * std::numbers::pi));
            grating(q, 135.0 * deg + jitter(rng, -5.0, 5.0) * deg, jitter(rng, 0.20, 0.28),
                    jitter(rng, 0.0, 2 * std::numbers::pi));
            for (std::size_t s = 0; s < p.size(); ++s) p[s] = 0.5 * (p[s] + q[s]);
            break;
        }
        case 9: {  // slow sweep, random direction
            const double theta = jitter(rng, 0.0, std::numbers::pi);
            grating(p, theta, jitter(rng, 0.03, 0.06), jitter(rng, 0.0, 2 * std::numbers::pi));
            break;
        }
        default:
            throw ParameterError("texture class must be 0..9, got " + std::to_string(class_id));
    }
    return p;
}

} // namespace

std::uint64_t synth_record_key(std::uint64_t seed, int index) {
    // splitmix64 of (seed, index) — decorrelates neighbouring records
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

ImageRgb synth_texture(int class_id, std::uint64_t sample_key) {
    if (class_id < 0 || class_id >= kSynthClasses)
        throw ParameterError("texture class must be 0..9, got " + std::to_string(class_id));
    std::mt19937_64 rng(sample_key);
    const Pattern p = make_pattern(class_id, rng);
    const double amp = jitter(rng, 0.22, 0.38);
    ImageRgb img;
    img.r = ImagePlane(kSide, kSide);
    img.g = ImagePlane(kSide, kSide);
    img.b = ImagePlane(kSide, kSide);
    for (int ch = 0; ch < 3; ++ch) {
        ImagePlane& plane = ch == 0 ? img.r : ch == 1 ? img.g : img.b;
        const double mean = jitter(rng, 0.35, 0.65);
        const double gain = amp * jitter(rng, 0.6, 1.0);
        const double nz = jitter(rng, 0.02, 0.06);
        for (std::size_t s = 0; s < plane.v.size(); ++s) {
            const double noise = nz * (2.0 * urand(rng) - 1.0);
            plane.v[s] = std::clamp(mean + gain * p[s] + noise, 0.0, 1.0);
        }
    }
    return img;
}

void write_synth_cifar_batch(const std::string& path, int count, std::uint64_t seed) {
    if (count < 0) throw ParameterError("record count must be >= 0");
    std::string out;
    out.reserve(static_cast<std::size_t>(count) * 3073);
    for (int i = 0; i < count; ++i) {
        const int label = i % kSynthClasses;
        const ImageRgb img = synth_texture(label, synth_record_key(seed, i));
        out.push_back(static_cast<char>(label));
        for (int ch = 0; ch < 3; ++ch) {
            const ImagePlane& plane = ch == 0 ? img.r : ch == 1 ? img.g : img.b;
            for (double v : plane.v)
                out.push_back(static_cast<char>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)));
        }
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw DataError("cannot write: " + path);
    f.write(out.data(), static_cast<std::streamsize>(out.size()));
    if (!f) throw DataError("write failed: " + path);
}

} // namespace scatnet
