#pragma once

#include <cstdint>
#include <string>

#include "scatnet/image.hpp"

namespace scatnet {

// Ten procedural 32x32 texture families for self-contained experiments.
// Classes differ in orientation/frequency structure only; brightness, color
// balance, phase and pattern placement are randomized per sample, so class
// identity is carried by texture rather than by any fixed pixel or hue:
//   0-3  oriented gratings at 0/45/90/135 degrees (angle jittered)
//   4    axis-aligned plaid       5  soft random blobs
//   6    fine bandpass noise      7  concentric rings, random center
//   8    diagonal cross-hatch     9  low-frequency sweep
ImageRgb synth_texture(int class_id, std::uint64_t sample_key);

inline constexpr int kSynthClasses = 10;

// Emits `count` records in the 3073-byte labelled binary batch layout,
// labels cycling 0..9. Deterministic in (count, seed).
void write_synth_cifar_batch(const std::string& path, int count, std::uint64_t seed);

// Per-record generator key; exposed so tests can rebuild single records.
std::uint64_t synth_record_key(std::uint64_t seed, int index);

} // namespace scatnet
