#pragma once

#include <string>
#include <vector>

namespace scatnet {

// Complete two-tree filter bank: level-1 biorthogonal pair plus the
// quarter-shift pair used from level 2 down, analysis and synthesis.
//
// Structural contract enforced at load time (FilterIntegrityError otherwise):
//  - level-1 sequences have odd length and are palindromic (the transform
//    realizes the two level-1 trees as alternate sampling phases of the same
//    symmetric filters, and the boundary extension logic relies on symmetry);
//    tree-b level-1 sections must equal tree-a.
//  - quarter-shift sequences have even length; tree b is the exact reverse of
//    tree a, and each synthesis sequence is the exact reverse of its analysis
//    counterpart (orthonormal pair).
//  - every lowpass sums to sqrt(2) within 1e-8, every highpass to 0 within
//    1e-10.
//  - a 1-D round-trip through each tree reconstructs a random signal to
//    relative L2 error <= 1e-10 (level 1: undecimated two-band split; level
//    >=2: decimated orthonormal two-channel bank).
struct WaveletFilterSet {
    std::vector<double> level1_lowpass_a;
    std::vector<double> level1_highpass_a;
    std::vector<double> level1_lowpass_b;
    std::vector<double> level1_highpass_b;
    std::vector<double> qshift_lowpass_a;
    std::vector<double> qshift_highpass_a;
    std::vector<double> qshift_lowpass_b;
    std::vector<double> qshift_highpass_b;
    std::vector<double> synthesis_level1_lowpass_a;
    std::vector<double> synthesis_level1_highpass_a;
    std::vector<double> synthesis_level1_lowpass_b;
    std::vector<double> synthesis_level1_highpass_b;
    std::vector<double> synthesis_qshift_lowpass_a;
    std::vector<double> synthesis_qshift_highpass_a;
    std::vector<double> synthesis_qshift_lowpass_b;
    std::vector<double> synthesis_qshift_highpass_b;
};

// Parses the sectioned text format (see docs/formats.md) and runs the full
// self-check battery. `source_name` appears in error messages.
WaveletFilterSet parse_filter_text(const std::string& text, const std::string& source_name);

// Reads and validates a coefficient file.
WaveletFilterSet load_filter_set(const std::string& path);

// The coefficient set compiled into the binary (identical to the shipped
// data/dtcwt_filters.txt); validated the same way.
WaveletFilterSet load_builtin_filter_set();

// Raw text of the built-in coefficient file (tests use it to fabricate files).
const std::string& builtin_filter_text();

// Measured 1-D round-trip errors, exposed for diagnostics ("check" suites).
struct FilterSelfCheck {
    double level1_roundtrip;
    double qshift_roundtrip_a;
    double qshift_roundtrip_b;
};
FilterSelfCheck run_filter_self_check(const WaveletFilterSet& f);

} // namespace scatnet
