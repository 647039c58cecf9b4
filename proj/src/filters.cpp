#include "scatnet/filters.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <random>
#include <sstream>

#include "scatnet/errors.hpp"
#include "generated/default_filters.hpp"

namespace scatnet {

namespace {

const char* kSectionNames[] = {
    "level1_lowpass_a",
    "level1_highpass_a",
    "level1_lowpass_b",
    "level1_highpass_b",
    "qshift_lowpass_a",
    "qshift_highpass_a",
    "qshift_lowpass_b",
    "qshift_highpass_b",
    "synthesis_level1_lowpass_a",
    "synthesis_level1_highpass_a",
    "synthesis_level1_lowpass_b",
    "synthesis_level1_highpass_b",
    "synthesis_qshift_lowpass_a",
    "synthesis_qshift_highpass_a",
    "synthesis_qshift_lowpass_b",
    "synthesis_qshift_highpass_b",
};

std::vector<double>& section_ref(WaveletFilterSet& f, int i) {
    std::vector<double>* ptrs[] = {
        &f.level1_lowpass_a,           &f.level1_highpass_a,
        &f.level1_lowpass_b,           &f.level1_highpass_b,
        &f.qshift_lowpass_a,           &f.qshift_highpass_a,
        &f.qshift_lowpass_b,           &f.qshift_highpass_b,
        &f.synthesis_level1_lowpass_a, &f.synthesis_level1_highpass_a,
        &f.synthesis_level1_lowpass_b, &f.synthesis_level1_highpass_b,
        &f.synthesis_qshift_lowpass_a, &f.synthesis_qshift_highpass_a,
        &f.synthesis_qshift_lowpass_b, &f.synthesis_qshift_highpass_b,
    };
    return *ptrs[i];
}

bool is_reverse_of(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (x[i] != y[y.size() - 1 - i]) return false;
    return true;
}

bool is_palindrome(const std::vector<double>& x) { return is_reverse_of(x, x); }

double sum_of(const std::vector<double>& x) {
    double s = 0;
    for (double v : x) s += v;
    return s;
}

std::vector<double> random_signal(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    std::vector<double> x(n);
    for (double& v : x) v = dist(rng);
    return x;
}

double rel_l2_err(const std::vector<double>& got, const std::vector<double>& want) {
    double num = 0, den = 0;
    for (std::size_t i = 0; i < got.size(); ++i) {
        double d = got[i] - want[i];
        num += d * d;
        den += want[i] * want[i];
    }
    return std::sqrt(num / den);
}

// Undecimated two-band split/merge on a circular signal; exactness depends
// only on the filter algebra, not on the 2-D boundary scheme.
double level1_roundtrip_error(const std::vector<double>& h0, const std::vector<double>& h1,
                              const std::vector<double>& g0, const std::vector<double>& g1) {
    const int n = 64;
    auto x = random_signal(n, 0x5ca77e71u);
    int c_h0 = (static_cast<int>(h0.size()) - 1) / 2;
    int c_h1 = (static_cast<int>(h1.size()) - 1) / 2;
    int c_g0 = (static_cast<int>(g0.size()) - 1) / 2;
    int c_g1 = (static_cast<int>(g1.size()) - 1) / 2;
    auto filt = [&](const std::vector<double>& src, const std::vector<double>& f, int c) {
        std::vector<double> out(n, 0.0);
        for (int i = 0; i < n; ++i)
            for (int t = 0; t < static_cast<int>(f.size()); ++t)
                out[i] += f[t] * src[((i + c - t) % n + n) % n];
        return out;
    };
    auto lo = filt(x, h0, c_h0);
    auto hi = filt(x, h1, c_h1);
    auto rl = filt(lo, g0, c_g0);
    auto rh = filt(hi, g1, c_g1);
    std::vector<double> xr(n);
    for (int i = 0; i < n; ++i) xr[i] = 0.5 * (rl[i] + rh[i]);
    return rel_l2_err(xr, x);
}

// Decimated two-channel bank with adjoint synthesis on a circular signal.
double qshift_roundtrip_error(const std::vector<double>& h0, const std::vector<double>& h1) {
    const int n = 64;
    auto x = random_signal(n, 0x9b4dfac3u);
    const int taps = static_cast<int>(h0.size());
    std::vector<double> y0(n / 2, 0.0), y1(n / 2, 0.0);
    for (int k = 0; k < n / 2; ++k)
        for (int t = 0; t < taps; ++t) {
            int idx = ((2 * k - t) % n + n) % n;
            y0[k] += h0[t] * x[idx];
            y1[k] += h1[t] * x[idx];
        }
    std::vector<double> xr(n, 0.0);
    for (int k = 0; k < n / 2; ++k)
        for (int t = 0; t < taps; ++t) {
            int idx = ((2 * k - t) % n + n) % n;
            xr[idx] += h0[t] * y0[k] + h1[t] * y1[k];
        }
    return rel_l2_err(xr, x);
}

void integrity_check(const WaveletFilterSet& f, const std::string& src) {
    auto fail = [&](const std::string& msg) { throw FilterIntegrityError(src + ": " + msg); };
    const double sqrt2 = std::sqrt(2.0);

    struct Named {
        const char* name;
        const std::vector<double>* seq;
        bool lowpass;
        bool level1;
    };
    const Named all[] = {
        {"level1_lowpass_a", &f.level1_lowpass_a, true, true},
        {"level1_highpass_a", &f.level1_highpass_a, false, true},
        {"level1_lowpass_b", &f.level1_lowpass_b, true, true},
        {"level1_highpass_b", &f.level1_highpass_b, false, true},
        {"qshift_lowpass_a", &f.qshift_lowpass_a, true, false},
        {"qshift_highpass_a", &f.qshift_highpass_a, false, false},
        {"qshift_lowpass_b", &f.qshift_lowpass_b, true, false},
        {"qshift_highpass_b", &f.qshift_highpass_b, false, false},
        {"synthesis_level1_lowpass_a", &f.synthesis_level1_lowpass_a, true, true},
        {"synthesis_level1_highpass_a", &f.synthesis_level1_highpass_a, false, true},
        {"synthesis_level1_lowpass_b", &f.synthesis_level1_lowpass_b, true, true},
        {"synthesis_level1_highpass_b", &f.synthesis_level1_highpass_b, false, true},
        {"synthesis_qshift_lowpass_a", &f.synthesis_qshift_lowpass_a, true, false},
        {"synthesis_qshift_highpass_a", &f.synthesis_qshift_highpass_a, false, false},
        {"synthesis_qshift_lowpass_b", &f.synthesis_qshift_lowpass_b, true, false},
        {"synthesis_qshift_highpass_b", &f.synthesis_qshift_highpass_b, false, false},
    };

    for (const auto& s : all) {
        if (s.level1) {
            if (s.seq->size() % 2 == 0 || s.seq->size() < 3)
                fail(std::string(s.name) + ": level-1 sequences must have odd length >= 3");
            if (!is_palindrome(*s.seq))
                fail(std::string(s.name) + ": level-1 sequences must be symmetric");
        } else {
            if (s.seq->size() % 2 != 0 || s.seq->size() < 2)
                fail(std::string(s.name) + ": quarter-shift sequences must have even length >= 2");
        }
        double sum = sum_of(*s.seq);
        if (s.lowpass && std::abs(sum - sqrt2) > 1e-8)
            fail(std::string(s.name) + ": lowpass must sum to sqrt(2), got " + std::to_string(sum));
        if (!s.lowpass && std::abs(sum) > 1e-10)
            fail(std::string(s.name) + ": highpass must sum to 0, got " + std::to_string(sum));
    }

    if (f.level1_lowpass_b != f.level1_lowpass_a || f.level1_highpass_b != f.level1_highpass_a ||
        f.synthesis_level1_lowpass_b != f.synthesis_level1_lowpass_a ||
        f.synthesis_level1_highpass_b != f.synthesis_level1_highpass_a)
        fail("level-1 tree-b sections must equal tree-a (trees differ by sampling phase only)");

    if (!is_reverse_of(f.qshift_lowpass_b, f.qshift_lowpass_a))
        fail("qshift_lowpass_b must be the reverse of qshift_lowpass_a");
    if (!is_reverse_of(f.qshift_highpass_b, f.qshift_highpass_a))
        fail("qshift_highpass_b must be the reverse of qshift_highpass_a");
    if (!is_reverse_of(f.synthesis_qshift_lowpass_a, f.qshift_lowpass_a) ||
        !is_reverse_of(f.synthesis_qshift_highpass_a, f.qshift_highpass_a) ||
        !is_reverse_of(f.synthesis_qshift_lowpass_b, f.qshift_lowpass_b) ||
        !is_reverse_of(f.synthesis_qshift_highpass_b, f.qshift_highpass_b))
        fail("each synthesis quarter-shift sequence must be the reverse of its analysis counterpart");

    auto chk = run_filter_self_check(f);
    if (chk.level1_roundtrip > 1e-10)
        fail("level-1 round-trip error " + std::to_string(chk.level1_roundtrip) + " exceeds 1e-10");
    if (chk.qshift_roundtrip_a > 1e-10 || chk.qshift_roundtrip_b > 1e-10)
        fail("quarter-shift round-trip error exceeds 1e-10 (a=" +
             std::to_string(chk.qshift_roundtrip_a) + ", b=" +
             std::to_string(chk.qshift_roundtrip_b) + ")");
}

} // namespace

FilterSelfCheck run_filter_self_check(const WaveletFilterSet& f) {
    FilterSelfCheck c;
    c.level1_roundtrip =
        level1_roundtrip_error(f.level1_lowpass_a, f.level1_highpass_a,
                               f.synthesis_level1_lowpass_a, f.synthesis_level1_highpass_a);
    c.qshift_roundtrip_a = qshift_roundtrip_error(f.qshift_lowpass_a, f.qshift_highpass_a);
    c.qshift_roundtrip_b = qshift_roundtrip_error(f.qshift_lowpass_b, f.qshift_highpass_b);
    return c;
}

WaveletFilterSet parse_filter_text(const std::string& text, const std::string& src) {
    WaveletFilterSet f;
    std::map<std::string, int> want;
    for (int i = 0; i < 16; ++i) want[kSectionNames[i]] = i;

    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    int current = -1;
    std::vector<bool> seen(16, false);
    while (std::getline(in, line)) {
        ++lineno;
        // strip comments and surrounding whitespace
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto b = line.find_first_not_of(" \t\r");
        if (b == std::string::npos) continue;
        auto e = line.find_last_not_of(" \t\r");
        line = line.substr(b, e - b + 1);

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ParseError(src + ":" + std::to_string(lineno) + ": unterminated section header");
            std::string name = line.substr(1, line.size() - 2);
            auto it = want.find(name);
            if (it == want.end())
                throw ParseError(src + ":" + std::to_string(lineno) + ": unknown section '" + name + "'");
            if (seen[it->second])
                throw ParseError(src + ":" + std::to_string(lineno) + ": duplicate section '" + name + "'");
            seen[it->second] = true;
            current = it->second;
            continue;
        }
        if (current < 0)
            throw ParseError(src + ":" + std::to_string(lineno) + ": coefficient before any section header");
        char* end = nullptr;
        double v = std::strtod(line.c_str(), &end);
        if (end == line.c_str() || *end != '\0')
            throw ParseError(src + ":" + std::to_string(lineno) + ": not a coefficient: '" + line + "'");
        section_ref(f, current).push_back(v);
    }
    for (int i = 0; i < 16; ++i) {
        if (!seen[i]) throw ParseError(src + ": missing section '" + std::string(kSectionNames[i]) + "'");
        if (section_ref(f, i).empty())
            throw ParseError(src + ": section '" + std::string(kSectionNames[i]) + "' is empty");
    }

    integrity_check(f, src);
    return f;
}

WaveletFilterSet load_filter_set(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open filter file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_filter_text(ss.str(), path);
}

const std::string& builtin_filter_text() {
    static const std::string text = kDefaultFilterText;
    return text;
}

WaveletFilterSet load_builtin_filter_set() {
    return parse_filter_text(builtin_filter_text(), "<builtin>");
}

} // namespace scatnet
