#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "scatnet/errors.hpp"
#include "scatnet/filters.hpp"

using namespace scatnet;

namespace {

double tap_sum(const std::vector<double>& f) {
    double s = 0.0;
    for (double v : f) s += v;
    return s;
}

// Re-serialize a filter set in the on-disk text format so individual
// coefficients can be perturbed before re-parsing.
std::string serialize(const WaveletFilterSet& f) {
    struct Named {
        const char* name;
        const std::vector<double>* taps;
    };
    const Named sections[] = {
        {"level1_lowpass_a", &f.level1_lowpass_a},
        {"level1_highpass_a", &f.level1_highpass_a},
        {"level1_lowpass_b", &f.level1_lowpass_b},
        {"level1_highpass_b", &f.level1_highpass_b},
        {"qshift_lowpass_a", &f.qshift_lowpass_a},
        {"qshift_highpass_a", &f.qshift_highpass_a},
        {"qshift_lowpass_b", &f.qshift_lowpass_b},
        {"qshift_highpass_b", &f.qshift_highpass_b},
        {"synthesis_level1_lowpass_a", &f.synthesis_level1_lowpass_a},
        {"synthesis_level1_highpass_a", &f.synthesis_level1_highpass_a},
        {"synthesis_level1_lowpass_b", &f.synthesis_level1_lowpass_b},
        {"synthesis_level1_highpass_b", &f.synthesis_level1_highpass_b},
        {"synthesis_qshift_lowpass_a", &f.synthesis_qshift_lowpass_a},
        {"synthesis_qshift_highpass_a", &f.synthesis_qshift_highpass_a},
        {"synthesis_qshift_lowpass_b", &f.synthesis_qshift_lowpass_b},
        {"synthesis_qshift_highpass_b", &f.synthesis_qshift_highpass_b},
    };
    std::ostringstream out;
    char buf[64];
    for (const Named& s : sections) {
        out << "[" << s.name << "]\n";
        for (double v : *s.taps) {
            std::snprintf(buf, sizeof buf, "%.17g\n", v);
            out << buf;
        }
    }
    return out.str();
}

}  // namespace

TEST_CASE("builtin filter set loads and passes integrity checks") {
    const WaveletFilterSet f = load_builtin_filter_set();

    CHECK(f.level1_lowpass_a.size() == 13);
    CHECK(f.level1_highpass_a.size() == 19);
    CHECK(f.qshift_lowpass_a.size() == 14);
    CHECK(f.qshift_highpass_a.size() == 14);

    // Lowpass branches sum to sqrt(2), highpass branches to zero.
    const double rt2 = std::sqrt(2.0);
    CHECK(tap_sum(f.level1_lowpass_a) == doctest::Approx(rt2).epsilon(1e-12));
    CHECK(tap_sum(f.qshift_lowpass_a) == doctest::Approx(rt2).epsilon(1e-12));
    CHECK(std::abs(tap_sum(f.level1_highpass_a)) < 1e-12);
    CHECK(std::abs(tap_sum(f.qshift_highpass_a)) < 1e-12);

    const FilterSelfCheck chk = run_filter_self_check(f);
    CHECK(chk.level1_roundtrip < 1e-12);
    CHECK(chk.qshift_roundtrip_a < 1e-12);
    CHECK(chk.qshift_roundtrip_b < 1e-12);
}

TEST_CASE("first-stage sections are shared across trees and symmetric") {
    const WaveletFilterSet f = load_builtin_filter_set();
    CHECK(f.level1_lowpass_a == f.level1_lowpass_b);
    CHECK(f.level1_highpass_a == f.level1_highpass_b);
    CHECK(f.synthesis_level1_lowpass_a == f.synthesis_level1_lowpass_b);

    std::vector<double> rev = f.level1_lowpass_a;
    std::reverse(rev.begin(), rev.end());
    CHECK(rev == f.level1_lowpass_a);
}

TEST_CASE("quarter-shift pairs are mutual reversals") {
    const WaveletFilterSet f = load_builtin_filter_set();
    std::vector<double> rev = f.qshift_lowpass_a;
    std::reverse(rev.begin(), rev.end());
    CHECK(rev == f.qshift_lowpass_b);
    rev = f.qshift_highpass_a;
    std::reverse(rev.begin(), rev.end());
    CHECK(rev == f.qshift_highpass_b);
    rev = f.qshift_lowpass_a;
    std::reverse(rev.begin(), rev.end());
    CHECK(rev == f.synthesis_qshift_lowpass_a);
}

TEST_CASE("filter text round-trips through the parser") {
    const WaveletFilterSet f = load_builtin_filter_set();
    const WaveletFilterSet g = parse_filter_text(serialize(f), "reserialized");
    CHECK(g.level1_lowpass_a == f.level1_lowpass_a);
    CHECK(g.qshift_highpass_b == f.qshift_highpass_b);
    CHECK(g.synthesis_qshift_lowpass_a == f.synthesis_qshift_lowpass_a);
}

TEST_CASE("filter file loads from disk") {
    const WaveletFilterSet f = load_builtin_filter_set();
    const std::string path = "test_filters_tmp.txt";
    {
        std::ofstream out(path, std::ios::binary);
        out << builtin_filter_text();
    }
    const WaveletFilterSet g = load_filter_set(path);
    CHECK(g.level1_lowpass_a == f.level1_lowpass_a);
    CHECK(g.qshift_lowpass_a == f.qshift_lowpass_a);
    std::remove(path.c_str());
    CHECK_THROWS_AS((void)load_filter_set("no_such_filter_file.txt"), ParseError);
}

TEST_CASE("tampered coefficients are rejected") {
    WaveletFilterSet f = load_builtin_filter_set();
    f.qshift_lowpass_a[3] += 1e-4;
    CHECK_THROWS_AS((void)parse_filter_text(serialize(f), "tampered"), FilterIntegrityError);

    f = load_builtin_filter_set();
    f.level1_highpass_a[9] *= -1.0;
    f.level1_highpass_b[9] *= -1.0;
    CHECK_THROWS_AS((void)parse_filter_text(serialize(f), "tampered"), FilterIntegrityError);

    // Breaking the reversal relation between the two trees must also fail,
    // even though each tree still sums correctly.
    f = load_builtin_filter_set();
    std::swap(f.qshift_lowpass_b[0], f.qshift_lowpass_b[13]);
    CHECK_THROWS_AS((void)parse_filter_text(serialize(f), "tampered"), FilterIntegrityError);
}

TEST_CASE("malformed filter text reports parse errors") {
    CHECK_THROWS_AS((void)parse_filter_text("", "empty"), ParseError);

    // Coefficient before any section header.
    CHECK_THROWS_AS((void)parse_filter_text("0.25\n", "headerless"), ParseError);

    // Unknown section name.
    std::string txt = builtin_filter_text();
    auto pos = txt.find("[qshift_lowpass_a]");
    REQUIRE(pos != std::string::npos);
    std::string bad = txt;
    bad.replace(pos, 18, "[qshift_mystery_a]");
    CHECK_THROWS_AS((void)parse_filter_text(bad, "unknown-section"), ParseError);

    // Duplicate section.
    pos = txt.find("[level1_lowpass_b]");
    REQUIRE(pos != std::string::npos);
    bad = txt;
    bad.replace(pos, 18, "[level1_lowpass_a]");
    CHECK_THROWS_AS((void)parse_filter_text(bad, "dup-section"), ParseError);

    // Missing section: drop everything from the last header on.
    pos = txt.rfind("[synthesis_qshift_highpass_b]");
    REQUIRE(pos != std::string::npos);
    bad = txt.substr(0, pos);
    CHECK_THROWS_AS((void)parse_filter_text(bad, "missing-section"), ParseError);

    // Non-numeric coefficient, with the line number in the message.
    txt = "[level1_lowpass_a]\n0.5\nbananas\n";
    try {
        (void)parse_filter_text(txt, "badnum");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(std::string(e.what()).find("badnum:3") != std::string::npos);
    }
}

TEST_CASE("comments and blank lines are ignored") {
    std::string txt = "# leading comment\n\n" + builtin_filter_text();
    const WaveletFilterSet f = parse_filter_text(txt, "commented");
    CHECK(f.level1_lowpass_a == load_builtin_filter_set().level1_lowpass_a);
}

TEST_CASE("error kinds map to documented exit codes") {
    CHECK(Error::exit_code(ErrorKind::parse) == 2);
    CHECK(Error::exit_code(ErrorKind::format) == 2);
    CHECK(Error::exit_code(ErrorKind::data) == 2);
    CHECK(Error::exit_code(ErrorKind::shape) == 2);
    CHECK(Error::exit_code(ErrorKind::parameter) == 2);
    CHECK(Error::exit_code(ErrorKind::filter_integrity) == 3);
    CHECK(Error::exit_code(ErrorKind::divergence) == 3);
    CHECK(Error::exit_code(ErrorKind::numeric) == 3);
}
